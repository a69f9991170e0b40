"""Stochastic model of the heralded atom-photon entanglement pipeline.

One experimental trial is: a weak excitation attempt that succeeds with a
small probability, a photon arriving at a random time inside the
excitation window, a waveplate rotation of the photonic qubit followed by
a polarizing beam splitter routing to one of two photomultiplier tubes,
then a microwave pulse sequence on the atomic qubit and a fluorescence
readout (bright/dark).  PMT inefficiency is modeled as silent event
rejection, matching the heralded, post-selected character of the scheme;
atomic readout errors are modeled as label flips.

Two microwave modes are supported.  ``two_pulse`` first transfers the
upper qubit state to an auxiliary level with a pi pulse and then rotates,
so only the phase difference between the two pulses matters.
``single_pulse`` rotates directly; its effective phase then depends on
the photon arrival time through the qubit precession at the microwave
frequency, which washes out the rotation azimuth when many arrival times
are averaged.

All sampling goes through an explicitly passed ``numpy.random.Generator``
so identical seeds reproduce identical event streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .states import (
    PHOTON,
    DensityMatrix,
    MeasurementSetting,
    TwoQubitState,
    bell_pair_ideal,
    densify,
    outcome_probabilities,
    rotate,
    rotation_matrix,
    werner,
)

SINGLE_PULSE = "single_pulse"
TWO_PULSE = "two_pulse"

BRIGHT = 0  # atom found in the fluorescing manifold, qubit |0>
DARK = 1  # atom shelved in the transferred state, qubit |1~>


@dataclass(frozen=True)
class SourceParams:
    """Entanglement source budget and emitted-state configuration.

    The default probabilities multiply to the per-attempt success
    probability 2.0e-4: collection and transmission of the emitted photon
    (~1%), photon detector quantum efficiency (~20%), and the excitation
    probability kept low (~10%) to suppress double excitations.
    ``werner_p`` < 1 makes the source emit a noisy mixed pair instead of
    the ideal pure one.
    """

    excitation_probability: float = 0.10
    collection_efficiency: float = 0.01
    detector_quantum_efficiency: float = 0.20
    excitation_window: float = 50e-9
    repetition_rate: float = 8.3e3
    werner_p: float = 1.0

    def __post_init__(self) -> None:
        for name in (
            "excitation_probability",
            "collection_efficiency",
            "detector_quantum_efficiency",
            "werner_p",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} = {value!r} outside [0, 1]")
        if self.excitation_window <= 0.0 or self.repetition_rate <= 0.0:
            raise ValueError("excitation window and repetition rate must be positive")

    @property
    def success_probability(self) -> float:
        return (
            self.excitation_probability
            * self.collection_efficiency
            * self.detector_quantum_efficiency
        )

    def emitted_state(self) -> TwoQubitState | DensityMatrix:
        if self.werner_p == 1.0:
            return bell_pair_ideal()
        return werner(self.werner_p)


@dataclass(frozen=True)
class PulseSequence:
    """Microwave pulse program applied to the atom after photon detection.

    In ``two_pulse`` mode the transfer pulse area is fixed to pi and the
    rotation uses only the phase difference rotation_phase -
    transfer_phase.  In ``single_pulse`` mode the effective rotation
    azimuth is rotation_phase + 2*pi * microwave_frequency * arrival_time,
    modeling the loss of an absolute phase reference.
    """

    mode: str
    rotation_theta: float
    rotation_phase: float = 0.0
    transfer_phase: float = 0.0
    microwave_frequency: float = 14.5e9

    def __post_init__(self) -> None:
        if self.mode not in (SINGLE_PULSE, TWO_PULSE):
            raise ValueError(f"unknown pulse mode {self.mode!r}")
        if self.microwave_frequency <= 0.0:
            raise ValueError("microwave frequency must be positive")

    def effective_setting(self, arrival_time: float) -> MeasurementSetting:
        """Rotation actually applied, given the photon arrival time."""
        if self.mode == TWO_PULSE:
            return MeasurementSetting(
                self.rotation_theta, self.rotation_phase - self.transfer_phase
            )
        phase = self.rotation_phase + 2.0 * math.pi * self.microwave_frequency * arrival_time
        return MeasurementSetting(self.rotation_theta, phase)

    @property
    def nominal_setting(self) -> MeasurementSetting:
        return MeasurementSetting(self.rotation_theta, self.rotation_phase)


@dataclass(frozen=True)
class DetectorParams:
    """PMT efficiencies, atomic readout error rates, and waveplate position.

    ``waveplate_angle`` = 0 sends |0p> to PMT 1; a 45-degree (pi/4)
    position reverses the PMT roles.  Only those two positions are
    meaningful here because the analysis-basis rotation itself is applied
    separately, via the photon's measurement setting.

    ``dark_event_probability`` is the per-attempt chance that a spurious
    PMT click falsely heralds a trial with no emitted photon: the click
    lands on either tube with equal probability and the atom, never
    excited, is read out from its ground state.
    """

    pmt_efficiency_1: float = 1.0
    pmt_efficiency_2: float = 1.0
    atom_bright_error: float = 0.0
    atom_dark_error: float = 0.0
    atom_detection_duration: float = 125e-6
    waveplate_angle: float = 0.0
    dark_event_probability: float = 0.0

    def __post_init__(self) -> None:
        for name in (
            "pmt_efficiency_1",
            "pmt_efficiency_2",
            "atom_bright_error",
            "atom_dark_error",
            "dark_event_probability",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} = {value!r} outside [0, 1]")
        if self.atom_detection_duration <= 0.0:
            raise ValueError("atom detection duration must be positive")

    @classmethod
    def experiment_like(cls) -> "DetectorParams":
        """Readout errors representative of >95% fluorescence discrimination."""
        return cls(atom_bright_error=0.025, atom_dark_error=0.025)

    @property
    def pmt_role_swapped(self) -> bool:
        # Nearest quarter-turn position decides the role mapping.
        return (self.waveplate_angle % (math.pi / 2)) > math.pi / 8

    def with_swapped_pmts(self) -> "DetectorParams":
        angle = math.pi / 4 if not self.pmt_role_swapped else 0.0
        return replace(self, waveplate_angle=angle)

    def pmt_efficiency(self, pmt_index: int) -> float:
        return self.pmt_efficiency_1 if pmt_index == 0 else self.pmt_efficiency_2


@dataclass(frozen=True)
class EventRecord:
    """One successful, recorded entanglement trial."""

    attempt_index: int
    arrival_time: float
    setting_s: MeasurementSetting
    setting_p: MeasurementSetting
    photon_outcome: int  # index of the PMT that clicked
    atom_outcome: int  # BRIGHT (0) or DARK (1)
    pmt_role_swapped: bool


def attempt_entanglement(
    params: SourceParams, rng: np.random.Generator
) -> tuple[TwoQubitState | DensityMatrix, float] | None:
    """One excitation attempt; on success, the emitted pair and arrival time."""
    if rng.random() >= params.success_probability:
        return None
    arrival_time = rng.uniform(0.0, params.excitation_window)
    return params.emitted_state(), arrival_time


def single_pulse_probability(theta: float, phi: float) -> float:
    """P(|0>) after rotating (|0> + |1>)/sqrt(2) with one direct pulse."""
    return (1.0 - math.cos(phi) * math.sin(theta)) / 2.0


def two_pulse_probability(theta: float, phi: float, transfer_phi: float) -> float:
    """P(|0>) for the transfer-then-rotate sequence; only phi - transfer_phi enters."""
    return (1.0 - math.cos(phi - transfer_phi) * math.sin(theta)) / 2.0


def apply_pulse_sequence(
    atom_state: np.ndarray, seq: PulseSequence, arrival_time: float
) -> np.ndarray:
    """Apply the microwave sequence to a single-qubit atom state.

    Accepts a length-2 ket or a 2x2 density matrix and returns the same
    kind.  The transfer pulse relabels |1> -> |1~> in place; in two-pulse
    mode its phase is absorbed into the rotation so the map depends only
    on the pulse phase difference.
    """
    state = np.asarray(atom_state, dtype=complex)
    u = rotation_matrix(seq.effective_setting(arrival_time))
    if state.shape == (2,):
        return u @ state
    if state.shape == (2, 2):
        return u @ state @ u.conj().T
    raise ValueError(f"atom state must be a 2-vector or 2x2 matrix, got shape {state.shape}")


def _photon_marginal_and_conditionals(
    state: TwoQubitState | DensityMatrix,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Photon outcome probabilities and conditional atom states (index = 2s + p)."""
    if isinstance(state, TwoQubitState):
        amps = state.amplitudes.reshape(2, 2)  # [s, p]
        probs = np.sum(np.abs(amps) ** 2, axis=0)
        conditionals = []
        for p in range(2):
            if probs[p] > 0.0:
                conditionals.append(amps[:, p] / math.sqrt(probs[p]))
            else:
                conditionals.append(np.array([1.0, 0.0], dtype=complex))
        return probs, conditionals
    rho = densify(state).matrix.reshape(2, 2, 2, 2)  # [s, p, s', p']
    probs = np.real(np.einsum("spsp->p", rho))
    probs = np.clip(probs, 0.0, 1.0)
    conditionals = []
    for p in range(2):
        if probs[p] > 0.0:
            conditionals.append(rho[:, p, :, p] / probs[p])
        else:
            conditionals.append(np.diag([1.0, 0.0]).astype(complex))
    return probs, conditionals


def measure_photon(
    state: TwoQubitState | DensityMatrix,
    det: DetectorParams,
    rng: np.random.Generator,
) -> tuple[int, np.ndarray] | None:
    """PBS/PMT measurement of the photonic qubit (analysis basis already applied).

    Samples the photonic outcome, maps it to a physical PMT according to
    the waveplate role setting, and applies that PMT's efficiency as an
    acceptance test.  Returns (pmt_index, conditional atom state), or
    None when the click is lost (a non-event, discarded upstream).
    """
    probs, conditionals = _photon_marginal_and_conditionals(state)
    outcome = int(rng.random() >= probs[0])
    pmt_index = outcome ^ int(det.pmt_role_swapped)
    if rng.random() >= det.pmt_efficiency(pmt_index):
        return None
    return pmt_index, conditionals[outcome]


def measure_atom(
    atom_state: np.ndarray, det: DetectorParams, rng: np.random.Generator
) -> int:
    """Fluorescence readout: BRIGHT for |0>, DARK for |1~>, with label flips."""
    state = np.asarray(atom_state, dtype=complex)
    if state.shape == (2,):
        p_bright = float(abs(state[0]) ** 2)
    elif state.shape == (2, 2):
        p_bright = float(np.real(state[0, 0]))
    else:
        raise ValueError(f"atom state must be a 2-vector or 2x2 matrix, got shape {state.shape}")
    outcome = BRIGHT if rng.random() < p_bright else DARK
    flip_probability = det.atom_bright_error if outcome == BRIGHT else det.atom_dark_error
    if rng.random() < flip_probability:
        outcome ^= 1
    return outcome


def _dark_event(
    source: SourceParams,
    pulse: PulseSequence,
    photon_setting: MeasurementSetting,
    det: DetectorParams,
    rng: np.random.Generator,
    attempt_index: int,
) -> EventRecord:
    """A spurious heralding: random tube click, atom read out from its ground state."""
    arrival_time = rng.uniform(0.0, source.excitation_window)
    pmt_index = int(rng.random() < 0.5)
    atom_state = apply_pulse_sequence(
        np.array([1.0, 0.0], dtype=complex), pulse, arrival_time
    )
    atom_outcome = measure_atom(atom_state, det, rng)
    return EventRecord(
        attempt_index=attempt_index,
        arrival_time=arrival_time,
        setting_s=pulse.nominal_setting,
        setting_p=photon_setting,
        photon_outcome=pmt_index,
        atom_outcome=atom_outcome,
        pmt_role_swapped=det.pmt_role_swapped,
    )


def run_trial(
    source: SourceParams,
    pulse: PulseSequence,
    photon_setting: MeasurementSetting,
    det: DetectorParams,
    rng: np.random.Generator,
    attempt_index: int = 0,
) -> EventRecord | None:
    """One full attempt: excite, detect the photon, rotate the atom, read out."""
    attempt = attempt_entanglement(source, rng)
    if attempt is None:
        if det.dark_event_probability > 0.0 and rng.random() < det.dark_event_probability:
            return _dark_event(source, pulse, photon_setting, det, rng, attempt_index)
        return None
    pair, arrival_time = attempt
    pair = rotate(pair, PHOTON, photon_setting)
    detection = measure_photon(pair, det, rng)
    if detection is None:
        return None
    pmt_index, atom_state = detection
    atom_state = apply_pulse_sequence(atom_state, pulse, arrival_time)
    atom_outcome = measure_atom(atom_state, det, rng)
    return EventRecord(
        attempt_index=attempt_index,
        arrival_time=arrival_time,
        setting_s=pulse.nominal_setting,
        setting_p=photon_setting,
        photon_outcome=pmt_index,
        atom_outcome=atom_outcome,
        pmt_role_swapped=det.pmt_role_swapped,
    )


def simulate_attempts(
    n_attempts: int,
    source: SourceParams,
    pulse: PulseSequence,
    photon_setting: MeasurementSetting,
    det: DetectorParams,
    rng: np.random.Generator,
) -> list[EventRecord]:
    """Run a block of attempts, returning only the recorded events.

    The success gate is drawn in bulk; each successful attempt then runs
    the same per-event chain as ``run_trial``, and configured dark
    events are interleaved at their per-attempt weight.
    """
    events: list[EventRecord] = []
    chunk = 1_000_000
    offset = 0
    remaining = n_attempts
    p_true = source.success_probability
    p_dark = (1.0 - p_true) * det.dark_event_probability
    while remaining > 0:
        block = min(chunk, remaining)
        draws = rng.random(block)
        candidates = np.flatnonzero(draws < p_true + p_dark)
        for local_index in candidates:
            index = offset + int(local_index)
            if draws[local_index] >= p_true:
                events.append(_dark_event(source, pulse, photon_setting, det, rng, index))
                continue
            arrival_time = rng.uniform(0.0, source.excitation_window)
            pair = rotate(source.emitted_state(), PHOTON, photon_setting)
            detection = measure_photon(pair, det, rng)
            if detection is None:
                continue
            pmt_index, atom_state = detection
            atom_state = apply_pulse_sequence(atom_state, pulse, arrival_time)
            atom_outcome = measure_atom(atom_state, det, rng)
            events.append(
                EventRecord(
                    attempt_index=index,
                    arrival_time=arrival_time,
                    setting_s=pulse.nominal_setting,
                    setting_p=photon_setting,
                    photon_outcome=pmt_index,
                    atom_outcome=atom_outcome,
                    pmt_role_swapped=det.pmt_role_swapped,
                )
            )
        offset += block
        remaining -= block
    return events


def recorded_outcome_distribution(
    source: SourceParams,
    pulse: PulseSequence,
    photon_setting: MeasurementSetting,
    det: DetectorParams,
) -> tuple[np.ndarray, float]:
    """Distribution of recorded (atom, PMT) outcomes for a fixed setting.

    Valid for the two-pulse sequence, whose rotation does not depend on
    the photon arrival time.  Dark events, when configured, enter with
    their per-attempt weight against truly heralded events.  Returns
    (probabilities ordered (atom, pmt) = 00, 01, 10, 11, acceptance)
    where acceptance is the probability that a heralded photon click
    survives PMT efficiency.
    """
    if pulse.mode != TWO_PULSE:
        raise ValueError("closed-form outcome distribution requires the two-pulse sequence")
    fractions = outcome_probabilities(
        source.emitted_state(), pulse.effective_setting(0.0), photon_setting
    ).as_array()
    joint = fractions.reshape(2, 2)  # [atom, photon outcome]

    flip = np.array(
        [
            [1.0 - det.atom_bright_error, det.atom_dark_error],
            [det.atom_bright_error, 1.0 - det.atom_dark_error],
        ]
    )
    joint = flip @ joint  # rows: recorded atom label

    swapped = int(det.pmt_role_swapped)
    recorded = np.empty((2, 2))
    for pmt in range(2):
        recorded[:, pmt] = joint[:, pmt ^ swapped] * det.pmt_efficiency(pmt)
    acceptance = float(recorded.sum())

    p_true = source.success_probability
    total = p_true * recorded
    if det.dark_event_probability > 0.0:
        # atom never excited: ground state through the same pulse sequence
        u = rotation_matrix(pulse.effective_setting(0.0))
        ground = np.array([abs(u[0, 0]) ** 2, abs(u[1, 0]) ** 2])
        dark_joint = np.outer(flip @ ground, [0.5, 0.5])
        total = total + (1.0 - p_true) * det.dark_event_probability * dark_joint
    weight = float(total.sum())
    if weight <= 0.0:
        raise ValueError("no outcome is ever recorded with these detector settings")
    return total.reshape(-1) / weight, acceptance


def sample_outcome_counts(
    n_events: int,
    source: SourceParams,
    pulse: PulseSequence,
    photon_setting: MeasurementSetting,
    det: DetectorParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Counts of recorded (atom, PMT) outcomes over n_events recorded events.

    Exact conditional sampling given the number of recorded events;
    statistically identical to tallying ``run_trial`` successes, but
    O(1) instead of O(attempts).
    """
    probabilities, _ = recorded_outcome_distribution(source, pulse, photon_setting, det)
    return rng.multinomial(n_events, probabilities)


def iter_heralded_events(
    n_events: int,
    source: SourceParams,
    pulse: PulseSequence,
    photon_setting: MeasurementSetting,
    det: DetectorParams,
    rng: np.random.Generator,
) -> Iterator[EventRecord]:
    """Yield exactly n_events recorded events, skipping the attempt gate.

    Conditioning on success leaves the per-event physics unchanged, so
    this runs the same chain as ``run_trial`` minus the Bernoulli gate.
    Rejected photon detections still cost a retry, as in the hardware,
    and configured dark events enter with their per-attempt weight.
    """
    p_true = source.success_probability
    p_dark = (1.0 - p_true) * det.dark_event_probability
    dark_share = p_dark / (p_true + p_dark) if p_dark > 0.0 else 0.0
    if dark_share == 0.0 and det.pmt_efficiency_1 == 0.0 and det.pmt_efficiency_2 == 0.0:
        raise ValueError("no outcome is ever recorded with these detector settings")
    produced = 0
    attempt_index = 0
    while produced < n_events:
        attempt_index += 1
        if dark_share > 0.0 and rng.random() < dark_share:
            produced += 1
            yield _dark_event(source, pulse, photon_setting, det, rng, attempt_index - 1)
            continue
        arrival_time = rng.uniform(0.0, source.excitation_window)
        pair = rotate(source.emitted_state(), PHOTON, photon_setting)
        detection = measure_photon(pair, det, rng)
        if detection is None:
            continue
        pmt_index, atom_state = detection
        atom_state = apply_pulse_sequence(atom_state, pulse, arrival_time)
        atom_outcome = measure_atom(atom_state, det, rng)
        produced += 1
        yield EventRecord(
            attempt_index=attempt_index - 1,
            arrival_time=arrival_time,
            setting_s=pulse.nominal_setting,
            setting_p=photon_setting,
            photon_outcome=pmt_index,
            atom_outcome=atom_outcome,
            pmt_role_swapped=det.pmt_role_swapped,
        )
