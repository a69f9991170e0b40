"""Bell-signal bounds: fidelity-constrained extremes, LHV ceiling, Tsirelson scan.

The fidelity-constrained extremization uses the signed operator form of
the CHSH combination (no absolute values): at the canonical angles the
CHSH observable has spectrum {2*sqrt(2), 0, 0, -2*sqrt(2)} with the ideal
pair as its top eigenvector and no cross terms, so a state constrained to
overlap F with the ideal pair reaches at most 2*sqrt(2)*F and at least
2*sqrt(2)*(2F - 1).  The numeric extremizer validates this closed form by
random-restart optimization over all density matrices with the overlap
pinned exactly to F; it also reports the absolute-value form evaluated on
the witness states, which can only be larger.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .states import (
    BellAngles,
    DensityMatrix,
    TwoQubitState,
    bell_pair_ideal,
    bell_signal,
    chsh_operator,
    correlation,
    fidelity,
)

TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
LHV_BOUND = 2.0


@dataclass(frozen=True)
class FidelityConstraint:
    """Target overlap F with a pure state, plus the analysis angles."""

    fidelity: float
    target: TwoQubitState = field(default_factory=bell_pair_ideal)
    angles: BellAngles = field(default_factory=BellAngles.canonical)

    def __post_init__(self) -> None:
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValueError(f"fidelity {self.fidelity!r} outside [0, 1]")


@dataclass(frozen=True)
class ExtremalResult:
    """Extremes of the signed Bell signal under a fidelity constraint."""

    bell_min: float
    bell_max: float
    witness_min: DensityMatrix
    witness_max: DensityMatrix
    abs_form_min: float
    abs_form_max: float
    converged: bool
    out_of_regime: bool = False

    def __post_init__(self) -> None:
        if self.bell_min > self.bell_max + 1e-9:
            raise ValueError("extremal minimum exceeds maximum")


@dataclass(frozen=True)
class LhvStrategy:
    """Deterministic local assignment: one outcome in {+1, -1} per setting."""

    a1: int
    a2: int
    b1: int
    b2: int

    def __post_init__(self) -> None:
        for value in (self.a1, self.a2, self.b1, self.b2):
            if value not in (-1, 1):
                raise ValueError("strategy outcomes must be +1 or -1")

    def bell_value(self) -> float:
        return bell_signal(
            float(self.a2 * self.b2),
            float(self.a1 * self.b2),
            float(self.a2 * self.b1),
            float(self.a1 * self.b1),
        )


@dataclass(frozen=True)
class ScanResult:
    """Best Bell signal found on an ideal-pair angle grid."""

    bell_value: float
    thetas: tuple[float, float, float, float]  # (a1, a2, b1, b2)


def extremal_bell_closed_form(f: float) -> tuple[float, float]:
    """Signed Bell-signal window (min, max) at canonical angles for overlap f.

    max = 2*sqrt(2)*f, min = 2*sqrt(2)*(2f - 1); the minimum is the signed
    value and goes negative below f = 1/2.
    """
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fidelity {f!r} outside [0, 1]")
    return TSIRELSON_BOUND * (2.0 * f - 1.0), TSIRELSON_BOUND * f


def _pinned_density(x: np.ndarray, target: np.ndarray, f: float) -> np.ndarray:
    """Map 32 free reals to a density matrix with <target|rho|target> = f exactly.

    An arbitrary positive matrix is normalized, then mixed with either the
    target projector or the uniform state on its orthogonal complement,
    whichever moves the overlap onto the constraint.  States already on
    the constraint are fixed points, so the map is onto.
    """
    a = (x[:16] + 1j * x[16:]).reshape(4, 4)
    m = a @ a.conj().T + 1e-12 * np.eye(4)
    rho = m / np.trace(m).real
    projector = np.outer(target, target.conj())
    overlap = float(np.real(target.conj() @ rho @ target))
    if overlap < f:
        t = (f - overlap) / (1.0 - overlap)
        return (1.0 - t) * rho + t * projector
    complement = (np.eye(4) - projector) / 3.0
    t = 0.0 if overlap == 0.0 else (overlap - f) / overlap
    return (1.0 - t) * rho + t * complement


def _abs_form_on_witness(rho: DensityMatrix, angles: BellAngles) -> float:
    """Absolute-value CHSH combination evaluated on a witness state."""
    q = {
        (i, j): correlation(rho, a, b)
        for i, a in ((1, angles.a1), (2, angles.a2))
        for j, b in ((1, angles.b1), (2, angles.b2))
    }
    return bell_signal(q[(2, 2)], q[(1, 2)], q[(2, 1)], q[(1, 1)])


def extremal_bell_numeric(
    constraint: FidelityConstraint,
    iterations: int = 32,
    seed: int = 20060922,
) -> ExtremalResult:
    """Extremize the signed Bell signal over states with pinned fidelity.

    ``iterations`` random restarts per extreme, each refined locally; the
    result carries the extremal witness states, the absolute-value form
    evaluated on them, and a convergence flag (restart agreement within
    1e-6).  Fidelities below 1/2 are allowed but flagged out-of-regime.
    """
    if iterations < 1:
        raise ValueError("need at least one restart")
    operator = chsh_operator(constraint.angles)
    target = constraint.target.amplitudes
    f = constraint.fidelity
    rng = np.random.default_rng(seed)

    extremes: dict[str, tuple[float, np.ndarray, bool]] = {}
    for sense, sign in (("max", 1.0), ("min", -1.0)):

        def objective(x: np.ndarray) -> float:
            rho = _pinned_density(x, target, f)
            return -sign * float(np.real(np.trace(rho @ operator)))

        values = []
        best_value, best_rho = -np.inf, None
        for _ in range(iterations):
            x0 = rng.standard_normal(32)
            result = minimize(objective, x0, method="L-BFGS-B")
            value = -result.fun
            values.append(value)
            if value > best_value:
                best_value = value
                best_rho = _pinned_density(result.x, target, f)
        values.sort(reverse=True)
        # Converged when several restarts independently reach the optimum.
        agreement = len(values) >= 2 and values[0] - values[min(2, len(values) - 1)] < 1e-6
        extremes[sense] = (sign * best_value, best_rho, agreement)

    max_value, max_rho, max_ok = extremes["max"]
    min_value, min_rho, min_ok = extremes["min"]
    witness_max = DensityMatrix(0.5 * (max_rho + max_rho.conj().T))
    witness_min = DensityMatrix(0.5 * (min_rho + min_rho.conj().T))
    for witness in (witness_min, witness_max):
        if abs(fidelity(witness, constraint.target) - f) > 1e-6:
            raise RuntimeError("extremal witness drifted off the fidelity constraint")
    return ExtremalResult(
        bell_min=min_value,
        bell_max=max_value,
        witness_min=witness_min,
        witness_max=witness_max,
        abs_form_min=_abs_form_on_witness(witness_min, constraint.angles),
        abs_form_max=_abs_form_on_witness(witness_max, constraint.angles),
        converged=max_ok and min_ok,
        out_of_regime=f < 0.5,
    )


def enumerate_strategies() -> list[tuple[LhvStrategy, float]]:
    """All 16 deterministic local strategies with their Bell values."""
    table = []
    for a1, a2, b1, b2 in itertools.product((1, -1), repeat=4):
        strategy = LhvStrategy(a1, a2, b1, b2)
        table.append((strategy, strategy.bell_value()))
    return table


def lhv_enumerate(angles: BellAngles | None = None) -> tuple[float, list[LhvStrategy]]:
    """Maximum Bell signal over deterministic local strategies, with argmaxes.

    Deterministic strategies are the extreme points of the local set, so
    by convexity this bounds every stochastic local model.  The angles
    are irrelevant to deterministic assignments and accepted only for
    signature symmetry with the quantum scans.
    """
    del angles
    table = enumerate_strategies()
    best = max(value for _, value in table)
    argmax = [strategy for strategy, value in table if value >= best - 1e-12]
    return best, argmax


def tsirelson_scan(grid_resolution: int = 64) -> ScanResult:
    """Maximum ideal-pair Bell signal over a four-angle grid.

    Scans theta in {k*pi/resolution, k = 0..resolution} for all four
    settings using the ideal-pair correlation cos(theta_a - theta_b).
    The maximum over the two b-angles separates per (a1, a2) pair, so the
    scan is O(resolution^3).  Resolutions divisible by 4 place the
    canonical angles exactly on the grid.
    """
    if grid_resolution < 8:
        raise ValueError("grid resolution below 8 points per angle is too coarse")
    thetas = np.arange(grid_resolution + 1) * (math.pi / grid_resolution)
    c = np.cos(thetas[:, None] - thetas[None, :])

    best = -np.inf
    best_quad = (0, 0, 0, 0)
    for i1 in range(len(thetas)):
        diff = np.abs(c - c[i1])  # [i2, b2]
        summ = np.abs(c + c[i1])  # [i2, b1]
        b2_idx = np.argmax(diff, axis=1)
        b1_idx = np.argmax(summ, axis=1)
        totals = diff[np.arange(len(thetas)), b2_idx] + summ[np.arange(len(thetas)), b1_idx]
        i2 = int(np.argmax(totals))
        if totals[i2] > best:
            best = float(totals[i2])
            best_quad = (i1, i2, int(b1_idx[i2]), int(b2_idx[i2]))
    quad_thetas = tuple(float(thetas[k]) for k in best_quad)
    return ScanResult(bell_value=best, thetas=quad_thetas)


def werner_bell(p: float) -> float:
    """Canonical-angle Bell signal 2*sqrt(2)*p of the white-noise mixture."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight {p!r} outside [0, 1]")
    return TSIRELSON_BOUND * p
