"""Shared fixtures and independent oracle implementations.

The oracles deliberately avoid the library's rotate-then-diagonal code
path: outcome probabilities come from explicit Bloch-axis projectors, so
the two routes check each other.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def bloch_axis(theta: float, phi: float) -> np.ndarray:
    """Measurement axis matching the library's rotation convention."""
    return np.array(
        [-math.sin(theta) * math.cos(phi), -math.sin(theta) * math.sin(phi), math.cos(theta)]
    )


def axis_projectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenprojectors (outcome 0, outcome 1) of the axis observable."""
    mx, my, mz = bloch_axis(theta, phi)
    observable = mx * _SX + my * _SY + mz * _SZ
    identity = np.eye(2, dtype=complex)
    return (identity + observable) / 2.0, (identity - observable) / 2.0


def oracle_outcome_probabilities(
    rho: np.ndarray, setting_a: tuple[float, float], setting_b: tuple[float, float]
) -> np.ndarray:
    """Joint outcome probabilities via projector sandwiches (independent path)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (4,):
        rho = np.outer(rho, rho.conj())
    projectors_a = axis_projectors(*setting_a)
    projectors_b = axis_projectors(*setting_b)
    out = np.empty(4)
    for s in range(2):
        for p in range(2):
            out[2 * s + p] = np.real(np.trace(rho @ np.kron(projectors_a[s], projectors_b[p])))
    return out


def oracle_correlation(
    rho: np.ndarray, setting_a: tuple[float, float], setting_b: tuple[float, float]
) -> float:
    f = oracle_outcome_probabilities(rho, setting_a, setting_b)
    return float(f[0] + f[3] - f[1] - f[2])


def random_density_matrices(rng: np.random.Generator, n: int) -> np.ndarray:
    """Batch of Ginibre-random 4x4 density matrices, shape (n, 4, 4)."""
    a = rng.standard_normal((n, 4, 4)) + 1j * rng.standard_normal((n, 4, 4))
    m = a @ np.conj(np.transpose(a, (0, 2, 1)))
    traces = np.trace(m, axis1=1, axis2=2).real
    return m / traces[:, None, None]


def random_pure_pair(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20060922)
