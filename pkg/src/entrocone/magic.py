"""Pauli spectra, stabilizer Renyi entropy and the mixed-state magic witness.

All magic quantities are in nats.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .entropy import renyi2
from .qsim import DensityMatrix, PureState

MAX_PAULI_QUBITS = 8
_DIGIT = np.array([[0, 3], [1, 2]])  # (x bit, z bit) -> I, Z / X, Y


@lru_cache(maxsize=None)
def _order(k: int) -> np.ndarray:
    """Flat (x, z) index for each base-4 Pauli label, little-endian digits."""
    d = 1 << k
    x = np.arange(d)[:, None]
    z = np.arange(d)[None, :]
    lab = np.zeros((d, d), dtype=np.int64)
    for q in range(k):
        lab += _DIGIT[(x >> q) & 1, (z >> q) & 1] * 4**q
    perm = np.empty(d * d, dtype=np.int64)
    perm[lab.reshape(-1)] = np.arange(d * d)
    return perm


@dataclass(frozen=True)
class PauliSpectrum:
    n_qubits: int
    values: np.ndarray = field(repr=False)

    def label(self, i: int) -> str:
        """Pauli string for index ``i``, qubit 0 written first."""
        return "".join("IXYZ"[(i >> (2 * q)) & 3] for q in range(self.n_qubits))


def pauli_spectrum(state: DensityMatrix | PureState) -> PauliSpectrum:
    """All ``4**k`` values ``Tr(rho P)``, indexed by base-4 label (I, X, Y, Z)."""
    if isinstance(state, PureState):
        rho = np.outer(state.amplitudes, state.amplitudes.conj())
    else:
        rho = np.asarray(state.matrix)
    d = rho.shape[0]
    k = d.bit_length() - 1
    if d != 1 << k:
        raise ValueError("dimension is not a power of two")
    if k > MAX_PAULI_QUBITS:
        raise ValueError(f"Pauli spectra limited to {MAX_PAULI_QUBITS} qubits")
    xz = kernels.pauli_xz(np.ascontiguousarray(rho, dtype=np.complex128))
    vals = xz.reshape(-1)[_order(k)]
    vals.setflags(write=False)
    return PauliSpectrum(k, vals)


def _moment(values: np.ndarray, alpha: float, n: int) -> float:
    return float(np.sum(np.abs(values) ** (2 * alpha)) / 2.0**n)


def _check_alpha(alpha: float):
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1")


def sre(state: PureState, alpha: float = 2.0) -> float:
    """Stabilizer Renyi entropy ``M_alpha`` of a pure state."""
    _check_alpha(alpha)
    spec = pauli_spectrum(state)
    m = np.log(_moment(spec.values, alpha, spec.n_qubits)) / (1 - alpha)
    return float(max(m, 0.0)) if abs(m) < 1e-12 else float(m)


def magic_witness(rho: DensityMatrix | PureState, alpha: float = 2.0) -> float:
    """Mixed-state witness; reduces to :func:`sre` on pure inputs."""
    _check_alpha(alpha)
    if isinstance(rho, PureState):
        rho = rho.density()
    spec = pauli_spectrum(rho)
    first = np.log(_moment(spec.values, alpha, spec.n_qubits)) / (1 - alpha)
    return float(first - (1 - 2 * alpha) / (1 - alpha) * renyi2(rho))
