"""Subsystem entropies and spectrum statistics.

Von Neumann entropy and capacity use log base 2; Renyi-2 uses the natural log.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .qsim import DensityMatrix, PureState, QuantumError, partial_trace

EIG_FLOOR = kernels.EIG_FLOOR


def _spectrum(rho: DensityMatrix) -> np.ndarray:
    w = rho.eigenvalues()
    return w[w > EIG_FLOOR]


def von_neumann(rho: DensityMatrix) -> float:
    w = _spectrum(rho)
    return float(max(0.0, -np.sum(w * np.log2(w))))


def renyi2(rho: DensityMatrix) -> float:
    m = rho.matrix
    purity = float(np.real(np.vdot(m.conj().T, m)))
    return float(max(0.0, -np.log(purity)))


def capacity(rho: DensityMatrix) -> float:
    """Variance of ``-log2`` over the spectrum; zero iff the spectrum is flat."""
    w = _spectrum(rho)
    lg = np.log2(w)
    return float(max(0.0, np.sum(w * lg * lg) - np.sum(w * lg) ** 2))


def nonflatness(rho: DensityMatrix) -> float:
    w = rho.eigenvalues()
    return float(np.sum(w**3) - np.sum(w**2) ** 2)


@dataclass(frozen=True)
class SpectrumStats:
    subsystem: int
    s_vn: float
    s2: float
    capacity: float
    nonflatness: float


def spectrum_stats(state: PureState | DensityMatrix, subsystem: int) -> SpectrumStats:
    rho = partial_trace(state, subsystem)
    w = _spectrum(rho)
    lg = np.log2(w)
    s = -np.sum(w * lg)
    p2 = np.sum(w**2)
    return SpectrumStats(
        subsystem=subsystem,
        s_vn=float(max(0.0, s)),
        s2=float(max(0.0, -np.log(p2))),
        capacity=float(max(0.0, np.sum(w * lg * lg) - s**2)),
        nonflatness=float(np.sum(w**3) - p2**2),
    )


@dataclass(frozen=True)
class EntropyVector:
    """Entropies (bits) of every union of parties, indexed by party bitmask.

    ``entries[0]`` is the empty set and is always 0. ``qubit_masks[i]`` is
    the qubit bitmask of party ``i``.
    """

    n_parties: int
    entries: np.ndarray = field(repr=False)
    qubit_masks: tuple = ()

    def __post_init__(self):
        e = np.array(self.entries, dtype=float).reshape(-1)
        if e.shape[0] != 1 << self.n_parties:
            raise ValueError("entropy vector needs 2**n_parties entries")
        if e.min() < -1e-9:
            raise ValueError("negative entropy")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def __getitem__(self, mask: int) -> float:
        if not 0 <= mask < self.entries.shape[0]:
            raise KeyError(mask)
        return float(self.entries[mask])

    def masks(self) -> Iterator[int]:
        """Nonempty masks ordered by (popcount, mask)."""
        return iter(sorted(range(1, 1 << self.n_parties), key=lambda m: (bin(m).count("1"), m)))

    def as_dict(self) -> dict[str, float]:
        return {str(m): float(self.entries[m]) for m in self.masks()}

    def to_json(self) -> str:
        return json.dumps(self.as_dict())

    @classmethod
    def from_mapping(cls, n_parties: int, mapping) -> "EntropyVector":
        e = np.zeros(1 << n_parties)
        for k, v in mapping.items():
            e[int(k)] = float(v)
        return cls(n_parties, e)


def _check_parties(n: int, parties: Sequence[Sequence[int]]) -> list[int]:
    masks = []
    seen = 0
    for p in parties:
        m = 0
        for q in p:
            if not 0 <= int(q) < n:
                raise QuantumError(f"qubit {q} out of range")
            m |= 1 << int(q)
        if m == 0:
            raise QuantumError("empty party")
        if m & seen:
            raise QuantumError("parties overlap")
        seen |= m
        masks.append(m)
    return masks


def union_masks(party_masks: Sequence[int]) -> np.ndarray:
    """Qubit mask for every party-union bitmask ``0 .. 2**k - 1``."""
    k = len(party_masks)
    out = np.zeros(1 << k, dtype=np.int64)
    for pm in range(1, 1 << k):
        low = pm & -pm
        out[pm] = out[pm ^ low] | party_masks[low.bit_length() - 1]
    return out


def entropy_vector(
    state: PureState | DensityMatrix,
    parties: Sequence[Sequence[int]] | None = None,
) -> EntropyVector:
    """Entropy vector of ``state`` over ``parties`` (default: one party per qubit)."""
    n = state.n_qubits
    if parties is None:
        parties = [[q] for q in range(n)]
    pmasks = _check_parties(n, parties)
    qm = union_masks(pmasks)
    k = len(pmasks)
    e = np.zeros(1 << k)
    if isinstance(state, PureState):
        e[1:] = kernels.subsystem_entropies(state.amplitudes, n, qm[1:])
    else:
        for pm in range(1, 1 << k):
            e[pm] = von_neumann(partial_trace(state, int(qm[pm])))
    e[np.abs(e) < 1e-14] = 0.0
    return EntropyVector(k, np.clip(e, 0.0, None), tuple(pmasks))


def entropy_vectors_batch(psis: np.ndarray, n: int, party_masks: Sequence[int]) -> np.ndarray:
    """Entropy vectors of a batch of pure states, shape ``(batch, 2**k)``."""
    qm = union_masks(party_masks)
    out = np.zeros((len(psis), len(qm)))
    out[:, 1:] = kernels.batch_entropies(psis, n, qm[1:])
    return out
