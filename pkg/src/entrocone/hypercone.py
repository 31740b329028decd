"""Hypergraph min-cut realisation of five-qubit entropy vectors.

Vertices A..E are bits 0..4. The realising hypergraph has all five 4-edges
(ordered by omitted vertex) followed by all ten 3-edges (lexicographic).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .entropy import EntropyVector

VERTICES = "ABCDE"


def _mask(label: str) -> int:
    return sum(1 << VERTICES.index(ch) for ch in label)


def _label(mask: int) -> str:
    return "".join(v for i, v in enumerate(VERTICES) if mask >> i & 1)


FOUR_EDGES = tuple(0b11111 ^ (1 << i) for i in range(5))
THREE_EDGES = tuple(_mask("".join(c)) for c in itertools.combinations(VERTICES, 3))
EDGES = FOUR_EDGES + THREE_EDGES
# independent subsets: the five singles then the ten pairs
SUBSETS = tuple(1 << i for i in range(5)) + tuple(_mask("".join(c)) for c in itertools.combinations(VERTICES, 2))


@dataclass(frozen=True)
class Hypergraph:
    n_vertices: int
    edges: tuple

    def __post_init__(self):
        es = tuple((int(m), float(w)) for m, w in self.edges)
        for m, _ in es:
            if bin(m).count("1") < 2 or m >> self.n_vertices:
                raise ValueError(f"edge {m:#b} must join at least two existing vertices")
        object.__setattr__(self, "edges", es)


def cut_weight(h: Hypergraph, side: int) -> float:
    full = (1 << h.n_vertices) - 1
    if side <= 0 or side >= full or side & ~full:
        raise ValueError("side must be a proper nonempty vertex subset")
    return float(sum(w for e, w in h.edges if e & side and e & ~side))


@dataclass(frozen=True)
class CutResult:
    value: float
    side: int
    cut_semantic: bool


def min_cut_entropy(h: Hypergraph, region: int, external: int | None = None) -> CutResult:
    """Smallest cut separating ``region`` from the other external vertices.

    Vertices outside ``external`` are internal and may fall on either side.
    """
    full = (1 << h.n_vertices) - 1
    if external is None:
        external = full
    if h.n_vertices > 12:
        raise ValueError("brute-force cut search is limited to 12 vertices")
    if region <= 0 or region & ~external or region == external:
        raise ValueError("region must be a proper nonempty subset of the external vertices")
    internal = [i for i in range(h.n_vertices) if not external >> i & 1]
    best = (np.inf, region)
    for bits in range(1 << len(internal)):
        side = region
        for k, v in enumerate(internal):
            if bits >> k & 1:
                side |= 1 << v
        val = cut_weight(h, side)
        if val < best[0] - 1e-15:
            best = (val, side)
    nonneg = all(w >= 0 for _, w in h.edges)
    return CutResult(best[0], best[1], nonneg)


@lru_cache(maxsize=None)
def _incidence() -> np.ndarray:
    m = np.array([[1 if e & s and e & ~s else 0 for e in EDGES] for s in SUBSETS], dtype=np.int64)
    m.setflags(write=False)
    return m


def incidence_matrix_5() -> np.ndarray:
    """Rows: subsets in :data:`SUBSETS`; columns: edges in :data:`EDGES`."""
    return _incidence().copy()


# Closed-form weight table (numerators over 7). Columns follow the entropy
# order A, AB, AC, AD, AE, B, BC, BD, BE, C, CD, CE, D, DE, E; row i belongs
# to edge CLOSED_FORM_EDGES[i].
CLOSED_FORM_VARS = ("A", "AB", "AC", "AD", "AE", "B", "BC", "BD", "BE", "C", "CD", "CE", "D", "DE", "E")
CLOSED_FORM_EDGES = ("BCDE", "ACDE", "ABDE", "ABCE", "ABCD", "BCD", "BDE", "ABE", "ACE", "ACD",
                     "BCE", "ADE", "ABC", "CDE", "ABD")
CLOSED_FORM = np.array([
    [-3, 3, 3, 3, 3, 4, -4, -4, -4, 4, -4, -1, 4, -4, 4],
    [3, 4, -3, -3, -3, -4, 4, 4, 4, 3, -3, -6, 3, -3, 3],
    [3, -3, 4, -3, -3, 3, 4, -3, -3, -4, 4, 1, 3, -3, 3],
    [3, -3, -3, 4, -3, 3, -3, 4, -3, 3, 4, -6, -4, 4, 3],
    [3, -3, -3, -3, 4, 3, -3, -3, 4, 3, -3, 1, 3, 4, -4],
    [-1, 1, 1, 1, -6, -1, 1, 1, 1, -1, 1, 2, -1, 1, -1],
    [-1, 1, -6, 1, 1, -1, 1, 1, 1, -1, 1, 2, -1, 1, -1],
    [-1, 1, 1, 1, 1, -1, 1, 1, 1, -1, -6, 2, -1, 1, -1],
    [-1, 1, 1, 1, 1, -1, 1, -6, 1, -1, 1, 2, -1, 1, -1],
    [-1, 1, 1, 1, 1, -1, 1, 1, -6, -1, 1, 2, -1, 1, -1],
    [-1, 1, 1, -6, 1, -1, 1, 1, 1, -1, 1, 2, -1, 1, -1],
    [-1, 1, 1, 1, 1, -1, -6, 1, 1, -1, 1, 2, -1, 1, -1],
    [-1, 1, 1, 1, 1, -1, 1, 1, 1, -1, 1, 2, -1, -6, -1],
    [-1, -6, 1, 1, 1, -1, 1, 1, 1, -1, 1, 2, -1, 1, -1],
    [-1, 1, 1, 1, 1, -1, 1, 1, 1, -1, 1, -5, -1, 1, -1],
]) / 7.0


# The published incidence block, rows in SUBSETS order and columns labelled
# by edge. It was printed with S_E missing the BCE edge (row 4, column 14);
# the closed-form table above inverts this printed matrix once printed vertex
# names are mapped to closed-form names by CLOSED_FORM_RELABEL.
PRINTED_COLUMNS = ("ABCD", "ABDE", "BCDE", "ACDE", "ABCE", "ABC", "BCD", "CDE", "ADE", "ABE",
                   "ACD", "BDE", "ACE", "ABD", "BCE")
PRINTED_INCIDENCE = np.array([
    [1, 1, 0, 1, 1, 1, 0, 0, 1, 1, 1, 0, 1, 1, 0],
    [1, 1, 1, 0, 1, 1, 1, 0, 0, 1, 0, 1, 0, 1, 1],
    [1, 0, 1, 1, 1, 1, 1, 1, 0, 0, 1, 0, 1, 0, 1],
    [1, 1, 1, 1, 0, 0, 1, 1, 1, 0, 1, 1, 0, 1, 0],
    [0, 1, 1, 1, 1, 0, 0, 1, 1, 1, 0, 1, 1, 0, 0],
    [1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0],
    [1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1],
    [1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1],
])
CLOSED_FORM_RELABEL = {"A": "C", "B": "B", "C": "D", "D": "E", "E": "A"}


def _targets(ev: EntropyVector | np.ndarray) -> np.ndarray:
    e = ev.entries if isinstance(ev, EntropyVector) else np.asarray(ev, dtype=float)
    if e.shape[0] != 32:
        raise ValueError("need an entropy vector over five parties")
    return np.array([e[s] for s in SUBSETS])


def closed_form_weights(ev: EntropyVector | np.ndarray) -> np.ndarray:
    """Weights from :data:`CLOSED_FORM`, returned in :data:`EDGES` order."""
    e = ev.entries if isinstance(ev, EntropyVector) else np.asarray(ev, dtype=float)
    s = np.array([e[_mask(v)] for v in CLOSED_FORM_VARS])
    w = CLOSED_FORM @ s
    out = np.empty(15)
    for i, lab in enumerate(CLOSED_FORM_EDGES):
        out[EDGES.index(_mask(lab))] = w[i]
    return out


@dataclass(frozen=True)
class RealizationResult:
    weights: np.ndarray = field(repr=False)
    residual: float
    all_nonneg: bool
    closed_form_deviation: float

    def hypergraph(self) -> Hypergraph:
        return Hypergraph(5, tuple(zip(EDGES, self.weights)))


def realize_5qubit(ev: EntropyVector | np.ndarray) -> RealizationResult:
    """Solve the 15x15 cut system for edge weights reproducing ``ev``.

    ``closed_form_deviation`` is the largest difference between the direct
    solve and :func:`closed_form_weights`.
    """
    m = _incidence().astype(float)
    s = _targets(ev)
    w = np.linalg.solve(m, s)
    res = float(np.abs(m @ w - s).max())
    dev = float(np.abs(w - closed_form_weights(ev)).max())
    return RealizationResult(w, res, bool(np.all(w >= -1e-12)), dev)
