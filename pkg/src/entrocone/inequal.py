"""Linear entropy inequalities, their instances and gaps.

An inequality is stored as ``sum(lhs) >= sum(rhs)`` over subset bitmasks, and
``gap = LHS - RHS`` so that a negative gap is a violation.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Mapping, Sequence

import numpy as np

from .entropy import EntropyVector

VIOLATION_THRESHOLD = 1e-6


def _popcount(m: int) -> int:
    return bin(m).count("1")


@dataclass(frozen=True)
class InequalityInstance:
    n_parties: int
    lhs: Mapping[int, int]
    rhs: Mapping[int, int]
    label: str = ""
    roles: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        lhs = {int(k): int(v) for k, v in self.lhs.items()}
        rhs = {int(k): int(v) for k, v in self.rhs.items()}
        if set(lhs) & set(rhs):
            raise ValueError("lhs and rhs share a subset")
        if any(v <= 0 for v in (*lhs.values(), *rhs.values())):
            raise ValueError("coefficients must be positive integers")
        top = 1 << self.n_parties
        if any(not 0 < k < top for k in (*lhs, *rhs)):
            raise ValueError("subset mask out of range")
        object.__setattr__(self, "lhs", dict(sorted(lhs.items())))
        object.__setattr__(self, "rhs", dict(sorted(rhs.items())))

    @classmethod
    def from_terms(cls, n_parties, lhs_terms, rhs_terms, label="", roles=None):
        """Build from term lists, cancelling masks that appear on both sides."""
        coef: dict[int, int] = {}
        for m in lhs_terms:
            coef[m] = coef.get(m, 0) + 1
        for m in rhs_terms:
            coef[m] = coef.get(m, 0) - 1
        lhs = {m: c for m, c in coef.items() if c > 0}
        rhs = {m: -c for m, c in coef.items() if c < 0}
        return cls(n_parties, lhs, rhs, label, roles)

    def coefficients(self) -> np.ndarray:
        v = np.zeros(1 << self.n_parties)
        for m, c in self.lhs.items():
            v[m] = c
        for m, c in self.rhs.items():
            v[m] = -c
        return v

    def key(self) -> tuple:
        """Canonical signed coefficient tuple used for deduplication."""
        return tuple(sorted([(m, c) for m, c in self.lhs.items()] + [(m, -c) for m, c in self.rhs.items()]))

    def to_dict(self) -> dict:
        d = {"label": self.label, "lhs": {str(k): v for k, v in self.lhs.items()},
             "rhs": {str(k): v for k, v in self.rhs.items()}}
        if self.roles is not None:
            d["roles"] = list(self.roles)
        return d


def ingleton_terms(a: int, b: int, c: int, d: int):
    lhs = [a | b, a | c, a | d, b | c, b | d]
    rhs = [a, b, a | b | c, a | b | d, c | d]
    return lhs, rhs


def ingleton(a: int, b: int, c: int, d: int, n_parties: int = 4, label: str = "ingleton") -> InequalityInstance:
    lhs, rhs = ingleton_terms(a, b, c, d)
    return InequalityInstance.from_terms(n_parties, lhs, rhs, label, roles=(a, b, c, d))


def mmi(a: int = 1, b: int = 2, c: int = 4, n_parties: int = 3) -> InequalityInstance:
    lhs = [a | b, a | c, b | c]
    rhs = [a, b, c, a | b | c]
    return InequalityInstance.from_terms(n_parties, lhs, rhs, "mmi", roles=(a, b, c))


def subadditivity(a: int = 1, b: int = 2, n_parties: int = 2) -> InequalityInstance:
    return InequalityInstance.from_terms(n_parties, [a, b], [a | b], "sa", roles=(a, b))


def strong_subadditivity(a: int = 1, b: int = 2, c: int = 4, n_parties: int = 3) -> InequalityInstance:
    return InequalityInstance.from_terms(n_parties, [a | b, b | c], [b, a | b | c], "ssa", roles=(a, b, c))


CANONICAL_INGLETON = ingleton(1, 2, 4, 8)


def _entries(ev) -> np.ndarray:
    return ev.entries if isinstance(ev, EntropyVector) else np.asarray(ev, dtype=float)


def gap(instance: InequalityInstance, ev: EntropyVector | np.ndarray) -> float:
    e = _entries(ev)
    top = max((*instance.lhs, *instance.rhs), default=0)
    if top >= e.shape[-1]:
        raise KeyError(f"entropy vector lacks subset {top}")
    s = sum(c * e[m] for m, c in instance.lhs.items())
    s -= sum(c * e[m] for m, c in instance.rhs.items())
    return float(s)


def ingleton_difference(instance: InequalityInstance, ev) -> float:
    return -gap(instance, ev)


@dataclass(frozen=True)
class InstanceSet:
    n_qubits: int
    purity_assumed: bool
    instances: tuple

    def __post_init__(self):
        keys = [i.key() for i in self.instances]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate instances")
        object.__setattr__(self, "instances", tuple(self.instances))

    def __len__(self):
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def __getitem__(self, i):
        return self.instances[i]

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense ``(len, 2**n)`` signed coefficient matrix."""
        if not self.instances:
            return np.zeros((0, 1 << self.n_qubits))
        m = np.array([i.coefficients() for i in self.instances])
        m.setflags(write=False)
        return m

    def gaps(self, ev) -> np.ndarray:
        """Gap of every instance; accepts one entropy vector or a batch."""
        return _entries(ev) @ self.matrix.T

    def min_gap(self, ev) -> float:
        return float(self.gaps(ev).min())

    def argmin(self, ev) -> InequalityInstance:
        return self.instances[int(np.argmin(self.gaps(ev)))]

    def masks(self) -> np.ndarray:
        """Subset masks referenced by at least one instance."""
        return np.flatnonzero(np.any(self.matrix != 0, axis=0))


def _independent(mask: int, n: int) -> bool:
    # one representative per complementary pair: the smaller side, ties
    # resolved by excluding the top qubit
    k = _popcount(mask)
    return 2 * k < n or (2 * k == n and not mask >> (n - 1) & 1)


@lru_cache(maxsize=None)
def ingleton_instances(n_qubits: int, purity: bool = True) -> InstanceSet:
    """All relabelings and lifts of Ingleton onto ``n_qubits`` qubits.

    Each role A, B, C, D gets a disjoint nonempty qubit subset; qubits left
    over act as the purifier. Instances are deduplicated by their signed
    coefficient vector. With ``purity`` each role is restricted to one
    representative of every complementary pair, and when all four roles are
    single qubits covering the system the terms are also folded by
    ``S_I = S_complement``.
    """
    if not 4 <= n_qubits <= 8:
        raise ValueError(f"n_qubits must be within 4..8, got {n_qubits}")
    n = n_qubits
    full = (1 << n) - 1
    seen: dict[tuple, InequalityInstance] = {}
    for labels in itertools.product(range(5), repeat=n):
        parts = [0, 0, 0, 0, 0]
        for q, lab in enumerate(labels):
            parts[lab] |= 1 << q
        a, b, c, d = parts[:4]
        if not (a and b and c and d):
            continue
        if purity and not all(_independent(p, n) for p in (a, b, c, d)):
            continue
        lhs, rhs = ingleton_terms(a, b, c, d)
        if purity and parts[4] == 0 and all(_popcount(p) == 1 for p in (a, b, c, d)):
            fold = lambda m: m if _independent(m, n) else full ^ m  # noqa: E731
            lhs, rhs = [fold(m) for m in lhs], [fold(m) for m in rhs]
        inst = InequalityInstance.from_terms(n, lhs, rhs, "ingleton", roles=(a, b, c, d))
        seen.setdefault(inst.key(), inst)
    ordered = [seen[k] for k in sorted(seen)]
    return InstanceSet(n, purity, tuple(ordered))


def mi_rewrite_terms(ev, roles: Sequence[int] = (1, 2, 4, 8)) -> tuple[float, float, float]:
    """``(I(B:C|A), I(A:D|B), R)`` whose sum is the Ingleton gap."""
    e = _entries(ev)
    a, b, c, d = roles
    i_bc_a = e[a | b] + e[a | c] - e[a | b | c] - e[a]
    i_ad_b = e[a | b] + e[b | d] - e[a | b | d] - e[b]
    r = e[b | c] + e[a | d] - e[c | d] - e[a | b]
    return float(i_bc_a), float(i_ad_b), float(r)


def two_party_dominance(ev, roles: Sequence[int] = (1, 2, 4, 8), tol: float = 1e-9) -> bool:
    e = _entries(ev)
    a, b, c, d = roles
    cd = e[c | d]
    return all(cd > e[m] + tol for m in (a | b, a | c, a | d, b | c, b | d))


def parse_target(spec: str, n_qubits: int) -> InequalityInstance | InstanceSet:
    """Resolve a target name (``mmi``, ``ingleton``, ``ingleton-all``) or JSON."""
    s = spec.strip()
    name = s.lower()
    if name == "mmi":
        return mmi(1, 2, 4, n_qubits)
    if name == "ingleton":
        return ingleton(1, 2, 4, 8, n_qubits)
    if name in ("ingleton-all", "ingleton_all", "all"):
        return ingleton_instances(n_qubits, True)
    if name in ("sa", "ssa"):
        return subadditivity(1, 2, n_qubits) if name == "sa" else strong_subadditivity(1, 2, 4, n_qubits)
    try:
        obj = json.loads(s)
    except json.JSONDecodeError:
        raise ValueError(f"unknown target {spec!r}") from None
    return InequalityInstance(n_qubits, {int(k): v for k, v in obj["lhs"].items()},
                              {int(k): v for k, v in obj["rhs"].items()}, obj.get("label", "custom"))


def target_gap(target, ev) -> float:
    """Gap of a single instance, or the smallest gap over a set."""
    if isinstance(target, InstanceSet):
        return target.min_gap(ev)
    return gap(target, ev)
