"""Derivative-free search for Ingleton violators over the state sphere.

A pure state on ``n`` qubits is mapped to a real vector of length
``2**(n+1)`` (real parts, then imaginary parts). The cost is the smallest
Ingleton gap of the normalised state, so the sphere constraint is handled
by projection rather than passed to the optimizer.
"""
from __future__ import annotations

import contextlib
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from . import kernels
from ._accel import USE_NUMBA
from .entropy import spectrum_stats
from .inequal import InequalityInstance, InstanceSet, ingleton, ingleton_instances
from .magic import magic_witness
from .qsim import PureState, partial_trace

RANK_FLOOR = 1e-9


@dataclass(frozen=True)
class RealVecState:
    n_qubits: int
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.shape[0] != 1 << (self.n_qubits + 1):
            raise ValueError(f"expected {1 << (self.n_qubits + 1)} coordinates, got {c.shape[0]}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_array(cls, x) -> "RealVecState":
        x = np.asarray(x, dtype=float).reshape(-1)
        n = (x.shape[0] // 2).bit_length() - 1
        return cls(n, x)

    def normalized(self) -> "RealVecState":
        nrm = np.linalg.norm(self.coords)
        if nrm == 0:
            raise ValueError("zero vector")
        return RealVecState(self.n_qubits, self.coords / nrm)


def vectorize(state: PureState) -> RealVecState:
    a = state.amplitudes
    return RealVecState(state.n_qubits, np.concatenate([a.real, a.imag]))


def devectorize(x: RealVecState | np.ndarray) -> PureState:
    c = x.coords if isinstance(x, RealVecState) else np.asarray(x, dtype=float)
    half = c.shape[0] // 2
    return PureState.from_vector(c[:half] + 1j * c[half:])


def sample_unit_sphere(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim < 2:
        raise ValueError("dim must be at least 2")
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


Scope = InstanceSet | InequalityInstance


def default_scope(n_qubits: int, kind: str = "full_set") -> Scope:
    if kind == "full_set":
        return ingleton_instances(n_qubits, True)
    if kind == "single_instance":
        return ingleton(1, 2, 4, 8, n_qubits)
    raise ValueError(f"unknown scope {kind!r}")


class CostFunction:
    """Smallest gap over ``scope`` for a (batch of) real vector(s).

    Complementary subsets share an entropy on pure states, so the
    coefficient matrix is folded onto one representative per pair and only
    those entropies are computed.
    """

    def __init__(self, scope: Scope, n_qubits: int):
        self.n_qubits = n = n_qubits
        self.scope = scope
        mat = scope.matrix if isinstance(scope, InstanceSet) else scope.coefficients()[None, :]
        if mat.shape[1] != 1 << n:
            raise ValueError("scope does not match the qubit count")
        full = (1 << n) - 1
        rep_of = {}
        for m in range(1, full):
            c = full ^ m
            pm, pc = bin(m).count("1"), bin(c).count("1")
            rep_of[m] = m if (pm, m) <= (pc, c) else c
        used = sorted({rep_of[m] for m in np.flatnonzero(np.any(mat != 0, axis=0)) if 0 < m < full})
        col = {r: i for i, r in enumerate(used)}
        folded = np.zeros((mat.shape[0], len(used)))
        for m in range(1, full):
            if np.any(mat[:, m]):
                folded[:, col[rep_of[m]]] += mat[:, m]
        self.masks = np.array(used, dtype=np.int64)
        self.matrix = folded
        self.evals = 0

    def entropies(self, psis: np.ndarray) -> np.ndarray:
        if USE_NUMBA:
            return np.array([kernels.subsystem_entropies(p, self.n_qubits, self.masks) for p in psis])
        return kernels.batch_entropies(psis, self.n_qubits, self.masks)

    def gaps(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        half = x.shape[1] // 2
        psi = x[:, :half] + 1j * x[:, half:]
        nrm = np.linalg.norm(psi, axis=1, keepdims=True)
        if np.any(nrm == 0):
            raise ValueError("zero vector")
        return self.entropies(psi / nrm) @ self.matrix.T

    def batch(self, x: np.ndarray) -> np.ndarray:
        g = self.gaps(x)
        self.evals += g.shape[0]
        return g.min(axis=1)

    def __call__(self, x) -> float:
        return float(self.batch(np.asarray(x, dtype=float)[None, :])[0])


def cost(x: RealVecState | np.ndarray, scope: Scope) -> float:
    c = x.coords if isinstance(x, RealVecState) else np.asarray(x, dtype=float)
    n = (c.shape[0] // 2).bit_length() - 1
    if c.shape[0] != 1 << (n + 1):
        raise ValueError("length is not 2**(n+1)")
    return CostFunction(scope, n)(c)


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "cma_es"
    population: int | None = None
    sigma0: float = 0.3
    rho_beg: float = 0.5
    rho_end: float = 1e-8
    max_evals: int = 100_000
    target_violation: float | None = None
    instance_scope: str = "full_set"
    seed: int = 0
    plateau_iters: int = 50
    plateau_tol: float = 1e-9
    sigma_tol: float = 1e-10
    record_every: int = 10

    def __post_init__(self):
        if self.method not in ("cma_es", "cobyla"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.population is not None and self.population < 4:
            raise ValueError("population must be at least 4")
        if not self.rho_end < self.rho_beg:
            raise ValueError("rho_end must be below rho_beg")
        if self.max_evals < 1:
            raise ValueError("max_evals must be positive")


@dataclass
class OptRun:
    x0: RealVecState
    trace: list
    x_star: RealVecState
    final_cost: float
    evals: int
    stop_reason: str
    method: str
    iterates: list = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.stop_reason != "budget"

    @property
    def state(self) -> PureState:
        return devectorize(self.x_star)


class _TargetReached(Exception):
    pass


@contextlib.contextmanager
def _quiet_fd2():
    # f2py prints to the C-level stderr when the objective raises
    try:
        saved = os.dup(2)
    except OSError:
        yield
        return
    with open(os.devnull, "w") as null:
        os.dup2(null.fileno(), 2)
        try:
            yield
        finally:
            os.dup2(saved, 2)
            os.close(saved)


def _cma_es(fb, x0, cfg: OptimizerConfig, rng, record):
    dim = x0.shape[0]
    lam = cfg.population or 4 + int(3 * math.log(dim))
    mu = lam // 2
    w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mueff = 1.0 / np.sum(w**2)
    cc = (4 + mueff / dim) / (dim + 4 + 2 * mueff / dim)
    cs = (mueff + 2) / (dim + mueff + 5)
    c1 = 2 / ((dim + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((dim + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (dim + 1)) - 1) + cs
    chi_n = math.sqrt(dim) * (1 - 1 / (4 * dim) + 1 / (21 * dim * dim))

    mean = x0.copy()
    sigma = cfg.sigma0
    pc = np.zeros(dim)
    ps = np.zeros(dim)
    cov = np.eye(dim)
    basis = np.eye(dim)
    scale = np.ones(dim)
    inv_sqrt = np.eye(dim)
    evals = 0
    last_eigen = 0
    best_f, best_x = np.inf, x0.copy()
    history = []
    gen = 0
    reason = "budget"
    while evals < cfg.max_evals:
        z = rng.normal(size=(lam, dim))
        y = (z * scale) @ basis.T
        xs = mean + sigma * y
        f = fb(xs)
        evals += lam
        gen += 1
        order = np.lexsort((np.arange(lam), np.floor(f / RANK_FLOOR)))
        if f[order[0]] < best_f:
            best_f, best_x = float(f[order[0]]), xs[order[0]].copy()
        history.append(best_f)
        record(gen, evals, best_f, best_x)
        if cfg.target_violation is not None and best_f <= -cfg.target_violation:
            reason = "target"
            break
        old = mean
        mean = w @ xs[order[:mu]]
        step = (mean - old) / sigma
        ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mueff) * (inv_sqrt @ step)
        hsig = np.linalg.norm(ps) / math.sqrt(1 - (1 - cs) ** (2 * evals / lam)) / chi_n < 1.4 + 2 / (dim + 1)
        pc = (1 - cc) * pc + hsig * math.sqrt(cc * (2 - cc) * mueff) * step
        art = (xs[order[:mu]] - old) / sigma
        cov = ((1 - c1 - cmu) * cov
               + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * cov)
               + cmu * (art.T * w) @ art)
        sigma *= math.exp((cs / damps) * (np.linalg.norm(ps) / chi_n - 1))
        if evals - last_eigen > lam / (c1 + cmu) / dim / 10:
            last_eigen = evals
            cov = np.triu(cov) + np.triu(cov, 1).T
            d2, basis = np.linalg.eigh(cov)
            scale = np.sqrt(np.maximum(d2, 1e-30))
            inv_sqrt = (basis / scale) @ basis.T
        if sigma * scale.max() < cfg.sigma_tol:
            reason = "sigma"
            break
        k = cfg.plateau_iters
        if len(history) > k and history[-k - 1] - history[-1] < cfg.plateau_tol:
            reason = "plateau"
            break
    return best_x, best_f, evals, reason


def _cobyla(fb, x0, cfg: OptimizerConfig, rng, record):
    state = {"evals": 0, "best_f": np.inf, "best_x": x0.copy()}

    def f(x):
        v = float(fb(x[None, :])[0])
        state["evals"] += 1
        if v < state["best_f"]:
            state["best_f"], state["best_x"] = v, x.copy()
        if state["evals"] % 50 == 0 or state["evals"] == 1:
            record(state["evals"], state["evals"], state["best_f"], state["best_x"])
        if cfg.target_violation is not None and v <= -cfg.target_violation:
            raise _TargetReached
        return v

    reason = "converged"
    with _quiet_fd2():
        try:
            res = _scipy_minimize(f, x0, method="COBYLA",
                                  options={"rhobeg": cfg.rho_beg, "tol": cfg.rho_end, "maxiter": cfg.max_evals})
            if state["evals"] >= cfg.max_evals and not res.success:
                reason = "budget"
        except _TargetReached:
            reason = "target"
    record(state["evals"], state["evals"], state["best_f"], state["best_x"])
    return state["best_x"], state["best_f"], state["evals"], reason


def minimize(x0: RealVecState | np.ndarray, cfg: OptimizerConfig = OptimizerConfig(), scope: Scope | None = None) -> OptRun:
    """Minimise the violation cost from ``x0`` with CMA-ES or COBYLA."""
    x0v = x0 if isinstance(x0, RealVecState) else RealVecState.from_array(x0)
    x0v = x0v.normalized()
    n = x0v.n_qubits
    if scope is None:
        scope = default_scope(n, cfg.instance_scope)
    fn = CostFunction(scope, n)
    rng = np.random.default_rng(cfg.seed)
    trace: list[tuple[int, float]] = []
    iterates: list[tuple[int, int, np.ndarray]] = []
    f0 = fn(x0v.coords)
    trace.append((1, f0))
    iterates.append((0, 1, x0v.coords.copy()))
    last = {"it": 0}

    def record(it, evals, best_f, best_x):
        trace.append((evals + 1, best_f))
        if it - last["it"] >= cfg.record_every:
            iterates.append((it, evals + 1, best_x.copy()))
            last["it"] = it

    algo = _cma_es if cfg.method == "cma_es" else _cobyla
    bx, bf, evals, reason = algo(fn.batch, x0v.coords.copy(), cfg, rng, record)
    if f0 <= bf:
        bx, bf = x0v.coords.copy(), f0
    bx = bx / np.linalg.norm(bx)
    if iterates[-1][2] is not bx:
        iterates.append((iterates[-1][0] + 1, evals + 1, bx.copy()))
    trace.append((evals + 1, bf))
    return OptRun(x0v, trace, RealVecState(n, bx), float(bf), evals + 1, reason, cfg.method, iterates)


ROLE_SUBSYSTEMS = ("A", "B", "C", "D", "AB", "AC", "AD", "BC", "BD", "CD", "ABC", "ABD")


def role_masks(roles: Sequence[int]) -> dict[str, int]:
    """Qubit masks of the Ingleton subsystems for roles ``(A, B, C, D)``."""
    parts = dict(zip("ABCD", roles))
    out = {}
    for name in ROLE_SUBSYSTEMS + ("ABCD",):
        m = 0
        for ch in name:
            m |= parts[ch]
        out[name] = m
    return out


def violated_roles(x: RealVecState | PureState, scope: Scope) -> tuple[int, int, int, int]:
    """Roles of the instance attaining the smallest gap at ``x``."""
    psi = x if isinstance(x, PureState) else devectorize(x)
    if isinstance(scope, InequalityInstance):
        return tuple(scope.roles)
    from .entropy import entropy_vector

    return tuple(scope.argmin(entropy_vector(psi)).roles)


@dataclass
class ResourceTrack:
    subsystems: dict
    rows: list
    crossing: dict

    def column(self, name: str, field_name: str) -> np.ndarray:
        return np.array([r[name][field_name] for r in self.rows])


def resource_row(psi: PureState, masks: dict[str, int], witness_mask: int | None) -> dict:
    row = {}
    for name, m in masks.items():
        st = spectrum_stats(psi, m)
        row[name] = {"s_vn": st.s_vn, "capacity": st.capacity, "nonflatness": st.nonflatness}
    if witness_mask:
        row["witness2"] = magic_witness(partial_trace(psi, witness_mask), 2.0)
    return row


def track_resources(run: OptRun, subsystems: dict[str, int] | None = None, roles=None, scope: Scope | None = None) -> ResourceTrack:
    """Per-iterate entropy and capacity of the Ingleton subsystems.

    Roles default to those of the instance minimised at ``run.x_star``.
    ``crossing[name]`` is the first iterate index where S_vN exceeds C_E.
    """
    n = run.x0.n_qubits
    if roles is None:
        roles = violated_roles(run.x_star, scope if scope is not None else default_scope(n))
    named = role_masks(roles)
    if subsystems is None:
        subsystems = {k: named[k] for k in ROLE_SUBSYSTEMS}
    rows = []
    for it, ev, x in run.iterates:
        r = resource_row(devectorize(x), subsystems, named["ABCD"])
        r["iteration"], r["evals"] = it, ev
        rows.append(r)
    crossing = {}
    for name in subsystems:
        idx = next((i for i, r in enumerate(rows) if r[name]["s_vn"] > r[name]["capacity"]), None)
        crossing[name] = None if idx is None else rows[idx]["iteration"]
    return ResourceTrack(subsystems, rows, crossing)
