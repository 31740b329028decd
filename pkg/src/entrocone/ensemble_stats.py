"""Ensemble statistics over optimizer runs and random states.

Covers restart campaigns, distances between converged solutions, the
stability radius of a violator, the Ingleton gap distribution of Haar
random states and entropy/capacity correlations among violators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.stats import norm, unitary_group

from . import kernels
from ._parallel import child_seeds, pmap
from .entropy import spectrum_stats
from .inequal import VIOLATION_THRESHOLD, ingleton, ingleton_instances
from .opt_search import (OptimizerConfig, OptRun, RealVecState, Scope, default_scope, devectorize,
                         minimize, role_masks, sample_unit_sphere, violated_roles)
from .qsim import PureState, fidelity, trace_distance

FIDELITY_BAR = 0.99
KL_BINS = 60
KL_SMOOTHING = 1e-9


# ---------------------------------------------------------------- campaigns

def _restart(args):
    n, cfg, seed = args
    x0 = sample_unit_sphere(1 << (n + 1), np.random.default_rng(seed))
    return minimize(x0, replace(cfg, seed=seed))


def run_restarts(n_qubits: int, restarts: int, cfg: OptimizerConfig = OptimizerConfig(),
                 seed: int = 0, jobs: int = 1) -> list[OptRun]:
    """Independent runs from uniformly random starting points on the sphere."""
    if restarts < 1:
        raise ValueError("restarts must be positive")
    seeds = child_seeds(seed, restarts)
    return pmap(_restart, [(n_qubits, cfg, s) for s in seeds], jobs)


def collect_violators(n_qubits: int = 6, count: int = 100, target: float = 0.165,
                      seed: int = 0, jobs: int = 1, max_evals: int = 100_000) -> list[OptRun]:
    """CMA-ES runs stopped once the gap reaches ``-target``.

    Runs that exhaust the budget are kept; callers filter on ``converged``.
    """
    cfg = OptimizerConfig(method="cma_es", target_violation=target, max_evals=max_evals)
    return run_restarts(n_qubits, count, cfg, seed, jobs)


# ---------------------------------------------------------------- distances

@dataclass(frozen=True)
class DistanceRecord:
    euclidean: float
    trace: float

    def __post_init__(self):
        if self.euclidean < 0 or not -1e-12 <= self.trace <= 1 + 1e-12:
            raise ValueError("distance out of range")


def _coords(x) -> np.ndarray:
    if isinstance(x, OptRun):
        x = x.x_star
    c = x.coords if isinstance(x, RealVecState) else np.asarray(x, dtype=float)
    return c / np.linalg.norm(c)


def solution_distances(pairs: Sequence[tuple]) -> list[DistanceRecord]:
    """Euclidean distance of the optimal vectors and trace distance of the states.

    Items may be :class:`OptRun`, :class:`RealVecState` or plain arrays; runs
    that did not converge are rejected.
    """
    out = []
    for a, b in pairs:
        for r in (a, b):
            if isinstance(r, OptRun) and not r.converged:
                raise ValueError("solution_distances needs converged runs")
        x, y = _coords(a), _coords(b)
        if x.shape != y.shape:
            raise ValueError("dimension mismatch")
        out.append(DistanceRecord(float(np.linalg.norm(x - y)),
                                  min(1.0, trace_distance(devectorize(x), devectorize(y)))))
    return out


# ---------------------------------------------------------------- stability

@dataclass(frozen=True)
class StabilityPoint:
    delta: float
    mean_fidelity: float
    fidelities: tuple
    excluded: int


@dataclass(frozen=True)
class StabilityEstimate:
    xi: float
    uncertainty: float
    curve: tuple
    bar: float = FIDELITY_BAR

    @property
    def excluded(self) -> int:
        return sum(p.excluded for p in self.curve)


def _perturbed(args):
    x_star, delta, cfg, scope, seed = args
    rng = np.random.default_rng(seed)
    x0 = x_star + delta * sample_unit_sphere(x_star.shape[0], rng)
    run = minimize(x0, replace(cfg, seed=seed), scope)
    return run.converged, fidelity(devectorize(x_star), run.state)


def stability_scan(x_star: RealVecState | np.ndarray, delta_norms: Sequence[float], trials: int = 4,
                   cfg: OptimizerConfig | None = None, scope: Scope | None = None, seed: int = 0,
                   jobs: int = 1, stop_after: int | None = None) -> StabilityEstimate:
    """Re-minimise from isotropic perturbations of ``x_star``.

    Parameters
    ----------
    x_star : converged violator (normalised here).
    delta_norms : perturbation sizes, scanned in increasing order.
    trials : perturbations per size.
    cfg : re-minimisation settings. The default is COBYLA stopped once the
        cost is within 1e-5 of the cost at ``x_star``.
    stop_after : end the scan after this many consecutive sizes below the
        fidelity bar (``None`` scans all sizes).

    Returns
    -------
    StabilityEstimate
        ``xi`` is the largest size whose mean fidelity reaches 0.99, or 0 if
        none does. ``uncertainty`` is half the grid step above ``xi``.
        Runs that hit the evaluation budget are excluded and counted.
    """
    xs = _coords(x_star)
    n = (xs.shape[0] // 2).bit_length() - 1
    if scope is None:
        scope = default_scope(n)
    if cfg is None:
        from .opt_search import CostFunction

        f_star = CostFunction(scope, n)(xs)
        cfg = OptimizerConfig(method="cobyla", max_evals=20_000, target_violation=-f_star - 1e-5)
    grid = sorted(float(d) for d in delta_norms)
    if not grid or grid[0] < 0:
        raise ValueError("delta_norms must be nonnegative and nonempty")
    curve = []
    misses = 0
    for k, d in enumerate(grid):
        seeds = child_seeds(seed * 7919 + k, trials)
        res = pmap(_perturbed, [(xs, d, cfg, scope, s) for s in seeds], jobs)
        fids = tuple(f for ok, f in res if ok)
        mean = float(np.mean(fids)) if fids else float("nan")
        curve.append(StabilityPoint(d, mean, fids, trials - len(fids)))
        misses = 0 if mean >= FIDELITY_BAR else misses + 1
        if stop_after is not None and misses >= stop_after:
            break
    ok = [i for i, p in enumerate(curve) if p.mean_fidelity >= FIDELITY_BAR]
    if not ok:
        return StabilityEstimate(0.0, grid[0] / 2, tuple(curve))
    i = ok[-1]
    nxt = grid[i + 1] if i + 1 < len(grid) else grid[i]
    return StabilityEstimate(curve[i].delta, (nxt - curve[i].delta) / 2, tuple(curve))


# ---------------------------------------------------------------- Haar scan

def kl_divergence(p, q, smoothing: float = KL_SMOOTHING) -> float:
    """KL(p || q) in nats for two histograms, after additive smoothing."""
    p = np.asarray(p, dtype=float) + smoothing
    q = np.asarray(q, dtype=float) + smoothing
    if p.shape != q.shape:
        raise ValueError("histograms differ in length")
    p /= p.sum()
    q /= q.sum()
    return float(max(0.0, np.sum(p * np.log(p / q))))


def haar_states(n_qubits: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Rows are Haar-random pure states (normalised complex Gaussians)."""
    d = 1 << n_qubits
    z = rng.normal(size=(samples, d)) + 1j * rng.normal(size=(samples, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_states_qr(n_qubits: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Cross-check path: explicit Haar unitaries applied to ``|+>^n``."""
    d = 1 << n_qubits
    plus = np.full(d, d**-0.5, dtype=complex)
    return np.array([unitary_group.rvs(d, random_state=rng) @ plus for _ in range(samples)])


def single_qubit_purity(psis: np.ndarray, qubit: int = 0) -> np.ndarray:
    """Tr rho^2 of one qubit for each row of ``psis``."""
    d = psis.shape[1]
    n = d.bit_length() - 1
    t = psis.reshape(-1, *([2] * n))
    ax = n - qubit  # axis 0 is the batch; qubit n-1 is axis 1
    m = np.moveaxis(t, ax, 1).reshape(psis.shape[0], 2, -1)
    rho = m @ m.conj().transpose(0, 2, 1)
    return np.einsum("bij,bji->b", rho, rho).real


def haar_purity_mean(n_qubits: int) -> float:
    """Exact Haar average of the single-qubit purity."""
    da, db = 2, 1 << (n_qubits - 1)
    return (da + db) / (da * db + 1)


def _policy_matrix(policy: str) -> np.ndarray:
    if policy == "canonical":
        return ingleton(1, 2, 4, 8).coefficients()[None, :]
    if policy == "min6":
        return ingleton_instances(4, purity=False).matrix
    if policy == "min3":
        return ingleton_instances(4, purity=True).matrix
    raise ValueError(f"unknown policy {policy!r}")


@dataclass
class GapHistogram:
    samples: int
    mean: float
    std: float
    edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    kl_to_normal: float
    violations: int
    policy: str
    gaps: np.ndarray = field(repr=False)

    @property
    def z_zero(self) -> float:
        """Standard score of a zero gap under the fitted normal."""
        return -self.mean / self.std

    def summary(self) -> dict:
        return {"samples": self.samples, "mu": self.mean, "sigma": self.std, "kl": self.kl_to_normal,
                "violations": self.violations, "z_zero": self.z_zero, "policy": self.policy}


def _gap_chunk(args):
    n, size, policy, seed, sampler = args
    rng = np.random.default_rng(seed)
    psis = (haar_states if sampler == "gaussian" else haar_states_qr)(n, size, rng)
    masks = np.arange(1, 16, dtype=np.int64)
    ent = np.zeros((size, 16))
    ent[:, 1:] = kernels.batch_entropies(psis, n, masks)
    return (ent @ _policy_matrix(policy).T).min(axis=1)


def haar_gap_scan(n_qubits: int = 8, samples: int = 10_000, policy: str = "canonical", seed: int = 0,
                  jobs: int = 1, chunk: int = 1000, sampler: str = "gaussian") -> GapHistogram:
    """Ingleton gap of the first four qubits of Haar-random states.

    ``policy`` picks the instances: the canonical one with single-qubit
    roles, the six mixed-state forms (``"min6"``) or the three forms that
    remain after complement folding (``"min3"``). Each sample contributes
    the smallest gap over the chosen instances.
    """
    if n_qubits < 5:
        raise ValueError("need at least five qubits so the four-qubit marginal is mixed")
    if samples < 2:
        raise ValueError("need at least two samples")
    if sampler not in ("gaussian", "qr"):
        raise ValueError(f"unknown sampler {sampler!r}")
    _policy_matrix(policy)
    sizes = [min(chunk, samples - i) for i in range(0, samples, chunk)]
    seeds = child_seeds(seed, len(sizes))
    gaps = np.concatenate(pmap(_gap_chunk, [(n_qubits, s, policy, sd, sampler) for s, sd in zip(sizes, seeds)], jobs))
    mu, sigma = float(gaps.mean()), float(gaps.std(ddof=1))
    counts, edges = np.histogram(gaps, bins=KL_BINS)
    expected = np.diff(norm.cdf(edges, mu, sigma))
    kl = kl_divergence(counts / counts.sum(), expected)
    viol = int(np.sum(gaps < -VIOLATION_THRESHOLD))
    return GapHistogram(samples, mu, sigma, edges, counts, kl, viol, policy, gaps)


# ---------------------------------------------------------------- correlations

@dataclass(frozen=True)
class Correlation:
    subsystem: str
    mean_entropy: float
    mean_capacity: float
    pearson: float
    defined: bool
    size: int


def pearson(x, y) -> tuple[float, bool]:
    """Pearson coefficient, or ``(nan, False)`` when a column is constant."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need two equally long columns of at least two values")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = math.sqrt(np.dot(dx, dx)), math.sqrt(np.dot(dy, dy))
    scale = max(1.0, np.abs(x).max(), np.abs(y).max())
    if sx <= 1e-12 * scale * math.sqrt(x.size) or sy <= 1e-12 * scale * math.sqrt(x.size):
        return float("nan"), False
    return float(np.clip(np.dot(dx, dy) / (sx * sy), -1, 1)), True


def resource_correlation(violators: Sequence, subsystems: Sequence[str] = ("A", "B", "CD"),
                         scope: Scope | None = None, roles=None, min_size: int = 30) -> dict[str, Correlation]:
    """Entropy against capacity of entanglement across a violator ensemble.

    Each violator is a :class:`PureState`, :class:`RealVecState` or
    :class:`OptRun`. Subsystems are named by Ingleton role letters; the roles
    of each state come from the instance it violates most unless ``roles``
    fixes them for all states.
    """
    if len(violators) < min_size:
        raise ValueError(f"ensemble has {len(violators)} states, need at least {min_size}")
    cols = {s: ([], []) for s in subsystems}
    for v in violators:
        if isinstance(v, OptRun):
            v = v.state
        elif not isinstance(v, PureState):
            v = devectorize(v)
        if scope is None:
            scope = default_scope(v.n_qubits)
        masks = role_masks(roles if roles is not None else violated_roles(v, scope))
        for s in subsystems:
            st = spectrum_stats(v, masks[s])
            cols[s][0].append(st.s_vn)
            cols[s][1].append(st.capacity)
    out = {}
    for s, (sv, ce) in cols.items():
        r, ok = pearson(sv, ce)
        out[s] = Correlation(s, float(np.mean(sv)), float(np.mean(ce)), r, ok, len(sv))
    return out
