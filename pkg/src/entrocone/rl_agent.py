"""Tabular Q-learning over gate sequences.

The agent appends one gate per step to a circuit acting on a fixed start
state and is rewarded by how close the resulting entropy vector comes to
violating a target inequality.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .entropy import EntropyVector, entropy_vector
from .inequal import InequalityInstance, InstanceSet, target_gap
from .qsim import ARITY, Circuit, Gate, PureState, apply_gate

KEY_DECIMALS = 9


@dataclass(frozen=True)
class AgentConfig:
    learning_rate: float = 0.8
    epsilon: float = 0.2
    discount: float = 0.5
    max_steps: int = 200
    max_episodes: int = 5000
    violation_threshold: float = 1e-6
    step_penalty: float = -0.01
    terminal_bonus: float = 10.0
    seed: int = 0
    shaped: bool = True
    min_successes: int = 1

    def __post_init__(self):
        if not 0 <= self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in [0, 1]")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if not 0 <= self.discount < 1:
            raise ValueError("discount must lie in [0, 1)")
        if self.max_steps < 1 or self.max_episodes < 1 or self.min_successes < 1:
            raise ValueError("budgets must be positive")


class ActionSpace:
    """Gate templates expanded over ``n_qubits`` into a dense action list."""

    def __init__(self, n_qubits: int, gate_names: Sequence[str]):
        self.n_qubits = n_qubits
        self.gate_names = tuple(gate_names)
        acts: list[Gate] = []
        for name in self.gate_names:
            kind = {k.upper(): k for k in ARITY}.get(name.upper())
            if kind is None:
                raise ValueError(f"unknown gate {name!r}")
            k = ARITY[kind]
            if k > n_qubits:
                raise ValueError(f"{kind} needs {k} qubits")
            if k == 3:
                for t in range(n_qubits):
                    rest = [q for q in range(n_qubits) if q != t]
                    acts.extend(Gate(kind, (a, b, t)) for a, b in itertools.combinations(rest, 2))
            else:
                acts.extend(Gate(kind, qs) for qs in itertools.permutations(range(n_qubits), k))
        self.actions = tuple(acts)

    def __len__(self):
        return len(self.actions)

    def __getitem__(self, i: int) -> Gate:
        return self.actions[i]

    def index(self, g: Gate) -> int:
        return self.actions.index(g)


class QTable:
    """Sparse table; unseen (state, action) pairs read as zero."""

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self.rows: dict[int, np.ndarray] = {}

    def row(self, s: int) -> np.ndarray:
        r = self.rows.get(s)
        return r if r is not None else np.zeros(self.n_actions)

    def get(self, s: int, a: int) -> float:
        r = self.rows.get(s)
        return 0.0 if r is None else float(r[a])

    def set(self, s: int, a: int, value: float):
        r = self.rows.get(s)
        if r is None:
            r = self.rows[s] = np.zeros(self.n_actions)
        r[a] = value

    def __len__(self):
        return len(self.rows)


def state_key(state: PureState) -> int:
    """64-bit hash of the amplitudes rounded to 1e-9."""
    a = state.amplitudes
    parts = np.concatenate([np.round(a.real, KEY_DECIMALS), np.round(a.imag, KEY_DECIMALS)])
    parts = parts + 0.0  # fold -0.0 into 0.0
    digest = hashlib.blake2b(parts.tobytes(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def reward(ev: EntropyVector, target: InequalityInstance | InstanceSet) -> float:
    """Inequality difference RHS - LHS (largest over a set)."""
    return -target_gap(target, ev)


def q_update(table: QTable, s: int, a: int, r: float, s_next: int | None, cfg: AgentConfig) -> float:
    """One Bellman step; ``s_next=None`` marks a terminal transition."""
    future = 0.0 if s_next is None else float(table.row(s_next).max())
    q = (1 - cfg.learning_rate) * table.get(s, a) + cfg.learning_rate * (r + cfg.discount * future)
    table.set(s, a, q)
    return q


def select_action(table: QTable, s: int, n_actions: int, epsilon: float, rng: np.random.Generator) -> int:
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(n_actions))
    return int(np.argmax(table.row(s)))  # argmax picks the lowest index on ties


@dataclass
class StepRecord:
    gate_index: int
    gate: Gate
    gap: float
    reward: float
    entropies: np.ndarray = field(repr=False)


@dataclass
class TrainingResult:
    success: bool
    circuit: Circuit
    state: PureState
    trajectory: list
    episodes: int
    steps: int
    table: QTable = field(repr=False)
    episode_gaps: list = field(default_factory=list, repr=False)

    @property
    def final_gap(self) -> float:
        return self.trajectory[-1].gap if self.trajectory else float("nan")


def train_to_violation(
    initial: PureState,
    space: ActionSpace,
    target: InequalityInstance | InstanceSet,
    cfg: AgentConfig = AgentConfig(),
    parties: Sequence[Sequence[int]] | None = None,
) -> TrainingResult:
    """Run episodes until the target is violated or the budget runs out.

    Each episode restarts from ``initial``; the Q-table persists. Training
    stops after ``cfg.min_successes`` violating episodes and returns the most
    recent one. On budget exhaustion ``success`` is False and the best
    episode seen is returned instead.
    """
    if space.n_qubits != initial.n_qubits:
        raise ValueError("action space and state disagree on qubit count")
    rng = np.random.default_rng(cfg.seed)
    table = QTable(len(space))
    cache: dict[int, tuple[float, np.ndarray]] = {}

    def evaluate(st: PureState, key: int):
        hit = cache.get(key)
        if hit is None:
            ev = entropy_vector(st, parties)
            hit = cache[key] = (target_gap(target, ev), ev.entries)
        return hit

    s0 = state_key(initial)
    successes = 0
    total_steps = 0
    best: tuple[float, list, PureState] | None = None
    last_win = None
    episode_gaps = []
    for episode in range(1, cfg.max_episodes + 1):
        state, s = initial, s0
        log: list[StepRecord] = []
        ep_best = np.inf
        for step in range(cfg.max_steps):
            a = select_action(table, s, len(space), cfg.epsilon, rng)
            nxt = apply_gate(state, space[a])
            s_next = state_key(nxt)
            g, ent = evaluate(nxt, s_next)
            violated = g < -cfg.violation_threshold
            r = -g
            if cfg.shaped:
                r += cfg.step_penalty + (cfg.terminal_bonus if violated else 0.0)
            q_update(table, s, a, r, None if violated else s_next, cfg)
            log.append(StepRecord(step, space[a], g, r, ent))
            state, s = nxt, s_next
            ep_best = min(ep_best, g)
            total_steps += 1
            if violated:
                break
        episode_gaps.append(ep_best)
        if best is None or log[-1].gap < best[0]:
            best = (log[-1].gap, log, state)
        if log[-1].gap < -cfg.violation_threshold:
            successes += 1
            last_win = (log, state)
            if successes >= cfg.min_successes:
                break
    if last_win is not None:
        log, state = last_win
        ok = True
    else:
        _, log, state = best
        ok = False
    circ = Circuit(initial.n_qubits, tuple(rec.gate for rec in log))
    return TrainingResult(ok, circ, state, log, episode, total_steps, table, episode_gaps)
