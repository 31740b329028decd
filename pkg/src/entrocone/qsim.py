"""Small statevector simulator.

Basis indices are little-endian: qubit ``q`` is bit ``q`` of the index, so
``|q2 q1 q0>`` written as a bit string reads as a binary number.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels

NORM_TOL = 1e-12
DM_TOL = 1e-10
MAX_QUBITS = 10

_S2 = 1.0 / np.sqrt(2.0)
_H = np.array([[_S2, _S2], [_S2, -_S2]], dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_T = np.diag([1.0, np.exp(0.25j * np.pi)]).astype(np.complex128)
_S = np.diag([1.0, 1j]).astype(np.complex128)

ARITY = {"H": 1, "S": 1, "Sdg": 1, "T": 1, "Tdg": 1, "X": 1, "CNOT": 2, "CH": 2, "CCX": 3}
# text-format spelling -> kind
_TEXT_NAMES = {k.upper(): k for k in ARITY}


def _controlled(u: np.ndarray, n_controls: int) -> np.ndarray:
    """Local matrix with controls on the low bits and the target on the top bit."""
    k = n_controls + 1
    m = np.eye(1 << k, dtype=np.complex128)
    c = (1 << n_controls) - 1
    t = 1 << n_controls
    idx = [c, c | t]
    m[np.ix_(idx, idx)] = u
    return m


GATE_MATRICES = {
    "H": _H,
    "X": _X,
    "T": _T,
    "Tdg": _T.conj().T,
    "S": _S,
    "Sdg": _S.conj().T,
    "CNOT": _controlled(_X, 1),
    "CH": _controlled(_H, 1),
    "CCX": _controlled(_X, 2),
}
for _m in GATE_MATRICES.values():
    _m.setflags(write=False)


class QuantumError(ValueError):
    """Invalid state, gate or circuit."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = _frozen(np.asarray(self.amplitudes).reshape(-1))
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise QuantumError(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        if amps.shape[0] != 1 << self.n_qubits:
            raise QuantumError(f"expected {1 << self.n_qubits} amplitudes, got {amps.shape[0]}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL * 1e2:
            raise QuantumError(f"state not normalised (|psi|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec, normalize: bool = True) -> "PureState":
        v = np.asarray(vec, dtype=np.complex128).reshape(-1)
        n = v.shape[0].bit_length() - 1
        if v.shape[0] != 1 << n:
            raise QuantumError("length is not a power of two")
        if normalize:
            nrm = np.linalg.norm(v)
            if nrm == 0:
                raise QuantumError("zero vector")
            v = v / nrm
        return cls(n, v)

    @classmethod
    def zero(cls, n: int) -> "PureState":
        v = np.zeros(1 << n, dtype=np.complex128)
        v[0] = 1.0
        return cls(n, v)

    @classmethod
    def basis(cls, n: int, index: int) -> "PureState":
        v = np.zeros(1 << n, dtype=np.complex128)
        v[index] = 1.0
        return cls(n, v)

    def density(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(np.outer(a, a.conj()))

    def __len__(self):
        return self.amplitudes.shape[0]


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray = field(repr=False)
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise QuantumError("density matrix must be square")
        d = m.shape[0]
        if d & (d - 1):
            raise QuantumError("dimension is not a power of two")
        if self.validate:
            if np.abs(m - m.conj().T).max() > DM_TOL:
                raise QuantumError("density matrix not Hermitian")
            if abs(np.trace(m).real - 1.0) > DM_TOL:
                raise QuantumError(f"trace {np.trace(m).real!r} != 1")
            if np.linalg.eigvalsh(m).min() < -DM_TOL:
                raise QuantumError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def eigenvalues(self) -> np.ndarray:
        """Spectrum with jitter in ``[-1e-10, 0)`` clipped to zero."""
        w = np.linalg.eigvalsh(self.matrix)
        if w.min() < -DM_TOL:
            raise QuantumError(f"eigenvalue {w.min()!r} below -{DM_TOL}")
        return np.clip(w, 0.0, None)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple

    def __post_init__(self):
        if self.kind not in ARITY:
            raise QuantumError(f"unknown gate {self.kind!r}")
        qs = tuple(int(q) for q in self.qubits)
        if len(qs) != ARITY[self.kind]:
            raise QuantumError(f"{self.kind} takes {ARITY[self.kind]} qubit(s), got {len(qs)}")
        if len(set(qs)) != len(qs):
            raise QuantumError(f"repeated qubit index in {self.kind}{qs}")
        if min(qs) < 0:
            raise QuantumError("negative qubit index")
        object.__setattr__(self, "qubits", qs)

    @property
    def matrix(self) -> np.ndarray:
        return GATE_MATRICES[self.kind]

    def __str__(self):
        return " ".join([self.kind.upper()] + [str(q) for q in self.qubits])


def gate(kind: str, *qubits: int) -> Gate:
    return Gate(kind, tuple(qubits))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple = ()

    def __post_init__(self):
        gs = tuple(self.gates)
        for g in gs:
            if max(g.qubits) >= self.n_qubits:
                raise QuantumError(f"gate {g} out of range for {self.n_qubits} qubits")
        object.__setattr__(self, "gates", gs)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(max(self.n_qubits, other.n_qubits), self.gates + other.gates)

    def decomposed(self) -> "Circuit":
        out = []
        for g in self.gates:
            out.extend(decompose_gate(g) if g.kind in _DECOMPOSABLE else [g])
        return Circuit(self.n_qubits, tuple(out))

    def unitary(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        cols = []
        for i in range(dim):
            cols.append(run_circuit(PureState.basis(self.n_qubits, i), self).amplitudes)
        return np.array(cols).T


def apply_gate(state: PureState, g: Gate) -> PureState:
    if max(g.qubits) >= state.n_qubits:
        raise QuantumError(f"gate {g} out of range for {state.n_qubits} qubits")
    out = kernels.apply_matrix(state.amplitudes, g.matrix, np.array(g.qubits, dtype=np.int64))
    return PureState(state.n_qubits, out)


def run_circuit(
    state: PureState,
    circuit: Circuit,
    observer: Callable[[int, Gate, PureState], None] | None = None,
) -> PureState:
    """Apply ``circuit`` gate by gate; ``observer(i, gate, state)`` sees each result."""
    if circuit.n_qubits != state.n_qubits:
        raise QuantumError("circuit and state qubit counts differ")
    for i, g in enumerate(circuit.gates):
        state = apply_gate(state, g)
        if observer is not None:
            observer(i, g, state)
    return state


def partial_trace(state: PureState | DensityMatrix, keep: int) -> DensityMatrix:
    """Reduced state on the qubits set in bitmask ``keep`` (little-endian order kept)."""
    n = state.n_qubits
    full = (1 << n) - 1
    if keep <= 0 or keep & ~full:
        raise QuantumError(f"keep mask {keep:#x} invalid for {n} qubits")
    if isinstance(state, PureState):
        rho = kernels.reduced_density(state.amplitudes, n, int(keep))
        return DensityMatrix(rho, validate=False)
    if keep == full:
        return state
    # row axis j <-> qubit n-1-j, column axis n+j likewise
    rows = list(range(n))
    cols = [n + j if (keep >> (n - 1 - j)) & 1 else j for j in range(n)]
    out = [j for j in range(n) if (keep >> (n - 1 - j)) & 1]
    out = out + [n + j for j in out]
    t = np.einsum(state.matrix.reshape((2,) * (2 * n)), rows + cols, out)
    d = 1 << bin(keep).count("1")
    return DensityMatrix(t.reshape(d, d), validate=False)


def overlap(a: PureState, b: PureState) -> complex:
    if a.n_qubits != b.n_qubits:
        raise QuantumError("dimension mismatch")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: PureState, b: PureState) -> float:
    return abs(overlap(a, b)) ** 2


def trace_distance(a: PureState, b: PureState) -> float:
    """Pure-state trace distance ``sqrt(1 - |<a|b>|^2)``, in [0, 1]."""
    return float(np.sqrt(max(0.0, 1.0 - fidelity(a, b))))


# -------------------------------------------------------------- decomposing

def _ch_network(c, t):
    return [("S", t), ("H", t), ("T", t), ("CNOT", c, t), ("Tdg", t), ("H", t), ("Sdg", t)]


def _ccx_network(c1, c2, t):
    return [
        ("H", t), ("CNOT", c2, t), ("Tdg", t), ("CNOT", c1, t), ("T", t),
        ("CNOT", c2, t), ("Tdg", t), ("CNOT", c1, t), ("T", c2), ("T", t),
        ("H", t), ("CNOT", c1, c2), ("T", c1), ("Tdg", c2), ("CNOT", c1, c2),
    ]


_DECOMPOSABLE = {"X", "S", "Sdg", "CH", "CCX"}


def decompose_gate(g: Gate) -> list[Gate]:
    """Rewrite ``g`` over {H, T, Tdg, CNOT}, equal to ``g`` up to global phase."""
    q = g.qubits
    if g.kind == "S":
        return [Gate("T", q), Gate("T", q)]
    if g.kind == "Sdg":
        return [Gate("Tdg", q), Gate("Tdg", q)]
    if g.kind == "X":
        return [Gate("H", q)] + [Gate("T", q)] * 4 + [Gate("H", q)]
    if g.kind == "CH":
        raw = _ch_network(*q)
    elif g.kind == "CCX":
        raw = _ccx_network(*q)
    else:
        raise QuantumError(f"no decomposition for {g.kind}")
    out: list[Gate] = []
    for kind, *qs in raw:
        sub = Gate(kind, tuple(qs))
        out.extend(decompose_gate(sub) if kind in ("S", "Sdg") else [sub])
    return out


def local_unitary(gates: Sequence[Gate], qubits: Sequence[int]) -> np.ndarray:
    """Matrix of ``gates`` restricted to ``qubits`` (local little-endian order)."""
    pos = {q: i for i, q in enumerate(qubits)}
    k = len(qubits)
    c = Circuit(k, tuple(Gate(g.kind, tuple(pos[x] for x in g.qubits)) for g in gates))
    return c.unitary()


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = 1e-10) -> bool:
    i = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(u[i]) < tol:
        return False
    ph = v[i] / u[i]
    return abs(abs(ph) - 1) < tol and np.abs(u * ph - v).max() < tol


# ---------------------------------------------------------------------- I/O

def parse_circuit(text: str, n_qubits: int | None = None) -> Circuit:
    gates = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        name = parts[0].upper()
        if name not in _TEXT_NAMES:
            raise QuantumError(f"line {lineno}: unknown gate {parts[0]!r}")
        try:
            qs = tuple(int(p) for p in parts[1:])
            gates.append(Gate(_TEXT_NAMES[name], qs))
        except (ValueError, QuantumError) as exc:
            raise QuantumError(f"line {lineno}: {exc}") from None
    if n_qubits is None:
        n_qubits = 1 + max((max(g.qubits) for g in gates), default=0)
    return Circuit(n_qubits, tuple(gates))


def format_circuit(circuit: Circuit) -> str:
    head = f"# {circuit.n_qubits} qubits, {len(circuit)} gates\n"
    return head + "".join(f"{g}\n" for g in circuit.gates)


def state_to_json(state: PureState, **extra) -> str:
    amps = [[float(a.real), float(a.imag)] for a in state.amplitudes]
    return json.dumps({"n": state.n_qubits, "amplitudes": amps, **extra})


def state_from_json(text: str) -> PureState:
    obj = json.loads(text)
    try:
        amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
        n = int(obj["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise QuantumError(f"malformed state JSON: {exc}") from None
    nrm = np.linalg.norm(amps)
    if abs(nrm - 1) > 1e-6:
        raise QuantumError(f"state JSON not normalised (norm {nrm})")
    return PureState(n, amps / nrm)


def kron_states(*states: PureState) -> PureState:
    """Tensor product; the first argument occupies the lowest qubits."""
    v = np.array([1.0 + 0j])
    for s in states:
        v = np.kron(s.amplitudes, v)
    return PureState(sum(s.n_qubits for s in states), v)


def haar_state(n: int, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return PureState.from_vector(v)


def random_clifford_circuit(n: int, depth: int, rng: np.random.Generator) -> Circuit:
    gs = []
    for _ in range(depth):
        r = rng.integers(3) if n > 1 else rng.integers(2)
        if r == 0:
            gs.append(Gate("H", (int(rng.integers(n)),)))
        elif r == 1:
            gs.append(Gate("S", (int(rng.integers(n)),)))
        else:
            a, b = rng.choice(n, size=2, replace=False)
            gs.append(Gate("CNOT", (int(a), int(b))))
    return Circuit(n, tuple(gs))


def bitmask(qubits: Iterable[int]) -> int:
    m = 0
    for q in qubits:
        m |= 1 << int(q)
    return m
