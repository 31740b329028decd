"""Named states and circuits used throughout the package.

Ket strings below are written most-significant qubit first, so the string
``"0101"`` is basis index 5 and its rightmost character is qubit 0.
"""
from __future__ import annotations

import numpy as np

from .qsim import Circuit, DensityMatrix, Gate, PureState

# purified violator: qubits 0,1 are the purifier R, qubits 2..5 are A..D
ABCDR_PARTIES = ([2], [3], [4], [5])
PURIFIER = 0b000011


def ghz(n: int) -> PureState:
    v = np.zeros(1 << n, dtype=np.complex128)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return PureState(n, v)


def plus(n: int = 1) -> PureState:
    return PureState.from_vector(np.ones(1 << n))


def t_plus() -> PureState:
    return PureState.from_vector([1.0, np.exp(0.25j * np.pi)])


def from_kets(n: int, terms: dict[str, complex]) -> PureState:
    v = np.zeros(1 << n, dtype=np.complex128)
    for ket, amp in terms.items():
        v[int(ket, 2)] += amp
    return PureState.from_vector(v)


def linden_rho() -> DensityMatrix:
    """Four-qubit mixed state violating Ingleton (parties A..D = qubits 0..3)."""
    g = np.zeros(16)
    g[0] = g[15] = 1 / np.sqrt(2)
    e5 = np.zeros(16)
    e5[int("0101", 2)] = 1.0
    e9 = np.zeros(16)
    e9[int("1001", 2)] = 1.0
    rho = 0.5 * np.outer(g, g) + 0.25 * np.outer(e5, e5) + 0.25 * np.outer(e9, e9)
    return DensityMatrix(rho.astype(np.complex128))


def psi_abcdr() -> PureState:
    """Six-qubit purification of :func:`linden_rho` with R on qubits 0 and 1."""
    s = 1 / np.sqrt(2)
    return from_kets(6, {
        "000000": s * s,
        "111100": s * s,
        "010101": 0.5,
        "100110": 0.5,
    })


def saturating_state() -> PureState:
    """Six-qubit state used as the start of the perturbation study."""
    return from_kets(6, {
        "000000": 0.5,
        "111100": 0.5,
        "010101": 0.5,
        "101010": 0.5,
    })


def abcdr_circuit() -> Circuit:
    """Prepare :func:`psi_abcdr` from ``|000000>``.

    Qubits 5 (D) and 4 (C) are put in uniform superposition; every other
    qubit is a Boolean function of those two:
    A = D or C, B = D and C, r0 = C and not D, r1 = D and not C.
    """
    g = Gate
    seq = [
        g("H", (5,)), g("H", (4,)),
        # A = D xor C xor (D and C)
        g("CNOT", (5, 2)), g("CNOT", (4, 2)), g("CCX", (5, 4, 2)),
        g("CCX", (5, 4, 3)),
        g("X", (5,)), g("CCX", (5, 4, 0)), g("X", (5,)),
        g("X", (4,)), g("CCX", (5, 4, 1)), g("X", (4,)),
    ]
    return Circuit(6, tuple(seq))


def mmi_circuit() -> Circuit:
    """Four-gate GHZ preparation on four qubits."""
    return Circuit(4, (Gate("H", (0,)), Gate("CNOT", (0, 1)), Gate("CNOT", (1, 2)), Gate("CNOT", (2, 3))))
