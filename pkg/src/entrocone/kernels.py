"""Hot numerical kernels, each in a numba flavour and a numpy flavour.

Amplitudes are little-endian: qubit ``q`` is bit ``q`` of the basis index.
The public names at the bottom of this module are bound to one flavour
according to :mod:`entrocone._accel`; both flavours stay importable so the
benchmark and the tests can compare them.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

EIG_FLOOR = 1e-12


# ---------------------------------------------------------------- gate apply

@njit
def _apply_matrix_nb(psi, mat, qubits):
    n_amp = psi.shape[0]
    k = qubits.shape[0]
    dim = 1 << k
    srt = np.sort(qubits)
    offs = np.zeros(dim, dtype=np.int64)
    for l in range(dim):
        o = 0
        for i in range(k):
            if (l >> i) & 1:
                o |= 1 << qubits[i]
        offs[l] = o
    out = psi.copy()
    buf = np.empty(dim, dtype=np.complex128)
    for r in range(n_amp >> k):
        # spread r over the non-target bit positions
        base = r
        for i in range(k):
            q = srt[i]
            low = base & ((1 << q) - 1)
            base = ((base >> q) << (q + 1)) | low
        for l in range(dim):
            buf[l] = psi[base + offs[l]]
        for a in range(dim):
            acc = 0j
            for b in range(dim):
                acc += mat[a, b] * buf[b]
            out[base + offs[a]] = acc
    return out


def _apply_matrix_np(psi, mat, qubits):
    n = psi.shape[0].bit_length() - 1
    k = len(qubits)
    t = psi.reshape((2,) * n)
    # tensor axis j holds qubit n-1-j; the matrix's first axis is its top local bit
    axes = [n - 1 - int(q) for q in reversed(qubits)]
    u = mat.reshape((2,) * (2 * k))
    res = np.tensordot(u, t, axes=(list(range(k, 2 * k)), axes))
    res = np.moveaxis(res, list(range(k)), axes)
    return np.ascontiguousarray(res).reshape(-1)


# ---------------------------------------------------- reduced density matrix

@njit
def _schmidt_matrix_nb(psi, n, keep):
    kq = np.empty(n, dtype=np.int64)
    oq = np.empty(n, dtype=np.int64)
    nk = 0
    no = 0
    for q in range(n):
        if (keep >> q) & 1:
            kq[nk] = q
            nk += 1
        else:
            oq[no] = q
            no += 1
    m = np.zeros((1 << nk, 1 << no), dtype=np.complex128)
    for idx in range(1 << n):
        a = 0
        for i in range(nk):
            a |= ((idx >> kq[i]) & 1) << i
        b = 0
        for i in range(no):
            b |= ((idx >> oq[i]) & 1) << i
        m[a, b] = psi[idx]
    return m


def _schmidt_matrix_np(psi, n, keep):
    kept = [q for q in range(n) if (keep >> q) & 1]
    rest = [q for q in range(n) if not (keep >> q) & 1]
    t = psi.reshape((2,) * n)
    order = [n - 1 - q for q in reversed(kept)] + [n - 1 - q for q in reversed(rest)]
    return np.transpose(t, order).reshape(1 << len(kept), -1)


@njit
def _reduced_nb(psi, n, keep):
    m = _schmidt_matrix_nb(psi, n, keep)
    return m @ m.conj().T


def _reduced_np(psi, n, keep):
    m = _schmidt_matrix_np(psi, n, keep)
    return m @ m.conj().T


# ---------------------------------------------------------------- entropies

@njit
def _entropies_nb(psi, n, masks):
    full = (1 << n) - 1
    out = np.zeros(masks.shape[0])
    for i in range(masks.shape[0]):
        m = masks[i]
        c = full ^ m
        # work on the smaller side of the cut
        pm = 0
        pc = 0
        for q in range(n):
            pm += (m >> q) & 1
            pc += (c >> q) & 1
        side = m if pm <= pc else c
        if side == 0:
            continue
        rho = _reduced_nb(psi, n, side)
        w = np.linalg.eigvalsh(rho)
        s = 0.0
        for v in w:
            if v > EIG_FLOOR:
                s -= v * np.log2(v)
        out[i] = s
    return out


def _entropies_np(psi, n, masks):
    full = (1 << n) - 1
    out = np.zeros(len(masks))
    for i, m in enumerate(masks):
        m = int(m)
        c = full ^ m
        side = m if bin(m).count("1") <= bin(c).count("1") else c
        if side == 0:
            continue
        w = np.linalg.eigvalsh(_reduced_np(psi, n, side))
        w = w[w > EIG_FLOOR]
        out[i] = -np.sum(w * np.log2(w))
    return out


def batch_entropies(psis: np.ndarray, n: int, masks) -> np.ndarray:
    """Entropies (bits) of many pure states at once, shape ``(batch, len(masks))``.

    Vectorised over the batch with a stacked ``eigvalsh``; this is the path
    used for a CMA-ES generation or a Haar ensemble.
    """
    psis = np.asarray(psis, dtype=np.complex128)
    bsz = psis.shape[0]
    t = psis.reshape((bsz,) + (2,) * n)
    full = (1 << n) - 1
    out = np.zeros((bsz, len(masks)))
    cache: dict[int, np.ndarray] = {}
    for i, m in enumerate(masks):
        m = int(m)
        c = full ^ m
        side = m if bin(m).count("1") <= bin(c).count("1") else c
        if side == 0:
            continue
        if side not in cache:
            kept = [q for q in range(n) if (side >> q) & 1]
            rest = [q for q in range(n) if not (side >> q) & 1]
            order = [0] + [n - q for q in reversed(kept)] + [n - q for q in reversed(rest)]
            mat = np.transpose(t, order).reshape(bsz, 1 << len(kept), -1)
            rho = mat @ mat.conj().transpose(0, 2, 1)
            w = np.linalg.eigvalsh(rho)
            w = np.where(w > EIG_FLOOR, w, 1.0)
            cache[side] = -np.sum(w * np.log2(w), axis=1)
        out[:, i] = cache[side]
    return out


# ------------------------------------------------------------ Pauli traces

@njit
def _pauli_xz_nb(rho):
    d = rho.shape[0]
    out = np.zeros((d, d))
    for x in range(d):
        for z in range(d):
            acc = 0j
            for j in range(d):
                par = 0
                v = j & z
                while v:
                    par ^= 1
                    v &= v - 1
                term = rho[j, j ^ x]
                acc += -term if par else term
            y = x & z
            ny = 0
            while y:
                ny += 1
                y &= y - 1
            ph = ny & 3
            # multiply by i**ny and keep the real part
            if ph == 0:
                out[x, z] = acc.real
            elif ph == 1:
                out[x, z] = -acc.imag
            elif ph == 2:
                out[x, z] = -acc.real
            else:
                out[x, z] = acc.imag
    return out


def _parity_table(d):
    idx = np.arange(d)
    anded = idx[:, None] & idx[None, :]
    pc = np.zeros_like(anded)
    v = anded.copy()
    while v.any():
        pc += v & 1
        v >>= 1
    return pc


def _pauli_xz_np(rho):
    d = rho.shape[0]
    j = np.arange(d)
    # v[x, j] = rho[j, j ^ x]
    v = rho[j[None, :], j[None, :] ^ j[:, None]]
    pc = _parity_table(d)
    signs = 1.0 - 2.0 * (pc & 1)
    w = v @ signs
    phase = (1j) ** (pc & 3)
    return (w * phase).real


# ------------------------------------------------------------------ binding

if USE_NUMBA:
    apply_matrix = _apply_matrix_nb
    reduced_density = _reduced_nb
    subsystem_entropies = _entropies_nb
    pauli_xz = _pauli_xz_nb
else:
    apply_matrix = _apply_matrix_np
    reduced_density = _reduced_np
    subsystem_entropies = _entropies_np
    pauli_xz = _pauli_xz_np

FLAVOURS = {
    "apply_matrix": (_apply_matrix_nb, _apply_matrix_np),
    "reduced_density": (_reduced_nb, _reduced_np),
    "subsystem_entropies": (_entropies_nb, _entropies_np),
    "pauli_xz": (_pauli_xz_nb, _pauli_xz_np),
}
