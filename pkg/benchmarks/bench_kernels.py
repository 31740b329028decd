"""Time the numba and numpy versions of each hot kernel side by side.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--qubits 8]

Each kernel is compiled (first call) before timing, so the numbers are
steady-state per-call costs. Results are printed as a small table and the
two flavours are checked for agreement on the same inputs.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from entrocone.kernels import FLAVOURS


def _inputs(n: int, rng: np.random.Generator) -> dict:
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    small = psi[: 1 << 4] / np.linalg.norm(psi[: 1 << 4])
    return {
        "apply_matrix": (psi, q, np.array([0, n - 1], dtype=np.int64)),
        "reduced_density": (psi, n, (1 << (n // 2)) - 1),
        "subsystem_entropies": (psi, n, np.arange(1, 1 << (n - 1), dtype=np.int64)),
        "pauli_xz": (np.outer(small, small.conj()),),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--qubits", type=int, default=8)
    args = ap.parse_args(argv)
    inputs = _inputs(args.qubits, np.random.default_rng(0))
    print(f"{'kernel':22s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>8s}  agree")
    for name, (nb, np_) in FLAVOURS.items():
        a = inputs[name]
        out_nb = nb(*a)  # compile
        out_np = np_(*a)
        agree = np.allclose(out_nb, out_np, atol=1e-10)
        number = max(1, int(0.2 / max(1e-6, timeit.timeit(lambda: np_(*a), number=1))))
        t_nb = min(timeit.repeat(lambda: nb(*a), number=number, repeat=args.repeat)) / number
        t_np = min(timeit.repeat(lambda: np_(*a), number=number, repeat=args.repeat)) / number
        print(f"{name:22s} {t_nb * 1e3:12.3f} {t_np * 1e3:12.3f} {t_np / t_nb:8.2f}  {agree}")


if __name__ == "__main__":
    main()
