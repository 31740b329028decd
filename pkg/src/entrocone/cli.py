"""Command-line entry point.

Every subcommand that produces data writes it to an output directory
together with ``config.json`` (the resolved arguments, enough to replay the
run) and ``manifest.json`` (versions, seed, wall time). Exit codes: 0 on
success, 1 on usage or input errors, 2 when a search exhausts its budget.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend_name

EXIT_OK, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2
SEED_ENV = "ENTROCONE_SEED"
DEFAULT_DELTAS = "0.02,0.04,0.06,0.08,0.1,0.12,0.14,0.16,0.18,0.2"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return f"{float(v) + 0.0:.12g}"  # no "-0"
    if v is None:
        return ""
    return v


class Output:
    """An output directory; created on first use so failed validation leaves nothing behind."""

    def __init__(self, path: str | None, command: str, args: dict, seed: int | None):
        self.path = Path(path) if path else None
        self.command, self.args, self.seed = command, args, seed
        self.t0 = time.perf_counter()
        self.files: list[str] = []

    def _file(self, name: str) -> Path:
        self.path.mkdir(parents=True, exist_ok=True)
        self.files.append(name)
        return self.path / name

    def csv(self, name: str, header, rows):
        if self.path is None:
            return
        with open(self._file(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])

    def json(self, name: str, obj):
        if self.path is not None:
            self._file(name).write_text(json.dumps(obj, indent=2, default=_json_default) + "\n")

    def text(self, name: str, body: str):
        if self.path is not None:
            self._file(name).write_text(body)

    def close(self, exit_code: int):
        if self.path is None:
            return
        self.json("config.json", {"subcommand": self.command, "args": self.args})
        import numba
        import scipy

        self.json("manifest.json", {
            "entrocone": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__, "backend": backend_name(),
            "seed": self.seed, "wall_time_s": time.perf_counter() - self.t0, "exit_code": exit_code,
            "files": sorted(set(self.files)),
        })


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


# ---------------------------------------------------------------- parsing helpers

def _resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _parse_parties(spec: str | None, n: int):
    if spec is None:
        return [[q] for q in range(n)]
    try:
        return [[int(q) for q in grp.split("+")] for grp in spec.split(",")]
    except ValueError:
        raise UsageError(f"bad party list {spec!r}; use e.g. 2,3,4,5 or 0+1,2") from None


def _parse_masks(spec: str | None, n: int) -> list[int]:
    if spec is None:
        return [1 << q for q in range(n)]
    try:
        masks = [int(m, 0) for m in spec.split(",")]
    except ValueError:
        raise UsageError(f"bad subsystem list {spec!r}; give qubit bitmasks such as 1,2,12") from None
    for m in masks:
        if not 0 < m < 1 << n:
            raise UsageError(f"subsystem mask {m} out of range for {n} qubits")
    return masks


def _parse_floats(spec: str) -> list[float]:
    try:
        return [float(x) for x in spec.split(",")]
    except ValueError:
        raise UsageError(f"bad number list {spec!r}") from None


def _load_state(path: str):
    from .qsim import QuantumError, state_from_json

    try:
        return state_from_json(_read(path))
    except (QuantumError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _load_states(path: str):
    """A JSON list of states, as written by ``optimize`` (states.json)."""
    from .qsim import PureState

    try:
        items = json.loads(_read(path))
        return [PureState.from_vector(np.array([complex(a, b) for a, b in it["amplitudes"]])) for it in items]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: not a list of states ({exc})") from None


def _target(spec: str, n_parties: int):
    from .inequal import parse_target

    try:
        return parse_target(spec, n_parties)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None


def _opt_config(args, **over):
    from .opt_search import OptimizerConfig

    kw = dict(method=args.method, max_evals=args.max_evals, target_violation=args.target_violation,
              instance_scope=args.scope)
    if getattr(args, "sigma0", None) is not None:
        kw["sigma0"] = args.sigma0
    if getattr(args, "rho_beg", None) is not None:
        kw["rho_beg"] = args.rho_beg
    kw.update(over)
    try:
        return OptimizerConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- subcommands

def cmd_instances(args, seed):
    from .inequal import ingleton_instances

    if not 4 <= args.n <= 10:
        raise UsageError("--n must lie in 4..10")
    inst = ingleton_instances(args.n, not args.no_purity)
    print(len(inst.instances))
    out = Output(args.out, "instances", vars(args), None)
    out.json("instances.json", {"n": args.n, "purity": not args.no_purity, "count": len(inst.instances)})
    if args.dump:
        Path(args.dump).write_text(json.dumps([i.to_dict() for i in inst.instances]) + "\n")
    return out, EXIT_OK


def cmd_violate(args, seed):
    from .qsim import PureState, format_circuit, state_to_json
    from .rl_agent import ActionSpace, AgentConfig, train_to_violation
    from .entropy import entropy_vector

    initial = _load_state(args.initial) if args.initial else PureState.zero(args.n)
    n = initial.n_qubits
    parties = _parse_parties(args.parties, n)
    target = _target(args.target, len(parties))
    try:
        space = ActionSpace(n, [g.strip() for g in args.gates.split(",")])
        cfg = AgentConfig(learning_rate=args.alpha, epsilon=args.epsilon, discount=args.gamma,
                          max_steps=args.max_steps, max_episodes=args.max_episodes, seed=seed,
                          shaped=not args.no_shaping, min_successes=args.min_successes)
        entropy_vector(initial, parties)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = train_to_violation(initial, space, target, cfg, parties)
    ev = entropy_vector(res.state, parties)
    out = Output(args.out, "violate", vars(args), seed)
    out.text("circuit.txt", format_circuit(res.circuit))
    out.text("state.json", state_to_json(res.state) + "\n")
    out.csv("trajectory.csv", ["gate_index", "gate", "gap", "reward"],
            [(i + 1, str(r.gate), r.gap, r.reward) for i, r in enumerate(res.trajectory)])
    summary = {"success": res.success, "episodes": res.episodes, "steps": res.steps,
               "gates": len(res.circuit), "final_gap": res.final_gap, "difference": -res.final_gap + 0.0,
               "entropy_vector": ev.as_dict()}
    out.json("summary.json", summary)
    print(json.dumps({k: summary[k] for k in ("success", "episodes", "gates", "difference")}))
    return out, EXIT_OK if res.success else EXIT_BUDGET


def _resource_rows(states, masks, gap_fn=None):
    from .entropy import spectrum_stats
    from .magic import magic_witness
    from .qsim import partial_trace

    for psi in states:
        per = []
        for m in masks:
            st = spectrum_stats(psi, m)
            per.append((m, st.s_vn, st.capacity, st.nonflatness, magic_witness(partial_trace(psi, m))))
        yield (gap_fn(psi) if gap_fn else None), per


def _circuit_states(args):
    from .qsim import PureState, QuantumError, parse_circuit, run_circuit

    text = _read(args.circuit)
    try:
        circ = parse_circuit(text)
        initial = _load_state(args.initial) if args.initial else PureState.zero(max(args.n or 0, circ.n_qubits))
        circ = parse_circuit(text, initial.n_qubits)
    except QuantumError as exc:
        raise UsageError(f"{args.circuit}: {exc}") from None
    states = [initial]
    run_circuit(initial, circ, lambda i, g, st: states.append(st))
    return circ, states


def cmd_track(args, seed):
    from .entropy import entropy_vector
    from .inequal import target_gap

    circ, states = _circuit_states(args)
    n = states[0].n_qubits
    parties = _parse_parties(args.parties, n)
    masks = _parse_masks(args.subsystems, n)
    target = _target(args.target, len(parties))
    try:
        entropy_vector(states[0], parties)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows, first = [], None
    for i, (g, per) in enumerate(_resource_rows(states, masks, lambda p: target_gap(target, entropy_vector(p, parties)))):
        violated = g < -args.threshold
        if violated and first is None:
            first = i
        label = "" if i == 0 else str(circ.gates[i - 1])
        rows.append([i, label, g, -g, violated] + [v for p in per for v in p[1:]])
    header = ["gate_index", "gate", "gap", "difference", "violated"]
    for m in masks:
        header += [f"s_vn_{m}", f"capacity_{m}", f"nonflatness_{m}", f"witness2_{m}"]
    out = Output(args.out, "track", vars(args), seed)
    out.csv("trajectory.csv", header, rows)
    final = entropy_vector(states[-1], parties)
    summary = {"gates": len(circ), "first_violation": first, "final_gap": rows[-1][2] + 0.0,
               "final_difference": rows[-1][3] + 0.0, "final_entropy_vector": final.as_dict()}
    out.json("summary.json", summary)
    print(json.dumps({k: summary[k] for k in ("gates", "first_violation", "final_difference")}))
    return out, EXIT_OK


def cmd_resources(args, seed):
    header = ["gate_index", "subsystem_mask", "s_vn", "capacity", "nonflatness", "witness2"]
    if args.circuit:
        _, states = _circuit_states(args)
        masks = _parse_masks(args.subsystems, states[0].n_qubits)
        index = list(range(len(states)))
        code = EXIT_OK
        extra = {}
    else:
        from .ensemble_stats import run_restarts
        from .opt_search import devectorize, role_masks, violated_roles, default_scope

        cfg = _opt_config(args)
        run = run_restarts(args.n, 1, cfg, seed)[0]
        roles = violated_roles(run.x_star, default_scope(args.n, cfg.instance_scope))
        named = role_masks(roles)
        masks = _parse_masks(args.subsystems, args.n) if args.subsystems else [named[k] for k in ("A", "B", "CD")]
        states = [devectorize(x) for _, _, x in run.iterates]
        index = [it for it, _, _ in run.iterates]
        code = EXIT_OK if run.converged else EXIT_BUDGET
        extra = {"final_gap": run.final_cost, "roles": list(roles), "stop_reason": run.stop_reason}
    rows = []
    for i, (_, per) in zip(index, _resource_rows(states, masks)):
        rows.extend([i, *p] for p in per)
    out = Output(args.out, "resources", vars(args), seed)
    out.csv("resources.csv", header, rows)
    out.json("summary.json", {"rows": len(rows), "subsystems": masks, **extra})
    print(json.dumps({"rows": len(rows), "subsystems": masks}))
    return out, code


def _states_json(runs):
    return [{"amplitudes": [[float(a.real), float(a.imag)] for a in r.state.amplitudes], "gap": r.final_cost,
             "stop_reason": r.stop_reason} for r in runs]


def cmd_optimize(args, seed):
    from .ensemble_stats import run_restarts
    from .qsim import state_to_json

    if args.restarts < 1 or not 2 <= args.n <= 8:
        raise UsageError("need --restarts >= 1 and 2 <= --n <= 8")
    cfg = _opt_config(args)
    runs = run_restarts(args.n, args.restarts, cfg, seed, args.jobs)
    costs = np.array([r.final_cost for r in runs])
    best = int(np.argmin(costs))
    out = Output(args.out, "optimize", vars(args), seed)
    out.csv("runs.csv", ["restart", "method", "final_gap", "evals", "stop_reason"],
            [(i, r.method, r.final_cost, r.evals, r.stop_reason) for i, r in enumerate(runs)])
    out.csv("trace.csv", ["restart", "evals", "best_gap"],
            [(i, e, f) for i, r in enumerate(runs) for e, f in r.trace])
    out.text("violator.json", state_to_json(runs[best].state, gap=float(costs[best])) + "\n")
    out.json("states.json", _states_json(runs))
    summary = {"method": cfg.method, "restarts": len(runs), "best_gap": float(costs[best]),
               "mean_gap": float(costs.mean()), "within_0.01_of_best": float(np.mean(costs <= costs[best] + 0.01)),
               "budget_exhausted": int(sum(not r.converged for r in runs))}
    out.json("summary.json", summary)
    print(json.dumps(summary))
    return out, EXIT_BUDGET if summary["budget_exhausted"] == len(runs) else EXIT_OK


def cmd_haar_scan(args, seed):
    from .ensemble_stats import haar_gap_scan

    if args.samples < 1000 and not args.allow_small:
        raise UsageError("--samples must be at least 1000 (use --allow-small for quick checks)")
    try:
        h = haar_gap_scan(args.n, args.samples, args.policy, seed, args.jobs, sampler=args.sampler)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Output(args.out, "haar-scan", vars(args), seed)
    out.csv("gaps.csv", ["sample", "gap"], enumerate(h.gaps))
    out.csv("histogram.csv", ["left", "right", "count"], zip(h.edges[:-1], h.edges[1:], h.counts))
    out.json("summary.json", h.summary())
    print(json.dumps(h.summary()))
    return out, EXIT_OK


def cmd_stability(args, seed):
    from .ensemble_stats import run_restarts, stability_scan
    from .opt_search import vectorize

    deltas = _parse_floats(args.deltas)
    if args.state:
        x = vectorize(_load_state(args.state))
    else:
        run = run_restarts(args.n, 1, _opt_config(args, method="cma_es", target_violation=None), seed)[0]
        x = run.x_star
    cfg = None
    if args.max_evals_reopt:
        from .opt_search import CostFunction, default_scope

        n = x.n_qubits
        f_star = CostFunction(default_scope(n), n)(x.coords)
        cfg = _opt_config(args, method="cobyla", max_evals=args.max_evals_reopt, target_violation=-f_star - 1e-5,
                          instance_scope="full_set")
    est = stability_scan(x, deltas, args.trials, cfg, seed=seed, jobs=args.jobs, stop_after=args.stop_after)
    out = Output(args.out, "stability", vars(args), seed)
    out.csv("curve.csv", ["delta", "trial", "fidelity"],
            [(p.delta, k, f) for p in est.curve for k, f in enumerate(p.fidelities)])
    summary = {"xi": est.xi, "uncertainty": est.uncertainty, "bar": est.bar, "excluded": est.excluded,
               "curve": [[p.delta, p.mean_fidelity] for p in est.curve]}
    out.json("summary.json", summary)
    print(json.dumps({k: summary[k] for k in ("xi", "uncertainty", "excluded")}))
    return out, EXIT_OK


def _ensemble(args, seed, count, cfg):
    from .ensemble_stats import run_restarts

    if args.from_states:
        return _load_states(args.from_states), 0
    runs = run_restarts(args.n, count, cfg, seed, args.jobs)
    return [r for r in runs if r.converged], sum(not r.converged for r in runs)


def cmd_distances(args, seed):
    from .ensemble_stats import solution_distances

    states, dropped = _ensemble(args, seed, 2 * args.pairs, _opt_config(args))
    if len(states) < 2:
        return Output(args.out, "distances", vars(args), seed), EXIT_BUDGET
    pairs = [(states[i], states[i + 1]) for i in range(0, len(states) - 1, 2)]
    from .opt_search import vectorize

    recs = solution_distances([(vectorize(a), vectorize(b)) for a, b in pairs])
    out = Output(args.out, "distances", vars(args), seed)
    out.csv("distances.csv", ["pair", "euclidean", "trace"], [(i, r.euclidean, r.trace) for i, r in enumerate(recs)])
    summary = {"pairs": len(recs), "dropped_runs": dropped, "min_euclidean": min(r.euclidean for r in recs),
               "min_trace": min(r.trace for r in recs)}
    out.json("summary.json", summary)
    print(json.dumps(summary))
    return out, EXIT_OK


def cmd_correlate(args, seed):
    from .ensemble_stats import resource_correlation
    from .entropy import spectrum_stats
    from .opt_search import default_scope, role_masks, violated_roles

    cfg = _opt_config(args, method="cma_es")
    states, dropped = _ensemble(args, seed, args.count, cfg)
    subs = tuple(args.subsystems.split(","))
    try:
        corr = resource_correlation(states, subs, min_size=args.min_size)
    except (ValueError, KeyError) as exc:
        out = Output(args.out, "correlate", vars(args), seed)
        out.json("summary.json", {"error": str(exc), "dropped_runs": dropped})
        print(f"error: {exc}", file=sys.stderr)
        return out, EXIT_BUDGET if dropped else EXIT_USAGE
    rows = []
    for i, psi in enumerate(states):
        masks = role_masks(violated_roles(psi, default_scope(psi.n_qubits)))
        for s in subs:
            st = spectrum_stats(psi, masks[s])
            rows.append((i, s, masks[s], st.s_vn, st.capacity))
    out = Output(args.out, "correlate", vars(args), seed)
    out.csv("samples.csv", ["state", "subsystem", "mask", "s_vn", "capacity"], rows)
    summary = {"states": len(states), "dropped_runs": dropped,
               "correlations": {s: {"mean_s_vn": c.mean_entropy, "mean_capacity": c.mean_capacity,
                                    "pearson": c.pearson if c.defined else None} for s, c in corr.items()}}
    out.json("summary.json", summary)
    print(json.dumps(summary["correlations"]))
    return out, EXIT_OK


def cmd_hypergraph_verify(args, seed):
    from .entropy import EntropyVector, entropy_vector
    from .hypercone import EDGES, _label, realize_5qubit

    text = _read(args.input)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.input}: {exc}") from None
    if isinstance(obj, dict) and "amplitudes" in obj:
        psi = _load_state(args.input)
        if psi.n_qubits != 5:
            raise UsageError("hypergraph-verify needs a five-qubit state")
        ev = entropy_vector(psi)
    else:
        try:
            ev = EntropyVector.from_mapping(5, obj)
        except (ValueError, TypeError, AttributeError, IndexError) as exc:
            raise UsageError(f"{args.input}: not an entropy-vector map ({exc})") from None
    res = realize_5qubit(ev)
    weights = {_label(e): float(w) for e, w in zip(EDGES, res.weights)}
    summary = {"weights": weights, "residual": res.residual, "all_nonneg": res.all_nonneg,
               "closed_form_deviation": res.closed_form_deviation}
    for k, w in weights.items():
        print(f"{k:6s} {w: .12g}")
    print(f"residual {res.residual:.3g}  nonneg {res.all_nonneg}")
    out = Output(args.out, "hypergraph-verify", vars(args), seed)
    out.json("summary.json", summary)
    return out, EXIT_OK


COMMANDS = {
    "instances": cmd_instances, "violate": cmd_violate, "track": cmd_track, "resources": cmd_resources,
    "optimize": cmd_optimize, "haar-scan": cmd_haar_scan, "stability": cmd_stability,
    "distances": cmd_distances, "correlate": cmd_correlate, "hypergraph-verify": cmd_hypergraph_verify,
}
# commands whose output directory is optional; the rest default to entrocone-out/<name>
_PRINT_ONLY = {"instances", "hypergraph-verify"}


def _opt_flags(p, n=6, method="cma_es", max_evals=100_000, target=None):
    p.add_argument("--n", type=int, default=n, help="number of qubits")
    p.add_argument("--method", choices=["cma_es", "cobyla"], default=method)
    p.add_argument("--max-evals", type=int, default=max_evals)
    p.add_argument("--target-violation", type=float, default=target,
                   help="stop once the gap reaches minus this value")
    p.add_argument("--scope", choices=["full_set", "single_instance"], default="full_set")
    p.add_argument("--sigma0", type=float, default=None, help="CMA-ES initial step size")
    p.add_argument("--rho-beg", type=float, default=None, help="COBYLA initial trust radius")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="entrocone", description="Entropy-cone violation experiments on small qubit systems.")
    top.add_argument("--version", action="version", version=f"entrocone {__version__}")
    sub = top.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--seed", type=int, default=None, help=f"master seed (falls back to ${SEED_ENV}, then 0)")
        p.add_argument("--out", default=None if name in _PRINT_ONLY else f"entrocone-out/{name}",
                       help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="worker processes; results do not depend on it")
        return p

    p = add("instances", "count (and optionally dump) Ingleton instances on n qubits")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--no-purity", action="store_true", help="treat the state as mixed: no complement folding")
    p.add_argument("--dump", default=None, help="write the instances as JSON to this file")

    p = add("violate", "Q-learning search for a circuit that violates a target inequality")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--gates", default="H,CNOT")
    p.add_argument("--target", default="mmi", help="mmi, ingleton, ingleton-all, sa, ssa or JSON {lhs, rhs}")
    p.add_argument("--parties", default=None, help="party qubits, e.g. 2,3,4,5 or 0+1,2 (default: one per qubit)")
    p.add_argument("--initial", default=None, help="initial state JSON (default |0...0>)")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--max-steps", type=int, default=200)
    p.add_argument("--max-episodes", type=int, default=5000)
    p.add_argument("--min-successes", type=int, default=1)
    p.add_argument("--no-shaping", action="store_true", help="reward is the bare inequality difference")

    for name, help_ in (("track", "per-gate gap and resource trajectory of a circuit"),
                        ("resources", "per-gate (or per-iterate) entropy, capacity, non-flatness and witness")):
        p = add(name, help_)
        p.add_argument("--circuit", required=name == "track", default=None, help="circuit text file")
        p.add_argument("--initial", default=None, help="initial state JSON (default |0...0>)")
        p.add_argument("--subsystems", default=None, help="comma-separated qubit bitmasks")
        if name == "track":
            p.add_argument("--n", type=int, default=None, help="qubit count when no initial state is given")
            p.add_argument("--parties", default=None)
            p.add_argument("--target", default="ingleton")
            p.add_argument("--threshold", type=float, default=1e-6)
        else:
            _opt_flags(p)

    p = add("optimize", "restart campaign minimising the Ingleton gap over pure states")
    _opt_flags(p)
    p.add_argument("--restarts", type=int, default=20)

    p = add("haar-scan", "Ingleton gap distribution of Haar-random states")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--policy", choices=["canonical", "min6", "min3"], default="canonical")
    p.add_argument("--sampler", choices=["gaussian", "qr"], default="gaussian")
    p.add_argument("--allow-small", action="store_true", help=argparse.SUPPRESS)

    p = add("stability", "stability radius of a converged violator")
    _opt_flags(p)
    p.add_argument("--state", default=None, help="violator state JSON (default: optimise one first)")
    p.add_argument("--deltas", default=DEFAULT_DELTAS)
    p.add_argument("--trials", type=int, default=4)
    p.add_argument("--stop-after", type=int, default=None,
                   help="stop after this many consecutive sizes below the fidelity bar")
    p.add_argument("--max-evals-reopt", type=int, default=None, help="budget per re-minimisation")

    p = add("distances", "Euclidean and trace distances between independent violators")
    _opt_flags(p)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--from-states", default=None, help="states.json from optimize; consecutive entries are paired")

    p = add("correlate", "entropy/capacity correlation over a violator ensemble")
    _opt_flags(p, target=0.165)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--subsystems", default="A,B,CD", help="Ingleton role subsystems")
    p.add_argument("--min-size", type=int, default=30)
    p.add_argument("--from-states", default=None)

    p = add("hypergraph-verify", "hypergraph weights realising a five-qubit entropy vector")
    p.add_argument("--input", required=True, help="state JSON or entropy-vector JSON {mask: value}")

    p = sub.add_parser("replay", help="re-run the experiment recorded in a config.json")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    return top


def _run(command: str, args: argparse.Namespace) -> int:
    seed = _resolve_seed(getattr(args, "seed", None))
    args.seed = seed
    if getattr(args, "jobs", 1) < 1:
        raise UsageError("--jobs must be positive")
    out, code = COMMANDS[command](args, seed)
    out.close(code)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "replay":
            cfg = json.loads(_read(args.config))
            command, saved = cfg["subcommand"], dict(cfg["args"])
            if command not in COMMANDS:
                raise UsageError(f"unknown subcommand {command!r} in {args.config}")
            saved.update(out=args.out, command=command)
            return _run(command, argparse.Namespace(**saved))
        return _run(args.command, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (KeyError, json.JSONDecodeError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
