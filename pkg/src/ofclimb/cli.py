"""Command line front end.

Four subcommands: ``generate`` runs a chosen procedure and writes the
resulting factorizations (plus an optional per-run CSV), ``verify`` checks
coloring files and reports phi/psi, ``classes`` prints or rebuilds the
OF(8) class table and classifies files against it, and ``experiment``
drives the canned studies (step scaling, class distribution, union
spectra, perturbation restarts, small-chain stationarity).

Exit codes: 0 success, 1 usage error, 2 verification or generation
failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from ._backend import BACKEND
from ._rng import stream
from .core import Coloring, FormatError, read_coloring
from .walks import WalkMode, WalkStatus, run_walk
from .flips import strict_algorithm, weak_algorithm
from .sampling import exact_stationary, restart_experiment, run_metropolis
from .heuristics import HeuristicStatus, ds_run, four_switch_run, latin_strict_walk
from .analysis import (classify_of8, generate_of8_table, is_ramanujan, girth,
                       load_of8_table, moore_bound, spectrum, union_graph)

ALGORITHMS = ("mild", "strict", "weak", "metropolis", "ds", "four-switch", "latin")
EXPERIMENTS = ("convergence-scaling", "of8-distribution", "spectra",
               "restart", "epsilon-scan")

_WALK_STATUS = {WalkStatus.REACHED_OF: "of",
                WalkStatus.STUCK_LOCAL_OPT: "stuck",
                WalkStatus.STEP_LIMIT: "limit"}
_HEUR_STATUS = {HeuristicStatus.REACHED_OF: "of",
                HeuristicStatus.STEP_LIMIT: "limit",
                HeuristicStatus.STUCK: "stuck",
                HeuristicStatus.NO_MOVE: "no-move"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract here reserves 2 for
    # verification failures, so route usage problems through exit 1
    def error(self, message):
        raise _UsageError(message)


def _default_steps(algorithm: str, n: int) -> int:
    if algorithm in ("ds", "four-switch", "latin"):
        return 100 * n ** 3
    return 400 * n * n * max(4, n.bit_length())


def _run_algorithm(algorithm: str, n: int, rng, max_steps, epsilon,
                   record_trace: bool = False) -> dict:
    """One run of any generation procedure, normalized to a common record."""
    if max_steps is None:
        max_steps = _default_steps(algorithm, n)
    out = {"algorithm": algorithm, "coloring": None, "trace": None}
    if algorithm == "mild":
        start = Coloring.uniform_random(n, rng)
        res = run_walk(start, WalkMode.MILD, max_steps, rng, record_trace)
        out.update(status=_WALK_STATUS[res.status], steps=res.steps,
                   final_psi=res.terminal.psi, coloring=res.terminal,
                   trace=res.trace)
    elif algorithm in ("strict", "weak"):
        start = Coloring.uniform_random(n, rng)
        climb = strict_algorithm if algorithm == "strict" else weak_algorithm
        res = climb(start, rng, record_trace)
        s = res.stats
        out.update(status="of", steps=s.steps, final_psi=res.coloring.psi,
                   coloring=res.coloring, trace=res.trace,
                   walk_steps=s.walk_steps, flips=s.flips_executed,
                   escapes_case_a=s.escapes_case_a,
                   escapes_case_b=s.escapes_case_b,
                   zero_phi_steps=s.zero_phi_steps,
                   max_psi_excess=s.max_psi_excess)
    elif algorithm == "metropolis":
        start = Coloring.uniform_random(n, rng)
        res = run_metropolis(start, epsilon, max_steps, rng,
                             stop_at_of=True, record_trace=record_trace)
        psi = res.terminal.psi
        out.update(status="of" if psi == 0 else "limit", steps=res.steps,
                   final_psi=psi, coloring=res.terminal, trace=res.trace,
                   accepts=res.accepts, of_steps=res.of_steps)
    elif algorithm == "ds":
        res = ds_run(n, max_steps, rng)
        done = res.status is HeuristicStatus.REACHED_OF
        out.update(status=_HEUR_STATUS[res.status], steps=res.steps,
                   final_psi=res.state.psi,
                   coloring=res.state.to_coloring() if done else None)
    elif algorithm == "four-switch":
        res = four_switch_run(n, max_steps, rng)
        done = res.status is HeuristicStatus.REACHED_OF
        out.update(status=_HEUR_STATUS[res.status], steps=res.steps,
                   final_psi=res.state.psi,
                   coloring=res.state.to_coloring() if done else None)
    elif algorithm == "latin":
        # searches the row-permutation space; success yields a Latin
        # square, not an edge coloring, so no coloring text is produced
        res = latin_strict_walk(n, max_steps, rng)
        out.update(status=_HEUR_STATUS[res.status], steps=res.steps,
                   final_psi=res.state.psi)
    else:
        raise _UsageError(f"unknown algorithm {algorithm!r}")
    return out


# ---------------------------------------------------------------------------
# output helpers

def _jsonify(value):
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, np.floating):
        return _jsonify(float(value))
    return value


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if value is None:
        return ""
    return str(value)


def _emit_rows(fields, rows, fmt: str, output):
    if fmt == "csv":
        writer = csv.writer(output)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_format_cell(row.get(f)) for f in fields])
    elif fmt == "json":
        payload = {"fields": list(fields),
                   "rows": [{f: _jsonify(r.get(f)) for f in fields}
                            for r in rows]}
        output.write(json.dumps(payload, indent=1) + "\n")
    else:
        cells = [[_format_cell(r.get(f)) for f in fields] for r in rows]
        widths = [max(len(f), *(len(c[i]) for c in cells)) if cells else len(f)
                  for i, f in enumerate(fields)]
        output.write("  ".join(f.ljust(w) for f, w in zip(fields, widths)).rstrip() + "\n")
        for row in cells:
            output.write("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() + "\n")


def _open_output(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_rows(fields, rows, fmt, path):
    handle, owned = _open_output(path)
    try:
        _emit_rows(fields, rows, fmt, handle)
    finally:
        if owned:
            handle.close()


# ---------------------------------------------------------------------------
# generate

_STATS_FIELDS = ("n", "algorithm", "seed", "run", "status", "steps",
                 "final_psi", "walk_steps", "flips", "escapes_case_a",
                 "escapes_case_b", "zero_phi_steps", "max_psi_excess",
                 "accepts", "of_steps")


def _cmd_generate(args) -> int:
    if args.runs < 1:
        raise _UsageError("--runs must be positive")
    if args.trace and args.runs != 1:
        raise _UsageError("--trace needs --runs 1")
    texts = []
    rows = []
    failures = 0
    for run in range(args.runs):
        rng = stream(args.seed, run)
        res = _run_algorithm(args.algorithm, args.n, rng, args.max_steps,
                             args.epsilon, record_trace=bool(args.trace))
        row = {f: res.get(f) for f in _STATS_FIELDS}
        row.update(n=args.n, seed=args.seed, run=run,
                   algorithm=args.algorithm)
        rows.append(row)
        if res["status"] != "of":
            failures += 1
            print(f"run {run}: {res['status']} after {res['steps']} steps, "
                  f"psi={res['final_psi']}", file=sys.stderr)
        elif res["coloring"] is not None:
            texts.append(res["coloring"].to_text())
        if args.trace and res["trace"] is not None:
            with open(args.trace, "w", encoding="utf-8") as fh:
                for entry in res["trace"]:
                    fh.write(json.dumps({
                        "step": entry.step, "psi": entry.psi,
                        "move": _jsonify(entry.move)}) + "\n")
    if texts:
        handle, owned = _open_output(args.output)
        try:
            handle.write("\n".join(texts))
        finally:
            if owned:
                handle.close()
    if args.stats:
        _write_rows(_STATS_FIELDS, rows, "csv", args.stats)
    return 2 if failures else 0


# ---------------------------------------------------------------------------
# verify / classes

def _read_source(name: str) -> Coloring:
    if name == "-":
        return Coloring.from_text(sys.stdin.read())
    return read_coloring(name)


def _cmd_verify(args) -> int:
    files = args.files or ["-"]
    bad = 0
    for name in files:
        try:
            coloring = _read_source(name)
        except FormatError as err:
            print(f"{name}:{err.line}:{err.column}: {err}", file=sys.stderr)
            bad += 1
            continue
        is_of = coloring.psi == 0
        label = ""
        if args.classify and is_of and coloring.n == 8:
            label = f" class={classify_of8(coloring)}"
        verdict = "one-factorization" if is_of else "not a one-factorization"
        print(f"{name}: n={coloring.n} phi={coloring.phi} "
              f"psi={coloring.psi} {verdict}{label}")
        if not is_of:
            bad += 1
    return 2 if bad else 0


def _cmd_classes(args) -> int:
    if args.regenerate:
        path = args.output or "of8_classes.json"
        table = generate_of8_table(path)
        print(f"wrote {path}")
    else:
        table = load_of8_table()
    if not args.files:
        fields = ("label", "size", "automorphism_order", "pair_cycle_types")
        rows = []
        for cls in table.classes:
            kinds = sorted({t for t in cls.fingerprint})
            rows.append({"label": cls.label, "size": cls.size,
                         "automorphism_order": cls.automorphism_order,
                         "pair_cycle_types": " ".join(
                             "+".join(map(str, t)) for t in kinds)})
        _emit_rows(fields, rows, "text", sys.stdout)
        return 0
    bad = 0
    for name in args.files:
        try:
            coloring = _read_source(name)
            print(f"{name}: class={table.classify(coloring)}")
        except (FormatError, ValueError) as err:
            print(f"{name}: {err}", file=sys.stderr)
            bad += 1
    return 2 if bad else 0


# ---------------------------------------------------------------------------
# experiments

def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise _UsageError(f"{flag} expects comma-separated integers")
    if not values:
        raise _UsageError(f"{flag} is empty")
    return values


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise _UsageError(f"{flag} expects comma-separated numbers")
    if not values:
        raise _UsageError(f"{flag} is empty")
    return values


def _exp_convergence(args):
    n_list = _parse_int_list(args.n_list, "--n-list") if args.n_list else [8, 16, 32]
    fields = ("n", "algorithm", "runs", "failures", "mean_steps",
              "median_steps", "max_steps", "n2_log_n", "mean_ratio")
    rows = []
    for idx, n in enumerate(n_list):
        steps = []
        failures = 0
        for run in range(args.runs):
            rng = stream(args.seed, idx * args.runs + run)
            res = _run_algorithm(args.algorithm, n, rng, args.max_steps,
                                 args.epsilon)
            if res["status"] == "of":
                steps.append(res["steps"])
            else:
                failures += 1
        scale = n * n * math.log(n)
        done = np.array(steps, dtype=float)
        rows.append({
            "n": n, "algorithm": args.algorithm, "runs": args.runs,
            "failures": failures,
            "mean_steps": float(done.mean()) if steps else None,
            "median_steps": float(np.median(done)) if steps else None,
            "max_steps": int(done.max()) if steps else None,
            "n2_log_n": scale,
            "mean_ratio": float(done.mean()) / scale if steps else None,
        })
    return fields, rows


def _exp_of8(args):
    counts: dict[str, int] = {}
    failures = 0
    for run in range(args.samples):
        rng = stream(args.seed, run)
        res = _run_algorithm(args.algorithm, 8, rng, args.max_steps,
                             args.epsilon)
        if res["status"] == "of" and res["coloring"] is not None:
            label = classify_of8(res["coloring"])
            counts[label] = counts.get(label, 0) + 1
        else:
            failures += 1
    if failures:
        print(f"{failures} of {args.samples} runs did not finish",
              file=sys.stderr)
    done = max(args.samples - failures, 1)
    table = load_of8_table()
    total = sum(c.size for c in table.classes)
    fields = ("label", "class_size", "expected_frac", "observed",
              "observed_frac", "ratio")
    rows = []
    for cls in sorted(table.classes, key=lambda c: c.label):
        expected = cls.size / total
        seen = counts.get(cls.label, 0)
        frac = seen / done
        rows.append({"label": cls.label, "class_size": cls.size,
                     "expected_frac": expected, "observed": seen,
                     "observed_frac": frac, "ratio": frac / expected})
    return fields, rows


def _exp_spectra(args):
    n = args.n or 50
    d = args.degree
    if d < 2 or d > n - 1:
        raise _UsageError("--degree must lie in 2..n-1")
    fields = ("sample", "n", "degree", "lambda1", "lambda2", "lambda_min",
              "ramanujan", "girth", "moore_bound")
    rows = []
    bound = moore_bound(n, d)
    for run in range(args.samples):
        rng = stream(args.seed, run)
        res = strict_algorithm(Coloring.uniform_random(n, rng), rng)
        chosen = rng.choice(n - 1, size=d, replace=False) + 1
        graph = union_graph(res.coloring, chosen)
        eig = spectrum(graph)
        rows.append({"sample": run, "n": n, "degree": d,
                     "lambda1": float(eig[0]), "lambda2": float(eig[1]),
                     "lambda_min": float(eig[-1]),
                     "ramanujan": is_ramanujan(graph),
                     "girth": girth(graph), "moore_bound": bound})
    return fields, rows


def _exp_restart(args):
    n = args.n or 8
    rng = stream(args.seed, 0)
    res = restart_experiment(n, args.p, args.runs, rng,
                             max_steps=args.max_steps)
    fields = ("n", "p", "trials", "failures", "frac_same_of",
              "frac_same_class")
    rows = [{"n": res.n, "p": res.p, "trials": res.trials,
             "failures": res.failures, "frac_same_of": res.frac_same_of,
             "frac_same_class": res.frac_same_class}]
    return fields, rows


def _exp_epsilon(args):
    eps_list = (_parse_float_list(args.epsilon_list, "--epsilon-list")
                if args.epsilon_list else [0.1, 0.3, 0.5, 0.7, 0.9])
    fields = ("epsilon", "detailed_balance_residual", "closed_form_gap",
              "of_mass")
    rows = []
    for eps in eps_list:
        res = exact_stationary(eps)
        of_mass = float(res.pi[res.psi == 0].sum())
        rows.append({"epsilon": eps,
                     "detailed_balance_residual": res.detailed_balance_residual,
                     "closed_form_gap": res.closed_form_gap,
                     "of_mass": of_mass})
    return fields, rows


_EXPERIMENT_FUNCS = {
    "convergence-scaling": _exp_convergence,
    "of8-distribution": _exp_of8,
    "spectra": _exp_spectra,
    "restart": _exp_restart,
    "epsilon-scan": _exp_epsilon,
}


def _cmd_experiment(args) -> int:
    fields, rows = _EXPERIMENT_FUNCS[args.experiment](args)
    _write_rows(fields, rows, args.format, args.output)
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ofclimb",
                     description="Generate and analyze one-factorizations "
                                 "of complete graphs by local search.")
    parser.add_argument("--version", action="version",
                        version=f"ofclimb {__version__} ({BACKEND} backend)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="run a generation procedure")
    gen.add_argument("--n", type=int, required=True,
                     help="number of vertices (even)")
    gen.add_argument("--algorithm", choices=ALGORITHMS, default="mild")
    gen.add_argument("--runs", type=int, default=1)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--max-steps", type=int, default=None,
                     help="step cap (default scales with n)")
    gen.add_argument("--epsilon", type=float, default=0.3,
                     help="acceptance base for metropolis")
    gen.add_argument("--output", default=None,
                     help="file for the coloring text ('-' = stdout)")
    gen.add_argument("--stats", default=None, help="per-run CSV path")
    gen.add_argument("--trace", default=None,
                     help="JSON-lines move trace path (single run only)")
    gen.set_defaults(func=_cmd_generate)

    ver = sub.add_parser("verify", help="check coloring files")
    ver.add_argument("files", nargs="*", help="paths ('-' = stdin)")
    ver.add_argument("--classify", action="store_true",
                     help="also print the OF(8) class")
    ver.set_defaults(func=_cmd_verify)

    cls = sub.add_parser("classes", help="OF(8) class table")
    cls.add_argument("files", nargs="*",
                     help="coloring files to classify")
    cls.add_argument("--regenerate", action="store_true",
                     help="rebuild the table from a fresh enumeration")
    cls.add_argument("--output", default=None,
                     help="where --regenerate writes its JSON")
    cls.set_defaults(func=_cmd_classes)

    exp = sub.add_parser("experiment", help="run a canned study")
    exp.add_argument("--experiment", choices=EXPERIMENTS, required=True)
    exp.add_argument("--seed", type=int, required=True)
    exp.add_argument("--algorithm", choices=ALGORITHMS, default="mild")
    exp.add_argument("--n", type=int, default=None)
    exp.add_argument("--n-list", default=None,
                     help="orders for convergence-scaling, e.g. 8,16,32")
    exp.add_argument("--runs", type=int, default=20)
    exp.add_argument("--samples", type=int, default=200)
    exp.add_argument("--max-steps", type=int, default=None)
    exp.add_argument("--epsilon", type=float, default=0.5)
    exp.add_argument("--epsilon-list", default=None)
    exp.add_argument("--p", type=float, default=0.1,
                     help="perturbation rate for restart")
    exp.add_argument("--degree", type=int, default=5,
                     help="classes per union for spectra")
    exp.add_argument("--format", choices=("csv", "json", "text"),
                     default="text")
    exp.add_argument("--output", default=None)
    exp.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as err:
        print(f"ofclimb: {err}", file=sys.stderr)
        return 1
    except FormatError as err:
        print(f"ofclimb: line {err.line} column {err.column}: {err}",
              file=sys.stderr)
        return 2
    except OSError as err:
        print(f"ofclimb: {err}", file=sys.stderr)
        return 3
    except ValueError as err:
        print(f"ofclimb: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
