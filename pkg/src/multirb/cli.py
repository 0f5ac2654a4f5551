"""Command-line entry point ``multirb``.

Every random choice flows from ``--seed``.  Failures exit with status 1 and
print a JSON object with ``error``, ``message`` and (for file errors) ``line``
to stderr.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import aggregate, bootstrap, build_report, fit_decay
from .benchgen import (
    BenchmarkConfig,
    FinalStrategy,
    generate_benchmark,
    predict_outcome,
    read_sequences,
    write_sequences,
)
from .circuit import GateCircuit, cnot, g_gate, idle
from .sim import NoiseModel, read_results, run_benchmark, simulate_sequences, write_results
from .symplectic import BinarySymplectic
from .synth import avg_two_qubit_cost, build_table_2q, cost_histogram, synthesize


class ContractError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _gate_spec(text: str | None, n: int) -> GateCircuit | None:
    """``G`` / ``CNOT`` on qubits 0 and 1, ``ID``, or a JSON list of gate records."""
    if text is None:
        return None
    if text == "G":
        return GateCircuit(n, (g_gate(0, 1),))
    if text == "CNOT":
        return GateCircuit(n, (cnot(0, 1),))
    if text == "ID":
        return GateCircuit(n, (idle(0),))
    return GateCircuit.from_records(n, json.loads(text))


def _noise(args) -> NoiseModel:
    if getattr(args, "noise", None):
        p = Path(args.noise)
        text = p.read_text() if p.exists() else args.noise
        return NoiseModel.from_dict(json.loads(text))
    return NoiseModel(step_depol=args.eps_g, prep_meas_error=args.eps_m, interleaved_gate_depol=args.eps_G)


def _config(args) -> BenchmarkConfig:
    seqs = args.sequences_per_length
    if len(seqs) == 1:
        seqs = seqs * len(args.lengths)
    strategy = FinalStrategy(args.strategy)
    return BenchmarkConfig(
        n_qubits=args.n,
        lengths=tuple(args.lengths),
        sequences_per_length=tuple(seqs),
        runs_per_sequence=args.runs,
        interleaved_gate=_gate_spec(args.interleave, args.n),
        final_strategy=strategy,
        master_seed=args.seed,
        two_qubit_gate=args.two_qubit_gate,
    )


def _write_manifest(path: Path, command: str, config: dict, seed: int, files: dict, extra: dict | None = None):
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config": config,
        "files": {k: str(v) for k, v in files.items()},
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args):
    config = _config(args)
    base, twins = generate_benchmark(config, args.jobs)
    out = Path(args.out)
    write_sequences(out, base)
    files = {"sequences": out}
    if twins is not None:
        inter = Path(args.out_interleaved or out.with_name(out.stem + ".interleaved.jsonl"))
        write_sequences(inter, twins)
        files["interleaved"] = inter
    _write_manifest(Path(args.manifest or out.with_name(out.stem + ".manifest.json")), "gen",
                    config.to_dict(), args.seed, files)


def cmd_simulate(args):
    noise = _noise(args)
    records = []
    for set_name, path in (("base", args.sequences), ("interleaved", args.interleaved)):
        if path is None:
            continue
        seqs = read_sequences(path)
        records += simulate_sequences(seqs, noise, args.runs, args.seed, set_name, args.engine, args.jobs)
    write_results(args.out, records)


def cmd_predict(args):
    seqs = read_sequences(args.sequences)
    lines = []
    for s in seqs:
        pred = predict_outcome(s)
        if args.validate and pred != s.predicted:
            raise ContractError(f"sequence {s.id}: stored prediction {s.predicted.to_record()} "
                                f"differs from recomputed {pred.to_record()}")
        lines.append(json.dumps({"id": s.id, "predict": pred.to_record()}) + "\n")
    _emit("".join(lines), args.out)


def _n_from(args) -> int:
    if args.n is not None:
        return args.n
    if args.sequences:
        seqs = read_sequences(args.sequences)
        ns = {s.n_qubits for s in seqs}
        if len(ns) != 1:
            raise ContractError(f"sequence file mixes qubit counts {sorted(ns)}")
        return ns.pop()
    raise ContractError("give --n or --sequences to fix the qubit count")


def _plot_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["set", "length", "mean", "sem", "fitted"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def cmd_fit(args):
    records = read_results(args.results)
    report, rows = build_report(records, _n_from(args), B=args.B, rng=np.random.default_rng(args.seed))
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    if args.plot:
        _plot_csv(args.plot, rows)


def cmd_bootstrap(args):
    records = read_results(args.results)
    n = _n_from(args)
    rng = np.random.default_rng(args.seed)
    out = {"B": args.B, "seed": args.seed}
    for set_name in ("base", "interleaved"):
        recs = [r for r in records if r.set == set_name]
        if not recs:
            continue
        fit = fit_decay(aggregate(recs), n)
        boot = bootstrap(recs, n, args.B, rng)
        out[set_name] = {"eps_g": fit.eps_g, "se_eps_g": boot.se_eps_g, "eps_m": fit.eps_m,
                         "se_eps_m": boot.se_eps_m, "failures": boot.failures}
    _emit(json.dumps(out, indent=2) + "\n", args.out)


def cmd_table2q(args):
    _emit(build_table_2q(args.metric).to_jsonl(), args.out)


def cmd_cost(args):
    c = avg_two_qubit_cost(args.n, args.metric)
    hist = cost_histogram(args.n, args.metric)
    out = {"n": args.n, "metric": args.metric, "numerator": c.numerator, "denominator": c.denominator,
           "value": float(c), "histogram": {str(k): v for k, v in hist.items()}}
    _emit(json.dumps(out) + "\n", args.out)


def cmd_synth(args):
    rows = [r.strip() for r in args.matrix.replace(";", ",").split(",") if r.strip()]
    m = BinarySymplectic.from_strings(rows)
    circ = synthesize(m, args.gate)
    _emit(json.dumps({"class": m.to_strings(), "circuit": circ.to_records()}) + "\n", args.out)


def cmd_report(args):
    config = _config(args)
    noise = _noise(args)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    result = run_benchmark(config, noise, args.engine, args.jobs)
    files = {"sequences": outdir / "sequences.jsonl", "results": outdir / "results.csv",
             "report": outdir / "report.json", "plot": outdir / "plot.csv"}
    write_sequences(files["sequences"], result.base_sequences)
    if result.interleaved_sequences is not None:
        files["interleaved"] = outdir / "sequences.interleaved.jsonl"
        write_sequences(files["interleaved"], result.interleaved_sequences)
    write_results(files["results"], result.records)
    boot_rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(2,)))
    report, rows = build_report(result.records, config.n_qubits, B=args.B, rng=boot_rng)
    files["report"].write_text(json.dumps(report, indent=2) + "\n")
    _plot_csv(files["plot"], rows)
    _write_manifest(outdir / "manifest.json", "report", config.to_dict(), args.seed, files,
                    {"noise": noise.to_dict(), "engine": args.engine, "B": args.B})
    sys.stdout.write(json.dumps({k: report[k] for k in ("eps_g", "se_eps_g", "eps_m", "se_eps_m",
                                                         "eps_G", "se_eps_G", "chi2", "dof", "p")}) + "\n")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def _add_config(p):
    p.add_argument("--n", type=int, default=2, help="number of qubits")
    p.add_argument("--lengths", type=_int_list, default=[1, 2, 3, 4, 5, 6])
    p.add_argument("--sequences-per-length", type=_int_list, default=[50],
                   help="one count, or one per length")
    p.add_argument("--runs", type=int, default=100, help="runs per sequence")
    p.add_argument("--interleave", default=None, help="G, CNOT, ID or a JSON list of gate records")
    p.add_argument("--strategy", default="FULL_INVERSE", choices=[s.value for s in FinalStrategy])
    p.add_argument("--two-qubit-gate", default="G", choices=["G", "CNOT"])


def _add_noise(p):
    p.add_argument("--noise", default=None, help="noise model as a JSON file or inline JSON")
    p.add_argument("--eps-g", type=float, default=0.0, help="error per step")
    p.add_argument("--eps-m", type=float, default=0.0, help="preparation and measurement error")
    p.add_argument("--eps-G", type=float, default=None, help="error per interleaved gate")
    p.add_argument("--engine", default="stabilizer", choices=["stabilizer", "dense"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multirb", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate benchmark sequences")
    _add_common(p)
    _add_config(p)
    p.add_argument("--out", required=True)
    p.add_argument("--out-interleaved", default=None)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simulate", help="simulate sequence files into a results CSV")
    _add_common(p)
    _add_noise(p)
    p.add_argument("--sequences", required=True)
    p.add_argument("--interleaved", default=None)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("predict", help="print (and optionally validate) predicted outcomes")
    p.add_argument("--sequences", required=True)
    p.add_argument("--validate", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    for name, func, helptext in (("fit", cmd_fit, "fit a results CSV and write a report"),
                                 ("bootstrap", cmd_bootstrap, "bootstrap standard errors")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        p.add_argument("--results", required=True)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--sequences", default=None, help="sequence file used to infer the qubit count")
        p.add_argument("--B", type=int, default=1000, help="bootstrap resamples")
        p.add_argument("--out", default=None)
        if name == "fit":
            p.add_argument("--plot", default=None, help="CSV of length, mean, sem, fitted")
        p.set_defaults(func=func)

    p = sub.add_parser("table2q", help="minimal two-qubit synthesis table as JSON lines")
    p.add_argument("--metric", default="G", choices=["G", "CNOT"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_table2q)

    p = sub.add_parser("cost", help="exact average two-qubit-gate count C(n)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--metric", default="CNOT", choices=["G", "CNOT"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("synth", help="circuit for a symplectic matrix")
    p.add_argument("matrix", help="row bit strings separated by commas, e.g. 0101,0111,1100,1000")
    p.add_argument("--gate", default="G", choices=["G", "CNOT"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", help="generate, simulate and fit in one go")
    _add_common(p)
    _add_config(p)
    _add_noise(p)
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # reported as machine-readable JSON
        err = {"error": type(exc).__name__, "message": str(exc)}
        line = getattr(exc, "line", None)
        if line is not None:
            err["line"] = line
        sys.stderr.write(json.dumps(err) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
