import csv
import json

import pytest

from multirb.benchgen import BenchmarkConfig, generate_benchmark, read_sequences, write_sequences
from multirb.cli import main
from multirb.sim import read_results


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def generated(tmp_path, capsys):
    seqs = tmp_path / "seqs.jsonl"
    code, _, _ = run(capsys, "gen", "--n", 2, "--lengths", "1,2,3,4", "--sequences-per-length", 6,
                     "--interleave", "G", "--seed", 11, "--out", seqs)
    assert code == 0
    return tmp_path, seqs


def test_gen_writes_twins_and_manifest(generated):
    tmp, seqs = generated
    base = read_sequences(seqs)
    twins = read_sequences(tmp / "seqs.interleaved.jsonl")
    assert len(base) == len(twins) == 24
    manifest = json.loads((tmp / "seqs.manifest.json").read_text())
    assert manifest["seed"] == 11 and manifest["command"] == "gen"
    cfg = BenchmarkConfig.from_dict(manifest["config"])
    again, _ = generate_benchmark(cfg)
    write_sequences(tmp / "again.jsonl", again)
    assert (tmp / "again.jsonl").read_bytes() == seqs.read_bytes()


def test_gen_is_seed_deterministic(tmp_path, capsys):
    paths = []
    for name, seed in (("a", 3), ("b", 3), ("c", 4)):
        p = tmp_path / f"{name}.jsonl"
        run(capsys, "gen", "--lengths", "1,2", "--sequences-per-length", 3, "--seed", seed, "--out", p)
        paths.append(p.read_bytes())
    assert paths[0] == paths[1] != paths[2]


def test_predict_validate(generated, capsys):
    _, seqs = generated
    code, out, _ = run(capsys, "predict", "--sequences", seqs, "--validate")
    assert code == 0
    lines = [json.loads(line) for line in out.splitlines()]
    stored = [json.loads(line)["predict"] for line in seqs.read_text().splitlines()]
    assert len(lines) == 24 and [rec["predict"] for rec in lines] == stored


def test_predict_detects_tampering(generated, capsys):
    tmp, seqs = generated
    recs = [json.loads(line) for line in seqs.read_text().splitlines()]
    recs[0]["predict"] = "".join("1" if c == "0" else "0" for c in recs[0]["predict"])
    bad = tmp / "bad.jsonl"
    bad.write_text("".join(json.dumps(r) + "\n" for r in recs))
    code, _, err = run(capsys, "predict", "--sequences", bad, "--validate")
    assert code == 1
    assert json.loads(err)["error"] == "ContractError"


def test_simulate_then_fit(generated, capsys):
    tmp, seqs = generated
    results = tmp / "results.csv"
    code, _, _ = run(capsys, "simulate", "--sequences", seqs, "--interleaved", tmp / "seqs.interleaved.jsonl",
                     "--runs", 50, "--eps-g", 0.1, "--eps-m", 0.05, "--eps-G", 0.05, "--seed", 2, "--out", results)
    assert code == 0
    recs = read_results(results)
    assert len(recs) == 48 and all(r.runs == 50 for r in recs)
    report, plot = tmp / "report.json", tmp / "plot.csv"
    code, _, _ = run(capsys, "fit", "--results", results, "--sequences", seqs, "--B", 100, "--out", report,
                     "--plot", plot)
    assert code == 0
    rep = json.loads(report.read_text())
    assert 0 < rep["eps_g"] < 0.3 and rep["eps_G"] is not None
    rows = list(csv.DictReader(plot.open()))
    assert len(rows) == 8 and set(rows[0]) == {"set", "length", "mean", "sem", "fitted"}
    code, out, _ = run(capsys, "bootstrap", "--results", results, "--n", 2, "--B", 100)
    boot = json.loads(out)
    assert code == 0 and boot["B"] == 100 and "interleaved" in boot


def test_simulate_with_noise_file(generated, capsys):
    tmp, seqs = generated
    noise = tmp / "noise.json"
    noise.write_text(json.dumps({"step_depol": 0.0, "readout_flip": 0.0}))
    out = tmp / "r.csv"
    assert run(capsys, "simulate", "--sequences", seqs, "--noise", noise, "--out", out)[0] == 0
    assert all(r.successes == r.runs for r in read_results(out))


def test_fit_needs_qubit_count(tmp_path, capsys):
    results = tmp_path / "r.csv"
    results.write_text("set,length,seq_id,runs,successes\nbase,1,0,10,10\n")
    code, _, err = run(capsys, "fit", "--results", results)
    assert code == 1 and json.loads(err)["error"] == "ContractError"


def test_table2q(capsys):
    code, out, _ = run(capsys, "table2q")
    lines = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(lines) == 720
    assert sum(r["g_count"] for r in lines) / 720 == 1.5
    code, out, _ = run(capsys, "table2q", "--metric", "CNOT")
    assert "cnot_count" in json.loads(out.splitlines()[0])


def test_cost(capsys):
    code, out, _ = run(capsys, "cost", "--n", 2)
    rec = json.loads(out)
    assert code == 0 and rec["value"] == 1.5 and rec["histogram"]["3"] == 36
    code, _, err = run(capsys, "cost", "--n", 4)
    assert code == 1 and json.loads(err)["error"] == "CapacityError"


def test_synth(capsys):
    code, out, _ = run(capsys, "synth", "0101,0111,1100,1000")
    rec = json.loads(out)
    assert code == 0 and sum(g["g"] == "G" for g in rec["circuit"]) == 2
    code, _, err = run(capsys, "synth", "11,11")
    assert code == 1 and "error" in json.loads(err)


def test_malformed_sequence_file_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("\n{oops\n")
    code, _, err = run(capsys, "predict", "--sequences", bad)
    rec = json.loads(err)
    assert code == 1 and rec["error"] == "SequenceFormatError" and rec["line"] == 2


def test_report_zero_noise(tmp_path, capsys):
    out = tmp_path / "rep"
    code, stdout, _ = run(capsys, "report", "--sequences-per-length", 10, "--runs", 20, "--B", 100,
                          "--interleave", "G", "--seed", 5, "--outdir", out)
    assert code == 0
    summary = json.loads(stdout)
    assert summary["eps_g"] < 1e-4
    for name in ("sequences.jsonl", "sequences.interleaved.jsonl", "results.csv", "report.json", "plot.csv",
                 "manifest.json"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["B"] == 100 and manifest["seed"] == 5


def test_report_reproducible(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        run(capsys, "report", "--lengths", "1,2,3", "--sequences-per-length", 5, "--runs", 30, "--B", 100,
            "--eps-g", 0.1, "--eps-m", 0.05, "--seed", 9, "--outdir", d)
        outs.append(d)
    for name in ("sequences.jsonl", "results.csv", "report.json", "plot.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
