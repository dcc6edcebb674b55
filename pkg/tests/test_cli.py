import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from helpers import synth_clip

from rnnfuzz.audio import save_wav
from rnnfuzz.cli import main
from rnnfuzz.traces import load_traces

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """End-to-end CLI workspace: corpora, traces, model."""
    root = tmp_path_factory.mktemp("cli")
    train = root / "train"
    seeds = root / "seeds"
    train.mkdir()
    seeds.mkdir()
    for i in range(8):
        save_wav(synth_clip(100 + i, 0.4), train / f"train{i:02d}.wav")
    for i in range(3):
        save_wav(synth_clip(160 + i, 0.4), seeds / f"seed{i:02d}.wav")

    runner = CliRunner()
    trc = root / "train.trc"
    res = runner.invoke(
        main,
        [
            "profile",
            "--weights", str(FIXTURES / "toy_weights.txt"),
            "--vocab", str(FIXTURES / "toy_vocab.txt"),
            "--audio-dir", str(train),
            "--out", str(trc),
        ],
    )
    assert res.exit_code == 0, res.output
    mdp = root / "model.mdp"
    res = runner.invoke(
        main,
        ["build-model", "--traces", str(trc), "--pca-dims", "3", "--partitions", "6", "--out", str(mdp)],
    )
    assert res.exit_code == 0, res.output
    return root


def test_profile_writes_traces(workspace):
    ts = load_traces(workspace / "train.trc")
    assert len(ts.traces) == 8
    assert ts.state_dim == 16 and ts.input_dim == 20
    assert [t.id for t in ts.traces] == sorted(t.id for t in ts.traces)


def test_coverage_self_is_full(workspace):
    runner = CliRunner()
    res = runner.invoke(
        main,
        [
            "coverage",
            "--model", str(workspace / "model.mdp"),
            "--traces", str(workspace / "train.trc"),
            "--criterion", "all",
            "--figure", str(workspace / "cov.png"),
        ],
    )
    assert res.exit_code == 0, res.output
    lines = [ln.split("\t") for ln in res.output.strip().splitlines() if "\t" in ln]
    header, rows = lines[0], lines[1:]
    assert header == ["criterion", "value", "numerator", "denominator"]
    by_name = {r[0]: r for r in rows}
    for name in ("bscov", "btcov", "iscov", "wicov"):
        assert by_name[name][1] == "1.000000"
    assert by_name["ksbcov"][1] == "0.000000"
    assert (workspace / "cov.png").stat().st_size > 0


def test_coverage_single_criterion(workspace):
    runner = CliRunner()
    res = runner.invoke(
        main,
        [
            "coverage",
            "--model", str(workspace / "model.mdp"),
            "--traces", str(workspace / "train.trc"),
            "--criterion", "ksbcov",
            "--boundary-steps", "2",
        ],
    )
    assert res.exit_code == 0, res.output
    assert res.output.count("ksbcov") == 1


def test_mutate_fixed_kind(workspace, tmp_path):
    runner = CliRunner()
    src = next((workspace / "seeds").glob("*.wav"))
    out = tmp_path / "m.wav"
    res = runner.invoke(
        main,
        ["mutate", "--in", str(src), "--kind", "changespeed", "--seed", "42", "--out", str(out)],
    )
    assert res.exit_code == 0, res.output
    assert out.exists()
    record = json.loads(Path(f"{out}.json").read_text())
    assert record["history"][0]["kind"] == "changespeed"
    assert record["history"][0]["seed"] == 42


def test_mutate_random_respects_history(workspace, tmp_path):
    runner = CliRunner()
    src = next((workspace / "seeds").glob("*.wav"))
    hist = tmp_path / "h.json"
    hist.write_text(
        json.dumps(
            {
                "seed_id": "seed",
                "history": [
                    {"kind": "changevolume", "params": {"gain": 1.1}, "seed": 1},
                    {"kind": "pitchshift", "params": {"semitones": 1.0}, "seed": 2},
                    {"kind": "addwhitenoise", "params": {"snr_db": 30.0}, "seed": 3},
                ],
            }
        )
    )
    out = tmp_path / "m2.wav"
    res = runner.invoke(
        main,
        ["mutate", "--in", str(src), "--random", "--history", str(hist), "--seed", "9", "--out", str(out)],
    )
    assert res.exit_code == 0, res.output
    record = json.loads(Path(f"{out}.json").read_text())
    assert record["history"][-1]["kind"] in ("drc", "trim")


def test_mutate_rejects_repeated_category(workspace, tmp_path):
    runner = CliRunner()
    src = next((workspace / "seeds").glob("*.wav"))
    hist = tmp_path / "h2.json"
    hist.write_text(
        json.dumps(
            {"seed_id": "s", "history": [{"kind": "changevolume", "params": {}, "seed": 1}]}
        )
    )
    res = runner.invoke(
        main,
        [
            "mutate", "--in", str(src), "--kind", "lowpassfilter",
            "--history", str(hist), "--seed", "3", "--out", str(tmp_path / "no.wav"),
        ],
    )
    assert res.exit_code != 0
    assert "restricted category" in res.output


def test_fuzz_end_to_end(workspace, tmp_path):
    runner = CliRunner()
    out_dir = tmp_path / "campaign"
    args = [
        "fuzz",
        "--model", str(workspace / "model.mdp"),
        "--weights", str(FIXTURES / "toy_weights.txt"),
        "--vocab", str(FIXTURES / "toy_vocab.txt"),
        "--seeds", str(workspace / "seeds"),
        "--criterion", "bscov",
        "--wer-threshold", "0.5",
        "--iterations", "30",
        "--seed", "11",
        "--out", str(out_dir),
    ]
    res = runner.invoke(main, args)
    assert res.exit_code == 0, res.output
    report = json.loads((out_dir / "report.json").read_text())
    assert report["totals"]["iterations"] == 30
    curve = (out_dir / "coverage_curve.csv").read_text().splitlines()
    assert curve[0] == "iteration,value"
    assert len(curve) >= 31
    values = [float(ln.split(",")[1]) for ln in curve[1:]]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert (out_dir / "coverage_curve.png").stat().st_size > 0


def test_fuzz_report_bytes_deterministic(workspace, tmp_path):
    runner = CliRunner()
    blobs = []
    for run in ("a", "b"):
        out_dir = tmp_path / run
        res = runner.invoke(
            main,
            [
                "fuzz",
                "--model", str(workspace / "model.mdp"),
                "--weights", str(FIXTURES / "toy_weights.txt"),
                "--vocab", str(FIXTURES / "toy_vocab.txt"),
                "--seeds", str(workspace / "seeds"),
                "--iterations", "25",
                "--seed", "4",
                "--out", str(out_dir),
            ],
        )
        assert res.exit_code == 0, res.output
        blobs.append(
            (out_dir / "report.json").read_bytes() + (out_dir / "coverage_curve.csv").read_bytes()
        )
    assert blobs[0] == blobs[1]


def test_build_model_bad_params(workspace):
    runner = CliRunner()
    res = runner.invoke(
        main,
        [
            "build-model",
            "--traces", str(workspace / "train.trc"),
            "--pca-dims", "99",
            "--partitions", "5",
            "--out", "/tmp/never.mdp",
        ],
    )
    assert res.exit_code != 0
    assert "out of range" in res.output
