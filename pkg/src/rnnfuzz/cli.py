"""Command-line interface: profile, build-model, coverage, mutate, fuzz."""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import audio as audio_mod
from .coverage import CRITERIA, coverage_report, profile_traces
from .errors import RnnFuzzError
from .fuzzer import FuzzConfig, run_campaign
from .mdp import build_model, load_model, save_model
from .sut import load_vocab, load_weights, transcribe
from .traces import TraceSet, load_traces, save_traces


@click.group()
def main():
    """Coverage-guided metamorphic testing for stateful recurrent transcribers."""


def _fail(exc: Exception) -> None:
    raise click.ClickException(str(exc))


@main.command("profile")
@click.option("--weights", "weights_path", required=True, type=click.Path(exists=True))
@click.option("--vocab", "vocab_path", required=True, type=click.Path(exists=True))
@click.option("--audio-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path())
def profile_cmd(weights_path, vocab_path, audio_dir, out_path):
    """Transcribe every WAV in a directory and write the trace file."""
    try:
        weights = load_weights(weights_path)
        vocab = load_vocab(vocab_path)
        traces = []
        for wav in sorted(Path(audio_dir).glob("*.wav")):
            clip = audio_mod.load_wav(wav)
            text, trace = transcribe(weights, clip, vocab, trace_id=wav.stem)
            traces.append(trace)
            click.echo(f"{wav.stem}\t{text}")
        ts = TraceSet(weights.hidden_dim, weights.input_dim, traces)
        save_traces(ts, out_path)
    except RnnFuzzError as exc:
        _fail(exc)
    click.echo(f"wrote {len(ts.traces)} traces to {out_path}")


@main.command("build-model")
@click.option("--traces", "traces_path", required=True, type=click.Path(exists=True))
@click.option("--pca-dims", "k", required=True, type=int)
@click.option("--partitions", "m", required=True, type=int)
@click.option("--input-pca-dims", "k_in", type=int, default=None)
@click.option("--input-partitions", "m_in", type=int, default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
def build_model_cmd(traces_path, k, m, k_in, m_in, out_path):
    """Fit the abstraction on a profiling trace file and save the model."""
    try:
        ts = load_traces(traces_path)
        model = build_model(ts, k, m, k_in, m_in)
        save_model(model, out_path)
    except RnnFuzzError as exc:
        _fail(exc)
    click.echo(
        f"model: {len(model.states)} states, {len(model.src_dst)} transitions, "
        f"{len(model.counts)} choices -> {out_path}"
    )


@main.command("coverage")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--traces", "traces_path", required=True, type=click.Path(exists=True))
@click.option(
    "--criterion",
    type=click.Choice(list(CRITERIA) + ["all"]),
    default="all",
    show_default=True,
)
@click.option("--boundary-steps", type=int, default=1, show_default=True)
@click.option("--figure", "figure_path", type=click.Path(), default=None,
              help="Also render a bar chart of the computed criteria.")
def coverage_cmd(model_path, traces_path, criterion, boundary_steps, figure_path):
    """Report coverage of a trace file against a model."""
    try:
        model = load_model(model_path)
        ts = load_traces(traces_path)
        prof = profile_traces(model, ts.traces)
        names = list(CRITERIA) if criterion == "all" else [criterion]
        rows = coverage_report(model, prof, names, boundary_steps)
    except RnnFuzzError as exc:
        _fail(exc)
    click.echo("criterion\tvalue\tnumerator\tdenominator")
    for name, value, num, den in rows:
        click.echo(f"{name}\t{float(value):.6f}\t{num}\t{den}")
    if figure_path:
        from .report import render_criteria_bars

        render_criteria_bars(rows, figure_path)
        click.echo(f"figure -> {figure_path}")


@main.command("mutate")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--kind", type=click.Choice([k.value for k in audio_mod.TransformKind]), default=None)
@click.option("--random", "randomly", is_flag=True, help="Pick an admissible transform at random.")
@click.option("--history", "history_path", type=click.Path(), default=None,
              help="Existing lineage JSON constraining the random pick.")
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def mutate_cmd(in_path, kind, randomly, history_path, seed, out_path):
    """Apply one metamorphic transform; writes the mutant and its lineage."""
    if (kind is None) == (not randomly):
        raise click.UsageError("pass exactly one of --kind or --random")
    try:
        clip = audio_mod.load_wav(in_path)
        if history_path and Path(history_path).exists():
            record = audio_mod.MutationRecord.from_json(Path(history_path).read_text(encoding="utf-8"))
        else:
            record = audio_mod.MutationRecord(Path(in_path).stem)
        rng = np.random.default_rng(seed)
        if randomly:
            chosen = audio_mod.pick_transform(record, rng)
            if chosen is None:
                raise click.ClickException("no transformation admissible for this lineage")
        else:
            chosen = audio_mod.TransformKind(kind)
            if not audio_mod.check_category_constraint(
                record.history + (audio_mod.AppliedTransform(chosen, (), seed),)
            ):
                raise click.ClickException(f"{kind} would repeat a restricted category")
        mutant, params = audio_mod.apply_transform(clip, chosen, rng)
        record = record.extend(chosen, params, seed)
        audio_mod.save_wav(mutant, out_path)
        with open(f"{out_path}.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(record.to_json())
    except RnnFuzzError as exc:
        _fail(exc)
    params_text = ", ".join(f"{k2}={v:.4g}" for k2, v in sorted(params.items()))
    click.echo(f"{chosen.value}({params_text}) -> {out_path}")


@main.command("fuzz")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--weights", "weights_path", required=True, type=click.Path(exists=True))
@click.option("--vocab", "vocab_path", required=True, type=click.Path(exists=True))
@click.option("--seeds", "seeds_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--criterion", type=click.Choice(list(CRITERIA)), default="bscov", show_default=True)
@click.option("--boundary-steps", type=int, default=1, show_default=True)
@click.option("--wer-threshold", type=float, default=0.5, show_default=True)
@click.option("--iterations", type=int, default=None)
@click.option("--time-budget", type=float, default=None, help="Wall-clock budget in seconds.")
@click.option("--seed", "campaign_seed", type=int, default=0, show_default=True)
@click.option("--max-history", type=int, default=audio_mod.DEFAULT_MAX_HISTORY, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def fuzz_cmd(
    model_path,
    weights_path,
    vocab_path,
    seeds_dir,
    criterion,
    boundary_steps,
    wer_threshold,
    iterations,
    time_budget,
    campaign_seed,
    max_history,
    out_dir,
):
    """Run the coverage-guided campaign and write report + figures."""
    if iterations is None and time_budget is None:
        iterations = 1000
    try:
        cfg = FuzzConfig(
            model_path=model_path,
            weights_path=weights_path,
            vocab_path=vocab_path,
            criterion=criterion,
            wer_threshold=wer_threshold,
            boundary_steps=boundary_steps,
            campaign_seed=campaign_seed,
            iterations=iterations,
            time_budget=time_budget,
            max_history=max_history,
            out_dir=out_dir,
        )
        seed_paths = sorted(Path(seeds_dir).glob("*.wav"))
        report = run_campaign(cfg, seed_paths)
        from .report import fmt6, write_fuzz_outputs

        write_fuzz_outputs(report, cfg, out_dir)
    except RnnFuzzError as exc:
        _fail(exc)
    t = report.totals
    click.echo(
        f"{criterion}: {fmt6(report.initial_coverage)} -> {fmt6(report.final_coverage)} | "
        f"iterations={t['iterations']} mutants={t['mutants']} failures={t['failures']} "
        f"queue={len(report.queue_final)}"
    )
    click.echo(f"report -> {Path(out_dir) / 'report.json'}")


if __name__ == "__main__":
    sys.exit(main())
