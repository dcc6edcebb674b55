"""Coverage-guided metamorphic fuzz loop over audio seeds.

Each iteration selects a queue entry (probability proportional to
1/(1+selection_count), which balances exploration), picks an admissible
transform for its lineage, mutates, transcribes the mutant, and then either
records a failure (word error rate against the lineage ROOT's transcript
above the threshold — the metamorphic relation is anchored to the original
audio, not the immediate parent) or admits the mutant to the queue when its
trace strictly grows the campaign's covered-unit set for the chosen
criterion.

Determinism: the campaign seed drives selection and transform choice; each
iteration's mutation generator is seeded with campaign_seed XOR iteration,
and that per-iteration seed is stored in the mutant's lineage, so the same
config and seed corpus reproduce a byte-identical report.  (Wall-clock
budgets trade this away; iteration budgets are the default.)
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .audio import (
    DEFAULT_MAX_HISTORY,
    AudioClip,
    MutationRecord,
    apply_transform,
    load_wav,
    pick_transform,
    save_wav,
)
from .coverage import (
    CRITERIA,
    CoverageProfile,
    criterion_value,
    empty_profile,
    merge,
    profile_traces,
)
from .errors import RnnFuzzError, StartupError, ValidationError
from .mdp import MdpModel, load_model
from .sut import load_vocab, load_weights, transcribe, wer
from .traces import Trace

Transcriber = Callable[[AudioClip, str], tuple[str, Trace]]


@dataclass
class SeedEntry:
    """One queue element: a clip, its lineage, and its coverage footprint."""

    entry_id: str
    clip: AudioClip
    record: MutationRecord
    baseline_transcript: str  # lineage root's reference
    profile: CoverageProfile
    selection_count: int = 0


@dataclass
class FuzzConfig:
    model_path: str
    weights_path: str
    vocab_path: str
    criterion: str = "bscov"
    wer_threshold: float = 0.5
    boundary_steps: int = 1
    campaign_seed: int = 0
    iterations: Optional[int] = 1000
    time_budget: Optional[float] = None
    max_history: int = DEFAULT_MAX_HISTORY
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValidationError(f"unknown criterion {self.criterion!r}")
        if not 0.0 <= self.wer_threshold <= 1.0:
            raise ValidationError("wer_threshold must lie in [0, 1]")
        if self.boundary_steps < 1:
            raise ValidationError("boundary_steps must be >= 1")
        if self.campaign_seed < 0:
            raise ValidationError("campaign_seed must be non-negative")
        if (self.iterations is None) == (self.time_budget is None):
            raise ValidationError("exactly one of iterations / time_budget must be set")
        if self.iterations is not None and self.iterations < 1:
            raise ValidationError("iteration budget must be positive")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValidationError("time budget must be positive")


@dataclass
class FailureRecord:
    mutant_path: str
    mutant_id: str
    record: MutationRecord
    reference: str
    hypothesis: str
    wer: float


@dataclass
class FuzzReport:
    criterion: str
    failed: list[FailureRecord] = field(default_factory=list)
    queue_final: list[str] = field(default_factory=list)
    coverage_curve: list[tuple[int, Fraction]] = field(default_factory=list)
    totals: dict = field(default_factory=dict)

    @property
    def initial_coverage(self) -> Fraction:
        return self.coverage_curve[0][1]

    @property
    def final_coverage(self) -> Fraction:
        return self.coverage_curve[-1][1]


def select_seed(queue: Sequence[SeedEntry], rng: np.random.Generator) -> SeedEntry:
    """Draw an entry with probability proportional to 1/(1+selection_count).

    Increments the chosen entry's selection count, so repeatedly picked
    seeds gradually yield to fresher ones.
    """
    if not queue:
        raise StartupError("seed queue is empty")
    weights = np.array([1.0 / (1.0 + e.selection_count) for e in queue])
    probs = weights / weights.sum()
    chosen = queue[int(rng.choice(len(queue), p=probs))]
    chosen.selection_count += 1
    return chosen


def covered_units(profile: CoverageProfile, criterion: str, boundary_steps: int = 1) -> set:
    """The numerator set a profile contributes under one criterion."""
    mdl = profile.model
    if criterion == "bscov":
        return set(profile.states & mdl.states)
    if criterion == "ksbcov":
        return set(profile.states & mdl.boundary_union(boundary_steps))
    if criterion == "btcov":
        return set(profile.src_dst & mdl.src_dst)
    if criterion == "iscov":
        pairs = set()
        for s in profile.states & mdl.states:
            for x in profile.enabled(s) & mdl.enabled.get(s, frozenset()):
                pairs.add((s, x))
        return pairs
    if criterion == "wicov":
        return set(profile.transitions & mdl.triples)
    raise ValidationError(f"unknown criterion {criterion!r}")


def coverage_increase(
    global_profile: CoverageProfile,
    candidate: CoverageProfile,
    criterion: str,
    boundary_steps: int = 1,
) -> bool:
    """True iff merging the candidate strictly grows the covered-unit set."""
    if not (
        candidate.model is global_profile.model
        or candidate.model.fingerprint() == global_profile.model.fingerprint()
    ):
        raise ValidationError("profiles were built against different models")
    new = covered_units(candidate, criterion, boundary_steps)
    old = covered_units(global_profile, criterion, boundary_steps)
    return not new <= old


def run_loop(
    model: MdpModel,
    transcriber: Transcriber,
    seeds: Sequence[tuple[str, AudioClip]],
    cfg: FuzzConfig,
) -> FuzzReport:
    """Drive the fuzz loop against an arbitrary transcriber.

    The queue and global profile are updated strictly sequentially, so the
    determinism contract holds regardless of any parallelism inside the
    transcriber.
    """
    if not seeds:
        raise StartupError("need at least one seed clip")
    out_dir = Path(cfg.out_dir) if cfg.out_dir else None
    if out_dir:
        (out_dir / "failures").mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(cfg.campaign_seed)
    queue: list[SeedEntry] = []
    global_profile = empty_profile(model)
    for sid, clip in seeds:
        try:
            text, trace = transcriber(clip, sid)
        except RnnFuzzError as exc:
            raise StartupError(f"seed {sid} failed to transcribe: {exc}") from exc
        if not text.strip():
            raise StartupError(f"seed {sid} produced an empty transcript")
        prof = profile_traces(model, [trace])
        queue.append(SeedEntry(sid, clip, MutationRecord(sid), text, prof))
        global_profile = merge(global_profile, prof)

    report = FuzzReport(criterion=cfg.criterion)
    value = criterion_value(model, global_profile, cfg.criterion, cfg.boundary_steps)
    report.coverage_curve.append((0, value))

    mutants = failures = admissions = skipped = 0
    iteration = 0
    start = time.monotonic()

    def budget_left() -> bool:
        if cfg.iterations is not None:
            return iteration < cfg.iterations
        return time.monotonic() - start < cfg.time_budget

    while budget_left():
        iteration += 1
        entry = select_seed(queue, rng)
        kind = pick_transform(entry.record, rng, cfg.max_history)
        if kind is None:
            skipped += 1
            report.coverage_curve.append((iteration, value))
            continue
        mutation_seed = cfg.campaign_seed ^ iteration
        mutant_id = f"{entry.record.seed_id}-i{iteration:06d}"
        try:
            mutant_clip, params = apply_transform(
                entry.clip, kind, np.random.default_rng(mutation_seed)
            )
        except RnnFuzzError:
            skipped += 1
            report.coverage_curve.append((iteration, value))
            continue
        # outside the skip guard: a category-constraint violation is a bug
        record = entry.record.extend(kind, params, mutation_seed)
        try:
            hypothesis, trace = transcriber(mutant_clip, mutant_id)
        except RnnFuzzError:
            skipped += 1
            report.coverage_curve.append((iteration, value))
            continue
        mutants += 1
        rate = wer(entry.baseline_transcript, hypothesis)
        if rate > cfg.wer_threshold:
            failures += 1
            path = ""
            if out_dir:
                path = f"failures/{mutant_id}.wav"
                save_wav(mutant_clip, out_dir / path)
                _write_failure_artifacts(
                    out_dir / "failures" / mutant_id, record, entry.baseline_transcript, hypothesis, rate
                )
            report.failed.append(
                FailureRecord(path, mutant_id, record, entry.baseline_transcript, hypothesis, rate)
            )
        else:
            candidate = profile_traces(model, [trace])
            if coverage_increase(global_profile, candidate, cfg.criterion, cfg.boundary_steps):
                global_profile = merge(global_profile, candidate)
                value = criterion_value(model, global_profile, cfg.criterion, cfg.boundary_steps)
                queue.append(
                    SeedEntry(mutant_id, mutant_clip, record, entry.baseline_transcript, candidate)
                )
                admissions += 1
        report.coverage_curve.append((iteration, value))

    report.queue_final = [e.entry_id for e in queue]
    report.totals = {
        "iterations": iteration,
        "mutants": mutants,
        "failures": failures,
        "queue_admissions": admissions,
        "skipped": skipped,
    }
    return report


def _write_failure_artifacts(stem: Path, record, reference, hypothesis, rate) -> None:
    with open(f"{stem}.json", "w", encoding="utf-8", newline="\n") as fh:
        doc = {
            "record": json.loads(record.to_json()),
            "reference": reference,
            "hypothesis": hypothesis,
            "wer": rate,
        }
        fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def run_campaign(cfg: FuzzConfig, seed_paths: Sequence) -> FuzzReport:
    """Load model/weights/vocab/seeds from disk and run the loop."""
    try:
        model = load_model(cfg.model_path)
        weights = load_weights(cfg.weights_path)
        vocab = load_vocab(cfg.vocab_path)
    except (OSError, RnnFuzzError) as exc:
        raise StartupError(f"failed to load campaign inputs: {exc}") from exc

    seeds = []
    for p in seed_paths:
        path = Path(p)
        try:
            seeds.append((path.stem, load_wav(path)))
        except (OSError, RnnFuzzError) as exc:
            raise StartupError(f"failed to load seed {path}: {exc}") from exc

    def transcriber(clip: AudioClip, trace_id: str) -> tuple[str, Trace]:
        return transcribe(weights, clip, vocab, trace_id)

    return run_loop(model, transcriber, seeds, cfg)
