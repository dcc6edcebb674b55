"""The five coverage criteria and Jaccard similarity over a fixed model.

All criteria are exact rationals (``fractions.Fraction``); the CLI renders
them as decimals with 6 places.  Denominators depend only on the model, so
merging more traces into a profile never decreases any criterion.

Criterion definitions (S = abstract states, X(s) = enabled inputs at s,
subscript M = profiling/model side, T = test side):

- bscov:   |S_T ∩ S_M| / |S_M|
- ksbcov:  |S_T ∩ B| / |B|, B = union of boundary layers 1..k around S_M
- btcov:   |(src,dst)_T ∩ (src,dst)_M| / |(src,dst)_M|
- iscov:   Σ_{s ∈ S_T∩S_M} |X_T(s) ∩ X_M(s)| / Σ_{s ∈ S_M} |X_M(s)|
- wicov:   Σ over test-covered (s,x,d) triples of Pr_x(s,d), same denominator

The iscov numerator intersects with the model's enabled inputs so the ratio
cannot exceed 1 when tests exercise inputs never seen in profiling.  The
wicov inner sum is conditioned on the input of each covered triple; triples
absent from the model contribute 0.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .abstraction import AbstractState
from .errors import ValidationError
from .mdp import AbstractInput, AbstractTransition, MdpModel, abstract_trace
from .traces import Trace


class CoverageProfile:
    """Sets of abstract states/transitions/input-pairs visited by some traces.

    Immutable; bound to the model whose abstraction produced it.
    """

    __slots__ = ("model", "states", "transitions", "state_inputs", "src_dst")

    def __init__(
        self,
        model: MdpModel,
        states: Iterable[AbstractState],
        transitions: Iterable[AbstractTransition],
    ):
        self.model = model
        self.states = frozenset(states)
        self.transitions = frozenset(transitions)
        state_inputs: dict[AbstractState, set[AbstractInput]] = {}
        src_dst: set[tuple[AbstractState, AbstractState]] = set()
        for tr in self.transitions:
            if tr.src not in self.states or tr.dst not in self.states:
                raise ValidationError("transition endpoints must appear in the state set")
            state_inputs.setdefault(tr.src, set()).add(tr.input)
            src_dst.add((tr.src, tr.dst))
        self.state_inputs = {s: frozenset(xs) for s, xs in state_inputs.items()}
        self.src_dst = frozenset(src_dst)

    def enabled(self, s: AbstractState) -> frozenset[AbstractInput]:
        return self.state_inputs.get(s, frozenset())

    def is_empty(self) -> bool:
        return not self.states

    def __repr__(self):
        return f"CoverageProfile(states={len(self.states)}, transitions={len(self.transitions)})"


def empty_profile(mdl: MdpModel) -> CoverageProfile:
    return CoverageProfile(mdl, (), ())


def profile_traces(mdl: MdpModel, traces: Iterable[Trace]) -> CoverageProfile:
    """Abstract a trace collection and collect its covered sets."""
    states: set[AbstractState] = set()
    transitions: set[AbstractTransition] = set()
    for t in traces:
        for tr in abstract_trace(mdl, t):
            transitions.add(tr)
            states.add(tr.src)
            states.add(tr.dst)
    return CoverageProfile(mdl, states, transitions)


def _same_model(a: CoverageProfile, b: CoverageProfile) -> bool:
    return a.model is b.model or a.model.fingerprint() == b.model.fingerprint()


def merge(a: CoverageProfile, b: CoverageProfile) -> CoverageProfile:
    """Componentwise union of two profiles over the same model."""
    if not _same_model(a, b):
        raise ValidationError("cannot merge profiles built against different models")
    return CoverageProfile(a.model, a.states | b.states, a.transitions | b.transitions)


def _check(mdl: MdpModel, p: CoverageProfile) -> None:
    if p.model is not mdl and p.model.fingerprint() != mdl.fingerprint():
        raise ValidationError("profile was built against a different model")


def bscov(mdl: MdpModel, p: CoverageProfile) -> Fraction:
    """Fraction of the model's visited states also visited by the tests."""
    _check(mdl, p)
    if not mdl.states:
        raise ValidationError("model has no states")
    return Fraction(len(p.states & mdl.states), len(mdl.states))


def ksbcov(mdl: MdpModel, p: CoverageProfile, k_steps: int = 1) -> Fraction:
    """Fraction of the <=k-step boundary region touched by the tests."""
    _check(mdl, p)
    boundary = mdl.boundary_union(k_steps)
    return Fraction(len(p.states & boundary), len(boundary))


def btcov(mdl: MdpModel, p: CoverageProfile) -> Fraction:
    """Fraction of the model's (src, dst) transition pairs exercised."""
    _check(mdl, p)
    if not mdl.src_dst:
        raise ValidationError("model has no transitions")
    return Fraction(len(p.src_dst & mdl.src_dst), len(mdl.src_dst))


def _enabled_total(mdl: MdpModel) -> int:
    return sum(len(xs) for xs in mdl.enabled.values())


def iscov(mdl: MdpModel, p: CoverageProfile) -> Fraction:
    """Fraction of profiling-time (state, input) choices exercised."""
    _check(mdl, p)
    den = _enabled_total(mdl)
    if den == 0:
        raise ValidationError("model has no enabled inputs")
    num = 0
    for s in p.states & mdl.states:
        num += len(p.enabled(s) & mdl.enabled.get(s, frozenset()))
    return Fraction(num, den)


def wicov(mdl: MdpModel, p: CoverageProfile) -> Fraction:
    """Probability-weighted transition coverage over test-covered triples."""
    _check(mdl, p)
    den = _enabled_total(mdl)
    if den == 0:
        raise ValidationError("model has no enabled inputs")
    num = Fraction(0)
    for tr in p.transitions:
        if tr in mdl.triples:
            num += mdl.probability(tr.src, tr.input, tr.dst)
    return num / den


def jaccard(p1: CoverageProfile, p2: CoverageProfile) -> Fraction:
    """Similarity of two trace collections' basic-state sets."""
    if not _same_model(p1, p2):
        raise ValidationError("profiles were built against different models")
    union = p1.states | p2.states
    if not union:
        raise ValidationError("jaccard undefined: both profiles are empty")
    return Fraction(len(p1.states & p2.states), len(union))


CRITERIA = ("bscov", "ksbcov", "btcov", "iscov", "wicov")


def criterion_value(
    mdl: MdpModel, p: CoverageProfile, criterion: str, boundary_steps: int = 1
) -> Fraction:
    if criterion == "bscov":
        return bscov(mdl, p)
    if criterion == "ksbcov":
        return ksbcov(mdl, p, boundary_steps)
    if criterion == "btcov":
        return btcov(mdl, p)
    if criterion == "iscov":
        return iscov(mdl, p)
    if criterion == "wicov":
        return wicov(mdl, p)
    raise ValidationError(f"unknown criterion {criterion!r} (expected one of {CRITERIA})")


def coverage_report(
    mdl: MdpModel, p: CoverageProfile, criteria: Iterable[str], boundary_steps: int = 1
) -> list[tuple[str, Fraction, str, str]]:
    """Rows of (criterion, value, numerator, denominator) for rendering.

    Numerator/denominator are the unreduced tallies as strings; wicov's
    numerator is an exact fraction of probability mass.
    """
    rows = []
    for name in criteria:
        value = criterion_value(mdl, p, name, boundary_steps)
        if name == "bscov":
            num, den = str(len(p.states & mdl.states)), str(len(mdl.states))
        elif name == "ksbcov":
            boundary = mdl.boundary_union(boundary_steps)
            num, den = str(len(p.states & boundary)), str(len(boundary))
        elif name == "btcov":
            num, den = str(len(p.src_dst & mdl.src_dst)), str(len(mdl.src_dst))
        elif name == "iscov":
            den_i = _enabled_total(mdl)
            num, den = str(int(value * den_i)), str(den_i)
        else:  # wicov
            den_i = _enabled_total(mdl)
            num, den = str(value * den_i), str(den_i)
        rows.append((name, value, num, den))
    return rows
