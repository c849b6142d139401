"""Weighted small-step reduction on configurations.

A configuration pairs a heap (tuple of numerals, indexed by location) with a
closed term.  Configurations are kept canonical: locations are renumbered in
order of first occurrence in the term, so structural equality is
alpha-equivalence plus location isomorphism and the reachable configuration
set forms a Markov chain keyed by structural equality.

Every step has a positive rational weight.  A `rand n` redex has n
successors of weight 1/n each and is classified a choice step (including
n = 1); `unfold (fold v)` is an unfold-fold step; everything else is a
deterministic weight-1 step.  `ifz` takes the first branch on scrutinee 1
and the second on any larger numeral.  Allocation appends at the lowest
fresh location; heaps only grow.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .syntax import (
    App, Assign, DecRedex, DecStuck, DecValue, Deref, EvalContext, Fold, Fun,
    Ifz, Inl, Inr, Loc, Match, Num, Pack, Pair, Pred, Proj, Rand, Ref, Succ,
    Term, TypeApp, TypeFun, Unfold, Unit, Unpack, Var,
    decompose, is_value, locations, plug, rename_locations, substitute,
    subst_type_in_term,
)


@dataclass(frozen=True)
class Config:
    heap: tuple[int, ...]
    term: Term

    def __post_init__(self) -> None:
        for v in self.heap:
            if v < 1:
                raise ValueError("heap cells hold numerals, which start at 1")


def from_term(t: Term) -> Config:
    return Config((), t)


def canonicalize(c: Config) -> Config:
    """Renumber locations by first occurrence in the term; unreferenced cells
    keep their relative order after the referenced ones."""
    if not c.heap:
        return c
    order: list[int] = []
    seen: set[int] = set()
    for loc in locations(c.term):
        if loc not in seen:
            seen.add(loc)
            order.append(loc)
    for i in range(len(c.heap)):
        if i not in seen:
            order.append(i)
    if order == list(range(len(c.heap))):
        return c
    mapping = {old: new for new, old in enumerate(order)}
    heap = tuple(c.heap[old] for old in order)
    return Config(heap, rename_locations(c.term, mapping))


class StepKind(enum.Enum):
    CHOICE = "choice"
    UNFOLD_FOLD = "unfold-fold"
    OTHER = "other"


@dataclass(frozen=True)
class WeightedStep:
    weight: Fraction
    target: Config
    kind: StepKind


def redex_kind(r: Term) -> StepKind:
    match r:
        case Rand(Num()):
            return StepKind.CHOICE
        case Unfold(Fold(_)):
            return StepKind.UNFOLD_FOLD
        case _:
            return StepKind.OTHER


def _fire(heap: tuple[int, ...], r: Term) -> tuple[tuple[int, ...], Term]:
    """Apply the unique basic rule for a non-choice redex."""
    match r:
        case App(Fun(b, _, _) as f, v):
            return heap, substitute(b, (v,))
        case Proj(i, Pair(l, rgt)):
            return heap, (l if i == 1 else rgt)
        case Unfold(Fold(v, _)):
            return heap, v
        case Unpack(Pack(v, _, wit), b):
            if wit is not None:
                b = subst_type_in_term(b, 0, wit)
            return heap, substitute(b, (v,))
        case TypeApp(TypeFun(b), ann):
            if ann is not None:
                b = subst_type_in_term(b, 0, ann)
            return heap, b
        case Match(Inl(v), l, _):
            return heap, substitute(l, (v,))
        case Match(Inr(v), _, rgt):
            return heap, substitute(rgt, (v,))
        case Pred(Num(n)):
            return heap, Num(max(n - 1, 1))
        case Succ(Num(n)):
            return heap, Num(n + 1)
        case Ifz(Num(n), t1, t2):
            return heap, (t1 if n == 1 else t2)
        case Ref(Num(n)):
            return heap + (n,), Loc(len(heap))
        case Deref(Loc(i)):
            return heap, Num(heap[i])
        case Assign(Loc(i), Num(n)):
            return heap[:i] + (n,) + heap[i + 1:], Unit()
    raise ValueError(f"not a deterministic redex: {r!r}")


def step_successors(c: Config) -> list[WeightedStep]:
    """All weighted one-step successors in a fixed order; empty iff the
    configuration is a value or stuck."""
    d = decompose(c.term)
    match d:
        case DecValue() | DecStuck():
            return []
        case DecRedex(ctx, r):
            pass
        case _:
            raise AssertionError
    match r:
        case Rand(Num(n)):
            w = Fraction(1, n)
            return [
                WeightedStep(w, canonicalize(Config(c.heap, plug(ctx, Num(k)))),
                             StepKind.CHOICE)
                for k in range(1, n + 1)
            ]
        case _:
            heap, t = _fire(c.heap, r)
            target = canonicalize(Config(heap, plug(ctx, t)))
            return [WeightedStep(Fraction(1), target, redex_kind(r))]


# ---------------------------------------------------------------------------
# Silent normalization: follow the deterministic steps that are neither
# choice nor unfold-fold until a value, a stuck state, or such a redex.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormValue:
    value: Config


@dataclass(frozen=True)
class NormStuck:
    config: Config


@dataclass(frozen=True)
class AtChoiceOrUnfold:
    config: Config


class SilentBudgetExceeded(Exception):
    def __init__(self, config: Config, budget: int):
        super().__init__(f"silent reduction prefix exceeded {budget} steps")
        self.config = config
        self.budget = budget


SilentResult = Union[NormValue, NormStuck, AtChoiceOrUnfold]


def silent_normalize(c: Config, budget: int = 200) -> SilentResult:
    """Run the unique prefix of `c`'s reduction path made of silent steps
    (neither choice nor unfold-fold).  The result is reachable from `c`
    through weight-1 silent steps only."""
    cur = canonicalize(c)
    for _ in range(budget + 1):
        d = decompose(cur.term)
        match d:
            case DecValue():
                return NormValue(cur)
            case DecStuck():
                return NormStuck(cur)
            case DecRedex(ctx, r):
                if redex_kind(r) is not StepKind.OTHER:
                    return AtChoiceOrUnfold(cur)
                heap, t = _fire(cur.heap, r)
                cur = canonicalize(Config(heap, plug(ctx, t)))
    raise SilentBudgetExceeded(cur, budget)


# ---------------------------------------------------------------------------
# Seeded sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Terminated:
    value: Config
    steps: int


@dataclass(frozen=True)
class StuckAt:
    config: Config
    steps: int


@dataclass(frozen=True)
class FuelExhausted:
    config: Config


RunResult = Union[Terminated, StuckAt, FuelExhausted]


def sample_run(c: Config, seed: int, fuel: int) -> RunResult:
    """One sampled trajectory; deterministic for a fixed seed.  Choice steps
    are resolved uniformly by the seeded generator."""
    rng = random.Random(seed)
    cur = canonicalize(c)
    for i in range(fuel):
        succs = step_successors(cur)
        if not succs:
            d = decompose(cur.term)
            if isinstance(d, DecValue):
                return Terminated(cur, i)
            return StuckAt(cur, i)
        if len(succs) == 1:
            cur = succs[0].target
        else:
            cur = rng.choice(succs).target
    return FuelExhausted(cur)
