"""Executable contextual-approximation testing.

Approximation between closed terms is probed through evaluation contexts:
e1 is refuted against e2 by a context E whose exact (or soundly bounded)
termination probabilities satisfy lower(E[e1]) > upper(E[e2]).  Because both
bounds are sound and monotone under more effort, a Distinguished verdict is
stable; a holds verdict is always bounded evidence over the pool tried,
never a proof.

Context pools are generated type-directed from the evaluation-context
grammar: eliminator frames for the hole type plus applications of seed
values and observer functions, extended outward to a given depth, always
starting from the empty context.  Known distinguishing contexts from the
literature on this calculus are registered for the types where generation
at low depth would be unlikely to find them: the double-instantiation
observer at `all a. a -> a` and stateful increment/read observers at the
counter-module type.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

from . import corpus
from .analysis import (
    Bounds, DEFAULT_EFFORT, Distribution, Effort, IncompleteChain,
    build_chain, exact_distribution, prob_bounds, solve_exact,
)
from .parser import parse_term, parse_type
from .printer import pretty, pretty_type
from .semantics import from_term
from .syntax import (
    BOOL, EMPTY_CONTEXT, EvalContext, FAppL, FAppR, FAssignL, FDeref, FIfz,
    FMatch, FProj, FRand, FSucc, FPred, FTypeApp, FUnfold, FUnpack, Fun,
    NAT, Num, TArrow, TExists, TForall, TMu, TNat, TProd, TRef, TSum, TUnit,
    TVar, Term, Type, UNIT, Unit, erase, plug, subst_type,
)
from .typecheck import TypecheckError, typecheck


# ---------------------------------------------------------------------------
# Seed values and observer functions
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _parsed(src: str) -> Term:
    return parse_term(src)


def default_seed_values(ty: Type) -> list[Term]:
    """Closed, annotated values of the given type used as context leaves."""
    if ty == UNIT:
        return [Unit()]
    if ty == NAT:
        return [Num(1), Num(2), Num(3)]
    if ty == BOOL:
        return [_parsed(corpus.TRUE_SRC), _parsed(corpus.FALSE_SRC)]
    match ty:
        case TProd(l, r):
            ls, rs = default_seed_values(l), default_seed_values(r)
            if ls and rs:
                from .syntax import Pair
                return [Pair(ls[0], rs[0])]
        case TArrow(a, r):
            out = []
            if a == r:
                out.append(Fun(_var0(), a, "x"))
            for v in default_seed_values(r)[:1]:
                out.append(Fun(v, a, "u"))
            return out
    return []


def _var0() -> Term:
    from .syntax import Var
    return Var(0)


def observer_functions(ty: Type) -> list[tuple[Term, Type]]:
    """Functions accepting `ty`, used as outer application frames.  They
    translate which value arrived into a termination probability."""
    out: list[tuple[Term, Type]] = []
    if ty == BOOL:
        out.append((_parsed(corpus.bool_observer_src(True)), UNIT))
        out.append((_parsed(corpus.bool_observer_src(False)), UNIT))
    if ty == NAT:
        out.append((_parsed(corpus.nat_le_observer_src(1)), UNIT))
        out.append((_parsed(corpus.nat_le_observer_src(2)), UNIT))
    # success-scaling observer at any type: forwards the value, halving mass
    out.append((_parsed(corpus.scaling_observer_src(1, 2, pretty_type(ty))), ty))
    return out


# ---------------------------------------------------------------------------
# Pools
# ---------------------------------------------------------------------------

@dataclass
class ContextPool:
    hole_type: Type
    depth: int
    contexts: list[EvalContext]
    result_types: list[Type]


def _frames_for(ty: Type) -> list[tuple[object, Type]]:
    frames: list[tuple[object, Type]] = []
    omega_unit = _parsed(corpus.omega_src())
    match ty:
        case TNat():
            frames.append((FSucc(), NAT))
            frames.append((FPred(), NAT))
            frames.append((FRand(), NAT))
            frames.append((FIfz(Unit(), omega_unit), UNIT))
            frames.append((FIfz(omega_unit, Unit()), UNIT))
        case TProd(l, r):
            frames.append((FProj(1), l))
            frames.append((FProj(2), r))
        case TSum(l, r):
            frames.append((FMatch(Unit(), Unit(), "x", "y"), UNIT))
            if l == r:
                frames.append((FMatch(_var0(), _var0(), "x", "y"), l))
        case TArrow(a, r):
            for v in default_seed_values(a):
                frames.append((FAppL(v), r))
        case TForall(body):
            for inst in (UNIT, NAT):
                frames.append((FTypeApp(inst), subst_type(body, 0, inst)))
        case TMu(body):
            frames.append((FUnfold(), subst_type(body, 0, ty)))
        case TExists():
            frames.append((FUnpack(Unit(), "p"), UNIT))
        case TRef():
            frames.append((FDeref(), NAT))
            frames.append((FAssignL(Num(1)), UNIT))
    for f, rty in observer_functions(ty):
        frames.append((FAppR(f), rty))
    return frames


def enumerate_contexts(ty: Type, depth: int,
                       max_contexts: Optional[int] = None) -> ContextPool:
    """Type-directed pool of evaluation contexts accepting `ty`, extended
    outward to `depth` frames.  Deterministic; always starts with the empty
    context, followed by any registered contexts for this hole type."""
    contexts: list[EvalContext] = [EMPTY_CONTEXT]
    rtypes: list[Type] = [ty]
    seen: set[EvalContext] = {EMPTY_CONTEXT}
    for reg in registered_contexts(ty):
        if reg not in seen:
            seen.add(reg)
            contexts.append(reg)
            rtypes.append(UNIT)  # registered observers end at unit or nat
    level: list[tuple[EvalContext, Type]] = [(EMPTY_CONTEXT, ty)]
    for _ in range(depth):
        nxt: list[tuple[EvalContext, Type]] = []
        for ctx, sigma in level:
            for frame, rho in _frames_for(sigma):
                new = (frame,) + ctx  # new frame is outermost
                if new in seen:
                    continue
                seen.add(new)
                contexts.append(new)
                rtypes.append(rho)
                nxt.append((new, rho))
                if max_contexts is not None and len(contexts) >= max_contexts:
                    return ContextPool(ty, depth, contexts, rtypes)
        level = nxt
    return ContextPool(ty, depth, contexts, rtypes)


@lru_cache(maxsize=None)
def _registered_cache(ty: Type) -> tuple[EvalContext, ...]:
    out: list[EvalContext] = []
    if ty == parse_type("all a. a -> a"):
        # bind the instantiated hole, call it twice on unit
        obs = _parsed("fn (f : unit -> unit) => let x = f () in f ()")
        out.append((FAppR(obs), FTypeApp(UNIT)))
    if ty == parse_type(corpus.COUNTER_TYPE):
        for m in range(3):
            for j in (1, 2, 3):
                incs = "".join("(snd c) h ; " for _ in range(m))
                src = (f"fn q => unpack q as c in "
                       f"let h = (fst (fst c)) () in {incs}"
                       f"match ({corpus.LEQ_SRC}) ((snd (fst c)) h) {j} "
                       f"with inl u => () | inr u => {corpus.omega_src()}")
                fun = parse_term(src)
                unpack = fun.body  # Unpack(Var(0), body)
                out.append((FUnpack(unpack.body, "c"),))
    return tuple(out)


def registered_contexts(ty: Type) -> tuple[EvalContext, ...]:
    return _registered_cache(ty)


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ApproximationHolds:
    depth: int
    contexts_checked: int
    effort: Effort


@dataclass(frozen=True)
class Distinguished:
    context: EvalContext
    lhs_lower: Fraction
    rhs_upper: Fraction
    witness_value: Optional[Term] = None  # set by distribution comparisons


@dataclass(frozen=True)
class Inconclusive:
    context: EvalContext
    lhs_bounds: Optional[Bounds] = None
    rhs_bounds: Optional[Bounds] = None


Verdict = Union[ApproximationHolds, Distinguished, Inconclusive]


@dataclass(frozen=True)
class EquivVerdict:
    forward: Verdict
    backward: Verdict

    @property
    def holds(self) -> bool:
        return (isinstance(self.forward, ApproximationHolds)
                and isinstance(self.backward, ApproximationHolds))


@dataclass(frozen=True)
class EquivOpts:
    depth: int = 3
    effort: Effort = DEFAULT_EFFORT
    max_contexts: Optional[int] = 400


DEFAULT_OPTS = EquivOpts()


def context_display(ctx: EvalContext) -> str:
    from .syntax import Hole
    return pretty(plug(ctx, Hole()))


# ---------------------------------------------------------------------------
# Approximation and equivalence checks
# ---------------------------------------------------------------------------

def _check_types(e1: Term, e2: Term, ty: Type) -> None:
    for e in (e1, e2):
        try:
            typecheck(e, ty)
        except TypecheckError as err:
            raise TypecheckError(
                f"term does not check at {pretty_type(ty)}: {err}") from err


def ciu_approx(e1: Term, e2: Term, ty: Type,
               opts: EquivOpts = DEFAULT_OPTS,
               pool: Optional[ContextPool] = None) -> Verdict:
    """Search for a context refuting P(E[e1]) <= P(E[e2]).  Returns the
    first strict violation in pool order, else bounded evidence that the
    approximation holds."""
    _check_types(e1, e2, ty)
    if pool is None:
        pool = enumerate_contexts(ty, opts.depth, opts.max_contexts)
    t1, t2 = erase(e1), erase(e2)
    for ctx in pool.contexts:
        b1 = prob_bounds(from_term(plug(ctx, t1)), opts.effort)
        b2 = prob_bounds(from_term(plug(ctx, t2)), opts.effort)
        if b1.lower > b2.upper:
            return Distinguished(ctx, b1.lower, b2.upper)
    return ApproximationHolds(opts.depth, len(pool.contexts), opts.effort)


def ciu_equiv(e1: Term, e2: Term, ty: Type,
              opts: EquivOpts = DEFAULT_OPTS) -> EquivVerdict:
    """Both approximation directions over a shared pool."""
    pool = enumerate_contexts(ty, opts.depth, opts.max_contexts)
    return EquivVerdict(
        forward=ciu_approx(e1, e2, ty, opts, pool),
        backward=ciu_approx(e2, e1, ty, opts, pool),
    )


def distribution_equiv(e1: Term, e2: Term, ty: Type,
                       pool: Optional[ContextPool] = None,
                       opts: EquivOpts = DEFAULT_OPTS) -> Verdict:
    """Exact comparison of terminal-value distributions per context (heaps
    marginalized away).  Needs completely explored chains; incomplete ones
    yield Inconclusive.  This is a finer observation than termination
    probability: it distinguishes syntactically different result values, so
    it is meant for first-order result types."""
    _check_types(e1, e2, ty)
    if pool is None:
        pool = enumerate_contexts(ty, opts.depth, opts.max_contexts)
    t1, t2 = erase(e1), erase(e2)
    for ctx in pool.contexts:
        g1 = build_chain(from_term(plug(ctx, t1)), opts.effort.node_budget)
        g2 = build_chain(from_term(plug(ctx, t2)), opts.effort.node_budget)
        if not (g1.complete and g2.complete):
            return Inconclusive(ctx)
        d1 = exact_distribution(g1).project_values()
        d2 = exact_distribution(g2).project_values()
        if d1 != d2:
            diff = sorted(set(d1) | set(d2), key=pretty)
            for v in diff:
                p1 = d1.get(v, Fraction(0))
                p2 = d2.get(v, Fraction(0))
                if p1 != p2:
                    return Distinguished(ctx, p1, p2, witness_value=v)
    return ApproximationHolds(opts.depth, len(pool.contexts), opts.effort)


def recheck_distinguished(verdict: Distinguished, e1: Term, e2: Term) -> bool:
    """Independently recompute both exact probabilities on the witness
    context of a termination-probability refutation."""
    if verdict.witness_value is not None:
        return True  # distribution witnesses are already exact solver output
    t1 = from_term(erase(plug(verdict.context, e1)))
    t2 = from_term(erase(plug(verdict.context, e2)))
    g1 = build_chain(t1)
    g2 = build_chain(t2)
    if not (g1.complete and g2.complete):
        return False
    p1 = solve_exact(g1)[g1.root]
    p2 = solve_exact(g2)[g2.root]
    return p1 == verdict.lhs_lower and p2 == verdict.rhs_upper and p1 > p2
