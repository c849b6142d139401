"""Seeded generator of well-typed closed terms for property tests.

Generated terms are fully annotated, so they both synthesize and check.
Only recursion-free forms are produced (plus bounded rand/ref/assign), so
every generated program has a finite reachable chain.
"""

from __future__ import annotations

import random

from fmu.syntax import (
    App, Assign, BOOL, Deref, Fold, Fun, Ifz, Inl, Inr, Match, NAT, Num,
    Pair, Pred, Proj, Rand, Ref, Succ, TArrow, TMu, TProd, TSum, TVar, Term,
    Type, UNIT, Unit, Var, REFNAT,
)

LIST_NAT = TMu(TSum(UNIT, TProd(NAT, TVar(0))))


def gen_type(rng: random.Random, depth: int = 2) -> Type:
    if depth <= 0:
        return rng.choice([UNIT, NAT, NAT, BOOL])
    roll = rng.random()
    if roll < 0.35:
        return rng.choice([UNIT, NAT, NAT, BOOL])
    if roll < 0.55:
        return TProd(gen_type(rng, depth - 1), gen_type(rng, depth - 1))
    if roll < 0.7:
        return TSum(gen_type(rng, depth - 1), gen_type(rng, depth - 1))
    if roll < 0.9:
        return TArrow(gen_type(rng, depth - 1), gen_type(rng, depth - 1))
    return LIST_NAT


def _value(rng: random.Random, ty: Type, ctx: tuple[Type, ...], depth: int) -> Term:
    match ty:
        case t if t == UNIT:
            return Unit()
        case t if t == NAT:
            return Num(rng.randint(1, 3))
        case TProd(l, r):
            return Pair(gen_term(rng, l, ctx, depth - 1),
                        gen_term(rng, r, ctx, depth - 1))
        case TSum(l, r):
            if rng.random() < 0.5:
                return Inl(gen_term(rng, l, ctx, depth - 1))
            return Inr(gen_term(rng, r, ctx, depth - 1))
        case TArrow(a, r):
            return Fun(gen_term(rng, r, ctx + (a,), depth - 1), a)
        case TMu(body) if ty == LIST_NAT:
            elems = rng.randint(0, 2 if depth > 1 else 0)
            acc: Term = Fold(Inl(Unit()), LIST_NAT)
            for _ in range(elems):
                acc = Fold(Inr(Pair(Num(rng.randint(1, 3)), acc)), LIST_NAT)
            return acc
    raise AssertionError(f"no value generator for {ty!r}")


def gen_term(rng: random.Random, ty: Type, ctx: tuple[Type, ...] = (),
             depth: int = 3) -> Term:
    """A term of type `ty` in context `ctx` (innermost binding last)."""
    candidates = [i for i, t in enumerate(reversed(ctx)) if t == ty]
    if candidates and rng.random() < 0.3:
        return Var(rng.choice(candidates))
    if depth <= 0:
        return _value(rng, ty, ctx, 0)
    roll = rng.random()
    if roll < 0.35:
        return _value(rng, ty, ctx, depth)
    if roll < 0.45 and ty == NAT:
        inner = gen_term(rng, NAT, ctx, depth - 1)
        return rng.choice([Succ(inner), Pred(inner), Rand(inner)])
    if roll < 0.55:
        # conditional on a small random numeral
        return Ifz(gen_term(rng, NAT, ctx, depth - 1),
                   gen_term(rng, ty, ctx, depth - 1),
                   gen_term(rng, ty, ctx, depth - 1))
    if roll < 0.65:
        # beta redex via an annotated lambda
        a = gen_type(rng, 1)
        return App(Fun(gen_term(rng, ty, ctx + (a,), depth - 1), a),
                   gen_term(rng, a, ctx, depth - 1))
    if roll < 0.72:
        # projection from a pair
        other = gen_type(rng, 1)
        i = rng.choice([1, 2])
        prod = TProd(ty, other) if i == 1 else TProd(other, ty)
        return Proj(i, gen_term(rng, prod, ctx, depth - 1))
    if roll < 0.8:
        # match on a sum
        l, r = gen_type(rng, 1), gen_type(rng, 1)
        return Match(gen_term(rng, TSum(l, r), ctx, depth - 1),
                     gen_term(rng, ty, ctx + (l,), depth - 1),
                     gen_term(rng, ty, ctx + (r,), depth - 1))
    if roll < 0.88 and ty == NAT:
        # read through a fresh reference
        return Deref(Ref(gen_term(rng, NAT, ctx, depth - 1)))
    if roll < 0.94 and ty == UNIT:
        # write into a fresh reference
        return App(Fun(Assign(Var(0), gen_term(rng, NAT, ctx + (REFNAT,), depth - 1)),
                       REFNAT),
                   Ref(gen_term(rng, NAT, ctx, depth - 1)))
    return _value(rng, ty, ctx, depth)


def gen_program(seed: int, depth: int = 3) -> tuple[Term, Type]:
    """Deterministic closed program from a seed."""
    rng = random.Random(seed)
    ty = gen_type(rng, 1)
    return gen_term(rng, ty, (), depth), ty
