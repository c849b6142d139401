"""Bidirectional typechecker.

Synthesis derives a type from annotations (lambda binders, pack types, type
application arguments, fold ascriptions); checking pushes an expected type
into unannotated terms.  An application whose function is an unannotated
lambda is treated let-style: the argument's type is synthesized and bound,
so `let` sugar needs no annotation.

Runtime configurations are checked under a store typing that assigns
`ref nat` to every allocated location; source programs may not mention
locations.

`typecheck` reports the type; `elaborate` additionally returns the term
re-annotated with every synthesized annotation (lambda domains, pack
witnesses, type-application instantiations), which is what the
annotation-preserving reduction used by the preservation tests needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .printer import pretty, pretty_type
from .syntax import (
    App, Assign, Deref, Fold, Fun, Hole, Ifz, Inl, Inr, Loc, Match, Num,
    Pack, Pair, Pred, Proj, Rand, Ref, Succ, Term, TypeApp, TypeFun, Unfold,
    Unit, Unpack, Var,
    NAT, REFNAT, UNIT, TArrow, TExists, TForall, TMu, TNat, TProd, TRef,
    TSum, TUnit, TVar, Type, shift_type, subst_type, type_free_above,
)


class TypecheckError(Exception):
    pass


class CannotSynthesize(TypecheckError):
    """Raised where an annotation would be needed to proceed."""


@dataclass(frozen=True)
class TypeCtx:
    """Typing context: a count of bound type variables and a stack of
    term-variable types (innermost binding last)."""
    tvars: int = 0
    vars: tuple[Type, ...] = ()
    store: int = 0

    def push_var(self, ty: Type) -> "TypeCtx":
        return TypeCtx(self.tvars, self.vars + (ty,), self.store)

    def push_tvar(self) -> "TypeCtx":
        shifted = tuple(shift_type(t, 1) for t in self.vars)
        return TypeCtx(self.tvars + 1, shifted, self.store)

    def lookup(self, idx: int) -> Type:
        if 0 <= idx < len(self.vars):
            return self.vars[-1 - idx]
        raise TypecheckError(f"unbound variable index {idx}")


def check_type(delta: int, ty: Type) -> bool:
    """True iff all free type variables of `ty` lie below `delta`."""
    return not type_free_above(ty, delta)


def _clip(t: Term) -> str:
    s = pretty(t)
    return s if len(s) <= 60 else s[:57] + "..."


def _wf(ctx: TypeCtx, ty: Type, where: Term) -> None:
    if not check_type(ctx.tvars, ty):
        raise TypecheckError(
            f"annotation {pretty_type(ty)} on {_clip(where)} mentions "
            f"unbound type variables")


def _free_tvars(ty: Type, depth: int = 0) -> set[int]:
    """Free type variable indices of `ty`, relative to its own top level."""
    match ty:
        case TVar(k):
            return {k - depth} if k >= depth else set()
        case TUnit() | TNat() | TRef():
            return set()
        case TProd(l, r) | TSum(l, r) | TArrow(l, r):
            return _free_tvars(l, depth) | _free_tvars(r, depth)
        case TMu(b) | TForall(b) | TExists(b):
            return _free_tvars(b, depth + 1)
    raise TypeError(f"unexpected type: {ty!r}")


def match_instantiation(template: Type, target: Type) -> Optional[Type]:
    """First-order matching: find sigma with template[var0 := sigma] == target,
    where `template` lives under one extra binder (the variable to solve).
    Returns None if no consistent solution exists; an unused variable solves
    to unit."""
    solutions: list[Type] = []

    def strip(ty: Type, depth: int) -> Optional[Type]:
        # remove `depth` local binder levels from a candidate witness
        if depth == 0:
            return ty
        if any(k < depth for k in _free_tvars(ty)):
            return None
        return shift_type(ty, -depth, 0)

    def go(tpl: Type, tgt: Type, depth: int) -> bool:
        match tpl:
            case TVar(k) if k == depth:
                cand = strip(tgt, depth)
                if cand is None:
                    return False
                solutions.append(cand)
                return True
            case TVar(k):
                want = k if k < depth else k - 1
                return isinstance(tgt, TVar) and tgt.idx == want
            case TUnit():
                return isinstance(tgt, TUnit)
            case TNat():
                return isinstance(tgt, TNat)
            case TRef():
                return isinstance(tgt, TRef)
            case TProd(l, r):
                return (isinstance(tgt, TProd)
                        and go(l, tgt.left, depth) and go(r, tgt.right, depth))
            case TSum(l, r):
                return (isinstance(tgt, TSum)
                        and go(l, tgt.left, depth) and go(r, tgt.right, depth))
            case TArrow(a, r):
                return (isinstance(tgt, TArrow)
                        and go(a, tgt.arg, depth) and go(r, tgt.res, depth))
            case TMu(b):
                return isinstance(tgt, TMu) and go(b, tgt.body, depth + 1)
            case TForall(b):
                return isinstance(tgt, TForall) and go(b, tgt.body, depth + 1)
            case TExists(b):
                return isinstance(tgt, TExists) and go(b, tgt.body, depth + 1)
        raise TypeError(f"unexpected type: {tpl!r}")

    if not go(template, target, 0):
        return None
    if not solutions:
        return UNIT
    first = solutions[0]
    if any(s != first for s in solutions[1:]):
        return None
    return first


def _mismatch(e: Term, expected: Type, actual: Type) -> TypecheckError:
    return TypecheckError(
        f"type mismatch at {_clip(e)}: expected {pretty_type(expected)}, "
        f"found {pretty_type(actual)}")


def _synth(ctx: TypeCtx, e: Term) -> tuple[Type, Term]:
    match e:
        case Var(k):
            return ctx.lookup(k), e
        case Unit():
            return UNIT, e
        case Num():
            return NAT, e
        case Loc(i):
            if i < ctx.store:
                return REFNAT, e
            raise TypecheckError(f"location #{i} is not in the store typing")
        case Hole():
            raise TypecheckError("cannot typecheck a context hole")
        case Rand(a):
            a2 = _check(ctx, a, NAT)
            return NAT, Rand(a2)
        case Pred(a):
            return NAT, Pred(_check(ctx, a, NAT))
        case Succ(a):
            return NAT, Succ(_check(ctx, a, NAT))
        case Ifz(s, t1, t2):
            s2 = _check(ctx, s, NAT)
            try:
                ty, t1e = _synth(ctx, t1)
                t2e = _check(ctx, t2, ty)
            except CannotSynthesize:
                ty, t2e = _synth(ctx, t2)
                t1e = _check(ctx, t1, ty)
            return ty, Ifz(s2, t1e, t2e)
        case Pair(l, r):
            lt, le = _synth(ctx, l)
            rt, re_ = _synth(ctx, r)
            return TProd(lt, rt), Pair(le, re_)
        case Proj(i, a):
            ty, ae = _synth(ctx, a)
            if not isinstance(ty, TProd):
                raise _mismatch(e, TProd(TVar(0), TVar(0)), ty)
            return (ty.left if i == 1 else ty.right), Proj(i, ae)
        case Fun(b, ann):
            if ann is None:
                raise CannotSynthesize(
                    f"cannot synthesize unannotated fn at {_clip(e)}")
            _wf(ctx, ann, e)
            bt, be = _synth(ctx.push_var(ann), b)
            return TArrow(ann, bt), Fun(be, ann, e.hint)
        case App(Fun(b, None) as f, a):
            at, ae = _synth(ctx, a)
            bt, be = _synth(ctx.push_var(at), b)
            return bt, App(Fun(be, at, f.hint), ae)
        case App(f, a):
            ft, fe = _synth(ctx, f)
            if not isinstance(ft, TArrow):
                raise TypecheckError(
                    f"applied term {_clip(f)} has non-function type "
                    f"{pretty_type(ft)}")
            ae = _check(ctx, a, ft.arg)
            return ft.res, App(fe, ae)
        case Inl() | Inr():
            raise CannotSynthesize(
                f"cannot synthesize injection {_clip(e)}; check it against a "
                f"sum type")
        case Match(s, l, r):
            st, se = _synth(ctx, s)
            if not isinstance(st, TSum):
                raise TypecheckError(
                    f"match scrutinee {_clip(s)} has non-sum type "
                    f"{pretty_type(st)}")
            try:
                ty, le = _synth(ctx.push_var(st.left), l)
                re_ = _check(ctx.push_var(st.right), r, ty)
            except CannotSynthesize:
                ty, re_ = _synth(ctx.push_var(st.right), r)
                le = _check(ctx.push_var(st.left), l, ty)
            return ty, Match(se, le, re_, e.lhint, e.rhint)
        case TypeFun(b):
            bt, be = _synth(ctx.push_tvar(), b)
            return TForall(bt), TypeFun(be)
        case TypeApp(f, ann):
            ft, fe = _synth(ctx, f)
            if not isinstance(ft, TForall):
                raise TypecheckError(
                    f"type application of non-polymorphic {_clip(f)} : "
                    f"{pretty_type(ft)}")
            if ann is None:
                raise CannotSynthesize(
                    f"bare type application {_clip(e)} needs an instantiation "
                    f"annotation")
            _wf(ctx, ann, e)
            return subst_type(ft.body, 0, ann), TypeApp(fe, ann)
        case Pack(b, ann, wit):
            if ann is None:
                raise CannotSynthesize(
                    f"pack without type annotation at {_clip(e)}")
            _wf(ctx, ann, e)
            if not isinstance(ann, TExists):
                raise TypecheckError(
                    f"pack annotation {pretty_type(ann)} is not existential")
            if wit is not None:
                _wf(ctx, wit, e)
                be = _check(ctx, b, subst_type(ann.body, 0, wit))
                return ann, Pack(be, ann, wit)
            bt, be = _synth(ctx, b)
            sol = match_instantiation(ann.body, bt)
            if sol is None:
                raise _mismatch(e, ann, bt)
            return ann, Pack(be, ann, sol)
        case Unpack(s, b):
            st, se = _synth(ctx, s)
            if not isinstance(st, TExists):
                raise TypecheckError(
                    f"unpack scrutinee {_clip(s)} has non-existential type "
                    f"{pretty_type(st)}")
            inner = ctx.push_tvar().push_var(st.body)
            bt, be = _synth(inner, b)
            if 0 in _free_tvars(bt):
                raise TypecheckError(
                    f"abstract type escapes its unpack at {_clip(e)}")
            return shift_type(bt, -1, 0), Unpack(se, be, e.hint)
        case Fold(a, ann):
            if ann is None:
                raise CannotSynthesize(
                    f"fold without ascription at {_clip(e)}")
            _wf(ctx, ann, e)
            if not isinstance(ann, TMu):
                raise TypecheckError(
                    f"fold ascription {pretty_type(ann)} is not a mu type")
            ae = _check(ctx, a, subst_type(ann.body, 0, ann))
            return ann, Fold(ae, ann)
        case Unfold(a):
            ty, ae = _synth(ctx, a)
            if not isinstance(ty, TMu):
                raise TypecheckError(
                    f"unfold of non-recursive type {pretty_type(ty)} at "
                    f"{_clip(e)}")
            return subst_type(ty.body, 0, ty), Unfold(ae)
        case Ref(a):
            return REFNAT, Ref(_check(ctx, a, NAT))
        case Deref(a):
            return NAT, Deref(_check(ctx, a, REFNAT))
        case Assign(l, r):
            le = _check(ctx, l, REFNAT)
            re_ = _check(ctx, r, NAT)
            return UNIT, Assign(le, re_)
    raise TypeError(f"unexpected term: {e!r}")


def _check(ctx: TypeCtx, e: Term, expected: Type) -> Term:
    match e, expected:
        case Fun(b, ann), TArrow(d, r):
            if ann is not None and ann != d:
                raise _mismatch(e, d, ann)
            be = _check(ctx.push_var(d), b, r)
            return Fun(be, d, e.hint)
        case Fun(), _:
            raise _mismatch(e, expected, TArrow(TVar(0), TVar(0)))
        case TypeFun(b), TForall(body):
            return TypeFun(_check(ctx.push_tvar(), b, body))
        case Pack(b, ann, wit), TExists(body):
            if ann is not None and ann != expected:
                raise _mismatch(e, expected, ann)
            if wit is not None:
                _wf(ctx, wit, e)
                return Pack(_check(ctx, b, subst_type(body, 0, wit)),
                            expected, wit)
            try:
                bt, be = _synth(ctx, b)
            except CannotSynthesize as err:
                raise TypecheckError(
                    f"pack body at {_clip(e)} needs annotations to determine "
                    f"the witness type") from err
            sol = match_instantiation(body, bt)
            if sol is None:
                raise _mismatch(e, expected, bt)
            return Pack(be, expected, sol)
        case Fold(a, ann), TMu(body):
            if ann is not None and ann != expected:
                raise _mismatch(e, expected, ann)
            ae = _check(ctx, a, subst_type(body, 0, expected))
            return Fold(ae, expected)
        case Inl(a), TSum(l, _):
            return Inl(_check(ctx, a, l))
        case Inr(a), TSum(_, r):
            return Inr(_check(ctx, a, r))
        case (Inl() | Inr()), _:
            raise _mismatch(e, expected, TSum(TVar(0), TVar(0)))
        case Pair(l, r), TProd(lt, rt):
            return Pair(_check(ctx, l, lt), _check(ctx, r, rt))
        case Ifz(s, t1, t2), _:
            se = _check(ctx, s, NAT)
            return Ifz(se, _check(ctx, t1, expected), _check(ctx, t2, expected))
        case Match(s, l, r), _:
            st, se = _synth(ctx, s)
            if not isinstance(st, TSum):
                raise TypecheckError(
                    f"match scrutinee {_clip(s)} has non-sum type "
                    f"{pretty_type(st)}")
            le = _check(ctx.push_var(st.left), l, expected)
            re_ = _check(ctx.push_var(st.right), r, expected)
            return Match(se, le, re_, e.lhint, e.rhint)
        case App(Fun(b, None) as f, a), _:
            at, ae = _synth(ctx, a)
            be = _check(ctx.push_var(at), b, expected)
            return App(Fun(be, at, f.hint), ae)
        case Unpack(s, b), _:
            st, se = _synth(ctx, s)
            if not isinstance(st, TExists):
                raise TypecheckError(
                    f"unpack scrutinee {_clip(s)} has non-existential type "
                    f"{pretty_type(st)}")
            inner = ctx.push_tvar().push_var(st.body)
            be = _check(inner, b, shift_type(expected, 1))
            return Unpack(se, be, e.hint)
        case TypeApp(f, None), _:
            ft, fe = _synth(ctx, f)
            if not isinstance(ft, TForall):
                raise TypecheckError(
                    f"type application of non-polymorphic {_clip(f)} : "
                    f"{pretty_type(ft)}")
            sol = match_instantiation(ft.body, expected)
            if sol is None:
                raise _mismatch(e, expected, ft)
            return TypeApp(fe, sol)
        case _, _:
            ty, ee = _synth(ctx, e)
            if ty != expected:
                raise _mismatch(e, expected, ty)
            return ee


def elaborate(e: Term, expected: Optional[Type] = None,
              store: int = 0) -> tuple[Term, Type]:
    """Typecheck and return (re-annotated term, type)."""
    ctx = TypeCtx(0, (), store)
    if expected is None:
        ty, ee = _synth(ctx, e)
        return ee, ty
    if not check_type(0, expected):
        raise TypecheckError("expected type is not closed")
    ee = _check(ctx, e, expected)
    return ee, expected


def typecheck(e: Term, expected: Optional[Type] = None, store: int = 0) -> Type:
    """Synthesize (or validate) the type of a closed term."""
    return elaborate(e, expected, store)[1]
