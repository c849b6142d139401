"""Pretty-printer producing re-parsable concrete syntax.

parse(pretty(t)) == t for every term in the surface grammar (de Bruijn
representation makes that equality alpha-equivalence).  Runtime-only forms
print as display markers that have no concrete syntax: locations as `#k`,
context holes as `[-]`.

Printing levels: 0 assignment, 2 application, 3 prefix operators, 4 type
application, 5 atoms.  Forms whose body extends maximally to the right
(`fn`, `ifz`, `match`, `pack`, `unpack`, quantified types) are printed bare
only in tail position, otherwise parenthesized.
"""

from __future__ import annotations

from .syntax import (
    App, Assign, Deref, Fold, Fun, Hole, Ifz, Inl, Inr, Loc, Match, Num,
    Pack, Pair, Pred, Proj, Rand, Ref, Succ, Term, TypeApp, TypeFun, Unfold,
    Unit, Unpack, Var, has_annotations,
    TArrow, TExists, TForall, TMu, TNat, TProd, TRef, TSum, TUnit, TVar, Type,
)

_AUTO_TVARS = "abcdefghijklmnopqrstuvwxyz"


def _freshen(hint: str, used: set[str]) -> str:
    if hint and hint not in used:
        return hint
    base = hint or "x"
    i = 1
    while f"{base}{i}" in used:
        i += 1
    return f"{base}{i}"


def pretty_type(ty: Type, tvars: list[str | None] | None = None) -> str:
    stack: list[str | None] = list(tvars) if tvars else []

    def go(ty: Type, level: int, tail: bool) -> str:
        match ty:
            case TVar(k):
                if k < len(stack) and stack[-1 - k] is not None:
                    return stack[-1 - k]  # type: ignore[return-value]
                return f"?{k}"
            case TUnit():
                return "unit"
            case TNat():
                return "nat"
            case TRef():
                return "ref nat"
            case TArrow(a, r):
                s = f"{go(a, 1, False)} -> {go(r, 0, tail)}"
                return s if level <= 0 else f"({go(a, 1, False)} -> {go(r, 0, True)})"
            case TSum(l, r):
                if level <= 1:
                    return f"{go(l, 1, False)} + {go(r, 2, tail)}"
                return f"({go(l, 1, False)} + {go(r, 2, True)})"
            case TProd(l, r):
                if level <= 2:
                    return f"{go(l, 2, False)} * {go(r, 3, tail)}"
                return f"({go(l, 2, False)} * {go(r, 3, True)})"
            case TMu() | TForall() | TExists():
                kw = {"TMu": "mu", "TForall": "all", "TExists": "ex"}[type(ty).__name__]
                used = {n for n in stack if n is not None}
                name = _freshen(ty.hint, used)
                stack.append(name)
                try:
                    body = go(ty.body, 0, True)
                finally:
                    stack.pop()
                s = f"{kw} {name}. {body}"
                return s if tail else f"({s})"
        raise TypeError(f"unexpected type: {ty!r}")

    return go(ty, 0, True)


def pretty(t: Term) -> str:
    term_names: list[str] = []
    type_names: list[str | None] = []

    def tname(ty: Type) -> str:
        return pretty_type(ty, type_names)

    def bind(hint: str) -> str:
        return _freshen(hint, set(term_names))

    def spine(s: str, level: int, tail: bool) -> str:
        return s if level <= 3 and tail else f"({s})"

    def go(t: Term, level: int, tail: bool) -> str:
        match t:
            case Var(k):
                if k < len(term_names):
                    return term_names[-1 - k]
                return f"?v{k}"
            case Unit():
                return "()"
            case Num(n):
                return str(n)
            case Loc(i):
                return f"#{i}"
            case Hole():
                return "[-]"
            case Pair(l, r):
                return f"({go(l, 0, True)}, {go(r, 0, True)})"
            case Assign(l, r):
                s = f"{go(l, 1, False)} := {go(r, 1, tail)}"
                return s if level <= 0 else f"({go(l, 1, False)} := {go(r, 1, True)})"
            case App(f, a):
                if level <= 2:
                    return f"{go(f, 2, False)} {go(a, 3, tail)}"
                return f"({go(f, 2, False)} {go(a, 3, True)})"
            case Rand(a):
                return _prefix("rand", a, level, tail)
            case Succ(a):
                return _prefix("succ", a, level, tail)
            case Pred(a):
                return _prefix("pred", a, level, tail)
            case Inl(a):
                return _prefix("inl", a, level, tail)
            case Inr(a):
                return _prefix("inr", a, level, tail)
            case Ref(a):
                return _prefix("ref", a, level, tail)
            case Unfold(a):
                return _prefix("unfold", a, level, tail)
            case Proj(i, a):
                return _prefix("fst" if i == 1 else "snd", a, level, tail)
            case Deref(a):
                s = f"!{go(a, 3, tail)}"
                return s if level <= 3 else f"(!{go(a, 3, True)})"
            case TypeFun(a):
                if level <= 3:
                    return f"tfn {_under_tfn(a, tail)}"
                return f"(tfn {_under_tfn(a, True)})"
            case Fold(a, ann):
                s = f"fold {go(a, 4, False)}"
                if ann is not None:
                    s += f" at {tname(ann)}"
                    return spine(s, level, tail)
                return s if level <= 3 else f"({s})"
            case TypeApp(f, ann):
                inner = "" if ann is None else tname(ann)
                s = f"{go(f, 4, False)}[{inner}]"
                return s if level <= 4 else f"({s})"
            case Fun(b, ann):
                name = bind(t.hint)
                term_names.append(name)
                try:
                    body = go(b, 0, True)
                finally:
                    term_names.pop()
                head = name if ann is None else f"({name} : {tname(ann)})"
                return spine(f"fn {head} => {body}", level, tail)
            case Ifz(s0, t1, t2):
                s = (f"ifz {go(s0, 0, False)} then {go(t1, 0, False)} "
                     f"else {go(t2, 0, True)}")
                return spine(s, level, tail)
            case Match(s0, l, r):
                ln = bind(t.lhint)
                term_names.append(ln)
                try:
                    ls = go(l, 0, False)
                finally:
                    term_names.pop()
                rn = bind(t.rhint)
                term_names.append(rn)
                try:
                    rs = go(r, 0, True)
                finally:
                    term_names.pop()
                s = f"match {go(s0, 0, False)} with inl {ln} => {ls} | inr {rn} => {rs}"
                return spine(s, level, tail)
            case Pack(b, ann, _):
                s = f"pack {go(b, 4, False)}"
                if ann is not None:
                    s += f" as {tname(ann)}"
                return spine(s, level, tail)
            case Unpack(s0, b):
                name = bind(t.hint)
                term_names.append(name)
                type_names.append(None)
                try:
                    body = go(b, 0, True)
                finally:
                    type_names.pop()
                    term_names.pop()
                s = f"unpack {go(s0, 0, False)} as {name} in {body}"
                return spine(s, level, tail)
        raise TypeError(f"unexpected term: {t!r}")

    def _prefix(kw: str, a: Term, level: int, tail: bool) -> str:
        if level <= 3:
            return f"{kw} {go(a, 3, tail)}"
        return f"({kw} {go(a, 3, True)})"

    def _under_tfn(a: Term, tail: bool) -> str:
        # The depth-based automatic name mirrors the parser; an explicit
        # `name =>` binder is emitted when the body mentions the variable in
        # an annotation and the automatic name is already taken.
        count = sum(1 for n in type_names if n is not None)
        auto = _AUTO_TVARS[min(count, len(_AUTO_TVARS) - 1)]
        explicit = has_annotations(a)
        name = _freshen(auto, {n for n in type_names if n is not None}) \
            if explicit else auto
        type_names.append(name)
        try:
            body = go(a, 3, tail)
        finally:
            type_names.pop()
        return f"{name} => {body}" if explicit else body

    return go(t, 0, True)
