"""Abstract syntax for the calculus: types, terms, values, substitution,
and evaluation-context decomposition.

Terms and types use de Bruijn indices for both term and type variables, so
structural equality is alpha-equivalence.  Binders carry a display-name hint
that is excluded from equality and hashing.  Annotations (lambda parameter
types, pack types and witnesses, type-application arguments, fold
ascriptions) are metadata for the typechecker; `erase` strips them all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

class Type:
    """Base class for type syntax."""
    __slots__ = ()


@dataclass(frozen=True)
class TVar(Type):
    idx: int


@dataclass(frozen=True)
class TUnit(Type):
    pass


@dataclass(frozen=True)
class TNat(Type):
    pass


@dataclass(frozen=True)
class TRef(Type):
    """Reference type; the store is ground, so only nat cells exist."""
    pass


@dataclass(frozen=True)
class TProd(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TSum(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TArrow(Type):
    arg: Type
    res: Type


@dataclass(frozen=True)
class TMu(Type):
    body: Type
    hint: str = field(default="r", compare=False, repr=False)


@dataclass(frozen=True)
class TForall(Type):
    body: Type
    hint: str = field(default="a", compare=False, repr=False)


@dataclass(frozen=True)
class TExists(Type):
    body: Type
    hint: str = field(default="a", compare=False, repr=False)


UNIT = TUnit()
NAT = TNat()
REFNAT = TRef()
BOOL = TSum(UNIT, UNIT)


def shift_type(ty: Type, by: int, cutoff: int = 0) -> Type:
    """Shift free type variables >= cutoff by `by`."""
    match ty:
        case TVar(k):
            return TVar(k + by) if k >= cutoff else ty
        case TUnit() | TNat() | TRef():
            return ty
        case TProd(l, r):
            return TProd(shift_type(l, by, cutoff), shift_type(r, by, cutoff))
        case TSum(l, r):
            return TSum(shift_type(l, by, cutoff), shift_type(r, by, cutoff))
        case TArrow(a, r):
            return TArrow(shift_type(a, by, cutoff), shift_type(r, by, cutoff))
        case TMu(b):
            return TMu(shift_type(b, by, cutoff + 1), ty.hint)
        case TForall(b):
            return TForall(shift_type(b, by, cutoff + 1), ty.hint)
        case TExists(b):
            return TExists(shift_type(b, by, cutoff + 1), ty.hint)
    raise TypeError(f"unexpected type: {ty!r}")


def subst_type(ty: Type, j: int, repl: Type) -> Type:
    """Substitute `repl` for TVar(j) in `ty`, shifting indices above j down."""
    match ty:
        case TVar(k):
            if k == j:
                return shift_type(repl, j)
            return TVar(k - 1) if k > j else ty
        case TUnit() | TNat() | TRef():
            return ty
        case TProd(l, r):
            return TProd(subst_type(l, j, repl), subst_type(r, j, repl))
        case TSum(l, r):
            return TSum(subst_type(l, j, repl), subst_type(r, j, repl))
        case TArrow(a, r):
            return TArrow(subst_type(a, j, repl), subst_type(r, j, repl))
        case TMu(b):
            return TMu(subst_type(b, j + 1, repl), ty.hint)
        case TForall(b):
            return TForall(subst_type(b, j + 1, repl), ty.hint)
        case TExists(b):
            return TExists(subst_type(b, j + 1, repl), ty.hint)
    raise TypeError(f"unexpected type: {ty!r}")


def type_free_above(ty: Type, depth: int = 0) -> bool:
    """True iff `ty` has a free variable with index >= depth."""
    match ty:
        case TVar(k):
            return k >= depth
        case TUnit() | TNat() | TRef():
            return False
        case TProd(l, r) | TSum(l, r) | TArrow(l, r):
            return type_free_above(l, depth) or type_free_above(r, depth)
        case TMu(b) | TForall(b) | TExists(b):
            return type_free_above(b, depth + 1)
    raise TypeError(f"unexpected type: {ty!r}")


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

class Term:
    """Base class for term syntax."""
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    idx: int


@dataclass(frozen=True)
class Unit(Term):
    pass


@dataclass(frozen=True)
class Num(Term):
    value: int

    def __post_init__(self) -> None:
        if self.value < 1:
            raise ValueError("numerals start at 1")


@dataclass(frozen=True)
class Rand(Term):
    arg: Term


@dataclass(frozen=True)
class Ifz(Term):
    scrut: Term
    then: Term
    els: Term


@dataclass(frozen=True)
class Pred(Term):
    arg: Term


@dataclass(frozen=True)
class Succ(Term):
    arg: Term


@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Proj(Term):
    index: int  # 1 or 2
    arg: Term


@dataclass(frozen=True)
class Fun(Term):
    body: Term
    ann: Optional[Type] = None
    hint: str = field(default="x", compare=False, repr=False)


@dataclass(frozen=True)
class App(Term):
    fun: Term
    arg: Term


@dataclass(frozen=True)
class Inl(Term):
    arg: Term


@dataclass(frozen=True)
class Inr(Term):
    arg: Term


@dataclass(frozen=True)
class Match(Term):
    scrut: Term
    left: Term
    right: Term
    lhint: str = field(default="x", compare=False, repr=False)
    rhint: str = field(default="y", compare=False, repr=False)


@dataclass(frozen=True)
class TypeFun(Term):
    """Type abstraction; binds one type variable with no name in the syntax."""
    body: Term


@dataclass(frozen=True)
class TypeApp(Term):
    """Type application e[]; `ann` is the optional instantiation annotation."""
    fun: Term
    ann: Optional[Type] = None


@dataclass(frozen=True)
class Pack(Term):
    """Existential introduction.  `ann` is the packed existential type and
    `witness` the hidden representation type (filled in by elaboration)."""
    body: Term
    ann: Optional[Type] = None
    witness: Optional[Type] = None


@dataclass(frozen=True)
class Unpack(Term):
    """Existential elimination; binds one term variable and one (unnamed)
    type variable in the body."""
    scrut: Term
    body: Term
    hint: str = field(default="x", compare=False, repr=False)


@dataclass(frozen=True)
class Fold(Term):
    arg: Term
    ann: Optional[Type] = None


@dataclass(frozen=True)
class Unfold(Term):
    arg: Term


@dataclass(frozen=True)
class Loc(Term):
    """Runtime store location; never appears in parsed source."""
    index: int


@dataclass(frozen=True)
class Ref(Term):
    arg: Term


@dataclass(frozen=True)
class Assign(Term):
    target: Term
    value: Term


@dataclass(frozen=True)
class Deref(Term):
    arg: Term


@dataclass(frozen=True)
class Hole(Term):
    """Placeholder for the hole of an evaluation context (display only)."""
    pass


def is_value(t: Term) -> bool:
    match t:
        case Unit() | Num() | Fun() | TypeFun() | Loc():
            return True
        case Pair(l, r):
            return is_value(l) and is_value(r)
        case Inl(a) | Inr(a) | Pack(a) | Fold(a):
            return is_value(a)
        case _:
            return False


def free_above(t: Term, depth: int = 0) -> bool:
    """True iff `t` has a free term variable with index >= depth."""
    match t:
        case Var(k):
            return k >= depth
        case Unit() | Num() | Loc() | Hole():
            return False
        case Rand(a) | Pred(a) | Succ(a) | Proj(_, a) | Inl(a) | Inr(a) \
                | TypeFun(a) | TypeApp(a) | Pack(a) | Fold(a) | Unfold(a) \
                | Ref(a) | Deref(a):
            return free_above(a, depth)
        case Ifz(s, t1, t2):
            return free_above(s, depth) or free_above(t1, depth) or free_above(t2, depth)
        case Pair(l, r) | App(l, r) | Assign(l, r):
            return free_above(l, depth) or free_above(r, depth)
        case Fun(b):
            return free_above(b, depth + 1)
        case Match(s, l, r):
            return free_above(s, depth) or free_above(l, depth + 1) or free_above(r, depth + 1)
        case Unpack(s, b):
            return free_above(s, depth) or free_above(b, depth + 1)
    raise TypeError(f"unexpected term: {t!r}")


def is_closed(t: Term) -> bool:
    return not free_above(t, 0)


def substitute(t: Term, values: tuple[Term, ...], depth: int = 0) -> Term:
    """Simultaneous substitution of closed `values` for the free variables
    with indices depth .. depth+len(values)-1; higher indices shift down."""
    n = len(values)
    if n == 0:
        return t

    def go(t: Term, d: int) -> Term:
        match t:
            case Var(k):
                if k < d:
                    return t
                if k < d + n:
                    return values[k - d]
                return Var(k - n)
            case Unit() | Num() | Loc() | Hole():
                return t
            case Rand(a):
                return Rand(go(a, d))
            case Pred(a):
                return Pred(go(a, d))
            case Succ(a):
                return Succ(go(a, d))
            case Proj(i, a):
                return Proj(i, go(a, d))
            case Inl(a):
                return Inl(go(a, d))
            case Inr(a):
                return Inr(go(a, d))
            case TypeFun(a):
                return TypeFun(go(a, d))
            case TypeApp(a, ann):
                return TypeApp(go(a, d), ann)
            case Pack(a, ann, wit):
                return Pack(go(a, d), ann, wit)
            case Fold(a, ann):
                return Fold(go(a, d), ann)
            case Unfold(a):
                return Unfold(go(a, d))
            case Ref(a):
                return Ref(go(a, d))
            case Deref(a):
                return Deref(go(a, d))
            case Ifz(s, t1, t2):
                return Ifz(go(s, d), go(t1, d), go(t2, d))
            case Pair(l, r):
                return Pair(go(l, d), go(r, d))
            case App(f, a):
                return App(go(f, d), go(a, d))
            case Assign(l, r):
                return Assign(go(l, d), go(r, d))
            case Fun(b, ann):
                return Fun(go(b, d + 1), ann, t.hint)
            case Match(s, l, r):
                return Match(go(s, d), go(l, d + 1), go(r, d + 1), t.lhint, t.rhint)
            case Unpack(s, b):
                return Unpack(go(s, d), go(b, d + 1), t.hint)
        raise TypeError(f"unexpected term: {t!r}")

    for v in values:
        if not is_closed(v):
            raise ValueError("substituted values must be closed")
    return go(t, depth)


def subst_type_in_term(t: Term, j: int, repl: Type) -> Term:
    """Substitute `repl` for the type variable with index j inside every type
    annotation of `t`.  Term-level type binders (tfn, unpack) shift j."""

    def go_ty(ty: Optional[Type], j: int) -> Optional[Type]:
        return None if ty is None else subst_type(ty, j, repl)

    def go(t: Term, j: int) -> Term:
        match t:
            case Var() | Unit() | Num() | Loc() | Hole():
                return t
            case Rand(a):
                return Rand(go(a, j))
            case Pred(a):
                return Pred(go(a, j))
            case Succ(a):
                return Succ(go(a, j))
            case Proj(i, a):
                return Proj(i, go(a, j))
            case Inl(a):
                return Inl(go(a, j))
            case Inr(a):
                return Inr(go(a, j))
            case TypeFun(a):
                return TypeFun(go(a, j + 1))
            case TypeApp(a, ann):
                return TypeApp(go(a, j), go_ty(ann, j))
            case Pack(a, ann, wit):
                return Pack(go(a, j), go_ty(ann, j), go_ty(wit, j))
            case Fold(a, ann):
                return Fold(go(a, j), go_ty(ann, j))
            case Unfold(a):
                return Unfold(go(a, j))
            case Ref(a):
                return Ref(go(a, j))
            case Deref(a):
                return Deref(go(a, j))
            case Ifz(s, t1, t2):
                return Ifz(go(s, j), go(t1, j), go(t2, j))
            case Pair(l, r):
                return Pair(go(l, j), go(r, j))
            case App(f, a):
                return App(go(f, j), go(a, j))
            case Assign(l, r):
                return Assign(go(l, j), go(r, j))
            case Fun(b, ann):
                return Fun(go(b, j), go_ty(ann, j), t.hint)
            case Match(s, l, r):
                return Match(go(s, j), go(l, j), go(r, j), t.lhint, t.rhint)
            case Unpack(s, b):
                return Unpack(go(s, j), go(b, j + 1), t.hint)
        raise TypeError(f"unexpected term: {t!r}")

    return go(t, j)


def has_annotations(t: Term) -> bool:
    """True iff any type annotation occurs in `t`."""
    match t:
        case Var() | Unit() | Num() | Loc() | Hole():
            return False
        case Fun(b, ann) | Fold(b, ann) | TypeApp(b, ann):
            return ann is not None or has_annotations(b)
        case Pack(b, ann, wit):
            return ann is not None or wit is not None or has_annotations(b)
        case Rand(a) | Pred(a) | Succ(a) | Proj(_, a) | Inl(a) | Inr(a) \
                | TypeFun(a) | Unfold(a) | Ref(a) | Deref(a):
            return has_annotations(a)
        case Ifz(s, t1, t2):
            return has_annotations(s) or has_annotations(t1) or has_annotations(t2)
        case Pair(l, r) | App(l, r) | Assign(l, r) | Unpack(l, r):
            return has_annotations(l) or has_annotations(r)
        case Match(s, l, r):
            return has_annotations(s) or has_annotations(l) or has_annotations(r)
    raise TypeError(f"unexpected term: {t!r}")


def erase(t: Term) -> Term:
    """Strip all type annotations, yielding a term of the type-free grammar.
    The bare [] marker of type application is kept."""
    match t:
        case Var() | Unit() | Num() | Loc() | Hole():
            return t
        case Rand(a):
            return Rand(erase(a))
        case Pred(a):
            return Pred(erase(a))
        case Succ(a):
            return Succ(erase(a))
        case Proj(i, a):
            return Proj(i, erase(a))
        case Inl(a):
            return Inl(erase(a))
        case Inr(a):
            return Inr(erase(a))
        case TypeFun(a):
            return TypeFun(erase(a))
        case TypeApp(a, _):
            return TypeApp(erase(a), None)
        case Pack(a, _, _):
            return Pack(erase(a), None, None)
        case Fold(a, _):
            return Fold(erase(a), None)
        case Unfold(a):
            return Unfold(erase(a))
        case Ref(a):
            return Ref(erase(a))
        case Deref(a):
            return Deref(erase(a))
        case Ifz(s, t1, t2):
            return Ifz(erase(s), erase(t1), erase(t2))
        case Pair(l, r):
            return Pair(erase(l), erase(r))
        case App(f, a):
            return App(erase(f), erase(a))
        case Assign(l, r):
            return Assign(erase(l), erase(r))
        case Fun(b, _):
            return Fun(erase(b), None, t.hint)
        case Match(s, l, r):
            return Match(erase(s), erase(l), erase(r), t.lhint, t.rhint)
        case Unpack(s, b):
            return Unpack(erase(s), erase(b), t.hint)
    raise TypeError(f"unexpected term: {t!r}")


def locations(t: Term) -> list[int]:
    """Store locations occurring in `t`, in preorder, with duplicates."""
    out: list[int] = []

    def go(t: Term) -> None:
        match t:
            case Loc(i):
                out.append(i)
            case Var() | Unit() | Num() | Hole():
                pass
            case Rand(a) | Pred(a) | Succ(a) | Proj(_, a) | Inl(a) | Inr(a) \
                    | TypeFun(a) | TypeApp(a) | Pack(a) | Fold(a) | Unfold(a) \
                    | Ref(a) | Deref(a) | Fun(a):
                go(a)
            case Ifz(s, t1, t2):
                go(s); go(t1); go(t2)
            case Pair(l, r) | App(l, r) | Assign(l, r) | Unpack(l, r):
                go(l); go(r)
            case Match(s, l, r):
                go(s); go(l); go(r)
            case _:
                raise TypeError(f"unexpected term: {t!r}")

    go(t)
    return out


def rename_locations(t: Term, mapping: dict[int, int]) -> Term:
    match t:
        case Loc(i):
            return Loc(mapping[i])
        case Var() | Unit() | Num() | Hole():
            return t
        case Rand(a):
            return Rand(rename_locations(a, mapping))
        case Pred(a):
            return Pred(rename_locations(a, mapping))
        case Succ(a):
            return Succ(rename_locations(a, mapping))
        case Proj(i, a):
            return Proj(i, rename_locations(a, mapping))
        case Inl(a):
            return Inl(rename_locations(a, mapping))
        case Inr(a):
            return Inr(rename_locations(a, mapping))
        case TypeFun(a):
            return TypeFun(rename_locations(a, mapping))
        case TypeApp(a, ann):
            return TypeApp(rename_locations(a, mapping), ann)
        case Pack(a, ann, wit):
            return Pack(rename_locations(a, mapping), ann, wit)
        case Fold(a, ann):
            return Fold(rename_locations(a, mapping), ann)
        case Unfold(a):
            return Unfold(rename_locations(a, mapping))
        case Ref(a):
            return Ref(rename_locations(a, mapping))
        case Deref(a):
            return Deref(rename_locations(a, mapping))
        case Ifz(s, t1, t2):
            return Ifz(rename_locations(s, mapping), rename_locations(t1, mapping),
                       rename_locations(t2, mapping))
        case Pair(l, r):
            return Pair(rename_locations(l, mapping), rename_locations(r, mapping))
        case App(f, a):
            return App(rename_locations(f, mapping), rename_locations(a, mapping))
        case Assign(l, r):
            return Assign(rename_locations(l, mapping), rename_locations(r, mapping))
        case Fun(b, ann):
            return Fun(rename_locations(b, mapping), ann, t.hint)
        case Match(s, l, r):
            return Match(rename_locations(s, mapping), rename_locations(l, mapping),
                         rename_locations(r, mapping), t.lhint, t.rhint)
        case Unpack(s, b):
            return Unpack(rename_locations(s, mapping), rename_locations(b, mapping), t.hint)
    raise TypeError(f"unexpected term: {t!r}")


# ---------------------------------------------------------------------------
# Evaluation contexts
# ---------------------------------------------------------------------------

class Frame:
    """One evaluation-context production with its hole removed."""
    __slots__ = ()


@dataclass(frozen=True)
class FPairL(Frame):
    right: Term


@dataclass(frozen=True)
class FPairR(Frame):
    left: Term  # must be a value


@dataclass(frozen=True)
class FAppL(Frame):
    arg: Term


@dataclass(frozen=True)
class FAppR(Frame):
    fun: Term  # must be a value


@dataclass(frozen=True)
class FProj(Frame):
    index: int


@dataclass(frozen=True)
class FInl(Frame):
    pass


@dataclass(frozen=True)
class FInr(Frame):
    pass


@dataclass(frozen=True)
class FMatch(Frame):
    left: Term
    right: Term
    lhint: str = field(default="x", compare=False, repr=False)
    rhint: str = field(default="y", compare=False, repr=False)


@dataclass(frozen=True)
class FTypeApp(Frame):
    ann: Optional[Type] = None


@dataclass(frozen=True)
class FPack(Frame):
    ann: Optional[Type] = None
    witness: Optional[Type] = None


@dataclass(frozen=True)
class FUnpack(Frame):
    body: Term
    hint: str = field(default="x", compare=False, repr=False)


@dataclass(frozen=True)
class FFold(Frame):
    ann: Optional[Type] = None


@dataclass(frozen=True)
class FUnfold(Frame):
    pass


@dataclass(frozen=True)
class FIfz(Frame):
    then: Term
    els: Term


@dataclass(frozen=True)
class FRand(Frame):
    pass


@dataclass(frozen=True)
class FPred(Frame):
    pass


@dataclass(frozen=True)
class FSucc(Frame):
    pass


@dataclass(frozen=True)
class FRef(Frame):
    pass


@dataclass(frozen=True)
class FAssignL(Frame):
    value: Term


@dataclass(frozen=True)
class FAssignR(Frame):
    target: Term  # must be a value


@dataclass(frozen=True)
class FDeref(Frame):
    pass


# A context is a tuple of frames, outermost first.  Composition is
# concatenation: plug(e1 + e2, t) == plug(e1, plug(e2, t)).
EvalContext = tuple[Frame, ...]

EMPTY_CONTEXT: EvalContext = ()


def plug_frame(f: Frame, t: Term) -> Term:
    match f:
        case FPairL(r):
            return Pair(t, r)
        case FPairR(l):
            return Pair(l, t)
        case FAppL(a):
            return App(t, a)
        case FAppR(v):
            return App(v, t)
        case FProj(i):
            return Proj(i, t)
        case FInl():
            return Inl(t)
        case FInr():
            return Inr(t)
        case FMatch(l, r):
            return Match(t, l, r, f.lhint, f.rhint)
        case FTypeApp(ann):
            return TypeApp(t, ann)
        case FPack(ann, wit):
            return Pack(t, ann, wit)
        case FUnpack(b):
            return Unpack(t, b, f.hint)
        case FFold(ann):
            return Fold(t, ann)
        case FUnfold():
            return Unfold(t)
        case FIfz(t1, t2):
            return Ifz(t, t1, t2)
        case FRand():
            return Rand(t)
        case FPred():
            return Pred(t)
        case FSucc():
            return Succ(t)
        case FRef():
            return Ref(t)
        case FAssignL(v):
            return Assign(t, v)
        case FAssignR(v):
            return Assign(v, t)
        case FDeref():
            return Deref(t)
    raise TypeError(f"unexpected frame: {f!r}")


def plug(ctx: EvalContext, t: Term) -> Term:
    for f in reversed(ctx):
        t = plug_frame(f, t)
    return t


def compose(outer: EvalContext, inner: EvalContext) -> EvalContext:
    return outer + inner


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecValue:
    pass


@dataclass(frozen=True)
class DecStuck:
    pass


@dataclass(frozen=True)
class DecRedex:
    context: EvalContext
    redex: Term


Decomposition = Union[DecValue, DecStuck, DecRedex]

DEC_VALUE = DecValue()
DEC_STUCK = DecStuck()


def is_redex(t: Term) -> bool:
    """True iff a basic reduction rule applies to `t` itself (all children in
    evaluation position are values)."""
    match t:
        case App(Fun(), a):
            return is_value(a)
        case Proj(_, Pair(l, r)):
            return is_value(l) and is_value(r)
        case Unfold(Fold(v)):
            return is_value(v)
        case Unpack(Pack(v), _):
            return is_value(v)
        case TypeApp(TypeFun()):
            return True
        case Match(Inl(v)) | Match(Inr(v)):
            return is_value(v)
        case Rand(Num()) | Pred(Num()) | Succ(Num()) | Ifz(Num()) | Ref(Num()) | Deref(Loc()):
            return True
        case Assign(Loc(), Num()):
            return True
        case _:
            return False


def decompose(t: Term) -> Decomposition:
    """Unique decomposition of a closed term into Value, Stuck, or E[redex]."""
    if is_value(t):
        return DEC_VALUE
    frames: list[Frame] = []
    cur = t
    while True:
        frame: Optional[Frame] = None
        child: Optional[Term] = None
        match cur:
            case Pair(l, r):
                if not is_value(l):
                    frame, child = FPairL(r), l
                elif not is_value(r):
                    frame, child = FPairR(l), r
            case App(f, a):
                if not is_value(f):
                    frame, child = FAppL(a), f
                elif not is_value(a):
                    frame, child = FAppR(f), a
            case Assign(l, r):
                if not is_value(l):
                    frame, child = FAssignL(r), l
                elif not is_value(r):
                    frame, child = FAssignR(l), r
            case Proj(i, a):
                if not is_value(a):
                    frame, child = FProj(i), a
            case Inl(a):
                if not is_value(a):
                    frame, child = FInl(), a
            case Inr(a):
                if not is_value(a):
                    frame, child = FInr(), a
            case Match(s, l, r):
                if not is_value(s):
                    frame, child = FMatch(l, r, cur.lhint, cur.rhint), s
            case TypeApp(f, ann):
                if not is_value(f):
                    frame, child = FTypeApp(ann), f
            case Pack(a, ann, wit):
                if not is_value(a):
                    frame, child = FPack(ann, wit), a
            case Unpack(s, b):
                if not is_value(s):
                    frame, child = FUnpack(b, cur.hint), s
            case Fold(a, ann):
                if not is_value(a):
                    frame, child = FFold(ann), a
            case Unfold(a):
                if not is_value(a):
                    frame, child = FUnfold(), a
            case Ifz(s, t1, t2):
                if not is_value(s):
                    frame, child = FIfz(t1, t2), s
            case Rand(a):
                if not is_value(a):
                    frame, child = FRand(), a
            case Pred(a):
                if not is_value(a):
                    frame, child = FPred(), a
            case Succ(a):
                if not is_value(a):
                    frame, child = FSucc(), a
            case Ref(a):
                if not is_value(a):
                    frame, child = FRef(), a
            case Deref(a):
                if not is_value(a):
                    frame, child = FDeref(), a
        if frame is not None:
            assert child is not None
            if is_value(child):
                raise AssertionError("descended into a value")
            frames.append(frame)
            cur = child
            continue
        if is_redex(cur):
            return DecRedex(tuple(frames), cur)
        return DEC_STUCK
