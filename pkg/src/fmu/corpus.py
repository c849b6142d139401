"""Builders for the example programs exercised by the analyses and tests.

Each builder produces a ProgramSpec holding the concrete source, the parsed
term, and the declared type; construction typechecks the term at that type,
so a corpus program that builds at all is welltyped.

Numerals start at 1, which shapes several encodings here:

* `leq` compares by mutual decrementation with pred clamped at 1.
* `div2` halves even numerals by repeated double-decrement (odd inputs and
  1 clamp to 1; the counter module only ever halves even cell contents).
* The rational pairs threaded through `halt_with_sup` carry the numerator
  offset by one: the pair (k, l) denotes (k-1)/l, so zero numerators are
  representable.  Division by a zero rational would need denominator 0 and
  cannot arise on valid inputs; it is mapped to the pair meaning 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .parser import parse_term, parse_type
from .printer import pretty_type
from .syntax import Term, Type
from .typecheck import typecheck


@dataclass(frozen=True)
class ProgramSpec:
    name: str
    params: tuple
    source: str
    term: Term
    ty: Type


def _program(name: str, params: tuple, source: str, ty_src: str) -> ProgramSpec:
    term = parse_term(source)
    ty = parse_type(ty_src)
    typecheck(term, ty)
    return ProgramSpec(name, params, source, term, ty)


TWO = "unit + unit"

FIX_SRC = (
    "tfn fa => tfn fb => fn (f : (fa -> fb) -> (fa -> fb)) => fn (z : fa) => "
    "(fn (y : mu r. r -> fa -> fb) => let u = unfold y in f (fn (x : fa) => u y x)) "
    "(fold (fn (y : mu r. r -> fa -> fb) => let u = unfold y in f (fn (x : fa) => u y x)) "
    "at mu r. r -> fa -> fb) "
    "z"
)

FIX_TYPE = "all a. all b. ((a -> b) -> (a -> b)) -> (a -> b)"


@lru_cache(maxsize=None)
def fix_combinator() -> ProgramSpec:
    """Call-by-value recursion combinator."""
    return _program("fix", (), FIX_SRC, FIX_TYPE)


def omega_src(ty_src: str = "unit") -> str:
    """A closed diverging term of any type: the recursion combinator applied
    to the functional that immediately re-invokes itself."""
    return (f"({FIX_SRC}) [unit] [{ty_src}] "
            f"(fn (f : unit -> {ty_src}) => fn (x : unit) => f x) ()")


@lru_cache(maxsize=None)
def diverging(ty_src: str = "unit") -> ProgramSpec:
    return _program("omega", (ty_src,), omega_src(ty_src), ty_src)


# ---------------------------------------------------------------------------
# Arithmetic helpers (choice-free, total on numerals)
# ---------------------------------------------------------------------------

LEQ_SRC = (
    f"({FIX_SRC}) [nat] [nat -> ({TWO})] "
    f"(fn (go : nat -> nat -> ({TWO})) => fn (m : nat) => fn (n : nat) => "
    f"ifz m then inl () else (ifz n then inr () else go (pred m) (pred n)))"
)

DIV2_SRC = (
    f"({FIX_SRC}) [nat] [nat] "
    f"(fn (go : nat -> nat) => fn (m : nat) => "
    f"ifz pred m then 1 else succ (go (pred (pred m))))"
)

PLUS_SRC = (
    f"({FIX_SRC}) [nat] [nat -> nat] "
    f"(fn (go : nat -> nat -> nat) => fn (m : nat) => fn (n : nat) => "
    f"ifz m then succ n else succ (go (pred m) n))"
)

# m * n
MULT_SRC = (
    f"({FIX_SRC}) [nat] [nat -> nat] "
    f"(fn (go : nat -> nat -> nat) => fn (m : nat) => fn (n : nat) => "
    f"ifz m then n else ({PLUS_SRC}) n (go (pred m) n))"
)

# (m - 1) * n + 1: multiplication on offset-by-one numerators
OFFMULT_SRC = (
    f"({FIX_SRC}) [nat] [nat -> nat] "
    f"(fn (go : nat -> nat -> nat) => fn (m : nat) => fn (n : nat) => "
    f"ifz m then 1 else ({PLUS_SRC}) n (go (pred m) n))"
)

# m - n + 1 clamped at 1: subtraction on offset-by-one numerators
OFFMINUS_SRC = (
    f"({FIX_SRC}) [nat] [nat -> nat] "
    f"(fn (go : nat -> nat -> nat) => fn (m : nat) => fn (n : nat) => "
    f"ifz n then m else go (pred m) (pred n))"
)


@lru_cache(maxsize=None)
def arith(name: str) -> ProgramSpec:
    table = {
        "leq": (LEQ_SRC, f"nat -> nat -> ({TWO})"),
        "plus": (PLUS_SRC, "nat -> nat -> nat"),
        "mult": (MULT_SRC, "nat -> nat -> nat"),
        "div2": (DIV2_SRC, "nat -> nat"),
    }
    src, ty = table[name]
    return _program(name, (), src, ty)


# ---------------------------------------------------------------------------
# Thunks terminating with a prescribed probability
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def halt_with_prob(k: int, n: int) -> ProgramSpec:
    """Thunk of type unit -> unit that terminates with probability exactly
    k/n: draw uniformly from 1..n, stop if at most k, otherwise diverge."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    src = (f"fn (u : unit) => let y = rand {n} in "
           f"match ({LEQ_SRC}) y {k} with inl t => () | inr t => {omega_src()}")
    return _program("halt", (k, n), src, "unit -> unit")


def _offset_pair(q: Fraction) -> str:
    if q < 0 or q > 1:
        raise ValueError("sequence entries must lie in [0, 1]")
    return f"({q.numerator + 1}, {q.denominator})"


@lru_cache(maxsize=None)
def halt_with_sup(qs: tuple[Fraction, ...]) -> ProgramSpec:
    """Thunk of type unit -> unit terminating with probability sup(qs), for a
    nondecreasing rational sequence given as a finite, eventually constant
    list.  Faithful recursion: at each round draw against the current head,
    then renormalize the tail with rational pair arithmetic carried out in
    the object language (numerators offset by one, see module docstring)."""
    qs = tuple(Fraction(q) for q in qs)
    if not qs:
        raise ValueError("need at least one sequence element")
    if any(q1 > q2 for q1, q2 in zip(qs, qs[1:])):
        raise ValueError("sequence must be nondecreasing")
    cases = _offset_pair(qs[-1])
    for i in range(len(qs) - 2, -1, -1):
        scrut = "z" if i == 0 else "pred " * i + "z"
        cases = f"ifz {scrut} then {_offset_pair(qs[i])} else ({cases})"
    r0 = f"fn (z : nat) => {cases}"

    pair = "nat * nat"
    src = f"""fn (u : unit) =>
      let offminus = {OFFMINUS_SRC} in
      let offmult = {OFFMULT_SRC} in
      let mult = {MULT_SRC} in
      let leq = {LEQ_SRC} in
      let rsub = fn (p : {pair}) => fn (q : {pair}) =>
        (offminus (offmult (fst p) (snd q)) (offmult (fst q) (snd p)),
         mult (snd p) (snd q)) in
      let rdiv = fn (p : {pair}) => fn (q : {pair}) =>
        ifz fst q then (2, 1)
        else (offmult (fst p) (snd q), mult (snd p) (pred (fst q))) in
      ({FIX_SRC}) [nat -> {pair}] [unit]
        (fn (go : (nat -> {pair}) -> unit) => fn (r : nat -> {pair}) =>
          let p = r 1 in
          let y = rand (snd p) in
          match leq (succ y) (fst p) with
            inl t => ()
          | inr t => go (fn (z : nat) =>
              rdiv (rsub (r (succ z)) p) (rsub (2, 1) p)))
        ({r0})"""
    return _program("halt-seq", qs, src, "unit -> unit")


@lru_cache(maxsize=None)
def scaled_identity(k: int, n: int) -> ProgramSpec:
    """Inhabitant of all a. a -> a that runs the k/n halting thunk before
    returning its argument, scaling every observation by k/n."""
    src = f"tfn sa => {scaled_identity_body(k, n, 'sa')}"
    return _program("scaled-id", (k, n), src, "all a. a -> a")


def scaled_identity_body(k: int, n: int, tv: str = "sa") -> str:
    """The unabstracted function under scaled_identity's tfn."""
    return f"fn (x : {tv}) => ({halt_with_prob(k, n).source}) () ; x"


@lru_cache(maxsize=None)
def scaled_identity_choice(k1: int, n1: int, k2: int, n2: int) -> ProgramSpec:
    """Type abstraction over a coin flip between two scaled identities; the
    flip happens at each instantiation, not once."""
    src = (f"tfn sa => (({scaled_identity_body(k1, n1, 'sa')}) (+) "
           f"({scaled_identity_body(k2, n2, 'sa')}))")
    return _program("scaled-id-choice", (k1, n1, k2, n2), src, "all a. a -> a")


# ---------------------------------------------------------------------------
# Fair coin from a biased one
# ---------------------------------------------------------------------------

def biased_coin_src(k: int, n: int) -> str:
    """unit -> bool coin: true with probability k/n."""
    return f"fn (u : unit) => let y = rand {n} in ({LEQ_SRC}) y {k}"


@lru_cache(maxsize=None)
def fair_coin_from_biased(k: int, n: int) -> ProgramSpec:
    """Repeat double-draws of the biased k/n coin until they differ, then
    return the first draw; the result is a fair boolean."""
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    tp = biased_coin_src(k, n)
    same = ("match x with inl a => y "
            "| inr a => (match y with inl b => inr () | inr b => inl ())")
    phi = (f"fn (f : unit -> ({TWO})) => fn (u : unit) => "
           f"let x = ({tp}) () in let y = ({tp}) () in "
           f"match ({same}) with inl c => f () | inr c => x")
    src = f"({FIX_SRC}) [unit] [{TWO}] ({phi})"
    return _program("fair-coin", (k, n), src, f"unit -> {TWO}")


# ---------------------------------------------------------------------------
# Stateful counter modules
# ---------------------------------------------------------------------------

COUNTER_TYPE = "ex a. ((unit -> a) * (a -> nat)) * (a -> unit)"


@lru_cache(maxsize=None)
def counter_modules() -> tuple[ProgramSpec, ProgramSpec]:
    """Two counter implementations, contextually equivalent: one stores the
    count and increments by one, the other stores the doubled count and
    increments by two, halving on lookup.  Increment flips a fair coin and
    either does nothing or bumps the cell."""
    c1 = (f"pack ((fn (u : unit) => ref 1, fn (x : ref nat) => !x), "
          f"fn (x : ref nat) => () (+) (x := succ !x)) as {COUNTER_TYPE}")
    c2 = (f"pack ((fn (u : unit) => ref 2, fn (x : ref nat) => ({DIV2_SRC}) !x), "
          f"fn (x : ref nat) => () (+) (x := succ succ !x)) as {COUNTER_TYPE}")
    return (_program("counter1", (), c1, COUNTER_TYPE),
            _program("counter2", (), c2, COUNTER_TYPE))


def counter_observation_src(counter_src: str, increments: int) -> str:
    """Allocate, increment `increments` times, then read: a closed nat
    program observing a counter module."""
    incs = "".join("(snd c) h ; " for _ in range(increments))
    return (f"unpack ({counter_src}) as c in "
            f"let h = (fst (fst c)) () in {incs}(snd (fst c)) h")


# ---------------------------------------------------------------------------
# Lists and map
# ---------------------------------------------------------------------------

def list_ty(elem: str) -> str:
    return f"mu l. unit + ({elem} * l)"


@lru_cache(maxsize=None)
def list_library() -> dict[str, ProgramSpec]:
    nil = _program("nil", (), f"tfn ea => (fold (inl ()) at {list_ty('ea')})",
                   f"all a. {list_ty('a')}")
    cons = _program(
        "cons", (),
        f"tfn ea => fn (x : ea) => fn (xs : {list_ty('ea')}) => "
        f"fold (inr (x, xs)) at {list_ty('ea')}",
        f"all a. a -> ({list_ty('a')}) -> {list_ty('a')}")
    map_src = (
        f"tfn ea => tfn eb => fn (f : ea -> eb) => "
        f"({FIX_SRC}) [{list_ty('ea')}] [{list_ty('eb')}] "
        f"(fn (go : ({list_ty('ea')}) -> {list_ty('eb')}) => "
        f"fn (xs : {list_ty('ea')}) => "
        f"match unfold xs with "
        f"inl u => fold (inl ()) at {list_ty('eb')} "
        f"| inr p => fold (inr (f fst p, go snd p)) at {list_ty('eb')})")
    map_ = _program(
        "map", (), map_src,
        f"all a. all b. (a -> b) -> ({list_ty('a')}) -> {list_ty('b')}")
    return {"nil": nil, "cons": cons, "map": map_}


def list_value_src(elems: list[str], elem_ty: str) -> str:
    acc = f"fold (inl ()) at {list_ty(elem_ty)}"
    for e in reversed(elems):
        acc = f"fold (inr (({e}), {acc})) at {list_ty(elem_ty)}"
    return acc


def compose_src(f_src: str, g_src: str, arg_ty: str) -> str:
    """Function composition f . g as a lambda: fn x => f (g x)."""
    return f"fn (x : {arg_ty}) => ({f_src}) (({g_src}) x)"


# ---------------------------------------------------------------------------
# Booleans, one-time pad, hesitant identity
# ---------------------------------------------------------------------------

TRUE_SRC = "inl ()"
FALSE_SRC = "inr ()"
NOT_SRC = f"fn (x : {TWO}) => match x with inl u => inr () | inr u => inl ()"
XOR_SRC = (f"fn (x : {TWO}) => fn (y : {TWO}) => "
           f"match x with inl u => (match y with inl v => inr () | inr v => inl ()) "
           f"| inr u => y")
GEN_SRC = "inl () (+) inr ()"


@lru_cache(maxsize=None)
def boolean_library() -> dict[str, ProgramSpec]:
    exp = (f"fn (x : {TWO}) => fn (y : {TWO}) => "
           f"({XOR_SRC}) (x (+) y) ({GEN_SRC})")
    rnd = f"fn (x : {TWO}) => fn (y : {TWO}) => {GEN_SRC}"
    exp1 = f"fn (x : {TWO}) => fn (y : {TWO}) => ({XOR_SRC}) x ({GEN_SRC})"
    exp2 = f"fn (x : {TWO}) => fn (y : {TWO}) => ({XOR_SRC}) y ({GEN_SRC})"
    bb = f"({TWO}) -> ({TWO}) -> ({TWO})"
    return {
        "true": _program("true", (), TRUE_SRC, TWO),
        "false": _program("false", (), FALSE_SRC, TWO),
        "not": _program("not", (), NOT_SRC, f"({TWO}) -> ({TWO})"),
        "xor": _program("xor", (), XOR_SRC, f"({TWO}) -> ({TWO}) -> ({TWO})"),
        "gen": _program("gen", (), GEN_SRC, TWO),
        "exp": _program("exp", (), exp, bb),
        "rnd": _program("rnd", (), rnd, bb),
        "exp1": _program("exp1", (), exp1, bb),
        "exp2": _program("exp2", (), exp2, bb),
    }


@lru_cache(maxsize=None)
def hesitant_identity() -> ProgramSpec:
    """Identity that repeatedly flips a coin between returning now and
    retrying; it diverges only with probability zero."""
    src = (f"tfn ha => (({FIX_SRC}) [ha] [ha] "
           f"(fn (f : ha -> ha) => fn (x : ha) => x (+) f x))")
    return _program("hesitant", (), src, "all a. a -> a")


# ---------------------------------------------------------------------------
# Observer helpers (seed functions for context pools)
# ---------------------------------------------------------------------------

def bool_observer_src(expect_true: bool) -> str:
    """bool -> unit observer that terminates only on the expected branch."""
    a, b = ("()", omega_src()) if expect_true else (omega_src(), "()")
    return f"fn (b : {TWO}) => match b with inl u => {a} | inr u => {b}"


def nat_le_observer_src(bound: int) -> str:
    """nat -> unit observer terminating iff the argument is at most bound."""
    return (f"fn (m : nat) => match ({LEQ_SRC}) m {bound} with "
            f"inl u => () | inr u => {omega_src()}")


def scaling_observer_src(k: int, n: int, arg_ty: str) -> str:
    """Identity-like observer at arg_ty that succeeds with probability k/n."""
    return f"fn (x : {arg_ty}) => ({halt_with_prob(k, n).source}) () ; x"


# ---------------------------------------------------------------------------
# Registry for the command line
# ---------------------------------------------------------------------------

def _parse_fraction(s: str) -> Fraction:
    return Fraction(s)


def registry_entries() -> dict[str, tuple[str, str]]:
    """name -> (parameter help, description)"""
    return {
        "fix": ("", "call-by-value recursion combinator"),
        "omega": ("[TYPE]", "diverging term of the given type (default unit)"),
        "leq": ("", "numeral comparison, nat -> nat -> bool"),
        "plus": ("", "numeral addition"),
        "mult": ("", "numeral multiplication"),
        "div2": ("", "halving of even numerals"),
        "halt": ("K N", "unit thunk terminating with probability K/N"),
        "halt-seq": ("Q1 Q2 ...", "thunk terminating with sup of the rationals"),
        "scaled-id": ("K N", "polymorphic identity scaling observations by K/N"),
        "scaled-id-choice": ("K1 N1 K2 N2", "coin flip between two scaled identities"),
        "fair-coin": ("K N", "fair boolean from a K/N-biased coin"),
        "counter1": ("", "counter module incrementing by one"),
        "counter2": ("", "counter module storing the doubled count"),
        "nil": ("", "empty polymorphic list"),
        "cons": ("", "list constructor"),
        "map": ("", "polymorphic list map"),
        "hesitant": ("", "coin-flipping identity function"),
        "true": ("", "boolean true"),
        "false": ("", "boolean false"),
        "not": ("", "boolean negation"),
        "xor": ("", "boolean exclusive or"),
        "gen": ("", "fair boolean generator"),
        "exp": ("", "one-time-pad game: encrypt a random plaintext"),
        "rnd": ("", "one-time-pad game: ignore inputs, emit a fair boolean"),
        "exp1": ("", "one-time pad encrypting the first plaintext"),
        "exp2": ("", "one-time pad encrypting the second plaintext"),
    }


def build(name: str, params: list[str]) -> ProgramSpec:
    if name == "fix":
        return fix_combinator()
    if name == "omega":
        return diverging(params[0] if params else "unit")
    if name in ("leq", "plus", "mult", "div2"):
        return arith(name)
    if name == "halt":
        return halt_with_prob(int(params[0]), int(params[1]))
    if name == "halt-seq":
        return halt_with_sup(tuple(_parse_fraction(p) for p in params))
    if name == "scaled-id":
        return scaled_identity(int(params[0]), int(params[1]))
    if name == "scaled-id-choice":
        k1, n1, k2, n2 = (int(p) for p in params)
        return scaled_identity_choice(k1, n1, k2, n2)
    if name == "fair-coin":
        return fair_coin_from_biased(int(params[0]), int(params[1]))
    if name == "counter1":
        return counter_modules()[0]
    if name == "counter2":
        return counter_modules()[1]
    if name in ("nil", "cons", "map"):
        return list_library()[name]
    if name == "hesitant":
        return hesitant_identity()
    if name in boolean_library():
        return boolean_library()[name]
    raise KeyError(f"unknown corpus program {name!r}")
