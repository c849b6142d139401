import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmu.parser import ParseError, parse_term, parse_type
from fmu.printer import pretty, pretty_type
from fmu.syntax import (
    App, DecRedex, DecStuck, DecValue, Fun, Ifz, Num, Pair, Proj, Rand,
    Succ, Term, TypeApp, TypeFun, Unit, Var, compose, decompose, erase,
    is_value, plug, substitute,
)
from gen import gen_program


def test_parse_rand_numeral():
    assert parse_term("rand 2") == Rand(Num(2))


def test_parse_type_abstraction():
    t = parse_term("tfn (fn (x : nat) => x)")
    assert t == TypeFun(Fun(Var(0), parse_type("nat")))


def test_parse_choice_sugar():
    t = parse_term("rand 3 (+) 2")
    assert t == Ifz(Rand(Num(2)), Rand(Num(3)), Num(2))


def test_parse_let_sugar():
    t = parse_term("let x = 1 in succ x")
    assert t == App(Fun(Succ(Var(0))), Num(1))


def test_parse_seq_sugar():
    t = parse_term("1 ; 2")
    assert t == App(Fun(Num(2)), Num(1))


def test_seq_rhs_sees_outer_binders():
    # the dummy binder inserted by `;` must shift indices in the right arm
    t = parse_term("fn x => 1 ; x")
    assert t == Fun(App(Fun(Var(1)), Num(1)))


def test_numeral_zero_rejected():
    with pytest.raises(ParseError):
        parse_term("0")
    with pytest.raises(ParseError):
        parse_term("rand 0")


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse_term("fn x =>\n  rand )")
    assert exc.value.line == 2


def test_unbound_variable_rejected():
    with pytest.raises(ParseError):
        parse_term("x")


def test_pretty_examples():
    assert pretty(Num(3)) == "3"
    assert pretty(Fun(Var(0), None, "x")) == "fn x => x"


def test_pretty_annotation_shown():
    assert pretty(parse_term("fn (x : nat) => x")) == "fn (x : nat) => x"


ROUND_TRIP_SOURCES = [
    "()",
    "rand 2",
    "succ succ 1",
    "fst (1, ())",
    "fn x => fn y => x y",
    "tfn fn (x : a) => x",
    "tfn q => fn (x : q) => x",
    "ifz rand 3 then () else ()",
    "match inl 2 with inl x => x | inr y => succ y",
    "match inl () with inl x => match inr () with inl u => 1 | inr v => 2 | inr y => 3",
    "pack (1, fn (x : nat) => x) as ex a. a * (a -> nat)",
    "unpack (pack 1 as ex a. a) as p in ()",
    "fold (inl ()) at mu l. unit + (nat * l)",
    "unfold unfold (fold (fold 1 at mu b. nat) at mu c. mu b. nat)",
    "!(ref 2)",
    "(fn (r : ref nat) => r := succ !r) (ref 1)",
    "let f = fn x => x in f (f ())",
    "1 (+) (2 (+) 3)",
    "(fn x => x) ((fn y => y) ())",
    "tfn tfn fn (f : a -> b) => fn (x : a) => f x",
]


@pytest.mark.parametrize("src", ROUND_TRIP_SOURCES)
def test_round_trip_sources(src):
    t = parse_term(src)
    assert parse_term(pretty(t)) == t


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_round_trip_generated(seed):
    t, _ = gen_program(seed)
    assert parse_term(pretty(t)) == t


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_round_trip_erased_generated(seed):
    t, _ = gen_program(seed)
    e = erase(t)
    assert parse_term(pretty(e)) == e


TYPE_SOURCES = [
    "unit", "nat", "ref nat",
    "nat -> nat -> nat",
    "(nat -> nat) -> nat",
    "nat * unit + unit * nat",
    "mu l. unit + (nat * l)",
    "all a. a -> a",
    "ex a. (unit -> a) * (a -> nat) * (a -> unit)",
    "all a. all b. ((a -> b) -> a -> b) -> a -> b",
    "(mu l. unit + l) * nat",
]


@pytest.mark.parametrize("src", TYPE_SOURCES)
def test_type_round_trip(src):
    ty = parse_type(src)
    assert parse_type(pretty_type(ty)) == ty


# -- substitution ----------------------------------------------------------

def test_substitute_variable():
    assert substitute(Var(0), (Unit(),)) == Unit()


def test_substitute_under_binder_untouched():
    f = parse_term("fn x => x")
    assert substitute(App(f, Var(0)), (Num(1),)) == App(f, Num(1))


def test_substitute_no_capture():
    # fn y => x with x free: substituting a closed lambda for x must not
    # capture; with de Bruijn the claim is that indices stay correct.
    body = Fun(Var(1))  # fn y => x where x is the next free variable
    v = parse_term("fn z => z")
    out = substitute(body, (v,))
    assert out == Fun(parse_term("fn z => z"))


def test_substitute_identity_on_empty():
    t, _ = gen_program(7)
    assert substitute(t, ()) == t


def test_substitute_requires_closed_values():
    with pytest.raises(ValueError):
        substitute(Var(0), (Var(3),))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_substitution_composes(seed):
    # e[x -> v][y -> u] == e[x -> v, y -> u] for closed v, u
    rng = random.Random(seed)
    from fmu.syntax import NAT, UNIT
    from gen import gen_term
    e = gen_term(rng, NAT, (NAT, UNIT), depth=2)  # two free variables
    v, u = Unit(), Num(2)
    # indices: 0 :: UNIT (inner), 1 :: NAT (outer)
    one_at_a_time = substitute(substitute(e, (v,), depth=0), (u,), depth=0)
    simultaneous = substitute(e, (v, u), depth=0)
    assert one_at_a_time == simultaneous


# -- decomposition ---------------------------------------------------------

def test_decompose_innermost_redex():
    t = parse_term("succ (rand 2)")
    d = decompose(t)
    assert isinstance(d, DecRedex)
    assert d.redex == Rand(Num(2))
    assert plug(d.context, d.redex) == t


def test_decompose_value():
    assert isinstance(decompose(parse_term("()")), DecValue)
    assert isinstance(decompose(parse_term("fold (inl ())")), DecValue)


def test_decompose_stuck():
    assert isinstance(decompose(parse_term("fst ()")), DecStuck)
    assert isinstance(decompose(parse_term("() 1")), DecStuck)
    assert isinstance(decompose(parse_term("unfold ()")), DecStuck)


def test_context_composition_law():
    d1 = decompose(parse_term("succ (rand 2)"))
    d2 = decompose(parse_term("pred (rand 3)"))
    e = parse_term("()")
    assert plug(compose(d1.context, d2.context), e) == \
        plug(d1.context, plug(d2.context, e))


def _check_unique_decomposition(t: Term):
    d = decompose(t)
    kinds = [isinstance(d, DecValue), isinstance(d, DecStuck),
             isinstance(d, DecRedex)]
    assert sum(kinds) == 1
    if isinstance(d, DecValue):
        assert is_value(t)
    else:
        assert not is_value(t)
    if isinstance(d, DecRedex):
        assert plug(d.context, d.redex) == t


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_unique_decomposition_generated(seed):
    t, _ = gen_program(seed)
    _check_unique_decomposition(erase(t))
    # also check along a short reduction trace
    from fmu.semantics import from_term, step_successors
    cfg = from_term(erase(t))
    for _ in range(10):
        succs = step_successors(cfg)
        if not succs:
            break
        cfg = succs[0].target
        _check_unique_decomposition(cfg.term)
