"""Concrete syntax: lexer and recursive-descent parser.

Surface grammar (application binds tightest; `:=` and `;` lowest; all binary
sugar left-associative; `fn`/`ifz`/`match`/`let`/`pack`/`unpack` bodies extend
as far right as possible):

    term ::= ident | "()" | digits | "rand" u | "succ" u | "pred" u
           | "fst" u | "snd" u | "inl" u | "inr" u | "ref" u | "!" u
           | "tfn" u | "fold" u ["at" type] | "unfold" u
           | "ifz" t "then" t "else" t
           | "fn" binder "=>" t | t t | "(" t "," t ")"
           | "match" t "with" "inl" x "=>" t "|" "inr" y "=>" t
           | t "[" [type] "]" | "pack" t "as" type
           | "unpack" t "as" x "in" t | "let" x "=" t "in" t
           | t "(+)" t | t ";" t | t ":=" t | "(" t ")"
    type ::= "unit" | "nat" | ident | type "*" type | type "+" type
           | type "->" type | "mu" a "." type | "all" a "." type
           | "ex" a "." type | "ref" "nat" | "(" type ")"

Sugar expands at parse time: `let x = e in e2` to `(fn x => e2) e`,
`e ; e2` to `(fn _ => e2) e`, and `e1 (+) e2` to `ifz rand 2 then e1 else e2`.

Type abstraction binds no type-variable name.  Annotations under `tfn` refer
to the surrounding abstractions through fixed names: the outermost enclosing
`tfn` is `a`, the next `b`, and so on.  `mu`/`all`/`ex` binders inside an
annotation shadow these as usual.  The type variable introduced by `unpack`
cannot be named; values of the abstract type flow through `let` and
application, which need no annotation.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

from .syntax import (
    App, Assign, Deref, Fold, Fun, Ifz, Inl, Inr, Match, Num, Pack, Pair,
    Pred, Proj, Rand, Ref, Succ, Term, TypeApp, TypeFun, Unfold, Unit,
    Unpack, Var,
    NAT, REFNAT, UNIT, TArrow, TExists, TForall, TMu, TProd, TSum, TVar, Type,
)


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


KEYWORDS = {
    "fn", "tfn", "fold", "unfold", "pack", "unpack", "inl", "inr", "match",
    "with", "ifz", "then", "else", "rand", "succ", "pred", "ref", "let",
    "in", "as", "at", "fst", "snd", "mu", "all", "ex", "unit", "nat",
}

SYMBOLS = ["(+)", ":=", "=>", "->", "(", ")", "[", "]", ",", ".", ":", ";",
           "*", "+", "!", "|", "="]

IDENT_START = set(string.ascii_letters + "_")
IDENT_CONT = set(string.ascii_letters + string.digits + "_'")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "num" | "kw" | "sym" | "eof"
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(Token("num", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c in IDENT_START:
            j = i
            while j < n and src[j] in IDENT_CONT:
                j += 1
            text = src[i:j]
            toks.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if src.startswith(sym, i):
                toks.append(Token("sym", sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# Tokens that can begin a term, for application juxtaposition.
_TERM_START_KW = {"fn", "tfn", "fold", "unfold", "pack", "unpack", "inl",
                  "inr", "match", "ifz", "rand", "succ", "pred", "ref",
                  "let", "fst", "snd"}
_TERM_START_SYM = {"(", "!"}

_AUTO_TVARS = string.ascii_lowercase


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.pos = 0
        self.term_binders: list[str | None] = []
        # entries: (name or None, is_tfn)
        self.type_binders: list[tuple[str | None, bool]] = []

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def at_sym(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text == text

    def at_kw(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "kw" and t.text == text

    def eat_sym(self, text: str) -> None:
        if not self.at_sym(text):
            t = self.peek()
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        self.advance()

    def eat_kw(self, text: str) -> None:
        if not self.at_kw(text):
            t = self.peek()
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        self.advance()

    def eat_ident(self) -> str:
        t = self.peek()
        if t.kind != "ident":
            raise ParseError(f"expected identifier, found {t.text!r}", t.line, t.col)
        self.advance()
        return t.text

    def fail(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.line, t.col)

    # -- types -------------------------------------------------------------

    def parse_type(self) -> Type:
        left = self.parse_type_sum()
        if self.at_sym("->"):
            self.advance()
            return TArrow(left, self.parse_type())
        return left

    def parse_type_sum(self) -> Type:
        left = self.parse_type_prod()
        while self.at_sym("+"):
            self.advance()
            left = TSum(left, self.parse_type_prod())
        return left

    def parse_type_prod(self) -> Type:
        left = self.parse_type_atom()
        while self.at_sym("*"):
            self.advance()
            left = TProd(left, self.parse_type_atom())
        return left

    def parse_type_atom(self) -> Type:
        t = self.peek()
        if t.kind == "kw":
            if t.text == "unit":
                self.advance()
                return UNIT
            if t.text == "nat":
                self.advance()
                return NAT
            if t.text == "ref":
                self.advance()
                self.eat_kw("nat")
                return REFNAT
            if t.text in ("mu", "all", "ex"):
                self.advance()
                name = self.eat_ident()
                self.eat_sym(".")
                self.type_binders.append((name, False))
                try:
                    body = self.parse_type()
                finally:
                    self.type_binders.pop()
                ctor = {"mu": TMu, "all": TForall, "ex": TExists}[t.text]
                return ctor(body, name)
        if t.kind == "ident":
            self.advance()
            return TVar(self.resolve_tvar(t))
        if self.at_sym("("):
            self.advance()
            ty = self.parse_type()
            self.eat_sym(")")
            return ty
        raise self.fail(f"expected a type, found {t.text!r}")

    def resolve_tvar(self, tok: Token) -> int:
        for depth, (name, _) in enumerate(reversed(self.type_binders)):
            if name == tok.text:
                return depth
        raise ParseError(f"unbound type variable {tok.text!r}", tok.line, tok.col)

    # -- terms -------------------------------------------------------------

    def parse_term(self) -> Term:
        left = self.parse_choice()
        while True:
            if self.at_sym(":="):
                self.advance()
                left = Assign(left, self.parse_choice())
            elif self.at_sym(";"):
                self.advance()
                self.term_binders.append(None)
                try:
                    rest = self.parse_choice()
                finally:
                    self.term_binders.pop()
                left = App(Fun(rest, None, "_"), left)
            else:
                return left

    def parse_choice(self) -> Term:
        left = self.parse_app()
        while self.at_sym("(+)"):
            self.advance()
            right = self.parse_app()
            left = Ifz(Rand(Num(2)), left, right)
        return left

    def starts_term(self) -> bool:
        t = self.peek()
        if t.kind in ("ident", "num"):
            return True
        if t.kind == "kw" and t.text in _TERM_START_KW:
            return True
        if t.kind == "sym" and t.text in _TERM_START_SYM:
            return True
        return False

    def parse_app(self) -> Term:
        left = self.parse_unary()
        while self.starts_term():
            left = App(left, self.parse_unary())
        return left

    def parse_unary(self) -> Term:
        t = self.peek()
        if t.kind == "sym" and t.text == "!":
            self.advance()
            return Deref(self.parse_unary())
        if t.kind == "kw":
            text = t.text
            if text == "rand":
                self.advance()
                return Rand(self.parse_unary())
            if text == "succ":
                self.advance()
                return Succ(self.parse_unary())
            if text == "pred":
                self.advance()
                return Pred(self.parse_unary())
            if text == "fst":
                self.advance()
                return Proj(1, self.parse_unary())
            if text == "snd":
                self.advance()
                return Proj(2, self.parse_unary())
            if text == "inl":
                self.advance()
                return Inl(self.parse_unary())
            if text == "inr":
                self.advance()
                return Inr(self.parse_unary())
            if text == "ref":
                self.advance()
                return Ref(self.parse_unary())
            if text == "unfold":
                self.advance()
                return Unfold(self.parse_unary())
            if text == "fold":
                self.advance()
                arg = self.parse_unary()
                ann = None
                if self.at_kw("at"):
                    self.advance()
                    ann = self.parse_type()
                return Fold(arg, ann)
            if text == "tfn":
                self.advance()
                # optional explicit binder: `tfn a => e`; bare `tfn e` binds
                # the next automatic name (outermost enclosing tfn is `a`)
                nxt = self.peek()
                if (nxt.kind == "ident" and self.pos + 1 < len(self.toks)
                        and self.toks[self.pos + 1].kind == "sym"
                        and self.toks[self.pos + 1].text == "=>"):
                    name = self.eat_ident()
                    self.eat_sym("=>")
                else:
                    name = self.next_auto_tvar(t)
                self.type_binders.append((name, True))
                try:
                    body = self.parse_unary()
                finally:
                    self.type_binders.pop()
                return TypeFun(body)
            if text == "fn":
                return self.parse_fn()
            if text == "ifz":
                self.advance()
                scrut = self.parse_term()
                self.eat_kw("then")
                then = self.parse_term()
                self.eat_kw("else")
                els = self.parse_term()
                return Ifz(scrut, then, els)
            if text == "match":
                return self.parse_match()
            if text == "pack":
                self.advance()
                body = self.parse_term()
                self.eat_kw("as")
                ann = self.parse_type()
                return Pack(body, ann)
            if text == "unpack":
                self.advance()
                scrut = self.parse_term()
                self.eat_kw("as")
                name = self.eat_ident()
                self.eat_kw("in")
                self.term_binders.append(name)
                self.type_binders.append((None, False))
                try:
                    body = self.parse_term()
                finally:
                    self.type_binders.pop()
                    self.term_binders.pop()
                return Unpack(scrut, body, name)
            if text == "let":
                self.advance()
                name = self.eat_ident()
                self.eat_sym("=")
                bound = self.parse_term()
                self.eat_kw("in")
                self.term_binders.append(name)
                try:
                    body = self.parse_term()
                finally:
                    self.term_binders.pop()
                return App(Fun(body, None, name), bound)
        return self.parse_postfix()

    def next_auto_tvar(self, tok: Token) -> str:
        count = sum(1 for _, is_tfn in self.type_binders if is_tfn)
        if count >= len(_AUTO_TVARS):
            raise ParseError("type abstractions nested too deeply", tok.line, tok.col)
        return _AUTO_TVARS[count]

    def parse_fn(self) -> Term:
        self.eat_kw("fn")
        ann = None
        if self.at_sym("("):
            self.advance()
            name = self.eat_ident()
            if self.at_sym(":"):
                self.advance()
                ann = self.parse_type()
            self.eat_sym(")")
        else:
            name = self.eat_ident()
        self.eat_sym("=>")
        self.term_binders.append(name)
        try:
            body = self.parse_term()
        finally:
            self.term_binders.pop()
        return Fun(body, ann, name)

    def parse_match(self) -> Term:
        self.eat_kw("match")
        scrut = self.parse_term()
        self.eat_kw("with")
        self.eat_kw("inl")
        lname = self.eat_ident()
        self.eat_sym("=>")
        self.term_binders.append(lname)
        try:
            left = self.parse_term()
        finally:
            self.term_binders.pop()
        self.eat_sym("|")
        self.eat_kw("inr")
        rname = self.eat_ident()
        self.eat_sym("=>")
        self.term_binders.append(rname)
        try:
            right = self.parse_term()
        finally:
            self.term_binders.pop()
        return Match(scrut, left, right, lname, rname)

    def parse_postfix(self) -> Term:
        left = self.parse_atom()
        while self.at_sym("["):
            self.advance()
            ann = None
            if not self.at_sym("]"):
                ann = self.parse_type()
            self.eat_sym("]")
            left = TypeApp(left, ann)
        return left

    def parse_atom(self) -> Term:
        t = self.peek()
        if t.kind == "num":
            self.advance()
            value = int(t.text)
            if value < 1:
                raise ParseError("numerals start at 1", t.line, t.col)
            return Num(value)
        if t.kind == "ident":
            self.advance()
            for depth, name in enumerate(reversed(self.term_binders)):
                if name == t.text:
                    return Var(depth)
            raise ParseError(f"unbound variable {t.text!r}", t.line, t.col)
        if self.at_sym("("):
            self.advance()
            if self.at_sym(")"):
                self.advance()
                return Unit()
            inner = self.parse_term()
            if self.at_sym(","):
                self.advance()
                right = self.parse_term()
                self.eat_sym(")")
                return Pair(inner, right)
            self.eat_sym(")")
            return inner
        raise self.fail(f"expected a term, found {t.text!r}")


def parse_term(src: str) -> Term:
    """Parse a closed source program."""
    p = Parser(src)
    term = p.parse_term()
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input starting at {tok.text!r}", tok.line, tok.col)
    return term


def parse_type(src: str) -> Type:
    """Parse a closed type (for --type flags and declared corpus types)."""
    p = Parser(src)
    ty = p.parse_type()
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input starting at {tok.text!r}", tok.line, tok.col)
    return ty
