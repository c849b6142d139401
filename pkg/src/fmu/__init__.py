"""Interpreter and exact probabilistic analyses for a polymorphic
call-by-value calculus with a uniform choice primitive and first-order
references: parsing, bidirectional typechecking, weighted small-step
semantics, exact termination-probability and value-distribution analyses on
the reachable Markov chain, and a contextual-equivalence testing harness."""

__version__ = "0.1.0"
