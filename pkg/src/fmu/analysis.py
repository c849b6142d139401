"""Termination-probability and value-distribution analyses.

All probability arithmetic is exact rational (`fractions.Fraction`);
floating point appears only when callers format output.

Three iterative lower bounds share one recursion pattern:

* `termination_lower(c, n)` iterates the one-step termination operator n
  times from the zero function: values map to 1, stuck states to 0, and a
  live state to the weighted sum over its successors.  The results increase
  monotonically in n toward the true termination probability.
* `stratified_lower(c, k)` counts only choice and unfold-fold reductions.
  A state that reaches a value through silent steps alone scores 1 at every
  k >= 1; otherwise its paths through exactly one counted reduction
  (`branch_paths`) are expanded with k decremented.
* `distribution_lower(c, n)` is the distribution-valued analogue: it returns
  the sub-distribution over terminal value configurations reachable within n
  expansion stages, whose total mass equals `termination_lower(c, n)`.

`build_chain` explores the reachable configuration graph breadth-first;
`solve_exact` computes, exactly, the least solution of the termination
equations on a completely explored graph: value nodes get 1, nodes from
which no value is reachable get 0 (certifying divergence), and the rest are
solved by rational Gaussian elimination after contracting deterministic
runs.  Taking the least solution - zeroing the no-value region before
eliminating - is what makes the result the limit of the iterative bounds
rather than an arbitrary fixed point.
"""

from __future__ import annotations

import enum
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .semantics import (
    AtChoiceOrUnfold, Config, NormStuck, NormValue, SilentBudgetExceeded,
    StepKind, WeightedStep, canonicalize, silent_normalize, step_successors,
)
from .syntax import DecValue, Term, decompose

Prob = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

DEFAULT_NODE_BUDGET = 20_000
DEFAULT_SILENT_BUDGET = 200
DEFAULT_ITERS = 30


@dataclass(frozen=True)
class Effort:
    node_budget: int = DEFAULT_NODE_BUDGET
    iters: int = DEFAULT_ITERS
    silent_budget: int = DEFAULT_SILENT_BUDGET


DEFAULT_EFFORT = Effort()


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Path:
    """A reduction path: a start configuration and consecutive steps."""
    start: Config
    steps: tuple[WeightedStep, ...]

    @property
    def weight(self) -> Fraction:
        w = ONE
        for s in self.steps:
            w *= s.weight
        return w

    def last(self) -> Config:
        return self.steps[-1].target if self.steps else self.start


def branch_paths(c: Config, silent_budget: int = DEFAULT_SILENT_BUDGET) -> tuple[Path, ...]:
    """The paths from `c` that contain exactly one choice or unfold-fold
    reduction and end with it: a silent prefix followed by that one counted
    step.  Empty when `c` reaches a value or gets stuck silently."""
    cur = canonicalize(c)
    prefix: list[WeightedStep] = []
    for _ in range(silent_budget + 1):
        succs = step_successors(cur)
        if not succs:
            return ()
        if succs[0].kind is StepKind.OTHER:
            assert len(succs) == 1
            prefix.append(succs[0])
            cur = succs[0].target
            continue
        return tuple(Path(c, tuple(prefix) + (s,)) for s in succs)
    raise SilentBudgetExceeded(cur, silent_budget)


# ---------------------------------------------------------------------------
# Iterative bounds
# ---------------------------------------------------------------------------

def _with_recursion_room(depth: int):
    need = depth * 3 + 200
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)


def termination_lower(c: Config, n: int) -> Fraction:
    """Lower bound on the termination probability after n expansion stages;
    monotone nondecreasing in n, exact 1 on values (n >= 1), 0 on stuck."""
    _with_recursion_room(n)
    memo: dict[tuple[Config, int], Fraction] = {}
    succs_memo: dict[Config, list[WeightedStep]] = {}

    def succs(c: Config) -> list[WeightedStep]:
        out = succs_memo.get(c)
        if out is None:
            out = step_successors(c)
            succs_memo[c] = out
        return out

    def go(c: Config, k: int) -> Fraction:
        if k == 0:
            return ZERO
        key = (c, k)
        found = memo.get(key)
        if found is not None:
            return found
        ss = succs(c)
        if not ss:
            r = ONE if isinstance(decompose(c.term), DecValue) else ZERO
        else:
            r = sum((s.weight * go(s.target, k - 1) for s in ss), ZERO)
        memo[key] = r
        return r

    return go(canonicalize(c), n)


def stratified_lower(c: Config, k: int,
                     silent_budget: int = DEFAULT_SILENT_BUDGET) -> Fraction:
    """Probability of terminating within k choice/unfold-fold reductions;
    silent steps are free.  Monotone nondecreasing in k; 0 at k = 0."""
    _with_recursion_room(k)
    memo: dict[tuple[Config, int], Fraction] = {}
    norm_memo: dict[Config, object] = {}

    def norm(c: Config):
        r = norm_memo.get(c)
        if r is None:
            r = silent_normalize(c, silent_budget)
            norm_memo[c] = r
        return r

    def go(c: Config, k: int) -> Fraction:
        if k == 0:
            return ZERO
        key = (c, k)
        found = memo.get(key)
        if found is not None:
            return found
        match norm(c):
            case NormValue():
                r = ONE
            case NormStuck():
                r = ZERO
            case AtChoiceOrUnfold(at):
                r = sum((s.weight * go(s.target, k - 1)
                         for s in step_successors(at)), ZERO)
            case other:
                raise AssertionError(other)
        memo[key] = r
        return r

    return go(canonicalize(c), k)


class Distribution:
    """Finite sub-distribution over canonical terminal configurations."""

    def __init__(self, entries: dict[Config, Fraction]):
        self.entries = {c: p for c, p in entries.items() if p != 0}

    def mass(self) -> Fraction:
        return sum(self.entries.values(), ZERO)

    def __getitem__(self, c: Config) -> Fraction:
        return self.entries.get(c, ZERO)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Distribution) and self.entries == other.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.items())

    def __repr__(self) -> str:
        return f"Distribution({self.entries!r})"

    def project_values(self) -> dict[Term, Fraction]:
        """Marginalize the heap away, keeping only the result values."""
        out: dict[Term, Fraction] = {}
        for cfg, p in self.entries.items():
            out[cfg.term] = out.get(cfg.term, ZERO) + p
        return out


def distribution_lower(c: Config, n: int) -> Distribution:
    """Sub-distribution over the values reached within n expansion stages.
    Its mass equals termination_lower(c, n) exactly."""
    _with_recursion_room(n)
    memo: dict[tuple[Config, int], dict[Config, Fraction]] = {}
    succs_memo: dict[Config, list[WeightedStep]] = {}

    def succs(c: Config) -> list[WeightedStep]:
        out = succs_memo.get(c)
        if out is None:
            out = step_successors(c)
            succs_memo[c] = out
        return out

    def go(c: Config, k: int) -> dict[Config, Fraction]:
        if k == 0:
            return {}
        key = (c, k)
        found = memo.get(key)
        if found is not None:
            return found
        ss = succs(c)
        if not ss:
            r = {c: ONE} if isinstance(decompose(c.term), DecValue) else {}
        else:
            r = {}
            for s in ss:
                for v, p in go(s.target, k - 1).items():
                    r[v] = r.get(v, ZERO) + s.weight * p
        memo[key] = r
        return r

    return Distribution(go(canonicalize(c), n))


# ---------------------------------------------------------------------------
# Reachable chain graphs
# ---------------------------------------------------------------------------

class NodeStatus(enum.Enum):
    VALUE = "value"
    STUCK = "stuck"
    LIVE = "live"
    FRONTIER = "frontier"  # discovered but unexpanded; only when incomplete


@dataclass
class ChainGraph:
    nodes: list[Config]
    status: list[NodeStatus]
    edges: list[list[tuple[Fraction, int, StepKind]]]
    index: dict[Config, int]
    complete: bool
    root: int = 0


def build_chain(c: Config, node_budget: int = DEFAULT_NODE_BUDGET) -> ChainGraph:
    """Breadth-first exploration of the reachable canonical configurations.
    `complete` is True iff the whole reachable set fit within the budget."""
    root = canonicalize(c)
    nodes: list[Config] = [root]
    index: dict[Config, int] = {root: 0}
    status: list[NodeStatus] = [NodeStatus.FRONTIER]
    edges: list[list[tuple[Fraction, int, StepKind]]] = [[]]
    queue = [0]
    qpos = 0
    complete = True
    while qpos < len(queue):
        i = queue[qpos]
        qpos += 1
        cfg = nodes[i]
        succs = step_successors(cfg)
        if not succs:
            status[i] = (NodeStatus.VALUE
                         if isinstance(decompose(cfg.term), DecValue)
                         else NodeStatus.STUCK)
            continue
        out: list[tuple[Fraction, int, StepKind]] = []
        overflow = False
        for s in succs:
            j = index.get(s.target)
            if j is None:
                if len(nodes) >= node_budget:
                    overflow = True
                    break
                j = len(nodes)
                index[s.target] = j
                nodes.append(s.target)
                status.append(NodeStatus.FRONTIER)
                edges.append([])
                queue.append(j)
            out.append((s.weight, j, s.kind))
        if overflow:
            # leave this node unexpanded so edge weights always sum to 1
            complete = False
            edges[i] = []
            continue
        status[i] = NodeStatus.LIVE
        edges[i] = out
    if any(st is NodeStatus.FRONTIER for st in status):
        complete = False
    return ChainGraph(nodes, status, edges, index, complete)


class IncompleteChain(Exception):
    pass


def _reaches(g: ChainGraph, targets: set[int]) -> set[int]:
    """Nodes from which some node in `targets` is reachable (including the
    targets themselves)."""
    rev: list[list[int]] = [[] for _ in g.nodes]
    for i, out in enumerate(g.edges):
        for _, j, _ in out:
            rev[j].append(i)
    seen = set(targets)
    stack = list(targets)
    while stack:
        i = stack.pop()
        for j in rev[i]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def _gauss_solve(rows: list[list[Fraction]], rhs: list[list[Fraction]]) -> list[list[Fraction]]:
    """Solve rows * x = rhs exactly (rhs holds one column per solve);
    the matrix is invertible for the absorption systems built here."""
    m = len(rows)
    a = [row[:] for row in rows]
    b = [r[:] for r in rhs]
    for col in range(m):
        piv = next((r for r in range(col, m) if a[r][col] != 0), None)
        if piv is None:
            raise ArithmeticError("singular absorption system")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        inv = ONE / a[col][col]
        a[col] = [x * inv for x in a[col]]
        b[col] = [x * inv for x in b[col]]
        for r in range(m):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                b[r] = [x - f * y for x, y in zip(b[r], b[col])]
    return b


@dataclass(frozen=True)
class _Resolved:
    """Where a deterministic run from a node ends up."""
    const: Optional[Fraction] = None   # absorbed: known probability
    branch: Optional[int] = None       # reaches this branching node
    value_node: Optional[int] = None   # absorbed at this value node


def _resolve_runs(g: ChainGraph, known_zero: set[int]) -> dict[int, _Resolved]:
    """Contract deterministic (single-successor, weight-1) runs.  Every node
    resolves to a constant (value / certified-zero) or to the first
    branching node its run hits."""
    res: dict[int, _Resolved] = {}

    def resolve(i: int) -> _Resolved:
        chain: list[int] = []
        cur = i
        while True:
            found = res.get(cur)
            if found is not None:
                break
            if g.status[cur] is NodeStatus.VALUE:
                found = _Resolved(const=ONE, value_node=cur)
                break
            if g.status[cur] is NodeStatus.STUCK or cur in known_zero:
                found = _Resolved(const=ZERO)
                break
            out = g.edges[cur]
            if len(out) > 1:
                found = _Resolved(branch=cur)
                break
            chain.append(cur)
            cur = out[0][1]
        for n in chain:
            res[n] = found
        res[cur] = found
        return found

    for i in range(len(g.nodes)):
        resolve(i)
    return res


def solve_exact(g: ChainGraph) -> list[Fraction]:
    """Exact termination probability of every node of a complete chain."""
    if not g.complete:
        raise IncompleteChain("cannot solve an incompletely explored chain")
    values = {i for i, st in enumerate(g.status) if st is NodeStatus.VALUE}
    can_reach_value = _reaches(g, values)
    known_zero = {i for i in range(len(g.nodes)) if i not in can_reach_value}
    res = _resolve_runs(g, known_zero)

    branch_ids = sorted({r.branch for r in res.values() if r.branch is not None})
    pos = {b: idx for idx, b in enumerate(branch_ids)}
    m = len(branch_ids)
    if m:
        rows = [[ZERO] * m for _ in range(m)]
        rhs = [[ZERO] for _ in range(m)]
        for b in branch_ids:
            r = pos[b]
            rows[r][r] = ONE
            for w, j, _ in g.edges[b]:
                tgt = res[j]
                if tgt.const is not None:
                    rhs[r][0] += w * tgt.const
                else:
                    rows[r][pos[tgt.branch]] -= w
        sol = _gauss_solve(rows, rhs)
        branch_prob = {b: sol[pos[b]][0] for b in branch_ids}
    else:
        branch_prob = {}

    out: list[Fraction] = []
    for i in range(len(g.nodes)):
        r = res[i]
        out.append(r.const if r.const is not None else branch_prob[r.branch])
    return out


def exact_distribution(g: ChainGraph) -> Distribution:
    """Exact absorption distribution over value nodes from the root of a
    complete chain, solved with one vector-valued elimination."""
    if not g.complete:
        raise IncompleteChain("cannot solve an incompletely explored chain")
    values = {i for i, st in enumerate(g.status) if st is NodeStatus.VALUE}
    can_reach_value = _reaches(g, values)
    known_zero = {i for i in range(len(g.nodes)) if i not in can_reach_value}
    res = _resolve_runs(g, known_zero)

    def unit_vec(value_node: int) -> dict[int, Fraction]:
        return {value_node: ONE}

    branch_ids = sorted({r.branch for r in res.values() if r.branch is not None})
    pos = {b: idx for idx, b in enumerate(branch_ids)}
    m = len(branch_ids)
    branch_dist: dict[int, dict[int, Fraction]] = {}
    if m:
        rows = [[ZERO] * m for _ in range(m)]
        rhs: list[dict[int, Fraction]] = [dict() for _ in range(m)]
        for b in branch_ids:
            r = pos[b]
            rows[r][r] = ONE
            for w, j, _ in g.edges[b]:
                tgt = res[j]
                if tgt.branch is not None:
                    rows[r][pos[tgt.branch]] -= w
                elif tgt.value_node is not None:
                    v = rhs[r]
                    v[tgt.value_node] = v.get(tgt.value_node, ZERO) + w
        sol = _gauss_vec_solve(rows, rhs)
        branch_dist = {b: sol[pos[b]] for b in branch_ids}

    root = res[g.root]
    if root.const is not None:
        vec = unit_vec(root.value_node) if root.value_node is not None else {}
    else:
        vec = branch_dist[root.branch]
    return Distribution({g.nodes[v]: p for v, p in vec.items() if p != 0})


def _gauss_vec_solve(rows: list[list[Fraction]],
                     rhs: list[dict[int, Fraction]]) -> list[dict[int, Fraction]]:
    """Gaussian elimination with sparse vector-valued right-hand sides."""
    m = len(rows)
    a = [row[:] for row in rows]
    b = [dict(v) for v in rhs]

    def scale(v: dict[int, Fraction], f: Fraction) -> dict[int, Fraction]:
        return {k: x * f for k, x in v.items()}

    def sub(v: dict[int, Fraction], w: dict[int, Fraction], f: Fraction) -> dict[int, Fraction]:
        out = dict(v)
        for k, x in w.items():
            nx = out.get(k, ZERO) - f * x
            if nx == 0:
                out.pop(k, None)
            else:
                out[k] = nx
        return out

    for col in range(m):
        piv = next((r for r in range(col, m) if a[r][col] != 0), None)
        if piv is None:
            raise ArithmeticError("singular absorption system")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        inv = ONE / a[col][col]
        a[col] = [x * inv for x in a[col]]
        b[col] = scale(b[col], inv)
        for r in range(m):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                b[r] = sub(b[r], b[col], f)
    return b


def termination_table(g: ChainGraph, nmax: int) -> list[list[Fraction]]:
    """Stage table of the one-step termination operator over a chain:
    result[n][i] is the stage-n lower bound at node i.  Agrees with
    termination_lower(node, n) on complete chains."""
    if not g.complete:
        raise IncompleteChain("stage table needs a complete chain")
    size = len(g.nodes)
    table = [[ZERO] * size]
    values = [st is NodeStatus.VALUE for st in g.status]
    for _ in range(nmax):
        prev = table[-1]
        cur = [ZERO] * size
        for i in range(size):
            if values[i]:
                cur[i] = ONE
            else:
                acc = ZERO
                for w, j, _ in g.edges[i]:
                    acc += w * prev[j]
                cur[i] = acc
        table.append(cur)
    return table


def stratified_table(g: ChainGraph, kmax: int) -> list[list[Fraction]]:
    """Stage table of the counted-step operator over a chain: result[k][i]
    is the probability of reaching a value from node i within k choice or
    unfold-fold reductions.  Agrees with stratified_lower on complete
    chains."""
    if not g.complete:
        raise IncompleteChain("stage table needs a complete chain")
    size = len(g.nodes)

    # silently resolve each node: follow weight-1 OTHER edges to a value, a
    # stuck node, a counted-redex node, or a silent cycle (divergent).
    resolved: list[Optional[object]] = [None] * size

    def resolve(i: int):
        trail: list[int] = []
        on_trail: set[int] = set()
        cur = i
        while True:
            if resolved[cur] is not None:
                found = resolved[cur]
                break
            if cur in on_trail:
                found = ("none",)  # silent cycle: diverges
                break
            if g.status[cur] is NodeStatus.VALUE:
                found = ("value",)
                break
            if g.status[cur] is NodeStatus.STUCK:
                found = ("none",)
                break
            out = g.edges[cur]
            if out[0][2] is not StepKind.OTHER:
                found = ("branch", cur)
                break
            trail.append(cur)
            on_trail.add(cur)
            cur = out[0][1]
        for n in trail:
            resolved[n] = found
        resolved[cur] = found
        return found

    for i in range(size):
        resolve(i)

    table = [[ZERO] * size]
    for _ in range(kmax):
        prev = table[-1]
        cur = [ZERO] * size
        for i in range(size):
            r = resolved[i]
            if r[0] == "value":
                cur[i] = ONE
            elif r[0] == "branch":
                acc = ZERO
                for w, j, _ in g.edges[r[1]]:
                    acc += w * prev[j]
                cur[i] = acc
        table.append(cur)
    return table


# ---------------------------------------------------------------------------
# Combined bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bounds:
    lower: Fraction
    upper: Fraction
    exact: bool


def prob_bounds(c: Config, effort: Effort = DEFAULT_EFFORT) -> Bounds:
    """Sound bracketing of the termination probability.  On a completely
    explored chain the bracket collapses to the exact solver answer;
    otherwise the lower bound comes from the iterative stages and the upper
    bound discounts the mass certain to be absorbed in stuck or certified
    divergent regions of the explored graph."""
    g = build_chain(c, effort.node_budget)
    if g.complete:
        p = solve_exact(g)[g.root]
        return Bounds(p, p, True)
    lower = termination_lower(c, effort.iters)
    upper = ONE - _certified_failure_mass(g)
    return Bounds(lower, upper, False)


def _certified_failure_mass(g: ChainGraph) -> Fraction:
    """Probability, from the root, of reaching a stuck node or a region of
    the explored graph from which neither a value nor the frontier is
    reachable (such regions certifiably diverge).  Frontier nodes count as
    escaping, so this is a sound lower bound on the failure probability."""
    escapes = {i for i, st in enumerate(g.status)
               if st in (NodeStatus.VALUE, NodeStatus.FRONTIER)}
    may_succeed = _reaches(g, escapes)
    bad = {i for i, st in enumerate(g.status)
           if st is NodeStatus.STUCK or i not in may_succeed}
    if g.root in bad:
        return ONE

    # absorption into `bad`, with values and the frontier absorbing at 0
    can_reach_bad = _reaches(g, bad)
    memo: dict[int, object] = {}

    def resolve(i: int):
        chain = []
        cur = i
        while True:
            found = memo.get(cur)
            if found is not None:
                break
            if cur in bad:
                found = ("const", ONE)
                break
            if cur not in can_reach_bad or g.status[cur] in (
                    NodeStatus.VALUE, NodeStatus.FRONTIER):
                found = ("const", ZERO)
                break
            out = g.edges[cur]
            if len(out) > 1:
                found = ("branch", cur)
                break
            chain.append(cur)
            cur = out[0][1]
        for nd in chain:
            memo[nd] = found
        memo[i] = found
        return found

    for i in range(len(g.nodes)):
        resolve(i)
    branch_ids = sorted({v for k, v in memo.values() if k == "branch"})
    pos = {b: idx for idx, b in enumerate(branch_ids)}
    m = len(branch_ids)
    branch_val: dict[int, Fraction] = {}
    if m:
        rows = [[ZERO] * m for _ in range(m)]
        rhs = [[ZERO] for _ in range(m)]
        for b in branch_ids:
            r = pos[b]
            rows[r][r] = ONE
            for w, j, _ in g.edges[b]:
                kind, v = memo[j]
                if kind == "const":
                    rhs[r][0] += w * v
                else:
                    rows[r][pos[v]] -= w
        sol = _gauss_solve(rows, rhs)
        branch_val = {b: sol[pos[b]][0] for b in branch_ids}
    kind, v = memo[g.root]
    return v if kind == "const" else branch_val[v]
