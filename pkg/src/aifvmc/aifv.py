"""Turn a dyadic source into the MCMC problem whose type-k states are AIFV trees.

Listing every tree of ``T_k(m, n)`` below a node cap is hopeless beyond toy
sizes, so the state sets are built in three exact steps:

1. *Depth profiles.*  A tree contributes to a state only through the
   multiset of ``(depth, degree)`` pairs of its master nodes.  Profiles are
   generated bottom-up, keeping the fewest nodes per profile.  Inter0/inter1
   nodes that are neither part of a master's inter0 run nor on the mandatory
   ``0^k`` path are never generated: removing one yields a valid tree with
   fewer nodes and no deeper codeword.
2. *Symbol matching.*  For a fixed split of the symbols into degree classes
   (which fixes ``q``), the smallest average length pairs the largest
   probabilities with the shallowest slots inside each class.  Only the
   minimum reward per distinct ``q`` is kept; every other tree is dominated
   everywhere.
3. *Envelope support.*  States off the lower convex hull never attain the
   envelope and are dropped with exact certificates (see :mod:`hull`).

``reduction="full"`` skips all of this and converts every enumerated tree,
which is how the shortcuts are checked on small instances.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .codec import (
    AifvCode,
    AifvTree,
    Node,
    NodeKind,
    SourceDistribution,
    count_shapes,
    enumerate_trees,
    tree_to_state,
)
from .core import ProblemSpec, StateSpec
from .errors import BudgetExceeded, InputError, InternalError
from .hull import lower_envelope_support

REDUCTIONS = ("envelope", "distinct", "full")
FULL_ENUMERATION_BUDGET = 200_000


def default_max_nodes(n: int, m: int) -> int:
    return 3 * n + m


@dataclass(frozen=True)
class AifvProblem:
    """An MCMC problem plus the tree realising each of its states."""

    source: SourceDistribution
    m: int
    max_nodes: int
    problem: ProblemSpec
    trees: tuple[tuple[AifvTree, ...], ...]
    reduction: str
    candidate_counts: tuple[int, ...]

    def code(self, chain: Sequence[int]) -> AifvCode:
        chain = self.problem.check_chain(chain)
        return AifvCode(tuple(self.trees[k][i] for k, i in enumerate(chain)))


# -- depth profiles -----------------------------------------------------------
# A profile key is the sorted tuple of (depth, degree) master slots.  Each
# entry stores (node_count, recipe); recipes reference child entries by
# (context, symbols, key) so a witness tree can be rebuilt on demand.


def _shift(key, by):
    return tuple((t + by, d) for t, d in key)


@lru_cache(maxsize=None)
def _profiles(ctx, s: int, m: int, cap: int) -> dict:
    out: dict = {}
    if s <= 0 or cap <= 0:
        return out

    def offer(nodes, slots, recipe):
        if nodes > cap:
            return
        key = tuple(sorted(slots))
        cur = out.get(key)
        if cur is None or nodes < cur[0]:
            out[key] = (nodes, recipe)

    def combine(ctx0, ctx1):
        for s0 in range(1, s):
            left = _profiles(ctx0, s0, m, cap)
            right = [(k1, n1, _shift(k1, 1)) for k1, (n1, _) in _profiles(ctx1, s - s0, m, cap).items()]
            for k0, (n0, _) in left.items():
                sk0 = _shift(k0, 1)
                for k1, n1, sk1 in right:
                    offer(1 + n0 + n1, sk0 + sk1, ("C", (ctx0, s0, k0), (ctx1, s - s0, k1)))

    def masters(child_ctx, degrees):
        if s < 2:
            return
        for d in degrees:
            for k1, (n1, _) in _profiles(child_ctx(d), s - 1, m, cap).items():
                offer(1 + d + n1, ((0, d),) + _shift(k1, d + 1), ("M", d, (child_ctx(d), s - 1, k1)))

    if ctx == "A":
        if s == 1:
            offer(1, ((0, 0),), ("leaf",))
        combine("A", "A")
        masters(lambda d: "A", range(1, m))
        return out

    _, r, noi0 = ctx
    if r == 0:
        for k1, (n1, _) in _profiles("A", s, m, cap).items():
            offer(1 + n1, _shift(k1, 1), ("I1", ("A", s, k1)))
        return out
    combine(("P", r - 1, False), "A")
    if not noi0:
        for k1, (n1, _) in _profiles(("P", r - 1, False), s, m, cap).items():
            offer(1 + n1, _shift(k1, 1), ("I0", (("P", r - 1, False), s, k1)))
    masters(lambda d: ("P", r - d - 1, True), range(1, r))
    return out


def _profile_root(k: int):
    return "A" if k == 0 else ("P", k, False)


def _realise(ref, m: int, cap: int, path: str = "") -> Node:
    """Rebuild a witness tree; masters temporarily carry their path as symbol."""
    ctx, s, key = ref
    _, recipe = _profiles(ctx, s, m, cap)[key]
    tag = recipe[0]
    if tag == "leaf":
        return Node(NodeKind.MASTER, symbol=path, degree=0)
    if tag == "C":
        return Node(
            NodeKind.COMPLETE,
            _realise(recipe[1], m, cap, path + "0"),
            _realise(recipe[2], m, cap, path + "1"),
        )
    if tag == "I0":
        return Node(NodeKind.INTER0, zero=_realise(recipe[1], m, cap, path + "0"))
    if tag == "I1":
        return Node(NodeKind.INTER1, one=_realise(recipe[1], m, cap, path + "1"))
    d = recipe[1]
    below = _realise(recipe[2], m, cap, path + "0" * (d + 1))
    for _ in range(d):
        below = Node(NodeKind.INTER0, zero=below)
    return Node(NodeKind.MASTER, zero=below, symbol=path, degree=d)


def _relabel(node: Node | None, mapping: dict[str, str]) -> Node | None:
    if node is None:
        return None
    symbol = mapping[node.symbol] if node.kind is NodeKind.MASTER else None
    return Node(node.kind, _relabel(node.zero, mapping), _relabel(node.one, mapping), symbol, node.degree)


# -- states from profiles ------------------------------------------------------


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _weights(source: SourceDistribution) -> list[int]:
    scale = 2 ** source.b
    return [int(p * scale) for p in source.probs]


def _candidate_states(source: SourceDistribution, m: int, k: int, cap: int):
    """Minimum-reward candidate per distinct ``q`` as (q_num, reward_num, ref, assignment)."""
    n = source.n
    profiles = _profiles(_profile_root(k), n, m, cap)
    if not profiles:
        raise InputError(f"cap too small: no type-{k} tree with at most {cap} nodes")

    by_sig: dict[tuple, list] = {}
    for key in profiles:
        sig = tuple(sum(1 for _, d in key if d == j) for j in range(m))
        by_sig.setdefault(sig, []).append(key)

    weights = _weights(source)
    values = sorted(set(weights), reverse=True)
    counts = [weights.count(v) for v in values]
    assignments: dict[tuple, list] = {}
    for combo in itertools.product(*(list(_compositions(c, m)) for c in counts)):
        sig = tuple(sum(part[j] for part in combo) for j in range(m))
        if sig in by_sig:
            assignments.setdefault(sig, []).append(combo)

    best: dict[tuple, tuple] = {}
    for sig in sorted(assignments):
        keys = by_sig[sig]
        depth_rows = np.array(
            [[t for j in range(m) for t in sorted(t for t, d in key if d == j)] for key in keys],
            dtype=np.float64,
        )
        combos = assignments[sig]
        weight_rows = np.array(
            [
                [v for j in range(m) for g, v in enumerate(values) for _ in range(combo[g][j])]
                for combo in combos
            ],
            dtype=np.float64,
        )
        chunk = max(1, 2_000_000 // len(keys))
        for start in range(0, len(combos), chunk):
            # integer-valued products well below 2**53, so float64 is exact
            prod = weight_rows[start:start + chunk] @ depth_rows.T
            arg = prod.argmin(axis=1)
            for row, combo in enumerate(combos[start:start + chunk]):
                j = int(arg[row])
                reward = int(round(prod[row, j]))
                q = tuple(sum(combo[g][c] * values[g] for g in range(len(values))) for c in range(m))
                cur = best.get(q)
                if cur is None or reward < cur[1]:
                    best[q] = (q, reward, (_profile_root(k), n, keys[j]), combo)
    return list(best.values())


def _witness(source: SourceDistribution, m: int, cap: int, ref, combo) -> Node:
    skeleton = _realise(ref, m, cap)
    slots = [(len(p), p, n.degree) for p, n in AifvTree(skeleton, 0).iter_nodes() if n.kind is NodeKind.MASTER]
    weights = _weights(source)
    values = sorted(set(weights), reverse=True)
    by_class: list[list[int]] = [[] for _ in range(m)]
    for g, v in enumerate(values):
        members = [i for i, w in enumerate(weights) if w == v]
        pos = 0
        for j in range(m):
            by_class[j] += members[pos:pos + combo[g][j]]
            pos += combo[g][j]
    mapping = {}
    for j in range(m):
        class_slots = sorted((depth, p) for depth, p, d in slots if d == j)
        class_syms = sorted(by_class[j], key=lambda i: (-weights[i], i))
        for (_, p), i in zip(class_slots, class_syms):
            mapping[p] = source.symbols[i]
    return _relabel(skeleton, mapping)


def _full_states(source: SourceDistribution, m: int, k: int, cap: int):
    total = count_shapes(k, m, source.n, cap)
    for i in range(2, source.n + 1):
        total *= i
    if total > FULL_ENUMERATION_BUDGET:
        raise BudgetExceeded(f"{total} type-{k} trees exceed the full-enumeration budget")
    trees = enumerate_trees(k, m, source.n, cap, source.symbols)
    if not trees:
        raise InputError(f"cap too small: no type-{k} tree with at most {cap} nodes")
    return [tree_to_state(t, source, m) for t in trees], trees


def aifv_problem(
    source: SourceDistribution,
    m: int,
    max_nodes: int | None = None,
    reduction: str = "envelope",
) -> AifvProblem:
    """Build the capped AIFV-m tree sets for ``source`` as an MCMC problem."""
    if not isinstance(m, int) or m < 2:
        raise InputError(f"m must be an integer >= 2, got {m!r}")
    if reduction not in REDUCTIONS:
        raise InputError(f"unknown reduction {reduction!r}")
    cap = default_max_nodes(source.n, m) if max_nodes is None else max_nodes
    if cap < 1:
        raise InputError("max_nodes must be >= 1")

    if reduction == "full":
        sets, trees, counts = [], [], []
        for k in range(m):
            states, ts = _full_states(source, m, k, cap)
            sets.append(tuple(states))
            trees.append(tuple(ts))
            counts.append(len(states))
        return AifvProblem(source, m, cap, ProblemSpec(m, tuple(sets)), tuple(trees), reduction, tuple(counts))

    scale = 2 ** source.b
    sets, trees, counts = [], [], []
    for k in range(m):
        cands = _candidate_states(source, m, k, cap)
        counts.append(len(cands))
        if reduction == "envelope":
            keep = lower_envelope_support([c[0][1:] + (c[1],) for c in cands])
            cands = [cands[i] for i in keep]
        cands.sort(key=lambda c: (c[1], c[0][1:]))
        states, witnesses = [], []
        for q, reward, ref, combo in cands:
            state = StateSpec(Fraction(reward, scale), tuple(Fraction(v, scale) for v in q))
            tree = AifvTree(_witness(source, m, cap, ref, combo), k)
            if tree_to_state(tree, source, m) != state:
                raise InternalError(f"witness tree for type {k} does not reproduce its state")
            states.append(state)
            witnesses.append(tree)
        sets.append(tuple(states))
        trees.append(tuple(witnesses))
    return AifvProblem(source, m, cap, ProblemSpec(m, tuple(sets)), tuple(trees), reduction, tuple(counts))
