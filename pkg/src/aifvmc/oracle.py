"""Brute-force ground truth.

Nothing here reuses the solver's linear algebra: chain costs come from the
Grassmann-Taksar-Heyman state-reduction algorithm rather than from the
hyperplane system or the balance-equation solve in :mod:`core`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .codec import AifvCode, _label, decode, encode, validate_tree
from .codec import AifvTree, default_symbols
from .core import ProblemSpec, StateSpec, eval_h
from .errors import BudgetExceeded, InputError

DEFAULT_BUDGET = 2_000_000


def gth_stationary(rows: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Stationary distribution by state reduction (censoring) in exact arithmetic.

    Valid whenever every state can reach state 0, which ``q_0 > 0`` ensures.
    """
    n = len(rows)
    a = [[Fraction(v) for v in row] for row in rows]
    for k in range(n - 1, 0, -1):
        s = sum(a[k][:k])
        for i in range(k):
            if a[i][k]:
                f = a[i][k] / s
                for j in range(k):
                    a[i][j] += f * a[k][j]
        a[k][k] = s  # stash the normaliser for the back pass
    pi = [Fraction(1)] + [Fraction(0)] * (n - 1)
    for k in range(1, n):
        pi[k] = sum((pi[i] * a[i][k] for i in range(k)), Fraction(0)) / a[k][k]
    total = sum(pi)
    return [v / total for v in pi]


def oracle_cost(chain: Sequence[StateSpec]) -> Fraction:
    pi = gth_stationary([s.q for s in chain])
    return sum((s.reward * p for s, p in zip(chain, pi)), Fraction(0))


def _eliminate(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Plain Gaussian elimination with back substitution (first nonzero pivot)."""
    n = len(rhs)
    a = [row[:] + [r] for row, r in zip(matrix, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] / a[col][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    out = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        acc = a[r][n] - sum((a[r][c] * out[c] for c in range(r + 1, n)), Fraction(0))
        out[r] = acc / a[r][r]
    return out


def relative_values(chain: Sequence[StateSpec], cost: Fraction) -> tuple[Fraction, ...]:
    """Solve ``x_k = l_k - cost + sum_j q_kj x_j`` (k >= 1) with ``x_0`` pinned at 0."""
    m = len(chain)
    matrix = [[(1 if i == j else 0) - chain[i].q[j] for j in range(1, m)] for i in range(1, m)]
    rhs = [chain[i].reward - cost for i in range(1, m)]
    return tuple(_eliminate(matrix, rhs)) if m > 1 else ()


def scan_h(problem: ProblemSpec, x: Sequence[Fraction]) -> Fraction:
    """Lowest hyperplane at ``x`` by a direct scan over every state of every type."""
    best = None
    for k, states in enumerate(problem.state_sets):
        for s in states:
            v = s.reward + sum((q * xj for q, xj in zip(s.q[1:], x)), Fraction(0))
            if k:
                v -= x[k - 1]
            if best is None or v < best:
                best = v
    return best


@dataclass
class OracleReport:
    best_chain: tuple[int, ...]
    best_cost: Fraction
    all_costs: list[Fraction]
    samples: list[tuple[tuple[Fraction, ...], Fraction]] | None = field(default=None)
    # first cheapest chain whose hyperplanes meet on the polytope surface;
    # other cheapest chains can meet above it
    top_chain: tuple[int, ...] | None = None
    top_point: tuple[tuple[Fraction, ...], Fraction] | None = None


def brute_force_min(problem: ProblemSpec, budget: int = DEFAULT_BUDGET) -> OracleReport:
    """Minimum cost over every permissible chain (ties: lexicographically smallest).

    Also reports ``top_chain``/``top_point``: the first cheapest chain whose
    intersection point ``(x, cost)`` satisfies ``h(x) = cost``.
    """
    total = problem.num_chains()
    if total > budget:
        raise BudgetExceeded(f"{total} chains exceed the oracle budget of {budget}")
    chains = list(itertools.product(*(range(n) for n in problem.sizes)))
    costs = [oracle_cost(problem.chain(c)) for c in chains]
    best_cost = min(costs)
    cheapest = [c for c, v in zip(chains, costs) if v == best_cost]
    report = OracleReport(cheapest[0], best_cost, costs)
    for chain in cheapest:
        x = relative_values(problem.chain(chain), best_cost)
        if scan_h(problem, x) == best_cost:
            report.top_chain, report.top_point = chain, (x, best_cost)
            break
    return report


def grid_points(lo: Sequence[Fraction], hi: Sequence[Fraction], steps: int) -> list[tuple[Fraction, ...]]:
    """Regular grid with ``steps + 1`` exact points per axis over the box ``[lo, hi]``."""
    if steps < 0:
        raise InputError("grid steps must be nonnegative")
    axes = []
    for a, b in zip(lo, hi):
        a, b = Fraction(a), Fraction(b)
        if steps == 0:
            axes.append([a])
        else:
            axes.append([a + (b - a) * i / steps for i in range(steps + 1)])
    return list(itertools.product(*axes))


def sample_height(problem: ProblemSpec, grid: Iterable[Sequence[Fraction]]) -> Fraction | None:
    """Largest ``h(x)`` over the grid: a lower bound on the polytope height.

    None for an empty grid.
    """
    best = None
    for x in grid:
        v = eval_h(x, problem)
        if best is None or v > best:
            best = v
    return best


@dataclass
class RoundtripReport:
    checked: int
    counterexample: tuple[str, ...] | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.counterexample is None


def exhaustive_roundtrip(code: AifvCode, max_len: int, budget: int = DEFAULT_BUDGET) -> RoundtripReport:
    """decode(encode(s), |s|) == s for every sequence with |s| <= max_len."""
    alphabet = code.symbols
    total = sum(len(alphabet) ** i for i in range(max_len + 1))
    if total > budget:
        raise BudgetExceeded(f"{total} sequences exceed the round-trip budget of {budget}")
    checked = 0
    for length in range(max_len + 1):
        for seq in itertools.product(alphabet, repeat=length):
            checked += 1
            try:
                bits = encode(code, seq)
                back = decode(code, bits, len(seq))
            except InputError as exc:
                return RoundtripReport(checked, seq, f"{type(exc).__name__}: {exc}")
            if tuple(back) != seq:
                return RoundtripReport(checked, seq, f"encoded {bits!r}, decoded {' '.join(back)}")
    return RoundtripReport(checked)


# -- independent tree enumerator ---------------------------------------------


def _all_shapes(budget: int, m: int):
    """Every binary tree with at most ``budget`` nodes, each node labelled every way
    its child pattern allows; yields (shape, nodes, masters)."""
    if budget <= 0:
        return
    yield ("M", 0, None), 1, 1
    for child, nc, mc in _all_shapes(budget - 1, m):
        yield ("I0", child), nc + 1, mc
        yield ("I1", child), nc + 1, mc
        for d in range(1, m):
            yield ("M", d, child), nc + 1, mc + 1
    for a, na, ma in _all_shapes(budget - 2, m):
        for b, nb, mb in _all_shapes(budget - 1 - na, m):
            yield ("C", a, b), 1 + na + nb, ma + mb


def brute_enumerate_trees(k: int, m: int, n: int, max_nodes: int) -> list[AifvTree]:
    """Generate-and-filter enumeration: all labelled trees, kept iff validate_tree accepts."""
    symbols = default_symbols(n)
    found = []
    for shape, _, masters in _all_shapes(max_nodes, m):
        if masters != n:
            continue
        probe = AifvTree(_label(shape, iter(symbols)), k)
        if validate_tree(probe, k, m, symbols=symbols):
            continue
        for perm in itertools.permutations(symbols):
            found.append(AifvTree(_label(shape, iter(perm)), k))
    found.sort(key=AifvTree.canonical_key)
    return found


__all__ = [
    "OracleReport",
    "RoundtripReport",
    "brute_enumerate_trees",
    "brute_force_min",
    "relative_values",
    "scan_h",
    "exhaustive_roundtrip",
    "grid_points",
    "gth_stationary",
    "oracle_cost",
    "sample_height",
]
