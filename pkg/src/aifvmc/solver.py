"""Fastest-descent iteration over multi-typed intersection points.

Starting from any permissible chain, repeatedly replace the chain by the
envelope minimisers at the current intersection point until the point stops
moving.  Cost never increases along the way, and on a cost plateau the point
moves down componentwise; both facts are checked at every step.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import (
    LiftedPoint,
    ProblemSpec,
    envelope_chain,
    eval_envelope,
    multi_typed_intersection,
    precedes,
)
from .errors import InternalError


@dataclass(frozen=True)
class TraceStep:
    chain: tuple[int, ...]
    p: tuple[Fraction, ...]
    c: Fraction


@dataclass
class IterationTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    @property
    def iterations(self) -> int:
        return max(len(self.steps) - 1, 0)

    def violations(self) -> list[str]:
        """Monotonicity facts that fail on this trace (empty when all hold)."""
        out = []
        for i in range(1, len(self.steps)):
            prev, cur = self.steps[i - 1], self.steps[i]
            if cur.c > prev.c:
                out.append(f"step {i}: cost rose from {prev.c} to {cur.c}")
            elif cur.c == prev.c and not precedes(cur.p, prev.p):
                out.append(f"step {i}: cost plateau at {cur.c} but p did not move down")
        if len(self.steps) >= 2 and self.steps[-1].p != self.steps[-2].p:
            out.append("trace does not end on a fixed point")
        return out

    def csv_rows(self):
        m1 = len(self.steps[0].p) if self.steps else 0
        yield ["step", "c"] + [f"p{j + 1}" for j in range(m1)]
        for i, s in enumerate(self.steps):
            yield [str(i), f"{s.c.numerator}/{s.c.denominator}"] + [
                f"{v.numerator}/{v.denominator}" for v in s.p
            ]


@dataclass
class SolveResult:
    chain: tuple[int, ...]
    point: LiftedPoint
    trace: IterationTrace

    @property
    def cost(self) -> Fraction:
        return self.point.y


def _check_on_envelopes(problem: ProblemSpec, point: LiftedPoint):
    for k in range(problem.m):
        g = eval_envelope(k, point.x, problem).value
        if g != point.y:
            raise InternalError(
                f"fixed point {point} is not on envelope {k} (g_{k} = {g})"
            )


def solve_iterative(problem: ProblemSpec, start: Sequence[int] | None = None) -> SolveResult:
    """Run the descent from ``start`` (default: state 0 of every type)."""
    if start is None:
        start = (0,) * problem.m
    chain = problem.check_chain(start)
    point = multi_typed_intersection(problem.chain(chain))
    trace = IterationTrace([TraceStep(chain, point.x, point.y)])
    cap = problem.num_chains() + 1

    while True:
        chain = envelope_chain(point.x, problem)
        nxt = multi_typed_intersection(problem.chain(chain))
        trace.steps.append(TraceStep(chain, nxt.x, nxt.y))
        if nxt.y > point.y:
            raise InternalError(f"cost increased from {point.y} to {nxt.y}")
        if nxt.y == point.y and not precedes(nxt.x, point.x):
            raise InternalError(f"cost plateau at {nxt.y} without componentwise descent")
        if nxt.x == point.x:
            point = nxt
            break
        point = nxt
        if trace.iterations > cap:
            raise InternalError(f"no fixed point after {trace.iterations} iterations (cap {cap})")

    _check_on_envelopes(problem, point)
    return SolveResult(chain, point, trace)


def solve_and_certify(
    problem: ProblemSpec,
    starts: Sequence[Sequence[int]] | None = None,
    extra_random_starts: int = 1,
    seed: int = 0,
) -> SolveResult:
    """Solve from several starting chains and insist they reach the same point.

    By default uses the all-zero start, the all-last start and
    ``extra_random_starts`` seeded random starts.
    """
    if starts is None:
        rng = random.Random(seed)
        starts = [(0,) * problem.m, tuple(n - 1 for n in problem.sizes)]
        for _ in range(extra_random_starts):
            starts.append(tuple(rng.randrange(n) for n in problem.sizes))
    results = [solve_iterative(problem, s) for s in starts]
    first = results[0]
    for s, r in zip(starts, results):
        if r.point != first.point:
            raise InternalError(
                f"start {tuple(starts[0])} reached {first.point} but start {tuple(s)} reached {r.point}"
            )
    return first
