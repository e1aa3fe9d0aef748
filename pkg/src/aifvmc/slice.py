"""Binary search for the optimum of a three-type problem (AIFV-3 in particular).

On the slice ``x_1 = lam`` every type-0 hyperplane is a line in ``x_2`` of
nonnegative slope and every type-2 hyperplane a line of negative slope, so
``g_0 - g_2`` is strictly increasing and crosses zero once.  Call that
crossing ``E1(lam)``.  An outer bisection over ``lam`` compares ``g_0`` with
``g_1`` at ``E1(lam)`` and homes in on the common point of all three
envelopes.  Once the bracket is narrower than ``2**-b'`` the envelope
minimisers there identify the optimal states, and the exact optimum is
recovered by solving their 3x3 hyperplane system.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    LiftedPoint,
    ProblemSpec,
    StateSpec,
    envelope_chain,
    eval_envelope,
    eval_f,
    eval_h,
    solve_exact,
)
from .errors import InputError, InternalError, NoSliceCrossing, SnapRejected
from .solver import IterationTrace, SolveResult, TraceStep


@dataclass(frozen=True)
class PrecisionConfig:
    b: int
    b_prime: int | None = None

    def __post_init__(self):
        if not isinstance(self.b, int) or self.b < 1:
            raise InputError(f"precision b must be an integer >= 1, got {self.b!r}")
        if self.b_prime is None:
            object.__setattr__(self, "b_prime", 14 * self.b + 18)
        if self.b_prime < self.b:
            raise InputError(f"b' = {self.b_prime} is below b = {self.b}")

    @property
    def epsilon0(self) -> Fraction:
        return Fraction(1, 2 ** self.b_prime)

    @property
    def inner_step_cap(self) -> int:
        return 4 * self.b_prime + 64

    @classmethod
    def for_problem(cls, problem: ProblemSpec, b_prime: int | None = None) -> "PrecisionConfig":
        b = problem.dyadic_precision()
        if b is None:
            raise InputError("slice search needs dyadic rewards and probabilities")
        return cls(max(b, 1), b_prime)


@dataclass(frozen=True)
class SlicePoint:
    lam: Fraction
    x2: Fraction
    y: Fraction
    steps: int = 0


@dataclass(frozen=True)
class SearchStep:
    iteration: int
    l: Fraction
    r: Fraction
    mid: Fraction
    e0: Fraction
    e1: Fraction


@dataclass
class SliceSolveResult(SolveResult):
    x1_prime: Fraction = Fraction(0)
    x2_prime: Fraction | None = None
    search: list[SearchStep] = field(default_factory=list)
    snapped_from: tuple[Fraction, ...] = ()
    used_fallback: bool = False


def _require_three(problem: ProblemSpec):
    if problem.m != 3:
        raise InputError(f"slice search requires m=3, got m={problem.m}")


def _point(axis: int, fixed: Fraction, free: Fraction) -> tuple[Fraction, Fraction]:
    return (fixed, free) if axis == 1 else (free, fixed)


def _line(k: int, s: StateSpec, axis: int, fixed: Fraction):
    """(intercept, slope) of ``f_k`` along the free coordinate of the slice."""
    a = eval_f(k, _point(axis, fixed, Fraction(0)), s)
    return a, eval_f(k, _point(axis, fixed, Fraction(1)), s) - a


def _slice_crossing(problem: ProblemSpec, axis: int, fixed, lo, hi, cap: int):
    """Unique free coordinate where ``g_0`` meets ``g_partner`` on the slice.

    ``partner`` is the type whose own coordinate is free (2 when ``x_1`` is
    fixed, 1 when ``x_2`` is fixed), so its lines all slope downward.
    """
    partner = 3 - axis
    fixed, lo, hi = Fraction(fixed), Fraction(lo), Fraction(hi)
    if lo > hi:
        raise InputError(f"empty search interval [{lo}, {hi}]")

    def envelopes(t):
        p = _point(axis, fixed, t)
        return eval_envelope(0, p, problem), eval_envelope(partner, p, problem)

    at_l, at_r = envelopes(lo), envelopes(hi)
    if at_l[0].value > at_l[1].value or at_r[0].value < at_r[1].value:
        raise NoSliceCrossing(
            f"no slice crossing in interval [{lo}, {hi}] at fixed x_{axis} = {fixed}"
        )
    l, r = lo, hi
    zero_states = problem.state_sets[0]
    partner_states = problem.state_sets[partner]
    for step in range(cap):
        lines0 = {at_l[0].argmin_index, at_r[0].argmin_index}
        lines2 = {at_l[1].argmin_index, at_r[1].argmin_index}
        for i0 in sorted(lines0):
            a0, s0 = _line(0, zero_states[i0], axis, fixed)
            for i2 in sorted(lines2):
                a2, s2 = _line(partner, partner_states[i2], axis, fixed)
                t = (a2 - a0) / (s0 - s2)
                if l <= t <= r:
                    g0, g2 = envelopes(t)
                    if g0.value == g2.value:
                        return t, g0.value, step
        mid = (l + r) / 2
        at_mid = envelopes(mid)
        if at_mid[0].value <= at_mid[1].value:
            l, at_l = mid, at_mid
        else:
            r, at_r = mid, at_mid
    raise InternalError(f"slice crossing not isolated after {cap} halvings")


def eval_E1(
    lam,
    problem: ProblemSpec,
    cfg: PrecisionConfig | None = None,
    lo=Fraction(0),
    hi=Fraction(1),
) -> SlicePoint:
    """Exact intersection of ``g_0`` and ``g_2`` on the slice ``x_1 = lam``."""
    _require_three(problem)
    cfg = cfg or PrecisionConfig.for_problem(problem)
    lam = Fraction(lam)
    x2, y, steps = _slice_crossing(problem, 1, lam, lo, hi, cfg.inner_step_cap)
    return SlicePoint(lam, x2, y, steps)


def _outer_search(problem, axis, cfg, lo, hi, inner_lo, inner_hi):
    """Bisection on the fixed coordinate comparing ``g_0`` with ``g_axis``."""
    cap = cfg.inner_step_cap

    def probe(v):
        t, _, _ = _slice_crossing(problem, axis, v, inner_lo, inner_hi, cap)
        p = _point(axis, v, t)
        return p, eval_envelope(0, p, problem).value, eval_envelope(axis, p, problem).value

    l, r = Fraction(lo), Fraction(hi)
    _, e0, e1 = probe(l)
    if e0 > e1:
        raise NoSliceCrossing(f"boundary-sign precondition fails at x_{axis} = {l}: g_0 > g_{axis}")
    _, e0, e1 = probe(r)
    if e0 < e1:
        raise NoSliceCrossing(f"boundary-sign precondition fails at x_{axis} = {r}: g_0 < g_{axis}")

    steps = []
    while r - l > cfg.epsilon0:
        mid = (l + r) / 2
        _, e0, e1 = probe(mid)
        steps.append(SearchStep(len(steps), l, r, mid, e0, e1))
        if e0 < e1:
            l = mid
        else:
            r = mid
    return l, steps


def snap_to_exact(t0: StateSpec, t1: StateSpec, t2: StateSpec, problem: ProblemSpec) -> LiftedPoint:
    """Solve the three hyperplane equations and certify the point lies on every envelope.

    The system is written as ``M . (-y, x_1, x_2) = -reward`` with rows
    ``(1, q_1, q_2)`` adjusted by ``-1`` on each type's own coordinate.
    """
    _require_three(problem)
    matrix = [
        [Fraction(1), t0.q[1], t0.q[2]],
        [Fraction(1), t1.q[1] - 1, t1.q[2]],
        [Fraction(1), t2.q[1], t2.q[2] - 1],
    ]
    rhs = [-t0.reward, -t1.reward, -t2.reward]
    try:
        neg_y, x1, x2 = solve_exact(matrix, rhs)
    except ZeroDivisionError:
        raise InternalError("hyperplane matrix is singular") from None
    x, y = (x1, x2), -neg_y
    diagnostics = {}
    for k, t in enumerate((t0, t1, t2)):
        own = eval_f(k, x, t)
        env = eval_envelope(k, x, problem).value
        if own != y or env != own:
            diagnostics[k] = {"plane": own, "envelope": env}
    if diagnostics:
        raise SnapRejected(f"snap rejected: point {x} y={y} is not on every envelope", diagnostics)
    return LiftedPoint(x, y)


def solve_slice_search(
    problem: ProblemSpec,
    cfg: PrecisionConfig | None = None,
    lo=Fraction(0),
    hi=Fraction(1),
) -> SliceSolveResult:
    """Bisection over ``x_1`` followed by exact recovery of the optimum.

    ``[lo, hi]`` bounds both coordinates.  The states to snap are taken at
    ``E1'(x_1')``; if that snap is rejected, ``x_2'`` is found by the mirror
    search with ``x_2`` fixed and the snap is retried at ``(x_1', x_2')``.
    """
    _require_three(problem)
    cfg = cfg or PrecisionConfig.for_problem(problem)
    lo, hi = Fraction(lo), Fraction(hi)
    x1p, steps = _outer_search(problem, 1, cfg, lo, hi, lo, hi)
    x2_at, _, _ = _slice_crossing(problem, 1, x1p, lo, hi, cfg.inner_step_cap)
    where = (x1p, x2_at)
    chain = envelope_chain(where, problem)
    used_fallback = False
    x2p = None
    try:
        point = snap_to_exact(*problem.chain(chain), problem)
    except SnapRejected:
        used_fallback = True
        x2p, _ = _outer_search(problem, 2, cfg, lo, hi, lo, hi)
        where = (x1p, x2p)
        chain = envelope_chain(where, problem)
        point = snap_to_exact(*problem.chain(chain), problem)
    if eval_h(point.x, problem) != point.y:
        raise InternalError(f"snapped point {point} is not on h")
    trace = IterationTrace([TraceStep(chain, point.x, point.y)])
    return SliceSolveResult(
        chain, point, trace,
        x1_prime=x1p, x2_prime=x2p, search=steps, snapped_from=where, used_fallback=used_fallback,
    )


@dataclass
class BoundaryReport:
    checked: int = 0
    violations: list[str] = field(default_factory=list)
    skipped: str | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


def boundary_samples(samples: int) -> list[Fraction]:
    if samples < 2:
        return [Fraction(0)] if samples == 1 else []
    return [Fraction(i, samples - 1) for i in range(samples)]


def boundary_sign_check(problem: ProblemSpec, n: int | None = None, samples: int = 20) -> BoundaryReport:
    """Check ``g_0 <= g_k`` where ``x_k = 0`` and ``g_k <= g_0`` where ``x_k = 1``.

    Samples the remaining coordinate (if any) over ``[0, 1]``.  The property
    is only promised for AIFV problems with ``n >= 2**m - 1``; smaller ``n``
    is skipped with a warning.
    """
    report = BoundaryReport()
    m = problem.m
    if m not in (2, 3):
        raise InputError("boundary sign check supports m = 2 or 3")
    if n is not None and n < 2 ** m - 1:
        report.skipped = f"n={n} < 2^m - 1 = {2 ** m - 1}; boundary signs are not guaranteed"
        warnings.warn(report.skipped, stacklevel=2)
        return report
    others = boundary_samples(samples) if m == 3 else [None]
    for k in range(1, m):
        for edge in (Fraction(0), Fraction(1)):
            for t in others:
                x = [edge] if m == 2 else ([edge, t] if k == 1 else [t, edge])
                g0 = eval_envelope(0, x, problem).value
                gk = eval_envelope(k, x, problem).value
                report.checked += 1
                bad = g0 > gk if edge == 0 else gk > g0
                if bad:
                    report.violations.append(
                        f"x={[str(v) for v in x]}: g_0={g0}, g_{k}={gk} (x_{k}={edge})"
                    )
    return report
