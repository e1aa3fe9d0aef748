"""Exact data model for the minimum-cost Markov chain (MCMC) problem.

Every scalar is a :class:`fractions.Fraction`.  A problem has ``m`` state
types; each type ``k`` owns a finite list of permissible states, and a chain
picks one state per type.  Each state of type ``k`` defines an affine
function (hyperplane) over ``x = (x_1, ..., x_{m-1})``::

    f_k(x, S) = reward(S) + sum_{j>=1} q_j(S) * x_j  -  (x_k if k > 0)

The lower envelope ``g_k`` is the pointwise minimum over type-``k`` states and
``h = min_k g_k``.  The cheapest chain corresponds to the highest point under
``h``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InputError, InternalError

Rational = Fraction

_FRACTION_RE = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def to_rational(value) -> Fraction:
    """Coerce ``value`` to a Fraction without ever passing through a float.

    Accepts ints, Fractions and strings of the form ``"num"`` or
    ``"num/den"``.  Floats and decimal strings are rejected.
    """
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not _FRACTION_RE.match(value):
            raise InputError(f"expected 'num/den' fraction string, got {value!r}")
        try:
            return Fraction(value.replace(" ", ""))
        except ZeroDivisionError:
            raise InputError(f"zero denominator in {value!r}") from None
    raise InputError(f"not an exact rational: {value!r} ({type(value).__name__})")


def format_rational(r: Fraction) -> str:
    return f"{r.numerator}/{r.denominator}"


def format_vector(xs: Iterable[Fraction]) -> str:
    return "[" + ",".join(str(v) for v in xs) + "]"


def dyadic_exponent(r: Fraction) -> int | None:
    """Smallest ``b`` with ``r`` an integer multiple of ``2**-b``; None if not dyadic."""
    d = r.denominator
    if d & (d - 1):
        return None
    return d.bit_length() - 1


@dataclass(frozen=True)
class StateSpec:
    """One permissible state: a nonnegative reward and a transition row."""

    reward: Fraction
    q: tuple[Fraction, ...]

    def __post_init__(self):
        reward = to_rational(self.reward)
        q = tuple(to_rational(v) for v in self.q)
        object.__setattr__(self, "reward", reward)
        object.__setattr__(self, "q", q)
        if reward < 0:
            raise InputError(f"negative reward {reward}")
        if len(q) < 2:
            raise InputError("transition vector needs at least 2 entries")
        if any(v < 0 for v in q):
            raise InputError(f"negative transition probability in {format_vector(q)}")
        if sum(q) != 1:
            raise InputError(f"transition probabilities sum to {sum(q)}, not 1")
        if q[0] <= 0:
            raise InputError("q_0 must be positive (state would not return to type 0)")

    @property
    def m(self) -> int:
        return len(self.q)


@dataclass(frozen=True)
class ProblemSpec:
    m: int
    state_sets: tuple[tuple[StateSpec, ...], ...]

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 2:
            raise InputError(f"m must be an integer >= 2, got {self.m!r}")
        sets = tuple(tuple(s) for s in self.state_sets)
        object.__setattr__(self, "state_sets", sets)
        if len(sets) != self.m:
            raise InputError(f"expected {self.m} state sets, got {len(sets)}")
        for k, states in enumerate(sets):
            if not states:
                raise InputError(f"state set {k} is empty")
            for s in states:
                if not isinstance(s, StateSpec):
                    raise InputError(f"state set {k} holds a non-StateSpec entry")
                if s.m != self.m:
                    raise InputError(
                        f"state in set {k} has {s.m} transition entries, expected {self.m}"
                    )

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.state_sets)

    def num_chains(self) -> int:
        total = 1
        for size in self.sizes:
            total *= size
        return total

    def check_chain(self, indices: Sequence[int]) -> tuple[int, ...]:
        indices = tuple(indices)
        if len(indices) != self.m:
            raise InputError(f"chain needs {self.m} indices, got {len(indices)}")
        for k, i in enumerate(indices):
            if not isinstance(i, int) or not 0 <= i < len(self.state_sets[k]):
                raise InputError(f"index {i!r} out of range for type {k}")
        return indices

    def chain(self, indices: Sequence[int]) -> tuple[StateSpec, ...]:
        indices = self.check_chain(indices)
        return tuple(self.state_sets[k][i] for k, i in enumerate(indices))

    def dyadic_precision(self) -> int | None:
        """Common ``b`` such that every reward and probability is a multiple of 2^-b."""
        b = 0
        for states in self.state_sets:
            for s in states:
                for v in (s.reward, *s.q):
                    e = dyadic_exponent(v)
                    if e is None:
                        return None
                    b = max(b, e)
        return b


@dataclass(frozen=True)
class LiftedPoint:
    """A point ``(x, y)`` of R^{m-1} x R."""

    x: tuple[Fraction, ...]
    y: Fraction

    def __str__(self):
        return f"x={format_vector(self.x)} y={self.y}"


@dataclass(frozen=True)
class EnvelopeEval:
    value: Fraction
    argmin_index: int


def _check_point(x: Sequence[Fraction], m: int) -> tuple[Fraction, ...]:
    if len(x) != m - 1:
        raise InputError(f"point has {len(x)} coordinates, expected {m - 1}")
    return tuple(to_rational(v) for v in x)


def eval_f(k: int, x: Sequence[Fraction], s: StateSpec) -> Fraction:
    """Value of the type-``k`` hyperplane of state ``s`` at ``x``."""
    if not 0 <= k < s.m:
        raise InputError(f"type index {k} out of range for m={s.m}")
    if len(x) != s.m - 1:
        raise InputError(f"point has {len(x)} coordinates, expected {s.m - 1}")
    value = s.reward
    for j in range(1, s.m):
        value += s.q[j] * x[j - 1]
    if k > 0:
        value -= x[k - 1]
    return value


def eval_envelope(k: int, x: Sequence[Fraction], problem: ProblemSpec) -> EnvelopeEval:
    """Lower envelope ``g_k(x)``; ties go to the smallest state index."""
    if not 0 <= k < problem.m:
        raise InputError(f"type index {k} out of range for m={problem.m}")
    x = _check_point(x, problem.m)
    best_value = None
    best_index = -1
    for i, s in enumerate(problem.state_sets[k]):
        v = eval_f(k, x, s)
        if best_value is None or v < best_value:
            best_value, best_index = v, i
    return EnvelopeEval(best_value, best_index)


def eval_h(x: Sequence[Fraction], problem: ProblemSpec) -> Fraction:
    return min(eval_envelope(k, x, problem).value for k in range(problem.m))


def envelope_chain(x: Sequence[Fraction], problem: ProblemSpec) -> tuple[int, ...]:
    """``S(x)``: the envelope argmin of every type, as state indices."""
    return tuple(eval_envelope(k, x, problem).argmin_index for k in range(problem.m))


def solve_exact(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction]:
    """Solve a square system by Gauss-Jordan elimination over the rationals.

    Raises ZeroDivisionError if the matrix is singular.
    """
    n = len(matrix)
    a = [[Fraction(v) for v in row] + [Fraction(r)] for row, r in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[pivot] = a[pivot], a[col]
        prow = a[col]
        inv = 1 / prow[col]
        for c in range(col, n + 1):
            prow[c] *= inv
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                row = a[r]
                for c in range(col, n + 1):
                    row[c] -= factor * prow[c]
    return [a[r][n] for r in range(n)]


def hyperplane_system(chain: Sequence[StateSpec]):
    """Rows ``[q_1 .. q_{m-1} (minus 1 on the own coordinate), -1] . (x, y) = -reward``."""
    m = len(chain)
    matrix, rhs = [], []
    for k, s in enumerate(chain):
        row = [s.q[j] for j in range(1, m)]
        if k > 0:
            row[k - 1] -= 1
        row.append(Fraction(-1))
        matrix.append(row)
        rhs.append(-s.reward)
    return matrix, rhs


def multi_typed_intersection(chain: Sequence[StateSpec]) -> LiftedPoint:
    """The unique common point of the ``m`` hyperplanes of a permissible chain."""
    m = len(chain)
    for k, s in enumerate(chain):
        if s.m != m:
            raise InputError(f"state {k} has {s.m} transition entries, chain has {m} states")
    matrix, rhs = hyperplane_system(chain)
    try:
        z = solve_exact(matrix, rhs)
    except ZeroDivisionError:
        raise InternalError("hyperplanes of a permissible chain do not meet in one point") from None
    return LiftedPoint(tuple(z[:-1]), z[-1])


def stationary_distribution(chain: Sequence[StateSpec]) -> tuple[Fraction, ...]:
    """Unique stationary distribution of the chain with transition rows ``q(S_k)``.

    Uses the balance equations for types 1..m-1 plus normalisation; the
    type-0 balance equation is implied.
    """
    m = len(chain)
    matrix, rhs = [], []
    for j in range(1, m):
        row = [chain[k].q[j] for k in range(m)]
        row[j] -= 1
        matrix.append(row)
        rhs.append(Fraction(0))
    matrix.append([Fraction(1)] * m)
    rhs.append(Fraction(1))
    try:
        pi = solve_exact(matrix, rhs)
    except ZeroDivisionError:
        raise InternalError("balance equations are singular; chain is not a unichain") from None
    if any(v < 0 for v in pi):
        raise InternalError(f"negative stationary probability {format_vector(pi)}")
    return tuple(pi)


def chain_cost(chain: Sequence[StateSpec]) -> Fraction:
    pi = stationary_distribution(chain)
    return sum((s.reward * p for s, p in zip(chain, pi)), Fraction(0))


def classify_cone(u: Sequence[Fraction]) -> int:
    """Index of the cone containing ``u``.

    0 for the nonpositive orthant; otherwise the smallest ``k`` whose
    coordinate attains the (positive) maximum.
    """
    if all(v <= 0 for v in u):
        return 0
    top = max(u)
    return 1 + list(u).index(top)


def in_cone(u: Sequence[Fraction], k: int) -> bool:
    """Membership test for the closed-form cone definitions (cones overlap on ties)."""
    if k == 0:
        return all(v <= 0 for v in u)
    uk = u[k - 1]
    return uk > 0 and all(uk >= v for v in u)


def precedes(u: Sequence[Fraction], v: Sequence[Fraction]) -> bool:
    """Componentwise ``u <= v``."""
    return all(a <= b for a, b in zip(u, v))
