"""Seeded random instances for property tests and the verification suites."""
from __future__ import annotations

import random
from fractions import Fraction

from .codec import SourceDistribution
from .core import ProblemSpec, StateSpec


def random_dyadic_row(rng: random.Random, m: int, b: int) -> tuple[Fraction, ...]:
    """Transition row with entries in 2^-b Z, summing to 1, and q_0 > 0."""
    scale = 2 ** b
    counts = [1] + [0] * (m - 1)
    for _ in range(scale - 1):
        counts[rng.randrange(m)] += 1
    # occasionally concentrate mass to hit the q_0 = 1 and sparse-row corners
    if rng.random() < 0.1:
        counts = [scale] + [0] * (m - 1)
    return tuple(Fraction(c, scale) for c in counts)


def random_state(rng: random.Random, m: int, b: int, max_reward: int = 4) -> StateSpec:
    scale = 2 ** b
    reward = Fraction(rng.randrange(max_reward * scale + 1), scale)
    return StateSpec(reward, random_dyadic_row(rng, m, b))


def random_problem(
    rng: random.Random,
    m: int | None = None,
    max_states: int = 5,
    b: int | None = None,
) -> ProblemSpec:
    m = m if m is not None else rng.choice((2, 3, 4))
    b = b if b is not None else rng.randint(1, 8)
    sets = tuple(
        tuple(random_state(rng, m, b) for _ in range(rng.randint(1, max_states)))
        for _ in range(m)
    )
    return ProblemSpec(m, sets)


def random_source(rng: random.Random, n: int | None = None, b: int = 5) -> SourceDistribution:
    """Dyadic source with ``n`` symbols, each probability a positive multiple of 2^-b."""
    n = n if n is not None else rng.choice((7, 8, 9))
    scale = 2 ** b
    if n > scale:
        raise ValueError(f"cannot give {n} symbols positive mass at precision 2^-{b}")
    weights = [1] * n
    for _ in range(scale - n):
        weights[rng.randrange(n)] += 1
    weights.sort(reverse=True)
    return SourceDistribution.from_weights(weights, b)


def random_point(rng: random.Random, dim: int, b: int = 6, lo: int = -2, hi: int = 2) -> tuple[Fraction, ...]:
    scale = 2 ** b
    return tuple(Fraction(rng.randint(lo * scale, hi * scale), scale) for _ in range(dim))


def random_cone_vector(rng: random.Random, dim: int, k: int, b: int = 6) -> tuple[Fraction, ...]:
    """Nonzero vector in cone ``k``: the nonpositive orthant for 0, else ``u_k > 0`` maximal.

    Coordinates before ``k`` stay strictly below ``u_k`` so ties resolve to ``k``.
    """
    scale = 2 ** b
    if k == 0:
        while True:
            u = tuple(Fraction(-rng.randint(0, 2 * scale), scale) for _ in range(dim))
            if any(u):
                return u
    top = Fraction(rng.randint(1, 2 * scale), scale)
    t = int(top * scale)
    u = [Fraction(rng.randint(-2 * scale, t - 1 if j < k - 1 else t), scale) for j in range(dim)]
    u[k - 1] = top
    return tuple(u)
