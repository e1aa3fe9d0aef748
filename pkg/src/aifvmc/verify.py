"""Property suites run by ``aifvmc verify`` and by the test-suite."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .codec import AifvCode
from .core import ProblemSpec, classify_cone, eval_f, in_cone
from .generate import random_cone_vector, random_point
from .oracle import exhaustive_roundtrip
from .slice import boundary_sign_check

SUITES = ("lemma4", "cones", "boundary", "roundtrip")
MAX_REPORTED = 5


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    skipped: str | None = None

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        if self.skipped:
            return f"{self.name}: SKIP ({self.skipped})"
        status = "PASS" if self.ok else "FAIL"
        line = f"{self.name}: {status} ({self.checked} checked, {len(self.failures)} failed)"
        for f in self.failures[:MAX_REPORTED]:
            line += f"\n  counterexample: {f}"
        return line

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "status": "skip" if self.skipped else ("pass" if self.ok else "fail"),
            "checked": self.checked,
            "failures": self.failures,
            "skipped": self.skipped,
        }


def descent_along_cones(problem: ProblemSpec, rng: random.Random, trials: int = 10_000) -> SuiteResult:
    """Moving from ``u`` into cone ``C_i`` never raises ``f_i``; it strictly lowers it for ``i > 0``."""
    res = SuiteResult("lemma4")
    dim = problem.m - 1
    for _ in range(trials):
        i = rng.randrange(problem.m)
        s = rng.choice(problem.state_sets[i])
        u = random_point(rng, dim)
        d = random_cone_vector(rng, dim, i)
        v = tuple(a + b for a, b in zip(u, d))
        fu, fv = eval_f(i, u, s), eval_f(i, v, s)
        res.checked += 1
        if fv > fu or (i != 0 and fv == fu):
            res.failures.append(f"i={i} u={u} v={v}: f(v)={fv}, f(u)={fu}")
    return res


def cone_partition(m: int, rng: random.Random, trials: int = 10_000) -> SuiteResult:
    """classify_cone is total and consistent with the cone definitions."""
    res = SuiteResult("cones")
    dim = m - 1
    for _ in range(trials):
        u = random_point(rng, dim, b=2, lo=-1, hi=1)
        k = classify_cone(u)
        res.checked += 1
        if not in_cone(u, k):
            res.failures.append(f"u={u} labelled {k} but not in C_{k}")
            continue
        if k > 0 and any(in_cone(u, j) for j in range(1, k)):
            res.failures.append(f"u={u} labelled {k} but a smaller cone index also fits")
        if k == 0 and any(u):
            neg = tuple(-v for v in u)
            j = classify_cone(neg)
            if j == 0 or neg[j - 1] < 0:
                res.failures.append(f"u={u} in C_0 but -u is labelled {j}")
    return res


def boundary_signs(problem: ProblemSpec, n: int | None, samples: int = 20) -> SuiteResult:
    res = SuiteResult("boundary")
    if problem.m not in (2, 3):
        res.skipped = f"boundary signs are checked for m = 2 or 3, not m = {problem.m}"
        return res
    report = boundary_sign_check(problem, n=n, samples=samples)
    res.checked = report.checked
    res.failures = list(report.violations)
    res.skipped = report.skipped
    return res


def roundtrip(code: AifvCode | None, max_len: int = 6) -> SuiteResult:
    res = SuiteResult("roundtrip")
    if code is None:
        res.skipped = "no code given"
        return res
    problems = code.violations()
    report = exhaustive_roundtrip(code, max_len)
    res.checked = report.checked
    if not report.ok:
        res.failures.append(f"sequence {' '.join(report.counterexample) or '(empty)'}: {report.detail}")
        res.failures += [f"invalid code: {p}" for p in problems]
    return res
