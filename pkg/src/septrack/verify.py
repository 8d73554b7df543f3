"""Randomized verification suites for the scalar inequality kernel.

Each suite draws a seeded batch, evaluates both sides of its inequality
directly and counts violations under the shared round-off slack.  The
suites back the `verify-lemmas` CLI subcommand and the acceptance tests;
domains follow the contracts: products over [-10,10]^2 with small integer
exponents, separation checks over [-10,10]^2 for powers {3,5,7,9} with
the tuning constant solved for a mid-range offset d = 0.5, and the
normalized envelope over [-50,50].
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .oddpower import (
    check_binomial_envelope,
    check_separation_inequality,
    ineq_holds,
    power_split_bounds,
    separation_coefficients,
    solve_l_for_d,
    young_bound,
)

SEPARATION_POWERS = (3, 5, 7, 9)


@dataclass
class SuiteResult:
    name: str
    samples: int
    violations: int
    worst_margin: float  # most negative (rhs - lhs) / max(1, |rhs|) observed
    elapsed: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _margin(lhs: float, rhs: float) -> float:
    return (rhs - lhs) / max(1.0, abs(rhs))


def run_young_suite(samples: int, seed: int) -> SuiteResult:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-10.0, 10.0, size=(samples, 2))
    bs = rng.integers(1, 7, size=(samples, 2))
    xis = rng.uniform(0.1, 10.0, size=samples)
    t0 = time.perf_counter()
    violations = 0
    worst = np.inf
    for i in range(samples):
        lhs, rhs = young_bound(x[i, 0], x[i, 1], int(bs[i, 0]), int(bs[i, 1]), xis[i])
        if not ineq_holds(lhs, rhs):
            violations += 1
        worst = min(worst, _margin(lhs, rhs))
    return SuiteResult("young product split", samples, violations, worst,
                       time.perf_counter() - t0)


def run_power_split_suite(samples: int, seed: int) -> SuiteResult:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-10.0, 10.0, size=(samples, 2))
    hs = rng.choice((3, 5, 7, 9), size=samples)
    lams = rng.choice((1.0, 2.0, 3.0), size=samples)
    t0 = time.perf_counter()
    violations = 0
    worst = np.inf
    for i in range(samples):
        res = power_split_bounds(x[i, 0], x[i, 1], int(hs[i]), float(lams[i]))
        if not ineq_holds(res.diff_lhs, res.diff_rhs):
            violations += 1
        if not ineq_holds(res.sum_lhs, res.sum_rhs):
            violations += 1
        worst = min(worst, _margin(res.diff_lhs, res.diff_rhs),
                    _margin(res.sum_lhs, res.sum_rhs))
    return SuiteResult("power difference/sum split", samples, violations, worst,
                       time.perf_counter() - t0)


def run_separation_suite(samples: int, seed: int) -> SuiteResult:
    rng = np.random.default_rng(seed)
    coeffs = [separation_coefficients(r, solve_l_for_d(r, 0.5))
              for r in SEPARATION_POWERS]
    x = rng.uniform(-10.0, 10.0, size=(samples, 2))
    which = rng.integers(0, len(coeffs), size=samples)
    t0 = time.perf_counter()
    violations = 0
    for i in range(samples):
        if not check_separation_inequality(x[i, 0], x[i, 1], coeffs[which[i]]):
            violations += 1
    return SuiteResult("separation inequality", samples, violations, 0.0,
                       time.perf_counter() - t0)


def run_envelope_suite(samples: int, seed: int) -> SuiteResult:
    rng = np.random.default_rng(seed)
    coeffs = [separation_coefficients(r, solve_l_for_d(r, 0.5))
              for r in SEPARATION_POWERS]
    ps = rng.uniform(-50.0, 50.0, size=samples)
    which = rng.integers(0, len(coeffs), size=samples)
    t0 = time.perf_counter()
    violations = 0
    for i in range(samples):
        if not check_binomial_envelope(ps[i], coeffs[which[i]]):
            violations += 1
    return SuiteResult("binomial envelope", samples, violations, 0.0,
                       time.perf_counter() - t0)


def run_inequality_suites(samples: int = 100_000, seed: int = 2024) -> list[SuiteResult]:
    """All four randomized suites with derived per-suite seeds."""
    return [
        run_young_suite(samples, seed),
        run_power_split_suite(samples, seed + 1),
        run_separation_suite(samples, seed + 2),
        run_envelope_suite(samples, seed + 3),
    ]


def format_suite_table(results: list[SuiteResult]) -> str:
    lines = [f"{'suite':<30} {'samples':>9} {'violations':>11} {'time [s]':>9}  result"]
    for r in results:
        verdict = "PASS" if r.passed else "FAIL"
        lines.append(
            f"{r.name:<30} {r.samples:>9} {r.violations:>11} {r.elapsed:>9.2f}  {verdict}"
        )
    return "\n".join(lines)
