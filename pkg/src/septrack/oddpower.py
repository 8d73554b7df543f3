"""Scalar inequality kernel for odd-power integrator chains.

Every hard step in the controller design comes down to dominating terms of
the form x^r with r a positive odd integer.  This module provides the three
tools used for that:

* sign-correct odd powers,
* evaluators for the two classical splitting inequalities
  (weighted Young product split, and the power difference / power-of-sum
  bounds),
* the separation coefficients (d, upsilon_bar) with which the odd power of
  a sum can be bounded against the odd powers of its parts,

      |F(x1 + x2) - F(x1)| <= d*|F(x1)| + upsilon_bar*|F(x2)|,   F(z) = z^r,

  together with constructive formulas for (d, upsilon_bar) from a single
  small tuning constant l > 0 and a bisection inverse l(d).

All checks share one floating-point slack rule: an inequality "holds" when
lhs <= rhs + 1e-12 + 1e-12*|rhs|.  The inequalities are strict with margin
for generic inputs, so the slack only absorbs round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

ABS_SLACK = 1e-12
REL_SLACK = 1e-12


def ineq_holds(lhs: float, rhs: float) -> bool:
    """Round-off tolerant lhs <= rhs (absolute + relative slack on rhs)."""
    return lhs <= rhs + ABS_SLACK + REL_SLACK * abs(rhs)


def _require_odd(r: int) -> None:
    if not isinstance(r, int) or r < 1 or r % 2 == 0:
        raise ValueError(f"power must be a positive odd integer, got {r!r}")


def odd_pow(z: float, r: int) -> float:
    """sign(z)*|z|^r for positive odd integer r.

    Computed by repeated multiplication, which is exact whenever all the
    intermediate products are exactly representable (e.g. odd_pow(1.5, 5)
    == 7.59375) and keeps the result bit-reproducible across platforms.
    """
    _require_odd(r)
    out = z
    for _ in range(r - 1):
        out *= z
    return out


def young_bound(x1: float, x2: float, b1: int, b2: int, xi: float) -> tuple[float, float]:
    """Both sides of the weighted Young product split.

    Returns (lhs, rhs) with

        lhs = |x1|^b1 * |x2|^b2
        rhs = (b1*xi*|x1|^(b1+b2) + b2*xi^(-b1/b2)*|x2|^(b1+b2)) / (b1+b2)

    for positive integers b1, b2 and any weight xi > 0; lhs <= rhs always.
    """
    if not isinstance(b1, int) or b1 < 1 or not isinstance(b2, int) or b2 < 1:
        raise ValueError("b1 and b2 must be positive integers")
    if not xi > 0:
        raise ValueError("xi must be positive")
    p = b1 + b2
    lhs = abs(x1) ** b1 * abs(x2) ** b2
    rhs = (b1 * xi * abs(x1) ** p + b2 * xi ** (-b1 / b2) * abs(x2) ** p) / p
    return lhs, rhs


class PowerSplitBounds(NamedTuple):
    diff_lhs: float
    diff_rhs: float
    sum_lhs: float
    sum_rhs: float


def power_split_bounds(x1: float, x2: float, h: int, lam: float) -> PowerSplitBounds:
    """Both sides of the two power splitting inequalities.

    Difference split (h a positive odd integer):

        |x1^h - x2^h| <= h * |x1 - x2| * |x1^(h-1) + x2^(h-1)|

    Power-of-sum split (lam >= 1):

        |x1 + x2|^lam <= 2^(lam-1) * (|x1|^lam + |x2|^lam)

    Each lhs <= its rhs for all real x1, x2.
    """
    _require_odd(h)
    if not lam >= 1:
        raise ValueError("lam must be >= 1")
    diff_lhs = abs(odd_pow(x1, h) - odd_pow(x2, h))
    diff_rhs = h * abs(x1 - x2) * abs(x1 ** (h - 1) + x2 ** (h - 1))
    sum_lhs = abs(x1 + x2) ** lam
    sum_rhs = 2.0 ** (lam - 1.0) * (abs(x1) ** lam + abs(x2) ** lam)
    return PowerSplitBounds(diff_lhs, diff_rhs, sum_lhs, sum_rhs)


@dataclass(frozen=True)
class SeparationCoefficients:
    """Envelope coefficients for splitting an odd power of a sum.

    For F(z) = z^r the pair (d, upsilon_bar) satisfies

        |F(x1 + x2) - F(x1)| <= d*|F(x1)| + upsilon_bar*|F(x2)|

    for all real x1, x2.  Both coefficients are binomial sums in the tuning
    constant l > 0: d grows and upsilon_bar shrinks as l grows.  Admissible
    coefficients need d < 1 (so 1 - d keeps a positive margin for the gain
    formulas) and upsilon_bar >= 1 (the zero-base-point case of the envelope
    needs an overshoot factor of at least one).  r = 1 is degenerate: d is
    identically 0 and upsilon_bar = 1/l, so only l <= 1 is admissible.
    """

    r: int
    l: float
    d: float
    upsilon_bar: float

    def __post_init__(self) -> None:
        _require_odd(self.r)
        if not self.l > 0:
            raise ValueError("l must be positive")
        if not 0.0 <= self.d < 1.0:
            raise ValueError(f"separation offset d={self.d} outside [0, 1)")
        if not self.upsilon_bar >= 1.0:
            raise ValueError(
                f"separation overshoot upsilon_bar={self.upsilon_bar} < 1"
            )

    @property
    def lower_scale(self) -> float:
        """1 - d, the guaranteed fraction of F(x1) kept after separation."""
        return 1.0 - self.d

    @property
    def upper_scale(self) -> float:
        """1 + d."""
        return 1.0 + self.d


def _envelope_sums(r: int, l: float) -> tuple[float, float]:
    # The k = r term of d has coefficient (r-k)/r = 0 and an undefined
    # exponent r/(r-k); it is the b2 -> 0 limit of the Young split and is
    # taken as 0, matching the binomial term count.
    d = sum(
        math.comb(r, k) * ((r - k) / r) * l ** (r / (r - k)) for k in range(1, r)
    )
    ub = sum(math.comb(r, k) * (k / r) * l ** (-r / k) for k in range(1, r + 1))
    return float(d), float(ub)


def separation_coefficients(r: int, l: float) -> SeparationCoefficients:
    """Constructive (d, upsilon_bar) for the power r and tuning constant l.

        d           = sum_{k=1}^{r-1} C(r,k) * (r-k)/r * l^(r/(r-k))
        upsilon_bar = sum_{k=1}^{r}   C(r,k) * k/r     * l^(-r/k)

    Raises if l is too large (d >= 1) or, for r = 1, too large for the
    overshoot to stay >= 1; the diagnostic carries the computed value.
    """
    _require_odd(r)
    if not l > 0:
        raise ValueError("l must be positive")
    d, ub = _envelope_sums(r, l)
    if d >= 1.0:
        raise ValueError(
            f"l={l} is too large for r={r}: separation offset d={d:.6g} >= 1"
        )
    if ub < 1.0:
        raise ValueError(
            f"l={l} is too large for r={r}: overshoot upsilon_bar={ub:.6g} < 1"
        )
    return SeparationCoefficients(r=r, l=l, d=d, upsilon_bar=ub)


def solve_l_for_d(r: int, d_target: float, tol: float = 1e-9) -> float:
    """Invert the strictly increasing map l -> d by bisection.

    Returns l with |d(l) - d_target| <= tol.  Rejects r = 1, where d is
    identically zero and no positive target is reachable.
    """
    _require_odd(r)
    if not 0.0 < d_target < 1.0:
        raise ValueError("d_target must lie in (0, 1)")
    if r == 1:
        raise ValueError("r=1 is degenerate: d(l) is identically 0")
    lo = 0.0
    hi = 1e-3
    while _envelope_sums(r, hi)[0] < d_target:
        hi *= 2.0
        if hi > 1e6:  # d -> infinity with l, so this cannot trigger
            raise RuntimeError("bisection bracket failed to close")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        d_mid = _envelope_sums(r, mid)[0]
        if abs(d_mid - d_target) <= tol:
            return mid
        if d_mid < d_target:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("bisection did not converge")


def check_separation_inequality(
    x1: float, x2: float, coeffs: SeparationCoefficients
) -> bool:
    """True iff |F(x1+x2) - F(x1)| <= d*|F(x1)| + upsilon_bar*|F(x2)|.

    F(z) = z^r with the r stored in coeffs.  The x1 = 0 case reduces to
    |F(x2)| <= upsilon_bar*|F(x2)|, which holds because the overshoot
    factor is at least one.
    """
    r = coeffs.r
    lhs = abs(odd_pow(x1 + x2, r) - odd_pow(x1, r))
    rhs = coeffs.d * abs(odd_pow(x1, r)) + coeffs.upsilon_bar * abs(odd_pow(x2, r))
    return ineq_holds(lhs, rhs)


def check_binomial_envelope(p: float, coeffs: SeparationCoefficients) -> bool:
    """True iff |(1+p)^r - 1| <= d + upsilon_bar*|p|^r.

    This is the normalized (x2 = p*x1, then divide by F(x1)) form of the
    separation inequality; multiplicativity of odd powers transfers it back
    to arbitrary (x1, x2).
    """
    r = coeffs.r
    lhs = abs(odd_pow(1.0 + p, r) - 1.0)
    rhs = coeffs.d + coeffs.upsilon_bar * abs(odd_pow(p, r))
    return ineq_holds(lhs, rhs)
