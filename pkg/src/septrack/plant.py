"""Switched odd-power integrator chains and their switching signals.

Each follower runs one of m modes at a time.  In mode j, channel k of the
state obeys

    xdot_k = drift_k(x_1..x_k) + gain_k(x_1..x_k) * next_k^{r_k}

where next_k is x_{k+1} for interior channels and the control input u for
the last one, and r_k is a positive odd integer.  Drifts and gains are
expression trees from scenario files; the controller never sees them, only
the declared positive bounds on each gain.

Switching is exogenous and time triggered: a schedule is a right-continuous
piecewise-constant map from time to mode index.  Generated schedules are
seeded, draw segment lengths uniformly from [dwell_min, 3*dwell_min] and
never repeat a mode back to back, which gives reproducible "arbitrary and
asynchronous" switching across followers.
"""

from __future__ import annotations

import warnings
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expressions import Expression, compile_fn, pretty, variables
from .oddpower import odd_pow


class GainBoundWarning(UserWarning):
    """An evaluated input gain left its declared [lower, upper] band."""


@dataclass(frozen=True)
class ModeDynamics:
    """One mode: per-channel drift and input-gain expressions plus bounds.

    gain_bounds[k] = (lower, upper) is the declared band for gain_k; the
    lower bounds feed the controller, so they must be positive.  Bounds are
    declared, not derived: a gain expression that can leave its band is
    reported by the runtime checks as a warning, never an error.
    """

    drift: tuple[Expression, ...]
    gain: tuple[Expression, ...]
    gain_bounds: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        n = len(self.drift)
        if n < 1:
            raise ValueError("at least one state channel required")
        if len(self.gain) != n or len(self.gain_bounds) != n:
            raise ValueError("drift, gain and gain_bounds must have equal length")
        for k, (lo, hi) in enumerate(self.gain_bounds):
            if not 0 < lo <= hi:
                raise ValueError(
                    f"gain_bounds[{k}]=({lo}, {hi}); need 0 < lower <= upper"
                )
        for label, exprs in (("drift", self.drift), ("gain", self.gain)):
            for k, expr in enumerate(exprs):
                if "t" in variables(expr):
                    raise ValueError(
                        f"{label}[{k + 1}] reads t; mode dynamics are autonomous"
                    )

    @property
    def n(self) -> int:
        return len(self.drift)

    def structure_warnings(self) -> list[str]:
        """Channels whose expressions read states above their own index.

        The integrator-chain structure allows channel k to depend on
        x_1..x_k only.  Violations are reported, not rejected, because
        published benchmark dynamics occasionally break the letter of the
        structure while the simulation remains well defined.
        """
        out = []
        for k in range(self.n):
            allowed = {f"x{i}" for i in range(1, k + 2)} | {"t"}
            for label, expr in (("drift", self.drift[k]), ("gain", self.gain[k])):
                extra = variables(expr) - allowed
                if extra:
                    out.append(
                        f"{label}[{k + 1}] reads {sorted(extra)} beyond x1..x{k + 1}"
                    )
        return out


def derivative(
    dyn: ModeDynamics,
    x: Sequence[float],
    next_channel: Sequence[float],
    powers: Sequence[int],
    check_gain_bounds: bool = False,
) -> np.ndarray:
    """State derivative of one mode.

    next_channel[k] is x_{k+1} for k < n-1 and the control input for the
    last channel.  With check_gain_bounds, every evaluated gain is compared
    against its declared band and a GainBoundWarning is emitted on
    violation (the value is still returned).
    """
    n = dyn.n
    if len(x) != n or len(next_channel) != n or len(powers) != n:
        raise ValueError("x, next_channel and powers must all have length n")
    xs = list(x)
    out = np.empty(n)
    for k in range(n):
        try:
            phi = compile_fn(dyn.drift[k])(xs)
            g = compile_fn(dyn.gain[k])(xs)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ValueError(f"channel {k + 1}: {exc}") from exc
        if check_gain_bounds:
            lo, hi = dyn.gain_bounds[k]
            if not lo <= g <= hi:
                warnings.warn(
                    f"gain[{k + 1}]={g:.6g} outside declared band [{lo}, {hi}]",
                    GainBoundWarning,
                    stacklevel=2,
                )
        out[k] = phi + g * odd_pow(float(next_channel[k]), powers[k])
    return out


@dataclass(frozen=True)
class SwitchingSchedule:
    """Right-continuous piecewise-constant mode signal on [0, inf).

    segments are (start_time, mode) pairs with strictly increasing starts,
    the first at t = 0; the mode of the last segment extends forever.
    dwell_min and seed are provenance metadata for generated schedules and
    do not take part in equality.
    """

    mode_count: int
    starts: tuple[float, ...]
    modes: tuple[int, ...]
    dwell_min: float | None = field(default=None, compare=False)
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.mode_count < 1:
            raise ValueError("mode_count must be >= 1")
        if not self.starts or self.starts[0] != 0.0:
            raise ValueError("first segment must start at t=0")
        if len(self.starts) != len(self.modes):
            raise ValueError("one mode per segment required")
        if any(b <= a for a, b in zip(self.starts, self.starts[1:])):
            raise ValueError("segment start times must be strictly increasing")
        if any(not 1 <= m <= self.mode_count for m in self.modes):
            raise ValueError("mode indices must lie in 1..mode_count")

    def segment_lengths(self, horizon: float) -> list[float]:
        ends = list(self.starts[1:]) + [max(horizon, self.starts[-1])]
        return [e - s for s, e in zip(self.starts, ends)]


def mode_at(schedule: SwitchingSchedule, t: float) -> int:
    """Active mode at time t >= 0 (right-continuous lookup)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return schedule.modes[bisect_right(schedule.starts, t) - 1]


def generate_schedule(
    seed: int, mode_count: int, dwell_min: float, horizon: float
) -> SwitchingSchedule:
    """Seeded random schedule covering [0, horizon].

    Segment lengths are uniform in [dwell_min, 3*dwell_min]; modes are
    uniform over 1..mode_count with immediate repeats resampled away.
    Identical arguments give identical schedules.
    """
    if not dwell_min > 0:
        raise ValueError("dwell_min must be positive")
    if mode_count < 1:
        raise ValueError("mode_count must be >= 1")
    rng = np.random.default_rng(seed)
    starts: list[float] = []
    modes: list[int] = []
    t = 0.0
    prev = 0
    while t <= horizon:
        m = int(rng.integers(1, mode_count + 1))
        while mode_count > 1 and m == prev:
            m = int(rng.integers(1, mode_count + 1))
        starts.append(t)
        modes.append(m)
        prev = m
        t += float(rng.uniform(dwell_min, 3.0 * dwell_min))
    return SwitchingSchedule(
        mode_count=mode_count,
        starts=tuple(starts),
        modes=tuple(modes),
        dwell_min=dwell_min,
        seed=seed,
    )


@dataclass(frozen=True)
class LeaderSignal:
    """Reference output y_r(t); an expression in t alone."""

    expr: Expression

    def __post_init__(self) -> None:
        extra = variables(self.expr) - {"t"}
        if extra:
            raise ValueError(f"leader signal may only read t, found {sorted(extra)}")

    def value(self, t: float) -> float:
        return compile_fn(self.expr)((), t)

    def text(self) -> str:
        return pretty(self.expr)

    def assert_bounded(self, horizon: float, samples: int = 1001) -> None:
        """Sampled finiteness check over [0, horizon]."""
        fn = compile_fn(self.expr)
        for i in range(samples):
            t = horizon * i / (samples - 1)
            v = fn((), t)
            if not np.isfinite(v):
                raise ValueError(f"leader signal not finite at t={t}")
