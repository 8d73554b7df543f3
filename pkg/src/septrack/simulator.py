"""Fixed-step closed-loop integration of the whole network.

The global state stacks, follower by follower, the plant states x_1..x_n
followed by the adaptive estimates xi_1..xi_n.  One classical fourth-order
Runge-Kutta step advances everything together; the controller is evaluated
inside every stage (continuous-feedback semantics), each follower's mode is
frozen at the step start (switch times are grid aligned by construction),
and estimates are clamped at zero after every step so a finite step size
cannot push them below the nonnegativity the adaptation law preserves in
exact arithmetic.

The high odd powers make the loop locally stiff when errors are large;
the cure here is a small fixed step (default 1e-4), not an implicit
scheme, which keeps runs deterministic and dependency free.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .controller import FollowerController, FollowerGainSet, PowerProfile
from .expressions import compile_fn
from .graph import GraphTopology, has_leader_rooted_spanning_tree
from .plant import GainBoundWarning, LeaderSignal, ModeDynamics, SwitchingSchedule
from .rbf import ApproximatorSpec, RbfNetwork


class SimulationDiverged(RuntimeError):
    """A state left the finite range during integration."""

    def __init__(self, t: float, signal: str):
        self.t = t
        self.signal = signal
        super().__init__(
            f"non-finite value in {signal} at t={t:.6g}; "
            "the closed loop is too stiff for this step size, try halving dt"
        )


@dataclass(frozen=True)
class FollowerSpec:
    """Everything one follower brings to a scenario."""

    powers: PowerProfile
    gains: FollowerGainSet
    modes: tuple[ModeDynamics, ...]
    switching: SwitchingSchedule
    approximators: tuple[ApproximatorSpec, ...]
    nets: tuple[RbfNetwork, ...]
    x0: tuple[float, ...]
    xi0: tuple[float, ...]

    def __post_init__(self) -> None:
        n = self.powers.n
        if self.gains.n != n:
            raise ValueError("gains and powers disagree on channel count")
        if len(self.x0) != n or len(self.xi0) != n:
            raise ValueError("initial state and estimates must have length n")
        if len(self.nets) != n or len(self.approximators) != n:
            raise ValueError("one approximator per design step required")
        if not self.modes:
            raise ValueError("at least one mode required")
        if any(m.n != n for m in self.modes):
            raise ValueError("every mode must have n channels")
        if self.switching.mode_count != len(self.modes):
            raise ValueError("switching mode_count must match the mode list")
        if any(v < 0 for v in self.xi0):
            raise ValueError("initial adaptive estimates must be nonnegative")

    @property
    def n(self) -> int:
        return self.powers.n


@dataclass(frozen=True)
class NetworkScenario:
    """A complete closed-loop experiment: plant network + controllers + grid."""

    topology: GraphTopology
    followers: tuple[FollowerSpec, ...]
    leader: LeaderSignal
    dt: float
    horizon: float
    record_every: int = 10
    seed: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        if len(self.followers) != self.topology.follower_count:
            raise ValueError("one follower spec per topology node required")
        if not self.dt > 0 or not self.horizon > 0:
            raise ValueError("dt and horizon must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if not has_leader_rooted_spanning_tree(self.topology):
            raise ValueError(
                "topology has no leader-rooted spanning tree; "
                "consensus is not feasible"
            )

    @property
    def state_dim(self) -> int:
        return sum(2 * f.n for f in self.followers)

    def initial_state(self) -> np.ndarray:
        parts: list[float] = []
        for f in self.followers:
            parts.extend(f.x0)
            parts.extend(f.xi0)
        return np.array(parts, dtype=float)


@dataclass
class FollowerTrack:
    """Recorded signals of one follower on the common grid."""

    x: np.ndarray  # (T, n)
    xi: np.ndarray  # (T, n)
    u: np.ndarray  # (T,)
    s1: np.ndarray  # (T,)
    mode: np.ndarray  # (T,) int


@dataclass
class Trajectory:
    """Grid-aligned record of a completed run."""

    times: np.ndarray
    y_r: np.ndarray
    followers: list[FollowerTrack]
    gain_bound_violations: tuple[str, ...] = ()

    @property
    def n_followers(self) -> int:
        return len(self.followers)

    def output(self, f: int) -> np.ndarray:
        return self.followers[f].x[:, 0]


class ClosedLoop:
    """Bound scenario: precompiled expressions, controllers and offsets."""

    def __init__(self, scenario: NetworkScenario):
        self.scenario = scenario
        self.leader_fn = compile_fn(scenario.leader.expr)
        self.controllers: list[FollowerController] = []
        self.x_offsets: list[int] = []
        self.xi_offsets: list[int] = []
        self.dims: list[int] = []
        off = 0
        for fi, spec in enumerate(scenario.followers):
            self.controllers.append(
                FollowerController(
                    fi, scenario.topology, spec.gains, spec.powers, spec.nets
                )
            )
            self.x_offsets.append(off)
            self.xi_offsets.append(off + spec.n)
            self.dims.append(spec.n)
            off += 2 * spec.n
        self.state_dim = off
        # compiled drift/gain callables indexed [follower][mode-1][channel]
        self._drift = [
            [[compile_fn(e) for e in mode.drift] for mode in spec.modes]
            for spec in scenario.followers
        ]
        self._gain = [
            [[compile_fn(e) for e in mode.gain] for mode in spec.modes]
            for spec in scenario.followers
        ]

    def modes_at_index(self, step: int) -> tuple[int, ...]:
        t = step * self.scenario.dt
        from .plant import mode_at

        return tuple(
            mode_at(spec.switching, t) for spec in self.scenario.followers
        )

    def neighbor_view(self, y: np.ndarray, fi: int) -> dict[int, tuple[float, ...]]:
        out: dict[int, tuple[float, ...]] = {}
        for l in self.controllers[fi].neighbors:
            xo = self.x_offsets[l]
            out[l] = tuple(y[xo : xo + min(2, self.dims[l])])
        return out

    def derivative(self, t: float, y: np.ndarray, modes: Sequence[int]) -> np.ndarray:
        """Stacked derivative of plant states and adaptive estimates."""
        out = np.empty_like(y)
        y_r = self.leader_fn((), t)
        sc = self.scenario
        for fi, spec in enumerate(sc.followers):
            n = spec.n
            xo = self.x_offsets[fi]
            xs = y[xo : xo + n].tolist()
            xi = y[self.xi_offsets[fi] : self.xi_offsets[fi] + n].tolist()
            ctrl = self.controllers[fi]
            mode = modes[fi]
            try:
                res = ctrl.compute(xs, self.neighbor_view(y, fi), y_r, xi)
                drift = self._drift[fi][mode - 1]
                gain = self._gain[fi][mode - 1]
                powers = spec.powers.powers
                for k in range(n):
                    nxt = xs[k + 1] if k + 1 < n else res.u
                    p = nxt
                    for _ in range(powers[k] - 1):
                        p *= nxt
                    out[xo + k] = drift[k](xs) + gain[k](xs) * p
                rates = ctrl.adaptation_rates(res.s, res.theta, xi)
            except OverflowError:
                # a power of a huge error overflowed: the loop diverged
                raise SimulationDiverged(t, f"follower {fi + 1} closed loop") from None
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(
                    f"follower {fi + 1}, mode {mode}, t={t:.6g}: {exc}"
                ) from exc
            out[self.xi_offsets[fi] : self.xi_offsets[fi] + n] = rates
        return out

    def run(self) -> Trajectory:
        sc = self.scenario
        dt = sc.dt
        n_steps = int(round(sc.horizon / dt))
        if abs(n_steps * dt - sc.horizon) > 1e-9 * max(1.0, sc.horizon):
            raise ValueError("horizon must be an integer multiple of dt")
        # per-follower mode index per step, resolved once (switches are
        # grid aligned; the mode is frozen inside each step)
        t_grid = np.arange(n_steps + 1) * dt
        mode_of_step = []
        for spec in sc.followers:
            idx = np.searchsorted(np.array(spec.switching.starts), t_grid, side="right") - 1
            mode_of_step.append(np.array(spec.switching.modes)[idx])

        rec_idx = list(range(0, n_steps + 1, sc.record_every))
        if rec_idx[-1] != n_steps:
            rec_idx.append(n_steps)
        n_rec = len(rec_idx)
        times = np.empty(n_rec)
        y_r_rec = np.empty(n_rec)
        tracks = [
            FollowerTrack(
                x=np.empty((n_rec, spec.n)),
                xi=np.empty((n_rec, spec.n)),
                u=np.empty(n_rec),
                s1=np.empty(n_rec),
                mode=np.empty(n_rec, dtype=int),
            )
            for spec in sc.followers
        ]
        violations: dict[tuple[int, int, int], tuple[int, float, float]] = {}

        y = sc.initial_state()
        half = dt / 2.0
        sixth = dt / 6.0
        rec_pos = 0
        for i in range(n_steps + 1):
            t = i * dt
            if rec_pos < n_rec and i == rec_idx[rec_pos]:
                modes = tuple(int(mode_of_step[fi][i]) for fi in range(len(sc.followers)))
                self._record(rec_pos, t, y, modes, times, y_r_rec, tracks, violations)
                rec_pos += 1
            if i == n_steps:
                break
            modes = tuple(int(mode_of_step[fi][i]) for fi in range(len(sc.followers)))
            k1 = self.derivative(t, y, modes)
            k2 = self.derivative(t + half, y + half * k1, modes)
            k3 = self.derivative(t + half, y + half * k2, modes)
            k4 = self.derivative(t + dt, y + dt * k3, modes)
            y = y + sixth * (k1 + 2.0 * (k2 + k3) + k4)
            for fi in range(len(sc.followers)):
                a = self.xi_offsets[fi]
                b = a + self.dims[fi]
                np.maximum(y[a:b], 0.0, out=y[a:b])
            if not np.isfinite(y).all():
                raise SimulationDiverged((i + 1) * dt, self._locate_bad(y))

        viol_notes = self._summarize_violations(violations)
        for note in viol_notes:
            warnings.warn(note, GainBoundWarning, stacklevel=2)
        return Trajectory(
            times=times,
            y_r=y_r_rec,
            followers=tracks,
            gain_bound_violations=tuple(viol_notes),
        )

    def _record(self, pos, t, y, modes, times, y_r_rec, tracks, violations) -> None:
        times[pos] = t
        y_r = self.leader_fn((), t)
        y_r_rec[pos] = y_r
        for fi, spec in enumerate(self.scenario.followers):
            n = spec.n
            xo = self.x_offsets[fi]
            xs = y[xo : xo + n].tolist()
            xi = y[self.xi_offsets[fi] : self.xi_offsets[fi] + n].tolist()
            res = self.controllers[fi].compute(xs, self.neighbor_view(y, fi), y_r, xi)
            tr = tracks[fi]
            tr.x[pos] = xs
            tr.xi[pos] = xi
            tr.u[pos] = res.u
            tr.s1[pos] = res.s[0]
            tr.mode[pos] = modes[fi]
            # sampled gain-band check of the active mode along the run
            dyn = spec.modes[modes[fi] - 1]
            for k in range(n):
                g = self._gain[fi][modes[fi] - 1][k](xs)
                lo, hi = dyn.gain_bounds[k]
                if not lo <= g <= hi:
                    key = (fi, k, modes[fi])
                    cnt, worst, _ = violations.get(key, (0, g, t))
                    if abs(g - lo) > abs(worst - lo):
                        worst = g
                    violations[key] = (cnt + 1, worst, t)

    def _summarize_violations(self, violations) -> list[str]:
        notes = []
        for (fi, k, mode), (cnt, worst, t_last) in sorted(violations.items()):
            notes.append(
                f"follower {fi + 1} channel {k + 1} mode {mode}: sampled gain "
                f"left its declared band {cnt}x (worst {worst:.6g}, "
                f"last at t={t_last:.6g})"
            )
        return notes

    def _locate_bad(self, y: np.ndarray) -> str:
        bad = np.where(~np.isfinite(y))[0]
        idx = int(bad[0]) if bad.size else 0
        for fi in range(len(self.scenario.followers)):
            n = self.dims[fi]
            if idx < self.x_offsets[fi] + n:
                return f"follower {fi + 1} state x{idx - self.x_offsets[fi] + 1}"
            if idx < self.xi_offsets[fi] + n:
                return f"follower {fi + 1} estimate {idx - self.xi_offsets[fi] + 1}"
        return f"state component {idx}"


def closed_loop_derivative(
    scenario: NetworkScenario, global_state, t: float
) -> np.ndarray:
    """Pure stacked derivative at (t, state); modes resolved from schedules."""
    from .plant import mode_at

    loop = ClosedLoop(scenario)
    modes = tuple(mode_at(spec.switching, t) for spec in scenario.followers)
    return loop.derivative(t, np.asarray(global_state, dtype=float), modes)


def integrate(scenario: NetworkScenario) -> Trajectory:
    """Run the scenario to its horizon; deterministic for fixed inputs."""
    return ClosedLoop(scenario).run()


def rk4_step(f: Callable, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + dt / 2.0, y + (dt / 2.0) * k1)
    k3 = f(t + dt / 2.0, y + (dt / 2.0) * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def rk4_path(f: Callable, x0, t0: float, t_end: float, dt: float) -> np.ndarray:
    """Final state after fixed-step integration from t0 to t_end."""
    n = int(round((t_end - t0) / dt))
    if abs(t0 + n * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError("t_end - t0 must be an integer multiple of dt")
    y = np.asarray(x0, dtype=float)
    for i in range(n):
        y = rk4_step(f, t0 + i * dt, y, dt)
    return y


def convergence_order(f: Callable, x0, t_end: float, dt_list: Sequence[float]) -> float:
    """Observed integrator order from successive step halvings.

    Needs at least three resolutions with dt_list[i+1] = dt_list[i]/2; the
    window must be smooth (no switching) or the difference quotients are
    meaningless, in which case the degenerate differences are rejected.
    """
    if len(dt_list) < 3:
        raise ValueError("need at least 3 step sizes")
    for a, b in zip(dt_list, dt_list[1:]):
        if not np.isclose(b, a / 2.0):
            raise ValueError("dt_list must halve from one entry to the next")
    finals = [rk4_path(f, x0, 0.0, t_end, dt) for dt in dt_list]
    orders = []
    for i in range(len(finals) - 2):
        e1 = float(np.linalg.norm(finals[i] - finals[i + 1]))
        e2 = float(np.linalg.norm(finals[i + 1] - finals[i + 2]))
        if e1 <= 0.0 or e2 <= 0.0 or e2 >= e1:
            raise ValueError(
                "successive-refinement differences do not contract; "
                "the window is not smooth enough for an order estimate"
            )
        orders.append(float(np.log2(e1 / e2)))
    return float(np.mean(orders))
