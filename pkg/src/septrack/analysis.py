"""Post-run consensus metrics and the closed-form convergence-bound composer.

Two distinct layers live here on purpose:

* `consensus_metrics` and `check_boundedness` evaluate what a finished run
  actually did (tracking errors, certified consensus-error envelopes from
  the grounded-Laplacian geometry, finiteness against thresholds).

* `compose_convergence_bounds` is a what-if calculator.  The stability
  argument behind the controller yields V' <= -decay_rate*V +
  forcing_offset for a combined energy function, hence an exponential decay
  onto a residual set.  Several constants in that chain (approximator
  weight norms, approximation-error bounds, inequality slacks) are
  unknowable at runtime; they enter here as user-assumed inputs and the
  calculator composes the decay rate, the forcing offset, the limiting
  tracking-error norm and the residual-set radius.  Nothing computed here
  is ever fed back into control.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graph import min_singular_value
from .simulator import NetworkScenario, Trajectory


@dataclass(frozen=True)
class AssumedConstants:
    """Per-(follower, step) proof-side constants, all user assumed.

    weight_bound  : assumed magnitude of the ideal approximator weights
                    (already raised to the step's rbar exponent)
    approx_error  : bound on the approximation error over the operating set
    slack         : additive slack of the domination inequality
    rho, varrho   : Young-split design constants of the cross-term bound
    overshoot     : separation overshoot factor (upsilon_bar) per step
    gain_upper    : input-gain upper bound per step
    gamma         : per-follower leveling constant of the final comparison
    """

    weight_bound: tuple[tuple[float, ...], ...]
    approx_error: tuple[tuple[float, ...], ...]
    slack: tuple[tuple[float, ...], ...]
    rho: tuple[tuple[float, ...], ...]
    varrho: tuple[tuple[float, ...], ...]
    overshoot: tuple[tuple[float, ...], ...]
    gain_upper: tuple[tuple[float, ...], ...]
    gamma: tuple[float, ...]

    def __post_init__(self) -> None:
        n_f = len(self.gamma)
        for name in (
            "weight_bound",
            "approx_error",
            "slack",
            "rho",
            "varrho",
            "overshoot",
            "gain_upper",
        ):
            rows = getattr(self, name)
            if len(rows) != n_f:
                raise ValueError(f"{name} must have one row per follower")
        for f in range(n_f):
            width = len(self.weight_bound[f])
            for name in ("approx_error", "slack", "rho", "varrho", "overshoot", "gain_upper"):
                if len(getattr(self, name)[f]) != width:
                    raise ValueError(f"{name}[{f}] width mismatch")
        for row in self.weight_bound:
            if any(v < 0 for v in row):
                raise ValueError("weight_bound entries must be >= 0")
        for name in ("approx_error", "slack", "rho", "varrho", "overshoot", "gain_upper"):
            for row in getattr(self, name):
                if any(not v > 0 for v in row):
                    raise ValueError(f"{name} entries must be > 0")
        if any(not g > 0 for g in self.gamma):
            raise ValueError("gamma entries must be > 0")

    @classmethod
    def uniform(
        cls,
        steps_per_follower: Sequence[int],
        weight_bound: float = 1.0,
        approx_error: float = 1.0,
        slack: float = 1.0,
        rho: float = 1.0,
        varrho: float = 1.0,
        overshoot: float = 1.0,
        gain_upper: float = 1.0,
        gamma: float = 1.0,
    ) -> "AssumedConstants":
        def rows(v: float) -> tuple[tuple[float, ...], ...]:
            return tuple(tuple(float(v) for _ in range(n)) for n in steps_per_follower)

        return cls(
            weight_bound=rows(weight_bound),
            approx_error=rows(approx_error),
            slack=rows(slack),
            rho=rows(rho),
            varrho=rows(varrho),
            overshoot=rows(overshoot),
            gain_upper=rows(gain_upper),
            gamma=tuple(float(gamma) for _ in steps_per_follower),
        )


@dataclass(frozen=True)
class BoundReport:
    """Composed convergence constants and residual-set radius."""

    decay_rate: float  # smallest per-follower decay rate
    forcing_offset: float  # summed constant forcing of the energy decrease
    s1_limit: float  # limiting bound on ||s1||
    residual_radius: float  # consensus-error radius via the agent-count bound
    per_follower_decay: tuple[float, ...]
    per_follower_forcing: tuple[float, ...]
    psi_upper: tuple[float, ...]
    psi_lower: tuple[float, ...]
    margins: tuple[tuple[float, ...], ...]  # c_k - theta_k - vartheta_{k-1}
    feasible: bool
    infeasible_steps: tuple[tuple[int, int], ...]  # (follower, step), 0-based


def compose_convergence_bounds(
    scenario: NetworkScenario,
    assumed: AssumedConstants,
    psi_reading: str = "first_step",
) -> BoundReport:
    """Compose decay rate, forcing offset and residual radius.

    Per follower f and step k (tau = gain_upper * overshoot; the first step
    additionally carries the information weight d_f + mu_f):

        theta_k    = [weight] * tau_k * rho_k^rbar_k
        vartheta_k = [weight] * tau_k * varrho_k^(-runder_k)
        margin_k   = c_k - theta_k - vartheta_{k-1}        (vartheta_0 = 0)
        kappa_k    = zeta_k^(-runder_k) + b_k^(-runder_k)*approx_error^runder_k
        level_k    = gamma^((r_k-1)/(r_max+1)) * margin_k
        decay_f    = min_k min((r_max - r_k + 2)*level_k, beta_k*sigma_k)
        forcing_f  = sum_k sigma_k*weight_bound_k^2/2 + (kappa_k + slack_k)
                           + gamma*margin_k

    then decay = min_f decay_f, forcing = sum_f forcing_f,
    s1_limit = sqrt(sum_f ((forcing/decay)*psi_upper_f)^(2/psi_lower_f)),
    and the residual radius divides s1_limit by the agent-count-only bound.

    psi_reading picks how the per-follower exponents psi are read:
    "first_step" uses r_max - r_1 + 2 for both (the printed form),
    "extremal" takes max/min of r_max - r_k + 2 over k.
    Steps with margin <= 0 are flagged infeasible rather than bounded.
    """
    if psi_reading not in ("first_step", "extremal"):
        raise ValueError("psi_reading must be 'first_step' or 'extremal'")
    n_f = len(scenario.followers)
    if len(assumed.gamma) != n_f:
        raise ValueError("assumed constants cover a different follower count")

    per_decay: list[float] = []
    per_forcing: list[float] = []
    psi_up: list[float] = []
    psi_lo: list[float] = []
    margins_all: list[tuple[float, ...]] = []
    infeasible: list[tuple[int, int]] = []

    for fi, spec in enumerate(scenario.followers):
        n = spec.n
        if len(assumed.weight_bound[fi]) != n:
            raise ValueError(f"assumed constants row {fi} has wrong width")
        powers = spec.powers
        gains = spec.gains
        weight = scenario.topology.in_degree(fi) + scenario.topology.leader_links[fi]
        gamma = assumed.gamma[fi]

        margins: list[float] = []
        decay_terms: list[float] = []
        forcing = 0.0
        prev_vartheta = 0.0
        for k in range(n):
            tau = assumed.gain_upper[fi][k] * assumed.overshoot[fi][k]
            w = weight if k == 0 else 1.0
            theta_k = w * tau * assumed.rho[fi][k] ** powers.rbar[k]
            vartheta_k = w * tau * assumed.varrho[fi][k] ** (-powers.runder[k])
            margin = gains.c[k] - theta_k - prev_vartheta
            margins.append(margin)
            if margin <= 0.0:
                infeasible.append((fi, k))
            kappa = (
                gains.zeta[k] ** (-powers.runder[k])
                + gains.b[k] ** (-powers.runder[k])
                * assumed.approx_error[fi][k] ** powers.runder[k]
            )
            level = gamma ** ((powers.powers[k] - 1) / (powers.r_max + 1)) * margin
            decay_terms.append((powers.r_max - powers.powers[k] + 2) * level)
            decay_terms.append(gains.beta[k] * gains.sigma[k])
            forcing += (
                gains.sigma[k] * assumed.weight_bound[fi][k] ** 2 / 2.0
                + (kappa + assumed.slack[fi][k])
                + gamma * margin
            )
            prev_vartheta = vartheta_k

        per_decay.append(min(decay_terms))
        per_forcing.append(forcing)
        margins_all.append(tuple(margins))
        psis = [powers.r_max - r + 2 for r in powers.powers]
        if psi_reading == "first_step":
            psi_up.append(float(psis[0]))
            psi_lo.append(float(psis[0]))
        else:
            psi_up.append(float(max(psis)))
            psi_lo.append(float(min(psis)))

    feasible = not infeasible
    decay = min(per_decay)
    forcing = sum(per_forcing)
    if feasible and decay > 0.0:
        ratio = forcing / decay
        s1_limit = float(
            np.sqrt(sum((ratio * pu) ** (2.0 / pl) for pu, pl in zip(psi_up, psi_lo)))
        )
        n = n_f
        # agent-count-only singular-value stand-in, with 0^0 = 1 at n = 1
        n_bar = 1.0 if n == 1 else ((n - 1) / n) ** ((n - 1) / 2)
        residual = s1_limit * (n * n + n - 1) / n_bar
    else:
        s1_limit = float("inf")
        residual = float("inf")

    return BoundReport(
        decay_rate=decay,
        forcing_offset=forcing,
        s1_limit=s1_limit,
        residual_radius=residual,
        per_follower_decay=tuple(per_decay),
        per_follower_forcing=tuple(per_forcing),
        psi_upper=tuple(psi_up),
        psi_lower=tuple(psi_lo),
        margins=tuple(margins_all),
        feasible=feasible,
        infeasible_steps=tuple(infeasible),
    )


@dataclass
class ConsensusMetrics:
    """Tracking and consensus-error summaries of a finished run."""

    times: np.ndarray
    s1_norm: np.ndarray  # ||s1(t)|| over followers
    tracking_abs: np.ndarray  # (T, N) per-follower |y_f - y_r|
    delta_envelope: np.ndarray  # certified ||y - y_r|| bound via min sing. value
    conservative_envelope: np.ndarray  # same via the agent-count-only bound
    max_abs_tracking_error: tuple[float, ...]
    final_abs_tracking_error: tuple[float, ...]
    max_pairwise_error: float
    final_pairwise_error: float
    max_s1_norm: float
    final_s1_norm: float


def consensus_metrics(traj: Trajectory, H, conservative_bound: float | None = None) -> ConsensusMetrics:
    """Summarize tracking behaviour and the consensus-error envelopes.

    H is the grounded Laplacian of the topology the run used; the recorded
    s1 columns are stacked and divided by its smallest singular value to
    produce a certified envelope on ||y - y_r||, and by the agent-count-only
    bound (if supplied) for the topology-blind envelope.
    """
    n = traj.n_followers
    H = np.asarray(H, dtype=float)
    if H.shape != (n, n):
        raise ValueError(f"H has shape {H.shape}, expected ({n}, {n})")
    t_len = len(traj.times)
    for tr in traj.followers:
        if len(tr.s1) != t_len or tr.x.shape[0] != t_len:
            raise ValueError("trajectory columns are not aligned to one grid")

    s1 = np.stack([tr.s1 for tr in traj.followers], axis=1)  # (T, N)
    outputs = np.stack([tr.x[:, 0] for tr in traj.followers], axis=1)
    s1_norm = np.linalg.norm(s1, axis=1)
    tracking = np.abs(outputs - traj.y_r[:, None])

    sv_min = min_singular_value(H)
    delta_env = s1_norm / sv_min if sv_min > 0 else np.full_like(s1_norm, np.inf)
    if conservative_bound is not None and conservative_bound > 0:
        cons_env = s1_norm / conservative_bound
    else:
        cons_env = np.full_like(s1_norm, np.nan)

    pair_max = 0.0
    pair_final = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d = np.abs(outputs[:, i] - outputs[:, j])
            pair_max = max(pair_max, float(d.max()))
            pair_final = max(pair_final, float(d[-1]))

    return ConsensusMetrics(
        times=traj.times,
        s1_norm=s1_norm,
        tracking_abs=tracking,
        delta_envelope=delta_env,
        conservative_envelope=cons_env,
        max_abs_tracking_error=tuple(float(v) for v in tracking.max(axis=0)),
        final_abs_tracking_error=tuple(float(v) for v in tracking[-1]),
        max_pairwise_error=pair_max,
        final_pairwise_error=pair_final,
        max_s1_norm=float(s1_norm.max()),
        final_s1_norm=float(s1_norm[-1]),
    )


@dataclass
class BoundednessReport:
    ok: bool
    violations: tuple[tuple[float, str, float], ...]  # (time, signal, value)

    @property
    def first_violation(self) -> tuple[float, str, float] | None:
        return self.violations[0] if self.violations else None


_SIGNAL_KEYS = ("state", "estimate", "control", "tracking_error")


def check_boundedness(
    traj: Trajectory, thresholds: Mapping[str, float] | None = None
) -> BoundednessReport:
    """Finiteness (always) and threshold checks (when given) per signal.

    thresholds may bound any of: "state" (|x|), "estimate" (|xi|),
    "control" (|u|), "tracking_error" (|s1|).  Report-only: never raises
    on violations.
    """
    thresholds = dict(thresholds or {})
    unknown = set(thresholds) - set(_SIGNAL_KEYS)
    if unknown:
        raise ValueError(f"unknown threshold keys: {sorted(unknown)}")
    violations: list[tuple[float, str, float]] = []

    def scan(values: np.ndarray, label: str, key: str) -> None:
        flat = np.abs(np.asarray(values, dtype=float))
        bad = ~np.isfinite(flat)
        limit = thresholds.get(key)
        if limit is not None:
            bad |= flat > limit
        idx = np.where(bad.any(axis=tuple(range(1, flat.ndim))) if flat.ndim > 1 else bad)[0]
        for i in idx:
            v = flat[i] if flat.ndim == 1 else flat[i].max()
            violations.append((float(traj.times[i]), label, float(v)))

    for fi, tr in enumerate(traj.followers):
        scan(tr.x, f"follower {fi + 1} state", "state")
        scan(tr.xi, f"follower {fi + 1} estimate", "estimate")
        scan(tr.u, f"follower {fi + 1} control", "control")
        scan(tr.s1, f"follower {fi + 1} tracking error", "tracking_error")

    violations.sort(key=lambda rec: rec[0])
    return BoundednessReport(ok=not violations, violations=tuple(violations))
