"""Distributed adaptive controller for one follower.

The design chain per follower f with n state channels and odd powers
r_1..r_n (r_max = max r_k, rbar_k = (r_max+1)/(r_max-r_k+1),
runder_k = (r_max+1)/r_k):

    s_1 = sum_l a_l (y_f - y_l) + mu (y_f - y_ref)      neighborhood error
    s_k = x_k - v_{k-1}                                  surface errors
    v_k = -s_k * varsigma_k                              virtual controls
    u   = v_n                                            actual input

with the gain

    varsigma_k = scale_k^(1/r_k)
                 * (c_k + zeta_k^rbar_k * xi_k * theta_k^rbar_k + b_k^rbar_k)^(1/r_k)

where theta_k is the regressor magnitude from the follower's basis network,
xi_k >= 0 is the adaptive estimate, and scale_k compensates the worst-case
input gain and the separation margin:

    scale_1 = 1 / (h_lower_1 * (d_f + mu) * (1 - d))
    scale_k = 1 / (h_lower_k * (1 - d)),   k >= 2.

Estimates evolve by a growth term that is always nonnegative plus a leak:

    xi_k' = beta_k * zeta_k^rbar_k * s_k^(r_max+1) * theta_k^rbar_k
            - beta_k * sigma_k * xi_k.

The same u is applied in every plant mode; nothing here reads the switching
signal, which is what makes the controller valid under arbitrary
asynchronous switching.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .graph import GraphTopology
from .rbf import RbfNetwork


@dataclass(frozen=True)
class PowerProfile:
    """Odd channel powers of one follower plus the derived exponents."""

    powers: tuple[int, ...]
    r_max: int
    rbar: tuple[float, ...]
    runder: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.powers:
            raise ValueError("at least one channel power required")
        for r in self.powers:
            if not isinstance(r, int) or r < 1 or r % 2 == 0:
                raise ValueError(f"powers must be positive odd integers, got {r!r}")
        if self.r_max != max(self.powers):
            raise ValueError("r_max inconsistent with powers")
        expect_bar = tuple((self.r_max + 1) / (self.r_max - r + 1) for r in self.powers)
        expect_under = tuple((self.r_max + 1) / r for r in self.powers)
        if self.rbar != expect_bar or self.runder != expect_under:
            raise ValueError("derived exponents inconsistent with powers")

    @classmethod
    def from_powers(cls, powers: Sequence[int]) -> "PowerProfile":
        ps = tuple(int(r) for r in powers)
        r_max = max(ps)
        return cls(
            powers=ps,
            r_max=r_max,
            rbar=tuple((r_max + 1) / (r_max - r + 1) for r in ps),
            runder=tuple((r_max + 1) / r for r in ps),
        )

    @property
    def n(self) -> int:
        return len(self.powers)


@dataclass(frozen=True)
class FollowerGainSet:
    """Per-step design constants of one follower.

    All entries are strictly positive; d in (0, 1) is the shared separation
    offset and h_lower[k] the smallest declared input-gain lower bound over
    that follower's modes.
    """

    c: tuple[float, ...]
    zeta: tuple[float, ...]
    b: tuple[float, ...]
    beta: tuple[float, ...]
    sigma: tuple[float, ...]
    d: float
    h_lower: tuple[float, ...]

    def __post_init__(self) -> None:
        n = len(self.c)
        for name in ("zeta", "b", "beta", "sigma", "h_lower"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} must have the same length as c")
        for name in ("c", "zeta", "b", "beta", "sigma", "h_lower"):
            if any(not v > 0 for v in getattr(self, name)):
                raise ValueError(f"all {name} entries must be strictly positive")
        if not 0.0 < self.d < 1.0:
            raise ValueError(f"d={self.d} must lie in (0, 1)")

    @property
    def n(self) -> int:
        return len(self.c)


@dataclass(frozen=True)
class ControllerState:
    """Adaptive estimates of one follower; nonnegative at all times."""

    xi_hat: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.xi_hat):
            raise ValueError("adaptive estimates must be nonnegative")


class ControlOutput(NamedTuple):
    u: float
    s: tuple[float, ...]
    v: tuple[float, ...]
    theta: tuple[float, ...]


def neighborhood_tracking_error(
    y_f: float,
    neighbor_ys: Mapping[int, float],
    adjacency_row: Sequence[int],
    mu_f: int,
    y_r: float,
) -> float:
    """s_1 = sum over listened-to neighbors of (y_f - y_l) + mu*(y_f - y_r)."""
    s = 0.0
    for l, a in enumerate(adjacency_row):
        if a:
            if l not in neighbor_ys:
                raise ValueError(f"missing output of neighbor {l}")
            s += y_f - neighbor_ys[l]
    return s + mu_f * (y_f - y_r)


def surface_error(x_k: float, v_prev: float) -> float:
    """s_k = x_k - v_{k-1} for interior steps."""
    return x_k - v_prev


def control_effort_scale(
    k: int, in_degree: int, leader_link: int, gains: FollowerGainSet
) -> float:
    """Worst-case compensation factor for design step k (1-based).

    Step 1 divides by the information weight d_f + mu_f as well, because the
    first error derivative carries that factor in front of the input gain.
    Raises for a disconnected follower (no neighbors, no leader link).
    """
    if not 1 <= k <= gains.n:
        raise ValueError(f"step index {k} out of range 1..{gains.n}")
    hl = gains.h_lower[k - 1]
    if k == 1:
        weight = in_degree + leader_link
        if weight < 1:
            raise ValueError("follower has no information source (d_f + mu_f = 0)")
        return 1.0 / (hl * weight * (1.0 - gains.d))
    return 1.0 / (hl * (1.0 - gains.d))


def virtual_gain(
    k: int,
    xi_hat_k: float,
    theta_k: float,
    scale_k: float,
    gains: FollowerGainSet,
    powers: PowerProfile,
) -> float:
    """varsigma_k; strictly positive, nondecreasing in xi_hat_k and theta_k.

    Fractional powers only ever apply to nonnegative bases here, with
    theta^rbar = 0 at theta = 0.
    """
    i = k - 1
    r = powers.powers[i]
    rbar = powers.rbar[i]
    core = (
        gains.c[i]
        + gains.zeta[i] ** rbar * xi_hat_k * theta_k ** rbar
        + gains.b[i] ** rbar
    )
    return scale_k ** (1.0 / r) * core ** (1.0 / r)


def virtual_control(s_k: float, varsigma_k: float) -> float:
    """v_k = -s_k * varsigma_k; opposes the surface error."""
    return -s_k * varsigma_k


def adaptation_rate(
    k: int,
    s_k: float,
    theta_k: float,
    xi_hat_k: float,
    gains: FollowerGainSet,
    powers: PowerProfile,
) -> float:
    """xi_k' = beta*zeta^rbar*s^(r_max+1)*theta^rbar - beta*sigma*xi.

    The growth term is nonnegative for every real s because r_max + 1 is
    even, so the exact flow never drives an estimate below zero.
    """
    i = k - 1
    rbar = powers.rbar[i]
    growth = (
        gains.beta[i]
        * gains.zeta[i] ** rbar
        * s_k ** (powers.r_max + 1)
        * theta_k ** rbar
    )
    return growth - gains.beta[i] * gains.sigma[i] * xi_hat_k


def regressor(
    k: int,
    own_states: Sequence[float],
    neighbor_states: Mapping[int, Sequence[float]],
    xi_hat: Sequence[float],
    mu_f: int,
    y_r: float,
) -> tuple[float, ...]:
    """Measurable inputs of the step-k basis network (k is 1-based).

    Step 1 reads the follower's own output and each listened-to neighbor's
    first two states.  Later steps additionally read the follower's own
    states up to k, its earlier adaptive estimates and mu_f*y_r.  Neighbors
    appear in ascending index order so the layout is deterministic.
    """
    z = list(own_states[:k])
    for l in sorted(neighbor_states):
        ns = neighbor_states[l]
        z.extend(float(v) for v in ns[:2])
    if k >= 2:
        z.extend(xi_hat[: k - 1])
        z.append(mu_f * y_r)
    return tuple(z)


def regressor_dim(k: int, neighbor_dims: Sequence[int]) -> int:
    """Input width of the step-k network given each neighbor's n."""
    width = k + sum(min(2, n) for n in neighbor_dims)
    if k >= 2:
        width += (k - 1) + 1
    return width


class FollowerController:
    """Precomputed control pipeline of one follower.

    Pure: every call maps (states, neighbor states, reference, estimates)
    to the same outputs, and no plant mode information enters anywhere.
    """

    def __init__(
        self,
        follower: int,
        topology: GraphTopology,
        gains: FollowerGainSet,
        powers: PowerProfile,
        nets: Sequence[RbfNetwork],
    ):
        n = powers.n
        if gains.n != n or len(nets) != n:
            raise ValueError("gains, powers and nets must agree on step count")
        self.follower = follower
        self.n = n
        self.gains = gains
        self.powers = powers
        self.nets = tuple(nets)
        self.neighbors = topology.neighbors(follower)
        self.adjacency_row = topology.adjacency[follower]
        self.mu = topology.leader_links[follower]
        self.in_degree = topology.in_degree(follower)
        self._inv_r = tuple(1.0 / r for r in powers.powers)
        self._scale = tuple(
            control_effort_scale(k, self.in_degree, self.mu, gains)
            for k in range(1, n + 1)
        )
        self._scale_pow = tuple(
            self._scale[i] ** self._inv_r[i] for i in range(n)
        )
        self._zeta_pow = tuple(
            gains.zeta[i] ** powers.rbar[i] for i in range(n)
        )
        self._b_pow = tuple(gains.b[i] ** powers.rbar[i] for i in range(n))
        self._beta_zeta = tuple(
            gains.beta[i] * self._zeta_pow[i] for i in range(n)
        )
        self._beta_sigma = tuple(
            gains.beta[i] * gains.sigma[i] for i in range(n)
        )
        self._rf1 = powers.r_max + 1

    def compute(
        self,
        local_states: Sequence[float],
        neighbor_states: Mapping[int, Sequence[float]],
        y_r: float,
        xi_hat: Sequence[float],
    ) -> ControlOutput:
        """Run the full error/gain/virtual-control chain down to u."""
        if len(local_states) != self.n:
            raise ValueError(f"expected {self.n} local states")
        for l in self.neighbors:
            if l not in neighbor_states:
                raise ValueError(f"missing state of neighbor {l}")
        y_f = float(local_states[0])
        s_k = self.mu * (y_f - y_r)
        for l in self.neighbors:
            s_k += y_f - float(neighbor_states[l][0])

        gains = self.gains
        rbar = self.powers.rbar
        s: list[float] = [s_k]
        v: list[float] = []
        theta: list[float] = []
        for i in range(self.n):
            z = regressor(i + 1, local_states, neighbor_states, xi_hat, self.mu, y_r)
            th = self.nets[i].theta(z)
            core = gains.c[i] + self._zeta_pow[i] * xi_hat[i] * th ** rbar[i] + self._b_pow[i]
            varsigma = self._scale_pow[i] * core ** self._inv_r[i]
            v_i = -s_k * varsigma
            theta.append(th)
            v.append(v_i)
            if i + 1 < self.n:
                s_k = float(local_states[i + 1]) - v_i
                s.append(s_k)
        return ControlOutput(u=v[-1], s=tuple(s), v=tuple(v), theta=tuple(theta))

    def adaptation_rates(
        self,
        s: Sequence[float],
        theta: Sequence[float],
        xi_hat: Sequence[float],
    ) -> tuple[float, ...]:
        """Time derivatives of all adaptive estimates at once."""
        rbar = self.powers.rbar
        rf1 = self._rf1
        return tuple(
            self._beta_zeta[i] * s[i] ** rf1 * theta[i] ** rbar[i]
            - self._beta_sigma[i] * xi_hat[i]
            for i in range(self.n)
        )


def control_input(
    f: int,
    local_states: Sequence[float],
    neighbor_states: Mapping[int, Sequence[float]],
    y_r: float,
    xi_hat: Sequence[float],
    nets: Sequence[RbfNetwork],
    gains: FollowerGainSet,
    powers: PowerProfile,
    topology: GraphTopology,
    active_mode: int | None = None,
) -> ControlOutput:
    """One-shot controller evaluation for follower f (0-based).

    active_mode is accepted for interface symmetry with the switched plant
    and is deliberately ignored: the same input is applied whatever mode the
    plant is in.
    """
    del active_mode  # the common controller never reads the switching signal
    ctrl = FollowerController(f, topology, gains, powers, nets)
    return ctrl.compute(local_states, neighbor_states, y_r, xi_hat)
