"""Gaussian radial-basis regressors.

The adaptive laws never need basis weights: the only quantity a controller
consumes online is the regressor magnitude theta(z) = ||phi(z)|| where
phi_i(z) = exp(-||z - c_i||^2 / eta_i^2).  Each basis value lies in (0, 1],
so theta is trapped in (0, sqrt(M)] for an M-node network, which is what
makes the adaptive gain terms bounded by construction.

Center placement is a uniform lattice over a box for low-dimensional
regressors; above four inputs the lattice explodes, so a fixed budget of
seeded pseudo-random centers in the same box is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

RANDOM_CENTER_BUDGET = 125  # node budget for the input_dim > 4 fallback
LATTICE_DIM_LIMIT = 4


@dataclass(frozen=True)
class RbfNetwork:
    """Immutable Gaussian basis: M centers with per-node widths."""

    input_dim: int
    centers: tuple[tuple[float, ...], ...]
    widths: tuple[float, ...]
    _centers_arr: np.ndarray = field(init=False, repr=False, compare=False)
    _neg_inv_w2: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if len(self.centers) < 1:
            raise ValueError("at least one node required")
        if len(self.widths) != len(self.centers):
            raise ValueError("one width per center required")
        if any(not w > 0 for w in self.widths):
            raise ValueError("all widths must be positive")
        if any(len(c) != self.input_dim for c in self.centers):
            raise ValueError("every center must have input_dim coordinates")
        centers = np.array(self.centers, dtype=float)
        centers.setflags(write=False)
        neg_inv = -1.0 / np.array(self.widths, dtype=float) ** 2
        neg_inv.setflags(write=False)
        object.__setattr__(self, "_centers_arr", centers)
        object.__setattr__(self, "_neg_inv_w2", neg_inv)

    @property
    def node_count(self) -> int:
        return len(self.centers)

    @property
    def theta_upper_bound(self) -> float:
        """sqrt(M); theta never exceeds it for any input."""
        return math.sqrt(self.node_count)

    def basis(self, z) -> np.ndarray:
        """Vector of Gaussian node activations exp(-||z - c_i||^2 / eta_i^2)."""
        zv = np.asarray(z, dtype=float)
        if zv.shape != (self.input_dim,):
            raise ValueError(
                f"input has shape {zv.shape}, expected ({self.input_dim},)"
            )
        d = self._centers_arr - zv
        q = np.einsum("ij,ij->i", d, d)
        q *= self._neg_inv_w2
        np.exp(q, out=q)
        return q

    def theta(self, z) -> float:
        """Euclidean norm of the activation vector; in (0, sqrt(M)]."""
        b = self.basis(z)
        return math.sqrt(float(b @ b))

    def lipschitz_estimate(self) -> float:
        """Analytic bound on |theta(z) - theta(z')| / ||z - z'||.

        Each node's gradient norm peaks at sqrt(2)/(eta*sqrt(e)); the norm
        of the stacked gradients is at most sqrt(M) times the largest peak.
        """
        peak = max(math.sqrt(2.0) / (w * math.exp(0.5)) for w in self.widths)
        return self.theta_upper_bound * peak


def grid_network(
    input_dim: int, per_axis_nodes: int, box_lo: float, box_hi: float, width: float
) -> RbfNetwork:
    """Uniform lattice of per_axis_nodes^input_dim centers over a box.

    Lattice coordinates include both box endpoints; a single node per axis
    sits at the box midpoint.  All widths equal.
    """
    if per_axis_nodes < 1:
        raise ValueError("per_axis_nodes must be >= 1")
    if not box_lo < box_hi:
        raise ValueError(f"inconsistent box: [{box_lo}, {box_hi}]")
    if not width > 0:
        raise ValueError("width must be positive")
    if per_axis_nodes == 1:
        axis = [0.5 * (box_lo + box_hi)]
    else:
        step = (box_hi - box_lo) / (per_axis_nodes - 1)
        axis = [box_lo + i * step for i in range(per_axis_nodes)]
    centers: list[tuple[float, ...]] = [()]
    for _ in range(input_dim):
        centers = [c + (a,) for c in centers for a in axis]
    return RbfNetwork(
        input_dim=input_dim,
        centers=tuple(centers),
        widths=(float(width),) * len(centers),
    )


def random_network(
    input_dim: int,
    count: int,
    box_lo: float,
    box_hi: float,
    width: float,
    seed: int,
) -> RbfNetwork:
    """Fixed budget of seeded pseudo-random centers uniform in the box."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not box_lo < box_hi:
        raise ValueError(f"inconsistent box: [{box_lo}, {box_hi}]")
    if not width > 0:
        raise ValueError("width must be positive")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(box_lo, box_hi, size=(count, input_dim))
    return RbfNetwork(
        input_dim=input_dim,
        centers=tuple(tuple(float(v) for v in row) for row in pts),
        widths=(float(width),) * count,
    )


@dataclass(frozen=True)
class ApproximatorSpec:
    """Declarative recipe for one RbfNetwork (what scenario files store)."""

    kind: str  # "lattice" or "random"
    box: tuple[float, float]
    width: float
    per_axis: int | None = None
    count: int | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("lattice", "random"):
            raise ValueError(f"unknown approximator kind {self.kind!r}")
        if self.kind == "lattice" and (self.per_axis is None or self.per_axis < 1):
            raise ValueError("lattice approximator requires per_axis >= 1")
        if self.kind == "random":
            if self.count is None or self.count < 1:
                raise ValueError("random approximator requires count >= 1")
            if self.seed is None:
                raise ValueError("random approximator requires a seed")

    def build(self, input_dim: int) -> RbfNetwork:
        if self.kind == "lattice":
            return grid_network(input_dim, self.per_axis, *self.box, self.width)
        return random_network(input_dim, self.count, *self.box, self.width, self.seed)
