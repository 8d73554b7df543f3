"""Directed leader-follower communication topology and its grounded Laplacian.

Followers are indexed 0..N-1 in memory (scenario files label them 1..N).
adjacency[i][j] = 1 means follower i receives the output of follower j;
self loops are not allowed.  leader_links[i] = 1 means follower i also
receives the leader output.  The matrices derived here:

    D_bar = diag(in-degrees d_i),  L_bar = D_bar - A,  B = diag(leader_links)
    H = L_bar + B

H is the grounded Laplacian; it is nonsingular exactly when every follower
can be reached from the leader along directed edges, which is the
connectivity condition the whole design rests on.  The tracking-error
stack satisfies s1 = H*(y - y_r), so the smallest singular value of H
converts a bound on ||s1|| into a bound on the consensus error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SWEEP_TOL = 1e-14


@dataclass(frozen=True)
class GraphTopology:
    """Immutable 0/1 follower digraph plus leader links."""

    adjacency: tuple[tuple[int, ...], ...]
    leader_links: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.adjacency)
        if n < 1:
            raise ValueError("at least one follower required")
        if len(self.leader_links) != n:
            raise ValueError("leader_links length must match follower count")
        for i, row in enumerate(self.adjacency):
            if len(row) != n:
                raise ValueError("adjacency must be square")
            for j, a in enumerate(row):
                if a not in (0, 1):
                    raise ValueError(f"adjacency[{i}][{j}]={a!r}; entries must be 0 or 1")
            if row[i] != 0:
                raise ValueError(f"self edge at follower {i}: adjacency diagonal must be zero")
        for i, m in enumerate(self.leader_links):
            if m not in (0, 1):
                raise ValueError(f"leader_links[{i}]={m!r}; entries must be 0 or 1")

    @property
    def follower_count(self) -> int:
        return len(self.adjacency)

    def neighbors(self, f: int) -> tuple[int, ...]:
        """Followers whose output follower f receives, ascending."""
        return tuple(j for j, a in enumerate(self.adjacency[f]) if a)

    def in_degree(self, f: int) -> int:
        return sum(self.adjacency[f])


@dataclass(frozen=True, eq=False)
class LaplacianDecomposition:
    """The matrices D_bar, L_bar, B and H = L_bar + B for one topology."""

    L_bar: np.ndarray
    B: np.ndarray
    D_bar: np.ndarray
    H: np.ndarray

    def __post_init__(self) -> None:
        for a in (self.L_bar, self.B, self.D_bar, self.H):
            a.setflags(write=False)


def build_laplacian(topology: GraphTopology) -> LaplacianDecomposition:
    """In-degree Laplacian of the follower subgraph plus the leader diagonal.

    D_bar[f][f] is the number of followers f listens to, L_bar = D_bar - A
    (zero row sums), B = diag(leader_links) and H = L_bar + B.  Off-diagonal
    entries of H are <= 0 and the diagonal carries d_f + mu_f.
    """
    a = np.array(topology.adjacency, dtype=float)
    d_bar = np.diag(a.sum(axis=1))
    l_bar = d_bar - a
    b = np.diag(np.array(topology.leader_links, dtype=float))
    return LaplacianDecomposition(L_bar=l_bar, B=b, D_bar=d_bar, H=l_bar + b)


def has_leader_rooted_spanning_tree(topology: GraphTopology) -> bool:
    """True iff every follower is reachable from the leader.

    Breadth-first search over the directed information flow: the leader
    reaches f directly when leader_links[f] = 1, and follower j passes
    information to follower i when adjacency[i][j] = 1.  Reachability of
    all followers is equivalent to the existence of a leader-rooted
    directed spanning tree.
    """
    n = topology.follower_count
    seen = [bool(m) for m in topology.leader_links]
    frontier = [i for i in range(n) if seen[i]]
    while frontier:
        j = frontier.pop()
        for i in range(n):
            if topology.adjacency[i][j] and not seen[i]:
                seen[i] = True
                frontier.append(i)
    return all(seen)


def singular_values(a) -> np.ndarray:
    """All singular values of a square matrix, descending.

    One-sided Jacobi orthogonalization: rotate column pairs until they are
    mutually orthogonal; the singular values are then the column norms.
    Plenty for the small dense matrices (N <= ~32) this library builds.
    """
    u = np.array(a, dtype=float)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"square matrix required, got shape {u.shape}")
    n = u.shape[0]
    for _ in range(60):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                ci = u[:, i]
                cj = u[:, j]
                app = float(ci @ ci)
                aqq = float(cj @ cj)
                apq = float(ci @ cj)
                if apq == 0.0:
                    continue
                denom = math.sqrt(app * aqq)
                if denom > 0.0 and abs(apq) <= _SWEEP_TOL * denom:
                    continue
                off = max(off, abs(apq) / denom if denom > 0.0 else 1.0)
                zeta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                new_i = c * ci - s * cj
                new_j = s * ci + c * cj
                u[:, i] = new_i
                u[:, j] = new_j
        if off < _SWEEP_TOL:
            break
    sv = np.sqrt(np.einsum("ij,ij->j", u, u))
    sv.sort()
    return sv[::-1].copy()


def min_singular_value(a) -> float:
    """Smallest singular value; >= 0, and 0 (to ~1e-10) iff singular."""
    return float(singular_values(a)[-1])


def conservative_lambda_min_bound(n_followers: int) -> float:
    """Agent-count-only stand-in for the smallest singular value of H.

        ((N-1)/N)^((N-1)/2) / (N^2 + N - 1)

    Useful when the global topology is unknown to individual agents.  It
    is far below the true minimum singular value for sparse leader-rooted
    topologies, but it is NOT a certified lower bound for every reachable
    topology: dense graphs can dip below it (see the graph test suite for
    a pinned counterexample).
    """
    if not isinstance(n_followers, int) or n_followers < 2:
        raise ValueError("n_followers must be an integer >= 2")
    n = n_followers
    n_bar = ((n - 1) / n) ** ((n - 1) / 2)
    return n_bar / (n * n + n - 1)
