"""Scenario files: strict schema, the built-in benchmark, and trajectory IO.

A scenario is one YAML document.  The schema (keys, nesting, types) is
normative and documented in the README; unknown keys anywhere are rejected
so typos cannot silently change an experiment, and all validation failures
are reported together with their paths.

The built-in benchmark is a three-follower ring with one leader link,
heterogeneous switched dynamics over three modes per follower, channel
powers (3,5), (3,7), (5,9), and the reference 2*sin(t) + 2*sin(0.5*t);
`benchmark_scenario()` returns it ready to run and `scenario_to_dict`
serializes any scenario back to the file form losslessly.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, replace
from typing import Any, Mapping

import numpy as np
import yaml

from .controller import FollowerGainSet, PowerProfile, regressor_dim
from .expressions import ExpressionError, parse_expression, pretty
from .graph import GraphTopology, has_leader_rooted_spanning_tree
from .plant import LeaderSignal, ModeDynamics, SwitchingSchedule, generate_schedule
from .rbf import LATTICE_DIM_LIMIT, RANDOM_CENTER_BUDGET, ApproximatorSpec
from .simulator import FollowerSpec, FollowerTrack, NetworkScenario, Trajectory

OUTPUT_FORMATS = ("csv", "json-summary", "gnuplot-script")

_DEFAULT_D = 0.5
_DEFAULT_BOX = (-6.0, 6.0)
_DEFAULT_WIDTH = 3.0
_DEFAULT_PER_AXIS = 5


class ScenarioValidationError(ValueError):
    """All schema/semantic violations of one document, path tagged."""

    def __init__(self, errors):
        self.errors = tuple(errors)
        super().__init__(
            "scenario validation failed:\n" + "\n".join(f"  - {e}" for e in self.errors)
        )


class ScenarioStructureWarning(UserWarning):
    """Benchmark-style quirks that are tolerated but worth knowing about."""


def derive_seed(master: int, *parts) -> int:
    """Stable sub-seed from the master seed and a label tuple."""
    key = ":".join([str(master), *map(str, parts)]).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big") % (2**63)


class _Check:
    """Error accumulator with path-tagged reporting."""

    def __init__(self) -> None:
        self.errors: list[str] = []

    def err(self, path: str, msg: str) -> None:
        self.errors.append(f"{path}: {msg}")

    def keys(self, d, path: str, required: tuple, optional: tuple = ()) -> bool:
        if not isinstance(d, Mapping):
            self.err(path, f"expected a mapping, got {type(d).__name__}")
            return False
        ok = True
        for k in d:
            if k not in required and k not in optional:
                self.err(path, f"unknown key {k!r}")
                ok = False
        for k in required:
            if k not in d:
                self.err(path, f"missing required key {k!r}")
                ok = False
        return ok

    def number(self, v, path: str, positive=False, nonnegative=False) -> float | None:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.err(path, f"expected a number, got {v!r}")
            return None
        v = float(v)
        if positive and not v > 0:
            self.err(path, f"must be > 0, got {v}")
            return None
        if nonnegative and v < 0:
            self.err(path, f"must be >= 0, got {v}")
            return None
        return v

    def integer(self, v, path: str, minimum: int | None = None) -> int | None:
        if isinstance(v, bool) or not isinstance(v, int):
            self.err(path, f"expected an integer, got {v!r}")
            return None
        if minimum is not None and v < minimum:
            self.err(path, f"must be >= {minimum}, got {v}")
            return None
        return v

    def listing(self, v, path: str, length: int | None = None) -> list | None:
        if not isinstance(v, list):
            self.err(path, f"expected a list, got {type(v).__name__}")
            return None
        if length is not None and len(v) != length:
            self.err(path, f"expected {length} entries, got {len(v)}")
            return None
        return v

    def expression(self, v, path: str):
        if not isinstance(v, str):
            self.err(path, f"expected an expression string, got {v!r}")
            return None
        try:
            return parse_expression(v)
        except ExpressionError as exc:
            self.err(path, str(exc))
            return None


@dataclass
class _PartialFollower:
    n: int
    powers: PowerProfile | None
    x0: tuple | None
    xi0: tuple | None
    modes: tuple | None
    gains: FollowerGainSet | None
    switching: SwitchingSchedule | None
    raw_approx: Any


def _positive_tuple(ck: _Check, section, key: str, path: str, n: int):
    raw = ck.listing(section.get(key), f"{path}.{key}", length=n)
    if raw is None:
        return None
    out = []
    for i, v in enumerate(raw):
        num = ck.number(v, f"{path}.{key}[{i}]", positive=True)
        if num is None:
            return None
        out.append(num)
    return tuple(out)


def _parse_topology(ck: _Check, doc) -> GraphTopology | None:
    sec = doc.get("topology")
    if not ck.keys(sec, "topology", required=("followers", "edges", "leader_to")):
        return None
    n = ck.integer(sec.get("followers"), "topology.followers", minimum=1)
    edges = ck.listing(sec.get("edges"), "topology.edges")
    leader_to = ck.listing(sec.get("leader_to"), "topology.leader_to")
    if n is None or edges is None or leader_to is None:
        return None
    adjacency = [[0] * n for _ in range(n)]
    ok = True
    for i, e in enumerate(edges):
        pair = ck.listing(e, f"topology.edges[{i}]", length=2)
        if pair is None:
            ok = False
            continue
        src = ck.integer(pair[0], f"topology.edges[{i}][0]", minimum=1)
        dst = ck.integer(pair[1], f"topology.edges[{i}][1]", minimum=1)
        if src is None or dst is None or src > n or dst > n:
            ck.err(f"topology.edges[{i}]", f"indices must lie in 1..{n}")
            ok = False
            continue
        if src == dst:
            ck.err(f"topology.edges[{i}]", "self edges are not allowed")
            ok = False
            continue
        adjacency[dst - 1][src - 1] = 1
    mu = [0] * n
    for i, v in enumerate(leader_to):
        idx = ck.integer(v, f"topology.leader_to[{i}]", minimum=1)
        if idx is None or idx > n:
            ck.err(f"topology.leader_to[{i}]", f"index must lie in 1..{n}")
            ok = False
            continue
        mu[idx - 1] = 1
    if not ok:
        return None
    top = GraphTopology(
        adjacency=tuple(tuple(row) for row in adjacency), leader_links=tuple(mu)
    )
    if not has_leader_rooted_spanning_tree(top):
        ck.err(
            "topology",
            "no leader-rooted spanning tree: some follower cannot "
            "be reached from the leader",
        )
        return None
    return top


def _parse_modes(ck: _Check, raw_modes, path: str, n: int):
    lst = ck.listing(raw_modes, path)
    if lst is None:
        return None
    if not lst:
        ck.err(path, "at least one mode required")
        return None
    modes = []
    for mi, mode in enumerate(lst):
        mpath = f"{path}[{mi}]"
        if not ck.keys(mode, mpath, required=("drift", "gain", "gain_bounds")):
            return None
        drift_raw = ck.listing(mode.get("drift"), f"{mpath}.drift", length=n)
        gain_raw = ck.listing(mode.get("gain"), f"{mpath}.gain", length=n)
        bounds_raw = ck.listing(mode.get("gain_bounds"), f"{mpath}.gain_bounds", length=n)
        if drift_raw is None or gain_raw is None or bounds_raw is None:
            return None
        drift = tuple(
            ck.expression(e, f"{mpath}.drift[{k}]") for k, e in enumerate(drift_raw)
        )
        gain = tuple(
            ck.expression(e, f"{mpath}.gain[{k}]") for k, e in enumerate(gain_raw)
        )
        bounds = []
        for k, b in enumerate(bounds_raw):
            pair = ck.listing(b, f"{mpath}.gain_bounds[{k}]", length=2)
            if pair is None:
                return None
            lo = ck.number(pair[0], f"{mpath}.gain_bounds[{k}][0]", positive=True)
            hi = ck.number(pair[1], f"{mpath}.gain_bounds[{k}][1]", positive=True)
            if lo is None or hi is None:
                return None
            if lo > hi:
                ck.err(f"{mpath}.gain_bounds[{k}]", f"lower {lo} exceeds upper {hi}")
                return None
            bounds.append((lo, hi))
        if any(e is None for e in drift) or any(e is None for e in gain):
            return None
        try:
            modes.append(ModeDynamics(drift=drift, gain=gain, gain_bounds=tuple(bounds)))
        except ValueError as exc:
            ck.err(mpath, str(exc))
            return None
    return tuple(modes)


def _parse_switching(ck: _Check, raw, path: str, mode_count: int, dt, horizon,
                     default_seed: int):
    if not isinstance(raw, Mapping):
        ck.err(path, "expected a mapping with 'segments' or 'generate'")
        return None
    if ("segments" in raw) == ("generate" in raw):
        ck.err(path, "exactly one of 'segments' or 'generate' required")
        return None
    if "segments" in raw:
        if not ck.keys(raw, path, required=("segments",)):
            return None
        segs = ck.listing(raw.get("segments"), f"{path}.segments")
        if segs is None:
            return None
        if not segs:
            ck.err(f"{path}.segments", "at least one segment required")
            return None
        starts, modes = [], []
        for i, seg in enumerate(segs):
            pair = ck.listing(seg, f"{path}.segments[{i}]", length=2)
            if pair is None:
                return None
            start = ck.number(pair[0], f"{path}.segments[{i}][0]", nonnegative=True)
            mode = ck.integer(pair[1], f"{path}.segments[{i}][1]", minimum=1)
            if start is None or mode is None:
                return None
            if mode > mode_count:
                ck.err(f"{path}.segments[{i}]",
                       f"mode {mode} exceeds mode count {mode_count}")
                return None
            if dt is not None:
                start = round(start / dt) * dt  # snap switch times onto the grid
            starts.append(start)
            modes.append(mode)
        try:
            return SwitchingSchedule(
                mode_count=mode_count, starts=tuple(starts), modes=tuple(modes)
            )
        except ValueError as exc:
            ck.err(f"{path}.segments", str(exc))
            return None
    if not ck.keys(raw, path, required=("generate",)):
        return None
    gen = raw["generate"]
    if not ck.keys(gen, f"{path}.generate", required=("dwell_min",), optional=("seed",)):
        return None
    dwell = ck.number(gen.get("dwell_min"), f"{path}.generate.dwell_min", positive=True)
    if dwell is None or horizon is None:
        return None
    seed = ck.integer(gen.get("seed", default_seed), f"{path}.generate.seed", minimum=0)
    if seed is None:
        return None
    if dt is not None and dwell < dt:
        ck.err(f"{path}.generate.dwell_min", f"dwell_min {dwell} is below dt {dt}")
        return None
    return generate_schedule(seed, mode_count, dwell, horizon)


def _parse_follower(ck: _Check, raw, fi: int, dt, horizon,
                    master_seed: int) -> _PartialFollower | None:
    path = f"followers[{fi}]"
    if not ck.keys(raw, path,
                   required=("powers", "initial_state", "initial_estimates",
                             "gains", "modes", "switching"),
                   optional=("approximator",)):
        return None

    raw_powers = ck.listing(raw.get("powers"), f"{path}.powers")
    if raw_powers is None:
        return None
    if not raw_powers:
        ck.err(f"{path}.powers", "at least one channel required")
        return None
    n = len(raw_powers)
    powers = None
    ps = []
    for k, r in enumerate(raw_powers):
        ri = ck.integer(r, f"{path}.powers[{k}]", minimum=1)
        if ri is None:
            continue
        if ri % 2 == 0:
            ck.err(f"{path}.powers[{k}]",
                   f"channel power must be odd, follower {fi + 1} step {k + 1} has {ri}")
            continue
        ps.append(ri)
    if len(ps) == n:
        powers = PowerProfile.from_powers(ps)

    x0 = xi0 = None
    x0_raw = ck.listing(raw.get("initial_state"), f"{path}.initial_state", length=n)
    if x0_raw is not None:
        vals = [ck.number(v, f"{path}.initial_state[{k}]") for k, v in enumerate(x0_raw)]
        if all(v is not None for v in vals):
            x0 = tuple(vals)
    xi0_raw = ck.listing(raw.get("initial_estimates"), f"{path}.initial_estimates",
                         length=n)
    if xi0_raw is not None:
        vals = []
        for k, v in enumerate(xi0_raw):
            num = ck.number(v, f"{path}.initial_estimates[{k}]")
            if num is not None and num < 0:
                ck.err(f"{path}.initial_estimates[{k}]",
                       f"initial adaptive estimates must be nonnegative, got {num}")
                num = None
            vals.append(num)
        if all(v is not None for v in vals):
            xi0 = tuple(vals)

    modes = _parse_modes(ck, raw.get("modes"), f"{path}.modes", n)

    gains = None
    gsec = raw.get("gains")
    if ck.keys(gsec, f"{path}.gains",
               required=("c", "zeta", "b", "beta", "sigma"),
               optional=("d", "h_lower")):
        c = _positive_tuple(ck, gsec, "c", f"{path}.gains", n)
        zeta = _positive_tuple(ck, gsec, "zeta", f"{path}.gains", n)
        b = _positive_tuple(ck, gsec, "b", f"{path}.gains", n)
        beta = _positive_tuple(ck, gsec, "beta", f"{path}.gains", n)
        sigma = _positive_tuple(ck, gsec, "sigma", f"{path}.gains", n)
        d = ck.number(gsec.get("d", _DEFAULT_D), f"{path}.gains.d", positive=True)
        if d is not None and not d < 1.0:
            ck.err(f"{path}.gains.d", f"must lie in (0, 1), got {d}")
            d = None
        h_lower = None
        if modes is not None:
            derived = tuple(
                min(mode.gain_bounds[k][0] for mode in modes) for k in range(n)
            )
            if "h_lower" in gsec:
                h_lower = _positive_tuple(ck, gsec, "h_lower", f"{path}.gains", n)
                if h_lower is not None:
                    for k, (given, cap) in enumerate(zip(h_lower, derived)):
                        if given > cap:
                            ck.err(f"{path}.gains.h_lower[{k}]",
                                   f"{given} exceeds the smallest declared mode "
                                   f"lower bound {cap}")
                            h_lower = None
                            break
            else:
                h_lower = derived
        if None not in (c, zeta, b, beta, sigma, d) and h_lower is not None:
            try:
                gains = FollowerGainSet(c=c, zeta=zeta, b=b, beta=beta,
                                        sigma=sigma, d=d, h_lower=h_lower)
            except ValueError as exc:
                ck.err(f"{path}.gains", str(exc))

    switching = None
    if modes is not None:
        switching = _parse_switching(
            ck, raw.get("switching"), f"{path}.switching", len(modes), dt, horizon,
            derive_seed(master_seed, "switching", fi),
        )

    return _PartialFollower(
        n=n, powers=powers, x0=x0, xi0=xi0, modes=modes, gains=gains,
        switching=switching, raw_approx=raw.get("approximator"),
    )


def _parse_approximators(ck: _Check, part: _PartialFollower, fi: int,
                         dims: list[int], master_seed: int):
    path = f"followers[{fi}].approximator"
    raw = part.raw_approx
    n = part.n
    if raw is None:
        entries: list = [None] * n
    elif isinstance(raw, Mapping):
        entries = [raw] * n
    else:
        lst = ck.listing(raw, path, length=n)
        if lst is None:
            return None
        entries = lst
    specs = []
    for k, entry in enumerate(entries):
        epath = f"{path}[{k}]"
        default_seed = derive_seed(master_seed, "rbf", fi, k)
        kind, per_axis, count, box, width, seed = (
            "lattice", _DEFAULT_PER_AXIS, None, _DEFAULT_BOX, _DEFAULT_WIDTH, None
        )
        if entry is not None:
            if not ck.keys(entry, epath, required=("kind",),
                           optional=("per_axis", "count", "box", "width", "seed")):
                return None
            kind = entry.get("kind")
            if kind not in ("lattice", "random"):
                ck.err(f"{epath}.kind", f"must be 'lattice' or 'random', got {kind!r}")
                return None
            if "box" in entry:
                pair = ck.listing(entry["box"], f"{epath}.box", length=2)
                if pair is None:
                    return None
                lo = ck.number(pair[0], f"{epath}.box[0]")
                hi = ck.number(pair[1], f"{epath}.box[1]")
                if lo is None or hi is None:
                    return None
                if not lo < hi:
                    ck.err(f"{epath}.box", f"lower {lo} must be below upper {hi}")
                    return None
                box = (lo, hi)
            width = ck.number(entry.get("width", _DEFAULT_WIDTH), f"{epath}.width",
                              positive=True)
            if width is None:
                return None
            if "per_axis" in entry:
                per_axis = ck.integer(entry["per_axis"], f"{epath}.per_axis", minimum=1)
                if per_axis is None:
                    return None
            if "count" in entry:
                count = ck.integer(entry["count"], f"{epath}.count", minimum=1)
                if count is None:
                    return None
            if "seed" in entry:
                seed = ck.integer(entry["seed"], f"{epath}.seed", minimum=0)
                if seed is None:
                    return None
        if kind == "lattice" and dims[k] > LATTICE_DIM_LIMIT:
            # a lattice in this many inputs would explode combinatorially;
            # fall back to the fixed seeded random budget in the same box
            kind = "random"
        if kind == "random":
            specs.append(ApproximatorSpec(
                kind="random", box=box, width=width,
                count=count if count is not None else RANDOM_CENTER_BUDGET,
                seed=seed if seed is not None else default_seed,
            ))
        else:
            specs.append(ApproximatorSpec(
                kind="lattice", box=box, width=width, per_axis=per_axis,
            ))
    return tuple(specs)


def from_dict(doc: Mapping[str, Any]) -> NetworkScenario:
    """Validate a scenario document and assemble the runnable scenario.

    Raises ScenarioValidationError carrying every violation found (unknown
    keys, type errors, bad expressions with offsets, even channel powers,
    negative initial estimates, unreachable followers, and so on).
    Tolerated structural quirks (a channel reading states above its index)
    are emitted as ScenarioStructureWarning.
    """
    ck = _Check()
    if not ck.keys(doc, "$", required=("topology", "leader", "followers", "sim"),
                   optional=("name", "outputs")):
        raise ScenarioValidationError(ck.errors)

    name = doc.get("name", "")
    if not isinstance(name, str):
        ck.err("name", f"expected a string, got {name!r}")
        name = ""

    sim = doc.get("sim")
    dt = horizon = None
    record_every, seed = 10, 0
    if ck.keys(sim, "sim", required=("dt", "horizon"),
               optional=("record_every", "seed")):
        dt = ck.number(sim.get("dt"), "sim.dt", positive=True)
        horizon = ck.number(sim.get("horizon"), "sim.horizon", positive=True)
        re_raw = ck.integer(sim.get("record_every", 10), "sim.record_every", minimum=1)
        record_every = re_raw if re_raw is not None else 10
        seed_raw = ck.integer(sim.get("seed", 0), "sim.seed", minimum=0)
        seed = seed_raw if seed_raw is not None else 0

    outputs = doc.get("outputs")
    if outputs is not None and ck.keys(outputs, "outputs", required=(),
                                       optional=("directory", "formats")):
        fmts = outputs.get("formats")
        if fmts is not None:
            lf = ck.listing(fmts, "outputs.formats")
            if lf is not None:
                for i, f in enumerate(lf):
                    if f not in OUTPUT_FORMATS:
                        ck.err(f"outputs.formats[{i}]",
                               f"must be one of {OUTPUT_FORMATS}, got {f!r}")
        if "directory" in outputs and not isinstance(outputs["directory"], str):
            ck.err("outputs.directory", "expected a string")

    topology = _parse_topology(ck, doc)

    leader = None
    lsec = doc.get("leader")
    if ck.keys(lsec, "leader", required=("signal",)):
        expr = ck.expression(lsec.get("signal"), "leader.signal")
        if expr is not None:
            try:
                leader = LeaderSignal(expr)
                if horizon is not None:
                    leader.assert_bounded(horizon)
            except ValueError as exc:
                ck.err("leader.signal", str(exc))
                leader = None

    partials: list[_PartialFollower | None] = []
    n_follow = topology.follower_count if topology else None
    lst = ck.listing(doc.get("followers"), "followers", length=n_follow)
    if lst is not None:
        for fi, raw in enumerate(lst):
            partials.append(_parse_follower(ck, raw, fi, dt, horizon, seed))

    followers: list[FollowerSpec] = []
    if topology is not None and all(
        p is not None and None not in (p.powers, p.x0, p.xi0, p.modes, p.gains,
                                       p.switching)
        for p in partials
    ) and len(partials) == topology.follower_count:
        for fi, part in enumerate(partials):
            neighbor_dims = [partials[l].n for l in topology.neighbors(fi)]
            dims = [regressor_dim(k, neighbor_dims) for k in range(1, part.n + 1)]
            specs = _parse_approximators(ck, part, fi, dims, seed)
            if specs is None:
                continue
            nets = tuple(spec.build(dim) for spec, dim in zip(specs, dims))
            for mi, mode in enumerate(part.modes):
                for note in mode.structure_warnings():
                    warnings.warn(
                        f"followers[{fi}].modes[{mi}]: {note}",
                        ScenarioStructureWarning,
                        stacklevel=2,
                    )
            try:
                followers.append(FollowerSpec(
                    powers=part.powers, gains=part.gains, modes=part.modes,
                    switching=part.switching, approximators=specs, nets=nets,
                    x0=part.x0, xi0=part.xi0,
                ))
            except ValueError as exc:
                ck.err(f"followers[{fi}]", str(exc))

    if ck.errors:
        raise ScenarioValidationError(ck.errors)

    try:
        return NetworkScenario(
            topology=topology,
            followers=tuple(followers),
            leader=leader,
            dt=dt,
            horizon=horizon,
            record_every=record_every,
            seed=seed,
            name=name,
        )
    except ValueError as exc:
        raise ScenarioValidationError([f"$: {exc}"]) from exc


def load_scenario(path) -> NetworkScenario:
    """Read, validate and assemble a YAML scenario file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ScenarioValidationError([f"$: not valid YAML: {exc}"]) from exc
    if not isinstance(doc, Mapping):
        raise ScenarioValidationError(["$: document must be a mapping"])
    return from_dict(doc)


def scenario_to_dict(sc: NetworkScenario) -> dict:
    """Lossless file form of a scenario (seeds and schedules resolved)."""
    n = sc.topology.follower_count
    edges = []
    for dst in range(n):
        for src in range(n):
            if sc.topology.adjacency[dst][src]:
                edges.append([src + 1, dst + 1])
    doc: dict[str, Any] = {
        "name": sc.name,
        "topology": {
            "followers": n,
            "edges": edges,
            "leader_to": [i + 1 for i, m in enumerate(sc.topology.leader_links) if m],
        },
        "leader": {"signal": sc.leader.text()},
        "followers": [],
        "sim": {
            "dt": sc.dt,
            "horizon": sc.horizon,
            "record_every": sc.record_every,
            "seed": sc.seed,
        },
    }
    for spec in sc.followers:
        approx = []
        for a in spec.approximators:
            entry: dict[str, Any] = {"kind": a.kind, "box": list(a.box), "width": a.width}
            if a.kind == "lattice":
                entry["per_axis"] = a.per_axis
            else:
                entry["count"] = a.count
                entry["seed"] = a.seed
            approx.append(entry)
        doc["followers"].append({
            "powers": list(spec.powers.powers),
            "initial_state": list(spec.x0),
            "initial_estimates": list(spec.xi0),
            "gains": {
                "c": list(spec.gains.c),
                "zeta": list(spec.gains.zeta),
                "b": list(spec.gains.b),
                "beta": list(spec.gains.beta),
                "sigma": list(spec.gains.sigma),
                "d": spec.gains.d,
                "h_lower": list(spec.gains.h_lower),
            },
            "modes": [
                {
                    "drift": [pretty(e) for e in mode.drift],
                    "gain": [pretty(e) for e in mode.gain],
                    "gain_bounds": [list(b) for b in mode.gain_bounds],
                }
                for mode in spec.modes
            ],
            "switching": {
                "segments": [
                    [start, mode]
                    for start, mode in zip(spec.switching.starts, spec.switching.modes)
                ]
            },
            "approximator": approx,
        })
    return doc


def save_scenario(sc: NetworkScenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario_to_dict(sc), fh, sort_keys=False)


# ---------------------------------------------------------------------------
# Built-in benchmark


def benchmark_scenario(
    seed: int = 7,
    dt: float = 1e-4,
    horizon: float = 30.0,
    record_every: int = 10,
) -> NetworkScenario:
    """The built-in three-follower switched benchmark, ready to integrate."""
    return from_dict(benchmark_dict(seed=seed, dt=dt, horizon=horizon,
                                    record_every=record_every))


def benchmark_dict(
    seed: int = 7,
    dt: float = 1e-4,
    horizon: float = 30.0,
    record_every: int = 10,
) -> dict:
    """File form of the built-in benchmark (see benchmark_scenario)."""
    gains = {
        "c": [3.0, 1.5],
        "zeta": [0.5, 0.75],
        "b": [0.5, 1.0],
        "beta": [15.0, 1.0],
        "sigma": [0.5, 1.0],
        "d": 0.5,
    }
    follower1 = {
        "powers": [3, 5],
        "initial_state": [0.1, -0.1],
        "initial_estimates": [5.0, 5.0],
        "gains": {**gains, "h_lower": [0.5, 2.0]},
        "modes": [
            {
                "drift": ["1 - cos(x1)", "x1*x2 + 0.5"],
                "gain": ["abs(tanh(x1^2)) + 4", "2*(abs(cos(x1^3*x2)) + 1)"],
                "gain_bounds": [[4.0, 5.0], [2.0, 4.0]],
            },
            {
                "drift": ["0.5 + exp(-x1^2)", "0.2*x1^2 + x2"],
                "gain": ["cos(x1^3) + 3", "3*sin(x2)^3 + 5"],
                "gain_bounds": [[2.0, 4.0], [2.0, 8.0]],
            },
            {
                "drift": ["0.2*cos(x1) + 0.5", "cos(x1^2*x2) + 0.2"],
                # this gain can touch zero; its declared lower bound is a
                # nominal positive stand-in and runtime checks warn when the
                # sampled value leaves the band
                "gain": ["2*cos(x1)^2", "5*abs(sin(0.1*x1*x2)) + 2"],
                "gain_bounds": [[0.5, 2.0], [2.0, 7.0]],
            },
        ],
        "switching": {"generate": {"dwell_min": 0.5}},
    }
    follower2 = {
        "powers": [3, 7],
        "initial_state": [0.1, -0.1],
        "initial_estimates": [7.0, 7.0],
        "gains": dict(gains),
        "modes": [
            {
                "drift": ["1.5*x1 + x1^2", "0.25*x2 + 0.5"],
                "gain": ["2*sin(x1^2) + 6", "3*cos(x2^2) + 5"],
                "gain_bounds": [[4.0, 8.0], [2.0, 8.0]],
            },
            {
                "drift": ["x1^3 + 0.25", "0.3 + 0.5*x1*x2^2"],
                "gain": ["sin(x1^3) + 3", "3*cos(x1 + x2^2) + 5"],
                "gain_bounds": [[2.0, 4.0], [2.0, 8.0]],
            },
            {
                "drift": ["x1^2 + 0.2", "cos(x1*x2) + 0.2"],
                "gain": ["cos(x1) + 3", "5 + 3*sin(x1^2 + x2*x1^2)"],
                "gain_bounds": [[2.0, 4.0], [2.0, 8.0]],
            },
        ],
        "switching": {"generate": {"dwell_min": 0.5}},
    }
    follower3 = {
        "powers": [5, 9],
        "initial_state": [0.1, -0.1],
        "initial_estimates": [10.0, 10.0],
        "gains": dict(gains),
        "modes": [
            {
                "drift": ["x1 + 0.5*sin(x1)", "0.3*x1^2 + x2"],
                "gain": ["abs(cos(x1)) + 4", "cos(x2^2) + 3"],
                "gain_bounds": [[4.0, 5.0], [2.0, 4.0]],
            },
            {
                "drift": ["0.3*x1^2 + cos(x1)", "x2 + 0.5*sin(x1)"],
                # the first channel's gain reads x2: kept verbatim from the
                # benchmark definition, reported as a structure warning
                "gain": ["abs(sin(x2^3)) + 2", "4*cos(x1) + 6"],
                "gain_bounds": [[2.0, 3.0], [2.0, 10.0]],
            },
            {
                "drift": ["x1 + 0.5*x1^2", "cos(x1*x2)^2 + 0.5"],
                "gain": ["cos(x2^2*x1^3) + 3", "cos(x2)^3 + 3"],
                "gain_bounds": [[2.0, 4.0], [2.0, 4.0]],
            },
        ],
        "switching": {"generate": {"dwell_min": 0.5}},
    }
    return {
        "name": "three-follower switched odd-power benchmark",
        "topology": {
            "followers": 3,
            "edges": [[1, 2], [2, 3], [3, 1]],
            "leader_to": [1],
        },
        "leader": {"signal": "2*sin(t) + 2*sin(0.5*t)"},
        "followers": [follower1, follower2, follower3],
        "sim": {"dt": dt, "horizon": horizon, "record_every": record_every,
                "seed": seed},
    }


# ---------------------------------------------------------------------------
# Trajectory IO


def trajectory_header(traj: Trajectory) -> list[str]:
    """CSV column names: t, per-follower blocks, then y_r."""
    cols = ["t"]
    for fi, tr in enumerate(traj.followers):
        n = tr.x.shape[1]
        label = f"f{fi + 1}"
        cols.extend(f"{label}_x{j + 1}" for j in range(n))
        cols.extend(f"{label}_xi{j + 1}" for j in range(n))
        cols.extend((f"{label}_u", f"{label}_s1", f"{label}_mode"))
    cols.append("y_r")
    return cols


def write_trajectory(traj: Trajectory, fmt: str, path) -> None:
    """Serialize a trajectory: csv, json-summary, or gnuplot-script.

    CSV cells hold shortest round-trip float text, so rereading reproduces
    the samples bit exactly.  The gnuplot script expects the CSV next to it
    under the same basename with a .csv extension.
    """
    if fmt == "csv":
        _write_csv(traj, path)
    elif fmt == "json-summary":
        _write_json_summary(traj, path)
    elif fmt == "gnuplot-script":
        _write_gnuplot(traj, path)
    else:
        raise ValueError(f"unknown trajectory format {fmt!r}; use one of {OUTPUT_FORMATS}")


def _write_csv(traj: Trajectory, path) -> None:
    cols = trajectory_header(traj)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(len(traj.times)):
            cells = [repr(float(traj.times[i]))]
            for tr in traj.followers:
                cells.extend(repr(float(v)) for v in tr.x[i])
                cells.extend(repr(float(v)) for v in tr.xi[i])
                cells.append(repr(float(tr.u[i])))
                cells.append(repr(float(tr.s1[i])))
                cells.append(str(int(tr.mode[i])))
            cells.append(repr(float(traj.y_r[i])))
            fh.write(",".join(cells) + "\n")


def _write_json_summary(traj: Trajectory, path) -> None:
    followers = []
    for fi, tr in enumerate(traj.followers):
        err = np.abs(tr.x[:, 0] - traj.y_r)
        followers.append({
            "label": f"f{fi + 1}",
            "max_abs_tracking_error": float(err.max()),
            "final_abs_tracking_error": float(err[-1]),
            "max_abs_s1": float(np.abs(tr.s1).max()),
            "max_abs_control": float(np.abs(tr.u).max()),
            "max_estimate": float(tr.xi.max()),
            "final_estimates": [float(v) for v in tr.xi[-1]],
        })
    doc = {
        "samples": int(len(traj.times)),
        "t_final": float(traj.times[-1]),
        "followers": followers,
        "gain_bound_violations": list(traj.gain_bound_violations),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _write_gnuplot(traj: Trajectory, path) -> None:
    import os

    csv_name = os.path.splitext(os.path.basename(str(path)))[0] + ".csv"
    cols = trajectory_header(traj)
    idx = {name: i + 1 for i, name in enumerate(cols)}  # gnuplot is 1-based
    n_followers = traj.n_followers
    max_n = max(tr.x.shape[1] for tr in traj.followers)

    lines = [
        "# Rebuilds the benchmark panels from the CSV written alongside:",
        "# switching signals, outputs vs reference, control inputs, estimates.",
        f"csv = '{csv_name}'",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set grid",
        "set terminal pngcairo size 1400,1000",
        "set output 'trajectory.png'",
        "set multiplot layout 3,2",
        "set title 'switching signals'",
        "plot " + ", ".join(
            f"csv using 1:{idx[f'f{f + 1}_mode']} with steps title 'follower {f + 1}'"
            for f in range(n_followers)
        ),
        "set title 'outputs vs reference'",
        "plot " + ", ".join(
            f"csv using 1:{idx[f'f{f + 1}_x1']} with lines title 'y{f + 1}'"
            for f in range(n_followers)
        ) + f", csv using 1:{idx['y_r']} with lines dashtype 2 title 'reference'",
        "set title 'control inputs'",
        "plot " + ", ".join(
            f"csv using 1:{idx[f'f{f + 1}_u']} with lines title 'u{f + 1}'"
            for f in range(n_followers)
        ),
    ]
    for step in range(max_n):
        series = [
            f"csv using 1:{idx[name]} with lines title 'follower {f + 1}'"
            for f in range(n_followers)
            for name in (f"f{f + 1}_xi{step + 1}",)
            if name in idx
        ]
        lines.append(f"set title 'adaptive estimates, step {step + 1}'")
        lines.append("plot " + ", ".join(series))
    lines.append("unset multiplot")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory_csv(path) -> Trajectory:
    """Rebuild a Trajectory from a CSV written by write_trajectory."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty file")
        cols = header.split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if cols[0] != "t" or cols[-1] != "y_r":
        raise ValueError(f"{path}: not a trajectory CSV (bad header)")
    # infer follower channel counts from the header layout
    n_per: list[int] = []
    i = 1
    while i < len(cols) - 1:
        label = cols[i].split("_")[0]
        n = 0
        while i + n < len(cols) - 1 and cols[i + n] == f"{label}_x{n + 1}":
            n += 1
        expected = (
            [f"{label}_x{j + 1}" for j in range(n)]
            + [f"{label}_xi{j + 1}" for j in range(n)]
            + [f"{label}_u", f"{label}_s1", f"{label}_mode"]
        )
        if cols[i : i + len(expected)] != expected:
            raise ValueError(f"{path}: unexpected column block at {cols[i]!r}")
        n_per.append(n)
        i += len(expected)

    data = np.array([[float(c) for c in row] for row in rows], dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(cols))
    times = data[:, 0]
    y_r = data[:, -1]
    followers = []
    i = 1
    for n in n_per:
        x = data[:, i : i + n]
        xi = data[:, i + n : i + 2 * n]
        u = data[:, i + 2 * n]
        s1 = data[:, i + 2 * n + 1]
        mode = data[:, i + 2 * n + 2].astype(int)
        followers.append(FollowerTrack(x=x.copy(), xi=xi.copy(), u=u.copy(),
                                       s1=s1.copy(), mode=mode))
        i += 2 * n + 3
    return Trajectory(times=times.copy(), y_r=y_r.copy(), followers=followers)
