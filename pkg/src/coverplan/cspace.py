"""Discrete configuration spaces: planar N-link arms and 2D grids.

A configuration is a tuple of integer lattice indices, one per degree of
freedom. Grid scenarios index workspace cells directly (1 m cells, cell
(i, j) spans [i, i+1) x [j, j+1)); arm scenarios index joint angles at a
fixed angular step of 2*pi / joints_per_rev. Continuous joints wrap;
joints with limits do not.

All operations are pure functions of immutable scenario data and are safe
for concurrent use. The only mutable companion is the scenario's
``OpCounters`` instrumentation block, which exists so callers can prove
how much work (collision checks, expansions, elementary steps) an online
query performed.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import ScenarioFormatError

Config = tuple[int, ...]

SCENARIO_FORMAT_VERSION = 1

# Single-DOF unit-cost action set: one lattice index up or down per move.
# Diagonal multi-joint moves are deliberately absent so the Manhattan
# heuristic stays consistent.
ACTION_SET = "single_dof"
COST_MODEL = "unit"
UNIT_COST = 1.0


@dataclass(frozen=True)
class Circle:
    """Workspace disc obstacle (closed: boundary counts as inside)."""

    center: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class Rect:
    """Axis-aligned workspace rectangle obstacle, (xmin, ymin, xmax, ymax), closed."""

    bounds: tuple[float, float, float, float]


Obstacle = Circle | Rect


@dataclass(frozen=True)
class RegionSpec:
    """A goal region: configurations whose end-effector point lies in ``box``.

    ``box`` is (xmin, ymin, xmax, ymax) in workspace meters; for grids the
    tested point is the cell center.
    """

    id: str
    box: tuple[float, float, float, float]


@dataclass(frozen=True)
class ArmModel:
    """Planar serial arm on a joint-index lattice.

    joints_per_rev fixes the angular step (2*pi / joints_per_rev) for every
    joint. A joint without limits wraps over [0, joints_per_rev); a joint
    with limits [lo, hi) covers the indices whose angle lo + i*step < hi
    and does not wrap.
    """

    link_lengths: tuple[float, ...]
    base: tuple[float, float] = (0.0, 0.0)
    joints_per_rev: int = 16
    joint_limits: tuple[tuple[float, float] | None, ...] | None = None

    def __post_init__(self):
        if any(l <= 0.0 for l in self.link_lengths):
            raise ValueError("link lengths must be positive")
        if self.joints_per_rev < 4:
            raise ValueError("joints_per_rev must be >= 4")
        if self.joint_limits is not None and len(self.joint_limits) != len(self.link_lengths):
            raise ValueError("one joint limit entry per link required")

    @property
    def step(self) -> float:
        return 2.0 * math.pi / self.joints_per_rev

    def limit(self, joint: int) -> tuple[float, float] | None:
        if self.joint_limits is None:
            return None
        return self.joint_limits[joint]

    def dims(self) -> tuple[int, ...]:
        out = []
        for j in range(len(self.link_lengths)):
            lim = self.limit(j)
            if lim is None:
                out.append(self.joints_per_rev)
            else:
                lo, hi = lim
                n = int((hi - lo) / self.step + 1e-9)
                out.append(max(1, n))
        return tuple(out)


@dataclass
class OpCounters:
    """Instrumentation: work performed against a scenario.

    collision_checks counts is_valid() calls (each one runs obstacle
    geometry), expansions counts search-node expansions, elementary_steps
    counts constant-cost bookkeeping ops (configs assembled into a
    lookup-built path, descent moves).
    """

    collision_checks: int = 0
    expansions: int = 0
    elementary_steps: int = 0

    def snapshot(self) -> tuple[int, int, int]:
        return (self.collision_checks, self.expansions, self.elementary_steps)

    def reset(self) -> None:
        self.collision_checks = 0
        self.expansions = 0
        self.elementary_steps = 0


@dataclass
class Scenario:
    """A planning world: domain, obstacles, home state and goal regions."""

    kind: str  # "grid" | "arm"
    s_home: Config
    regions: tuple[RegionSpec, ...]
    obstacles: tuple[Obstacle, ...] = ()
    grid_dims: tuple[int, int] | None = None
    arm: ArmModel | None = None
    actions: str = ACTION_SET
    cost_model: str = COST_MODEL
    counters: OpCounters = field(default_factory=OpCounters, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "grid":
            if self.grid_dims is None:
                raise ValueError("grid scenario needs grid_dims")
        elif self.kind == "arm":
            if self.arm is None:
                raise ValueError("arm scenario needs an ArmModel")
        else:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if not self.regions:
            raise ValueError("scenario needs at least one region")

    @property
    def dims(self) -> tuple[int, ...]:
        if self.kind == "grid":
            return self.grid_dims
        return self.arm.dims()

    @property
    def wraps(self) -> tuple[bool, ...]:
        if self.kind == "grid":
            return (False, False)
        return tuple(self.arm.limit(j) is None for j in range(self.dof))

    @property
    def dof(self) -> int:
        return len(self.dims)


# ---------------------------------------------------------------------------
# geometry helpers


def _point_in_circle(p: tuple[float, float], c: Circle) -> bool:
    dx = p[0] - c.center[0]
    dy = p[1] - c.center[1]
    return dx * dx + dy * dy <= c.radius * c.radius


def _point_in_rect(p: tuple[float, float], r: Rect) -> bool:
    x0, y0, x1, y1 = r.bounds
    return x0 <= p[0] <= x1 and y0 <= p[1] <= y1


def point_in_obstacle(p: tuple[float, float], obstacle: Obstacle) -> bool:
    if isinstance(obstacle, Circle):
        return _point_in_circle(p, obstacle)
    return _point_in_rect(p, obstacle)


def segment_circle_distance(a, b, center) -> float:
    """Distance from ``center`` to the closed segment a-b (exact)."""
    ax, ay = a
    bx, by = b
    px, py = center
    dx, dy = bx - ax, by - ay
    if dx == 0.0 and dy == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy)
    t = max(0.0, min(1.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def segment_hits_circle(a, b, c: Circle) -> bool:
    return segment_circle_distance(a, b, c.center) <= c.radius


def segment_hits_rect(a, b, r: Rect) -> bool:
    """Exact segment vs axis-aligned rectangle test (slab clipping)."""
    if _point_in_rect(a, r) or _point_in_rect(b, r):
        return True
    x0, y0, x1, y1 = r.bounds
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    tmin, tmax = 0.0, 1.0
    for d, lo, hi, o in ((dx, x0, x1, a[0]), (dy, y0, y1, a[1])):
        if d == 0.0:
            if o < lo or o > hi:
                return False
        else:
            t1 = (lo - o) / d
            t2 = (hi - o) / d
            if t1 > t2:
                t1, t2 = t2, t1
            tmin = max(tmin, t1)
            tmax = min(tmax, t2)
            if tmin > tmax:
                return False
    return True


def segment_hits_obstacle(a, b, obstacle: Obstacle) -> bool:
    if isinstance(obstacle, Circle):
        return segment_hits_circle(a, b, obstacle)
    return segment_hits_rect(a, b, obstacle)


# ---------------------------------------------------------------------------
# kinematics and validity


def joint_angles(arm: ArmModel, q: Config) -> tuple[float, ...]:
    """Map lattice indices to joint angles in radians."""
    out = []
    for j, idx in enumerate(q):
        lim = arm.limit(j)
        lo = 0.0 if lim is None else lim[0]
        out.append(lo + idx * arm.step)
    return tuple(out)


def forward_kinematics(arm: ArmModel, q: Config) -> list[tuple[float, float]]:
    """Link endpoint positions: base first, then one point per link."""
    angles = joint_angles(arm, q)
    points = [arm.base]
    heading = 0.0
    x, y = arm.base
    for length, angle in zip(arm.link_lengths, angles):
        heading += angle
        x += length * math.cos(heading)
        y += length * math.sin(heading)
        points.append((x, y))
    return points


def cell_center(q: Config) -> tuple[float, float]:
    return (q[0] + 0.5, q[1] + 0.5)


def ee_position(scenario: Scenario, q: Config) -> tuple[float, float]:
    """End-effector point used for region membership."""
    if scenario.kind == "grid":
        return cell_center(q)
    return forward_kinematics(scenario.arm, q)[-1]


def in_bounds(scenario: Scenario, q: Config) -> bool:
    dims = scenario.dims
    if len(q) != len(dims):
        return False
    return all(0 <= c < n for c, n in zip(q, dims))


def is_valid(scenario: Scenario, q: Config) -> bool:
    """Collision / limit check. Counted: one collision check per call."""
    scenario.counters.collision_checks += 1
    if not in_bounds(scenario, q):
        return False
    if scenario.kind == "grid":
        p = cell_center(q)
        return not any(point_in_obstacle(p, o) for o in scenario.obstacles)
    points = forward_kinematics(scenario.arm, q)
    for a, b in zip(points, points[1:]):
        for obstacle in scenario.obstacles:
            if segment_hits_obstacle(a, b, obstacle):
                return False
    return True


# ---------------------------------------------------------------------------
# lattice connectivity, metrics, regions


def lattice_neighbors(scenario: Scenario, q: Config) -> list[Config]:
    """Single-DOF +-1 neighbors by lattice geometry only (no validity)."""
    dims = scenario.dims
    wraps = scenario.wraps
    out: list[Config] = []
    for d in range(len(dims)):
        n = dims[d]
        for delta in (-1, 1):
            c = q[d] + delta
            if wraps[d]:
                c %= n
            elif c < 0 or c >= n:
                continue
            if c == q[d]:  # wrap-around collapse on tiny dims
                continue
            nb = q[:d] + (c,) + q[d + 1 :]
            if nb not in out:
                out.append(nb)
    return out


def successors(scenario: Scenario, q: Config) -> list[tuple[Config, float]]:
    """Valid single-DOF moves from q with unit edge cost."""
    return [(nb, UNIT_COST) for nb in lattice_neighbors(scenario, q) if is_valid(scenario, nb)]


def _axis_delta(a: int, b: int, n: int, wrap: bool) -> int:
    d = abs(a - b)
    if wrap:
        d = min(d, n - d)
    return d


def heuristic(scenario: Scenario, q: Config, goal: Config) -> float:
    """Wrapped Manhattan lattice distance; consistent for the unit action set."""
    dims = scenario.dims
    wraps = scenario.wraps
    return float(sum(_axis_delta(a, b, n, w) for a, b, n, w in zip(q, goal, dims, wraps)))


def navigation_value(scenario: Scenario, q: Config, attractor: Config) -> float:
    """Wrapped Euclidean lattice distance; the descent potential."""
    dims = scenario.dims
    wraps = scenario.wraps
    return math.sqrt(
        sum(_axis_delta(a, b, n, w) ** 2 for a, b, n, w in zip(q, attractor, dims, wraps))
    )


def in_region(scenario: Scenario, region: RegionSpec, q: Config) -> bool:
    """True iff q is valid and its end-effector point lies in the region box."""
    if not is_valid(scenario, q):
        return False
    x0, y0, x1, y1 = region.box
    x, y = ee_position(scenario, q)
    return x0 <= x <= x1 and y0 <= y <= y1


def lattice_configs(scenario: Scenario):
    """All lattice configurations, in lexicographic order."""
    dims = scenario.dims

    def rec(prefix: tuple[int, ...], d: int):
        if d == len(dims):
            yield prefix
            return
        for i in range(dims[d]):
            yield from rec(prefix + (i,), d + 1)

    yield from rec((), 0)


def region_configs(scenario: Scenario, region: RegionSpec) -> list[Config]:
    """Exhaustive enumeration of the region's valid member states."""
    return [q for q in lattice_configs(scenario) if in_region(scenario, region, q)]


# ---------------------------------------------------------------------------
# validation helpers


def check_config(scenario: Scenario, q) -> Config:
    """Coerce and bounds-check a user-supplied configuration."""
    try:
        cfg = tuple(int(c) for c in q)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"configuration must be a sequence of integers, got {q!r}") from exc
    if len(cfg) != scenario.dof:
        raise ValueError(f"configuration has {len(cfg)} coordinates, scenario has {scenario.dof} DOF")
    if not in_bounds(scenario, cfg):
        raise ValueError(f"configuration {cfg} outside lattice dims {scenario.dims}")
    return cfg


def check_scenario(scenario: Scenario) -> Scenario:
    """Validate cross-field scenario invariants (home validity, region areas)."""
    for region in scenario.regions:
        x0, y0, x1, y1 = region.box
        if x1 <= x0 or y1 <= y0:
            raise ValueError(f"region {region.id!r} box has no area")
    check_config(scenario, scenario.s_home)
    if not is_valid(scenario, scenario.s_home):
        raise ValueError("s_home is not collision-free")
    return scenario


# ---------------------------------------------------------------------------
# file format


def _obstacle_payload(o: Obstacle) -> dict:
    if isinstance(o, Circle):
        return {"shape": "circle", "center": list(o.center), "radius": o.radius}
    return {"shape": "rect", "bounds": list(o.bounds)}


def _obstacle_from_payload(p: dict) -> Obstacle:
    if p["shape"] == "circle":
        return Circle(center=tuple(p["center"]), radius=float(p["radius"]))
    if p["shape"] == "rect":
        return Rect(bounds=tuple(p["bounds"]))
    raise ScenarioFormatError(f"unknown obstacle shape {p.get('shape')!r}")


def scenario_to_payload(scenario: Scenario) -> dict:
    payload = {
        "format_version": SCENARIO_FORMAT_VERSION,
        "kind": scenario.kind,
        "obstacles": [_obstacle_payload(o) for o in scenario.obstacles],
        "s_home": list(scenario.s_home),
        "regions": [{"id": r.id, "box": list(r.box)} for r in scenario.regions],
        "actions": scenario.actions,
        "cost_model": scenario.cost_model,
    }
    if scenario.kind == "grid":
        payload["grid"] = {"dims": list(scenario.grid_dims)}
    else:
        arm = scenario.arm
        payload["arm"] = {
            "link_lengths": list(arm.link_lengths),
            "base": list(arm.base),
            "joints_per_rev": arm.joints_per_rev,
            "joint_limits": None
            if arm.joint_limits is None
            else [None if lim is None else list(lim) for lim in arm.joint_limits],
        }
    return payload


def scenario_from_payload(payload: dict) -> Scenario:
    try:
        version = payload["format_version"]
        if version != SCENARIO_FORMAT_VERSION:
            raise ScenarioFormatError(f"unsupported scenario format_version {version}")
        kind = payload["kind"]
        common = dict(
            kind=kind,
            s_home=tuple(int(c) for c in payload["s_home"]),
            regions=tuple(RegionSpec(id=r["id"], box=tuple(r["box"])) for r in payload["regions"]),
            obstacles=tuple(_obstacle_from_payload(o) for o in payload["obstacles"]),
            actions=payload.get("actions", ACTION_SET),
            cost_model=payload.get("cost_model", COST_MODEL),
        )
        if kind == "grid":
            return Scenario(grid_dims=tuple(payload["grid"]["dims"]), **common)
        arm = payload["arm"]
        limits = arm.get("joint_limits")
        return Scenario(
            arm=ArmModel(
                link_lengths=tuple(arm["link_lengths"]),
                base=tuple(arm["base"]),
                joints_per_rev=int(arm["joints_per_rev"]),
                joint_limits=None
                if limits is None
                else tuple(None if lim is None else tuple(lim) for lim in limits),
            ),
            **common,
        )
    except ScenarioFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioFormatError(f"malformed scenario payload: {exc}") from exc


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def scenario_fingerprint(scenario: Scenario) -> str:
    """Content hash binding libraries to the scenario they were built for."""
    return hashlib.sha256(canonical_json(scenario_to_payload(scenario)).encode()).hexdigest()


def save_scenario(scenario: Scenario, path) -> None:
    """Write the scenario document (versioned, round-trip stable)."""
    with open(path, "w") as fh:
        json.dump(scenario_to_payload(scenario), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    """Read a scenario document; raises ScenarioFormatError when malformed."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioFormatError(f"cannot read scenario file {path}: {exc}") from exc
    return scenario_from_payload(payload)
