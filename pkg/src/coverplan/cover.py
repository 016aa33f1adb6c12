"""Offline phase: decompose each goal region into attractor neighborhoods.

Every region is enumerated exhaustively up front (the lattices are desk
scale). Attractor candidates are drawn from the previous neighborhood's
cached frontier when possible, otherwise uniformly from the remaining
uncovered states; a representative path from the home state is planned
for each accepted attractor and the attractor's greedy-descent basin is
grown around it. In-region states with no path from home land in an
explicit exclusion set, which is what guarantees termination on a finite
lattice.

A neighborhood's member set is the full descent basin: every valid
config whose iterated steepest-descent walk of the navigation value
reaches the attractor. Membership is what makes the online connect
check-free: for a member q, the walk's next state is itself a member
(the tail of a successful walk is a successful walk), and no valid
non-member can beat it on navigation value or tie-break order (it would
have been the walk's next state, contradicting q's membership). So
restricting the online argmin to stored members reproduces the offline
walk exactly, with set lookups in place of collision checks.

Regions are independent; builders may run concurrently. The merged
library is immutable afterward.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass

from . import cspace
from .cspace import Config, Scenario
from .errors import (
    BoundExceeded,
    CorruptLibrary,
    DescentStalled,
    FingerprintMismatch,
    HomeInvalid,
    LibraryVersionError,
    NoPath,
)
from .search import Path, astar

LIBRARY_FORMAT_VERSION = 1

# Offline representative-path planner: moderately inflated, no deadline.
# Offline time is cheap; weight 3 keeps preprocessing fast while the
# stored paths stay reasonable.
REP_PATH_WEIGHT = 3.0


@dataclass(frozen=True)
class Neighborhood:
    """An attractor's descent basin with its recorded step bound."""

    attractor: Config
    members: frozenset[Config]
    max_descent_steps: int


@dataclass(frozen=True)
class CoverEntry:
    """One cover unit: attractor, basin, representative path(s) from home.

    A single representative path is stored today; the list shape is kept
    for per-object path variants.
    """

    attractor: Config
    neighborhood: Neighborhood
    rep_paths: tuple[Path, ...]

    @property
    def rep_path(self) -> Path:
        return self.rep_paths[0]

    @property
    def members(self) -> frozenset[Config]:
        return self.neighborhood.members


@dataclass(frozen=True)
class RegionCover:
    """A region's cover entries plus its reachability bookkeeping.

    ``covered`` is the set of in-region valid states inside some entry's
    basin; ``excluded`` the in-region valid states proven unreachable
    from home. Their union is the region's full enumerated state set, so
    goal lookups never need geometry online.
    """

    region_id: str
    entries: tuple[CoverEntry, ...]
    covered: frozenset[Config]
    excluded: frozenset[Config]


@dataclass(frozen=True)
class Library:
    """Preprocessing output: per-region covers bound to one scenario."""

    fingerprint: str
    dims: tuple[int, ...]
    s_home: Config
    regions: tuple[RegionCover, ...]

    def region(self, region_id: str) -> RegionCover:
        for rc in self.regions:
            if rc.region_id == region_id:
                return rc
        raise KeyError(region_id)


# ---------------------------------------------------------------------------
# greedy descent


def greedy_step(
    scenario: Scenario,
    q: Config,
    attractor: Config,
    *,
    member_set: frozenset[Config] | None = None,
) -> Config | None:
    """One steepest-descent move of the navigation value, or None at a stall.

    Candidates are the valid lattice successors, or — when ``member_set``
    is given — the lattice neighbors inside that set (zero collision
    checks). The move must strictly decrease the navigation value; ties
    break lexicographically.
    """
    nav_q = cspace.navigation_value(scenario, q, attractor)
    best: Config | None = None
    best_nav = nav_q
    for nb in cspace.lattice_neighbors(scenario, q):
        if member_set is not None:
            if nb not in member_set:
                continue
        elif not cspace.is_valid(scenario, nb):
            continue
        nav = cspace.navigation_value(scenario, nb, attractor)
        if nav < best_nav or (nav == best_nav and best is not None and nb < best):
            best = nb
            best_nav = nav
    if best is None or best_nav >= nav_q:
        return None
    return best


def descend(
    scenario: Scenario,
    q: Config,
    attractor: Config,
    step_bound: int | None = None,
    *,
    member_set: frozenset[Config] | None = None,
) -> Path:
    """Run greedy descent q -> attractor. No search, only successor evaluation.

    Raises DescentStalled when no strictly improving move exists and
    BoundExceeded when the walk outruns ``step_bound``.
    """
    configs = [q]
    cur = q
    while cur != attractor:
        if step_bound is not None and len(configs) - 1 >= step_bound:
            raise BoundExceeded(f"descent from {q} exceeded {step_bound} steps")
        nxt = greedy_step(scenario, cur, attractor, member_set=member_set)
        if nxt is None:
            raise DescentStalled(f"descent stalled at {cur} toward {attractor}")
        configs.append(nxt)
        cur = nxt
    return Path.from_configs(configs)


def construct_neighborhood(
    scenario: Scenario, attractor: Config
) -> tuple[Neighborhood, frozenset[Config]]:
    """Grow the attractor's full descent basin by outward expansion.

    Returns the neighborhood and its frontier: valid states adjacent to
    members whose own descent walk does not reach the attractor.
    """
    # Memoized walk results: config -> steps to attractor, or -1 for failure.
    steps: dict[Config, int] = {attractor: 0}

    def walk(q: Config) -> int:
        # Strict descent means no cycles: the walk ends at the attractor,
        # a stall, or a previously memoized state.
        chain: list[Config] = []
        cur = q
        while cur not in steps:
            chain.append(cur)
            nxt = greedy_step(scenario, cur, attractor)
            if nxt is None:
                steps[cur] = -1
                break
            cur = nxt
        base = steps[cur]
        for dist, state in enumerate(reversed(chain), start=1):
            steps[state] = -1 if base < 0 else base + dist
        return steps[q]

    members = {attractor}
    frontier: set[Config] = set()
    queue = deque([attractor])
    seen = {attractor}
    max_steps = 0
    while queue:
        q = queue.popleft()
        for nb in cspace.lattice_neighbors(scenario, q):
            if nb in seen or not cspace.is_valid(scenario, nb):
                continue
            seen.add(nb)
            n_steps = walk(nb)
            if n_steps >= 0:
                members.add(nb)
                queue.append(nb)
                max_steps = max(max_steps, n_steps)
            else:
                frontier.add(nb)
    return (
        Neighborhood(attractor=attractor, members=frozenset(members), max_descent_steps=max_steps),
        frozenset(frontier),
    )


# ---------------------------------------------------------------------------
# cover construction


def sample_valid_uncovered(
    region_states: list[Config],
    done: set[Config],
    frontier_cache: frozenset[Config],
    rng: random.Random,
) -> Config | None:
    """Next attractor candidate: frontier states first, else uniform.

    ``done`` holds states already covered or excluded. Candidates are
    drawn from a sorted list, so the pick is deterministic for a seeded
    rng. Returns None when the region is exhausted.
    """
    region_set = set(region_states)
    from_frontier = sorted(q for q in frontier_cache if q in region_set and q not in done)
    if from_frontier:
        return from_frontier[rng.randrange(len(from_frontier))]
    remaining = sorted(q for q in region_states if q not in done)
    if not remaining:
        return None
    return remaining[rng.randrange(len(remaining))]


def preprocess(scenario: Scenario, seed: int = 0, rep_path_weight: float = REP_PATH_WEIGHT) -> Library:
    """Build the library: a cover with representative paths per region.

    Deterministic for a fixed (scenario, seed). Each region draws from its
    own seeded rng, so region builds are independent and could run
    concurrently. Raises HomeInvalid when the home state fails validation.
    """
    if not cspace.is_valid(scenario, scenario.s_home):
        raise HomeInvalid(f"home state {scenario.s_home} is invalid")
    region_covers = []
    for region in scenario.regions:
        rng = random.Random(f"{seed}:{region.id}")
        region_states = cspace.region_configs(scenario, region)
        covered: set[Config] = set()
        excluded: set[Config] = set()
        entries: list[CoverEntry] = []
        frontier_cache: frozenset[Config] = frozenset()
        while True:
            cand = sample_valid_uncovered(region_states, covered | excluded, frontier_cache, rng)
            if cand is None:
                break
            try:
                rep = astar(scenario, scenario.s_home, cand, weight=rep_path_weight)
            except NoPath:
                excluded.add(cand)
                continue
            neighborhood, frontier = construct_neighborhood(scenario, cand)
            entries.append(CoverEntry(cand, neighborhood, (rep,)))
            covered |= neighborhood.members.intersection(region_states)
            frontier_cache = frontier
        region_covers.append(
            RegionCover(
                region_id=region.id,
                entries=tuple(entries),
                covered=frozenset(covered),
                excluded=frozenset(excluded),
            )
        )
    return Library(
        fingerprint=cspace.scenario_fingerprint(scenario),
        dims=scenario.dims,
        s_home=scenario.s_home,
        regions=tuple(region_covers),
    )


# ---------------------------------------------------------------------------
# persistence: versioned container, delta-encoded member sets


def _rank_strides(dims: tuple[int, ...]) -> tuple[int, ...]:
    strides = [1] * len(dims)
    for d in range(len(dims) - 2, -1, -1):
        strides[d] = strides[d + 1] * dims[d + 1]
    return tuple(strides)


def _encode_set(configs, dims) -> list[int]:
    """Sorted lattice ranks, delta encoded: [first, diff, diff, ...]."""
    strides = _rank_strides(dims)
    ranks = sorted(sum(c * s for c, s in zip(q, strides)) for q in configs)
    out = []
    prev = 0
    for r in ranks:
        out.append(r - prev)
        prev = r
    return out


def _decode_set(deltas, dims) -> frozenset[Config]:
    strides = _rank_strides(dims)
    out = set()
    rank = 0
    for d in deltas:
        rank += d
        rem = rank
        coords = []
        for s in strides:
            coords.append(rem // s)
            rem %= s
        out.add(tuple(coords))
    return frozenset(out)


def library_to_payload(library: Library) -> dict:
    dims = library.dims
    return {
        "format_version": LIBRARY_FORMAT_VERSION,
        "scenario_fingerprint": library.fingerprint,
        "dims": list(dims),
        "s_home": list(library.s_home),
        "regions": [
            {
                "id": rc.region_id,
                "entries": [
                    {
                        "attractor": list(e.attractor),
                        "members": _encode_set(e.members, dims),
                        "max_descent_steps": e.neighborhood.max_descent_steps,
                        "rep_paths": [[list(q) for q in p.configs] for p in e.rep_paths],
                    }
                    for e in rc.entries
                ],
                "covered": _encode_set(rc.covered, dims),
                "excluded": _encode_set(rc.excluded, dims),
            }
            for rc in library.regions
        ],
    }


def library_from_payload(payload: dict, scenario: Scenario) -> Library:
    try:
        version = payload["format_version"]
        if version != LIBRARY_FORMAT_VERSION:
            raise LibraryVersionError(f"unsupported library format_version {version}")
        fingerprint = payload["scenario_fingerprint"]
        if fingerprint != cspace.scenario_fingerprint(scenario):
            raise FingerprintMismatch("library was built for a different scenario")
        dims = tuple(payload["dims"])
        regions = []
        for rc in payload["regions"]:
            entries = []
            for e in rc["entries"]:
                attractor = tuple(e["attractor"])
                entries.append(
                    CoverEntry(
                        attractor=attractor,
                        neighborhood=Neighborhood(
                            attractor=attractor,
                            members=_decode_set(e["members"], dims),
                            max_descent_steps=int(e["max_descent_steps"]),
                        ),
                        rep_paths=tuple(
                            Path.from_configs(tuple(tuple(q) for q in p)) for p in e["rep_paths"]
                        ),
                    )
                )
            regions.append(
                RegionCover(
                    region_id=rc["id"],
                    entries=tuple(entries),
                    covered=_decode_set(rc["covered"], dims),
                    excluded=_decode_set(rc["excluded"], dims),
                )
            )
        return Library(
            fingerprint=fingerprint,
            dims=dims,
            s_home=tuple(payload["s_home"]),
            regions=tuple(regions),
        )
    except (FingerprintMismatch, LibraryVersionError):
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptLibrary(f"malformed library payload: {exc}") from exc


def save_library(library: Library, path) -> None:
    """Write the library container; byte-stable for identical libraries."""
    data = cspace.canonical_json(library_to_payload(library))
    with open(path, "w") as fh:
        fh.write(data)
        fh.write("\n")


def load_library(path, scenario: Scenario) -> Library:
    """Read and verify a library against the scenario it must match."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptLibrary(f"cannot read library file {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise CorruptLibrary("library payload is not an object")
    return library_from_payload(payload, scenario)
