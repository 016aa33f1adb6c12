"""Lattice searches.

astar covers plain and weighted A* with deterministic tie-breaking.
anytime_refine is the path-seeded anytime search: the open list starts
with every state of an initial solution at its path cost, and the
heuristic inflation schedule is driven by the incumbent cost so that each
iteration is guaranteed at least one productive expansion. ara_star is
the classic fixed-schedule baseline, shortcut_path the random-restart
smoothing baseline.

All searches own their mutable state; many may run concurrently over one
immutable scenario. Deadlines are absolute instants on the injected
clock (monotonic wall clock by default) and are checked once per
expansion.
"""

from __future__ import annotations

import heapq
import random
import time
from dataclasses import dataclass, field
from typing import Callable

from . import cspace
from .cspace import Config, Scenario
from .errors import DegeneratePath, NoPath, Timeout

DEFAULT_DELTA = 1e-6


@dataclass(frozen=True)
class Path:
    """An ordered lattice path with its accumulated edge cost."""

    configs: tuple[Config, ...]
    cost: float

    def __post_init__(self):
        if not self.configs:
            raise ValueError("a path has at least one configuration")

    @property
    def start(self) -> Config:
        return self.configs[0]

    @property
    def goal(self) -> Config:
        return self.configs[-1]

    def reverse(self) -> "Path":
        return Path(tuple(reversed(self.configs)), self.cost)

    @staticmethod
    def from_configs(configs) -> "Path":
        configs = tuple(configs)
        return Path(configs, cspace.UNIT_COST * (len(configs) - 1))


def concat_paths(a: Path, b: Path) -> Path:
    """Join two paths sharing a junction config (kept once)."""
    if a.configs[-1] != b.configs[0]:
        raise ValueError("paths do not share a junction configuration")
    return Path(a.configs + b.configs[1:], a.cost + b.cost)


def path_is_valid(scenario: Scenario, path: Path) -> bool:
    """Re-validate a path edge by edge against the scenario."""
    if not cspace.is_valid(scenario, path.configs[0]):
        return False
    cost = 0.0
    for a, b in zip(path.configs, path.configs[1:]):
        step = dict(cspace.successors(scenario, a))
        if b not in step:
            return False
        cost += step[b]
    return abs(cost - path.cost) < 1e-9


def _reconstruct(parent: dict, goal: Config) -> tuple[Path, float]:
    """Follow parent pointers; the cost is recomputed from real edges."""
    configs = [goal]
    while parent[configs[-1]] is not None:
        configs.append(parent[configs[-1]])
    configs.reverse()
    return Path.from_configs(configs), cspace.UNIT_COST * (len(configs) - 1)


def astar(
    scenario: Scenario,
    start: Config,
    goal: Config,
    *,
    weight: float = 1.0,
    deadline: float | None = None,
    clock: Callable[[], float] = time.monotonic,
    goal_predicate: Callable[[Config], bool] | None = None,
) -> Path:
    """(Weighted) A* over the lattice.

    With weight 1 the result is optimal; with weight w >= 1 the cost is
    within w of optimal. Ties on f are broken by larger g, then
    lexicographic config order, so runs are fully deterministic.

    Raises Timeout when the deadline passes, NoPath when the frontier
    empties.
    """
    if weight < 1.0:
        raise ValueError("weight must be >= 1")
    is_goal = goal_predicate if goal_predicate is not None else (lambda q: q == goal)
    if not cspace.is_valid(scenario, start):
        raise NoPath(f"start {start} is invalid")

    g: dict[Config, float] = {start: 0.0}
    parent: dict[Config, Config | None] = {start: None}
    closed: set[Config] = set()
    heap = [(weight * cspace.heuristic(scenario, start, goal), 0.0, start)]
    while heap:
        if deadline is not None and clock() >= deadline:
            raise Timeout("search deadline expired")
        f, neg_g, q = heapq.heappop(heap)
        if q in closed or -neg_g != g[q]:
            continue  # stale entry
        if is_goal(q):
            return _reconstruct(parent, q)[0]
        closed.add(q)
        scenario.counters.expansions += 1
        gq = g[q]
        for nb, cost in cspace.successors(scenario, q):
            g2 = gq + cost
            if nb in closed or g2 >= g.get(nb, float("inf")):
                continue
            g[nb] = g2
            parent[nb] = q
            heapq.heappush(heap, (g2 + weight * cspace.heuristic(scenario, nb, goal), -g2, nb))
    raise NoPath(f"no path from {start}")


# ---------------------------------------------------------------------------
# incumbent-driven inflation schedule


def initial_epsilon(path_g, path_h, incumbent_cost: float, delta: float = DEFAULT_DELTA) -> float:
    """Largest inflation that still pulls the search off the seed path.

    Returns max over path states of (C - g) / (h + delta), clamped below
    at 1; when the result exceeds 1, the maximizing state outranks the
    goal on the open list, so at least one non-goal selection happens.
    The goal state contributes 0 and never maximizes. Raises
    DegeneratePath for single-state paths.
    """
    if len(path_g) < 2:
        raise DegeneratePath("cannot seed a schedule from a single-state path")
    best = max((incumbent_cost - g) / (h + delta) for g, h in zip(path_g, path_h))
    return max(1.0, best)


def next_epsilon(
    path_g, path_h, open_g, open_h, incumbent_cost: float, delta: float = DEFAULT_DELTA
) -> float:
    """Between-iteration inflation update: min of the path and open-list maxima.

    Clamped below at 1; with a non-empty open list the result is strictly
    below the inflation the completed iteration ran at. An empty open
    list falls back to the path maximum alone.
    """
    ratios_path = max((incumbent_cost - g) / (h + delta) for g, h in zip(path_g, path_h))
    if open_g:
        ratios_open = max((incumbent_cost - g) / (h + delta) for g, h in zip(open_g, open_h))
        return max(1.0, min(ratios_path, ratios_open))
    return max(1.0, ratios_path)


@dataclass
class RefineIteration:
    epsilon: float
    cost: float
    expansions: int  # successor scans (locally inconsistent selections)
    selections: int  # states taken off the open list, including no-op re-pops
    elapsed_ms: float


@dataclass
class RefineReport:
    """Per-run refinement record: schedule, costs, effort, convergence flag."""

    initial_cost: float
    final_cost: float
    iterations: list[RefineIteration] = field(default_factory=list)
    incumbents: list["Path"] = field(default_factory=list)  # one per iteration
    optimal_flag: bool = False

    @property
    def epsilon_history(self) -> list[float]:
        return [it.epsilon for it in self.iterations]

    @property
    def iteration_costs(self) -> list[float]:
        return [it.cost for it in self.iterations]

    @property
    def expansions(self) -> int:
        return sum(it.expansions for it in self.iterations)


def _seed_from_path(path: Path):
    """Path states with their path g-values and predecessor links.

    A concatenated initial path can revisit a state (the V through home);
    the cheaper occurrence wins, which keeps g strictly decreasing along
    parent chains and therefore acyclic.
    """
    g: dict[Config, float] = {}
    parent: dict[Config, Config | None] = {}
    acc = 0.0
    prev: Config | None = None
    for k, q in enumerate(path.configs):
        if k > 0:
            acc += cspace.UNIT_COST
        if q not in g or acc < g[q]:
            g[q] = acc
            parent[q] = prev
        prev = q
    return g, parent


def anytime_refine(
    scenario: Scenario,
    start: Config,
    goal: Config,
    initial_path: Path,
    *,
    deadline: float | None = None,
    delta: float = DEFAULT_DELTA,
    clock: Callable[[], float] = time.monotonic,
) -> tuple[Path, RefineReport]:
    """Refine an initial solution toward optimality within a deadline.

    The open list is seeded with every state of ``initial_path`` at its
    path g-value, then weighted-A* iterations run at a strictly
    decreasing inflation derived from the incumbent cost. Each iteration
    expands a state at most once; states improved after closing move to
    an inconsistent set and re-seed the next iteration together with the
    incumbent path. After an iteration completes at inflation 1 the
    result is optimal and the run stops (deadline permitting). Always
    returns at least the initial path.

    ``deadline`` is an absolute instant on ``clock``; None means run to
    convergence.
    """
    if initial_path.configs[0] != start or initial_path.configs[-1] != goal:
        raise ValueError("initial path endpoints do not match start/goal")
    report = RefineReport(initial_cost=initial_path.cost, final_cost=initial_path.cost)
    if len(initial_path.configs) == 1:
        report.optimal_flag = True  # start == goal: cost 0 is already optimal
        return initial_path, report
    if deadline is not None and clock() >= deadline:
        return initial_path, report

    # A seed path that revisits the goal carries a strictly cheaper prefix
    # solution; adopt it. This also keeps g(goal) equal to the incumbent
    # cost, which the inflation schedule requires (h(goal) = 0).
    first_goal = initial_path.configs.index(goal)
    if first_goal < len(initial_path.configs) - 1:
        initial_path = Path.from_configs(initial_path.configs[: first_goal + 1])

    t0 = clock()
    g, parent = _seed_from_path(initial_path)
    h_cache: dict[Config, float] = {}

    def h(q: Config) -> float:
        v = h_cache.get(q)
        if v is None:
            v = cspace.heuristic(scenario, q, goal)
            h_cache[q] = v
        return v

    incumbent = initial_path
    cost_c = initial_path.cost
    open_set: set[Config] = set(initial_path.configs)
    incons: set[Config] = set()
    closed: set[Config] = set()
    # v-values: g at the most recent successor scan. A selected state whose
    # g is unchanged since its last scan cannot relax anything (successor
    # g-values only decreased meanwhile), so re-scanning it is skipped —
    # the classic once-per-inconsistency expansion discipline.
    v: dict[Config, float] = {}

    eps = initial_epsilon(
        [g[q] for q in initial_path.configs],
        [h(q) for q in initial_path.configs],
        cost_c,
        delta,
    )

    while True:
        if deadline is not None and clock() >= deadline:
            break
        # one weighted-A* iteration at the current inflation
        heap = [(g[q] + eps * h(q), -g[q], q) for q in open_set]
        heapq.heapify(heap)
        expansions = 0
        selections = 0
        interrupted = False
        goal_extracted = False
        while True:
            if deadline is not None and clock() >= deadline:
                interrupted = True
                break
            q = None
            while heap:
                _, neg_g, cand = heapq.heappop(heap)
                if cand in open_set and -neg_g == g[cand]:
                    q = cand
                    break
            if q is None:
                break  # frontier exhausted: close the iteration, keep the incumbent
            if q == goal:
                open_set.discard(q)
                goal_extracted = True
                break
            open_set.discard(q)
            closed.add(q)
            selections += 1
            gq = g[q]
            if v.get(q) == gq:
                continue
            v[q] = gq
            scenario.counters.expansions += 1
            expansions += 1
            for nb, cost in cspace.successors(scenario, q):
                g2 = gq + cost
                if g2 >= g.get(nb, float("inf")):
                    continue
                g[nb] = g2
                parent[nb] = q
                if nb in closed:
                    incons.add(nb)
                else:
                    open_set.add(nb)
                    heapq.heappush(heap, (g2 + eps * h(nb), -g2, nb))
        if interrupted:
            break  # mid-iteration deadline: report only completed iterations

        if goal_extracted:
            extracted, true_cost = _reconstruct(parent, goal)
            # Stale parent links can only overstate g(goal); the edge-cost
            # sum is an achieved cost, so adopt it.
            incumbent = extracted
            cost_c = true_cost
            g[goal] = min(g[goal], true_cost)
        report.iterations.append(
            RefineIteration(eps, cost_c, expansions, selections, (clock() - t0) * 1000.0)
        )
        report.incumbents.append(incumbent)
        if eps == 1.0:
            report.optimal_flag = True
            break

        closed.clear()
        path_g = [g[q] for q in incumbent.configs]
        path_h = [h(q) for q in incumbent.configs]
        open_list = list(open_set)
        new_eps = next_epsilon(
            path_g, path_h, [g[q] for q in open_list], [h(q) for q in open_list], cost_c, delta
        )
        if new_eps >= eps:
            # Only reachable when the frontier emptied, i.e. the g-values
            # are Bellman-stable; one inflation-1 pass certifies that.
            new_eps = 1.0
        eps = new_eps
        open_set |= incons
        incons.clear()
        open_set.update(incumbent.configs)

    report.final_cost = incumbent.cost
    return incumbent, report


# ---------------------------------------------------------------------------
# baselines


@dataclass
class AraIteration:
    weight: float
    cost: float
    expansions: int
    elapsed_ms: float


def ara_star(
    scenario: Scenario,
    start: Config,
    goal: Config,
    *,
    w0: float = 50.0,
    dw: float = 5.0,
    deadline: float | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> tuple[Path, list[AraIteration], bool]:
    """Classic anytime repairing A* from scratch (no path seeding).

    Runs weighted iterations at w0, w0-dw, ..., 1 with inconsistent-state
    carry-over. Returns (best path, per-iteration profile, optimal flag);
    raises Timeout if the deadline expires before any solution exists.
    """
    if w0 < 1.0 or dw <= 0.0:
        raise ValueError("need w0 >= 1 and dw > 0")
    if not cspace.is_valid(scenario, start):
        raise NoPath(f"start {start} is invalid")
    t0 = clock()
    g: dict[Config, float] = {start: 0.0}
    parent: dict[Config, Config | None] = {start: None}
    open_set: set[Config] = {start}
    incons: set[Config] = set()
    incumbent: Path | None = None
    profile: list[AraIteration] = []
    w = w0
    optimal = False
    v: dict[Config, float] = {}  # g at last scan; only inconsistent states re-scan

    def h(q: Config) -> float:
        return cspace.heuristic(scenario, q, goal)

    while True:
        heap = [(g[q] + w * h(q), -g[q], q) for q in open_set]
        heapq.heapify(heap)
        closed: set[Config] = set()
        expansions = 0
        interrupted = False
        while True:
            if deadline is not None and clock() >= deadline:
                interrupted = True
                break
            q = None
            while heap:
                _, neg_g, cand = heapq.heappop(heap)
                if cand in open_set and -neg_g == g[cand]:
                    q = cand
                    break
            if q is None:
                break
            if q == goal:
                open_set.discard(q)
                break
            # classic guard: nothing on the frontier can beat the incumbent
            if goal in g and g[q] + w * h(q) >= g[goal]:
                break
            open_set.discard(q)
            closed.add(q)
            gq = g[q]
            if v.get(q) == gq:
                continue
            v[q] = gq
            scenario.counters.expansions += 1
            expansions += 1
            for nb, cost in cspace.successors(scenario, q):
                g2 = gq + cost
                if g2 >= g.get(nb, float("inf")):
                    continue
                g[nb] = g2
                parent[nb] = q
                if nb in closed:
                    incons.add(nb)
                else:
                    open_set.add(nb)
                    heapq.heappush(heap, (g2 + w * h(nb), -g2, nb))
        if interrupted:
            if incumbent is None:
                raise Timeout("deadline expired before the first ARA* solution")
            break
        if goal in g:
            extracted, true_cost = _reconstruct(parent, goal)
            if incumbent is None or true_cost < incumbent.cost:
                incumbent = extracted
                g[goal] = min(g[goal], true_cost)
        if incumbent is None:
            raise NoPath(f"no path from {start}")
        profile.append(AraIteration(w, incumbent.cost, expansions, (clock() - t0) * 1000.0))
        if w == 1.0:
            optimal = True
            break
        open_set |= incons
        incons.clear()
        if not open_set:
            optimal = True  # frontier exhausted: g-values are stable, hence optimal
            break
        w = max(1.0, w - dw)
    return incumbent, profile, optimal


def _lattice_segment(scenario: Scenario, a: Config, b: Config) -> list[Config] | None:
    """Deterministic straight lattice walk a -> b, or None if it hits anything.

    Repeatedly steps the axis with the largest remaining (wrapped) offset,
    ties to the lowest axis, toward the shorter wrap direction (+1 on an
    exact half-wrap tie). Every interior state must be valid.
    """
    dims = scenario.dims
    wraps = scenario.wraps
    out = [a]
    cur = a
    while cur != b:
        best_d, best_gap = -1, 0
        for d in range(len(dims)):
            gap = cspace._axis_delta(cur[d], b[d], dims[d], wraps[d])
            if gap > best_gap:
                best_d, best_gap = d, gap
        d = best_d
        n = dims[d]
        if wraps[d]:
            forward = (b[d] - cur[d]) % n
            step = 1 if forward <= n - forward else -1
            c = (cur[d] + step) % n
        else:
            c = cur[d] + (1 if b[d] > cur[d] else -1)
        cur = cur[:d] + (c,) + cur[d + 1 :]
        if cur != b and not cspace.is_valid(scenario, cur):
            return None
        out.append(cur)
    return out


def shortcut_path(
    scenario: Scenario,
    path: Path,
    *,
    deadline: float | None = None,
    seed: int = 0,
    max_failures: int = 100,
    clock: Callable[[], float] = time.monotonic,
) -> Path:
    """Random-segment shortcutting: straighten spans whose detour exceeds
    the lattice distance between their endpoints.

    Deterministic for a fixed seed; stops at the deadline or after
    ``max_failures`` consecutive non-improving trials.
    """
    rng = random.Random(seed)
    configs = list(path.configs)
    failures = 0
    while failures < max_failures:
        if deadline is not None and clock() >= deadline:
            break
        n = len(configs)
        if n < 3:
            break
        i, j = sorted((rng.randrange(n), rng.randrange(n)))
        if j - i < 2:
            failures += 1
            continue
        a, b = configs[i], configs[j]
        gap = sum(
            cspace._axis_delta(a[d], b[d], scenario.dims[d], scenario.wraps[d])
            for d in range(scenario.dof)
        )
        if gap >= j - i:  # unit costs: the span is already as short as the lattice allows
            failures += 1
            continue
        segment = _lattice_segment(scenario, a, b)
        if segment is None:
            failures += 1
            continue
        configs = configs[: i + 1] + segment[1:-1] + configs[j:]
        failures = 0
    return Path.from_configs(configs)
