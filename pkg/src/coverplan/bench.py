"""Benchmark harness: experiment configs, trial runners, CSV/SVG emission.

Trials run against a deterministic simulated clock derived from the
scenario's operation counters (1 ms per expansion, 10 us per collision
check, 1 us per elementary step — a stand-in for manipulation-scale
per-expansion cost). Budgets, timeouts, anytime profiles and the
reported planning times are therefore exactly reproducible: identical
(config, seed) runs emit byte-identical trials.csv.

Trials may execute concurrently in principle (each owns its search
state); records are kept order-stable by trial index either way.
"""

from __future__ import annotations

import csv
import json
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path as FsPath

from . import cspace
from .cover import Library, load_library
from .cspace import Config, OpCounters, Scenario
from .errors import NoPath, PlanningError
from .online import PotentialStateIndex, QueryRequest, query, update_potential_index
from .search import Path, ara_star, astar, path_is_valid, shortcut_path

CONFIG_FORMAT_VERSION = 1

KNOWN_PLANNERS = ("ctmp", "ctmp+refine", "ctmp+shortcut", "astar", "wastar", "arastar")

# Simulated-time quanta (seconds per counted operation).
EXPANSION_SECONDS = 1e-3
CHECK_SECONDS = 1e-5
STEP_SECONDS = 1e-6

TRIALS_COLUMNS = (
    "trial_id",
    "planner",
    "start",
    "goal",
    "budget_ms",
    "success",
    "cost",
    "plan_ms",
    "n_iterations",
    "final_epsilon",
    "optimal_flag",
)


class SimClock:
    """Deterministic clock: a weighted sum of the scenario's op counters."""

    def __init__(self, counters: OpCounters):
        self.counters = counters

    def __call__(self) -> float:
        c = self.counters
        return (
            c.expansions * EXPANSION_SECONDS
            + c.collision_checks * CHECK_SECONDS
            + c.elementary_steps * STEP_SECONDS
        )


@dataclass
class ExperimentConfig:
    """One benchmark run: scenario, library, mode, budgets, planners."""

    scenario: str
    library: str
    mode: str = "single"  # "single" | "sequential"
    trials: int = 20
    budget_ms: float = 500.0
    budget_range_ms: tuple[float, float] | None = None  # sequential-mode draw
    planners: tuple[str, ...] = ("ctmp", "ctmp+refine")
    seed: int = 0
    outdir: str = "bench_out"
    wastar_weight: float = 3.0
    ara_w0: float = 50.0
    ara_dw: float = 5.0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.budget_ms <= 0:
            raise ValueError("budget_ms must be positive")
        if self.budget_range_ms is not None and self.budget_range_ms[0] <= 0:
            raise ValueError("budget range must be positive")
        if self.mode not in ("single", "sequential"):
            raise ValueError(f"unknown mode {self.mode!r}")
        for p in self.planners:
            if p not in KNOWN_PLANNERS:
                raise ValueError(f"unknown planner {p!r}")


def save_experiment_config(cfg: ExperimentConfig, path) -> None:
    payload = {
        "format_version": CONFIG_FORMAT_VERSION,
        "scenario": cfg.scenario,
        "library": cfg.library,
        "mode": cfg.mode,
        "trials": cfg.trials,
        "budget_ms": cfg.budget_ms,
        "budget_range_ms": list(cfg.budget_range_ms) if cfg.budget_range_ms else None,
        "planners": list(cfg.planners),
        "seed": cfg.seed,
        "outdir": cfg.outdir,
        "wastar_weight": cfg.wastar_weight,
        "ara_w0": cfg.ara_w0,
        "ara_dw": cfg.ara_dw,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_experiment_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"cannot parse experiment config {path}: {exc}") from exc
    version = payload.get("format_version")
    if version != CONFIG_FORMAT_VERSION:
        raise ValueError(f"unsupported experiment config format_version {version}")
    for key in ("scenario", "library"):
        if key not in payload:
            raise ValueError(f"experiment config is missing {key!r}")
    rng = payload.get("budget_range_ms")
    return ExperimentConfig(
        scenario=payload["scenario"],
        library=payload["library"],
        mode=payload.get("mode", "single"),
        trials=int(payload.get("trials", 20)),
        budget_ms=float(payload.get("budget_ms", 500.0)),
        budget_range_ms=tuple(rng) if rng else None,
        planners=tuple(payload.get("planners", ("ctmp", "ctmp+refine"))),
        seed=int(payload.get("seed", 0)),
        outdir=payload.get("outdir", "bench_out"),
        wastar_weight=float(payload.get("wastar_weight", 3.0)),
        ara_w0=float(payload.get("ara_w0", 50.0)),
        ara_dw=float(payload.get("ara_dw", 5.0)),
    )


@dataclass
class TrialRecord:
    trial_id: int
    planner: str
    start: Config
    goal: Config
    budget_ms: float
    success: bool
    cost: float | None
    plan_ms: float
    n_iterations: int
    final_epsilon: float | None
    optimal_flag: bool
    profile: list[tuple[float, float, float | None]] = field(default_factory=list)
    path: Path | None = None


@dataclass
class SummaryRow:
    planner: str
    trials: int
    solved: int
    success_rate_pct: float
    mean_cost_common: float | None
    mean_plan_ms: float
    std_plan_ms: float
    mean_suboptimality_common: float | None


# ---------------------------------------------------------------------------
# trial execution


def _fmt_config(q: Config) -> str:
    return ";".join(str(c) for c in q)


def run_trial(
    planner: str,
    scenario: Scenario,
    library: Library,
    index: PotentialStateIndex,
    trial_id: int,
    start: Config,
    goal: Config,
    budget_ms: float,
    cfg: ExperimentConfig,
) -> TrialRecord:
    """One planner on one instance under the simulated clock."""
    scenario.counters.reset()
    clock = SimClock(scenario.counters)
    deadline = budget_ms / 1000.0
    success = False
    cost = None
    n_iterations = 0
    final_epsilon = None
    optimal = False
    profile: list[tuple[float, float, float | None]] = []
    path = None
    try:
        if planner in ("ctmp", "ctmp+refine", "ctmp+shortcut"):
            refine = planner == "ctmp+refine"
            res = query(
                scenario,
                library,
                QueryRequest(start=start, goal=goal, budget_ms=budget_ms, refine=refine),
                index=index,
                clock=clock,
            )
            path = res.path
            if planner == "ctmp+shortcut":
                path = shortcut_path(
                    scenario,
                    path,
                    deadline=deadline,
                    seed=cfg.seed * 100000 + trial_id,
                    clock=clock,
                )
            success = True
            cost = path.cost
            base_ms = res.lookup_ms + res.connect_ms
            if refine and res.refine_report is not None:
                rep = res.refine_report
                n_iterations = len(rep.iterations)
                final_epsilon = rep.epsilon_history[-1] if rep.iterations else None
                optimal = rep.optimal_flag
                profile = [(base_ms, res.initial_cost, None)] + [
                    (base_ms + it.elapsed_ms, it.cost, it.epsilon) for it in rep.iterations
                ]
            else:
                profile = [(clock() * 1000.0, cost, None)]
                n_iterations = 0
                optimal = False
        elif planner in ("astar", "wastar"):
            weight = 1.0 if planner == "astar" else cfg.wastar_weight
            path = astar(scenario, start, goal, weight=weight, deadline=deadline, clock=clock)
            success = True
            cost = path.cost
            n_iterations = 1
            final_epsilon = weight
            optimal = weight == 1.0
            profile = [(clock() * 1000.0, cost, weight)]
        elif planner == "arastar":
            path, iters, optimal = ara_star(
                scenario,
                start,
                goal,
                w0=cfg.ara_w0,
                dw=cfg.ara_dw,
                deadline=deadline,
                clock=clock,
            )
            success = True
            cost = path.cost
            n_iterations = len(iters)
            final_epsilon = iters[-1].weight if iters else None
            profile = [(it.elapsed_ms, it.cost, it.weight) for it in iters]
        else:
            raise ValueError(f"unknown planner {planner!r}")
    except PlanningError:
        success = False
    plan_ms = clock() * 1000.0
    if success and path is not None and not path_is_valid(scenario, path):
        # Defensive: a planner bug must surface as a failed trial, not bad stats.
        success = False
        cost = None
    return TrialRecord(
        trial_id=trial_id,
        planner=planner,
        start=start,
        goal=goal,
        budget_ms=budget_ms,
        success=success,
        cost=cost,
        plan_ms=plan_ms,
        n_iterations=n_iterations,
        final_epsilon=final_epsilon,
        optimal_flag=optimal,
        profile=profile,
        path=path if success else None,
    )


def _covered_goals(library: Library, region_id: str | None = None) -> list[Config]:
    goals: list[Config] = []
    for rc in library.regions:
        if region_id is not None and rc.region_id != region_id:
            continue
        goals.extend(rc.covered)
    return sorted(goals)


def run_single_experiment(
    scenario: Scenario, library: Library, cfg: ExperimentConfig
) -> tuple[list[TrialRecord], list[SummaryRow]]:
    """Home-start queries to uniformly sampled covered goals."""
    rng = random.Random(cfg.seed)
    goals_pool = _covered_goals(library)
    if not goals_pool:
        raise PlanningError("library covers no goals")
    instances = []
    for t in range(cfg.trials):
        goal = goals_pool[rng.randrange(len(goals_pool))]
        instances.append((t, scenario.s_home, goal, cfg.budget_ms))
    return _run_instances(scenario, library, cfg, instances)


def run_sequential_experiment(
    scenario: Scenario, library: Library, cfg: ExperimentConfig
) -> tuple[list[TrialRecord], list[SummaryRow]]:
    """Chained pick -> place -> pick queries; each start is the previous goal."""
    if len(scenario.regions) < 2:
        raise PlanningError("sequential mode needs at least two regions")
    rng = random.Random(cfg.seed)
    region_ids = [r.id for r in scenario.regions]
    instances = []
    start = scenario.s_home
    for t in range(cfg.trials):
        region = region_ids[t % 2]
        pool = [q for q in _covered_goals(library, region) if q != start]
        if not pool:
            raise PlanningError(f"region {region} covers no goals")
        goal = pool[rng.randrange(len(pool))]
        if cfg.budget_range_ms is not None:
            budget = rng.uniform(*cfg.budget_range_ms)
        else:
            budget = cfg.budget_ms
        instances.append((t, start, goal, budget))
        start = goal
    return _run_instances(scenario, library, cfg, instances, sequential=True)


def _run_instances(scenario, library, cfg, instances, sequential=False):
    index = PotentialStateIndex(scenario, library)
    chain_planner = "ctmp+refine" if "ctmp+refine" in cfg.planners else cfg.planners[0]
    records: list[TrialRecord] = []
    for trial_id, start, goal, budget in instances:
        executed: Path | None = None
        for planner in cfg.planners:
            rec = run_trial(planner, scenario, library, index, trial_id, start, goal, budget, cfg)
            records.append(rec)
            if planner == chain_planner and rec.path is not None:
                executed = rec.path
        if sequential and executed is not None:
            update_potential_index(index, executed)
    stats = summarize(scenario, records, cfg.planners)
    return records, stats


# ---------------------------------------------------------------------------
# statistics


def oracle_costs(scenario: Scenario, records: list[TrialRecord]) -> dict[tuple, float | None]:
    """Per-instance optimal cost from a weight-1 A* oracle (no deadline)."""
    out: dict[tuple, float | None] = {}
    for rec in records:
        key = (rec.start, rec.goal)
        if key in out:
            continue
        try:
            out[key] = astar(scenario, rec.start, rec.goal, weight=1.0).cost
        except NoPath:
            out[key] = None
    return out


def summarize(
    scenario: Scenario, records: list[TrialRecord], planners
) -> list[SummaryRow]:
    """Per-planner stats; cost columns restricted to commonly-solved instances."""
    oracle = oracle_costs(scenario, records)
    by_planner: dict[str, list[TrialRecord]] = {p: [] for p in planners}
    for rec in records:
        by_planner[rec.planner].append(rec)
    solved_ids = None
    for p in planners:
        ids = {r.trial_id for r in by_planner[p] if r.success}
        solved_ids = ids if solved_ids is None else (solved_ids & ids)
    solved_ids = solved_ids or set()
    rows = []
    for p in planners:
        recs = by_planner[p]
        solved = [r for r in recs if r.success]
        common = [r for r in solved if r.trial_id in solved_ids]
        subopts = []
        for r in common:
            opt = oracle.get((r.start, r.goal))
            if opt and opt > 0:
                subopts.append(r.cost / opt)
            elif opt == 0.0 and r.cost == 0.0:
                subopts.append(1.0)
        plan_times = [r.plan_ms for r in recs]
        rows.append(
            SummaryRow(
                planner=p,
                trials=len(recs),
                solved=len(solved),
                success_rate_pct=100.0 * len(solved) / len(recs) if recs else 0.0,
                mean_cost_common=statistics.fmean(r.cost for r in common) if common else None,
                mean_plan_ms=statistics.fmean(plan_times) if plan_times else 0.0,
                std_plan_ms=statistics.pstdev(plan_times) if len(plan_times) > 1 else 0.0,
                mean_suboptimality_common=statistics.fmean(subopts) if subopts else None,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# emission


def _fmt_float(x: float | None) -> str:
    if x is None:
        return ""
    return f"{x:.6f}"


def emit_results(records: list[TrialRecord], stats: list[SummaryRow], outdir) -> dict[str, str]:
    """Write trials.csv, summary.csv and anytime_profile.svg into outdir."""
    out = FsPath(outdir)
    out.mkdir(parents=True, exist_ok=True)
    trials_path = out / "trials.csv"
    with open(trials_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIALS_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.trial_id,
                    r.planner,
                    _fmt_config(r.start),
                    _fmt_config(r.goal),
                    _fmt_float(r.budget_ms),
                    str(r.success),
                    _fmt_float(r.cost),
                    _fmt_float(r.plan_ms),
                    r.n_iterations,
                    _fmt_float(r.final_epsilon),
                    str(r.optimal_flag),
                ]
            )
    summary_path = out / "summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "planner",
                "trials",
                "solved",
                "success_rate_pct",
                "mean_cost_common",
                "mean_plan_ms",
                "std_plan_ms",
                "mean_suboptimality_common",
            ]
        )
        for s in stats:
            writer.writerow(
                [
                    s.planner,
                    s.trials,
                    s.solved,
                    _fmt_float(s.success_rate_pct),
                    _fmt_float(s.mean_cost_common),
                    _fmt_float(s.mean_plan_ms),
                    _fmt_float(s.std_plan_ms),
                    _fmt_float(s.mean_suboptimality_common),
                ]
            )
    svg_path = out / "anytime_profile.svg"
    with open(svg_path, "w") as fh:
        fh.write(render_profile_svg(records))
    return {
        "trials": str(trials_path),
        "summary": str(summary_path),
        "profile": str(svg_path),
    }


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def render_profile_svg(records: list[TrialRecord]) -> str:
    """Self-contained cost-vs-time SVG: one polyline per planner, inflation
    values annotated at anytime samples."""
    width, height = 640, 420
    ml, mr, mt, mb = 60, 20, 30, 45
    curves: dict[str, list[tuple[float, float, float | None]]] = {}
    for rec in records:
        if rec.planner not in curves and rec.profile:
            curves[rec.planner] = rec.profile
    samples = [pt for prof in curves.values() for pt in prof]
    max_t = max((pt[0] for pt in samples), default=1.0) or 1.0
    max_c = max((pt[1] for pt in samples), default=1.0) or 1.0

    def sx(t: float) -> float:
        return ml + (width - ml - mr) * t / max_t

    def sy(c: float) -> float:
        return height - mb - (height - mt - mb) * c / max_c

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>',
        f'<text x="{(ml + width - mr) / 2:.1f}" y="{height - 10}" text-anchor="middle" '
        f'font-size="13">planning time [ms]</text>',
        f'<text x="15" y="{(mt + height - mb) / 2:.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 15 {(mt + height - mb) / 2:.1f})">solution cost [steps]</text>',
    ]
    for k, (planner, profile) in enumerate(sorted(curves.items())):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{sx(t):.2f},{sy(c):.2f}" for t, c, _ in profile)
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2" '
            f'data-planner="{planner}"/>'
        )
        prev_cost = None
        for idx, (t, c, eps) in enumerate(profile):
            parts.append(f'<circle cx="{sx(t):.2f}" cy="{sy(c):.2f}" r="3" fill="{color}"/>')
            # annotate where the curve moves (and at its end) to keep labels legible
            if eps is not None and (c != prev_cost or idx == len(profile) - 1):
                parts.append(
                    f'<text x="{sx(t) + 5:.2f}" y="{sy(c) - 5:.2f}" font-size="10" '
                    f'fill="{color}">eps={eps:.2f}</text>'
                )
            prev_cost = c
        parts.append(
            f'<text x="{width - mr - 5}" y="{mt + 16 * (k + 1)}" text-anchor="end" '
            f'font-size="12" fill="{color}">{planner}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# entry point used by the CLI


def run_bench(config_path) -> dict[str, str]:
    """Load config + scenario + library, run the experiment, emit files."""
    cfg = load_experiment_config(config_path)
    scenario = cspace.load_scenario(cfg.scenario)
    library = load_library(cfg.library, scenario)
    if cfg.mode == "single":
        records, stats = run_single_experiment(scenario, library, cfg)
    else:
        records, stats = run_sequential_experiment(scenario, library, cfg)
    return emit_results(records, stats, cfg.outdir)
