"""coverplan: constant-time lattice motion planning via goal-region covers,
with anytime refinement toward optimal paths."""

from . import errors
from .cspace import (
    SCENARIO_FORMAT_VERSION,
    ArmModel,
    Circle,
    Config,
    OpCounters,
    Rect,
    RegionSpec,
    Scenario,
    forward_kinematics,
    heuristic,
    in_region,
    is_valid,
    load_scenario,
    navigation_value,
    save_scenario,
    scenario_fingerprint,
    successors,
)
from .cover import (
    LIBRARY_FORMAT_VERSION,
    CoverEntry,
    Library,
    Neighborhood,
    RegionCover,
    construct_neighborhood,
    descend,
    load_library,
    preprocess,
    save_library,
)
from .online import (
    PotentialStateIndex,
    QueryRequest,
    QueryResult,
    connect,
    find_rep_path,
    path_home_to,
    query,
    update_potential_index,
)
from .planner import CoverPlanner
from .search import (
    Path,
    RefineReport,
    anytime_refine,
    ara_star,
    astar,
    initial_epsilon,
    next_epsilon,
    path_is_valid,
    shortcut_path,
)

__version__ = "0.1.0"

__all__ = [
    "ArmModel",
    "Circle",
    "Config",
    "CoverEntry",
    "CoverPlanner",
    "Library",
    "LIBRARY_FORMAT_VERSION",
    "Neighborhood",
    "OpCounters",
    "Path",
    "PotentialStateIndex",
    "QueryRequest",
    "QueryResult",
    "Rect",
    "RefineReport",
    "RegionCover",
    "RegionSpec",
    "SCENARIO_FORMAT_VERSION",
    "Scenario",
    "anytime_refine",
    "ara_star",
    "astar",
    "connect",
    "construct_neighborhood",
    "descend",
    "errors",
    "find_rep_path",
    "forward_kinematics",
    "heuristic",
    "in_region",
    "initial_epsilon",
    "is_valid",
    "load_library",
    "load_scenario",
    "navigation_value",
    "next_epsilon",
    "path_home_to",
    "path_is_valid",
    "preprocess",
    "query",
    "save_library",
    "save_scenario",
    "scenario_fingerprint",
    "shortcut_path",
    "successors",
    "update_potential_index",
]
