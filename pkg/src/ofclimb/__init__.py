"""One-factorizations of complete graphs by local search.

A proper edge coloring of K_n with n-1 colors splits the edges into
perfect matchings.  This package generates such factorizations by hill
climbing on the number of same-color incidences, escapes local optima
with balanced color flips, samples colorings by a Metropolis chain,
runs the classical constructive heuristics, and analyzes the results
(isomorphism classes at n = 8, spectra and girth of factor unions,
deficit witnesses).

Hot loops run in a compiled extension when available; setting
OFCLIMB_PURE=1 forces the pure Python fallback.  Both give identical
results for the same seed.
"""

from ._backend import BACKEND
from ._rng import stream, substream
from .core import (
    Coloring,
    ColorProfile,
    FormatError,
    StructureReport,
    Vee,
    WalkTrace,
    apply_recolor,
    delta_psi_recolor,
    edge_tables,
    potential,
    read_coloring,
    replay_trace,
    round_robin_coloring,
    structure,
    write_coloring,
)
from .walks import (
    WalkMode,
    WalkOutcome,
    WalkStatus,
    delta_table,
    qualifying_moves,
    run_walk,
    walk_step,
)
from .flips import (
    ClimbResult,
    ClimbStats,
    EscapePlan,
    Reorientation,
    apply_flip,
    balanced_reorientation,
    build_conflict_multigraph,
    plan_escape,
    strict_algorithm,
    weak_algorithm,
)
from .sampling import (
    MetropolisResult,
    RestartResult,
    StationaryResult,
    exact_stationary,
    metropolis_step,
    perturb,
    restart_experiment,
    run_metropolis,
    state_index,
)
from .heuristics import (
    HeuristicRun,
    HeuristicStatus,
    MatchingFamily,
    PartialColoring,
    RowLatinArray,
    ds_run,
    four_switch_run,
    latin_strict_walk,
)
from .analysis import (
    IsoClass,
    IsoClassTable,
    UnionGraph,
    classify_of8,
    count_automorphisms,
    deficit,
    deficit_witness,
    dense_small_set,
    enumerate_ofs,
    fingerprint,
    girth,
    is_ramanujan,
    isomorphism_classes,
    kotzig_perfect,
    load_of8_table,
    moore_bound,
    spectrum,
    union_graph,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "stream",
    "substream",
    "Coloring",
    "ColorProfile",
    "FormatError",
    "StructureReport",
    "Vee",
    "WalkTrace",
    "apply_recolor",
    "delta_psi_recolor",
    "edge_tables",
    "potential",
    "read_coloring",
    "replay_trace",
    "round_robin_coloring",
    "structure",
    "write_coloring",
    "WalkMode",
    "WalkOutcome",
    "WalkStatus",
    "delta_table",
    "qualifying_moves",
    "run_walk",
    "walk_step",
    "ClimbResult",
    "ClimbStats",
    "EscapePlan",
    "Reorientation",
    "apply_flip",
    "balanced_reorientation",
    "build_conflict_multigraph",
    "plan_escape",
    "strict_algorithm",
    "weak_algorithm",
    "MetropolisResult",
    "RestartResult",
    "StationaryResult",
    "exact_stationary",
    "metropolis_step",
    "perturb",
    "restart_experiment",
    "run_metropolis",
    "state_index",
    "HeuristicRun",
    "HeuristicStatus",
    "MatchingFamily",
    "PartialColoring",
    "RowLatinArray",
    "ds_run",
    "four_switch_run",
    "latin_strict_walk",
    "IsoClass",
    "IsoClassTable",
    "UnionGraph",
    "classify_of8",
    "count_automorphisms",
    "deficit",
    "deficit_witness",
    "dense_small_set",
    "enumerate_ofs",
    "fingerprint",
    "girth",
    "is_ramanujan",
    "isomorphism_classes",
    "kotzig_perfect",
    "load_of8_table",
    "moore_bound",
    "spectrum",
    "union_graph",
]
