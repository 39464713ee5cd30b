"""Sequences over a d-letter alphabet with long-range exclusions x[i] != x[i + f(n)].

Subpackages: jump-rule geometry (jumps), sequence generators (genrand),
exhaustive/structural search (search), the exact halting model (model),
Monte Carlo statistics (stats) and the command line (cli).
"""

from .genrand import (
    DEFAULT_SEED,
    GenConfig,
    GenOutcome,
    Status,
    Variant,
    generate,
    generate_lex,
    generate_v20,
    generate_v21,
    validate,
)
from .jumps import (
    DragnetProfile,
    HorizonError,
    JumpFamily,
    JumpRule,
    affine_odd,
    dragnet,
    enumerate_jumps,
    explicit,
    factorial,
    geometric,
    interval_geometry,
    linear,
    make_rule,
    monomial,
    parse_rule,
)
from .model import (
    HaltingModel,
    full_block_prob,
    halting_pmf,
    interval_full_block_prob,
    interval_ratio,
    model_moments,
    multinomial,
    surjection_count,
    tail_bound,
)
from .search import (
    SearchBudget,
    SearchReport,
    divisibility_check,
    exhaustive_one_sided,
    period_detect,
    two_sided_window,
)
from .stats import (
    Histogram,
    ScalingFit,
    TerminalMap,
    compare,
    default_max_len,
    run_sampling,
    run_terminal_map,
    scaling_fit,
    staircase_floor,
)

__version__ = "0.1.0"
