"""Systemic risk from default cascades on random networks of trust deterioration."""

__version__ = "0.1.0"

from .balance_sheets import (
    BankBalanceSheet,
    Cet1Series,
    DataError,
    RawLineItems,
    SystemSnapshot,
    build_system_snapshot,
    categorize_line_items,
    compute_cet1_ratio,
    estimate_cet1_series,
)
from .cascade import SCENARIOS, ScenarioConfig, run_cascade
from .montecarlo import SimulationPlan, SimulationResult, run_plan, run_time_series, size_group_profile
from .network import (
    DirectedGraph,
    Structure,
    StructureSpec,
    average_probability,
    raw_probabilities,
    sample_edges,
    scale_probabilities,
    shortest_distances_to,
)
