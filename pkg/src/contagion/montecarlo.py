"""Monte Carlo estimate of the systemic risk indicator.

One simulation draws a graph and shocks every bank in turn on it, giving
alpha = sum(theta_n) / N**2. The indicator alpha_bar is the mean of alpha
over m simulations; alpha_bar_n, the mean of theta_n / N, profiles how much
damage each bank's failure does.

Every simulation gets its own generator keyed by (seed, simulation index),
so results do not depend on how the work is split across processes.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .balance_sheets import SystemSnapshot, month_ordinal
from .cascade import ScenarioConfig, run_cascade
from .network import StructureSpec, sample_edges, structure_probabilities

DEFAULT_SIMULATIONS = 2000

# (name, first rank, last rank) with ranks by descending assets, 1-based;
# None closes the last group at N
DEFAULT_SIZE_GROUPS = (
    ("large", 1, 4),
    ("medium", 5, 5),
    ("small", 6, 13),
    ("very small", 14, None),
)


def simulation_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def cell_seed(master_seed: int, month: str, structure: StructureSpec) -> int:
    """Seed for one (month, structure) cell of a sweep.

    Keyed on the calendar month and the structure kind rather than list
    positions, so filtering months or adding structures leaves the other
    cells untouched.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(month_ordinal(month), structure.kind.ordinal))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SimulationPlan:
    snapshot: SystemSnapshot
    structure: StructureSpec
    scenario: ScenarioConfig
    m: int = DEFAULT_SIMULATIONS
    master_seed: int = 0
    keep_alphas: bool = False

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"need at least one simulation, got m={self.m}")


@dataclass
class SimulationResult:
    alpha_bar: float
    alpha_bar_n: np.ndarray
    month: str
    plan: SimulationPlan = field(repr=False)
    alphas: np.ndarray | None = field(default=None, repr=False)

    def standard_error(self) -> float:
        if self.alphas is None:
            raise ValueError("per-simulation alphas were not kept; set keep_alphas=True")
        if len(self.alphas) < 2:
            return math.nan
        return float(np.std(self.alphas, ddof=1) / math.sqrt(len(self.alphas)))


def _simulate_thetas(snapshot, scenario, probabilities, rng) -> np.ndarray:
    graph = sample_edges(probabilities, rng)
    return np.array([run_cascade(snapshot, graph, k, scenario).theta for k in range(snapshot.n)], dtype=np.int64)


def run_simulation(
    snapshot: SystemSnapshot,
    structure: StructureSpec,
    scenario: ScenarioConfig,
    rng: np.random.Generator,
    probabilities: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Draw one graph and run a cascade from every bank.

    Returns alpha and the per-initiator row alpha_n = theta_n / N.
    """
    if probabilities is None:
        probabilities = structure_probabilities(structure, snapshot.assets)
    theta = _simulate_thetas(snapshot, scenario, probabilities, rng)
    n = snapshot.n
    return int(theta.sum()) / (n * n), theta / n


def _run_chunk(plan: SimulationPlan, indices: Sequence[int]) -> np.ndarray:
    p = structure_probabilities(plan.structure, plan.snapshot.assets)
    thetas = np.empty((len(indices), plan.snapshot.n), dtype=np.int64)
    for k, sim in enumerate(indices):
        thetas[k] = _simulate_thetas(plan.snapshot, plan.scenario, p, simulation_rng(plan.master_seed, sim))
    return thetas


def _chunks(m: int, parts: int) -> list[range]:
    bounds = np.linspace(0, m, parts + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]


def run_plan(plan: SimulationPlan, jobs: int = 1) -> SimulationResult:
    """Run the plan's m simulations, optionally over ``jobs`` processes.

    Default counts are summed as integers and divided once, so alpha_bar is
    the correctly rounded value of sum(theta) / (m N^2) however the work is
    split.
    """
    if jobs > 1 and plan.m > 1:
        chunks = _chunks(plan.m, min(jobs * 4, plan.m))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            thetas = np.concatenate(list(pool.map(_run_chunk, [plan] * len(chunks), chunks)))
    else:
        thetas = _run_chunk(plan, range(plan.m))
    m, n = thetas.shape
    return SimulationResult(
        alpha_bar=int(thetas.sum()) / (m * n * n),
        alpha_bar_n=thetas.sum(axis=0) / (m * n),
        month=plan.snapshot.month,
        plan=plan,
        alphas=thetas.sum(axis=1) / (n * n) if plan.keep_alphas else None,
    )


@dataclass(frozen=True)
class SweepCell:
    month: str
    structure: StructureSpec
    seed: int
    alpha_bar: float
    standard_error: float | None = None


def _run_cell(plan: SimulationPlan) -> SimulationResult:
    return run_plan(plan)


def run_time_series(
    snapshots: Sequence[SystemSnapshot],
    structures: Sequence[StructureSpec],
    scenario: ScenarioConfig,
    m: int = DEFAULT_SIMULATIONS,
    master_seed: int = 0,
    jobs: int = 1,
    keep_alphas: bool = False,
) -> list[SweepCell]:
    """alpha_bar for every (month, structure) pair, months outermost."""
    if not snapshots:
        raise ValueError("need at least one monthly snapshot")
    plans = [
        SimulationPlan(snap, st, scenario, m, cell_seed(master_seed, snap.month, st), keep_alphas)
        for snap in snapshots
        for st in structures
    ]
    if jobs > 1 and len(plans) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, plans))
    else:
        results = [run_plan(p, jobs) for p in plans]
    return [
        SweepCell(r.month, p.structure, p.master_seed, r.alpha_bar,
                  r.standard_error() if keep_alphas else None)
        for p, r in zip(plans, results)
    ]


@dataclass
class SizeProfile:
    groups: list[tuple[str, int, int, float]]  # name, first rank, last rank, mean alpha_bar_n
    scatter: list[tuple[float, float]]  # (ln assets, alpha_bar_n)


def resolve_groups(groups, n: int) -> list[tuple[str, int, int]]:
    resolved = []
    expect = 1
    for name, first, last in groups:
        last = n if last is None else last
        if first != expect or last < first or last > n:
            raise ValueError(f"size groups must partition ranks 1..{n}; group {name!r} covers {first}..{last}")
        resolved.append((name, first, last))
        expect = last + 1
    if expect != n + 1:
        raise ValueError(f"size groups cover ranks 1..{expect - 1}, system has {n} banks")
    return resolved


def size_group_profile(result: SimulationResult, groups=DEFAULT_SIZE_GROUPS) -> SizeProfile:
    """Mean alpha_bar_n per asset-rank group, plus (ln assets, alpha_bar_n) pairs."""
    snap = result.plan.snapshot
    abn = result.alpha_bar_n
    out = [
        (name, first, last, float(np.mean(abn[first - 1:last])))
        for name, first, last in resolve_groups(groups, snap.n)
    ]
    scatter = [(math.log(a), float(x)) for a, x in zip(snap.assets, abn)]
    return SizeProfile(out, scatter)
