"""One default cascade started by an initial shock to a single bank.

Each round, every bank that failed in the previous round inflicts three
losses on the survivors, all measured on the start-of-round balance sheets:

* recapitalisation: a share ``u`` of the failed banks' shortfall, levied in
  proportion to total assets;
* liquidity: each bucket marked down by ``exp(-g)`` per failure;
* proximity: every bucket marked down by ``exp(-delta / d)``, with ``d`` the
  directed distance to the failed bank.

The three losses are added and taken off capital. A survivor whose round
loss reaches its start-of-round capital fails, and the next round begins.

Arithmetic is fixed so results are reproducible bit for bit: sums over banks
use ``math.fsum``, exponentials use ``math.exp``, and several failures in one
round are handled in ascending bank order (liquidity factors compound as
``exp(-k g)``, proximity factors as ``exp(-delta * sum(1/d))``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .balance_sheets import SystemSnapshot
from .network import DirectedGraph, shortest_distances_to


@dataclass(frozen=True)
class ScenarioConfig:
    s: float = 0.4
    u: float = 0.3
    g_s: float = 0.015
    g_m: float = 0.015
    g_l: float = 0.015
    delta: float = 0.015

    def __post_init__(self):
        for name in ("s", "u", "g_s", "g_m", "g_l", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0 < self.s <= 1:
            raise ValueError(f"shock fraction s must lie in (0, 1], got {self.s}")
        if not 0 <= self.u <= 1:
            raise ValueError(f"recapitalisation share u must lie in [0, 1], got {self.u}")
        if min(self.g_s, self.g_m, self.g_l, self.delta) < 0:
            raise ValueError("liquidity and proximity parameters must be >= 0")

    @property
    def g(self) -> tuple[float, float, float]:
        return (self.g_s, self.g_m, self.g_l)

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("s", "u", "g_s", "g_m", "g_l", "delta")}


# named parameter sets from the South African study
SCENARIOS = {
    "low_risk": ScenarioConfig(g_s=0.01, g_m=0.01, g_l=0.02, delta=0.01),
    "high_risk": ScenarioConfig(g_s=0.015, g_m=0.015, g_l=0.03, delta=0.015),
    "base": ScenarioConfig(),
    "base_short": ScenarioConfig(g_s=0.03),
    "base_medium": ScenarioConfig(g_m=0.03),
    "base_long": ScenarioConfig(g_l=0.03),
    "base_proximity": ScenarioConfig(delta=0.025),
}


@dataclass
class CascadeState:
    alive: np.ndarray
    capital: np.ndarray
    buckets: np.ndarray
    defaulted: list[tuple[int, int]] = field(default_factory=list)
    round: int = 0
    shortfall: dict[int, float] = field(default_factory=dict)

    @classmethod
    def from_snapshot(cls, snapshot: SystemSnapshot) -> "CascadeState":
        return cls(
            alive=np.ones(snapshot.n, dtype=bool),
            capital=snapshot.capital.copy(),
            buckets=snapshot.buckets.copy(),
        )

    @property
    def n(self) -> int:
        return self.alive.shape[0]

    def total_assets(self) -> np.ndarray:
        B = self.buckets
        return (B[:, 0] + B[:, 1]) + B[:, 2]


@dataclass(frozen=True)
class TraceRow:
    round: int
    bank: int
    loss_recap: float
    loss_liquidity: float
    loss_proximity: float
    capital_after: float
    defaulted: bool


@dataclass
class CascadeResult:
    theta: int
    alpha: float
    rounds: int
    defaulted: list[tuple[int, int]]
    trace: list[TraceRow] | None = None


def apply_initial_shock(state: CascadeState, n: int, s: float) -> tuple[CascadeState, bool]:
    """Bank ``n`` loses ``s`` of its assets; it fails once the loss reaches its capital."""
    if not state.alive[n]:
        raise ValueError(f"bank {n} is not alive")
    B = state.buckets[n]
    loss = s * ((B[0] + B[1]) + B[2])
    c = state.capital[n]
    state.capital[n] = c - loss
    if loss >= c:
        state.alive[n] = False
        state.defaulted.append((n, state.round))
        state.shortfall[n] = loss - c
        return state, True
    state.buckets[n] = B * (1.0 - s)
    return state, False


def recap_losses(shortfall: float, u: float, assets: np.ndarray, alive: np.ndarray) -> np.ndarray:
    """Spread ``u * shortfall`` over the alive banks pro rata to total assets."""
    loss = np.zeros_like(assets)
    total = math.fsum(assets[alive])
    if total > 0:
        loss[alive] = (u * shortfall) * assets[alive] / total
    return loss


def _liquidity_factors(g, failures: int) -> list[float]:
    return [math.exp(-(failures * x)) for x in g]


def liquidity_losses(buckets: np.ndarray, g, failures: int = 1) -> np.ndarray:
    """Value lost when each bucket is marked down by ``exp(-g)`` once per failure."""
    f = _liquidity_factors(g, failures)
    return (buckets[:, 0] * (1.0 - f[0]) + buckets[:, 1] * (1.0 - f[1])) + buckets[:, 2] * (1.0 - f[2])


def _proximity_factors(inverse_distance: np.ndarray, delta: float) -> np.ndarray:
    return np.array([math.exp(-(delta * x)) for x in inverse_distance.tolist()])


def _inverse_distance_sum(distances: np.ndarray, alive: np.ndarray) -> np.ndarray:
    inv = np.zeros(distances.shape[1])
    for row in distances:
        if np.any(row[alive] == 0):
            raise ValueError("surviving bank at distance 0 from a failed bank")
        inv[alive] += 1.0 / row[alive]
    return inv


def proximity_losses(buckets: np.ndarray, distances: np.ndarray, delta: float, alive=None) -> np.ndarray:
    """Loss from shrinking all buckets by ``exp(-delta / d)``.

    ``distances`` is one distance vector, or a stack of them (one row per
    failed bank), in which case the reciprocals are summed. Infinite
    distance means no loss. Banks outside ``alive`` (by default those at
    distance 0, i.e. the failed banks) take no loss.
    """
    d = np.atleast_2d(np.asarray(distances, dtype=float))
    if alive is None:
        alive = np.all(d > 0, axis=0)
    inv = _inverse_distance_sum(d, alive)
    assets = (buckets[:, 0] + buckets[:, 1]) + buckets[:, 2]
    loss = assets * (1.0 - _proximity_factors(inv, delta))
    loss[~alive] = 0.0
    return loss


def _round(state: CascadeState, failed: list[int], graph: DirectedGraph, cfg: ScenarioConfig, trace):
    failed = sorted(failed)
    state.round += 1
    alive = state.alive.copy()
    B = state.buckets
    a = state.total_assets()

    short_total = math.fsum(state.shortfall[d] for d in failed)
    l1 = recap_losses(short_total, cfg.u, a, alive)

    f = _liquidity_factors(cfg.g, len(failed))
    l2 = liquidity_losses(B, cfg.g, len(failed))

    if cfg.delta > 0:
        dist = np.array([shortest_distances_to(graph, d, alive) for d in failed])
        q = _proximity_factors(_inverse_distance_sum(dist, alive), cfg.delta)
    else:
        q = np.ones(state.n)
    l3 = a * (1.0 - q)

    loss = (l1 + l2) + l3
    loss[~alive] = 0.0
    start = state.capital.copy()
    state.capital[alive] = start[alive] - loss[alive]

    share = np.divide(l1, a, out=np.zeros_like(a), where=a > 0)
    factors = ((np.array(f)[None, :] + q[:, None]) - 1.0) - share[:, None]
    state.buckets[alive] = np.maximum(B[alive] * factors[alive], 0.0)

    newly = np.flatnonzero(alive & (loss >= start))
    for i in newly.tolist():
        state.alive[i] = False
        state.defaulted.append((i, state.round))
        state.shortfall[i] = loss[i] - start[i]

    if trace is not None:
        hit = set(newly.tolist())
        for i in np.flatnonzero(alive).tolist():
            if l1[i] == 0 and l2[i] == 0 and l3[i] == 0:
                continue
            trace.append(TraceRow(state.round, i, float(l1[i]), float(l2[i]), float(l3[i]),
                                  float(state.capital[i]), i in hit))
    return newly.tolist()


def run_cascade(
    snapshot: SystemSnapshot,
    graph: DirectedGraph,
    n: int,
    config: ScenarioConfig,
    trace: bool = False,
) -> CascadeResult:
    """Shock bank ``n`` and run rounds until nobody else fails.

    theta counts every failed bank including ``n``; if ``n`` survives its
    own shock the cascade never starts and theta is 0.
    """
    if graph.n != snapshot.n:
        raise ValueError(f"graph has {graph.n} nodes, snapshot has {snapshot.n} banks")
    state = CascadeState.from_snapshot(snapshot)
    rows = [] if trace else None
    _, failed = apply_initial_shock(state, n, config.s)
    if rows is not None:
        rows.append(TraceRow(0, int(n), 0.0, 0.0, 0.0, float(state.capital[n]), failed))
    if failed:
        wave = [n]
        while wave and state.alive.any():
            wave = _round(state, wave, graph, config, rows)
    theta = len(state.defaulted)
    return CascadeResult(theta, theta / snapshot.n, state.round, list(state.defaulted), rows)
