"""Random directed networks of trust deterioration.

An edge i -> j means the market sees bank i as exposed to the same trouble
as bank j, so when j fails, i suffers according to its shortest distance to
j. Edge probabilities depend on relative asset sizes through one of six
structures and are rescaled to a common average probability so the
structures can be compared at equal interconnectedness.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

import numpy as np


class Structure(str, enum.Enum):
    ERDOS_RENYI = "ErdosRenyi"
    FLIGHT_TO_QUALITY = "FlightToQuality"
    DISASSORTATIVE = "Disassortative"
    ASSORTATIVE = "Assortative"
    TIERED_I = "TieredI"
    TIERED_II = "TieredII"

    @classmethod
    def parse(cls, name: "str | Structure") -> "Structure":
        if isinstance(name, cls):
            return name
        key = re.sub(r"[^a-z0-9]", "", str(name).lower())
        aliases = {"er": "erdosrenyi", "ftq": "flighttoquality", "tiered1": "tieredi", "tiered2": "tieredii"}
        key = aliases.get(key, key)
        for s in cls:
            if s.value.lower() == key:
                return s
        raise ValueError(f"unknown network structure {name!r}; choose from {[s.value for s in cls]}")

    @property
    def ordinal(self) -> int:
        return list(Structure).index(self)


@dataclass(frozen=True)
class StructureSpec:
    kind: Structure
    target_p_bar: float
    base_p: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", Structure.parse(self.kind))
        if not 0 < self.target_p_bar <= 1:
            raise ValueError(f"target_p_bar must lie in (0, 1], got {self.target_p_bar}")
        if not 0 <= self.base_p <= 1:
            raise ValueError(f"base_p must lie in [0, 1], got {self.base_p}")

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class DirectedGraph:
    adjacency: np.ndarray  # bool, adjacency[i, j] is the edge i -> j

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if a.diagonal().any():
            raise ValueError("self-edges are not allowed")
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges) -> "DirectedGraph":
        a = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            a[i, j] = True
        return cls(a)

    @classmethod
    def complete(cls, n: int) -> "DirectedGraph":
        return cls(~np.eye(n, dtype=bool))

    def edges(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in zip(*np.nonzero(self.adjacency))}

    def __len__(self):
        return int(self.adjacency.sum())


def check_probability_matrix(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("probability matrix must be square")
    if np.any(np.diagonal(p) != 0):
        raise ValueError("probability matrix must have a zero diagonal")
    if not np.all((p >= 0) & (p <= 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    return p


def _off_diagonal_max(m: np.ndarray) -> float:
    mask = ~np.eye(m.shape[0], dtype=bool)
    return float(m[mask].max())


def raw_probabilities(kind: Structure | str, assets, base_p: float = 0.5) -> np.ndarray:
    """Edge probabilities p(i, j) for one of the six structures, before scaling."""
    kind = Structure.parse(kind)
    a = np.asarray(assets, dtype=float)
    n = a.shape[0]
    if a.ndim != 1 or n < 2:
        raise ValueError("need a 1-d vector of at least 2 asset values")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise ValueError("asset values must be finite and positive")

    ai, aj = a[:, None], a[None, :]
    if kind is Structure.ERDOS_RENYI:
        if not 0 <= base_p <= 1:
            raise ValueError(f"base_p must lie in [0, 1], got {base_p}")
        p = np.full((n, n), float(base_p))
    elif kind is Structure.FLIGHT_TO_QUALITY:
        p = np.broadcast_to(a / a.max(), (n, n)).copy()
    elif kind is Structure.DISASSORTATIVE:
        ratio = np.maximum(ai / aj, aj / ai)
        p = ratio / _off_diagonal_max(ratio)
    elif kind is Structure.ASSORTATIVE:
        p = np.minimum(ai, aj) / np.maximum(ai, aj)
    elif kind is Structure.TIERED_I:
        pair = ai + aj
        p = pair / _off_diagonal_max(pair)
    else:
        p = (ai + aj + np.maximum(ai - aj, 0.0)) / (3 * a.max())
    np.fill_diagonal(p, 0.0)
    return p


def average_probability(p: np.ndarray) -> float:
    """Mean of the N(N-1) off-diagonal entries."""
    p = check_probability_matrix(p)
    n = p.shape[0]
    return math.fsum(p[~np.eye(n, dtype=bool)]) / (n * (n - 1))


def scale_probabilities(p: np.ndarray, target_p_bar: float) -> np.ndarray:
    """Rescale ``p`` so its off-diagonal mean is ``target_p_bar``.

    Scaling down is proportional. Scaling up shrinks the distance to one
    proportionally instead, which keeps every entry inside [0, 1]; an
    all-zero matrix therefore becomes uniform at the target.
    """
    if not 0 < target_p_bar <= 1:
        raise ValueError(f"target_p_bar must lie in (0, 1], got {target_p_bar}")
    p0 = average_probability(p)
    p = np.asarray(p, dtype=float)
    if p0 > target_p_bar:
        out = p * (target_p_bar / p0)
    elif p0 < target_p_bar:
        out = 1.0 - (1.0 - p) * ((1.0 - target_p_bar) / (1.0 - p0))
    else:
        out = p.copy()
    np.clip(out, 0.0, 1.0, out=out)
    np.fill_diagonal(out, 0.0)
    return out


def structure_probabilities(spec: StructureSpec, assets) -> np.ndarray:
    return scale_probabilities(raw_probabilities(spec.kind, assets, spec.base_p), spec.target_p_bar)


def sample_edges(p: np.ndarray, rng: np.random.Generator) -> DirectedGraph:
    """Draw each ordered pair i != j independently with probability p(i, j).

    One uniform is drawn per matrix cell in row-major order, diagonal
    included, so a seed fixes the graph.
    """
    p = np.asarray(p, dtype=float)
    adj = rng.random(p.shape) < p
    np.fill_diagonal(adj, False)
    return DirectedGraph(adj)


def shortest_distances_to(graph: DirectedGraph, target: int, alive) -> np.ndarray:
    """Directed hop distance d(i, target) for every node i.

    Paths may only pass through nodes in ``alive`` (a bool mask or an
    iterable of indices); the target itself need not be alive. Nodes that
    cannot reach the target, or are not alive, get ``inf``.
    """
    n = graph.n
    allowed = np.zeros(n, dtype=bool)
    if isinstance(alive, np.ndarray) and alive.dtype == bool:
        allowed |= alive
    else:
        allowed[list(alive)] = True
    allowed[target] = False

    dist = np.full(n, np.inf)
    dist[target] = 0.0
    adj = graph.adjacency
    frontier = np.zeros(n, dtype=bool)
    frontier[target] = True
    level = 0
    # level-synchronous BFS over reversed edges
    while True:
        level += 1
        nxt = adj[:, frontier].any(axis=1) & allowed
        if not nxt.any():
            break
        dist[nxt] = level
        allowed &= ~nxt
        frontier = nxt
    return dist
