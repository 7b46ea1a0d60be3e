"""Max-Cut instances, exact small-instance solver and noise-limited bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from errprop.chain import ArchitectureSchedule, McConfig, NoiseParams, sample_final_states
from errprop.errors import ScopeError, ValidationError

# Best known classical approximation ratios used as baselines.
CUBIC_GRAPH_RATIO = 0.9326
GOEMANS_WILLIAMSON_RATIO = 0.878

BRUTE_FORCE_LIMIT = 24


class GraphClass(str, Enum):
    DEG3 = "deg3"
    BIPARTITE_DEG3 = "bipartite_deg3"

    @classmethod
    def parse(cls, value: str | GraphClass) -> GraphClass:
        if isinstance(value, GraphClass):
            return value
        return cls(value.replace("-", "_"))


@dataclass(frozen=True)
class Graph:
    """Undirected graph with nonnegative edge weights and no self-loops."""

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]
    _index: np.ndarray = field(init=False, repr=False, compare=False)
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __init__(self, n_vertices: int, edges: Iterable[Sequence]):
        normalized = []
        seen = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if i == j:
                raise ValidationError(f"self-loop on vertex {i}")
            if w < 0 or math.isnan(w):
                raise ValidationError(f"negative weight {w} on edge ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
            normalized.append((i, j, w))
        if normalized:
            top = max(max(i, j) for i, j, _ in normalized)
            if min(min(i, j) for i, j, _ in normalized) < 0:
                raise ValidationError("vertex indices must be nonnegative")
            if top >= n_vertices:
                raise ValidationError(f"edge endpoint {top} outside {n_vertices} vertices")
        object.__setattr__(self, "n_vertices", int(n_vertices))
        object.__setattr__(self, "edges", tuple(normalized))
        object.__setattr__(self, "_index", np.array([(i, j) for i, j, _ in normalized], dtype=np.int64).reshape(-1, 2))
        object.__setattr__(self, "_weights", np.array([w for _, _, w in normalized], dtype=float))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> float:
        return float(self._weights.sum())

    @property
    def max_degree(self) -> int:
        if not self.edges:
            return 0
        return int(np.bincount(self._index.ravel(), minlength=self.n_vertices).max())

    def is_unweighted(self) -> bool:
        return bool(np.all(self._weights == 1.0))

    @classmethod
    def ring(cls, n: int) -> Graph:
        return cls(n, [(i, (i + 1) % n) for i in range(n)])


def load_graph(path: str | Path) -> Graph:
    """Read an edge list: one ``i j [w]`` per line; ``#`` starts a comment.

    The vertex count is one more than the largest index seen.
    """
    edges = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValidationError(f"line {lineno}: expected 'i j [w]', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ValidationError(f"line {lineno}: cannot parse {raw!r}") from None
        if i < 0 or j < 0:
            raise ValidationError(f"line {lineno}: vertex indices must be nonnegative")
        if i == j:
            raise ValidationError(f"line {lineno}: self-loop on vertex {i}")
        if w < 0:
            raise ValidationError(f"line {lineno}: negative weight {w}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValidationError(f"line {lineno}: duplicate edge {key} (first on line {seen[key]})")
        seen[key] = lineno
        edges.append((i, j, w))
    n = 1 + max((max(i, j) for i, j, _ in edges), default=-1)
    return Graph(n, edges)


@dataclass(frozen=True)
class CutSolution:
    assignment: tuple[int, ...]  # entries in {-1, +1}
    value: float
    cut_edges: tuple[int, ...]  # indices into Graph.edges

    @classmethod
    def from_assignment(cls, g: Graph, assignment: Sequence[int]) -> CutSolution:
        z = np.asarray(assignment)
        if z.shape != (g.n_vertices,) or not np.all(np.abs(z) == 1):
            raise ValidationError("assignment must hold one +1/-1 entry per vertex")
        if not g.edges:
            return cls(tuple(int(v) for v in z), 0.0, ())
        cut = z[g._index[:, 0]] != z[g._index[:, 1]]
        value = float(np.dot(g._weights, cut))
        return cls(tuple(int(v) for v in z), value, tuple(int(k) for k in np.flatnonzero(cut)))


def cut_value(g: Graph, assignment: Sequence[int]) -> float:
    """``sum_ij a_ij (1 - Z_i Z_j) / 2``."""
    z = np.asarray(assignment, dtype=float)
    if not g.edges:
        return 0.0
    return float(np.dot(g._weights, (1.0 - z[g._index[:, 0]] * z[g._index[:, 1]]) / 2.0))


def brute_force_maxcut(g: Graph, chunk: int = 1 << 16) -> CutSolution:
    """Exact Max-Cut by enumeration with vertex 0 pinned to +1.

    Assignments are enumerated as bit strings with vertex 0 as the most
    significant bit (bit 1 means ``Z = -1``); ties go to the smallest string.
    """
    n = g.n_vertices
    if n > BRUTE_FORCE_LIMIT:
        raise ScopeError(f"brute force supports at most {BRUTE_FORCE_LIMIT} vertices, got {n}")
    if n <= 1 or not g.edges:
        return CutSolution.from_assignment(g, [1] * n)
    shifts_i = (n - 1 - g._index[:, 0]).astype(np.int64)
    shifts_j = (n - 1 - g._index[:, 1]).astype(np.int64)
    best_value, best_code = -1.0, 0
    total = 1 << (n - 1)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        differ = ((codes[:, None] >> shifts_i) ^ (codes[:, None] >> shifts_j)) & 1
        values = differ @ g._weights
        k = int(np.argmax(values))
        if values[k] > best_value:
            best_value, best_code = float(values[k]), int(codes[k])
    assignment = [-1 if (best_code >> (n - 1 - v)) & 1 else 1 for v in range(n)]
    return CutSolution.from_assignment(g, assignment)


def cut_average(g: Graph) -> float:
    """Expected cut of a uniformly random assignment: half the total weight."""
    return g.total_weight / 2.0


def energy_upper_bound(c_max: float, c_avg: float, q_frac: float) -> float:
    """Largest average cut compatible with a depolarized fraction ``q_frac``.

    ``(1-q)(2-q) c_max / 2 + (1 - (1-q)^2) c_avg``.
    """
    if not 0.0 <= q_frac <= 1.0:
        raise ValidationError(f"q_frac must lie in [0, 1], got {q_frac}")
    if c_avg > c_max:
        raise ValidationError(f"c_avg={c_avg} exceeds c_max={c_max}")
    r = 1.0 - q_frac
    return 0.5 * r * (1.0 + r) * c_max + (1.0 - r * r) * c_avg


def approx_ratio_bound(q_frac: float, graph_class: str | GraphClass = GraphClass.DEG3) -> float:
    """Upper bound on the approximation ratio for unweighted degree-3 graphs.

    General graphs use ``c_max >= 2|E|/3``, giving ``1 - (q/2)^2``; bipartite
    graphs have ``c_max = |E|``, giving ``1 - q/2``.
    """
    if not 0.0 <= q_frac <= 1.0:
        raise ValidationError(f"q_frac must lie in [0, 1], got {q_frac}")
    if GraphClass.parse(graph_class) is GraphClass.DEG3:
        return 1.0 - (q_frac / 2.0) ** 2
    return 1.0 - q_frac / 2.0


def classical_superiority_threshold(
    graph_class: str | GraphClass = GraphClass.DEG3, classical_ratio: float = CUBIC_GRAPH_RATIO
) -> float:
    """Depolarized fraction beyond which ``classical_ratio`` beats the noisy circuit."""
    if not 0.0 < classical_ratio < 1.0:
        raise ValidationError(f"classical ratio must lie in (0, 1), got {classical_ratio}")
    if GraphClass.parse(graph_class) is GraphClass.DEG3:
        return 2.0 * math.sqrt(1.0 - classical_ratio)
    return 2.0 * (1.0 - classical_ratio)


def expected_cut_given_errors(g: Graph, sol: CutSolution, errors: np.ndarray) -> float | np.ndarray:
    """Average cut when depolarized vertices are replaced by fair coins.

    ``errors`` may be one state of length ``n`` or a ``(samples, n)`` batch.
    An edge keeps its solution contribution only if both ends are clean;
    otherwise it contributes half its weight.
    """
    errors = np.asarray(errors)
    if errors.shape[-1] != g.n_vertices:
        raise ValidationError(f"error state has {errors.shape[-1]} bits, graph has {g.n_vertices} vertices")
    if not g.edges:
        return 0.0 if errors.ndim == 1 else np.zeros(errors.shape[0])
    in_cut = np.zeros(g.edge_count, dtype=float)
    in_cut[list(sol.cut_edges)] = 1.0
    dirty = (errors[..., g._index[:, 0]] | errors[..., g._index[:, 1]]).astype(bool)
    contrib = np.where(dirty, 0.5, in_cut) * g._weights
    out = contrib.sum(axis=-1)
    return float(out) if errors.ndim == 1 else out


@dataclass(frozen=True)
class AzumaBound:
    probability: float  # min(raw, 1)
    raw: float
    exact_constant: bool  # False where the proof only fixes the constant up to O(1)


def azuma_bound(alpha: float, edge_count: int, delta: int, depth: int, dim: int = 1) -> AzumaBound:
    """Tail bound on ``P(|C - <C>| >= alpha |E|)`` for shallow local circuits.

    ``2 exp(-alpha^2 |E| / (2 Delta^2 D^(2k)))``. For ``k = 2`` the implicit
    constant of the increment bound is taken as 1.
    """
    if dim not in (1, 2):
        raise ValidationError(f"dimension must be 1 or 2, got {dim}")
    if not 0.0 < alpha <= 1.0:
        raise ValidationError(f"alpha must lie in (0, 1], got {alpha}")
    if edge_count < 1 or delta < 1 or depth < 1:
        raise ValidationError("edge count, degree and depth must be positive")
    raw = 2.0 * math.exp(-(alpha**2) * edge_count / (2.0 * delta**2 * float(depth) ** (2 * dim)))
    return AzumaBound(probability=min(raw, 1.0), raw=raw, exact_constant=dim == 1)


@dataclass(frozen=True)
class CutStatistics:
    values: np.ndarray = field(repr=False)  # expected cut per trajectory
    mean: float
    stderr: float
    q_frac: float
    q_stderr: float
    quantiles: dict[float, float]  # of |C - mean|

    def tail_frequency(self, threshold: float) -> float:
        """Fraction of trajectories with ``|C - mean| >= threshold``."""
        return float(np.mean(np.abs(self.values - self.mean) >= threshold))


def empirical_cut_statistics(
    g: Graph,
    sol: CutSolution,
    schedule: ArchitectureSchedule,
    params: NoiseParams,
    config: McConfig,
    threads: int | None = None,
    levels: Sequence[float] = (0.5, 0.9, 0.99),
) -> CutStatistics:
    """Sample trajectories and evaluate the expected cut of each one."""
    if g.n_vertices != schedule.n:
        raise ValidationError(f"graph has {g.n_vertices} vertices but the schedule has {schedule.n} qubits")
    states = sample_final_states(schedule, params, config, threads)
    values = expected_cut_given_errors(g, sol, states)
    m = values.shape[0]
    counts = states.sum(axis=1, dtype=np.int64)
    q = counts / schedule.n
    dev = np.abs(values - values.mean())
    return CutStatistics(
        values=values,
        mean=float(values.mean()),
        stderr=float(values.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0,
        q_frac=float(q.mean()),
        q_stderr=float(q.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0,
        quantiles={float(a): float(np.quantile(dev, a)) for a in levels},
    )
