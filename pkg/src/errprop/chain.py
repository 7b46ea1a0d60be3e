"""Sampling the classical error chain of Haar-averaged noisy circuits.

A state is a length-``n`` uint8 array; bit ``i`` is 1 when qubit ``i`` has been
depolarized. One Markov step covers a mirrored pair of circuit layers: first
every gate pair is propagated (a mixed pair ``(0,1)``/``(1,0)`` becomes
``(1,1)`` with probability 4/5 and ``(0,0)`` otherwise), then each clean bit
flips to 1 with probability ``2p - p**2``. A depth-``D`` circuit is ``D/2``
steps preceded by one independent Bernoulli(``p``) layer.

Random numbers are consumed in a state-independent order (one draw per bit
for noise, one per pair for propagation, ``n - 1`` per nonlocal matching), so
two trajectories sharing a stream are monotonically coupled.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np
from numba import njit

from errprop.errors import ConfigurationError, ValidationError
from errprop.rng import RandomStream, next_uniform, stream_seed

PROPAGATION_PROBABILITY = 4.0 / 5.0

# Trajectories per work unit. Fixed so chunking never depends on thread count.
CHUNK_SIZE = 512


class Arch(str, Enum):
    ONE_D = "1d"
    TWO_D = "2d"
    NONLOCAL = "nl"


_KIND_CODE = {Arch.ONE_D: 0, Arch.TWO_D: 1, Arch.NONLOCAL: 2}


@dataclass(frozen=True)
class ArchitectureSchedule:
    """Gate layout of one architecture on ``n`` qubits with periodic boundaries.

    1D alternates even pairs ``(2i, 2i+1)`` and odd pairs ``(2i+1, 2i+2 mod n)``.
    2D uses a ``side x side`` lattice (qubit ``r*side + c``) and cycles
    horizontal-even, vertical-even, horizontal-odd, vertical-odd. Nonlocal
    draws a fresh uniform perfect matching every step.
    """

    kind: Arch
    n: int
    side: int | None = None
    _pattern: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = Arch(self.kind)
        object.__setattr__(self, "kind", kind)
        n = self.n
        if n < 2:
            raise ConfigurationError(f"need at least 2 qubits, got n={n}")
        if kind is Arch.TWO_D:
            side = math.isqrt(n)
            if side * side != n:
                raise ConfigurationError(f"2D layout needs a perfect-square n, got {n}")
            if side % 2:
                raise ConfigurationError(f"2D layout needs an even lattice side, got {side}")
            if self.side is not None and self.side != side:
                raise ConfigurationError(f"side={self.side} inconsistent with n={n}")
            object.__setattr__(self, "side", side)
        elif n % 2:
            raise ConfigurationError(f"{kind.value} layout needs an even n, got {n}")
        object.__setattr__(self, "_pattern", _build_pattern(kind, n, self.side))

    @classmethod
    def of(cls, arch: str | Arch, n: int) -> ArchitectureSchedule:
        return cls(Arch(arch), n)

    @property
    def period(self) -> int:
        return self._pattern.shape[0]

    @property
    def pattern(self) -> np.ndarray:
        """Deterministic layer pairs, shape ``(period, n // 2, 2)``; unused for nonlocal."""
        return self._pattern

    def layer_pairs(self, step: int, rng: RandomStream | None = None) -> np.ndarray:
        """Pairs acted on at Markov step ``step`` as an ``(n // 2, 2)`` int array."""
        if self.kind is Arch.NONLOCAL:
            if rng is None:
                raise ValueError("nonlocal layers need a random stream")
            pairs = np.empty((self.n // 2, 2), dtype=np.int64)
            _random_matching(np.empty(self.n, dtype=np.int64), pairs, rng.state)
            return pairs
        return self._pattern[step % self.period].copy()


def _build_pattern(kind: Arch, n: int, side: int | None) -> np.ndarray:
    if kind is Arch.ONE_D:
        even = [(2 * i, 2 * i + 1) for i in range(n // 2)]
        odd = [(2 * i + 1, (2 * i + 2) % n) for i in range(n // 2)]
        return np.array([even, odd], dtype=np.int64)
    if kind is Arch.TWO_D:
        L = side
        layers = []
        for horizontal, offset in ((True, 0), (False, 0), (True, 1), (False, 1)):
            pairs = []
            for r in range(L):
                for c in range(L):
                    if horizontal and c % 2 == offset:
                        pairs.append((r * L + c, r * L + (c + 1) % L))
                    elif not horizontal and r % 2 == offset:
                        pairs.append((r * L + c, ((r + 1) % L) * L + c))
            layers.append(pairs)
        return np.array(layers, dtype=np.int64)
    return np.zeros((1, n // 2, 2), dtype=np.int64)


@dataclass(frozen=True)
class NoiseParams:
    """Single-qubit depolarizing probability ``p`` applied after every layer."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0 or math.isnan(self.p):
            raise ConfigurationError(f"p must lie in [0, 1], got {self.p}")

    @property
    def flip_probability(self) -> float:
        """Per-step flip probability of a clean bit (two noise layers per step)."""
        return 2.0 * self.p - self.p * self.p


@dataclass(frozen=True)
class McConfig:
    samples: int
    master_seed: int
    depth: int

    def __post_init__(self):
        if self.samples < 1:
            raise ConfigurationError(f"samples must be positive, got {self.samples}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigurationError("master_seed must be a 64-bit unsigned integer")
        if self.depth < 0 or self.depth % 2:
            raise ConfigurationError(f"depth must be even and nonnegative, got {self.depth}")

    @property
    def steps(self) -> int:
        return self.depth // 2


@dataclass(frozen=True)
class QEstimate:
    q_mean: float
    q_frac: float
    stderr: float
    samples: int
    n: int

    @classmethod
    def from_sums(cls, total: int, total_sq: int, samples: int, n: int) -> QEstimate:
        """Build from exact integer sums of q and q**2 over trajectories."""
        mean = total / samples
        var = (total_sq * samples - total * total) / (samples * samples)
        stderr = math.sqrt(max(var, 0.0) / samples) / n
        return cls(q_mean=mean, q_frac=mean / n, stderr=stderr, samples=samples, n=n)


@dataclass(frozen=True)
class JointClean:
    """Clean-event probabilities for disjoint qubit sets A and B."""

    p_a: float
    p_b: float
    p_ab: float
    se_a: float
    se_b: float
    se_ab: float
    samples: int


# --- jitted kernels -------------------------------------------------------


@njit(cache=True, nogil=True)
def _init_bits(bits, p, state):
    for i in range(bits.shape[0]):
        bits[i] = 1 if next_uniform(state) < p else 0


@njit(cache=True, nogil=True)
def _random_matching(perm, pairs, state):
    n = perm.shape[0]
    for i in range(n):
        perm[i] = i
    for i in range(n - 1, 0, -1):
        j = int(next_uniform(state) * (i + 1))
        if j > i:
            j = i
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    for k in range(n // 2):
        pairs[k, 0] = perm[2 * k]
        pairs[k, 1] = perm[2 * k + 1]


@njit(cache=True, nogil=True)
def _propagate(bits, pairs, state):
    for k in range(pairs.shape[0]):
        a = pairs[k, 0]
        b = pairs[k, 1]
        u = next_uniform(state)
        if bits[a] != bits[b]:
            v = 1 if u < 0.8 else 0
            bits[a] = v
            bits[b] = v


@njit(cache=True, nogil=True)
def _noise(bits, flip, state):
    for i in range(bits.shape[0]):
        if next_uniform(state) < flip:
            bits[i] = 1


@njit(cache=True, nogil=True)
def _step(bits, kind, pattern, flip, step, state, perm, buf):
    if kind == 2:
        _random_matching(perm, buf, state)
        _propagate(bits, buf, state)
    else:
        _propagate(bits, pattern[step % pattern.shape[0]], state)
    _noise(bits, flip, state)


@njit(cache=True, nogil=True)
def _final_states(out, start, master_seed, kind, pattern, p, flip, steps):
    n = out.shape[1]
    state = np.empty(1, dtype=np.uint64)
    perm = np.empty(n, dtype=np.int64)
    buf = np.empty((n // 2, 2), dtype=np.int64)
    for r in range(out.shape[0]):
        state[0] = stream_seed(master_seed, np.uint64(start + r))
        bits = out[r]
        _init_bits(bits, p, state)
        for s in range(steps):
            _step(bits, kind, pattern, flip, s, state, perm, buf)


@njit(cache=True, nogil=True)
def _final_counts(out, start, n, master_seed, kind, pattern, p, flip, steps):
    state = np.empty(1, dtype=np.uint64)
    perm = np.empty(n, dtype=np.int64)
    buf = np.empty((n // 2, 2), dtype=np.int64)
    bits = np.empty(n, dtype=np.uint8)
    for r in range(out.shape[0]):
        state[0] = stream_seed(master_seed, np.uint64(start + r))
        _init_bits(bits, p, state)
        for s in range(steps):
            _step(bits, kind, pattern, flip, s, state, perm, buf)
        c = 0
        for i in range(n):
            c += bits[i]
        out[r] = c


@njit(cache=True, nogil=True)
def _count_profile(out, start, initial, master_seed, kind, pattern, flip):
    # out[r, t] = number of ones after t steps, t = 0..steps
    n = initial.shape[0]
    steps = out.shape[1] - 1
    state = np.empty(1, dtype=np.uint64)
    perm = np.empty(n, dtype=np.int64)
    buf = np.empty((n // 2, 2), dtype=np.int64)
    bits = np.empty(n, dtype=np.uint8)
    for r in range(out.shape[0]):
        state[0] = stream_seed(master_seed, np.uint64(start + r))
        bits[:] = initial
        c = 0
        for i in range(n):
            c += bits[i]
        out[r, 0] = c
        for s in range(steps):
            _step(bits, kind, pattern, flip, s, state, perm, buf)
            c = 0
            for i in range(n):
                c += bits[i]
            out[r, s + 1] = c


# --- parallel driver ------------------------------------------------------


def default_threads() -> int:
    return os.cpu_count() or 1


def _chunks(samples: int) -> list[tuple[int, int]]:
    return [(s, min(s + CHUNK_SIZE, samples)) for s in range(0, samples, CHUNK_SIZE)]


def _run_chunked(work: Callable[[int, int], np.ndarray], samples: int, threads: int | None) -> np.ndarray:
    """Evaluate ``work(start, stop)`` over fixed chunks and concatenate in index order."""
    chunks = _chunks(samples)
    threads = default_threads() if threads is None else threads
    if threads < 1:
        raise ConfigurationError(f"threads must be positive, got {threads}")
    if threads == 1 or len(chunks) == 1:
        parts = [work(a, b) for a, b in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: work(*ab), chunks))
    return np.concatenate(parts, axis=0)


def _kernel_args(schedule: ArchitectureSchedule, params: NoiseParams):
    return _KIND_CODE[schedule.kind], schedule.pattern, float(params.p), float(params.flip_probability)


# --- single-step operations ----------------------------------------------


def init_state(n: int, p: float, rng: RandomStream) -> np.ndarray:
    """Independent Bernoulli(``p``) bits: the first noise layer."""
    NoiseParams(p)
    bits = np.empty(n, dtype=np.uint8)
    _init_bits(bits, float(p), rng.state)
    return bits


def layer_pairs(schedule: ArchitectureSchedule, step: int, rng: RandomStream | None = None) -> np.ndarray:
    return schedule.layer_pairs(step, rng)


def propagate_layer(state: np.ndarray, pairs: np.ndarray, rng: RandomStream) -> np.ndarray:
    """Apply the averaged two-qubit gate transition to every pair of a matching."""
    pairs = np.ascontiguousarray(pairs, dtype=np.int64).reshape(-1, 2)
    flat = pairs.ravel()
    if flat.size != state.shape[0] or np.unique(flat).size != flat.size:
        raise ValidationError("pairs must form a perfect matching of the state's qubits")
    out = np.array(state, dtype=np.uint8, copy=True)
    _propagate(out, pairs, rng.state)
    return out


def noise_layer(state: np.ndarray, params: NoiseParams, rng: RandomStream) -> np.ndarray:
    out = np.array(state, dtype=np.uint8, copy=True)
    _noise(out, float(params.flip_probability), rng.state)
    return out


def evolve(
    state: np.ndarray,
    schedule: ArchitectureSchedule,
    params: NoiseParams,
    steps: int,
    rng: RandomStream,
    first_step: int = 0,
) -> np.ndarray:
    """Run ``steps`` Markov steps (propagate, then noise) from ``state``."""
    if state.shape[0] != schedule.n:
        raise ValidationError(f"state has {state.shape[0]} bits, schedule expects {schedule.n}")
    bits = np.array(state, dtype=np.uint8, copy=True)
    kind, pattern, _, flip = _kernel_args(schedule, params)
    perm = np.empty(schedule.n, dtype=np.int64)
    buf = np.empty((schedule.n // 2, 2), dtype=np.int64)
    for s in range(first_step, first_step + steps):
        _step(bits, kind, pattern, flip, s, rng.state, perm, buf)
    return bits


def run_trajectory(
    schedule: ArchitectureSchedule, params: NoiseParams, config: McConfig, trajectory_index: int
) -> np.ndarray:
    """Final error state of one trajectory; identical to its row in any batch."""
    out = np.empty((1, schedule.n), dtype=np.uint8)
    kind, pattern, p, flip = _kernel_args(schedule, params)
    _final_states(out, trajectory_index, np.uint64(config.master_seed), kind, pattern, p, flip, config.steps)
    return out[0]


# --- estimators -----------------------------------------------------------


def sample_final_states(
    schedule: ArchitectureSchedule,
    params: NoiseParams,
    config: McConfig,
    threads: int | None = None,
) -> np.ndarray:
    """Final states of trajectories ``0 .. samples-1``, shape ``(samples, n)``."""
    kind, pattern, p, flip = _kernel_args(schedule, params)
    seed = np.uint64(config.master_seed)

    def work(a: int, b: int) -> np.ndarray:
        out = np.empty((b - a, schedule.n), dtype=np.uint8)
        _final_states(out, a, seed, kind, pattern, p, flip, config.steps)
        return out

    return _run_chunked(work, config.samples, threads)


def sample_counts(
    schedule: ArchitectureSchedule,
    params: NoiseParams,
    config: McConfig,
    threads: int | None = None,
) -> np.ndarray:
    """Number of depolarized qubits at the output of each trajectory."""
    kind, pattern, p, flip = _kernel_args(schedule, params)
    seed = np.uint64(config.master_seed)

    def work(a: int, b: int) -> np.ndarray:
        out = np.empty(b - a, dtype=np.int64)
        _final_counts(out, a, schedule.n, seed, kind, pattern, p, flip, config.steps)
        return out

    return _run_chunked(work, config.samples, threads)


def estimate_q(
    schedule: ArchitectureSchedule,
    params: NoiseParams,
    config: McConfig,
    threads: int | None = None,
) -> QEstimate:
    counts = sample_counts(schedule, params, config, threads)
    total = int(counts.sum())
    total_sq = int(np.dot(counts, counts))
    return QEstimate.from_sums(total, total_sq, config.samples, schedule.n)


def _clean_probability(clean: np.ndarray) -> tuple[float, float]:
    k = int(clean.sum())
    m = clean.shape[0]
    prob = k / m
    return prob, math.sqrt(prob * (1.0 - prob) / m)


def clean_indicators(states: np.ndarray, subset: Iterable[int]) -> np.ndarray:
    """Per-trajectory indicator that every qubit in ``subset`` is clean."""
    idx = np.fromiter(subset, dtype=np.int64)
    if idx.size == 0:
        return np.ones(states.shape[0], dtype=bool)
    return ~states[:, idx].any(axis=1)


def joint_clean_from_states(states: np.ndarray, A: Sequence[int], B: Sequence[int]) -> JointClean:
    set_a, set_b = set(A), set(B)
    if set_a & set_b:
        raise ValidationError(f"subsets overlap on {sorted(set_a & set_b)}")
    n = states.shape[1]
    if any(not 0 <= i < n for i in set_a | set_b):
        raise ValidationError(f"subset indices must lie in [0, {n})")
    ca = clean_indicators(states, sorted(set_a))
    cb = clean_indicators(states, sorted(set_b))
    pa, sa = _clean_probability(ca)
    pb, sb = _clean_probability(cb)
    pab, sab = _clean_probability(ca & cb)
    return JointClean(pa, pb, pab, sa, sb, sab, states.shape[0])


def estimate_joint_clean(
    schedule: ArchitectureSchedule,
    params: NoiseParams,
    config: McConfig,
    A: Sequence[int],
    B: Sequence[int],
    threads: int | None = None,
) -> JointClean:
    """Estimate P(Q_A = 0), P(Q_B = 0) and P(Q_{A u B} = 0) from shared trajectories."""
    if set(A) & set(B):
        raise ValidationError(f"subsets overlap on {sorted(set(A) & set(B))}")
    states = sample_final_states(schedule, params, config, threads)
    return joint_clean_from_states(states, A, B)


def count_profile(
    schedule: ArchitectureSchedule,
    params: NoiseParams,
    initial: np.ndarray,
    steps: int,
    samples: int,
    master_seed: int = 0,
    threads: int | None = None,
) -> np.ndarray:
    """Per-trajectory ones count after each of ``0..steps`` steps from a fixed start.

    Returns an int array of shape ``(samples, steps + 1)``.
    """
    initial = np.ascontiguousarray(initial, dtype=np.uint8)
    if initial.shape != (schedule.n,):
        raise ValidationError(f"initial state must have shape ({schedule.n},)")
    kind, pattern, _, flip = _kernel_args(schedule, params)
    seed = np.uint64(master_seed)

    def work(a: int, b: int) -> np.ndarray:
        out = np.empty((b - a, steps + 1), dtype=np.int64)
        _count_profile(out, a, initial, seed, kind, pattern, flip)
        return out

    return _run_chunked(work, samples, threads)


def single_error_spread(
    n: int, steps: int, samples: int, master_seed: int = 0, site: int | None = None, threads: int | None = None
) -> np.ndarray:
    """Mean number of depolarized qubits per step after a single seeded error.

    1D layout, no further noise. Index ``t`` of the result is the mean after
    ``t`` steps.
    """
    schedule = ArchitectureSchedule(Arch.ONE_D, n)
    initial = np.zeros(n, dtype=np.uint8)
    initial[n // 2 if site is None else site] = 1
    profile = count_profile(schedule, NoiseParams(0.0), initial, steps, samples, master_seed, threads)
    return profile.mean(axis=0)
