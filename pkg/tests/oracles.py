"""Independent reference computations used by the tests.

Nothing here calls the sampling kernels: distributions are evolved exactly
over all 2^n bit strings, matchings are enumerated, and the ones chain is
simulated with numpy's own generator.
"""

from __future__ import annotations

import itertools

import numpy as np

# pair transition on (a, b) indexed 2a + b; column-stochastic: new = T @ old
PAIR_TRANSITION = np.array(
    [
        [1.0, 0.2, 0.2, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.8, 0.8, 1.0],
    ]
)


def product_distribution(n: int, p: float) -> np.ndarray:
    """Tensor of shape ``(2,) * n`` for independent Bernoulli(p) bits."""
    one = np.array([1.0 - p, p])
    dist = np.ones(())
    for _ in range(n):
        dist = np.multiply.outer(dist, one)
    return dist


def apply_pair(dist: np.ndarray, i: int, j: int) -> np.ndarray:
    n = dist.ndim
    moved = np.moveaxis(dist, (i, j), (0, 1)).reshape(4, -1)
    out = (PAIR_TRANSITION @ moved).reshape((2, 2) + (2,) * (n - 2))
    return np.moveaxis(out, (0, 1), (i, j))


def apply_noise(dist: np.ndarray, flip: float) -> np.ndarray:
    T = np.array([[1.0 - flip, 0.0], [flip, 1.0]])
    for axis in range(dist.ndim):
        dist = np.moveaxis(np.tensordot(T, dist, axes=([1], [axis])), 0, axis)
    return dist


def apply_matching(dist: np.ndarray, pairs) -> np.ndarray:
    for i, j in pairs:
        dist = apply_pair(dist, int(i), int(j))
    return dist


def all_matchings(items):
    """Every perfect matching of ``items`` as a tuple of pairs."""
    items = list(items)
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        remaining = rest[:k] + rest[k + 1 :]
        for tail in all_matchings(remaining):
            yield ((first, partner),) + tail


def dense_final_distribution(layers, n: int, p: float, steps: int) -> np.ndarray:
    """Exact output distribution as a flat vector indexed with qubit 0 as MSB.

    ``layers(step)`` returns a list of matchings with weights summing to one;
    a deterministic layout returns a single matching with weight 1.
    """
    flip = 2.0 * p - p * p
    dist = product_distribution(n, p)
    for s in range(steps):
        mixed = np.zeros_like(dist)
        for weight, pairs in layers(s):
            mixed += weight * apply_matching(dist, pairs)
        dist = apply_noise(mixed, flip)
    return dist.reshape(-1)


def one_d_layers(n: int):
    even = [(2 * i, 2 * i + 1) for i in range(n // 2)]
    odd = [(2 * i + 1, (2 * i + 2) % n) for i in range(n // 2)]
    return lambda s: [(1.0, even if s % 2 == 0 else odd)]


def nonlocal_layers(n: int):
    matchings = list(all_matchings(range(n)))
    w = 1.0 / len(matchings)
    return lambda s: [(w, m) for m in matchings]


def state_codes(states: np.ndarray) -> np.ndarray:
    """Flat index of each row of a ``(samples, n)`` bit array, qubit 0 as MSB."""
    n = states.shape[1]
    weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    return states.astype(np.int64) @ weights


def simulate_ones_chain(n: int, trials: int, seed: int = 0, max_steps: int = 100_000) -> np.ndarray:
    """Absorb-at-0 indicators of the ones chain started at 1, by direct simulation."""
    rng = np.random.default_rng(seed)
    x = np.ones(trials, dtype=np.int64)
    for _ in range(max_steps):
        alive = (x > 0) & (x < n)
        if not alive.any():
            break
        u = rng.random(trials)
        left = x == 1
        right = x == n - 1
        interior = alive & ~left & ~right
        step = np.zeros(trials, dtype=np.int64)
        step[left] = np.where(u[left] < 0.2, -1, 1)
        step[right] = np.where(u[right] < 0.8, 1, -1)
        step[interior] = np.select([u[interior] < 0.64, u[interior] < 0.68], [2, -2], 0)
        x = x + step
    return x == 0


def edges_from_adjacency(adj: dict[int, list[int]]) -> list[tuple[int, int]]:
    return sorted({(min(a, b), max(a, b)) for a, nbrs in adj.items() for b in nbrs})


def petersen_edges() -> list[tuple[int, int]]:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return outer + spokes + inner


def naive_maxcut(n: int, edges) -> float:
    best = 0.0
    for bits in itertools.product((1, -1), repeat=n):
        value = sum(w * (bits[i] != bits[j]) for i, j, w in edges)
        best = max(best, value)
    return best


def chi_square_pvalue(codes: np.ndarray, probs: np.ndarray, min_expected: float = 5.0) -> float:
    """Goodness of fit of sampled state codes to exact probabilities.

    Bins with expected count below ``min_expected`` are pooled into one.
    """
    from scipy.stats import chisquare

    m = codes.shape[0]
    observed = np.bincount(codes, minlength=probs.size).astype(float)
    expected = probs * m
    small = expected < min_expected
    obs = np.append(observed[~small], observed[small].sum())
    exp = np.append(expected[~small], expected[small].sum())
    if exp[-1] == 0.0:
        obs, exp = obs[:-1], exp[:-1]
    if obs.size < 2:
        return 1.0
    exp *= obs.sum() / exp.sum()
    return float(chisquare(obs, exp).pvalue)
