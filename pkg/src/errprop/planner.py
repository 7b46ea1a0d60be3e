"""Error budgets: how clean the hardware must be for a routed QAOA circuit."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

from errprop import analytics
from errprop.chain import Arch, ArchitectureSchedule, McConfig, NoiseParams, estimate_q
from errprop.errors import ConfigurationError, DiagnosticError, ValidationError
from errprop.maxcut import CUBIC_GRAPH_RATIO, GraphClass, classical_superiority_threshold

DEFAULT_QAOA_LAYERS = 10
P_LOW, P_HIGH = 1e-12, 0.5
HEURISTIC_TOL = 1e-3
MAX_DEPTH = 10**6
MC_SAMPLES = 200


def _planner_arch(arch: Arch | str) -> Arch:
    arch = Arch(arch)
    if arch is Arch.NONLOCAL:
        raise ConfigurationError("the planner has no routed-depth model for the nonlocal layout")
    return arch


def _ceil_even(x: float) -> int:
    d = math.ceil(x - 1e-9)
    return d + (d % 2)


def routed_depth(arch: Arch | str, n: int, qaoa_layers: int = DEFAULT_QAOA_LAYERS) -> int:
    """Depth after routing a bounded-degree graph onto the layout.

    Per QAOA layer: ``3n`` in 1D and ``sqrt(7n)`` in 2D, rounded up to even.
    """
    arch = _planner_arch(arch)
    if qaoa_layers < 1:
        raise ConfigurationError(f"qaoa_layers must be positive, got {qaoa_layers}")
    if n < 2 or (arch is Arch.ONE_D and n % 2):
        raise ConfigurationError(f"invalid qubit count n={n} for the {arch.value} layout")
    per_layer = 3 * n if arch is Arch.ONE_D else math.sqrt(7 * n)
    return _ceil_even(qaoa_layers * per_layer)


@dataclass(frozen=True)
class PlanResult:
    n: int
    arch: str
    depth: int
    target_q_frac: float
    required_p: float
    method: str
    achieved_q_frac: float
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _bisect_log(f: Callable[[float], float], target: float, lo: float, hi: float, tol: Callable[[float], bool], max_iter: int = 200):
    """Bisect ``f(p) = target`` in log p for nondecreasing ``f``."""
    f_lo, f_hi = f(lo), f(hi)
    if not f_lo <= target <= f_hi:
        raise DiagnosticError(
            f"target q_frac={target} is not bracketed: q({lo:g})={f_lo:.6g}, q({hi:g})={f_hi:.6g}"
        )
    a, b = math.log(lo), math.log(hi)
    for it in range(1, max_iter + 1):
        mid = math.exp(0.5 * (a + b))
        q = f(mid)
        if tol(q):
            return mid, q, it
        if q < target:
            a = math.log(mid)
        else:
            b = math.log(mid)
    raise DiagnosticError(f"bisection did not reach tolerance in {max_iter} iterations")


def required_error_rate(
    arch: Arch | str,
    n: int,
    target_q_frac: float = 0.5,
    method: str = "heuristic",
    depth: int | None = None,
    qaoa_layers: int = DEFAULT_QAOA_LAYERS,
    samples: int = MC_SAMPLES,
    seed: int = 0,
    threads: int | None = None,
) -> PlanResult:
    """Single-qubit error rate at which the forward model reaches ``target_q_frac``.

    ``method="heuristic"`` inverts the closed-form predictions to within 1e-3
    in q_frac. ``method="mc"`` (recorded as ``"mc_bisection"``) inverts the
    sampled chain with a fixed seed (common random numbers keep q monotone in
    p) to within one standard error.
    """
    arch = _planner_arch(arch)
    if not 0.0 < target_q_frac < 1.0:
        raise ValidationError(f"target q_frac must lie in (0, 1), got {target_q_frac}")
    D = routed_depth(arch, n, qaoa_layers) if depth is None else depth
    if D < 0 or D % 2:
        raise ConfigurationError(f"depth must be even and nonnegative, got {D}")

    if method == "heuristic":
        def forward(p: float) -> float:
            return analytics.forward_q(arch, n, D, p)

        p, q, iters = _bisect_log(forward, target_q_frac, P_LOW, P_HIGH, lambda q: abs(q - target_q_frac) <= HEURISTIC_TOL)
        branch = analytics.scaling_regime(arch, n, D).value
        meta = {"branch": branch, "iterations": iters, "tolerance": HEURISTIC_TOL}
    elif method in ("mc", "mc_bisection"):
        method = "mc_bisection"
        schedule = ArchitectureSchedule(arch, n)
        stderr = [0.0]

        def forward(p: float) -> float:
            est = estimate_q(schedule, NoiseParams(p), McConfig(samples, seed, D), threads)
            stderr[0] = est.stderr
            return est.q_frac

        def close(q: float) -> bool:
            # the floor keeps a zero-variance estimate from never converging
            return abs(q - target_q_frac) <= max(stderr[0], 1.0 / (samples * n))

        p, q, iters = _bisect_log(forward, target_q_frac, P_LOW, P_HIGH, close)
        meta = {"iterations": iters, "samples": samples, "seed": seed, "stderr": stderr[0]}
    else:
        raise ValidationError(f"unknown method {method!r}; expected 'heuristic' or 'mc'")
    return PlanResult(
        n=n,
        arch=arch.value,
        depth=D,
        target_q_frac=target_q_frac,
        required_p=p,
        method=method,
        achieved_q_frac=q,
        metadata=meta,
    )


def max_useful_depth(
    arch: Arch | str,
    n: int,
    p: float,
    graph_class: str | GraphClass = GraphClass.DEG3,
    classical_ratio: float = CUBIC_GRAPH_RATIO,
) -> int:
    """Smallest even depth at which the predicted q_frac exceeds the classical threshold."""
    arch = _planner_arch(arch)
    if not 0.0 < p < 1.0:
        raise ValidationError(f"p must lie in (0, 1), got {p}")
    threshold = classical_superiority_threshold(graph_class, classical_ratio)

    def crossed(D: int) -> bool:
        return analytics.forward_q(arch, n, D, p) > threshold

    hi = 2
    while not crossed(hi):
        if hi >= MAX_DEPTH:
            raise DiagnosticError(f"q_frac stays below {threshold:.4g} for all depths up to {MAX_DEPTH}")
        hi = min(2 * hi, MAX_DEPTH)
    lo = hi // 2 if hi > 2 else 0  # even, not crossed (or zero)
    lo -= lo % 2
    # invariant: lo not crossed (or 0), hi crossed, both even
    while hi - lo > 2:
        mid = (lo + hi) // 2
        mid -= mid % 2
        if crossed(mid):
            hi = mid
        else:
            lo = mid
    return hi
