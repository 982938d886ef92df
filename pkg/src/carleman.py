# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Weighted Carleman inequality ``Σ_n Π_{k≤n} a_k^{λ_k/Λ_n} ≤ E Σ_n a_n``.

The best constant is bounded from below by maximizing the ratio of both sides over
the simplex and from above by the constants of the conditions module.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

import conditions
import norms
from weights import WeightKind, WeightSequence

logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 8
STAGNATION_STEP = 1e-8
STATIONARY_TOL = 1e-12
ORDER_TOL = 1e-6


class BoundOrderingError(ArithmeticError):
    """An optimized lower bound exceeded a proven upper bound."""


def worker_count() -> int:
    """Threads for concurrent restarts and sweeps, from ``HARDY_CERT_THREADS``."""
    raw = os.environ.get("HARDY_CERT_THREADS")
    if raw:
        try:
            count = int(raw)
        except ValueError:
            raise ValueError(f"HARDY_CERT_THREADS must be an integer, got {raw!r}") from None
        if count < 1:
            raise ValueError(f"HARDY_CERT_THREADS must be positive, got {count}")
        return count
    return min(8, os.cpu_count() or 1)


@dataclass
class CarlemanEstimate:
    """Lower bound on the best weighted Carleman constant with the proven upper bounds."""

    w: WeightSequence = field(repr=False)
    N: int
    lower_bound_E: float  # noqa: N815
    optimizer: np.ndarray = field(repr=False)
    upper_bounds: dict[str, float] = field(default_factory=dict)
    iterations: int = 0
    stagnated: bool = False
    starts: int = 1


def geomean_sum(w: WeightSequence, a: np.ndarray) -> float:
    """``Σ_n Π_{k≤n} a_k^{λ_k/Λ_n}``, evaluated in logs.

    A zero ``a_k`` with ``λ_k > 0`` zeroes every later term.
    """
    return float(np.sum(_geomeans(w, a)))


def _geomeans(w: WeightSequence, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ValueError("geometric means need a nonnegative vector")
    w = w.truncate(len(a))
    dead = np.logical_or.accumulate((a == 0) & (w.lam > 0))
    logs = np.log(np.where(a > 0, a, 1.0))
    with np.errstate(over="ignore"):
        means = np.exp(np.cumsum(w.lam * logs) / w.Lam)
    return np.where(dead, 0.0, means)


def _ratio(w: WeightSequence, a: np.ndarray) -> float:
    return geomean_sum(w, a) / float(np.sum(a))


def _ascend(
    w: WeightSequence, a: np.ndarray, max_iter: int, tol: float
) -> tuple[np.ndarray, float, int, bool]:
    """Damped multiplicative fixed-point ascent on the simplex.

    The stationary points satisfy ``a_k R = λ_k Σ_{n≥k} G_n/Λ_n`` with ``G_n`` the
    geometric means and ``R`` the ratio. A step interpolates geometrically toward that
    target and is accepted only if the ratio increases; otherwise the step halves.
    """
    a = a / np.sum(a)
    ratio = _ratio(w, a)
    theta = 1.0
    for step in range(1, max_iter + 1):
        target = norms.apply_adjoint(w, _geomeans(w, a)) / ratio
        if np.max(np.abs(target / a - 1)) <= STATIONARY_TOL:
            return a, ratio, step, False
        trial = a ** (1 - theta) * target**theta
        trial /= np.sum(trial)
        new_ratio = _ratio(w, trial)
        if new_ratio > ratio:
            gain = new_ratio - ratio
            a, ratio = trial, new_ratio
            theta = min(1.0, 2 * theta)
            if gain <= tol * ratio:
                return a, ratio, step, False
        else:
            theta /= 2
            if theta < STAGNATION_STEP:
                return a, ratio, step, True
    return a, ratio, max_iter, False


def _starts(w: WeightSequence, restarts: int, seed: int) -> list[np.ndarray]:
    lam, big = w.lam, w.Lam
    n = np.arange(1, w.N + 1)
    seeds = [lam / big, lam * np.exp(-n / max(1.0, w.N / 4))]
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        seeds.append(rng.dirichlet(np.ones(w.N)) + 1e-12)
    return seeds


def optimize_ratio(
    w: WeightSequence,
    N: int,  # noqa: N803
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    max_iter: int = 5000,
    tol: float = 1e-13,
) -> CarlemanEstimate:
    """Lower-bound the best constant ``E`` by maximizing ``geomean_sum(a)/Σa``.

    Runs the ascent from two deterministic seeds (``a_k ∝ λ_k/Λ_k`` and a
    geometrically damped ``a_k ∝ λ_k``) and ``restarts`` random Dirichlet starts drawn
    from ``seed``. Starts run concurrently; the best ratio wins, ties going to the
    earlier start.
    """
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if restarts < 0:
        raise ValueError(f"restarts must be nonnegative, got {restarts}")
    w = w.truncate(N)
    starts = _starts(w, restarts, seed)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(lambda a0: _ascend(w, a0, max_iter, tol), starts))

    best = max(range(len(results)), key=lambda i: (results[i][1], -i))
    a, ratio, iterations, stagnated = results[best]
    if stagnated:
        logger.warning("Carleman ascent stagnated for N=%d at ratio %.17g", N, ratio)
    logger.debug("Best Carleman ratio for N=%d: %.17g from start %d", N, ratio, best)
    return CarlemanEstimate(
        w=w,
        N=N,
        lower_bound_E=ratio,
        optimizer=a,
        iterations=iterations,
        stagnated=stagnated,
        starts=len(starts),
    )


def upper_bounds(w: WeightSequence, N: int) -> dict[str, float]:  # noqa: N803
    """Proven constants on the prefix: ``e^M``, Bennett's ``E``, ``e^L`` and, for power
    weights, ``e^{1/(α+1)}``. Needs ``N+1`` weights.
    """
    bounds = {
        "e^M": math.exp(conditions.carleman_M(w, N).sup_value),
        "bennett_E": conditions.bennett_E(w, N).sup_value,
        "e^L": conditions.carleman_from_cartlidge(w, N),
    }
    if w.kind in (WeightKind.POWER, WeightKind.CONSTANT):
        bounds["e^{1/(alpha+1)}"] = math.exp(1 / (w.spec.alpha + 1))
    return bounds


def bound_comparison(
    w: WeightSequence,
    N: int,  # noqa: N803
    estimate: CarlemanEstimate | None = None,
    **optimize_kwargs,
) -> CarlemanEstimate:
    """Attach the upper bounds to an estimate and check ``lower ≤ bennett_E ≤ e^M``.

    ``bennett_E`` and ``e^M`` are prefix suprema; the ordering between them holds on
    every prefix. The comparison with the lower bound uses a 1e-6 slack.

    Raises:
        BoundOrderingError: when the ordering fails.
    """
    if estimate is None:
        estimate = optimize_ratio(w, N, **optimize_kwargs)
    bounds = upper_bounds(w, N)
    lower, bennett, em = estimate.lower_bound_E, bounds["bennett_E"], bounds["e^M"]
    if not bennett <= em * (1 + 1e-12):
        logger.error("Bennett constant %.17g exceeds e^M %.17g", bennett, em)
        raise BoundOrderingError(f"bennett_E={bennett} > e^M={em}")
    ceiling = min(bounds.values())
    if lower > ceiling + ORDER_TOL:
        logger.error("Optimized ratio %.17g exceeds proven bound %.17g", lower, ceiling)
        raise BoundOrderingError(f"lower bound {lower} exceeds proven constant {ceiling}")
    estimate.upper_bounds = bounds
    return estimate
