# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Sufficient conditions for norm and Carleman-constant bounds, checked per index.

Each check walks a finite prefix ``n = 1..N`` and needs ``N+1`` weights, since the
conditions compare ``Λ_{n+1}/λ_{n+1}`` with ``Λ_n/λ_n``. A report only ever claims the
condition holds on the checked prefix.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

import recurrences
from weights import (
    WeightKind,
    WeightSequence,
    WeightSpec,
    compensated_prefix_sums,
    lambda_ratios,
    make_weights,
)

logger = logging.getLogger(__name__)


class Condition(str, Enum):
    """Conditions and constants evaluated on a prefix."""

    CARTLIDGE = "cartlidge"
    THM13 = "thm13"
    COR14 = "cor14"
    CARLEMAN_M = "carleman_M"
    BENNETT_E = "bennett_E"
    REVERSED_LS = "reversed_LS"
    THM61 = "thm61"


# constants whose per-n values are reported, not checked
CONSTANTS = frozenset({Condition.CARLEMAN_M, Condition.BENNETT_E})


@dataclass
class ConditionReport:
    """Per-index margins of a condition on a finite prefix.

    ``margins[n-1] ≥ 0`` means the condition holds at ``n``. For the constants
    ``carleman_M`` and ``bennett_E`` the margins are the per-n values whose supremum
    is ``sup_value``.
    """

    condition: Condition
    parameters: dict[str, float]
    n_checked: int
    margins: np.ndarray = field(repr=False)
    sup_value: float
    tail_note: str = ""
    auxiliary: dict[str, float | np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def violated_at(self) -> int | None:
        """Least 1-based index with a negative margin."""
        if self.condition in CONSTANTS:
            return None
        bad = np.flatnonzero(self.margins < 0)
        return int(bad[0]) + 1 if bad.size else None

    @property
    def holds(self) -> bool:
        if self.condition in CONSTANTS:
            return math.isfinite(self.sup_value)
        return self.violated_at is None

    @property
    def verdict(self) -> str:
        n = self.violated_at
        if n is None and self.holds:
            return "holds-on-prefix"
        return f"violated-at({n})"


def _ratios(w: WeightSequence, N: int) -> np.ndarray:  # noqa: N803
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if w.N < N + 1:
        raise ValueError(f"checking n <= {N} needs {N + 1} weights, got {w.N}")
    return lambda_ratios(w.truncate(N + 1))


def _check_pl(p: float, L: float) -> None:  # noqa: N803
    if not p > 1:
        raise ValueError(f"need p > 1, got p={p}")
    if not 0 < L < p:
        raise ValueError(f"need 0 < L < p, got L={L}, p={p}")


def cartlidge_L(w: WeightSequence, N: int, p: float | None = None) -> ConditionReport:  # noqa: N802, N803
    """Cartlidge constant ``L = sup_n (Λ_{n+1}/λ_{n+1} − Λ_n/λ_n)`` over ``n ≤ N``.

    With ``p`` the margins are ``p − difference`` and the report carries the bound
    ``p/(p−L)``; without it they are the raw differences.
    """
    x = _ratios(w, N)
    steps = np.diff(x)
    sup = float(np.max(steps))
    params: dict[str, float] = {}
    aux: dict[str, float | np.ndarray] = {"steps": steps, "carleman_E": math.exp(sup)}
    if p is None:
        margins = steps
    else:
        if not p > 1:
            raise ValueError(f"need p > 1, got p={p}")
        params["p"] = p
        margins = p - steps
        if sup < p:
            aux["bound"] = p / (p - sup)
    return ConditionReport(
        condition=Condition.CARTLIDGE,
        parameters=params,
        n_checked=N,
        margins=margins,
        sup_value=sup,
        tail_note="supremum over the checked prefix only",
        auxiliary=aux,
    )


def carleman_from_cartlidge(w: WeightSequence, N: int) -> float:  # noqa: N803
    """Carleman constant ``e^L`` implied by the Cartlidge supremum in the p → ∞ limit."""
    return math.exp(cartlidge_L(w, N).sup_value)


def thm13_margins(x: np.ndarray, p: float, L: float) -> np.ndarray:  # noqa: N803
    """Slack of ``y ≤ x(1 − L/(px))^{1−p} + L/p`` for consecutive ratios ``x, y``."""
    excess = x[:-1] * np.expm1((1 - p) * np.log1p(-L / (p * x[:-1])))
    return excess + L / p - np.diff(x)


def thm13_condition(w: WeightSequence, p: float, L: float, N: int) -> ConditionReport:  # noqa: N803
    """Check ``Λ_{n+1}/λ_{n+1} ≤ (Λ_n/λ_n)(1 − Lλ_n/(pΛ_n))^{1−p} + L/p`` for ``n ≤ N``.

    Holding for every ``n`` gives ``||A||_{p,p} ≤ p/(p−L)``.
    """
    _check_pl(p, L)
    x = _ratios(w, N)
    margins = thm13_margins(x, p, L)
    return ConditionReport(
        condition=Condition.THM13,
        parameters={"p": p, "L": L},
        n_checked=N,
        margins=margins,
        sup_value=float(np.max(np.diff(x))),
        tail_note="holds on the checked prefix only; no extrapolation",
        auxiliary={"bound": p / (p - L)},
    )


def thm13_required_L(w: WeightSequence, p: float, N: int, iterations: int = 80) -> float | None:  # noqa: N802, N803
    """Smallest ``L`` in ``(0, p)`` for which the ``thm13`` condition holds on the prefix.

    The right-hand side increases with ``L``, so the set of admissible ``L`` is an
    interval and bisection applies. Returns None when no ``L < p`` works.
    """
    if not p > 1:
        raise ValueError(f"need p > 1, got p={p}")
    x = _ratios(w, N)

    def ok(L: float) -> bool:  # noqa: N803
        return bool(np.all(thm13_margins(x, p, L) >= 0))

    hi = p * (1 - 1e-12)
    if not ok(hi):
        return None
    lo = 0.0
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    logger.debug("Smallest admissible L for p=%s on n <= %d: %.17g", p, N, hi)
    return hi


def cor14_condition(w: WeightSequence, p: float, L: float, N: int) -> ConditionReport:  # noqa: N803
    """Check ``Λ_{n+1}/λ_{n+1} − Λ_n/λ_n ≤ L + (λ_n/(2Λ_n))(1 − 1/p)L²`` for ``n ≤ N``."""
    _check_pl(p, L)
    x = _ratios(w, N)
    steps = np.diff(x)
    margins = L + (1 - 1 / p) * L**2 / (2 * x[:-1]) - steps
    return ConditionReport(
        condition=Condition.COR14,
        parameters={"p": p, "L": L},
        n_checked=N,
        margins=margins,
        sup_value=float(np.max(steps)),
        tail_note="holds on the checked prefix only; no extrapolation",
        auxiliary={"bound": p / (p - L)},
    )


def carleman_M(w: WeightSequence, N: int) -> ConditionReport:  # noqa: N802, N803
    """``M = sup_n (Λ_n/λ_n) log((Λ_{n+1}/λ_{n+1})/(Λ_n/λ_n))``; ``E = e^M`` is admissible."""
    x = _ratios(w, N)
    terms = x[:-1] * np.log1p(np.diff(x) / x[:-1])
    sup = float(np.max(terms))
    return ConditionReport(
        condition=Condition.CARLEMAN_M,
        parameters={},
        n_checked=N,
        margins=terms,
        sup_value=sup,
        tail_note="prefix supremum; later terms may be larger",
        auxiliary={"E": math.exp(sup)},
    )


def bennett_E(w: WeightSequence, N: int) -> ConditionReport:  # noqa: N802, N803
    """``E = sup_n (Λ_{n+1}/λ_{n+1}) Π_{k≤n} (λ_k/Λ_k)^{λ_k/Λ_n}``, evaluated in logs."""
    x = _ratios(w, N)
    w = w.truncate(N)
    log_prod = compensated_prefix_sums(-w.lam * np.log(x[:-1])) / w.Lam
    log_terms = np.log(x[1:]) + log_prod
    terms = np.exp(log_terms)
    return ConditionReport(
        condition=Condition.BENNETT_E,
        parameters={},
        n_checked=N,
        margins=terms,
        sup_value=float(np.max(terms)),
        tail_note="prefix supremum; later terms may be larger",
        auxiliary={"log_terms": log_terms},
    )


def bennett_power_constant(alpha: float, p: float) -> float:
    """Best constant ``(αp/(αp−1))^p`` for weights ``k^{α−1}``, needing ``αp > 1``."""
    if not p > 1 or not alpha * p > 1:
        raise ValueError(f"need p > 1 and alpha*p > 1, got alpha={alpha}, p={p}")
    return (alpha * p / (alpha * p - 1)) ** p


def thm61_checks(alpha: float, p: float, N: int) -> ConditionReport:  # noqa: N803
    """Checks behind the power-weight theorem for ``λ_k = k^α``, ``0 ≤ α ≤ 1``, ``p ≥ 2``.

    With ``x_n = 1/Λ_n`` the recorded quantities are

    - ``f_n(x_n)``, where ``f_n(x) = 1 + n^α x(1/(α+1) + (n^α/2)(1−1/p)x/(α+1)²)
      − (n^α/(n+1)^α)(1 + (n+1)^α x)``;
    - ``h(α) = 2^α(5+4α) − 4(1+α)²``;
    - ``(1+1/n)^α − 1 − α/(2n)``.

    The margins are their pointwise minimum, ``h`` entering at ``n = 1``.
    """
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if not p >= 2:
        raise ValueError(f"p must be at least 2, got {p}")
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    w = make_weights(WeightSpec(WeightKind.POWER, param=float(alpha)), N + 1)
    L = 1 / (alpha + 1)  # noqa: N806
    n = np.arange(1, N + 1, dtype=float)
    na = w.lam[:N]
    x = 1 / w.Lam[:N]
    shrink = -np.expm1(-alpha * np.log1p(1 / n))
    f = na * x * (L + na * (1 - 1 / p) * x * L**2 / 2 - 1) + shrink
    h = 2**alpha * (5 + 4 * alpha) - 4 * (1 + alpha) ** 2
    binomial = np.expm1(alpha * np.log1p(1 / n)) - alpha / (2 * n)

    margins = np.minimum(f, binomial)
    margins[0] = min(margins[0], h)
    return ConditionReport(
        condition=Condition.THM61,
        parameters={"alpha": alpha, "p": p, "L": L},
        n_checked=N,
        margins=margins,
        sup_value=float(np.max(np.diff(lambda_ratios(w)))),
        tail_note="holds on the checked prefix only; no extrapolation",
        auxiliary={"f": f, "h": h, "binomial": binomial},
    )


class LevinSteckinFinding(NamedTuple):
    """Outcome of testing the Levin–Steckin inequality at ``a = (1, 0, 0, …)``.

    ``pair`` is the two-term vector ``(a_1, a_2)`` with the most negative relative
    slack found on the search grid, or None when every grid point satisfies the
    inequality.
    """

    p: float
    lhs: float
    rhs: float
    fails: bool
    pair: tuple[float, float] | None
    pair_margin: float


def _ls_sides(p: float, a1: float, a2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lhs = (a1 + a2) ** p + (a2 / 2) ** p
    rhs = (p / (1 - p)) ** p * (a1**p + a2**p)
    return lhs, rhs


def ls_counterexample(p: float, grid: np.ndarray | None = None) -> LevinSteckinFinding:
    """Test ``Σ_n ((1/n)Σ_{k≥n} a_k)^p ≥ (p/(1−p))^p Σ a_n^p`` on short vectors.

    The unit vector gives ``lhs = 1`` against ``rhs = (p/(1−p))^p``, failing for
    ``p > 1/2``. Two-term vectors ``(1, t)`` are then searched over ``grid``
    (default: 2001 log-spaced ``t`` in ``[1e-8, 1e2]``), exposing the ``p = 1/2`` failure.
    """
    if not 0 < p < 1:
        raise ValueError(f"need 0 < p < 1, got p={p}")
    rhs = (p / (1 - p)) ** p
    fails = 1.0 < rhs
    t = np.logspace(-8, 2, 2001) if grid is None else np.asarray(grid, dtype=float)
    lhs2, rhs2 = _ls_sides(p, 1.0, t)
    rel = lhs2 / rhs2 - 1
    best = int(np.argmin(rel))
    pair = (1.0, float(t[best])) if rel[best] < 0 else None
    if fails or pair is not None:
        logger.info("Levin-Steckin inequality fails for p=%s (pair %s)", p, pair)
    return LevinSteckinFinding(p, 1.0, rhs, fails, pair, float(rel[best]))


def reversed_condition_check(
    w: WeightSequence,
    p: float,
    L: float,  # noqa: N803
    N: int,  # noqa: N803
) -> ConditionReport:
    """Check the inequality behind the reversed Copson-type bound, ``0 < p ≤ 1/3``.

    With the sequence of ``recurrences.reversed_w_trace``, ``W_n = Σ_{i≤n} w_i`` and
    ``T_n = w_n^{−1/(1−p)} Λ_n^{−p/(1−p)}`` the per-n relative slack of
    ``W_n^{−1/(1−p)} λ_n^{−p/(1−p)} ≤ ((L−p)/p)^{p/(1−p)} (T_n − T_{n+1})``
    is recorded. Holding for all ``n`` with ``T_n → 0`` gives the reversed inequality
    with ``U = (p/(L−p))^p``.
    """
    if not 0 < p <= 1 / 3:
        raise ValueError(f"need 0 < p <= 1/3, got p={p}")
    if not L >= 1:
        raise ValueError(f"need L >= 1, got L={L}")
    x = _ratios(w, N)
    trace = recurrences.reversed_w_trace(w, p, L, N)
    beta = trace.parameters["beta"]
    r = 1 / (1 - p)
    s = p / (1 - p)
    log_lam = np.log(trace.weights.lam)
    log_big = np.log(trace.weights.Lam)
    log_t = -r * trace.log_values - s * log_big
    log_partial = np.log((1 + beta) * x[:-1] - beta) + trace.log_values[:-1]
    log_lhs = -r * log_partial - s * log_lam[:-1]
    log_k = s * math.log((L - p) / p)
    margins = np.exp(log_k + log_t[:-1] - log_lhs) * -np.expm1(np.diff(log_t)) - 1

    steps = np.diff(x)
    aux: dict[str, float | np.ndarray] = {
        "beta": beta,
        "step_margin": L - steps,
        "U": (p / (L - p)) ** p,
    }
    notes = []
    if np.any(steps > L):
        notes.append(f"step bound y <= x + L fails first at n={int(np.argmax(steps > L)) + 1}")
    decreasing = bool(np.all(np.diff(log_t) < 0))
    notes.append(f"T_n {'decreasing' if decreasing else 'not decreasing'} on the prefix")
    alpha = w.spec.alpha
    if w.kind in (WeightKind.POWER, WeightKind.CONSTANT) and alpha is not None:
        exponent = -(1 - (2 + alpha) * p + p**2 * (1 + alpha)) / (p * (1 - p))
        aux["decay_exponent"] = exponent
        if -1 < alpha <= 0 and (1 + alpha) * p < 1:
            aux["U_root"] = (1 + alpha) * p / (1 - (1 + alpha) * p)
        sign = "negative" if exponent < 0 else "nonnegative"
        notes.append(f"T_n = O(n^{exponent:.17g}), exponent {sign} (heuristic)")
    return ConditionReport(
        condition=Condition.REVERSED_LS,
        parameters={"p": p, "L": L},
        n_checked=N,
        margins=margins,
        sup_value=float(np.max(steps)),
        tail_note="; ".join(notes),
        auxiliary=aux,
    )
