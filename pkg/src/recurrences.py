# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Auxiliary sequences behind the norm bounds, with their barrier checks.

Every trace is indexed from 1: ``values[k-1]`` is the k-th term. The η and μ
recurrences run in the log domain; raw values are derived from the logs and may
overflow to ``inf`` where the logs do not.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from weights import WeightSequence, lambda_ratios

logger = logging.getLogger(__name__)

# relative slack used to recognise the barrier equality at the critical multiplier
BOUNDARY_RTOL = 1e-12


class RecurrenceKind(str, Enum):
    """Auxiliary sequences."""

    ETA = "eta"
    MU_Q = "mu_q"
    KS_CLASSICAL = "ks_classical"
    GAO_BETA = "gao_beta"
    REVERSED_W = "reversed_w"


@dataclass
class RecurrenceTrace:
    """Values of an auxiliary sequence and the checks run against it.

    ``escaped_at`` is the index where the recurrence left its domain; entries after
    it are NaN. ``first_violation`` is the least index where a barrier or
    verification margin fails.
    """

    kind: RecurrenceKind
    parameters: dict[str, float]
    values: np.ndarray = field(repr=False)
    log_values: np.ndarray = field(repr=False)
    barrier: np.ndarray | None = field(default=None, repr=False)
    margins: np.ndarray | None = field(default=None, repr=False)
    first_violation: int | None = None
    escaped_at: int | None = None
    notes: list[str] = field(default_factory=list)
    weights: WeightSequence | None = field(default=None, repr=False)

    @property
    def N(self) -> int:  # noqa: N802
        return len(self.values)

    @property
    def n_valid(self) -> int:
        """Number of leading terms that are defined."""
        return self.N if self.escaped_at is None else self.escaped_at


def _require_weights(w: WeightSequence, N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:  # noqa: N803
    w = w.truncate(N)
    x = lambda_ratios(w)
    return np.log(x), np.log(w.lam), np.log(w.Lam)


def barrier_constants(p: float, L: float) -> tuple[float, float]:  # noqa: N803
    """Return ``(b, c)`` of the linear barrier ``(b+c)x − c``.

    ``b = (1−L/p)^{p/(p−1)}`` and ``c = (L/p)(1−L/p)^{1/(p−1)}``.
    """
    if not 0 < L < p:
        raise ValueError(f"barrier needs 0 < L < p, got L={L}, p={p}")
    base = 1 - L / p
    return base ** (p / (p - 1)), (L / p) * base ** (1 / (p - 1))


def critical_multiplier(p: float, L: float) -> float:  # noqa: N803
    """Multiplier ``(1−L/p)^{−p}`` at which ``η_1`` sits on the barrier."""
    return (1 - L / p) ** -p


def _eta_log(w: WeightSequence, p: float, mu: float, N: int) -> tuple[np.ndarray, int | None]:  # noqa: N803
    # log η_k, NaN past the escape index
    log_x, log_lam, log_big = _require_weights(w, N)
    out = np.full(N, np.nan)
    tail = -math.log(mu) / (p - 1)
    log_eta = -math.log(mu)
    for k in range(1, N + 1):
        out[k - 1] = log_eta
        s = log_eta - p * log_x[k - 1]
        if s >= 0:
            return out, k
        if k == N:
            break
        shift = log_big[k - 1] - log_lam[k]
        first = shift + (shift + s - math.log1p(-math.exp(s))) / (p - 1)
        log_eta = (p - 1) * float(np.logaddexp(first, tail))
    return out, None


def eta_escapes(w: WeightSequence, p: float, mu: float, N: int) -> bool:  # noqa: N803
    """Return True when the η recurrence at ``mu`` escapes at some ``k ≤ N``."""
    return _eta_log(w, p, mu, N)[1] is not None


def eta_trace(w: WeightSequence, p: float, mu: float, N: int) -> RecurrenceTrace:  # noqa: N803
    """Trace ``η_1..η_N`` of the Lagrange recurrence at multiplier ``mu``.

    With ``x_k = Λ_k/λ_k``, ``η_1 = 1/μ`` and
    ``η_{k+1}^{1/(p−1)} = (Λ_k/λ_{k+1})(Λ_kη_k/(λ_{k+1}(x_k^p − η_k)))^{1/(p−1)} + μ^{−1/(p−1)}``.
    The trace escapes at the first ``k`` with ``η_k ≥ x_k^p``, boundary equality included.
    """
    if not p > 1:
        raise ValueError(f"eta recurrence needs p > 1, got p={p}")
    if not mu > 0:
        raise ValueError(f"multiplier must be positive, got mu={mu}")
    log_eta, escaped = _eta_log(w, p, mu, N)
    if escaped is not None:
        logger.debug("eta trace p=%s mu=%s escapes at k=%d", p, mu, escaped)
    with np.errstate(over="ignore"):
        values = np.exp(log_eta)
    return RecurrenceTrace(
        kind=RecurrenceKind.ETA,
        parameters={"p": p, "mu": mu},
        values=values,
        log_values=log_eta,
        escaped_at=escaped,
        weights=w.truncate(N),
    )


def barrier_check(trace: RecurrenceTrace, p: float, L: float) -> RecurrenceTrace:  # noqa: N803
    """Compare ``η_k^{1/(p−1)}`` with the barrier ``(b+c)Λ_k/λ_k − c``.

    A term on or above the barrier is a violation, except the equality ``η_1 = b``
    at the critical multiplier, which is recorded as a note.

    Returns:
        A copy of ``trace`` with ``barrier``, ``margins`` and ``first_violation`` set.
    """
    if trace.kind is not RecurrenceKind.ETA or trace.weights is None:
        raise ValueError(f"barrier check applies to eta traces, got {trace.kind.value}")
    if not math.isclose(trace.parameters["p"], p):
        raise ValueError(f"trace was built for p={trace.parameters['p']}, not p={p}")
    b, c = barrier_constants(p, L)
    x = lambda_ratios(trace.weights)
    barrier = (b + c) * x - c
    log_m = trace.log_values / (p - 1)
    margins = np.log(barrier) - log_m
    notes = list(trace.notes)

    mu = trace.parameters["mu"]
    on_boundary = math.isclose(mu, critical_multiplier(p, L), rel_tol=BOUNDARY_RTOL)
    if on_boundary and abs(margins[0]) <= BOUNDARY_RTOL:
        notes.append("eta_1 equals the barrier at the critical multiplier")
        margins[0] = 0.0
        bad = np.flatnonzero(margins[1:] <= 0) + 1
    else:
        bad = np.flatnonzero(margins <= 0)
    first = int(bad[0]) + 1 if bad.size else None
    if first is not None:
        logger.debug("Barrier p=%s L=%s mu=%s first crossed at k=%d", p, L, mu, first)
    return dataclasses.replace(
        trace,
        parameters={**trace.parameters, "L": L, "b": b, "c": c},
        barrier=barrier,
        margins=margins,
        first_violation=first,
        notes=notes,
    )


def mu_trace_q(w: WeightSequence, p: float, L: float, N: int) -> RecurrenceTrace:  # noqa: N803
    """Trace the dual multipliers ``μ_n`` at the conjugate exponent ``q = p/(p−1)``.

    ``μ_1 = ((p−L)/p)^q`` and
    ``μ_{n+1} = μ_1 + (Λ_n/λ_{n+1})^q / ((Λ_n/λ_n)^p μ_n^{−(p−1)} − 1)^{1/(p−1)}``.

    ``escaped_at`` marks the first ``μ_n ≥ (Λ_n/λ_n)^q``; ``first_violation`` the first
    ``μ_n`` strictly above the barrier ``(b+c)Λ_n/λ_n − c``. ``margins`` holds the log
    slack against the barrier.
    """
    if not p > 1:
        raise ValueError(f"mu recurrence needs p > 1, got p={p}")
    b, c = barrier_constants(p, L)
    q = p / (p - 1)
    log_x, log_lam, log_big = _require_weights(w, N)
    log_b = q * math.log1p(-L / p)
    log_mu = np.full(N, np.nan)
    escaped = None
    current = log_b
    for n in range(1, N + 1):
        log_mu[n - 1] = current
        z = p * log_x[n - 1] - (p - 1) * current
        if z <= 0:
            escaped = n
            break
        if n == N:
            break
        log_gap = z + math.log1p(-math.exp(-z))
        term = q * (log_big[n - 1] - log_lam[n]) - log_gap / (p - 1)
        current = float(np.logaddexp(log_b, term))

    x = np.exp(log_x)
    barrier = (b + c) * x - c
    margins = np.log(barrier) - log_mu
    # mu_1 = b sits on the barrier exactly
    if abs(margins[0]) <= BOUNDARY_RTOL:
        margins[0] = 0.0
    bad = np.flatnonzero(margins < 0)
    first = int(bad[0]) + 1 if bad.size else None
    if escaped is not None:
        logger.debug("mu_q trace p=%s L=%s escapes at n=%d", p, L, escaped)
    with np.errstate(over="ignore"):
        values = np.exp(log_mu)
    return RecurrenceTrace(
        kind=RecurrenceKind.MU_Q,
        parameters={"p": p, "L": L, "q": q, "b": b, "c": c},
        values=values,
        log_values=log_mu,
        barrier=barrier,
        margins=margins,
        first_violation=first,
        escaped_at=escaped,
        weights=w.truncate(N),
    )


def _first_negative(margins: np.ndarray) -> int | None:
    bad = np.flatnonzero(margins < 0)
    return int(bad[0]) + 1 if bad.size else None


def ks_classical_weights(p: float, N: int) -> RecurrenceTrace:  # noqa: N803
    """Kaluza–Szegő weights for Cesàro means and their verification margins.

    ``w_1 = 1`` and ``Σ_{i≤n} w_i = ((n−1/p)/(1−1/p)) w_n``, i.e.
    ``w_{n+1} = (1 − 1/(pn)) w_n``. The margins are the relative slack
    ``U n^p (w_n^{p−1} − w_{n+1}^{p−1}) / (Σ_{i≤n} w_i)^{p−1} − 1`` with ``U = q^p`` and
    ``w_{N+1} = 0`` in the last inequality.
    """
    if not p > 1:
        raise ValueError(f"Kaluza-Szego weights need p > 1, got p={p}")
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    q = p / (p - 1)
    n = np.arange(1, N + 1, dtype=float)
    step = 1 - 1 / (p * n)
    values = np.concatenate(([1.0], np.cumprod(step[:-1])))
    log_values = np.concatenate(([0.0], np.cumsum(np.log1p(-1 / (p * n[:-1])))))

    log_c = np.log(n - 1 / p) - math.log1p(-1 / p)
    drop = -np.expm1((p - 1) * np.log1p(-1 / (p * n)))
    drop[-1] = 1.0
    log_ratio = p * math.log(q) + p * np.log(n) + np.log(drop) - (p - 1) * log_c
    margins = np.expm1(log_ratio)
    first = _first_negative(margins)
    if first is not None:
        logger.warning("Kaluza-Szego inequality fails at n=%d for p=%s", first, p)
    return RecurrenceTrace(
        kind=RecurrenceKind.KS_CLASSICAL,
        parameters={"p": p, "q": q, "U": q**p},
        values=values,
        log_values=log_values,
        margins=margins,
        first_violation=first,
    )


def gao_sequence(w: WeightSequence, p: float, L: float, N: int) -> RecurrenceTrace:  # noqa: N803
    """Auxiliary sequence ``a_n`` certifying ``||A||_{p,p} ≤ p/(p−L)``.

    ``a_1 = 1``, ``a_{n+1} = (1+β−βλ_n/Λ_n) a_n / (1+β)`` with ``β = L/(p−L)``, so that
    ``A_n = (1+β−βλ_n/Λ_n) a_n``. With ``x = Λ_n/λ_n``, ``y = Λ_{n+1}/λ_{n+1}`` and
    ``U = (p/(p−L))^p`` the margins are the relative slacks of

    - ``U(1+β)^{1−p}(x(1−β/((1+β)x))^{1−p} − (y−1)) ≥ 1`` for ``n < N``;
    - ``U x (1+β−β/x)^{1−p} ≥ 1`` at ``n = N``.
    """
    if not 0 < L < p:
        raise ValueError(f"need 0 < L < p, got L={L}, p={p}")
    beta = L / (p - L)
    log_x, _, _ = _require_weights(w, N)
    x = np.exp(log_x)
    factor = 1 + beta - beta / x
    log_values = np.concatenate(([0.0], np.cumsum(np.log(factor[:-1]) - math.log1p(beta))))
    values = np.concatenate(([1.0], np.cumprod(factor[:-1] / (1 + beta))))

    # x (1 - L/(p x))^{1-p} - x, accurate for large x
    excess = x * np.expm1((1 - p) * np.log1p(-L / (p * x)))
    margins = np.empty(N)
    margins[:-1] = (1 + beta) * (excess[:-1] - np.diff(x)) + beta
    margins[-1] = (1 + beta) * (x[-1] + excess[-1]) - 1
    first = _first_negative(margins)
    if first is not None:
        logger.debug("Auxiliary sequence p=%s L=%s fails at n=%d", p, L, first)
    return RecurrenceTrace(
        kind=RecurrenceKind.GAO_BETA,
        parameters={"p": p, "L": L, "beta": beta, "U": (p / (p - L)) ** p},
        values=values,
        log_values=log_values,
        margins=margins,
        first_violation=first,
        weights=w.truncate(N),
    )


def reversed_w_trace(w: WeightSequence, p: float, L: float, N: int) -> RecurrenceTrace:  # noqa: N803
    """Positive sequence ``w_1..w_{N+1}`` for the reversed inequalities, ``0 < p < 1``.

    ``w_1 = 1`` and ``Σ_{i≤n} w_i = ((1+β)Λ_n/λ_n − β) w_n`` with ``β = (2p−L)/(L−p)``,
    equivalently ``w_{n+1} = ((1+β)Λ_n/λ_n − β) λ_{n+1} w_n / ((1+β)Λ_n)``.
    Needs ``N+1`` weights.

    Raises:
        ValueError: when ``(1+β)Λ_n/λ_n − β ≤ 0`` for some ``n ≤ N``.
    """
    if not 0 < p < 1:
        raise ValueError(f"reversed sequence needs 0 < p < 1, got p={p}")
    if not L > p:
        raise ValueError(f"reversed sequence needs L > p, got L={L}, p={p}")
    beta = (2 * p - L) / (L - p)
    log_x, log_lam, log_big = _require_weights(w, N + 1)
    coeff = (1 + beta) * np.exp(log_x[:-1]) - beta
    bad = np.flatnonzero(coeff <= 0)
    if bad.size:
        raise ValueError(f"(1+beta)x_n - beta is nonpositive at n={bad[0] + 1} (beta={beta})")
    steps = np.log(coeff) + log_lam[1:] - math.log(1 + beta) - log_big[:-1]
    log_values = np.concatenate(([0.0], np.cumsum(steps)))
    with np.errstate(over="ignore"):
        values = np.exp(log_values)
    return RecurrenceTrace(
        kind=RecurrenceKind.REVERSED_W,
        parameters={"p": p, "L": L, "beta": beta},
        values=values,
        log_values=log_values,
        weights=w.truncate(N + 1),
    )


def write_trace(trace: RecurrenceTrace, path: Path) -> None:
    """Dump a trace as whitespace-separated columns with 17 significant digits."""
    columns = {
        "n": np.arange(1, trace.N + 1),
        "value": trace.values,
        "log_value": trace.log_values,
    }
    for name in ("barrier", "margins"):
        extra = getattr(trace, name)
        if extra is not None:
            padded = np.full(trace.N, np.nan)
            padded[: len(extra)] = extra
            columns[name.rstrip("s")] = padded
    header = f"kind={trace.kind.value} " + " ".join(
        f"{k}={v!r}" for k, v in trace.parameters.items()
    )
    np.savetxt(
        path,
        np.column_stack(list(columns.values())),
        fmt="%.17g",
        header=header + "\n" + " ".join(columns),
    )
    logger.info("Wrote %s trace with %d rows to %s", trace.kind.value, trace.N, path)
