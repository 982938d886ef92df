# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""ℓ^p operator norms of truncated weighted mean matrices.

Three independent estimators are provided:

- ``exact_l2_norm``: p = 2 only, smallest eigenvalue of the tridiagonal inverse Gram matrix.
- ``estimate_pnorm``: nonlinear power iteration on the nonnegative cone.
- ``norm_via_eta_bisection``: bisection on the Lagrange multiplier using the η recurrence.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

import recurrences
from weights import WeightSequence, lambda_ratios

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
RESIDUAL_TOL = 1e-8

Matvec = Callable[[np.ndarray], np.ndarray]


class BracketError(ArithmeticError):
    """The η-bisection bracket could not be established."""


class NormMethod(str, Enum):
    """Estimators for the truncated operator norm."""

    EIGEN = "eigen"
    POWER_ITERATION = "power-iteration"
    ETA_BISECTION = "eta-bisection"
    COPSON = "copson"


@dataclass
class NormEstimate:
    """Estimate of ``||A_N||_{p,p}`` with its maximizing vector.

    ``history`` holds the norm estimate after every iteration (power iteration) or the
    upper end of the bracket after every halving (bisection).
    """

    p: float
    N: int
    norm: float
    maximizer: np.ndarray = field(repr=False)
    residual: float
    iterations: int
    converged: bool
    method: NormMethod
    history: list[float] = field(default_factory=list, repr=False)


def _check_p(p: float) -> None:
    if not p > 1:
        raise ValueError(f"operator norms need p > 1, got p={p}")


def _prefix(w: WeightSequence, n: int) -> tuple[np.ndarray, np.ndarray]:
    if n > w.N:
        raise ValueError(f"vector of length {n} exceeds the {w.N} available weights")
    if n < 1:
        raise ValueError("vector must be nonempty")
    return w.lam[:n], w.Lam[:n]


def _lp(x: np.ndarray, p: float) -> float:
    # scale first so x**p stays in range
    m = float(np.max(np.abs(x)))
    if m == 0:
        return 0.0
    return m * float(np.sum((np.abs(x) / m) ** p)) ** (1 / p)


def apply_forward(w: WeightSequence, a: np.ndarray) -> np.ndarray:
    """Return ``A_n = (1/Λ_n) Σ_{k≤n} λ_k a_k`` for ``n = 1..len(a)``."""
    a = np.asarray(a, dtype=float)
    lam, Lam = _prefix(w, len(a))
    return np.cumsum(lam * a) / Lam


def apply_adjoint(w: WeightSequence, b: np.ndarray) -> np.ndarray:
    """Return ``λ_n Σ_{k≥n} b_k/Λ_k`` for ``n = 1..len(b)``."""
    b = np.asarray(b, dtype=float)
    lam, Lam = _prefix(w, len(b))
    return lam * np.cumsum((b / Lam)[::-1])[::-1]


def _residual(forward: Matvec, adjoint: Matvec, p: float, x: np.ndarray) -> float:
    if np.any(x <= 0):
        raise ValueError("stationarity residual needs an entrywise positive vector")
    x = x / np.max(x)
    y = forward(x)
    mu = np.sum(y**p) / np.sum(x**p)
    rhs = adjoint(y ** (p - 1))
    if np.any(rhs <= 0):
        raise ZeroDivisionError("stationarity right-hand side vanishes")
    return float(np.max(np.abs(mu * x ** (p - 1) - rhs) / rhs))


def stationarity_residual(w: WeightSequence, p: float, x: np.ndarray) -> float:
    """Relative residual of the Lagrange system ``μ x_k^{p−1}/λ_k = Σ_{n≥k} A_n^{p−1}/Λ_n``.

    ``μ`` is the Rayleigh-type quotient ``||Ax||_p^p/||x||_p^p``. Each equation is
    normalized by its right-hand side and the maximum deviation is returned.
    """
    _check_p(p)
    x = np.asarray(x, dtype=float)
    lam, _ = _prefix(w, len(x))
    zero = np.flatnonzero(lam == 0)
    if zero.size:
        raise ZeroDivisionError(f"lambda_{zero[0] + 1} = 0, stationarity system undefined")
    return _residual(lambda v: apply_forward(w, v), lambda v: apply_adjoint(w, v), p, x)


def _power_iteration(
    forward: Matvec,
    adjoint: Matvec,
    p: float,
    N: int,  # noqa: N803
    tol: float,
    max_iter: int,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, list[float], bool, float]:
    x = np.ones(N) if x0 is None else np.asarray(x0, dtype=float).copy()
    x /= _lp(x, p)
    history: list[float] = []
    residual = math.inf
    for _ in range(max_iter):
        y = forward(x)
        history.append(_lp(y, p))
        z = adjoint((y / np.max(y)) ** (p - 1))
        x_next = (z / np.max(z)) ** (1 / (p - 1))
        x_next /= _lp(x_next, p)
        if len(history) > 1 and abs(history[-1] - history[-2]) <= tol * history[-1]:
            residual = _residual(forward, adjoint, p, x_next)
            if residual < RESIDUAL_TOL:
                history.append(_lp(forward(x_next), p))
                return x_next, history, True, residual
        x = x_next
    if not math.isfinite(residual):
        residual = _residual(forward, adjoint, p, x)
    return x, history, False, residual


def estimate_pnorm(
    w: WeightSequence,
    p: float,
    N: int,  # noqa: N803
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> NormEstimate:
    """Estimate ``||A_N||_{p,p}`` by nonlinear power iteration.

    Each step maps ``x ↦ (Aᵗ (Ax)^{p−1})^{1/(p−1)}`` and renormalizes to the unit
    ℓ^p sphere, starting from the uniform positive vector.

    Args:
        w: weights; at least ``N`` of them, all positive.
        p: exponent, ``p > 1``.
        N: truncation order.
        tol: relative change of the norm estimate that stops the iteration.
        max_iter: iteration cap.

    Returns:
        The estimate. ``converged`` is False when ``max_iter`` ran out before the
        norm settled and the stationarity residual fell below 1e-8.
    """
    _check_p(p)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    w = w.truncate(N)
    lambda_ratios(w)
    x, history, converged, residual = _power_iteration(
        lambda v: apply_forward(w, v), lambda v: apply_adjoint(w, v), p, N, tol, max_iter
    )
    if not converged:
        logger.warning(
            "Power iteration for p=%s N=%d stopped after %d steps (residual %.3g)",
            p,
            N,
            len(history),
            residual,
        )
    logger.debug(
        "Power iteration p=%s N=%d: %d steps, norm %.17g", p, N, len(history), history[-1]
    )
    return NormEstimate(
        p=p,
        N=N,
        norm=history[-1],
        maximizer=x,
        residual=residual,
        iterations=len(history),
        converged=converged,
        method=NormMethod.POWER_ITERATION,
        history=history,
    )


def estimate_adjoint_pnorm(
    w: WeightSequence,
    q: float,
    N: int,  # noqa: N803
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> NormEstimate:
    """Estimate ``||Aᵗ_N||_{q,q}``, the constant of the Copson-type dual sum.

    The dual sum is ``Σ_n (λ_n Σ_{k≥n} a_k/Λ_k)^q``. By duality the result equals
    ``estimate_pnorm`` at the conjugate exponent ``p = q/(q−1)``.
    """
    _check_p(q)
    w = w.truncate(N)
    lambda_ratios(w)
    x, history, converged, residual = _power_iteration(
        lambda v: apply_adjoint(w, v), lambda v: apply_forward(w, v), q, N, tol, max_iter
    )
    if not converged:
        logger.warning("Adjoint power iteration for q=%s N=%d did not converge", q, N)
    return NormEstimate(
        p=q,
        N=N,
        norm=history[-1],
        maximizer=x,
        residual=residual,
        iterations=len(history),
        converged=converged,
        method=NormMethod.COPSON,
        history=history,
    )


def inverse_gram_tridiagonal(w: WeightSequence, N: int) -> tuple[np.ndarray, np.ndarray]:  # noqa: N803
    """Diagonal and off-diagonal of ``A⁻¹A⁻ᵗ = (AᵗA)⁻¹``.

    ``A⁻¹`` is lower bidiagonal with ``Λ_n/λ_n`` on the diagonal and ``−Λ_{n−1}/λ_n``
    below it.
    """
    w = w.truncate(N)
    x = lambda_ratios(w)
    prev = np.concatenate(([0.0], w.Lam[:-1])) / w.lam
    diag = x**2 + prev**2
    offdiag = -(w.Lam[:-1] ** 2) / (w.lam[:-1] * w.lam[1:])
    return diag, offdiag


def exact_l2_norm(w: WeightSequence, N: int) -> NormEstimate:  # noqa: N803
    """Return ``||A_N||_{2,2}`` from the smallest eigenvalue of ``(AᵗA)⁻¹``.

    The eigenvalue is located by Sturm-sequence bisection; its eigenvector is the
    maximizer, since ``(AᵗA)⁻¹`` and ``AᵗA`` share eigenvectors.
    """
    diag, offdiag = inverse_gram_tridiagonal(w, N)
    vals, vecs = scipy.linalg.eigh_tridiagonal(
        diag,
        offdiag,
        select="i",
        select_range=(0, 0),
        lapack_driver="stebz",
        tol=2 * np.finfo(float).tiny,
    )
    smallest = float(vals[0])
    if smallest <= 0:
        raise ArithmeticError(f"inverse Gram matrix lost positivity: eigenvalue {smallest}")
    v = np.abs(vecs[:, 0])
    v /= np.linalg.norm(v)
    w = w.truncate(N)
    residual = _residual(lambda u: apply_forward(w, u), lambda u: apply_adjoint(w, u), 2.0, v)
    norm = smallest ** -0.5
    logger.debug("Tridiagonal bisection N=%d: lambda_min %.17g", N, smallest)
    return NormEstimate(
        p=2.0,
        N=N,
        norm=norm,
        maximizer=v,
        residual=residual,
        iterations=1,
        converged=True,
        method=NormMethod.EIGEN,
        history=[norm],
    )


def quadratic_form_matrix(w: WeightSequence, N: int) -> np.ndarray:  # noqa: N803
    """Dense Gram matrix ``AᵗA`` with entries ``λ_iλ_j Σ_{k≥max(i,j)} 1/Λ_k²``.

    Its top eigenvalue is ``||A_N||_{2,2}²``. Quadratic in ``N``; meant for small
    cross-checks.
    """
    w = w.truncate(N)
    tail = np.cumsum((1 / w.Lam**2)[::-1])[::-1]
    idx = np.arange(N)
    return np.outer(w.lam, w.lam) * tail[np.maximum.outer(idx, idx)]


def _eta_maximizer(w: WeightSequence, p: float, mu: float) -> np.ndarray:
    # Forward solve of the Lagrange system at multiplier mu, starting from a_1 = 1
    N = w.N  # noqa: N806
    a = np.empty(N)
    a[0] = 1.0
    big_a = 1.0
    t = mu / w.lam[0]
    for k in range(1, N):
        t -= big_a ** (p - 1) / w.Lam[k - 1]
        if t <= 0:
            raise BracketError(f"multiplier {mu} escapes at k={k}")
        a[k] = (w.lam[k] * t / mu) ** (1 / (p - 1))
        big_a = (w.Lam[k - 1] * big_a + w.lam[k] * a[k]) / w.Lam[k]
    return a / _lp(a, p)


def norm_via_eta_bisection(
    w: WeightSequence,
    p: float,
    N: int,  # noqa: N803
    tol: float = 1e-13,
    max_iter: int = 200,
) -> NormEstimate:
    """Locate the multiplier ``μ_N = ||A_N||^p`` where ``η_N(μ) = (Λ_N/λ_N)^p``.

    ``η_N`` decreases in ``μ``; a multiplier whose recurrence escapes before or at
    ``N`` is too small. The bracket starts at ``[1, ||A_N||_{1,1}]`` (the upper end
    from Riesz–Thorin, since the row sums are 1) and is widened if needed.

    Raises:
        BracketError: when no non-escaping upper end is found.
    """
    _check_p(p)
    w = w.truncate(N)
    lambda_ratios(w)

    def too_small(mu: float) -> bool:
        return recurrences.eta_escapes(w, p, mu, N)

    lo = 1.0
    hi = max(1.0, float(np.max(apply_adjoint(w, np.ones(N))))) * (1 + 1e-9)
    for _ in range(64):
        if not too_small(hi):
            break
        logger.debug("Widening eta bracket: mu=%s still escapes", hi)
        lo, hi = hi, 2 * hi
    else:
        logger.error("No non-escaping multiplier found for p=%s N=%d", p, N)
        raise BracketError(f"eta recurrence escapes up to mu={hi}")
    if not too_small(lo):
        logger.warning("Lower end mu=%s does not escape; bracket anomaly", lo)
        raise BracketError(f"eta recurrence does not escape at the lower end mu={lo}")

    history = [hi]
    converged = False
    for _ in range(max_iter):
        if hi - lo <= tol * hi:
            converged = True
            break
        mid = math.sqrt(lo * hi) if hi > 4 * lo else (lo + hi) / 2
        if too_small(mid):
            lo = mid
        else:
            hi = mid
        history.append(hi)
    if not converged:
        logger.warning("Eta bisection for p=%s N=%d stopped with width %.3g", p, N, hi - lo)

    x = _eta_maximizer(w, p, hi)
    residual = stationarity_residual(w, p, x)
    return NormEstimate(
        p=p,
        N=N,
        norm=((lo + hi) / 2) ** (1 / p),
        maximizer=x,
        residual=residual,
        iterations=len(history),
        converged=converged,
        method=NormMethod.ETA_BISECTION,
        history=[h ** (1 / p) for h in history],
    )
