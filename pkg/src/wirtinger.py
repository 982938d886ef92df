# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Discrete Wirtinger-type quadratic forms.

``Q(x) = b²x_1² + Σ_{n<N} (a x_n − b x_{n+1})² + a²x_N²`` is ``xᵗTx`` for the symmetric
tridiagonal ``T`` with ``a²+b²`` on the diagonal and ``−ab`` beside it, whose spectrum
is known in closed form.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

SPECTRUM_TOL = 1e-9
IDENTITY_TOL = 1e-12


class SpectrumMismatchError(ArithmeticError):
    """A closed-form spectrum or telescoping identity failed its numeric cross-check."""


def _check_ab(a: float, b: float) -> None:
    if not (a > 0 and b > 0):
        raise ValueError(f"a and b must be positive, got a={a}, b={b}")


@dataclass(frozen=True)
class TridiagonalForm:
    """Matrix of the quadratic form for given ``a``, ``b`` and dimension ``N``."""

    a: float
    b: float
    N: int

    def __post_init__(self):
        _check_ab(self.a, self.b)
        if self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")

    @property
    def diagonal(self) -> np.ndarray:
        return np.full(self.N, self.a**2 + self.b**2)

    @property
    def offdiag(self) -> np.ndarray:
        return np.full(self.N - 1, -self.a * self.b)

    @property
    def t(self) -> float:
        return math.pi / (self.N + 1)

    def matrix(self) -> np.ndarray:
        """Dense copy of ``T``."""
        return (
            np.diag(self.diagonal) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        )


def wirtinger_constants(a: float, b: float, N: int) -> tuple[float, float]:  # noqa: N803
    """Extreme eigenvalues ``a²+b² ∓ 2ab cos(π/(N+1))``.

    For ``a = b = 1`` the lower constant is ``4 sin²(π/(2N+2))``, the discrete
    Wirtinger constant of Fan, Taussky and Todd; the upper one gives Milovanović's
    converse.
    """
    form = TridiagonalForm(a, b, N)
    lower = (a - b) ** 2 + 4 * a * b * math.sin(form.t / 2) ** 2
    upper = a**2 + b**2 + 2 * a * b * math.cos(form.t)
    return lower, upper


def _closed_form(a: float, b: float, N: int) -> np.ndarray:  # noqa: N803
    k = np.arange(N, 0, -1)
    return a**2 + b**2 + 2 * a * b * np.cos(k * math.pi / (N + 1))


def tridiag_spectrum(a: float, b: float, N: int) -> np.ndarray:  # noqa: N803
    """Eigenvalues ``a² + b² + 2ab cos(kπ/(N+1))``, ``k = 1..N``, ascending.

    The closed form is the result; a Sturm-bisection eigensolve cross-checks it.

    Raises:
        SpectrumMismatchError: when the two disagree by more than 1e-9 (relative to
            ``a² + b²`` when that exceeds 1).
    """
    form = TridiagonalForm(a, b, N)
    closed = _closed_form(a, b, N)
    numeric = scipy.linalg.eigvalsh_tridiagonal(
        form.diagonal, form.offdiag, lapack_driver="stebz"
    )
    gap = float(np.max(np.abs(np.sort(numeric) - closed)))
    if gap > SPECTRUM_TOL * max(1.0, a**2 + b**2):
        logger.error("Spectrum mismatch a=%s b=%s N=%d: %.3g", a, b, N, gap)
        raise SpectrumMismatchError(f"closed-form and bisection spectra differ by {gap}")
    logger.debug("Spectrum a=%s b=%s N=%d agrees to %.3g", a, b, N, gap)
    return closed


def quadratic_form(a: float, b: float, x: np.ndarray) -> float:
    """Evaluate ``b²x_1² + Σ_{n<N} (a x_n − b x_{n+1})² + a²x_N²``."""
    x = np.asarray(x, dtype=float)
    if x.size < 1:
        raise ValueError("vector must be nonempty")
    middle = a * x[:-1] - b * x[1:]
    return float(b**2 * x[0] ** 2 + np.dot(middle, middle) + a**2 * x[-1] ** 2)


class LossersMargins(NamedTuple):
    """Slack on each side of ``lower·Σx² ≤ Q(x) ≤ upper·Σx²``."""

    lower_margin: float
    upper_margin: float


def lossers_bounds_check(a: float, b: float, x: np.ndarray) -> LossersMargins:
    """Margins of the two-sided bound on ``Q(x)`` by the extreme eigenvalues."""
    x = np.asarray(x, dtype=float)
    lower, upper = wirtinger_constants(a, b, x.size)
    q = quadratic_form(a, b, x)
    norm2 = float(np.dot(x, x))
    return LossersMargins(q - lower * norm2, upper * norm2 - q)


@dataclass
class RedhefferTrace:
    """Telescoping multipliers ``μ_n`` and the per-coordinate coefficients they produce.

    Splitting each middle square with ``μ_n`` turns ``Q(x)`` into
    ``Σ coefficients_k x_k²`` plus squares of fixed sign; every coefficient equals
    ``constant``.
    """

    a: float
    b: float
    N: int
    sign: int
    mu: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    constant: float
    max_error: float


def redheffer_mu(a: float, b: float, N: int, sign: int = 1) -> RedhefferTrace:  # noqa: N803
    """Multipliers ``μ_n = a² ± ab sin((n+1)t)/sin(nt)``, ``t = π/(N+1)``, ``n < N``.

    With ``sign = +1`` the squares are subtracted and the identity gives the upper
    bound; ``sign = −1`` gives the lower bound. Sines are evaluated after reducing
    ``kt`` to ``min(k, N+1−k)t``. For ``sign = −1`` the difference of sines is taken
    as ``−2 cos((n+½)t) sin(t/2)``, so ``μ_n`` keeps full relative accuracy near zero.

    Raises:
        SpectrumMismatchError: when a coefficient misses the extreme eigenvalue by more
            than 1e-12 relative to ``a² + b²``.
    """
    _check_ab(a, b)
    if N < 2:
        raise ValueError(f"telescoping needs N >= 2, got {N}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    t = math.pi / (N + 1)
    k = np.arange(0, N + 1)
    s = np.sin(np.minimum(k, N + 1 - k) * t)
    if np.any(s[1:N] == 0):
        raise ZeroDivisionError("sin(nt) vanished inside 1..N-1")
    n = k[1:N]
    ratio = s[2 : N + 1] / s[1:N]
    shift = sign * a * b * ratio
    if sign > 0:
        mu = a * (a * s[1:N] + b * s[2 : N + 1]) / s[1:N]
    else:
        gap = 2 * b * np.cos((n + 0.5) * t) * math.sin(t / 2)
        mu = a * ((a - b) * s[1:N] - gap) / s[1:N]
    carry = b**2 * mu / shift

    head = np.array([b**2 + mu[0]])
    body = mu[1:] + carry[:-1]
    tail = np.array([a**2 + carry[-1]])
    coefficients = np.concatenate((head, body, tail))
    lower, upper = wirtinger_constants(a, b, N)
    constant = upper if sign > 0 else lower

    errors = np.abs(coefficients - constant) / (a**2 + b**2)
    max_error = float(np.max(errors))
    if max_error > IDENTITY_TOL:
        logger.error("Telescoping identity broken at k=%d", int(np.argmax(errors)) + 1)
        raise SpectrumMismatchError(f"telescoping identity off by {max_error}")
    logger.debug("Telescoping sign=%+d N=%d holds to %.3g", sign, N, max_error)
    return RedhefferTrace(a, b, N, sign, mu, coefficients, constant, max_error)


def write_spectrum(a: float, b: float, N: int, path: Path) -> None:  # noqa: N803
    """Dump the closed-form and bisection spectra side by side."""
    form = TridiagonalForm(a, b, N)
    numeric = np.sort(
        scipy.linalg.eigvalsh_tridiagonal(form.diagonal, form.offdiag, lapack_driver="stebz")
    )
    np.savetxt(
        path,
        np.column_stack((np.arange(1, N + 1), tridiag_spectrum(a, b, N), numeric)),
        fmt="%.17g",
        header=f"a={a!r} b={b!r} N={N}\nk closed_form bisection",
    )
    logger.info("Wrote spectrum of order %d to %s", N, path)
