# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Weight sequences of weighted mean matrices.

A weighted mean matrix has entries ``λ_k/Λ_n`` for ``k ≤ n`` where ``Λ_n`` is the
prefix sum of the weights. Everything downstream consumes the ratio ``Λ_n/λ_n``.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import NamedTuple

import numpy as np

logger = logging.getLogger(__name__)


class WeightKind(str, Enum):
    """Families of weight sequences."""

    CONSTANT = "constant"
    POWER = "power"
    GEOMETRIC = "geometric"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class WeightSpec:
    """Unevaluated description of a weight family.

    Parsed from the ``KIND[:PARAM]`` strings accepted by the command line, e.g.
    ``power:0.5``, ``geometric:2``, ``list:1,2,3`` or ``file:weights.txt``.
    """

    kind: WeightKind
    param: float | None = None
    values: tuple[float, ...] = ()
    source: str = ""

    @classmethod
    def parse(cls, text: str) -> "WeightSpec":
        """Parse a ``KIND[:PARAM]`` weight description."""
        tag, _, arg = text.strip().partition(":")
        tag = tag.strip().lower()
        if tag in ("constant", "cesaro"):
            if arg:
                raise ValueError(f"constant weights take no parameter, got {arg!r}")
            return cls(WeightKind.CONSTANT, source=text)
        if tag in ("power", "geometric"):
            try:
                param = float(arg)
            except ValueError:
                raise ValueError(f"{tag} weights need a numeric parameter, got {arg!r}") from None
            spec = cls(WeightKind(tag), param=param, source=text)
            spec.validate()
            return spec
        if tag == "list":
            values = tuple(float(v) for v in arg.split(",") if v.strip())
            spec = cls(WeightKind.EXPLICIT, values=values, source=text)
            spec.validate()
            return spec
        if tag == "file":
            return cls.from_file(Path(arg))
        raise ValueError(f"unknown weight kind {tag!r}")

    @classmethod
    def from_file(cls, path: Path) -> "WeightSpec":
        """Load explicit weights from a one-column numeric text file.

        Blank lines and ``#`` comments are ignored.
        """
        values = []
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
        logger.debug("Loaded %d explicit weights from %s", len(values), path)
        spec = cls(WeightKind.EXPLICIT, values=tuple(values), source=f"file:{path}")
        spec.validate()
        return spec

    def validate(self) -> None:
        """Reject parameters outside the admissible family."""
        if self.kind is WeightKind.POWER and (self.param is None or self.param <= -1):
            raise ValueError(f"power weights need alpha > -1, got {self.param}")
        if self.kind is WeightKind.GEOMETRIC and (self.param is None or self.param <= 0):
            raise ValueError(f"geometric weights need r > 0, got {self.param}")
        if self.kind is WeightKind.EXPLICIT:
            if not self.values:
                raise ValueError("explicit weight list is empty")
            if self.values[0] <= 0:
                raise ValueError(f"first weight must be positive, got {self.values[0]}")
            negative = [i + 1 for i, v in enumerate(self.values) if v < 0]
            if negative:
                raise ValueError(f"weights must be nonnegative, negative at n={negative[0]}")

    @property
    def alpha(self) -> float | None:
        """Exponent of the power family, None for the other kinds."""
        if self.kind is WeightKind.CONSTANT:
            return 0.0
        return self.param if self.kind is WeightKind.POWER else None

    def __str__(self) -> str:
        if self.kind is WeightKind.CONSTANT:
            return "constant"
        if self.kind is WeightKind.EXPLICIT:
            return self.source or "list:" + ",".join(repr(v) for v in self.values)
        return f"{self.kind.value}:{self.param!r}"


class CompensatedSum:
    """Running sum with Neumaier's error-compensation term."""

    def __init__(self):
        self.total = 0.0
        self.carry = 0.0

    def add(self, value: float) -> float:
        """Add ``value`` and return the compensated running total."""
        t = self.total + value
        if abs(self.total) >= abs(value):
            self.carry += (self.total - t) + value
        else:
            self.carry += (value - t) + self.total
        self.total = t
        return t + self.carry


def compensated_prefix_sums(values: np.ndarray) -> np.ndarray:
    """Prefix sums of ``values`` with compensated accumulation."""
    acc = CompensatedSum()
    return np.fromiter((acc.add(float(v)) for v in values), dtype=float, count=len(values))


@dataclass(frozen=True)
class WeightSequence:
    """Weights ``λ_1..λ_N`` with their prefix sums ``Λ_1..Λ_N``.

    Arrays are read-only; a sequence can be shared between concurrent evaluations.
    Indices in the public helpers are 1-based, as in the underlying mathematics.
    """

    spec: WeightSpec
    lam: np.ndarray = field(repr=False)
    Lam: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.lam.setflags(write=False)
        self.Lam.setflags(write=False)

    @property
    def kind(self) -> WeightKind:
        return self.spec.kind

    @property
    def N(self) -> int:  # noqa: N802
        return len(self.lam)

    def truncate(self, N: int) -> "WeightSequence":  # noqa: N803
        """Return the first ``N`` weights."""
        if not 1 <= N <= self.N:
            raise ValueError(f"cannot truncate {self.N} weights to N={N}")
        if N == self.N:
            return self
        return WeightSequence(self.spec, self.lam[:N].copy(), self.Lam[:N].copy())

    def scaled(self, c: float) -> "WeightSequence":
        """Return the sequence with every weight multiplied by ``c > 0``."""
        if c <= 0:
            raise ValueError(f"scale factor must be positive, got {c}")
        lam = self.lam * c
        return WeightSequence(self.spec, lam, compensated_prefix_sums(lam))


def make_weights(spec: WeightSpec | str, N: int) -> WeightSequence:  # noqa: N803
    """Evaluate a weight family on ``1..N``.

    Args:
        spec: weight family, or its ``KIND[:PARAM]`` text form.
        N: number of weights.

    Returns:
        The populated sequence; ``Λ`` is accumulated with compensated summation.
    """
    if isinstance(spec, str):
        spec = WeightSpec.parse(spec)
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    spec.validate()

    n = np.arange(1, N + 1, dtype=float)
    if spec.kind is WeightKind.CONSTANT:
        lam = np.ones(N)
    elif spec.kind is WeightKind.POWER:
        lam = n ** spec.param
    elif spec.kind is WeightKind.GEOMETRIC:
        lam = spec.param**n
    else:
        if len(spec.values) < N:
            raise ValueError(f"explicit list holds {len(spec.values)} weights, {N} requested")
        lam = np.array(spec.values[:N], dtype=float)

    if not np.all(np.isfinite(lam)):
        raise ValueError(f"weights {spec} overflow before n={N}")
    logger.debug("Built %d weights of kind %s", N, spec)
    return WeightSequence(spec, lam, compensated_prefix_sums(lam))


def lambda_ratio(w: WeightSequence, n: int) -> float:
    """Return ``Λ_n/λ_n`` for the 1-based index ``n``."""
    if not 1 <= n <= w.N:
        raise IndexError(f"index n={n} outside 1..{w.N}")
    if w.lam[n - 1] == 0:
        raise ZeroDivisionError(f"lambda_{n} = 0, ratio undefined")
    return float(w.Lam[n - 1] / w.lam[n - 1])


def lambda_ratios(w: WeightSequence) -> np.ndarray:
    """Return the vector ``(Λ_n/λ_n)_{n≤N}``; every weight must be positive."""
    zero = np.flatnonzero(w.lam == 0)
    if zero.size:
        raise ZeroDivisionError(f"lambda_{zero[0] + 1} = 0, ratio undefined")
    return w.Lam / w.lam


class PowerSumBounds(NamedTuple):
    """Two-sided closed-form bounds on ``Σ_{i≤n} i^r``."""

    lower: float
    upper: float
    extended: bool


def power_sum_bounds(n: int, r: float) -> PowerSumBounds:
    """Closed-form bracket of ``Σ_{i≤n} i^r`` for ``0 ≤ r ≤ 1``.

    ``lower = n(n+1)^r/(r+1)`` and ``upper = (r/(r+1)) n^r(n+1)^r/((n+1)^r − n^r)``.
    At ``r = 0`` both sides equal ``n``. For ``−1 < r < 0`` the values are still
    returned with ``extended=True``; only the upper bound is guaranteed there.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not -1 < r <= 1:
        raise ValueError(f"r must lie in (-1, 1], got {r}")
    extended = r < 0
    if extended:
        logger.debug("power_sum_bounds: r=%s is in the extended regime", r)
    lower = n * (n + 1) ** r / (r + 1)
    if r == 0:
        return PowerSumBounds(float(n), float(n), extended)
    # (n+1)^r - n^r = n^r * expm1(u), u = r log(1 + 1/n); r/expm1(u) -> 1/log_step as u -> 0
    log_step = math.log1p(1 / n)
    u = r * log_step
    relative_gap = math.expm1(u) / u if u != 0 else 1.0
    upper = (n + 1) ** r / ((r + 1) * log_step * relative_gap)
    return PowerSumBounds(lower, upper, extended)
