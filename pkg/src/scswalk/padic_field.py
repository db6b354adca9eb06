"""Truncated Laurent series over F_p, a model of the local field F_p((T)).

A series is known on the window ``[low, high)``: digits below ``low`` are zero
and everything from ``high`` on is unknown. Exact series (finite Laurent
polynomials, such as ``T^k`` or sampled digit strings treated as exact)
carry ``high = None``. Addition is digitwise mod ``p`` with no carries.
"""
from __future__ import annotations

import cmath
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PrecisionError",
    "FieldError",
    "EnumerationBoundError",
    "DEFAULT_ENUMERATION_BOUND",
    "add",
    "mul",
    "neg",
    "Exhausted",
    "PRECISION_EXHAUSTED",
    "LaurentSeries",
    "additive_character",
    "sample_haar_O",
    "sample_unit",
    "averaging_expectation_exact",
    "min_plus_law_distance",
    "check_prime",
]


class PrecisionError(ArithmeticError):
    """A digit or operation needs precision the series does not carry."""


class FieldError(ValueError):
    """Mismatched or invalid field data."""


class EnumerationBoundError(RuntimeError):
    """An exact enumeration would exceed its configured size."""


DEFAULT_ENUMERATION_BOUND = 3**8


class Exhausted(Enum):
    """Marker returned when every known digit is zero."""

    PRECISION_EXHAUSTED = "precision exhausted"


PRECISION_EXHAUSTED = Exhausted.PRECISION_EXHAUSTED


def check_prime(p: int) -> int:
    p = int(p)
    if p < 2 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
        raise FieldError(f"{p} is not prime")
    return p


def _min_high(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass(frozen=True)
class LaurentSeries:
    p: int
    low: int
    digits: tuple[int, ...]
    exact: bool = False

    def __post_init__(self):
        if not self.digits:
            raise PrecisionError("empty precision window")
        if any(not 0 <= d < self.p for d in self.digits):
            raise FieldError(f"digits must lie in [0, {self.p})")

    # constructors
    @classmethod
    def from_digits(cls, p: int, low: int, digits: Iterable[int], exact: bool = False) -> "LaurentSeries":
        return cls(p, int(low), tuple(int(d) % p for d in digits), exact)

    @classmethod
    def monomial(cls, p: int, k: int, coeff: int = 1) -> "LaurentSeries":
        """Exact ``coeff * T^k``."""
        return cls(p, int(k), (int(coeff) % p,), True)

    @classmethod
    def one(cls, p: int) -> "LaurentSeries":
        return cls.monomial(p, 0, 1)

    @classmethod
    def zero(cls, p: int, high: int | None = None) -> "LaurentSeries":
        """Zero, exact or known only modulo ``T^high``."""
        if high is None:
            return cls(p, 0, (0,), True)
        return cls(p, high - 1, (0,), False)

    @property
    def high(self) -> int | None:
        return None if self.exact else self.low + len(self.digits)

    @property
    def top(self) -> int:
        """One past the last stored digit (equals ``high`` for inexact series)."""
        return self.low + len(self.digits)

    def digit(self, k: int) -> int:
        if k < self.low:
            return 0
        if k >= self.top:
            if self.exact:
                return 0
            raise PrecisionError(f"digit T^{k} unknown: series known below T^{self.high}")
        return self.digits[k - self.low]

    def valuation(self) -> int | Exhausted:
        for i, d in enumerate(self.digits):
            if d:
                return self.low + i
        return PRECISION_EXHAUSTED

    def normalized(self) -> "LaurentSeries":
        """Same element with leading zero digits removed from the window."""
        v = self.valuation()
        if v is PRECISION_EXHAUSTED:
            return self
        return LaurentSeries(self.p, v, self.digits[v - self.low:], self.exact)

    def truncate(self, high: int) -> "LaurentSeries":
        """Forget everything from ``T^high`` on."""
        if self.high is not None and high >= self.high:
            return self
        if high <= self.low:
            return LaurentSeries.zero(self.p, high)
        digits = tuple(self.digit(k) for k in range(self.low, high))
        return LaurentSeries(self.p, self.low, digits, False)

    def _check(self, other: "LaurentSeries") -> None:
        if not isinstance(other, LaurentSeries):
            raise TypeError(f"cannot combine LaurentSeries with {type(other).__name__}")
        if other.p != self.p:
            raise FieldError(f"residue characteristic mismatch: {self.p} vs {other.p}")

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        self._check(other)
        low = min(self.low, other.low)
        high = _min_high(self.high, other.high)
        exact = high is None
        top = max(self.top, other.top) if exact else high
        digits = tuple((self.digit(k) + other.digit(k)) % self.p for k in range(low, top))
        return LaurentSeries(self.p, low, digits, exact)

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.p, self.low, tuple((-d) % self.p for d in self.digits), self.exact)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        self._check(other)
        p = self.p
        low = self.low + other.low
        if self.exact and other.exact:
            high = None
        elif self.exact:
            high = self.low + other.high
        elif other.exact:
            high = other.low + self.high
        else:
            high = min(self.low + other.high, other.low + self.high)
        exact = high is None
        top = self.top + other.top - 1 if exact else high
        length = top - low
        out = [0] * length
        a, b = self.digits, other.digits
        for i, x in enumerate(a):
            if not x or i >= length:
                continue
            lim = min(len(b), length - i)
            for j in range(lim):
                y = b[j]
                if y:
                    out[i + j] = (out[i + j] + x * y) % p
        return LaurentSeries(p, low, tuple(out), exact)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by ``T^k``."""
        return LaurentSeries(self.p, self.low + int(k), self.digits, self.exact)

    def inverse(self, precision: int | None = None) -> "LaurentSeries":
        """Inverse of ``T^v * unit`` to relative precision ``precision``.

        The relative precision defaults to that of ``self``; exact inputs
        need an explicit ``precision``.
        """
        s = self.normalized()
        v = s.valuation()
        if v is PRECISION_EXHAUSTED:
            raise PrecisionError("cannot invert a series that is zero to known precision")
        rel = len(s.digits) if not s.exact else None
        if precision is not None:
            rel = precision if rel is None else min(rel, precision)
        if rel is None:
            if len(s.digits) == 1:
                return LaurentSeries(self.p, -v, (pow(s.digits[0], -1, self.p),), True)
            raise PrecisionError("inverse of an exact non-monomial needs a precision")
        p = self.p
        a = [s.digit(v + k) if (s.exact or v + k < s.top) else 0 for k in range(rel)]
        a0inv = pow(a[0], -1, p)
        b = [0] * rel
        for k in range(rel):
            acc = 1 if k == 0 else 0
            for j in range(1, k + 1):
                acc -= a[j] * b[k - j]
            b[k] = (acc * a0inv) % p
        return LaurentSeries(p, -v, tuple(b), False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        if self.p != other.p or self.exact != other.exact:
            return False
        if self.exact:
            lo = min(self.low, other.low)
            hi = max(self.top, other.top)
        else:
            if self.high != other.high:
                return False
            lo, hi = min(self.low, other.low), self.high
        return all(self.digit(k) == other.digit(k) for k in range(lo, hi))

    def __hash__(self):
        return hash((self.p, self.exact, self.high))

    def agrees_with(self, other: "LaurentSeries") -> bool:
        """Digits agree wherever both series are known."""
        self._check(other)
        hi = _min_high(self.high, other.high)
        lo = min(self.low, other.low)
        if hi is None:
            hi = max(self.top, other.top)
        return all(self.digit(k) == other.digit(k) for k in range(lo, hi))

    def __repr__(self) -> str:
        terms = [f"{d}T^{self.low + i}" for i, d in enumerate(self.digits) if d]
        body = " + ".join(terms) if terms else "0"
        return f"LaurentSeries(p={self.p}, {body}{'' if self.exact else f' + O(T^{self.high})'})"


def add(x: LaurentSeries, y: LaurentSeries) -> LaurentSeries:
    return x + y


def mul(x: LaurentSeries, y: LaurentSeries) -> LaurentSeries:
    return x * y


def neg(x: LaurentSeries) -> LaurentSeries:
    return -x


def additive_character(x: LaurentSeries) -> complex:
    """``exp(2 pi i a_{-1} / p)`` where ``a_{-1}`` is the ``T^-1`` digit of ``x``."""
    d = x.digit(-1)
    return cmath.exp(2j * math.pi * d / x.p)


def sample_haar_O(p: int, high: int, rng: np.random.Generator) -> LaurentSeries:
    """Haar-random element of ``F_p[[T]]`` known modulo ``T^high``."""
    if high <= 0:
        return LaurentSeries.zero(p, high)
    return LaurentSeries(p, 0, tuple(int(d) for d in rng.integers(0, p, size=high)), False)


def sample_unit(p: int, high: int, rng: np.random.Generator) -> LaurentSeries:
    """Haar-random unit of ``F_p[[T]]`` known modulo ``T^high``."""
    if high <= 0:
        raise PrecisionError("a unit needs at least one known digit")
    first = int(rng.integers(1, p))
    rest = [int(d) for d in rng.integers(0, p, size=high - 1)]
    return LaurentSeries(p, 0, (first, *rest), False)


def averaging_expectation_exact(x: LaurentSeries, bound: int = DEFAULT_ENUMERATION_BOUND) -> complex:
    """``E[psi(x U)]`` for Haar ``U`` on ``F_p[[T]]``, by enumerating the digits of ``U`` that matter.

    Only the digits of ``U`` below ``T^{-val(x)}`` reach the ``T^-1`` coefficient.
    """
    if x.high is not None and x.high < 0:
        raise PrecisionError("the T^-1 digit of x is unknown")
    v = x.valuation()
    if v is PRECISION_EXHAUSTED or v >= 0:
        return complex(1.0)
    x = x.normalized()
    m = -v
    p = x.p
    if p**m > bound:
        raise EnumerationBoundError(f"{p}^{m} digit tuples exceed the enumeration bound {bound}")
    roots = [cmath.exp(2j * math.pi * k / p) for k in range(p)]
    total = 0j
    for digits in itertools.product(range(p), repeat=m):
        u = LaurentSeries(p, 0, digits, False)
        total += roots[(x * u).digit(-1)]
    return total / p**m


def min_plus_law_distance(
    a: int, b: int, p: int, high: int, bound: int = DEFAULT_ENUMERATION_BOUND**2
) -> Fraction:
    """Exact total-variation distance between the digit laws of two elements.

    Compares ``T^a U + T^b U'`` with ``T^min(a,b) U`` on the digits in
    ``[min(a, b), high)``, for independent Haar ``U, U'``.
    """
    check_prime(p)
    m = min(a, b)
    if high <= m:
        raise PrecisionError("window must contain at least one digit")
    width = high - m
    size = p ** (max(high - a, 0) + max(high - b, 0))
    if size > bound:
        raise EnumerationBoundError(f"{size} digit pairs exceed the enumeration bound {bound}")

    def haar_digits(shift: int):
        n = max(high - shift, 0)
        return itertools.product(range(p), repeat=n)

    def element(shift: int, digits: Sequence[int]) -> LaurentSeries:
        if not digits:
            return LaurentSeries.zero(p, high)
        return LaurentSeries(p, 0, tuple(digits), False).shift(shift)

    counts: Counter = Counter()
    total = 0
    u_list = [element(a, d) for d in haar_digits(a)]
    v_list = [element(b, d) for d in haar_digits(b)]
    for u in u_list:
        for v in v_list:
            s = u + v
            counts[tuple(s.digit(k) for k in range(m, high))] += 1
            total += 1
    target = Fraction(1, p**width)
    tv = Fraction(0)
    for key in itertools.product(range(p), repeat=width):
        tv += abs(Fraction(counts.get(key, 0), total) - target)
    return tv / 2
