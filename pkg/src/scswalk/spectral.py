"""Spectral side: Weyl characters, Gindikin-Karpelevich factor, spherical values.

A spectral parameter ``z`` is stored through ``u[j] = <z, omega_j^vee>``, the
coordinates of ``z`` in the simple-root basis, so ``<z, mu^vee>`` is a dot
product with the fundamental-coweight coordinates of ``mu^vee``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .root_system import RootDatum, weyl_group, weyl_orbit

__all__ = [
    "WALL_TOLERANCE",
    "SpectralError",
    "SpectralPoint",
    "QPower",
    "pair_z",
    "weyl_character",
    "minuscule_character",
    "b_inverse_weyl_denominator",
    "gindikin_karpelevich",
    "modular_character",
    "coset_count_intersection",
    "coset_count_double",
    "macdonald_minuscule",
    "scs_whittaker",
    "normalized_psi",
    "asymptotic_gap",
    "alternating_sum",
]

WALL_TOLERANCE = 1e-6


class SpectralError(ValueError):
    """Spectral parameter outside the admissible region."""


@dataclass(frozen=True)
class SpectralPoint:
    """Real spectral parameter ``z`` for a given root datum."""

    datum: RootDatum
    u: tuple[float, ...]

    def __post_init__(self):
        if len(self.u) != self.datum.rank:
            raise SpectralError(
                f"spectral point needs {self.datum.rank} coordinates, got {len(self.u)}"
            )
        if not all(math.isfinite(float(x)) for x in self.u):
            raise SpectralError("spectral coordinates must be finite")
        object.__setattr__(self, "u", tuple(float(x) for x in self.u))

    @classmethod
    def from_coroot_pairings(cls, datum: RootDatum, pairings: Sequence[float]) -> "SpectralPoint":
        """Point with prescribed ``<z, alpha_i^vee>`` for each simple coroot."""
        a = np.array(datum.cartan, dtype=float)
        u = np.linalg.solve(a.T, np.asarray(pairings, dtype=float))
        return cls(datum, tuple(float(x) for x in u))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.u, dtype=float)

    def pair(self, mu: Sequence[float]) -> float:
        """``<z, mu^vee>`` for a coweight in fundamental-coweight coordinates."""
        return float(np.dot(self.array, np.asarray(mu, dtype=float)))

    @property
    def simple_pairings(self) -> np.ndarray:
        """``<z, alpha_i^vee>`` for the simple coroots."""
        return np.array(self.datum.cartan, dtype=float).T @ self.array

    @property
    def positive_pairings(self) -> np.ndarray:
        """``<z, beta^vee>`` for every positive coroot, in datum order."""
        return self.datum.coroots_array().astype(float) @ self.array

    def is_interior(self, eps: float = WALL_TOLERANCE) -> bool:
        return bool(np.all(self.simple_pairings >= eps))

    def require_interior(self, eps: float = WALL_TOLERANCE) -> None:
        pairings = self.simple_pairings
        if np.any(pairings < eps):
            i = int(np.argmin(pairings))
            raise SpectralError(
                f"spectral point within {eps:g} of wall {i} "
                f"(<z, alpha_{i}^vee> = {pairings[i]:.3g})"
            )


def _as_point(datum: RootDatum, z) -> SpectralPoint:
    if isinstance(z, SpectralPoint):
        if z.datum != datum:
            raise SpectralError("spectral point belongs to a different root datum")
        return z
    return SpectralPoint(datum, tuple(np.atleast_1d(np.asarray(z, dtype=float))))


def pair_z(z: SpectralPoint, mu: Sequence[int]) -> float:
    return z.pair(mu)


def _check_coweight(datum: RootDatum, mu: Sequence[int]) -> tuple[int, ...]:
    if len(mu) != datum.rank:
        raise SpectralError(f"coweight needs {datum.rank} coordinates, got {len(mu)}")
    out = tuple(int(x) for x in mu)
    if any(o != x for o, x in zip(out, mu)):
        raise SpectralError("coweight coordinates must be integers")
    return out


def alternating_sum(datum: RootDatum, v: Sequence[int], z: SpectralPoint) -> tuple[float, float]:
    """``sum_w sign(w) exp(<z, w v - v>)`` returned as ``(mantissa, log_scale)``.

    The sum is ``mantissa * exp(log_scale)``; terms are accumulated in the
    length-then-lexicographic order of the Weyl group.
    """
    table = weyl_group(datum)
    images = table.images(v)
    exps = (images - np.asarray(v, dtype=np.int64)) @ z.array
    scale = float(exps.max())
    total = float(np.sum(table.signs * np.exp(exps - scale)))
    return total, scale


def weyl_character(
    datum: RootDatum, lam: Sequence[int], z, *, require_interior: bool = True
) -> float:
    """Weyl character of the irreducible dual-group representation of highest weight ``lam``.

    Evaluated as a ratio of alternating sums over the Weyl group.
    """
    lam = _check_coweight(datum, lam)
    z = _as_point(datum, z)
    if require_interior:
        z.require_interior()
    elif np.any(np.abs(z.positive_pairings) < WALL_TOLERANCE):
        raise SpectralError("spectral point is not regular")
    if not datum.is_dominant(lam):
        raise SpectralError(f"{lam} is not dominant")
    rho = datum.rho_vee
    shifted = tuple(a + b for a, b in zip(lam, rho))
    num, num_scale = alternating_sum(datum, shifted, z)
    den, den_scale = alternating_sum(datum, rho, z)
    log_shift = z.pair(shifted) - z.pair(rho) + num_scale - den_scale
    return num / den * math.exp(log_shift)


def minuscule_character(datum: RootDatum, lam_minuscule: Sequence[int], z) -> float:
    """Character of a minuscule representation: a plain sum over the orbit."""
    lam = _check_coweight(datum, lam_minuscule)
    z = _as_point(datum, z)
    orbit = np.array(weyl_orbit(datum, lam), dtype=float)
    return float(np.sum(np.exp(orbit @ z.array)))


def b_inverse_weyl_denominator(datum: RootDatum, z) -> float:
    """``b(z) = 1 / (exp<z, rho^vee> prod_{beta^vee > 0} (1 - exp(-<z, beta^vee>)))``."""
    z = _as_point(datum, z)
    z.require_interior()
    pairings = z.positive_pairings
    prod = float(np.prod(-np.expm1(-pairings)))
    return 1.0 / (math.exp(z.pair(datum.rho_vee)) * prod)


def gindikin_karpelevich(datum: RootDatum, z, q: float) -> float:
    """``prod_{beta > 0} (1 - q^-1 e^{-<beta^vee, z>}) / (1 - e^{-<beta^vee, z>})``."""
    _check_q(q)
    z = _as_point(datum, z)
    z.require_interior()
    x = np.exp(-z.positive_pairings)
    return float(np.prod((1.0 - x / q) / (-np.expm1(-z.positive_pairings))))


def _check_q(q: float) -> None:
    if not q > 1:
        raise SpectralError(f"residue field size must exceed 1, got {q}")


@dataclass(frozen=True)
class QPower:
    """``q ** exponent`` with an exact rational exponent."""

    q: int
    exponent: Fraction

    @property
    def value(self) -> float:
        return float(self.q) ** float(self.exponent)

    def __float__(self) -> float:
        return self.value


def modular_character(datum: RootDatum, mu: Sequence[int], q: int) -> QPower:
    """``delta(varpi^mu) = q^{<2 rho, mu^vee>}``."""
    _check_q(q)
    mu = _check_coweight(datum, mu)
    return QPower(q, 2 * datum.rho_pairing(mu))


def coset_count_intersection(
    datum: RootDatum, lam: Sequence[int], mu: Sequence[int], q: int
) -> QPower:
    """Number of ``K``-cosets in ``K varpi^{-lam} K`` cut out by ``N varpi^{-mu}``.

    Only meaningful for ``mu`` in the orbit of a minuscule ``lam``; the value
    is ``q^{<rho, lam - w0 mu>}``.
    """
    _check_q(q)
    lam = _check_coweight(datum, lam)
    mu = _check_coweight(datum, mu)
    if mu not in set(weyl_orbit(datum, lam)):
        raise SpectralError(f"{mu} is not in the Weyl orbit of {lam}")
    w0mu = datum.w0(mu)
    diff = tuple(a - b for a, b in zip(lam, w0mu))
    return QPower(q, datum.rho_pairing(diff))


def coset_count_double(datum: RootDatum, lam: Sequence[int], q: int) -> int:
    """Number of ``K``-cosets in ``K varpi^{-lam} K`` for minuscule ``lam``."""
    total = Fraction(0)
    for mu in weyl_orbit(datum, lam):
        e = coset_count_intersection(datum, lam, mu, q).exponent
        if e.denominator != 1:
            raise SpectralError("non-integral coset count exponent")
        total += Fraction(q) ** int(e)
    assert total.denominator == 1
    return int(total)


def macdonald_minuscule(datum: RootDatum, lam: Sequence[int], z, q: int) -> float:
    """Spherical-function value on ``K varpi^{-lam} K``: ``q^{<rho, lam>} ch V(lam)(z)``."""
    _check_q(q)
    return float(q) ** float(datum.rho_pairing(lam)) * minuscule_character(datum, lam, z)


def _whittaker_factor(datum: RootDatum, z: SpectralPoint, q: float) -> float:
    return float(np.prod(1.0 - np.exp(-z.positive_pairings) / q))


def scs_whittaker(datum: RootDatum, lam: Sequence[int], z, q: int) -> float:
    """Unramified Whittaker value at ``varpi^{-lam}``.

    ``q^{-<rho, lam>} ch V(lam)(z) prod_{beta > 0} (1 - q^-1 e^{-<beta^vee, z>})`` for
    dominant ``lam`` and 0 otherwise.
    """
    _check_q(q)
    lam = _check_coweight(datum, lam)
    z = _as_point(datum, z)
    z.require_interior()
    if not datum.is_dominant(lam):
        return 0.0
    ch = weyl_character(datum, lam, z)
    return float(q) ** (-float(datum.rho_pairing(lam))) * ch * _whittaker_factor(datum, z, q)


def normalized_psi(datum: RootDatum, lam: Sequence[int], z) -> float:
    """Whittaker value with the ``q``-dependence removed: ``ch V(lam)(z)`` or 0."""
    lam = _check_coweight(datum, lam)
    if not datum.is_dominant(lam):
        return 0.0
    return weyl_character(datum, lam, z)


def asymptotic_gap(datum: RootDatum, lam: Sequence[int], z, q: float | None = None) -> float:
    """Distance of the normalized character from its limit along ``lam``.

    Without ``q`` this is ``|exp(-<z, lam>) ch V(lam)(z) - b(z) exp(<z, rho^vee>)|``.
    With ``q`` both terms are multiplied by ``prod_{beta > 0} (1 - q^-1 e^{-<beta^vee, z>})``,
    which compares ``q^{<rho, lam>} exp(-<z, lam>)`` times the Whittaker value with the
    Gindikin-Karpelevich factor.

    The gap decays like ``exp(-c |lam|)`` and falls below double-precision
    round-off, so both terms are evaluated in 60-digit arithmetic.
    """
    lam = _check_coweight(datum, lam)
    z = _as_point(datum, z)
    z.require_interior()
    if not datum.is_dominant(lam):
        raise SpectralError("asymptotic gap is defined for dominant coweights")
    if q is not None:
        _check_q(q)
    with mpmath.workdps(60):
        u = [mpmath.mpf(x) for x in z.u]
        table = weyl_group(datum)
        rho = np.array(datum.rho_vee, dtype=np.int64)
        shifted = np.asarray(lam, dtype=np.int64) + rho

        def alt(v):
            diffs = table.images(tuple(v)) - v
            return mpmath.fsum(
                int(s) * mpmath.exp(mpmath.fsum(int(d) * x for d, x in zip(row, u)))
                for s, row in zip(table.signs, diffs)
            )

        # exp(-<z, lam>) ch V(lam)(z) equals this ratio exactly.
        scaled = alt(shifted) / alt(rho)
        coroot_pairings = [
            mpmath.fsum(int(c) * x for c, x in zip(cv, u)) for cv in datum.positive_coroots
        ]
        limit = 1 / mpmath.fprod(1 - mpmath.exp(-t) for t in coroot_pairings)
        gap = abs(scaled - limit)
        if q is not None:
            gap *= mpmath.fprod(1 - mpmath.exp(-t) / q for t in coroot_pairings)
        return float(gap)
