"""Random walk on the Borel subgroup of PGL_n over F_p((T)).

Group elements are lower triangular. An element of ``B(K) / T(O)`` is stored
as its unipotent part ``N`` and the coweight ``W`` with torus part
``varpi^{-W}``, where ``varpi^{W} = diag(T^{e_1}, ..., T^{e_n})`` and
``e_i - e_{i+1} = <alpha_i, W>``, ``e_n = 0``.

Conjugation ``varpi^{-W} x varpi^{W}`` multiplies entry ``(i, j)`` by
``T^{e_j - e_i}``, so subdiagonal ``i`` picks up ``T^{<alpha_i, W>}``.

Two engines are provided. The scalar engine multiplies actual matrices of
:class:`LaurentSeries` and is used for single paths and the harmonicity
checks. The batched engine tracks only subdiagonal digits, for many samples
at once: the subdiagonal of a product of lower unitriangular matrices is the
sum of the subdiagonals, so this is exact for anything that reads only the
subdiagonal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .padic_field import (
    PRECISION_EXHAUSTED,
    LaurentSeries,
    PrecisionError,
    additive_character,
    check_prime,
    sample_haar_O,
    sample_unit,
)
from .rng import MCEstimate, map_blocks, mean_estimate, substream
from .root_system import RootDatum, build_root_datum, weyl_orbit
from .spectral import (
    SpectralPoint,
    _as_point,
    coset_count_double,
    coset_count_intersection,
    macdonald_minuscule,
    normalized_psi,
    scs_whittaker,
)
from .walks import IncrementLaw, ResourceCapError, WalkError, exit_root_bound, increment_law

__all__ = [
    "coweight_exponents",
    "exponents_to_coweight",
    "Unipotent",
    "LowerTriangular",
    "BorelHaarSample",
    "sample_borel_haar",
    "BorelWalkState",
    "initial_state",
    "step_borel_walk",
    "step_borel_matrix",
    "chi_alpha_minus",
    "phi_N",
    "phi_N_conjugated",
    "StabilizedWalk",
    "run_to_stabilization",
    "GapLaw",
    "exp_functional_gap_law",
    "PoissonResult",
    "poisson_mc",
    "HarmonicityResult",
    "harmonicity_mc",
    "alpha_harmonicity_mc",
    "mu_rho_law",
    "eigen_exact",
    "whittaker_on_borel",
]


def _datum(n: int) -> RootDatum:
    if n < 2:
        raise WalkError("PGL_n needs n >= 2")
    return build_root_datum("A", n - 1)


def coweight_exponents(mu: Sequence[int]) -> tuple[int, ...]:
    """Diagonal exponents of ``varpi^{mu}`` in PGL_n, normalized so the last is 0."""
    e = [0] * (len(mu) + 1)
    for i in range(len(mu) - 1, -1, -1):
        e[i] = e[i + 1] + int(mu[i])
    return tuple(e)


def exponents_to_coweight(e: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(e[i]) - int(e[i + 1]) for i in range(len(e) - 1))


# --- matrices over the truncated field ------------------------------------------


@dataclass(frozen=True)
class Unipotent:
    """Lower unitriangular ``n x n`` matrix; absent entries are exact zeros."""

    n: int
    p: int
    entries: dict = field(default_factory=dict)  # (i, j) with i > j -> LaurentSeries

    def entry(self, i: int, j: int) -> LaurentSeries:
        if i == j:
            return LaurentSeries.one(self.p)
        if i < j:
            return LaurentSeries.zero(self.p)
        return self.entries.get((i, j), LaurentSeries.zero(self.p))

    def subdiagonal(self, i: int) -> LaurentSeries:
        """Entry ``(i+1, i)``, the coordinate paired with the simple root ``alpha_i``."""
        return self.entry(i + 1, i)

    def __mul__(self, other: "Unipotent") -> "Unipotent":
        n = self.n
        out = {}
        for i in range(n):
            for j in range(i):
                acc = self.entry(i, j) + other.entry(i, j)
                for k in range(j + 1, i):
                    acc = acc + self.entry(i, k) * other.entry(k, j)
                out[(i, j)] = acc
        return Unipotent(n, self.p, out)

    def conjugate(self, mu: Sequence[int]) -> "Unipotent":
        """``varpi^{-mu} self varpi^{mu}``."""
        e = coweight_exponents(mu)
        return Unipotent(
            self.n, self.p, {(i, j): x.shift(e[j] - e[i]) for (i, j), x in self.entries.items()}
        )

    def conjugate_by_units(self, units: Sequence[LaurentSeries], precision: int) -> "Unipotent":
        """``d self d^{-1}`` for a diagonal matrix of units ``d``."""
        inv = [u.inverse(precision) for u in units]
        return Unipotent(
            self.n,
            self.p,
            {(i, j): units[i] * x * inv[j] for (i, j), x in self.entries.items()},
        )

    def as_lower(self) -> "LowerTriangular":
        ent = dict(self.entries)
        for i in range(self.n):
            ent[(i, i)] = LaurentSeries.one(self.p)
        return LowerTriangular(self.n, self.p, ent)

    def agrees_with(self, other: "Unipotent") -> bool:
        return all(
            self.entry(i, j).agrees_with(other.entry(i, j))
            for i in range(self.n)
            for j in range(i)
        )


@dataclass(frozen=True)
class LowerTriangular:
    """Lower triangular matrix with entries in the truncated field."""

    n: int
    p: int
    entries: dict  # (i, j) with i >= j -> LaurentSeries

    def entry(self, i: int, j: int) -> LaurentSeries:
        if i < j:
            return LaurentSeries.zero(self.p)
        return self.entries.get((i, j), LaurentSeries.zero(self.p))

    @classmethod
    def torus(cls, n: int, p: int, exponents: Sequence[int]) -> "LowerTriangular":
        return cls(n, p, {(i, i): LaurentSeries.monomial(p, int(exponents[i])) for i in range(n)})

    def __mul__(self, other: "LowerTriangular") -> "LowerTriangular":
        n = self.n
        out = {}
        for i in range(n):
            for j in range(i + 1):
                acc = self.entry(i, j) * other.entry(j, j)
                for k in range(j + 1, i + 1):
                    acc = acc + self.entry(i, k) * other.entry(k, j)
                out[(i, j)] = acc
        return LowerTriangular(n, self.p, out)

    def na_decompose(self, precision: int) -> tuple[Unipotent, tuple[int, ...], tuple[LaurentSeries, ...]]:
        """Write ``self = N * diag(T^{v_i} u_i)``; returns ``(N, v, u)``."""
        n = self.n
        diag = [self.entry(i, i) for i in range(n)]
        vals = []
        units = []
        inverses = []
        for d in diag:
            v = d.valuation()
            if v is PRECISION_EXHAUSTED:
                raise PrecisionError("diagonal entry is zero to known precision")
            vals.append(v)
            units.append(d.normalized().shift(-v))
            inverses.append(d.inverse(precision))
        entries = {
            (i, j): self.entry(i, j) * inverses[j] for i in range(n) for j in range(i)
        }
        return Unipotent(n, self.p, entries), tuple(vals), tuple(units)


@dataclass(frozen=True)
class BorelHaarSample:
    """Haar-random element ``n d`` of ``B(O)``: unipotent part times a diagonal of units."""

    unipotent: Unipotent
    units: tuple[LaurentSeries, ...]

    def as_lower(self) -> LowerTriangular:
        n = self.unipotent.n
        d = LowerTriangular(n, self.unipotent.p, {(i, i): u for i, u in enumerate(self.units)})
        return self.unipotent.as_lower() * d


def sample_borel_haar(n: int, p: int, precision: int, rng: np.random.Generator) -> BorelHaarSample:
    """Haar sample on ``B(O)``; every entry known modulo ``T^precision``."""
    check_prime(p)
    entries = {(i, j): sample_haar_O(p, precision, rng) for i in range(n) for j in range(i)}
    units = tuple(sample_unit(p, precision, rng) for _ in range(n))
    return BorelHaarSample(Unipotent(n, p, entries), units)


# --- walk states ----------------------------------------------------------------


@dataclass(frozen=True)
class BorelWalkState:
    """``B_t = N_t varpi^{-W_t}`` modulo ``T(O)`` on the right."""

    t: int
    nu: Unipotent
    W: tuple[int, ...]

    @property
    def a_exponents(self) -> tuple[int, ...]:
        """Exponents of the torus part ``varpi^{-W}``; last entry is 0."""
        return tuple(-x for x in coweight_exponents(self.W))


def initial_state(b0: BorelHaarSample) -> BorelWalkState:
    n = b0.unipotent.n
    return BorelWalkState(0, b0.unipotent, (0,) * (n - 1))


def step_borel_walk(
    state: BorelWalkState,
    mu: Sequence[int],
    b_prime: BorelHaarSample,
    b: BorelHaarSample,
    precision: int,
) -> BorelWalkState:
    """One step of ``B_{t+1} = B_t b' varpi^{-mu} b`` through the unipotent recursion.

    ``N_{t+1} = N_t (varpi^{-W_t} n' varpi^{W_t}) (varpi^{-W_{t+1}} n'' varpi^{W_{t+1}})``
    where ``n'`` is the unipotent part of ``b'`` and ``n'' = d' n d'^{-1}``
    is the unipotent part of ``b`` after moving the units ``d'`` of ``b'``
    past it.
    """
    w_next = tuple(a + int(m) for a, m in zip(state.W, mu))
    first = b_prime.unipotent.conjugate(state.W)
    second = b.unipotent.conjugate_by_units(b_prime.units, precision).conjugate(w_next)
    return BorelWalkState(state.t + 1, state.nu * first * second, w_next)


def step_borel_matrix(
    state: BorelWalkState,
    mu: Sequence[int],
    b_prime: BorelHaarSample,
    b: BorelHaarSample,
    precision: int,
) -> BorelWalkState:
    """Same step as :func:`step_borel_walk`, by multiplying full matrices and re-decomposing."""
    n = state.nu.n
    p = state.nu.p
    current = state.nu.as_lower() * LowerTriangular.torus(n, p, state.a_exponents)
    step = LowerTriangular.torus(n, p, tuple(-x for x in coweight_exponents(mu)))
    product = current * b_prime.as_lower() * step * b.as_lower()
    nu, vals, _ = product.na_decompose(precision)
    w_next = exponents_to_coweight(tuple(-v for v in vals))
    return BorelWalkState(state.t + 1, nu, w_next)


def chi_alpha_minus(nu: Unipotent) -> list[LaurentSeries]:
    """The subdiagonal entries, one per simple root."""
    return [nu.subdiagonal(i) for i in range(nu.n - 1)]


def phi_N(nu: Unipotent) -> complex:
    """Generic character ``prod_i psi(subdiagonal_i)`` of the unipotent group."""
    out = 1 + 0j
    for i in range(nu.n - 1):
        out *= additive_character(nu.subdiagonal(i))
    return out


def phi_N_conjugated(nu: Unipotent, lam: Sequence[int]) -> complex:
    """``phi_N(varpi^{-lam} nu varpi^{lam}) = prod_i psi(T^{<alpha_i, lam>} subdiagonal_i)``."""
    out = 1 + 0j
    for i in range(nu.n - 1):
        out *= additive_character(nu.subdiagonal(i).shift(int(lam[i])))
    return out


# --- stabilization of a single path ------------------------------------------------


def _certified_margin(ratios: np.ndarray, tol: float) -> np.ndarray:
    """Levels above which a coordinate returns to the target with probability below ``tol``."""
    with np.errstate(divide="ignore"):
        m = np.where(ratios > 0, np.ceil(np.log(tol) / np.log(np.maximum(ratios, 1e-300))), 1)
    return np.maximum(m, 1).astype(np.int64)


@dataclass(frozen=True)
class StabilizedWalk:
    state: BorelWalkState
    path: np.ndarray  # (t+1, n-1) coweights W_0..W_t
    high: int
    certified_tol: float


def _walk_law(n: int, z, Lam: Sequence[int] | None) -> IncrementLaw:
    datum = _datum(n)
    if Lam is None:
        Lam = datum.fundamental_coweight(0)
    return increment_law(datum, Lam, z)


def run_to_stabilization(
    n: int,
    z,
    p: int,
    high: int,
    seed: int,
    *,
    Lam: Sequence[int] | None = None,
    tol: float = 1e-12,
    max_steps: int = 100_000,
    chunk: int = 64,
) -> StabilizedWalk:
    """Run the scalar walk until no later step can change a digit below ``T^high``.

    Later conjugated increments have valuation at least the current simple-root
    pairings, so they cannot move digits below ``T^high`` once those pairings
    exceed ``high`` minus the lowest valuation in ``N_t``. The lattice walk is
    continued until every pairing sits a margin above that level, the margin
    making a later return below it less likely than ``tol``.
    """
    check_prime(p)
    law = _walk_law(n, z, Lam)
    margin = _certified_margin(exit_root_bound(law), tol)
    rng_path = substream(seed, 21, 0)
    rng_group = substream(seed, 21, 1)
    positions = [np.zeros(n - 1, dtype=np.int64)]

    def extend(k: int) -> None:
        idx = law.sample_indices(rng_path, (k,))
        for i in idx:
            positions.append(positions[-1] + law.support[i])

    extend(chunk)
    # Precision: digits must survive multiplication by entries of valuation down to
    # the lowest pairing sum seen on the path.
    def floor_estimate() -> int:
        arr = np.array(positions)
        return int(np.minimum(arr.min(axis=0), 0).sum())

    b0 = sample_borel_haar(n, p, max(1, high - 2 * floor_estimate() + 2), rng_group)
    state = initial_state(b0)
    t = 0
    while True:
        while t + 1 < len(positions):
            floor = floor_estimate()
            precision = max(1, high - 2 * floor + 2)
            mu = tuple(int(x) for x in positions[t + 1] - positions[t])
            b_prime = sample_borel_haar(n, p, precision, rng_group)
            b = sample_borel_haar(n, p, precision, rng_group)
            state = step_borel_walk(state, mu, b_prime, b, precision)
            t += 1
        current = positions[t]
        lowest = min(
            (state.nu.entry(i, j).valuation() for i in range(n) for j in range(i)),
            key=lambda v: math.inf if v is PRECISION_EXHAUSTED else v,
        )
        lowest = 0 if lowest is PRECISION_EXHAUSTED else min(int(lowest), 0)
        if np.all(current - margin >= high - lowest):
            break
        if t >= max_steps:
            raise ResourceCapError(f"walk not stabilized after {max_steps} steps")
        extend(chunk)
    for (i, j), x in state.nu.entries.items():
        if x.high is not None and x.high < high:
            raise PrecisionError(f"entry ({i},{j}) known only below T^{x.high}, needed T^{high}")
    return StabilizedWalk(state, np.array(positions[: t + 1]), high, tol)


# --- batched subdiagonal engine ------------------------------------------------------


class _SubdiagonalDigits:
    """Digits of every subdiagonal entry of ``N_t`` on a per-sample window.

    ``acc[s, i, w]`` is the digit at exponent ``lo[s, i] + w`` of subdiagonal
    ``i`` for sample ``s``. A Haar element of ``O`` placed at ``T^k`` adds an
    independent uniform digit at every exponent ``>= k``.
    """

    def __init__(self, lo: np.ndarray, width: int, p: int):
        self.lo = lo
        self.width = width
        self.p = p
        self.acc = np.zeros(lo.shape + (width,), dtype=np.int64)
        self.offsets = np.arange(width)

    def add(self, k: np.ndarray, rng: np.random.Generator) -> None:
        reach = (self.lo[:, :, None] + self.offsets) >= k[:, :, None]
        if not reach.any():
            return
        self.acc += reach * rng.integers(0, self.p, size=self.acc.shape)

    def digits(self) -> np.ndarray:
        return self.acc % self.p


def _simulate_chunk(law: IncrementLaw, start: np.ndarray, k: int, rng) -> np.ndarray:
    idx = law.sample_indices(rng, (start.shape[0], k))
    steps = law.support[idx]
    return start[:, None, :] + np.cumsum(steps, axis=1)


@dataclass(frozen=True)
class GapLaw:
    """Empirical law of ``val(chi_i(N_T)) - min_{s <= T} <alpha_i, W_s>``."""

    counts: np.ndarray  # (n-1, max_gap + 2); last column counts gaps > max_gap
    expected: np.ndarray  # (max_gap + 2,)
    samples: int
    independence_pvalue: float | None

    def frequencies(self) -> np.ndarray:
        return self.counts / self.samples

    def z_scores(self) -> np.ndarray:
        p = self.expected[None, :]
        sigma = np.sqrt(p * (1 - p) / self.samples)
        return (self.frequencies() - p) / sigma


def exp_functional_gap_law(
    n: int,
    z,
    p: int,
    T: int,
    samples: int,
    seed: int,
    *,
    Lam: Sequence[int] | None = None,
    max_gap: int = 3,
) -> GapLaw:
    """Sample the valuation gaps of the subdiagonal of ``N_T``.

    Each gap should be geometric, ``P(g) = (1 - 1/p) p^-g``, and the gaps for
    different simple roots independent.
    """
    check_prime(p)
    law = _walk_law(n, z, Lam)
    r = n - 1
    width = max_gap + 2
    rng = substream(seed, 31, 0)
    paths = np.concatenate(
        [np.zeros((samples, 1, r), dtype=np.int64), _simulate_chunk(law, np.zeros((samples, r), dtype=np.int64), T, rng)],
        axis=1,
    )
    minima = paths.min(axis=1)
    acc = _SubdiagonalDigits(minima, width, p)
    acc.add(paths[:, 0, :], rng)  # N_0
    for t in range(1, T + 1):
        acc.add(paths[:, t - 1, :], rng)  # n'_t at W_{t-1}
        acc.add(paths[:, t, :], rng)  # n_t at W_t
    digits = acc.digits()
    nonzero = digits != 0
    first = np.where(nonzero.any(axis=2), np.argmax(nonzero, axis=2), width - 1 + 1)
    gaps = np.minimum(first, max_gap + 1)  # (samples, r)
    counts = np.stack([np.bincount(gaps[:, i], minlength=max_gap + 2) for i in range(r)])
    expected = np.array([(1 - 1 / p) * p ** (-g) for g in range(max_gap + 1)] + [p ** (-(max_gap + 1))])
    pval = None
    if r >= 2:
        table = np.zeros((max_gap + 2, max_gap + 2))
        np.add.at(table, (gaps[:, 0], gaps[:, 1]), 1)
        table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
        pval = float(stats.chi2_contingency(table, correction=False)[1])
    return GapLaw(counts, expected, samples, pval)


@dataclass(frozen=True)
class PoissonResult:
    estimate: MCEstimate  # real part of E[phi_N(varpi^{-lam} N_inf varpi^{lam})]
    imaginary: MCEstimate
    steps: int  # horizon needed to certify every sample
    bias_bound: float


def poisson_mc(
    n: int,
    lam: Sequence[int],
    z,
    p: int,
    samples: int,
    seed: int,
    *,
    Lam: Sequence[int] | None = None,
    tol: float = 1e-12,
    chunk: int = 64,
    max_steps: int = 100_000,
    threads: int = 1,
) -> PoissonResult:
    """Monte Carlo for ``E[phi_N(varpi^{-lam} N_inf varpi^{lam})]``.

    The walk keeps both Haar factors of every step. Only the digit of
    subdiagonal ``i`` at ``T^{-1-<alpha_i, lam>}`` enters, and each sample is
    run until every coordinate of its lattice path sits high enough above
    that exponent that a return has probability below ``tol``.
    """
    check_prime(p)
    law = _walk_law(n, z, Lam)
    r = n - 1
    lam_arr = np.asarray(lam, dtype=np.int64)
    if lam_arr.shape != (r,) or np.any(lam_arr < 0):
        raise WalkError("lam must be a dominant coweight of PGL_n")
    margin = _certified_margin(exit_root_bound(law), tol)
    target = -1 - lam_arr  # exponent read by the character, per subdiagonal

    def block(b: int, size: int):
        rng = substream(seed, 41, b)
        lo = np.broadcast_to(target, (size, r)).copy()
        acc = _SubdiagonalDigits(lo, 1, p)
        current = np.zeros((size, r), dtype=np.int64)
        acc.add(current, rng)  # N_0
        t = 0
        while True:
            chunk_path = _simulate_chunk(law, current, chunk, rng)
            prev = current
            for s in range(chunk):
                nxt = chunk_path[:, s, :]
                acc.add(prev, rng)
                acc.add(nxt, rng)
                prev = nxt
            current = prev
            t += chunk
            if np.all(current - margin > target):
                break
            if t >= max_steps:
                raise ResourceCapError(f"Poisson walk not certified after {max_steps} steps")
        phase = 2 * np.pi * acc.digits()[:, :, 0].sum(axis=1) / p
        re, im = np.cos(phase), np.sin(phase)
        return float(re.sum()), float((re * re).sum()), float(im.sum()), float((im * im).sum()), t

    parts = map_blocks(block, samples, threads)
    est = mean_estimate([x[0] for x in parts], [x[1] for x in parts], samples)
    imag = mean_estimate([x[2] for x in parts], [x[3] for x in parts], samples)
    return PoissonResult(est, imag, max(x[4] for x in parts), 2 * r * tol)


# --- harmonicity ------------------------------------------------------------------


def whittaker_on_borel(
    nu: Unipotent, vals: Sequence[int], datum: RootDatum, z: SpectralPoint, q: int | None
) -> complex:
    """Evaluate at ``nu varpi^{-mu} k`` where ``diag valuations = vals``.

    With ``q`` this is the Whittaker function ``phi_N(nu) W(varpi^{-mu})``;
    without it, ``chi^{-1} psi_chi``: ``phi_N(nu) e^{-<z, mu>} ch V(mu)(z)``.
    """
    mu = exponents_to_coweight(tuple(-v for v in vals))
    if not datum.is_dominant(mu):
        return 0j
    if q is None:
        value = math.exp(-z.pair(mu)) * normalized_psi(datum, mu, z)
    else:
        value = scs_whittaker(datum, mu, z, q)
    return phi_N(nu) * value


def mu_rho_law(datum: RootDatum, Lam: Sequence[int], q: int) -> tuple[np.ndarray, np.ndarray]:
    """Orbit points ``mu`` with probabilities ``q^{<rho, Lam - w0 mu>}`` / coset count."""
    orbit = weyl_orbit(datum, Lam)
    weights = np.array([coset_count_intersection(datum, Lam, mu, q).value for mu in orbit])
    card = coset_count_double(datum, Lam, q)
    if not math.isclose(weights.sum(), card, rel_tol=1e-12):
        raise AssertionError("coset counts do not add up")
    return np.array(orbit, dtype=np.int64), weights / weights.sum()


def eigen_exact(datum: RootDatum, Lam: Sequence[int], z, q: int) -> float:
    """``q^{<rho, Lam>} ch V(Lam)(z) / card(K varpi^Lam K / K)``."""
    return macdonald_minuscule(datum, Lam, z, q) / coset_count_double(datum, Lam, q)


@dataclass(frozen=True)
class HarmonicityResult:
    estimate: MCEstimate
    exact: float

    @property
    def passes(self) -> bool:
        return self.estimate.covers(self.exact)


def _one_step_values(
    n: int,
    p: int,
    b_coweight: Sequence[int],
    support: np.ndarray,
    probs: np.ndarray,
    datum: RootDatum,
    z: SpectralPoint,
    q: int | None,
    samples: int,
    seed: int,
    tag: int,
    precision: int,
    threads: int,
) -> MCEstimate:
    start_torus = tuple(-x for x in coweight_exponents(b_coweight))
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0

    def block(bi: int, size: int):
        rng = substream(seed, tag, bi)
        choice = np.searchsorted(cdf, rng.random(size), side="right")
        vals_re = np.empty(size)
        for s in range(size):
            mu = support[choice[s]]
            b_prime = sample_borel_haar(n, p, precision, rng)
            b = sample_borel_haar(n, p, precision, rng)
            step = LowerTriangular.torus(n, p, tuple(-x for x in coweight_exponents(mu)))
            prod = LowerTriangular.torus(n, p, start_torus) * b_prime.as_lower() * step * b.as_lower()
            nu, vals, _ = prod.na_decompose(precision)
            vals_re[s] = whittaker_on_borel(nu, vals, datum, z, q).real
        return float(vals_re.sum()), float((vals_re * vals_re).sum())

    parts = map_blocks(block, samples, threads)
    return mean_estimate([x[0] for x in parts], [x[1] for x in parts], samples)


def harmonicity_mc(
    n: int,
    b_coweight: Sequence[int],
    z,
    p: int,
    samples: int,
    seed: int,
    *,
    Lam: Sequence[int] | None = None,
    precision: int = 4,
    threads: int = 1,
) -> HarmonicityResult:
    """One-step harmonicity of ``chi^{-1} psi_chi`` at ``b = varpi^{-b_coweight}``.

    Estimates ``E[f(b b' varpi^{-mu} b'')]`` with ``mu`` from the increment law,
    to be compared with ``f(b)``.
    """
    check_prime(p)
    datum = _datum(n)
    z = _as_point(datum, z)
    law = _walk_law(n, z, Lam)
    est = _one_step_values(
        n, p, b_coweight, law.support, law.probs, datum, z, None, samples, seed, 51, precision, threads
    )
    exact = math.exp(-z.pair(b_coweight)) * normalized_psi(datum, b_coweight, z)
    return HarmonicityResult(est, exact)


def alpha_harmonicity_mc(
    n: int,
    b_coweight: Sequence[int],
    z,
    p: int,
    samples: int,
    seed: int,
    *,
    Lam: Sequence[int] | None = None,
    precision: int = 4,
    threads: int = 1,
) -> tuple[HarmonicityResult, float]:
    """Eigenfunction check for the Whittaker function under the coset-count step law.

    Returns the estimate of ``E[W(b b' varpi^{-mu} b'')]`` against
    ``eigenvalue * W(b)``, together with the exact eigenvalue
    ``q^{<rho, Lam>} ch V(Lam)(z) / card``. Here ``q = p``.
    """
    check_prime(p)
    datum = _datum(n)
    z = _as_point(datum, z)
    if Lam is None:
        Lam = datum.fundamental_coweight(0)
    support, probs = mu_rho_law(datum, Lam, p)
    est = _one_step_values(
        n, p, b_coweight, support, probs, datum, z, p, samples, seed, 61, precision, threads
    )
    eigen = eigen_exact(datum, Lam, z, p)
    w_b = scs_whittaker(datum, b_coweight, z, p)
    return HarmonicityResult(est, eigen * w_b), eigen
