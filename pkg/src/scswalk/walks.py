"""Random walks in the coweight lattice with minuscule increments.

Survival means staying in the closed dominant chamber. Three routes compute
the survival probability: the alternating Weyl-group sum from the reflection
principle, exact dynamic programming over dominant states, and Monte Carlo.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .rng import MCEstimate, block_sizes, map_blocks, mean_estimate, substream
from .root_system import (
    RootDatum,
    chamber_sign,
    is_minuscule,
    weyl_group,
    weyl_orbit,
)
from .spectral import SpectralPoint, _as_point, alternating_sum

__all__ = [
    "WalkError",
    "ResourceCapError",
    "IncrementLaw",
    "increment_law",
    "drift",
    "mean_drift_pairings",
    "WalkPath",
    "sample_path",
    "sample_positions",
    "randomized_start_law",
    "survival_reflection",
    "survival_dp",
    "DPResult",
    "survival_dp_run",
    "survival_dp_table",
    "survival_mc",
    "StoppedPath",
    "stopped_path",
    "reflect_path",
    "functional_F",
    "ReflectionIdentityResult",
    "reflection_identity_mc",
    "position_law_chi_square",
    "exit_root_bound",
]


class WalkError(ValueError):
    """Invalid walk configuration."""


class ResourceCapError(RuntimeError):
    """A computation would exceed its configured memory or work budget."""


@dataclass(frozen=True)
class IncrementLaw:
    """Law of one increment: the orbit of a minuscule coweight with Gibbs weights."""

    datum: RootDatum
    lam: tuple[int, ...]
    z: SpectralPoint
    support: np.ndarray = field(compare=False, repr=False)  # (k, r) int
    probs: np.ndarray = field(compare=False, repr=False)  # (k,)

    @property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c

    def sample_indices(self, rng: np.random.Generator, shape) -> np.ndarray:
        return np.searchsorted(self.cdf, rng.random(shape), side="right")


def increment_law(
    datum: RootDatum, lam: Sequence[int], z, *, allow_boundary: bool = False
) -> IncrementLaw:
    """``P(mu) = exp<z, mu> / ch V(lam)(z)`` on the orbit of the minuscule ``lam``."""
    lam = tuple(int(x) for x in lam)
    if not is_minuscule(datum, lam):
        raise WalkError(f"{lam} is not a minuscule coweight of {datum.type_label}")
    z = _as_point(datum, z)
    if not allow_boundary:
        z.require_interior()
    support = np.array(weyl_orbit(datum, lam), dtype=np.int64)
    logits = support @ z.array
    w = np.exp(logits - logits.max())
    return IncrementLaw(datum, lam, z, support, w / w.sum())


def drift(law: IncrementLaw) -> np.ndarray:
    """Mean increment in fundamental-coweight coordinates."""
    return law.probs @ law.support


def mean_drift_pairings(law: IncrementLaw) -> np.ndarray:
    """Pairings of the mean increment with the simple roots."""
    return drift(law)


def exit_root_bound(law: IncrementLaw) -> np.ndarray:
    """Per simple root, the ratio ``s_i`` with ``P(coordinate i ever drops by m+1) = s_i^(m+1)``.

    Each coordinate of the walk is a one-dimensional walk with steps in
    {-1, 0, 1}; for positive drift the chance of ever going down by ``m + 1``
    is ``(p_minus / p_plus)^(m + 1)``.
    """
    out = []
    for i in range(law.datum.rank):
        col = law.support[:, i]
        p_plus = float(law.probs[col == 1].sum())
        p_minus = float(law.probs[col == -1].sum())
        if p_plus <= p_minus:
            out.append(1.0)
        else:
            out.append(p_minus / p_plus)
    return np.array(out)


@dataclass(frozen=True)
class WalkPath:
    """One sampled path ``W_0 = 0, W_1, ..., W_T`` together with its start shift."""

    start: tuple[int, ...]
    positions: np.ndarray  # (T+1, r), unshifted walk
    step_indices: np.ndarray  # (T,)
    seed: int

    @property
    def horizon(self) -> int:
        return len(self.step_indices)

    @property
    def running_minima(self) -> np.ndarray:
        return np.minimum.accumulate(self.positions, axis=0)

    @property
    def shifted(self) -> np.ndarray:
        return self.positions + np.asarray(self.start, dtype=np.int64)


def sample_positions(
    law: IncrementLaw, n: int, T: int, rng: np.random.Generator
) -> np.ndarray:
    """``n`` independent unshifted paths, shape ``(n, T+1, r)``."""
    idx = law.sample_indices(rng, (n, T))
    steps = law.support[idx]
    out = np.zeros((n, T + 1, law.datum.rank), dtype=np.int64)
    np.cumsum(steps, axis=1, out=out[:, 1:, :])
    return out


def sample_path(law: IncrementLaw, lam: Sequence[int], T: int, seed: int) -> WalkPath:
    if T < 0:
        raise WalkError("horizon must be non-negative")
    rng = substream(seed, 1)
    idx = law.sample_indices(rng, (T,))
    positions = np.zeros((T + 1, law.datum.rank), dtype=np.int64)
    np.cumsum(law.support[idx], axis=0, out=positions[1:])
    return WalkPath(tuple(int(x) for x in lam), positions, idx, seed)


def _check_start(datum: RootDatum, lam: Sequence[int]) -> tuple[int, ...]:
    lam = tuple(int(x) for x in lam)
    if len(lam) != datum.rank:
        raise WalkError(f"start needs {datum.rank} coordinates")
    if not datum.is_dominant(lam):
        raise WalkError(f"start {lam} is not dominant")
    return lam


def survival_reflection(
    datum: RootDatum, lam: Sequence[int], z, Lam: Sequence[int] | None = None
) -> float:
    """``sum_w sign(w) exp(<w(lam + rho^vee) - (lam + rho^vee), z>)``.

    The value does not depend on the minuscule step coweight ``Lam``; it is
    only checked when given.
    """
    if Lam is not None and not is_minuscule(datum, Lam):
        raise WalkError(f"{tuple(Lam)} is not a minuscule coweight of {datum.type_label}")
    lam = _check_start(datum, lam)
    z = _as_point(datum, z)
    z.require_interior()
    shifted = tuple(a + 1 for a in lam)
    total, scale = alternating_sum(datum, shifted, z)
    return total * math.exp(scale)


def randomized_start_law(datum: RootDatum, lam: Sequence[int], z) -> tuple[np.ndarray, np.ndarray]:
    """Starting points ``w(lam + rho^vee)`` with probabilities proportional to ``exp<w(lam + rho^vee), z>``."""
    lam = _check_start(datum, lam)
    z = _as_point(datum, z)
    images = weyl_group(datum).images(tuple(a + 1 for a in lam))
    logits = images @ z.array
    w = np.exp(logits - logits.max())
    return images, w / w.sum()


# --- exact dynamic programming ------------------------------------------------


@dataclass(frozen=True)
class DPResult:
    """Survival probabilities at several horizons from one forward pass.

    ``|true value - values[T]| <= error_bound`` for every requested horizon.
    Without pruning or collapsing the bound is 0.
    """

    values: dict[int, float]
    error_bound: float
    max_states: int


def survival_dp_run(
    law: IncrementLaw,
    lam: Sequence[int],
    horizons: Sequence[int],
    *,
    prune: float = 0.0,
    collapse: float = 0.0,
    state_cap: int = 5_000_000,
) -> DPResult:
    """Forward dynamic programming over dominant states.

    States are exact integer coordinates merged by hashing to integer keys.
    Mass at a state whose smallest coordinate is at least the number of
    remaining steps cannot leave the chamber and is banked exactly.

    Two optional approximations keep long horizons tractable, each with an
    accounted error. With ``prune > 0``, states carrying less mass are dropped.
    With ``collapse > 0``, a state is banked as surviving once its mass times
    ``sum_i s_i^(x_i + 1)`` (see :func:`exit_root_bound`) falls below
    ``collapse``; that product bounds the mass that could still leave.
    """
    datum = law.datum
    lam = _check_start(datum, lam)
    horizons = sorted({int(h) for h in horizons})
    if not horizons or horizons[0] < 0:
        raise WalkError("horizons must be non-negative")
    T = horizons[-1]
    r = datum.rank
    span = max(lam) + T + 2
    if span ** r >= 2**62:
        raise ResourceCapError("state keys would overflow; reduce the horizon")
    strides = span ** np.arange(r, dtype=np.int64)
    coords = np.array([lam], dtype=np.int64)
    mass = np.array([1.0])
    banked = 0.0
    dropped = 0.0
    risked = 0.0
    ratios = exit_root_bound(law)
    if collapse > 0 and np.any(ratios >= 1):
        raise WalkError("collapsing needs a strictly positive drift in every coordinate")
    values: dict[int, float] = {}
    max_states = 1
    support = law.support
    probs = law.probs
    if 0 in horizons:
        values[0] = 1.0
    for t in range(1, T + 1):
        cand = (coords[None, :, :] + support[:, None, :]).reshape(-1, r)
        cmass = (probs[:, None] * mass[None, :]).reshape(-1)
        keep = np.all(cand >= 0, axis=1)
        cand, cmass = cand[keep], cmass[keep]
        keys = cand @ strides
        uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        mass = np.bincount(inverse, weights=cmass, minlength=len(uniq))
        coords = cand[first]
        remaining = T - t
        safe = coords.min(axis=1) >= remaining
        if np.any(safe):
            banked += float(mass[safe].sum())
            coords, mass = coords[~safe], mass[~safe]
        if collapse > 0 and len(mass):
            with np.errstate(under="ignore"):
                risk = mass * np.sum(ratios[None, :] ** (coords + 1), axis=1)
            settled = risk < collapse
            if np.any(settled):
                banked += float(mass[settled].sum())
                risked += float(risk[settled].sum())
                coords, mass = coords[~settled], mass[~settled]
        if prune > 0 and len(mass):
            small = mass < prune
            if np.any(small):
                dropped += float(mass[small].sum())
                coords, mass = coords[~small], mass[~small]
        max_states = max(max_states, len(mass))
        if max_states > state_cap:
            raise ResourceCapError(f"dynamic programming exceeded {state_cap} states")
        if t in horizons:
            # Banked mass survives to T, hence to every earlier horizon.
            values[t] = float(np.sum(mass)) + banked
    return DPResult(values, dropped + risked, max_states)


def survival_dp(
    datum: RootDatum,
    lam: Sequence[int],
    z,
    Lam: Sequence[int],
    T: int,
    *,
    prune: float = 0.0,
) -> float:
    """Exact probability that ``lam + W`` stays dominant up to time ``T``."""
    law = increment_law(datum, Lam, z)
    return survival_dp_run(law, lam, [T], prune=prune).values[T]


def survival_dp_table(
    law: IncrementLaw,
    starts: Sequence[Sequence[int]],
    horizons: Sequence[int],
    *,
    cell_budget: int = 2 * 10**9,
) -> dict[int, dict[tuple[int, ...], float]]:
    """Survival probabilities for many starts at once by backward recursion.

    ``v_k(x) = sum_mu P(mu) v_{k-1}(x + mu)`` on dominant ``x``, with
    ``v_0 = 1``. Step ``k`` only needs the box of states within ``T - k`` of
    the starts, so the box shrinks as ``k`` grows.
    """
    datum = law.datum
    r = datum.rank
    starts = [_check_start(datum, s) for s in starts]
    horizons = sorted({int(h) for h in horizons})
    T = horizons[-1]
    top = max(max(s) for s in starts)
    work = sum((top + T - k + 1) ** r for k in range(T + 1)) * len(law.probs)
    if work > cell_budget:
        raise ResourceCapError(f"backward table needs {work:.3g} cell updates (budget {cell_budget:.3g})")
    # Value array with one layer of zero padding at coordinate -1.
    size = top + T + 1
    v = np.zeros((size + 1,) * r)
    v[(slice(1, None),) * r] = 1.0
    out: dict[int, dict[tuple[int, ...], float]] = {}
    if 0 in horizons:
        out[0] = {s: 1.0 for s in starts}
    for k in range(1, T + 1):
        new_size = top + T - k + 1
        new = np.zeros((new_size + 1,) * r)
        interior = (slice(1, None),) * r
        acc = np.zeros((new_size,) * r)
        for mu, p in zip(law.support, law.probs):
            sl = tuple(slice(1 + int(m), 1 + int(m) + new_size) for m in mu)
            acc += p * v[sl]
        new[interior] = acc
        v = new
        if k in horizons:
            out[k] = {s: float(v[tuple(c + 1 for c in s)]) for s in starts}
    return out


# --- Monte Carlo --------------------------------------------------------------


_SURVIVAL_TAG = 11
_REFLECTION_TAG = 13


def survival_mc(
    datum: RootDatum,
    lam: Sequence[int],
    z,
    Lam: Sequence[int],
    T: int,
    n: int,
    seed: int,
    *,
    threads: int = 1,
) -> MCEstimate:
    """Fraction of ``n`` simulated paths that stay dominant up to time ``T``."""
    law = increment_law(datum, Lam, z)
    start = np.asarray(_check_start(datum, lam), dtype=np.int64)

    def block(b: int, size: int):
        rng = substream(seed, _SURVIVAL_TAG, b)
        paths = sample_positions(law, size, T, rng)
        alive = np.all((paths + start).min(axis=1) >= 0, axis=1)
        k = float(np.count_nonzero(alive))
        return k, k

    parts = map_blocks(block, n, threads)
    return mean_estimate([p[0] for p in parts], [p[1] for p in parts], n)


# --- reflection principle -----------------------------------------------------


@dataclass(frozen=True)
class StoppedPath:
    """Shifted path with its first hitting time of a reflecting hyperplane.

    ``tau`` is the first index at which the position pairs to zero with some
    positive root, or ``None`` if that never happens within the horizon.
    ``hit_root`` indexes the first such root in the datum's order, which puts
    the simple roots first; for a dominant start it is a simple root.
    """

    datum: RootDatum
    positions: np.ndarray  # (T+1, r), shifted
    tau: int | None
    hit_root: int | None

    @property
    def hit_wall(self) -> int | None:
        return self.hit_root

    @property
    def horizon(self) -> int:
        return len(self.positions) - 1


def stopped_path(datum: RootDatum, positions: np.ndarray) -> StoppedPath:
    positions = np.asarray(positions, dtype=np.int64)
    pairings = positions @ datum.roots_array().T
    zero = pairings == 0
    hit = np.any(zero, axis=1)
    if not np.any(hit):
        return StoppedPath(datum, positions, None, None)
    tau = int(np.argmax(hit))
    return StoppedPath(datum, positions, tau, int(np.argmax(zero[tau])))


def reflect_path(path: StoppedPath) -> StoppedPath:
    """Reflect every position before ``tau`` in the hyperplane hit at ``tau``."""
    if path.tau is None:
        return path
    datum = path.datum
    beta = np.asarray(datum.positive_roots[path.hit_root], dtype=np.int64)
    cv = np.asarray(datum.positive_coroots[path.hit_root], dtype=np.int64)
    out = path.positions.copy()
    head = out[: path.tau]
    out[: path.tau] = head - np.outer(head @ beta, cv)
    return StoppedPath(datum, out, path.tau, path.hit_root)


def functional_F(datum: RootDatum, start: Sequence[int]) -> int:
    """Sign of the chamber containing ``start``, or 0 off the regular set."""
    return chamber_sign(datum, start)


@dataclass(frozen=True)
class ReflectionIdentityResult:
    estimate: MCEstimate  # of E[F 1{tau <= T}]
    survived_identity_start: MCEstimate  # P(start = lam + rho, tau > T)


def _randomized_paths(datum, law, lam, T, size, rng):
    images, p = randomized_start_law(datum, lam, law.z)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    choice = np.searchsorted(cdf, rng.random(size), side="right")
    starts = images[choice]
    paths = sample_positions(law, size, T, rng) + starts[:, None, :]
    return starts, paths


def _first_hits(datum: RootDatum, paths: np.ndarray):
    zero = (paths @ datum.roots_array().T) == 0  # (n, T+1, P)
    hit = np.any(zero, axis=2)
    any_hit = np.any(hit, axis=1)
    tau = np.where(any_hit, np.argmax(hit, axis=1), -1)
    rows = np.arange(len(paths))
    root = np.where(any_hit, np.argmax(zero[rows, np.maximum(tau, 0)], axis=1), -1)
    return tau, root


def reflection_identity_mc(
    datum: RootDatum,
    lam: Sequence[int],
    z,
    Lam: Sequence[int],
    T: int,
    n: int,
    seed: int,
    *,
    threads: int = 1,
) -> ReflectionIdentityResult:
    """Estimate ``E[F(start) 1{tau <= T}]`` under the randomized start.

    The reflection of the path before ``tau`` is a measure-preserving
    involution on ``{tau <= T}`` that flips ``F``, so the mean vanishes for
    every finite horizon.
    """
    if n < 1:
        raise WalkError("need at least one run")
    law = increment_law(datum, Lam, z)
    lam = _check_start(datum, lam)
    identity_start = np.asarray(lam, dtype=np.int64) + 1

    def block(b: int, size: int):
        rng = substream(seed, _REFLECTION_TAG, b)
        starts, paths = _randomized_paths(datum, law, lam, T, size, rng)
        signs = np.where(np.count_nonzero(starts @ datum.roots_array().T < 0, axis=1) % 2, -1.0, 1.0)
        tau, _ = _first_hits(datum, paths)
        stat = np.where(tau >= 0, signs, 0.0)
        surv = ((tau < 0) & np.all(starts == identity_start, axis=1)).astype(float)
        return float(stat.sum()), float((stat * stat).sum()), float(surv.sum())

    parts = map_blocks(block, n, threads)
    est = mean_estimate([p[0] for p in parts], [p[1] for p in parts], n)
    surv = mean_estimate([p[2] for p in parts], [p[2] for p in parts], n)
    return ReflectionIdentityResult(est, surv)


def position_law_chi_square(
    datum: RootDatum,
    lam: Sequence[int],
    z,
    Lam: Sequence[int],
    T: int,
    t_obs: int,
    n: int,
    seed: int,
) -> float:
    """p-value comparing positions at ``t_obs`` of plain and reflected randomized-start paths.

    Two independent samples are drawn; paths in the second are reflected
    before their hitting time (when it is at most ``T``). A two-sample
    chi-square test on the position histograms returns the p-value.
    """
    if not 0 <= t_obs <= T:
        raise WalkError("observation time must lie in [0, T]")
    law = increment_law(datum, Lam, z)
    lam = _check_start(datum, lam)
    rng_a = substream(seed, _REFLECTION_TAG, 1, 0)
    rng_b = substream(seed, _REFLECTION_TAG, 1, 1)
    obs_a, obs_b = [], []
    for size in block_sizes(n):
        _, paths_a = _randomized_paths(datum, law, lam, T, size, rng_a)
        _, paths_b = _randomized_paths(datum, law, lam, T, size, rng_b)
        obs_a.append(paths_a[:, t_obs, :])
        tau, root = _first_hits(datum, paths_b)
        ob = paths_b[:, t_obs, :].copy()
        flip = (tau >= 0) & (t_obs < tau)
        if np.any(flip):
            betas = datum.roots_array()[root[flip]]
            cvs = datum.coroots_array()[root[flip]]
            x = ob[flip]
            ob[flip] = x - np.sum(x * betas, axis=1)[:, None] * cvs
        obs_b.append(ob)
    return two_sample_chi_square(np.concatenate(obs_a), np.concatenate(obs_b))


def two_sample_chi_square(a: np.ndarray, b: np.ndarray, min_expected: float = 5.0) -> float:
    """p-value of a chi-square homogeneity test between two samples of lattice points."""
    keys = np.concatenate([a, b])
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    ca = np.bincount(inverse[: len(a)], minlength=inverse.max() + 1)
    cb = np.bincount(inverse[len(a):], minlength=inverse.max() + 1)
    table = np.vstack([ca, cb]).astype(float)
    expected = table.sum(axis=0) * table.sum(axis=1)[:, None] / table.sum()
    big = expected.min(axis=0) >= min_expected
    merged = np.column_stack([table[:, big], table[:, ~big].sum(axis=1)]) if np.any(~big) else table[:, big]
    merged = merged[:, merged.sum(axis=0) > 0]
    if merged.shape[1] < 2:
        return 1.0
    return float(stats.chi2_contingency(merged, correction=False)[1])
