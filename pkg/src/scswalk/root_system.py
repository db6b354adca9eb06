"""Root data of adjoint type and their Weyl groups.

Coweights are stored in the basis of fundamental coweights, roots in the basis
of simple roots, so the pairing between a root and a coweight is a plain dot
product. Simple roots follow the Bourbaki numbering.

The Cartan matrix is ``A[i][j] = <alpha_i, alpha_j^vee>``. The simple coroot
``alpha_i^vee`` therefore has fundamental-coweight coordinates
``(A[0][i], ..., A[r-1][i])`` (column ``i`` of ``A``).
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "RootDatum",
    "WeylElement",
    "WeylGroupTable",
    "RootSystemError",
    "EnumerationCapError",
    "DEFAULT_ENUMERATION_CAP",
    "build_root_datum",
    "parse_type",
    "reflect",
    "reflect_in_root",
    "pair_root_coweight",
    "weyl_orbit",
    "weyl_elements",
    "weyl_group",
    "minuscule_coweights",
    "is_minuscule",
    "chamber_sign",
    "to_json",
    "from_json",
]

DEFAULT_ENUMERATION_CAP = 10**6


class RootSystemError(ValueError):
    """Unsupported or inconsistent root datum request."""


class EnumerationCapError(RuntimeError):
    """An enumeration would exceed the configured cap."""


# Simple roots in an orthonormal basis, following the Bourbaki plates.
def _euclidean_simple_roots(family: str, rank: int) -> list[list[Fraction]]:
    if family == "A":
        dim = rank + 1
        roots = []
        for i in range(rank):
            v = [Fraction(0)] * dim
            v[i], v[i + 1] = Fraction(1), Fraction(-1)
            roots.append(v)
        return roots
    dim = rank
    roots = []
    for i in range(rank - 1):
        v = [Fraction(0)] * dim
        v[i], v[i + 1] = Fraction(1), Fraction(-1)
        roots.append(v)
    last = [Fraction(0)] * dim
    if family == "B":
        last[rank - 1] = Fraction(1)
    elif family == "C":
        last[rank - 1] = Fraction(2)
    elif family == "D":
        last[rank - 2], last[rank - 1] = Fraction(1), Fraction(1)
    else:  # pragma: no cover - guarded by parse_type
        raise RootSystemError(f"unknown family {family}")
    roots.append(last)
    return roots


def _cartan_from_euclidean(roots: list[list[Fraction]]) -> tuple[tuple[int, ...], ...]:
    def dot(a, b):
        return sum(x * y for x, y in zip(a, b))

    rows = []
    for a in roots:
        row = []
        for b in roots:
            val = 2 * dot(a, b) / dot(b, b)
            assert val.denominator == 1
            row.append(int(val))
        rows.append(tuple(row))
    return tuple(rows)


def _cartan_exceptional(rank: int) -> tuple[tuple[int, ...], ...]:
    # Bourbaki: 1-3-4-5-6(-7) chain with node 2 attached to node 4.
    edges = [(1, 3), (3, 4), (4, 5), (5, 6), (2, 4)]
    if rank == 7:
        edges.append((6, 7))
    a = [[0] * rank for _ in range(rank)]
    for i in range(rank):
        a[i][i] = 2
    for i, j in edges:
        a[i - 1][j - 1] = a[j - 1][i - 1] = -1
    return tuple(tuple(r) for r in a)


def parse_type(label: str) -> tuple[str, int]:
    """Split a label such as ``"A2"`` or ``"E6"`` into family and rank."""
    label = label.strip().upper()
    if len(label) < 2 or label[0] not in "ABCDE" or not label[1:].isdigit():
        raise RootSystemError(f"cannot parse root system label {label!r}")
    return label[0], int(label[1:])


def _check_supported(family: str, rank: int) -> None:
    minimum = {"A": 1, "B": 2, "C": 2, "D": 4}
    if family in minimum:
        if rank < minimum[family]:
            raise RootSystemError(
                f"type {family}{rank} unsupported: {family}_n needs n >= {minimum[family]}"
            )
    elif family == "E":
        if rank not in (6, 7):
            raise RootSystemError(f"type E{rank} unsupported: only E6 and E7")
    else:
        raise RootSystemError(f"unknown family {family}")


@dataclass(frozen=True)
class RootDatum:
    """Adjoint root datum of an irreducible reduced root system.

    ``positive_roots`` are in simple-root coordinates, ordered by height and
    then so that the simple roots come first in index order.
    ``positive_coroots[k]`` is the coroot of ``positive_roots[k]`` in
    fundamental-coweight coordinates. ``rho[j] = <rho, omega_j^vee>`` is exact.
    """

    type_label: str
    rank: int
    cartan: tuple[tuple[int, ...], ...]
    positive_roots: tuple[tuple[int, ...], ...]
    positive_coroots: tuple[tuple[int, ...], ...]
    rho: tuple[Fraction, ...] = field(compare=False)

    @property
    def family(self) -> str:
        return self.type_label[0]

    @property
    def cartan_array(self) -> np.ndarray:
        return np.array(self.cartan, dtype=np.int64)

    @property
    def rho_vee(self) -> tuple[int, ...]:
        """Half the sum of positive coroots, i.e. the sum of fundamental coweights."""
        return (1,) * self.rank

    def simple_coroot(self, i: int) -> tuple[int, ...]:
        return tuple(self.cartan[j][i] for j in range(self.rank))

    def fundamental_coweight(self, i: int) -> tuple[int, ...]:
        v = [0] * self.rank
        v[i] = 1
        return tuple(v)

    @property
    def highest_root(self) -> tuple[int, ...]:
        return max(self.positive_roots, key=sum)

    @property
    def num_positive_roots(self) -> int:
        return len(self.positive_roots)

    def rho_pairing(self, mu: Sequence[int]) -> Fraction:
        """Exact value of ``<rho, mu^vee>``."""
        return sum((r * int(m) for r, m in zip(self.rho, mu)), Fraction(0))

    def is_dominant(self, mu: Sequence[int]) -> bool:
        return all(int(m) >= 0 for m in mu)

    def roots_array(self) -> np.ndarray:
        return np.array(self.positive_roots, dtype=np.int64)

    def coroots_array(self) -> np.ndarray:
        return np.array(self.positive_coroots, dtype=np.int64)

    def w0(self, mu: Sequence[int]) -> tuple[int, ...]:
        """Image of a coweight under the longest Weyl element."""
        return tuple(int(x) for x in _longest_action(self) @ np.asarray(mu, dtype=np.int64))


def build_root_datum(type_label: str, rank: int | None = None) -> RootDatum:
    """Build the adjoint root datum of the given Cartan type.

    Accepts ``build_root_datum("A", 2)`` or ``build_root_datum("A2")``.
    """
    if rank is None:
        family, rank = parse_type(type_label)
    else:
        family = type_label.strip().upper()
        if len(family) != 1:
            raise RootSystemError(
                "reducible or malformed type label; pass one irreducible family and a rank"
            )
    _check_supported(family, rank)
    return _build_cached(family, rank)


@lru_cache(maxsize=None)
def _build_cached(family: str, rank: int) -> RootDatum:
    if family == "E":
        cartan = _cartan_exceptional(rank)
    else:
        cartan = _cartan_from_euclidean(_euclidean_simple_roots(family, rank))
    roots, coroots = _positive_roots(cartan)
    total = [sum(r[j] for r in roots) for j in range(rank)]
    rho = tuple(Fraction(t, 2) for t in total)
    return RootDatum(f"{family}{rank}", rank, cartan, roots, coroots, rho)


def _positive_roots(cartan):
    """Close the simple roots (with their coroots) under simple reflections."""
    r = len(cartan)
    a = np.array(cartan, dtype=np.int64)
    seen: dict[tuple[int, ...], tuple[int, ...]] = {}
    queue: deque = deque()
    for i in range(r):
        root = tuple(int(i == j) for j in range(r))
        coroot = tuple(int(a[j, i]) for j in range(r))
        seen[root] = coroot
        queue.append((root, coroot))
    while queue:
        root, coroot = queue.popleft()
        for i in range(r):
            # <beta, alpha_i^vee> and <alpha_i, beta^vee>
            b_i = sum(root[j] * a[j, i] for j in range(r))
            c_i = coroot[i]
            new_root = list(root)
            new_root[i] -= int(b_i)
            new_coroot = [coroot[j] - c_i * int(a[j, i]) for j in range(r)]
            nr = tuple(new_root)
            if all(x >= 0 for x in nr) and any(nr) and nr not in seen:
                seen[nr] = tuple(int(x) for x in new_coroot)
                queue.append((nr, seen[nr]))
    order = sorted(seen, key=lambda b: (sum(b), tuple(-x for x in b)))
    return tuple(order), tuple(seen[b] for b in order)


def reflect(datum: RootDatum, i: int, mu: Sequence[int]) -> tuple[int, ...]:
    """Simple reflection ``s_i`` applied to a coweight."""
    if not 0 <= i < datum.rank:
        raise RootSystemError(f"simple root index {i} out of range for {datum.type_label}")
    c = int(mu[i])
    return tuple(int(mu[j]) - c * datum.cartan[j][i] for j in range(datum.rank))


def reflect_in_root(datum: RootDatum, k: int, mu: Sequence[int]) -> tuple[int, ...]:
    """Reflection in the hyperplane of the ``k``-th positive root."""
    beta = datum.positive_roots[k]
    cv = datum.positive_coroots[k]
    c = sum(b * int(m) for b, m in zip(beta, mu))
    return tuple(int(m) - c * x for m, x in zip(mu, cv))


def pair_root_coweight(datum: RootDatum, root: Sequence[int], mu: Sequence[int]) -> int:
    if len(root) != datum.rank or len(mu) != datum.rank:
        raise RootSystemError("dimension mismatch")
    return int(sum(int(a) * int(b) for a, b in zip(root, mu)))


def chamber_sign(datum: RootDatum, mu: Sequence[int]) -> int:
    """Sign of the Weyl element carrying the dominant chamber onto the chamber of ``mu``.

    Returns 0 when ``mu`` lies on a reflecting hyperplane.
    """
    pairings = datum.roots_array() @ np.asarray(mu, dtype=np.int64)
    if np.any(pairings == 0):
        return 0
    return -1 if int(np.count_nonzero(pairings < 0)) % 2 else 1


def weyl_orbit(
    datum: RootDatum, mu: Sequence[int], cap: int = DEFAULT_ENUMERATION_CAP
) -> list[tuple[int, ...]]:
    """The orbit ``W mu``, sorted lexicographically."""
    start = tuple(int(x) for x in mu)
    if len(start) != datum.rank:
        raise RootSystemError("dimension mismatch")
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for i in range(datum.rank):
            if v[i] == 0:
                continue
            w = reflect(datum, i, v)
            if w not in seen:
                seen.add(w)
                if len(seen) > cap:
                    raise EnumerationCapError(
                        f"orbit of {start} in {datum.type_label} exceeds cap {cap}"
                    )
                queue.append(w)
    return sorted(seen)


@dataclass(frozen=True)
class WeylElement:
    """A Weyl group element with a reduced word and its action on coweights."""

    word: tuple[int, ...]
    length: int
    action: np.ndarray = field(compare=False, repr=False)

    @property
    def sign(self) -> int:
        return -1 if self.length % 2 else 1

    def apply(self, mu: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(x) for x in self.action @ np.asarray(mu, dtype=np.int64))


@dataclass(frozen=True)
class WeylGroupTable:
    """Whole Weyl group in length-then-lexicographic order, as stacked arrays."""

    words: tuple[tuple[int, ...], ...]
    lengths: np.ndarray
    actions: np.ndarray  # shape (|W|, r, r), action on coweight coordinates

    @property
    def signs(self) -> np.ndarray:
        return np.where(self.lengths % 2 == 1, -1, 1)

    def __len__(self) -> int:
        return len(self.words)

    def element(self, k: int) -> WeylElement:
        return WeylElement(self.words[k], int(self.lengths[k]), self.actions[k])

    def images(self, mu: Sequence[int]) -> np.ndarray:
        """``w(mu)`` for every element, shape ``(|W|, r)``."""
        return self.actions @ np.asarray(mu, dtype=np.int64)


def _simple_reflection_matrices(datum: RootDatum) -> list[np.ndarray]:
    r = datum.rank
    a = datum.cartan_array
    mats = []
    for i in range(r):
        m = np.eye(r, dtype=np.int64)
        m[:, i] -= a[:, i]
        mats.append(m)
    return mats


def weyl_group(datum: RootDatum, cap: int = DEFAULT_ENUMERATION_CAP) -> WeylGroupTable:
    """Enumerate ``W`` by breadth-first search on the orbit of ``rho^vee``."""
    return _weyl_group_cached(datum, cap)


@lru_cache(maxsize=32)
def _weyl_group_cached(datum: RootDatum, cap: int) -> WeylGroupTable:
    r = datum.rank
    mats = _simple_reflection_matrices(datum)
    rho = np.ones(r, dtype=np.int64)
    layer: list[tuple[tuple[int, ...], np.ndarray]] = [((), np.eye(r, dtype=np.int64))]
    seen = {tuple(rho)}
    words: list[tuple[int, ...]] = []
    actions: list[np.ndarray] = []
    lengths: list[int] = []
    length = 0
    while layer:
        layer.sort(key=lambda item: item[0])
        for word, act in layer:
            words.append(word)
            actions.append(act)
            lengths.append(length)
        if len(words) > cap:
            raise EnumerationCapError(
                f"Weyl group of {datum.type_label} exceeds enumeration cap {cap}"
            )
        nxt = []
        for word, act in layer:
            for i in range(r):
                new = mats[i] @ act
                key = tuple(int(x) for x in new @ rho)
                if key not in seen:
                    seen.add(key)
                    nxt.append(((i,) + word, new))
        layer = nxt
        length += 1
    return WeylGroupTable(
        tuple(words), np.array(lengths, dtype=np.int64), np.array(actions, dtype=np.int64)
    )


def weyl_elements(datum: RootDatum, cap: int = DEFAULT_ENUMERATION_CAP) -> list[WeylElement]:
    table = weyl_group(datum, cap)
    return [table.element(k) for k in range(len(table))]


@lru_cache(maxsize=None)
def _longest_action_cached(datum: RootDatum) -> bytes:
    # Build w0 from a reduced word found by descending from rho^vee to -rho^vee.
    r = datum.rank
    mats = _simple_reflection_matrices(datum)
    act = np.eye(r, dtype=np.int64)
    v = np.ones(r, dtype=np.int64)
    while np.any(v > 0):
        i = int(np.argmax(v > 0))
        act = mats[i] @ act
        v = act @ np.ones(r, dtype=np.int64)
    return act.tobytes()


def _longest_action(datum: RootDatum) -> np.ndarray:
    r = datum.rank
    return np.frombuffer(_longest_action_cached(datum), dtype=np.int64).reshape(r, r)


def is_minuscule(
    datum: RootDatum, mu: Sequence[int], cap: int = DEFAULT_ENUMERATION_CAP
) -> bool:
    """Dominant, nonzero, and every root pairs into {-1, 0, 1} with every orbit point.

    The orbit search stops at the first pairing outside that range, so
    non-minuscule coweights are rejected without enumerating their orbit.
    """
    start = tuple(int(x) for x in mu)
    if not any(start) or not datum.is_dominant(start):
        return False
    roots = datum.roots_array()
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        if np.any(np.abs(roots @ np.asarray(v, dtype=np.int64)) > 1):
            return False
        for i in range(datum.rank):
            if v[i] == 0:
                continue
            w = reflect(datum, i, v)
            if w not in seen:
                seen.add(w)
                if len(seen) > cap:
                    raise EnumerationCapError(
                        f"orbit of {start} in {datum.type_label} exceeds cap {cap}"
                    )
                queue.append(w)
    return True


def minuscule_coweights(
    datum: RootDatum, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[tuple[int, ...]]:
    """All minuscule coweights, as fundamental-coweight coordinate tuples.

    A dominant coweight whose coordinates sum to at least two pairs to at
    least two with the highest root, so only fundamental coweights can
    qualify; each is then tested over its orbit.
    """
    out = []
    for i in range(datum.rank):
        w = datum.fundamental_coweight(i)
        if is_minuscule(datum, w, cap):
            out.append(w)
    return out


def to_json(datum: RootDatum) -> str:
    return json.dumps(
        {
            "type": datum.type_label,
            "rank": datum.rank,
            "cartan": [list(r) for r in datum.cartan],
            "positive_roots": [list(r) for r in datum.positive_roots],
            "positive_coroots": [list(r) for r in datum.positive_coroots],
            "rho": [str(x) for x in datum.rho],
        },
        sort_keys=True,
    )


def from_json(text: str) -> RootDatum:
    data = json.loads(text)
    family, rank = parse_type(data["type"])
    datum = build_root_datum(family, rank)
    if [list(r) for r in datum.cartan] != data["cartan"]:
        raise RootSystemError("serialized Cartan matrix does not match the named type")
    return datum

