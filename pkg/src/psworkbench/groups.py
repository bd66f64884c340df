"""Möbius maps, isometry classification, and orbit-ball enumeration.

Group elements are ``SL(2, R)`` matrices acting on the upper half-plane; they
act on the disk through the Cayley transform, where they become ``SU(1, 1)``
matrices ``[[A, B], [conj(B), conj(A)]]`` with

    A = ((a + d) + i (b - c)) / 2,    B = ((a - d) - i (b + c)) / 2.

Ball enumeration works on ``(n, 4)`` float arrays of matrix entries so that a
few million elements stay cheap.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .hyperbolic import (
    ORIGIN,
    BoundaryPoint,
    DiskPoint,
    Geodesic,
    _to_origin,
    angular_dist,
    direction_at,
    geodesic_between,
    normalize_angle,
)

log = logging.getLogger(__name__)

MATRIX_TOL = 1e-9
DET_TOL = 1e-12


class InvalidGenerator(ValueError):
    pass


class NotAxialError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """Raised by :func:`enumerate_ball` when ``max_elements`` is hit; ``partial`` holds the incomplete ball."""

    def __init__(self, message: str, partial: "OrbitBall"):
        super().__init__(message)
        self.partial = partial


def _canonical_sign(a, b, c, d):
    for x in (a, b, c, d):
        if abs(x) > 1e-12:
            return (a, b, c, d) if x > 0 else (-a, -b, -c, -d)
    return a, b, c, d


@dataclass(frozen=True)
class MobiusMap:
    """Orientation-preserving isometry ``w -> (a w + b) / (c w + d)`` of the half-plane.

    The determinant is renormalized to 1 and the sign fixed so that the first
    nonzero entry is positive (``M`` and ``-M`` are the same isometry).
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = (float(x) for x in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if not det > 0:
            raise InvalidGenerator(f"matrix has non-positive determinant {det}")
        if abs(det - 1.0) > DET_TOL:
            s = math.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        a, b, c, d = _canonical_sign(a, b, c, d)
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, v)

    @classmethod
    def from_matrix(cls, m, det_tol: float | None = None) -> "MobiusMap":
        """Build from a 2x2 nested sequence; reject if ``|det - 1| > det_tol``."""
        (a, b), (c, d) = m
        if det_tol is not None:
            det = a * d - b * c
            if abs(det - 1.0) > det_tol:
                raise InvalidGenerator(f"generator {m} has determinant {det}, expected 1")
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation(cls, length: float) -> "MobiusMap":
        """Axial map ``diag(e^{l/2}, e^{-l/2})`` along the imaginary axis (the real diameter of the disk)."""
        return cls(math.exp(length / 2), 0.0, 0.0, math.exp(-length / 2))

    @classmethod
    def rotation(cls, angle: float) -> "MobiusMap":
        """Rotation of the disk about its centre by ``angle``."""
        h = angle / 2
        return cls(math.cos(h), math.sin(h), -math.sin(h), math.cos(h))

    @classmethod
    def moving_origin_to(cls, p: DiskPoint) -> "MobiusMap":
        """An element sending the disk centre (``i`` in the half-plane) to ``p``."""
        w = p.to_halfplane()
        y = math.sqrt(w.imag)
        return cls(y, w.real / y, 0.0, 1.0 / y)

    @property
    def entries(self) -> tuple[float, float, float, float]:
        return self.a, self.b, self.c, self.d

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return MobiusMap(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def power(self, n: int) -> "MobiusMap":
        base = self if n >= 0 else self.inverse()
        out = MobiusMap.identity()
        for _ in range(abs(n)):
            out = out @ base
        return out

    def trace(self) -> float:
        return self.a + self.d

    def su11(self) -> tuple[complex, complex]:
        a, b, c, d = self.entries
        return complex(a + d, b - c) / 2, complex(a - d, -(b + c)) / 2

    def apply(self, z):
        """Action on the disk (points or unit complex numbers)."""
        A, B = self.su11()
        z = z.z if isinstance(z, (DiskPoint, BoundaryPoint)) else z
        return (A * z + B) / (B.conjugate() * z + A.conjugate())

    def apply_point(self, p: DiskPoint) -> DiskPoint:
        return DiskPoint.from_complex(self.apply(p.z))

    def apply_halfplane(self, w: complex) -> complex:
        return (self.a * w + self.b) / (self.c * w + self.d)

    def boundary_action(self, xi):
        """Image of an ideal point (angle or :class:`BoundaryPoint`)."""
        if isinstance(xi, BoundaryPoint):
            return BoundaryPoint.from_complex(self.apply(xi.z))
        u = self.apply(np.exp(1j * np.asarray(xi, dtype=float)))
        return normalize_angle(np.angle(u))

    def displacement(self, p: DiskPoint = ORIGIN) -> float:
        return float(displacement_arrays(np.array([self.entries]), p, p)[0])

    def close_to(self, other: "MobiusMap", tol: float = MATRIX_TOL) -> bool:
        return max(abs(x - y) for x, y in zip(self.entries, other.entries)) <= tol


class IsometryType(str, enum.Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    AXIAL = "axial"


def classify(m: MobiusMap, tol: float = MATRIX_TOL) -> IsometryType:
    if m.close_to(MobiusMap.identity(), tol):
        return IsometryType.IDENTITY
    t = abs(m.trace())
    if abs(t - 2.0) <= tol:
        return IsometryType.PARABOLIC
    return IsometryType.ELLIPTIC if t < 2.0 else IsometryType.AXIAL


def fixed_boundary_points(m: MobiusMap) -> list[BoundaryPoint]:
    """Fixed ideal points: two for axial maps, one for parabolic, none for elliptic."""
    kind = classify(m)
    if kind is IsometryType.IDENTITY:
        raise ValueError("every point is fixed by the identity")
    if kind is IsometryType.ELLIPTIC:
        return []
    A, B = m.su11()
    # conj(B) z^2 + (conj(A) - A) z - B = 0 on the unit circle
    qa, qb, qc = B.conjugate(), A.conjugate() - A, -B
    if kind is IsometryType.PARABOLIC:
        return [BoundaryPoint.from_complex(-qb / (2 * qa))]
    disc = np.sqrt(complex(qb * qb - 4 * qa * qc))
    roots = [(-qb + disc) / (2 * qa), (-qb - disc) / (2 * qa)]
    return [BoundaryPoint.from_complex(r / abs(r)) for r in roots]


def translation_length(m: MobiusMap) -> float:
    return 2.0 * math.acosh(max(1.0, abs(m.trace()) / 2.0))


def axis_and_length(m: MobiusMap) -> tuple[Geodesic, float]:
    """Axis oriented from the repelling to the attracting fixed point, and the translation length."""
    if classify(m) is not IsometryType.AXIAL:
        raise NotAxialError("axis is only defined for axial elements")
    A, B = m.su11()
    pts = fixed_boundary_points(m)
    # attracting fixed point: |derivative| = 1/|conj(B) z + conj(A)|^2 < 1
    gain = [abs(B.conjugate() * p.z + A.conjugate()) for p in pts]
    rep, att = (pts[0], pts[1]) if gain[0] < gain[1] else (pts[1], pts[0])
    return geodesic_between(rep, att), translation_length(m)


@dataclass
class CommutingAudit:
    commuting: bool
    commutator_residual: float
    fixed_point_residuals: tuple[float, float] | None
    passed: bool
    verdict: str


def commuting_fixed_point_audit(alpha: MobiusMap, beta: MobiusMap, n: int,
                                tol: float = MATRIX_TOL, angle_tol: float = 1e-6) -> CommutingAudit:
    """If ``beta alpha^n = alpha^n beta``, check that ``beta`` fixes both axis endpoints of ``alpha``."""
    if classify(alpha) is not IsometryType.AXIAL:
        raise NotAxialError("alpha must be axial")
    if n == 0:
        raise ValueError("n must be nonzero")
    an = alpha.power(n)
    x = np.array((beta @ an).entries)
    y = np.array((an @ beta).entries)
    # the canonical sign already identifies M with -M
    residual = float(np.max(np.abs(x - y)))
    if residual > tol * max(1.0, float(np.max(np.abs(x)))):
        return CommutingAudit(False, residual, None, False, "not commuting")
    g, _ = axis_and_length(alpha)
    res = tuple(angular_dist(beta.boundary_action(e).theta, e.theta)
                for e in (g.theta_minus, g.theta_plus))
    ok = max(res) <= angle_tol
    return CommutingAudit(True, residual, res, ok, "pass" if ok else "fail")


# -- orbit balls -----------------------------------------------------------------

def su11_arrays(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b, c, d = mats[:, 0], mats[:, 1], mats[:, 2], mats[:, 3]
    return (a + d + 1j * (b - c)) / 2, (a - d - 1j * (b + c)) / 2


def matmul_arrays(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise product of ``(n, 4)`` matrix arrays (either side may be a single row)."""
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    return np.stack([
        x[:, 0] * y[:, 0] + x[:, 1] * y[:, 2],
        x[:, 0] * y[:, 1] + x[:, 1] * y[:, 3],
        x[:, 2] * y[:, 0] + x[:, 3] * y[:, 2],
        x[:, 2] * y[:, 1] + x[:, 3] * y[:, 3],
    ], axis=1)


def canonicalize_arrays(mats: np.ndarray) -> np.ndarray:
    """Flip rows so that the first entry with ``|x| > 1e-12`` is positive."""
    big = np.abs(mats) > 1e-12
    first = np.argmax(big, axis=1)
    lead = mats[np.arange(len(mats)), first]
    return mats * np.where(lead < 0, -1.0, 1.0)[:, None]


def displacement_arrays(mats: np.ndarray, p: DiskPoint = ORIGIN, q: DiskPoint = ORIGIN) -> np.ndarray:
    """``d(p, alpha q)`` for each row, via ``2 asinh |B|`` of ``g_p^{-1} alpha g_q``.

    This form stays accurate both for tiny distances and for orbit points
    numerically on the circle.
    """
    w = mats
    if q != ORIGIN:
        w = matmul_arrays(w, np.array(MobiusMap.moving_origin_to(q).entries))
    if p != ORIGIN:
        w = matmul_arrays(np.array(MobiusMap.moving_origin_to(p).inverse().entries), w)
    a, b, c, d = w[:, 0], w[:, 1], w[:, 2], w[:, 3]
    return 2.0 * np.arcsinh(0.5 * np.hypot(a - d, b + c))


def directions_arrays(mats: np.ndarray, p: DiskPoint, q: DiskPoint) -> np.ndarray:
    """Boundary angle of the ray from ``p`` through ``alpha q`` for each row."""
    gp = MobiusMap.moving_origin_to(p)
    w = mats
    if q != ORIGIN:
        w = matmul_arrays(w, np.array(MobiusMap.moving_origin_to(q).entries))
    if p != ORIGIN:
        w = matmul_arrays(np.array(gp.inverse().entries), w)
    A, B = su11_arrays(w)
    local = np.angle(A * B)
    if p == ORIGIN:
        return normalize_angle(local)
    return gp.boundary_action(local)


def apply_arrays(mats: np.ndarray, z) -> np.ndarray:
    """Disk action of every row on the point (or unit complex) ``z``."""
    A, B = su11_arrays(mats)
    return (A * z + B) / (np.conj(B) * z + np.conj(A))


@dataclass
class OrbitBall:
    """Deduplicated ``{alpha : d(p, alpha q) <= radius}`` sorted by distance then shortlex word.

    Words are stored as parent pointers into the BFS node table; letters are
    ``+k`` for generator ``k`` (1-based) and ``-k`` for its inverse.
    """

    base_p: DiskPoint
    base_q: DiskPoint
    radius: float
    generators: list[MobiusMap]
    matrices: np.ndarray
    distances: np.ndarray
    nodes: np.ndarray
    node_parent: np.ndarray
    node_letter: np.ndarray
    complete: bool = True
    duplicates_merged: int = 0
    near_collisions: int = 0
    nodes_explored: int = 0
    label: str = ""

    def __len__(self) -> int:
        return len(self.distances)

    def word(self, i: int) -> tuple[int, ...]:
        out = []
        n = int(self.nodes[i])
        while n > 0:
            out.append(int(self.node_letter[n]))
            n = int(self.node_parent[n])
        return tuple(reversed(out))

    def words(self) -> list[tuple[int, ...]]:
        return [self.word(i) for i in range(len(self))]

    def map(self, i: int) -> MobiusMap:
        return MobiusMap(*self.matrices[i])

    def points(self) -> np.ndarray:
        """Disk coordinates of the orbit points ``alpha q``."""
        return apply_arrays(self.matrices, self.base_q.z)

    def elements(self) -> Iterator[tuple[tuple[int, ...], MobiusMap, complex, float]]:
        pts = self.points()
        for i in range(len(self)):
            yield self.word(i), self.map(i), complex(pts[i]), float(self.distances[i])

    def prefix(self, radius: float) -> "OrbitBall":
        """Sub-ball of elements with distance ``<= radius`` (a prefix of the sorted list)."""
        k = int(np.searchsorted(self.distances, radius, side="right"))
        return OrbitBall(self.base_p, self.base_q, min(radius, self.radius), self.generators,
                         self.matrices[:k], self.distances[:k], self.nodes[:k],
                         self.node_parent, self.node_letter, self.complete,
                         self.duplicates_merged, self.near_collisions, self.nodes_explored,
                         self.label)

    def subset(self, mask: np.ndarray) -> "OrbitBall":
        return OrbitBall(self.base_p, self.base_q, self.radius, self.generators,
                         self.matrices[mask], self.distances[mask], self.nodes[mask],
                         self.node_parent, self.node_letter, self.complete,
                         self.duplicates_merged, self.near_collisions, self.nodes_explored,
                         self.label)

    def exponent_sums(self, generator: int) -> np.ndarray:
        """Exponent sum of generator ``generator`` (1-based) in each element's word."""
        step = np.where(self.node_letter == generator, 1,
                        np.where(self.node_letter == -generator, -1, 0)).astype(np.int64)
        # pointer jumping: acc[n] sums steps over the last 2^k ancestors of n
        acc, anc = step.copy(), self.node_parent.astype(np.int64)
        while np.any(anc >= 0):
            live = anc >= 0
            acc[live] += acc[anc[live]]
            anc[live] = anc[anc[live]]
        total = acc
        return total[self.nodes]

    def contains_map(self, m: MobiusMap, tol: float = MATRIX_TOL) -> bool:
        diff = np.max(np.abs(self.matrices - np.array(m.entries)), axis=1)
        return bool(np.any(diff <= tol * np.maximum(1.0, np.max(np.abs(self.matrices), axis=1))))


def _alphabet(gens: Sequence[MobiusMap]) -> tuple[list[int], np.ndarray]:
    letters, mats = [], []
    for k, g in enumerate(gens, start=1):
        letters.append(k)
        mats.append(g.entries)
        inv = g.inverse()
        if not inv.close_to(g):
            letters.append(-k)
            mats.append(inv.entries)
    return letters, np.array(mats, dtype=float)


_MIX = np.array([0x9E3779B97F4A7C15, 0xC2B2AE3D27D4EB4F, 0x165667B19E3779F9, 0xD6E8FEB86659FD93],
                dtype=np.uint64)


def _hash_rows(mats: np.ndarray, tol: float) -> np.ndarray:
    """64-bit hash of the matrix rounded to a ``tol`` grid."""
    k = np.rint(mats / tol).astype(np.int64).view(np.uint64)
    with np.errstate(over="ignore"):
        h = (k * _MIX).sum(axis=1, dtype=np.uint64)
        h ^= h >> np.uint64(31)
        h *= np.uint64(0xBF58476D1CE4E5B9)
        h ^= h >> np.uint64(29)
    h[h == 0] = 1  # zero marks an empty slot
    return h


class _HashSet:
    """Open-addressing set of nonzero uint64 hashes with vectorized lookup and insert."""

    def __init__(self, capacity: int = 1 << 16):
        self.table = np.zeros(capacity, dtype=np.uint64)
        self.size = 0

    def _probe(self, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (found, slot): slot is the matching or first empty position."""
        mask = np.uint64(len(self.table) - 1)
        slot = h & mask
        found = np.zeros(len(h), dtype=bool)
        todo = np.arange(len(h))
        while len(todo):
            v = self.table[slot[todo]]
            hit = v == h[todo]
            found[todo[hit]] = True
            todo = todo[~hit & (v != 0)]
            slot[todo] = (slot[todo] + np.uint64(1)) & mask
        return found, slot

    def contains(self, h: np.ndarray) -> np.ndarray:
        return self._probe(h)[0]

    def add(self, h: np.ndarray) -> None:
        """Insert distinct hashes not already present."""
        if 2 * (self.size + len(h)) > len(self.table):
            old = self.table[self.table != 0]
            cap = len(self.table)
            while 2 * (self.size + len(h)) > cap:
                cap *= 2
            self.table = np.zeros(cap, dtype=np.uint64)
            self.size = 0
            self.add(old)
        h = h.copy()
        while len(h):
            _, slot = self._probe(h)
            self.table[slot] = h
            won = self.table[slot] == h
            self.size += int(won.sum())
            h = h[~won]


def enumerate_ball(gens: Sequence[MobiusMap], p: DiskPoint = ORIGIN, q: DiskPoint = ORIGIN,
                   radius: float = 10.0, max_elements: int = 60_000_000,
                   prune_slack: float | None = None, tol: float = MATRIX_TOL,
                   renormalize_every: int = 8, label: str = "") -> OrbitBall:
    """Breadth-first enumeration of the orbit ball ``{alpha : d(p, alpha q) <= radius}``.

    Words grow on the right, so a child ``alpha g`` moves ``alpha q`` by at most
    ``d(q, g q)``.  A node is expanded only while ``d(p, alpha q) <= radius +
    prune_slack`` (default: twice the largest generator displacement at q);
    nodes beyond that are discarded outright, which is safe because any
    duplicate of them sits at the same distance.  Duplicates are merged by
    hashing canonical matrices rounded to a ``tol`` grid.  ``max_elements``
    bounds the number of stored nodes.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if radius > 40:
        # entries grow like exp(radius / 2) and the tol-grid hash leaves int64 range
        raise ValueError("radius above 40 is not supported")
    if not gens:
        raise ValueError("need at least one generator")
    letters, letter_mats = _alphabet(gens)
    inverse_of = np.array([letters.index(-l) if -l in letters else letters.index(l) for l in letters])
    disp = displacement_arrays(letter_mats, q, q)
    if prune_slack is None:
        prune_slack = 2.0 * float(disp.max())
    limit = radius + prune_slack
    letter_codes = np.array(letters, dtype=np.int8)

    identity = np.array([[1.0, 0.0, 0.0, 1.0]])
    d0 = displacement_arrays(identity, p, q)
    node_parent = [np.array([-1], dtype=np.int32)]
    node_letter = [np.array([0], dtype=np.int8)]
    kept_nodes, kept_mats, kept_dist = [], [], []
    if d0[0] <= radius:
        kept_nodes.append(np.array([0], dtype=np.int64))
        kept_mats.append(identity)
        kept_dist.append(d0)
    n_nodes = 1
    merged = 0
    seen = _HashSet()
    seen.add(_hash_rows(identity, tol))

    front_mats = identity
    front_nodes = np.array([0], dtype=np.int64)
    front_last = np.array([-1], dtype=np.int64)
    level = 0
    complete = True

    while len(front_mats):
        level += 1
        # children in shortlex order: parent-major, then letter order
        f = front_mats[:, None, :]
        g = letter_mats[None, :, :]
        mats = np.stack([
            f[..., 0] * g[..., 0] + f[..., 1] * g[..., 2],
            f[..., 0] * g[..., 1] + f[..., 1] * g[..., 3],
            f[..., 2] * g[..., 0] + f[..., 3] * g[..., 2],
            f[..., 2] * g[..., 1] + f[..., 3] * g[..., 3],
        ], axis=-1)
        allowed = inverse_of[None, :] != front_last[:, None]
        parent_pos, letter_idx = np.nonzero(allowed)
        mats = mats[allowed]
        if renormalize_every and level % renormalize_every == 0:
            det = mats[:, 0] * mats[:, 3] - mats[:, 1] * mats[:, 2]
            mats = mats / np.sqrt(det)[:, None]
        dist = displacement_arrays(mats, p, q)
        alive = dist <= limit
        mats, parent_pos, letter_idx, dist = mats[alive], parent_pos[alive], letter_idx[alive], dist[alive]
        mats = canonicalize_arrays(mats)

        h = _hash_rows(mats, tol)
        _, first = np.unique(h, return_index=True)
        fresh = np.zeros(len(h), dtype=bool)
        fresh[first] = True
        fresh &= ~seen.contains(h)
        merged += int(len(h) - fresh.sum())
        mats, parent_pos, letter_idx, dist, h = (x[fresh] for x in (mats, parent_pos, letter_idx, dist, h))
        seen.add(h)

        ids = np.arange(n_nodes, n_nodes + len(mats), dtype=np.int64)
        n_nodes += len(mats)
        node_parent.append(front_nodes[parent_pos].astype(np.int32))
        node_letter.append(letter_codes[letter_idx])
        keep = dist <= radius
        kept_nodes.append(ids[keep])
        kept_mats.append(mats[keep])
        kept_dist.append(dist[keep])

        front_mats = mats
        front_nodes = ids
        front_last = letter_idx
        if n_nodes >= max_elements and len(front_mats):
            complete = False
            break

    nodes = np.concatenate(kept_nodes)
    mats = np.concatenate(kept_mats)
    dists = np.concatenate(kept_dist)
    order = np.lexsort((nodes, dists))
    ball = OrbitBall(p, q, float(radius), list(gens), mats[order], dists[order], nodes[order],
                     np.concatenate(node_parent), np.concatenate(node_letter),
                     complete=complete, duplicates_merged=merged, nodes_explored=n_nodes,
                     label=label)
    ball.near_collisions = _near_identity_count(ball.matrices)
    if not complete:
        raise BudgetExceeded(f"enumeration stopped after {n_nodes} nodes (radius {radius})", ball)
    return ball


def _near_identity_count(mats: np.ndarray, tol: float = 1e-6) -> int:
    """Distinct elements (other than the identity) within ``tol`` of the identity: a
    heuristic sign of non-discreteness."""
    dev = np.max(np.abs(mats - np.array([1.0, 0.0, 0.0, 1.0])), axis=1)
    return int(np.sum((dev > MATRIX_TOL) & (dev < tol)))


def annuli_counts(ball: OrbitBall) -> np.ndarray:
    """``a_n = #{alpha : n - 1 < d(p, alpha q) <= n}`` for ``n = 0 .. floor(radius)``."""
    if not ball.complete:
        log.warning("annuli of an incomplete ball undercount the outer shells")
    n_max = int(math.floor(ball.radius + 1e-9))
    idx = annulus_index(ball.distances)
    return np.bincount(idx[idx <= n_max], minlength=n_max + 1)


def annulus_index(distances: np.ndarray, slack: float = 1e-9) -> np.ndarray:
    """Annulus ``n`` with ``n - 1 < d <= n``; values within ``slack`` above an integer stay in it."""
    return np.maximum(np.ceil(distances - slack), 0).astype(np.int64)


@dataclass
class DualWitness:
    index: int
    word: tuple[int, ...]
    residual: float


def dual_pair_witness(ball: OrbitBall, xi, eta, eps: float, min_distance: float = 1.0) -> DualWitness | None:
    """Best ``alpha`` in the ball with ``alpha^{-1} p`` towards ``xi`` and ``alpha p`` towards ``eta``.

    Residual is ``max(angle_p(alpha^{-1} p, xi), angle_p(alpha p, eta))``; elements
    moving ``p`` by less than ``min_distance`` are ignored (their direction
    says nothing about convergence to the boundary).
    """
    p = ball.base_p
    xi_t = xi.theta if isinstance(xi, BoundaryPoint) else float(xi)
    eta_t = eta.theta if isinstance(eta, BoundaryPoint) else float(eta)
    mats = ball.matrices
    inv = mats[:, [3, 1, 2, 0]] * np.array([1.0, -1.0, -1.0, 1.0])
    d = displacement_arrays(mats, p, p)
    far = d >= min_distance
    if not np.any(far):
        return None
    xi_dir = direction_at(p, BoundaryPoint(xi_t))
    eta_dir = direction_at(p, BoundaryPoint(eta_t))
    fwd = _local_directions(mats, p)
    back = _local_directions(inv, p)
    res = np.maximum(angular_dist(back, xi_dir), angular_dist(fwd, eta_dir))
    res = np.where(far, res, np.inf)
    i = int(np.argmin(res))
    if not res[i] < eps:
        return None
    return DualWitness(i, ball.word(i), float(res[i]))


def _local_directions(mats: np.ndarray, p: DiskPoint) -> np.ndarray:
    """Direction at ``p`` (in the frame moving ``p`` to 0) of ``alpha p`` for each row."""
    w = mats
    if p != ORIGIN:
        g = MobiusMap.moving_origin_to(p)
        w = matmul_arrays(matmul_arrays(np.array(g.inverse().entries), w), np.array(g.entries))
    A, B = su11_arrays(w)
    if p == ORIGIN:
        return normalize_angle(np.angle(A * B))
    # the frame of g^{-1} differs from the frame of _to_origin by a rotation
    pz = p.z
    g = MobiusMap.moving_origin_to(p)
    probe = _to_origin(pz, g.apply(1.0 + 0j))
    return normalize_angle(np.angle(A * B) + np.angle(probe))


# -- presets ----------------------------------------------------------------------

@dataclass
class GroupPreset:
    name: str
    generators: list[MobiusMap]
    expected_delta: float | None = None
    provenance: str = ""
    default_radius: float = 14.0
    word_filter: Callable[[OrbitBall], np.ndarray] | None = field(default=None, repr=False)
    elementary: bool = False

    def __post_init__(self):
        if not self.generators:
            raise ValueError("preset needs at least one generator")
        if any(classify(g) is IsometryType.IDENTITY for g in self.generators):
            raise ValueError("identity is not allowed as a generator")

    def ball(self, radius: float | None = None, p: DiskPoint = ORIGIN, q: DiskPoint = ORIGIN,
             **kw) -> OrbitBall:
        r = self.default_radius if radius is None else radius
        ball = enumerate_ball(self.generators, p, q, r, label=self.name, **kw)
        if self.word_filter is not None:
            ball = ball.subset(self.word_filter(ball))
        return ball


def cyclic_axial(length: float = 2.0) -> GroupPreset:
    return GroupPreset("cyclic_axial", [MobiusMap.translation(length)], 0.0,
                       "cyclic group: polynomial orbit growth", default_radius=30.0, elementary=True)


def cyclic_parabolic() -> GroupPreset:
    return GroupPreset("cyclic_parabolic", [MobiusMap(1.0, 1.0, 0.0, 1.0)], 0.5,
                       "d(i, i + n) = 2 asinh(n/2) so N(R) ~ 4 sinh(R/2)", default_radius=16.0,
                       elementary=True)


def modular() -> GroupPreset:
    S = MobiusMap(0.0, -1.0, 1.0, 0.0)
    T = MobiusMap(1.0, 1.0, 0.0, 1.0)
    return GroupPreset("modular", [S, T], 1.0, "lattice in PSL(2,R): critical exponent 1",
                       default_radius=14.0)


def schottky_perp(lam: float = 3.0) -> GroupPreset:
    A = MobiusMap(lam, 0.0, 0.0, 1.0 / lam)
    R = MobiusMap.rotation(math.pi / 2)
    B = R @ A @ R.inverse()
    return GroupPreset("schottky_perp", [A, B], None,
                       "ping-pong with perpendicular axes; discreteness assumed for lam >= 3",
                       default_radius=14.0)


def zcover_schottky(lam: float = 3.0) -> GroupPreset:
    base = schottky_perp(lam)

    def zero_sum(ball: OrbitBall) -> np.ndarray:
        return ball.exponent_sums(1) == 0

    return GroupPreset("zcover_schottky", base.generators, None,
                       "kernel of the exponent sum in A: infinitely generated normal subgroup",
                       default_radius=14.0, word_filter=zero_sum)


PRESETS: dict[str, Callable[[], GroupPreset]] = {
    "cyclic_axial": cyclic_axial,
    "cyclic_parabolic": cyclic_parabolic,
    "modular": modular,
    "schottky_perp": schottky_perp,
    "zcover_schottky": zcover_schottky,
}


def get_preset(name: str, **params) -> GroupPreset:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return factory(**params)
