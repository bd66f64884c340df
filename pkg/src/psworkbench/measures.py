"""Binned Patterson-Sullivan measures and their audits.

A histogram is built from the orbit atoms ``alpha p0`` of a ball: each atom
gets weight ``exp(-s d(p, alpha p0)) / P(s, p0, p0)`` and is binned by the
direction of the ray from ``p`` through it.  The atoms are kept alongside
the bins so that arc masses, refinements, and pullbacks stay exact.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .groups import (
    MATRIX_TOL,
    MobiusMap,
    OrbitBall,
    apply_arrays,
    axis_and_length,
    directions_arrays,
    displacement_arrays,
)
from .hyperbolic import TWO_PI, DiskPoint, _from_origin, _to_origin, busemann, normalize_angle
from .parallel import binned_sum
from .series import annulus_sums

log = logging.getLogger(__name__)

MASS_FLOOR = 1e-12
EXCLUDE_RADIUS = 1e-6
EDGE_SNAP = 1e-9
FINEST_BINS = 65536


class EmptyBall(ValueError):
    pass


def bin_index(theta, bins: int) -> np.ndarray:
    """Bin ``k`` covers ``[2 pi k / B, 2 pi (k+1) / B)``.

    Angles within ``1e-9`` of a finest-grid bin width below an edge are
    snapped up to that edge, so an atom computed along two routes lands in
    one bin.  Power-of-two bin counts are read off the finest grid, so a
    coarse bin is exactly the union of its fine bins.
    """
    if FINEST_BINS % bins == 0:
        x = np.asarray(theta, float) * (FINEST_BINS / TWO_PI)
        fine = np.mod(np.floor(x + EDGE_SNAP).astype(np.int64), FINEST_BINS)
        return fine // (FINEST_BINS // bins)
    x = np.asarray(theta, float) * (bins / TWO_PI)
    return np.mod(np.floor(x + EDGE_SNAP).astype(np.int64), bins)


def bin_centers(bins: int) -> np.ndarray:
    return (np.arange(bins) + 0.5) * (TWO_PI / bins)


@dataclass
class MeasureHistogram:
    bins: int
    weights: np.ndarray
    base_point: DiskPoint
    s_param: float
    ball_radius: float
    total_mass: float
    atom_angles: np.ndarray = field(repr=False)
    atom_weights: np.ndarray = field(repr=False)
    atom_depths: np.ndarray = field(repr=False)
    excluded: int = 0
    degenerate: bool = False
    atom_limits: np.ndarray | None = field(default=None, repr=False)

    def limit_points(self) -> np.ndarray:
        """One ideal point per bin for sampling; NaN for bins without atoms.

        When the histogram carries ``atom_limits`` (images ``alpha xi0`` of a
        fixed limit point) the bin's point is the image under its deepest
        atom, which is an exact limit point resolved to the ball's depth.
        Bins whose image falls outside the bin, and histograms without
        ``atom_limits``, use the bin centre.
        """
        k = bin_index(self.atom_angles, self.bins)
        out = np.full(self.bins, np.nan)
        if self.atom_limits is None:
            out[np.unique(k)] = self.centers[np.unique(k)]
            return out
        order = np.lexsort((self.atom_depths, k))
        last = np.flatnonzero(np.append(k[order][1:] != k[order][:-1], True))
        kb = k[order][last]
        img = self.atom_limits[order][last]
        # an image that left its bin (e.g. a fixed point of the bin's element) gives way to the centre
        inside = bin_index(img, self.bins) == kb
        out[kb] = np.where(inside, img, self.centers[kb])
        return out

    @property
    def centers(self) -> np.ndarray:
        return bin_centers(self.bins)

    @property
    def bin_width(self) -> float:
        return TWO_PI / self.bins

    def rebin(self, bins: int) -> "MeasureHistogram":
        return _histogram_from_atoms(self.atom_angles, self.atom_weights, self.atom_depths, bins,
                                     self.base_point, self.s_param, self.ball_radius, self.excluded,
                                     self.atom_limits)

    def positive_bins(self, floor: float = MASS_FLOOR) -> np.ndarray:
        return self.weights > floor * max(self.total_mass, 0.0)

    def cdf(self, theta) -> np.ndarray:
        """Mass of ``[0, theta)`` with the mass of each bin spread uniformly over it."""
        x = np.asarray(theta, float) * (self.bins / TWO_PI)
        k = np.clip(np.floor(x).astype(np.int64), 0, self.bins - 1)
        c = np.concatenate([[0.0], np.cumsum(self.weights)])
        return c[k] + self.weights[k] * (x - k)

    def arc_mass(self, start, length) -> np.ndarray:
        """Mass of the counter-clockwise arcs ``[start, start + length)`` with fractional bin coverage."""
        start = normalize_angle(np.asarray(start, float))
        length = np.asarray(length, float)
        end = start + length
        total = float(np.sum(self.weights))
        wrap = end > TWO_PI
        hi = self.cdf(np.where(wrap, end - TWO_PI, end))
        lo = self.cdf(start)
        out = np.where(wrap, total - lo + hi, hi - lo)
        return np.where(length >= TWO_PI, total, np.maximum(out, 0.0))

    def csv_rows(self) -> list[tuple[int, float, float]]:
        return [(k, float(c), float(w)) for k, (c, w) in enumerate(zip(self.centers, self.weights))]

    def summary(self) -> dict:
        pos = self.positive_bins()
        return {
            "bins": self.bins,
            "base_point": [self.base_point.re, self.base_point.im],
            "s": self.s_param,
            "ball_radius": self.ball_radius,
            "total_mass": self.total_mass,
            "atoms": int(len(self.atom_weights)),
            "excluded_atoms": self.excluded,
            "positive_bins": int(pos.sum()),
            "max_bin_mass": float(self.weights.max()) if self.bins else 0.0,
            "degenerate": self.degenerate,
        }


def _histogram_from_atoms(angles, weights, depths, bins, p, s, radius, excluded,
                          limits=None) -> MeasureHistogram:
    if not 64 <= bins <= 65536:
        raise ValueError("bins must lie in [64, 65536]")
    k = bin_index(angles, bins)
    hist = binned_sum(k, weights, bins)
    total = float(np.sum(weights))
    return MeasureHistogram(bins, hist, p, float(s), float(radius), total, angles, weights, depths,
                            excluded, degenerate=len(weights) == 0, atom_limits=limits)


def reference_limit_point(ball: OrbitBall) -> float | None:
    """Attracting fixed point of the first axial element of the ball, or None."""
    m = ball.matrices
    tr = np.abs(m[:, 0] + m[:, 3])
    hits = np.flatnonzero(tr > 2.0 + 1e-9)
    if len(hits) == 0:
        return None
    axis, _ = axis_and_length(MobiusMap(*m[hits[0]]))
    return float(axis.theta_plus.theta)


def ps_histogram(ball: OrbitBall, s: float, p: DiskPoint | None = None, bins: int = 1024,
                 delta_hat: float | None = None) -> MeasureHistogram:
    """Binned measure ``sum exp(-s d(p, alpha p0)) / P(s, p0, p0)`` on the directions from ``p``.

    ``p0`` is the ball's ``base_q``; the normalizer sums ``exp(-s d(p0, alpha p0))``
    over the same elements.  Atoms within ``1e-6`` of ``p`` have no direction
    and are dropped (counted in ``excluded``).
    """
    if len(ball) == 0:
        raise EmptyBall("orbit ball is empty")
    if delta_hat is not None and s <= delta_hat:
        warnings.warn(f"s = {s} is not above the estimated critical exponent {delta_hat}")
    p = ball.base_p if p is None else p
    p0 = ball.base_q
    norm = float(np.sum(np.exp(-s * displacement_arrays(ball.matrices, p0, p0))))
    d = ball.distances if p == ball.base_p else displacement_arrays(ball.matrices, p, p0)
    keep = d > EXCLUDE_RADIUS
    angles = directions_arrays(ball.matrices[keep], p, p0)
    w = np.exp(-s * d[keep]) / norm
    xi0 = reference_limit_point(ball)
    limits = None
    if xi0 is not None:
        limits = normalize_angle(np.angle(apply_arrays(ball.matrices[keep], np.exp(1j * xi0))))
    hist = _histogram_from_atoms(angles, w, ball.distances[keep], bins, p, s, ball.radius,
                                 int(np.count_nonzero(~keep)), limits)
    if hist.degenerate:
        log.warning("histogram is empty: every atom sits at the base point")
    return hist


@dataclass
class CocycleAuditReport:
    bin_indices: np.ndarray
    deviations: np.ndarray
    max_abs_deviation: float
    mean_deviation: float
    mass_coverage: float
    r: float

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "compared_bins": int(len(self.bin_indices)),
            "max_abs_deviation": self.max_abs_deviation,
            "mass_weighted_mean_deviation": self.mean_deviation,
            "mass_coverage": self.mass_coverage,
        }


def cocycle_audit(mu_p: MeasureHistogram, mu_q: MeasureHistogram, r: float | None = None,
                  floor: float = MASS_FLOOR) -> CocycleAuditReport:
    """Compare ``w_p / w_q`` with ``exp(-r beta_xi(p, q))`` at each bin centre ``xi``.

    Only bins where both weights exceed ``floor`` times their total are compared.
    The mean is weighted by ``mu_p`` mass.
    """
    if mu_p.bins != mu_q.bins:
        raise ValueError("histograms must share a bin count")
    r = mu_p.s_param if r is None else float(r)
    both = mu_p.positive_bins(floor) & mu_q.positive_bins(floor)
    idx = np.flatnonzero(both)
    wp, wq = mu_p.weights[idx], mu_q.weights[idx]
    beta = busemann(mu_p.centers[idx], mu_p.base_point, mu_q.base_point)
    dev = np.abs(np.log(wp / wq) + r * np.asarray(beta))
    total = float(np.sum(mu_p.weights))
    covered = float(np.sum(wp))
    mean = float(np.sum(dev * wp) / covered) if covered > 0 else float("nan")
    return CocycleAuditReport(idx, dev, float(dev.max()) if len(dev) else 0.0, mean,
                              covered / total if total > 0 else 0.0, r)


@dataclass
class EquivarianceReport:
    total_variation: float
    edge_mass_bound: float
    displacement: float
    alpha_in_ball: bool
    within_bound: bool

    def to_dict(self) -> dict:
        return {
            "total_variation": self.total_variation,
            "edge_mass_bound": self.edge_mass_bound,
            "alpha_displacement": self.displacement,
            "alpha_in_ball": self.alpha_in_ball,
            "within_bound": self.within_bound,
        }


def equivariance_audit(ball: OrbitBall, s: float, p: DiskPoint, alpha: MobiusMap,
                       bins: int = 1024) -> EquivarianceReport:
    """Total variation between ``mu_p`` and the pullback of ``mu_{alpha p}`` under ``alpha``.

    Both measures come from the same ball.  On the full group they agree; on
    the ball they differ only through elements that ``alpha`` pushes across
    the ball's edge, i.e. atoms at depth ``> radius - d(p_b, alpha p_b)`` where
    ``p_b`` is the ball's centre.  The bound is half the edge mass of the two
    measures.
    """
    present = ball.contains_map(alpha, MATRIX_TOL)
    if not present:
        warnings.warn("alpha was not found in the ball; equivariance is only expected for group elements")
    ap = alpha.apply_point(p)
    mu_p = ps_histogram(ball, s, p, bins)
    mu_ap = ps_histogram(ball, s, ap, bins)
    pulled = normalize_angle(alpha.inverse().boundary_action(mu_ap.atom_angles))
    moved = binned_sum(bin_index(pulled, bins), mu_ap.atom_weights, bins)
    tv = 0.5 * float(np.sum(np.abs(mu_p.weights - moved)))
    disp = float(displacement_arrays(np.array([alpha.entries]), ball.base_p, ball.base_p)[0])
    edge = ball.radius - disp
    bound = 0.5 * (float(np.sum(mu_p.atom_weights[mu_p.atom_depths > edge]))
                   + float(np.sum(mu_ap.atom_weights[mu_ap.atom_depths > edge])))
    return EquivarianceReport(tv, bound, disp, present, tv <= bound * (1 + 1e-9) + 1e-15)


@dataclass
class ShadowAuditReport:
    R: float
    r: float
    count: int
    full_circle_excluded: int
    ratio_min: float
    ratio_max: float
    c_emp: float
    spread_log10: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def shadow_arcs_arrays(ball: OrbitBall, p: DiskPoint, R: float, mask: np.ndarray | None = None):
    """Vectorized shadows from ``p`` of ``B(alpha q, R)``: ``(start, length, depth, full)``."""
    mats = ball.matrices if mask is None else ball.matrices[mask]
    D = displacement_arrays(mats, p, ball.base_q)
    full = D <= R
    circle = directions_arrays(mats, p, ball.base_q)
    local = np.angle(_to_origin(p.z, np.exp(1j * circle)))
    psi = np.arcsin(np.minimum(1.0, np.sinh(R) / np.sinh(np.maximum(D, 1e-300))))
    lo = normalize_angle(np.angle(_from_origin(p.z, np.exp(1j * (local - psi)))))
    hi = normalize_angle(np.angle(_from_origin(p.z, np.exp(1j * (local + psi)))))
    length = np.where(full, TWO_PI, normalize_angle(hi - lo))
    return lo, length, D, full


def shadow_lemma_audit(ball: OrbitBall, mu_p: MeasureHistogram, R: float = 1.5,
                       r: float | None = None) -> ShadowAuditReport:
    """Ratios ``mu_p(shadow of B(alpha q, R)) / exp(-r d(p, alpha q))`` over the outer half of the ball."""
    r = mu_p.s_param if r is None else float(r)
    p = mu_p.base_point
    outer = ball.distances > ball.radius / 2
    if not np.any(outer):
        outer = np.ones(len(ball), dtype=bool)
    start, length, D, full = shadow_arcs_arrays(ball, p, R, outer)
    proper = ~full
    mass = mu_p.arc_mass(start[proper], length[proper])
    ratio = mass / np.exp(-r * D[proper])
    ratio = ratio[ratio > 0]
    if len(ratio) == 0:
        nan = float("nan")
        return ShadowAuditReport(R, r, 0, int(full.sum()), nan, nan, nan, nan)
    lo, hi = float(ratio.min()), float(ratio.max())
    return ShadowAuditReport(R, r, int(len(ratio)), int(full.sum()), lo, hi, max(hi, 1.0 / lo),
                             math.log10(hi / lo))


@dataclass
class AnnulusBound:
    sums: np.ndarray
    max: float
    median: float
    ratio: float

    def to_dict(self) -> dict:
        return {"annulus_sums": self.sums.tolist(), "max": self.max, "median": self.median,
                "max_over_median": self.ratio}


def annulus_bound_audit(ball: OrbitBall, r: float) -> AnnulusBound:
    """Per-annulus sums ``sum_{Gamma_n} exp(-r d)`` and their max/median spread."""
    A = annulus_sums(ball, r)
    A = A[A > 0]
    med = float(np.median(A))
    return AnnulusBound(A, float(A.max()), med, float(A.max() / med))


@dataclass
class MinimalityReport:
    seed_angle: float
    positive_bins: int
    covered_bins: int
    coverage: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def support_minimality_probe(mu_p: MeasureHistogram, ball: OrbitBall, eps: float = 0.0) -> MinimalityReport:
    """Fraction of positive-mass bins hit by the orbit of the top bin's centre.

    A bin counts as hit when an image lies in it or within ``eps`` of it.
    """
    pos = mu_p.positive_bins()
    xi = float(mu_p.centers[int(np.argmax(mu_p.weights))])
    A = (ball.matrices[:, 0] + ball.matrices[:, 3] + 1j * (ball.matrices[:, 1] - ball.matrices[:, 2])) / 2
    B = (ball.matrices[:, 0] - ball.matrices[:, 3] - 1j * (ball.matrices[:, 1] + ball.matrices[:, 2])) / 2
    u = np.exp(1j * xi)
    images = normalize_angle(np.angle((A * u + B) / (np.conj(B) * u + np.conj(A))))
    hit = np.zeros(mu_p.bins, dtype=bool)
    hit[bin_index(images, mu_p.bins)] = True
    if eps > 0:
        reach = int(math.ceil(eps / mu_p.bin_width))
        k = np.flatnonzero(hit)
        for j in range(1, reach + 1):
            hit[(k + j) % mu_p.bins] = True
            hit[(k - j) % mu_p.bins] = True
    n_pos = int(pos.sum())
    covered = int((hit & pos).sum())
    return MinimalityReport(xi, n_pos, covered, covered / n_pos if n_pos else 0.0)
