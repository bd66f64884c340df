"""Boundary-pair sampling and finite-depth classification of ideal points.

The quasi-product density ``exp(r beta_p(xi, eta))`` is sampled against a
binned measure; sampled points are then tested for conical and Myrberg
behaviour against an orbit ball, and the results are folded into a
conservativity report.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .groups import (
    GroupPreset,
    IsometryType,
    MobiusMap,
    OrbitBall,
    annuli_counts,
    apply_arrays,
    classify,
    fixed_boundary_points,
)
from .hyperbolic import (
    ORIGIN,
    TWO_PI,
    BoundaryPoint,
    DegenerateError,
    DiskPoint,
    TangentVector,
    _to_origin,
    angular_dist,
    busemann,
    dist,
    dist_to_ray,
    gromov_product,
    normalize_angle,
    visibility_constant,
)
from .measures import MeasureHistogram, ps_histogram
from .parallel import ordered_map
from .series import (
    Divergence,
    InsufficientData,
    NoCrossing,
    divergence_diagnostic,
    estimate_delta_counting,
    estimate_delta_partial_sum,
)

log = logging.getLogger(__name__)


class EnvelopeViolation(RuntimeError):
    pass


# -- BMS density and sampler ------------------------------------------------------

def bms_density(p: DiskPoint, r: float, xi, eta) -> float:
    """``exp(r beta_p(xi, eta))``."""
    return np.exp(r * np.asarray(gromov_product(p, xi, eta)))


def bms_basepoint_residual(p: DiskPoint, q: DiskPoint, r: float, xi, eta) -> float:
    """Relative mismatch between the quasi-product at ``q`` and the one at ``p`` moved by the cocycle.

    With ``dmu_p = exp(-r beta_xi(p, q)) dmu_q`` in each factor,
    ``density(p) exp(-r beta_xi(p, q) - r beta_eta(p, q))`` must equal ``density(q)``.
    """
    lhs = bms_density(p, r, xi, eta) * np.exp(-r * (np.asarray(busemann(xi, p, q))
                                                     + np.asarray(busemann(eta, p, q))))
    rhs = bms_density(q, r, xi, eta)
    return np.abs(lhs - rhs) / rhs


@dataclass(frozen=True)
class BmsPairSample:
    xi: BoundaryPoint
    eta: BoundaryPoint
    xi_bin: int
    eta_bin: int
    density: float
    index: int


def _envelope_log(mu: MeasureHistogram, r: float, pos: np.ndarray, rep: np.ndarray) -> float:
    """``r * max beta_p`` over the sampling points of positive bins at least two bins apart."""
    c = rep[pos]
    if len(c) < 2:
        return 0.0
    B = mu.bins
    best = -np.inf
    for i in range(len(c)):
        gap = np.abs(pos - pos[i]) % B
        ok = np.minimum(gap, B - gap) >= 2
        if np.any(ok):
            best = max(best, float(np.max(gromov_product(mu.base_point, c[i], c[ok]))))
    return r * best if np.isfinite(best) else 0.0


def bms_sample(mu: MeasureHistogram, r: float, count: int, seed: int,
               batch: int = 4096, max_batches: int = 1000) -> list[BmsPairSample]:
    """Rejection sampler for ``exp(r beta_p(xi, eta)) mu(dxi) mu(deta)`` off the diagonal.

    Proposals are bin pairs drawn from ``mu x mu``; pairs in the same or
    adjacent bins are discarded.  Accepted pairs sit at the bins' sampling
    points (see :meth:`MeasureHistogram.limit_points`), over which the
    envelope is computed, so it bounds the density exactly.  Sample ``i`` uses its own stream seeded by
    ``(seed, i)``.  A density above the envelope raises
    :class:`EnvelopeViolation` internally; the envelope is then doubled, the
    event logged, and the sample redrawn.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    pos = np.flatnonzero(mu.positive_bins())
    if len(pos) < 2 or mu.degenerate:
        raise ValueError("measure is degenerate")
    prob = mu.weights[pos] / np.sum(mu.weights[pos])
    cdf = np.cumsum(prob)
    cdf[-1] = 1.0
    rep = mu.limit_points()
    log_env = _envelope_log(mu, r, pos, rep)
    B = mu.bins

    def draw(i: int) -> BmsPairSample:
        rng = np.random.default_rng([seed, i])
        env = log_env
        for _ in range(max_batches):
            a = pos[np.searchsorted(cdf, rng.random(batch), side="right")]
            b = pos[np.searchsorted(cdf, rng.random(batch), side="right")]
            u = rng.random(batch)
            gap = np.abs(a - b) % B
            gap = np.minimum(gap, B - gap)
            ok = gap >= 2
            if not np.any(ok):
                continue
            ld = np.full(batch, -np.inf)
            ld[ok] = r * np.asarray(gromov_product(mu.base_point, rep[a[ok]], rep[b[ok]]))
            try:
                if np.any(ld > env + 1e-12):
                    raise EnvelopeViolation(f"log density {ld.max():.6g} above envelope {env:.6g}")
            except EnvelopeViolation as exc:
                while np.any(ld > env + 1e-12):
                    env += math.log(2.0)
                log.warning("%s; envelope doubled to %.6g", exc, env)
            acc = np.flatnonzero(ok & (np.log(u) < ld - env))
            if len(acc):
                j = acc[0]
                return BmsPairSample(BoundaryPoint(rep[a[j]]), BoundaryPoint(rep[b[j]]), int(a[j]), int(b[j]),
                                     float(np.exp(ld[j])), i)
        raise RuntimeError("rejection sampler made no progress")

    return ordered_map(draw, list(range(count)))


# -- conical and Myrberg statistics --------------------------------------------

def _depth_grid(ball: OrbitBall, start: float | None = None) -> np.ndarray:
    lo = ball.radius / 2 if start is None else start
    return np.arange(int(math.ceil(lo)), int(math.floor(ball.radius + 1e-9)) + 1, dtype=float)


def _orbit_points(ball: OrbitBall, x: DiskPoint) -> np.ndarray:
    return apply_arrays(ball.matrices, x.z)


def conical_statistic(xi, ball: OrbitBall, p: DiskPoint = ORIGIN, min_depth: float | None = None,
                      points: np.ndarray | None = None, ray_dist: np.ndarray | None = None) -> list[tuple[float, float]]:
    """Profile ``(n, C_n)`` with ``C_n`` the least distance from ``alpha p`` to the ray ``c_{p, xi}``.

    The minimum runs over elements at depth ``min_depth <= d(p_b, alpha q) <= n``
    (default ``min_depth`` = half the radius), which keeps the trivially close
    identity out and makes the profile nonincreasing in ``n``.
    """
    theta = xi.theta if isinstance(xi, BoundaryPoint) else float(xi)
    lo = ball.radius / 2 if min_depth is None else min_depth
    start = int(np.searchsorted(ball.distances, lo, side="left"))
    if ray_dist is None:
        w = _orbit_points(ball, p) if points is None else points
        d = np.asarray(dist_to_ray(w[start:], p, theta))
    else:
        d = ray_dist[start:]
    run = np.minimum.accumulate(d) if len(d) else d
    out = []
    for n in _depth_grid(ball, lo):
        k = int(np.searchsorted(ball.distances[start:], n, side="right"))
        out.append((float(n), float(run[k - 1]) if k > 0 else float("inf")))
    return out


def shell_returns(xi, ball: OrbitBall, p: DiskPoint, threshold: float,
                  points: np.ndarray | None = None, ray_dist: np.ndarray | None = None) -> float:
    """Fraction of unit depth shells in the outer half holding an orbit point within ``threshold`` of the ray."""
    theta = xi.theta if isinstance(xi, BoundaryPoint) else float(xi)
    if ray_dist is None:
        w = _orbit_points(ball, p) if points is None else points
        ray_dist = np.asarray(dist_to_ray(w, p, theta))
    d = ray_dist
    grid = _depth_grid(ball)
    hits = 0
    for n in grid:
        a = int(np.searchsorted(ball.distances, n - 1, side="right"))
        b = int(np.searchsorted(ball.distances, n, side="right"))
        hits += bool(b > a and np.min(d[a:b]) <= threshold)
    return hits / len(grid) if len(grid) else 0.0


def plateau(profile: Sequence[tuple[float, float]], rel: float = 0.05) -> bool:
    """True when ``C_n`` moves by at most ``rel`` over the last quarter of the depths."""
    vals = np.array([c for _, c in profile], float)
    if len(vals) == 0:
        return False
    tail = vals[-max(2, int(math.ceil(len(vals) / 4))):]
    if not np.all(np.isfinite(tail)):
        return False
    return bool(tail[0] - tail[-1] <= rel * max(tail[0], 1e-12))


def settled_below(profile: Sequence[tuple[float, float]], threshold: float) -> bool:
    """True when ``C_n <= threshold`` at every depth of the last quarter of the profile."""
    vals = np.array([c for _, c in profile], float)
    if len(vals) == 0:
        return False
    tail = vals[-max(2, int(math.ceil(len(vals) / 4))):]
    return bool(np.all(tail <= threshold))


def myrberg_statistic(xi, targets: Sequence[tuple[float, float]], ball: OrbitBall, x: DiskPoint = ORIGIN,
                      depths: Sequence[float] | None = None,
                      directions: np.ndarray | None = None) -> list[tuple[int, float, float]]:
    """Rows ``(pair id, n, eps_n)`` with ``eps_n`` the best
    ``max(angle_x(alpha x, eta), |alpha xi - eta'|)`` over elements at depth ``<= n``.
    """
    theta = xi.theta if isinstance(xi, BoundaryPoint) else float(xi)
    for a, b in targets:
        if angular_dist(a, b) < 1e-12:
            raise DegenerateError("target pair must have distinct points")
    dirs = orbit_directions(ball, x) if directions is None else directions
    images = boundary_images(ball, theta)
    grid = _depth_grid(ball, 1.0) if depths is None else np.asarray(depths, float)
    cut = np.searchsorted(ball.distances, grid, side="right")
    rows = []
    for pid, (eta, eta2) in enumerate(targets):
        eta_dir = float(np.angle(_to_origin(x.z, np.exp(1j * eta))))
        val = np.maximum(angular_dist(dirs, eta_dir), angular_dist(images, eta2))
        val = np.where(np.isnan(dirs), np.inf, val)
        run = np.minimum.accumulate(val)
        for n, k in zip(grid, cut):
            rows.append((pid, float(n), float(run[k - 1]) if k > 0 else float("inf")))
    return rows


def orbit_directions(ball: OrbitBall, x: DiskPoint) -> np.ndarray:
    """Direction at ``x`` (frame moved to the origin) of each ``alpha x``; NaN where ``alpha x ~ x``."""
    u = _to_origin(x.z, apply_arrays(ball.matrices, x.z))
    return np.where(np.abs(u) > 1e-6, np.angle(u), np.nan)


def boundary_images(ball: OrbitBall, theta: float) -> np.ndarray:
    return normalize_angle(np.angle(apply_arrays(ball.matrices, np.exp(1j * theta))))


def myrberg_targets(mu: MeasureHistogram, k: int = 3, min_sep: float = math.pi / 6) -> list[tuple[float, float]]:
    """Sampling points of the ``k`` heaviest bins at mutual separation ``>= min_sep``, paired cyclically."""
    rep = mu.limit_points()
    chosen: list[float] = []
    for j in np.argsort(-mu.weights, kind="stable"):
        if mu.weights[j] <= 0:
            break
        if all(angular_dist(rep[j], c) >= min_sep for c in chosen):
            chosen.append(float(rep[j]))
        if len(chosen) == k:
            break
    if len(chosen) < 2:
        return []
    if len(chosen) == 2:
        return [(chosen[0], chosen[1]), (chosen[1], chosen[0])]
    return [(chosen[i], chosen[(i + 1) % len(chosen)]) for i in range(len(chosen))]


def nonwandering_test(v: TangentVector, limit_approx: MeasureHistogram, eps: float) -> tuple[bool, tuple[float, float]]:
    """Both endpoints of the geodesic of ``v`` within ``eps`` of a positive-mass bin."""
    pos = limit_approx.positive_bins()
    if not np.any(pos):
        raise ValueError("measure is degenerate")
    g = v.geodesic()
    half = limit_approx.bin_width / 2
    centers = limit_approx.centers[pos]

    def gap(theta: float) -> float:
        return float(max(0.0, np.min(angular_dist(theta, centers)) - half))

    res = (gap(g.theta_minus.theta), gap(g.theta_plus.theta))
    return bool(max(res) <= eps), res


# -- elementary groups ------------------------------------------------------------

def is_elementary(gens: Sequence[MobiusMap], tol: float = 1e-9) -> bool:
    """Limit set of at most two points, judged from generator fixed points.

    Non-elliptic generators sharing at most two boundary fixed points, or
    elliptic generators with one common centre, give an elementary group.
    """
    kinds = [classify(g) for g in gens]
    gens = [g for g, k in zip(gens, kinds) if k is not IsometryType.IDENTITY]
    kinds = [k for k in kinds if k is not IsometryType.IDENTITY]
    if not gens:
        return True
    if all(k is IsometryType.ELLIPTIC for k in kinds):
        centers = []
        for g in gens:
            A, B = g.su11()
            # interior fixed point of the disk action
            qa, qb, qc = B.conjugate(), A.conjugate() - A, -B
            if abs(qa) < 1e-15:
                centers.append(0j)
                continue
            disc = np.sqrt(complex(qb * qb - 4 * qa * qc))
            roots = [(-qb + disc) / (2 * qa), (-qb - disc) / (2 * qa)]
            centers.append(min(roots, key=abs))
        return all(abs(c - centers[0]) < 1e-8 for c in centers)
    if any(k is IsometryType.ELLIPTIC for k in kinds):
        return False
    pts: list[float] = []
    for g in gens:
        for b in fixed_boundary_points(g):
            if all(angular_dist(b.theta, t) > 1e-8 for t in pts):
                pts.append(b.theta)
    return len(pts) <= 2


# -- records and report -----------------------------------------------------------

@dataclass
class Thresholds:
    conical: float | None = None
    plateau_rel: float = 0.05
    recurrence: float = 0.5
    myrberg: float = 0.2
    pass_fraction: float = 0.9
    eps_div: float = 0.01
    margin: float = 0.05

    def conical_threshold(self, p: DiskPoint, p0: DiskPoint) -> float:
        if self.conical is not None:
            return self.conical
        return 3.0 * (visibility_constant(math.pi / 2) + dist(p, p0))


@dataclass
class ClassificationRecord:
    index: int
    point: BoundaryPoint
    limit_dist: float
    conical_profile: list[tuple[float, float]]
    myrberg_profile: list[tuple[int, float, float]]
    shell_return: float
    conical: bool
    plateau: bool
    recurrent: bool
    myrberg_eps: float
    myrberg: bool
    population: str = "ps"

    def csv_row(self) -> dict:
        return {
            "index": self.index,
            "population": self.population,
            "theta": self.point.theta,
            "limit_dist": self.limit_dist,
            "conical_C": self.conical_profile[-1][1] if self.conical_profile else float("nan"),
            "plateau": int(self.plateau),
            "conical": int(self.conical),
            "shell_return": self.shell_return,
            "recurrent": int(self.recurrent),
            "myrberg_eps": self.myrberg_eps,
            "myrberg": int(self.myrberg),
        }


def limit_distance(theta: float, ball: OrbitBall, p: DiskPoint, directions: np.ndarray | None = None) -> float:
    """Angular distance at ``p`` from ``theta`` to the nearest direction of an outer-half orbit point."""
    if directions is None:
        directions = orbit_directions(ball, p)
    outer = ball.distances > ball.radius / 2
    d = directions[outer]
    d = d[~np.isnan(d)]
    if len(d) == 0:
        return float("inf")
    t = float(np.angle(_to_origin(p.z, np.exp(1j * theta))))
    return float(np.min(angular_dist(d, t)))


def classify_point(i: int, theta: float, ball: OrbitBall, p: DiskPoint, targets, th: Thresholds,
                   c_thr: float, points: np.ndarray, directions: np.ndarray,
                   population: str = "ps", myrberg_depths: Sequence[float] | None = None) -> ClassificationRecord:
    rd = np.asarray(dist_to_ray(points, p, theta))
    prof = conical_statistic(theta, ball, p, ray_dist=rd)
    pl = plateau(prof, th.plateau_rel)
    ret = shell_returns(theta, ball, p, c_thr, ray_dist=rd)
    if targets:
        depths = [ball.radius] if myrberg_depths is None else list(myrberg_depths)
        mp = myrberg_statistic(theta, targets, ball, p, depths=depths, directions=directions)
        eps = max(e for _, n, e in mp if n == depths[-1])
    else:
        mp, eps = [], float("inf")
    return ClassificationRecord(i, BoundaryPoint(theta), limit_distance(theta, ball, p, directions), prof, mp, ret,
                                settled_below(prof, c_thr), pl, ret >= th.recurrence, eps,
                                eps <= th.myrberg, population)


@dataclass
class ConservativityReport:
    preset: str
    radius: float
    elementary: bool
    data: dict = field(default_factory=dict)
    records: list[ClassificationRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"preset": self.preset, "radius": self.radius, "elementary": self.elementary, **self.data}


def conservativity_report(preset: GroupPreset, radius: float | None = None, s: float | str = "auto",
                          samples: int = 50, thresholds: Thresholds | None = None, seed: int = 0,
                          bins: int = 1024, p: DiskPoint = ORIGIN, ball: OrbitBall | None = None,
                          contrast: int | None = None, myrberg_gap: float = 4.0) -> ConservativityReport:
    """Enumerate, estimate the exponent, build the measure, sample pairs, and classify.

    The report places the series divergence test, the conical pass fraction,
    the shell recurrence fraction, and the Myrberg trend side by side and
    records whether they agree.  Elementary groups get a short report.
    """
    th = thresholds or Thresholds()
    R = preset.default_radius if radius is None else radius
    if ball is None:
        ball = preset.ball(R, p=p, q=p)
    annuli = annuli_counts(ball)
    elementary = preset.elementary or is_elementary(preset.generators)
    report = ConservativityReport(preset.name, float(ball.radius), elementary)
    try:
        dc = estimate_delta_counting(annuli)
        delta = dc.value
    except InsufficientData as exc:
        report.data.update(verdict="insufficient-data", error=str(exc))
        return report
    try:
        dps = estimate_delta_partial_sum(ball)
    except (NoCrossing, InsufficientData):
        dps = None
    s_val = delta + th.margin if s == "auto" else float(s)
    mu = ps_histogram(ball, s_val, p, bins)
    report.data.update(delta_counting=delta, delta_partial_sum=dps, s=s_val, bins=bins, seed=seed)

    if elementary:
        fixed = sorted({round(b.theta, 12) for g in preset.generators
                        if classify(g) not in (IsometryType.IDENTITY, IsometryType.ELLIPTIC)
                        for b in fixed_boundary_points(g)})
        pos = mu.positive_bins()
        top = np.argsort(-mu.weights, kind="stable")[:2]
        xi = fixed[-1] if fixed else 0.0
        neg = None
        if len(fixed) >= 1:
            other = fixed[0] if len(fixed) > 1 else normalize_angle(xi + math.pi / 2)
            neg = myrberg_statistic(xi, [(other, normalize_angle(other + math.pi / 2))], ball, p)
        report.data.update(
            verdict="elementary",
            limit_set_size=len(fixed),
            fixed_points=fixed,
            positive_bins=int(pos.sum()),
            top_bin_mass_fraction=float(mu.weights[top].sum() / mu.total_mass) if mu.total_mass else 0.0,
            myrberg_negative_control_min_eps=min(e for _, _, e in neg) if neg else None,
            note="limit set has at most two points; dichotomy indicators not run",
        )
        return report

    c_thr = th.conical_threshold(p, ball.base_q)
    div = divergence_diagnostic(ball, delta, th.eps_div)
    pairs = bms_sample(mu, delta, samples, seed)
    targets = myrberg_targets(mu)
    points = _orbit_points(ball, p)
    directions = orbit_directions(ball, p)

    lo_depth = max(ball.radius - myrberg_gap, 1.0)
    depths = [lo_depth, float(ball.radius)]

    def run(pair: BmsPairSample) -> ClassificationRecord:
        return classify_point(pair.index, pair.xi.theta, ball, p, targets, th, c_thr, points, directions,
                              myrberg_depths=depths)

    records = ordered_map(run, pairs)

    n_contrast = 20 if contrast is None else contrast
    rng = np.random.default_rng([seed, 1 << 20])
    rand_theta = rng.uniform(0, TWO_PI, n_contrast)
    contrast_recs = ordered_map(
        lambda it: classify_point(it[0], float(it[1]), ball, p, [], th, c_thr, points, directions, "lebesgue"),
        list(enumerate(rand_theta)))

    # Myrberg trend at two depths: per pair, the median over samples; overall, the
    # median over samples of the pair-averaged eps
    eps_at = {depth: np.array([[e for pid, n, e in r.myrberg_profile if n == depth] for r in records])
              for depth in depths}
    pair_med = {depth: np.median(eps_at[depth], axis=0).tolist() for depth in depths}
    med = {depth: float(np.median(eps_at[depth].mean(axis=1))) for depth in depths}
    myr_decreasing = med[depths[1]] < med[depths[0]]

    conical_frac = float(np.mean([r.conical for r in records]))
    recur_frac = float(np.mean([r.recurrent for r in records]))
    violations = [r.index for r in records if r.myrberg and not r.conical]
    bin_w = mu.bin_width
    indicators = {
        "series_divergence": {
            "verdict": div.verdict.value, "slope": div.slope, "tail_log_slope": div.tail_log_slope,
            "reading": "conservative-consistent" if div.verdict is Divergence.DIVERGING
            else "dissipative-consistent" if div.verdict is Divergence.CONVERGING else "inconclusive",
        },
        "conical_fraction": {
            "value": conical_frac, "threshold_C": c_thr, "required": th.pass_fraction,
            "reading": "conservative-consistent" if conical_frac >= th.pass_fraction else "dissipative-consistent",
        },
        "plateau_recurrence": {
            "value": recur_frac, "shell_threshold": th.recurrence, "required": th.pass_fraction,
            "reading": "conservative-consistent" if recur_frac >= th.pass_fraction else "dissipative-consistent",
        },
    }
    readings = {v["reading"] for v in indicators.values()}
    agree = len(readings) == 1
    report.data.update(
        verdict=(next(iter(readings)) if agree else "indicators-disagree"),
        indicators_agree=agree,
        indicators=indicators,
        myrberg={
            "targets": [list(t) for t in targets],
            "depths": depths,
            "median_eps": [med[depths[0]], med[depths[1]]],
            "pair_median_eps": [pair_med[depths[0]], pair_med[depths[1]]],
            "decreasing": myr_decreasing,
            "threshold": th.myrberg,
            "fraction_below_threshold": float(np.mean([r.myrberg for r in records])),
        },
        myrberg_subset_of_conical_violations=violations,
        contrast={
            "population": "lebesgue",
            "conical_fraction": float(np.mean([r.conical for r in contrast_recs])),
            "near_limit_fraction": float(np.mean([r.limit_dist <= bin_w for r in contrast_recs])),
            "ps_near_limit_fraction": float(np.mean([r.limit_dist <= bin_w for r in records])),
        },
        samples=samples,
        note="finite-depth indicators only; no proof is implied",
    )
    report.records = list(records) + list(contrast_recs)
    return report
