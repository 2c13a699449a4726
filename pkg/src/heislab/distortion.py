"""Empirical distortion analysis: cross-ratios, quasimobius constants,
quasiconformality ratios and volume-growth exponents.

The cross-ratio of a quadruple (x, y, z, w) under a distance matrix d is

    d(x, y) d(z, w) / (d(x, z) d(y, w)).

A map between two metrics on the same points is strongly quasimobius with
constant C when image cross-ratios are bounded by C times source
cross-ratios; :func:`estimate_quasimobius` reports the best such C on a
quadruple sample.  :func:`estimate_qc_ratio` estimates the metric
quasiconformality ratio H(x, r) = sup / inf of image distances over an
annulus of shrinking radius, and :func:`estimate_regularity` fits the
volume-growth exponent of gauge balls by Monte-Carlo measure in exponential
coordinates.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from heislab.hgroup import (
    GroupPoint,
    dilate_arrays,
    gauge_arrays,
    gauge_dist_arrays,
    group_mul_arrays,
    sample_with_rng,
)
from heislab.hlie import HTypeAlgebra

__all__ = [
    "DistortionReport",
    "cross_ratio",
    "cross_ratio_rows",
    "sample_quadruples",
    "estimate_quasimobius",
    "estimate_qc_ratio",
    "estimate_regularity",
    "identity_map",
    "inversion_map",
    "dilation_map",
    "save_ratio_pairs_csv",
]


@dataclass
class DistortionReport:
    """Container for one distortion experiment; statistics are per kind."""

    kind: str  # quasimobius | quasiconformal | regularity
    samples: int
    seed: int
    statistics: dict
    tolerance: Optional[float] = None
    algebra_label: Optional[str] = None
    fingerprint: Optional[str] = None
    raw_pairs: Optional[tuple] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        payload = {
            "kind": self.kind,
            "samples": self.samples,
            "seed": self.seed,
            "statistics": self.statistics,
        }
        if self.tolerance is not None:
            payload["tolerance"] = self.tolerance
        if self.algebra_label is not None:
            payload["algebra"] = self.algebra_label
        if self.fingerprint is not None:
            payload["fingerprint"] = self.fingerprint
        return payload


def cross_ratio(dist: np.ndarray, quad) -> float:
    """Cross-ratio of one quadruple of distinct point indices."""
    x, y, z, w = (int(t) for t in quad)
    if len({x, y, z, w}) != 4:
        raise ValueError(f"quadruple {(x, y, z, w)} has repeated points")
    dist = np.asarray(dist)
    denominator = dist[x, z] * dist[y, w]
    if denominator == 0.0:
        raise ValueError(f"degenerate quadruple {(x, y, z, w)}: zero denominator")
    return float(dist[x, y] * dist[z, w] / denominator)


def cross_ratio_rows(dist: np.ndarray, quads: np.ndarray) -> np.ndarray:
    """Cross-ratios of quadruple rows; degenerate rows come out as inf/nan."""
    x, y, z, w = quads[:, 0], quads[:, 1], quads[:, 2], quads[:, 3]
    with np.errstate(divide="ignore", invalid="ignore"):
        return dist[x, y] * dist[z, w] / (dist[x, z] * dist[y, w])


def sample_quadruples(n_points: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Rows of four distinct indices drawn uniformly with rejection."""
    if n_points < 4:
        raise ValueError("need at least four points to form quadruples")
    out = np.empty((count, 4), dtype=np.int64)
    filled = 0
    while filled < count:
        cand = rng.integers(0, n_points, size=(count - filled, 4))
        distinct = (
            (cand[:, 0] != cand[:, 1]) & (cand[:, 0] != cand[:, 2]) &
            (cand[:, 0] != cand[:, 3]) & (cand[:, 1] != cand[:, 2]) &
            (cand[:, 1] != cand[:, 3]) & (cand[:, 2] != cand[:, 3])
        )
        good = cand[distinct]
        out[filled:filled + good.shape[0]] = good
        filled += good.shape[0]
    return out


def estimate_quasimobius(d_in: np.ndarray, d_out: np.ndarray, samples: int = 100000,
                         seed: int = 0, bins_per_decade: int = 4) -> DistortionReport:
    """Best strong-quasimobius constant of the identity map between two metrics.

    Samples quadruples; each is also evaluated with the middle pair swapped,
    which inverts both cross-ratios and guarantees the reported maximum of
    t_out / t_in is at least one.  Degenerate quadruples (zero denominator
    in either matrix) are skipped and counted.  The envelope bins log10 of
    the source cross-ratio and records the worst image cross-ratio per bin.
    """
    d_in = np.asarray(d_in, dtype=np.float64)
    d_out = np.asarray(d_out, dtype=np.float64)
    if d_in.shape != d_out.shape or d_in.ndim != 2:
        raise ValueError(f"matrices of shapes {d_in.shape} and {d_out.shape} do not match")
    n = d_in.shape[0]
    rng = np.random.default_rng(seed)
    quads = sample_quadruples(n, samples, rng)
    quads = np.vstack([quads, quads[:, [0, 2, 1, 3]]])
    t_in = cross_ratio_rows(d_in, quads)
    t_out = cross_ratio_rows(d_out, quads)
    good = np.isfinite(t_in) & np.isfinite(t_out) & (t_in > 0.0) & (t_out > 0.0)
    degenerate = int(np.count_nonzero(~good))
    t_in = t_in[good]
    t_out = t_out[good]
    if t_in.size == 0:
        raise ValueError("all sampled quadruples were degenerate")
    ratio = t_out / t_in

    logs = np.log10(t_in)
    edges = np.floor(logs * bins_per_decade).astype(np.int64)
    envelope = []
    for edge in np.unique(edges):
        mask = edges == edge
        envelope.append({
            "t_low": float(10.0 ** (edge / bins_per_decade)),
            "t_high": float(10.0 ** ((edge + 1) / bins_per_decade)),
            "max_t_out": float(np.max(t_out[mask])),
            "max_ratio": float(np.max(ratio[mask])),
        })

    statistics = {
        "strong_constant": float(np.max(ratio)),
        "min_ratio": float(np.min(ratio)),
        "quadruples_used": int(t_in.size),
        "degenerate_skipped": degenerate,
        "envelope": envelope,
    }
    return DistortionReport("quasimobius", samples, seed, statistics,
                            raw_pairs=(t_in, t_out))


def save_ratio_pairs_csv(report: DistortionReport, path) -> None:
    """Raw (source, image) cross-ratio pairs of a quasimobius run."""
    if report.raw_pairs is None:
        raise ValueError("report carries no raw cross-ratio pairs")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_in", "t_out"])
        for a, b in zip(*report.raw_pairs):
            writer.writerow([repr(float(a)), repr(float(b))])


# ---------------------------------------------------------------------------
# point maps for quasiconformality experiments

def identity_map(alg: HTypeAlgebra) -> Callable:
    def apply(v, z):
        return v, z
    return apply


def inversion_map(alg: HTypeAlgebra) -> Callable:
    from heislab.inversion import sigma_arrays

    def apply(v, z):
        return sigma_arrays(alg, v, z)
    return apply


def dilation_map(alg: HTypeAlgebra, t: float) -> Callable:
    def apply(v, z):
        return dilate_arrays(t, v, z)
    return apply


def estimate_qc_ratio(alg: HTypeAlgebra, point_map: Callable, center: GroupPoint,
                      radii, samples: int = 20000, seed: int = 0,
                      annulus_width: float = 0.05) -> DistortionReport:
    """Monte-Carlo metric quasiconformality ratios of a self-map at one point.

    For each radius r, sample points in the gauge annulus r (1 +- width)
    around the center (box directions rescaled by dilation), then report
    sup of image distances over the inner half against inf over the outer
    half.  A radius with an empty half is flagged as insufficient.
    """
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0.0 for r in radii):
        raise ValueError("radii must be positive")
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    fc_v, fc_z = point_map(center.v[None, :], center.z[None, :])
    per_radius = []
    seeds = np.random.SeedSequence(seed).spawn(len(radii))
    for r, chunk_seed in zip(radii, seeds):
        rng = np.random.default_rng(chunk_seed)
        v, z = sample_with_rng(alg, samples, 1.0, rng)
        g = gauge_arrays(alg, v, z)
        keep = g > 1e-12
        v, z, g = v[keep], z[keep], g[keep]
        rho = rng.uniform((1.0 - annulus_width) * r, (1.0 + annulus_width) * r, size=g.size)
        v, z = dilate_arrays(rho / g, v, z)
        v, z = group_mul_arrays(alg, np.broadcast_to(center.v, v.shape), (
            np.broadcast_to(center.z, z.shape)), v, z)
        d_in = gauge_dist_arrays(alg, v, z,
                                 np.broadcast_to(center.v, v.shape),
                                 np.broadcast_to(center.z, z.shape))
        fv, fz = point_map(v, z)
        d_out = gauge_dist_arrays(alg, fv, fz,
                                  np.broadcast_to(fc_v[0], fv.shape),
                                  np.broadcast_to(fc_z[0], fz.shape))
        inner = d_in <= r
        outer = ~inner
        entry = {"radius": r,
                 "inner_points": int(np.count_nonzero(inner)),
                 "outer_points": int(np.count_nonzero(outer))}
        if entry["inner_points"] == 0 or entry["outer_points"] == 0:
            entry["ratio"] = None
            entry["insufficient_sampling"] = True
        else:
            sup = float(np.max(d_out[inner]))
            inf = float(np.min(d_out[outer]))
            entry["ratio"] = sup / inf
            entry["insufficient_sampling"] = False
        per_radius.append(entry)
    statistics = {"per_radius": per_radius,
                  "center": {"v": [float(t) for t in center.v],
                             "z": [float(t) for t in center.z]},
                  "annulus_width": annulus_width}
    return DistortionReport("quasiconformal", samples, seed, statistics,
                            algebra_label=alg.label, fingerprint=alg.fingerprint)


def _euclidean_ball_volume(dim: int, radius: float) -> float:
    from math import gamma, pi
    return pi ** (dim / 2.0) * radius ** dim / gamma(dim / 2.0 + 1.0)


def _uniform_ball(rng: np.random.Generator, count: int, dim: int,
                  radius: float) -> np.ndarray:
    """Uniform draws from a Euclidean ball (Gaussian direction, radial cdf)."""
    if dim == 0:
        return np.zeros((count, 0))
    direction = rng.standard_normal((count, dim))
    norms = np.maximum(np.linalg.norm(direction, axis=1), 1e-300)
    scale = radius * rng.uniform(0.0, 1.0, size=count) ** (1.0 / dim)
    return direction * (scale / norms)[:, None]


def estimate_regularity(alg: HTypeAlgebra, radii, samples: int = 100000, seed: int = 0,
                        center: Optional[GroupPoint] = None) -> DistortionReport:
    """Least-squares volume-growth exponent of gauge balls.

    Per radius, the ball measure is estimated by uniform sampling of a
    known-volume envelope (Lebesgue measure is the Haar measure in these
    coordinates); the fitted slope of log-measure against log-radius is the
    growth exponent, which for the gauge equals dim_v + 2 dim_z.  The
    envelope is the product of the Euclidean balls |v| <= 2r and
    |z| <= r^2, the tight ball-shaped hull of the gauge ball; it wastes far
    fewer samples than the coordinate box in high dimension.  The radii
    must span at least one decade.
    """
    radii = sorted(float(r) for r in radii)
    if len(radii) < 2 or radii[0] <= 0.0:
        raise ValueError("need at least two positive radii")
    if radii[-1] / radii[0] < 10.0:
        raise ValueError("radii must span at least one decade")
    seeds = np.random.SeedSequence(seed).spawn(len(radii))
    volumes = []
    per_radius = []
    for r, chunk_seed in zip(radii, seeds):
        rng = np.random.default_rng(chunk_seed)
        v = _uniform_ball(rng, samples, alg.dim_v, 2.0 * r)
        z = _uniform_ball(rng, samples, alg.dim_z, r * r)
        if center is not None:
            v, z = group_mul_arrays(alg, np.broadcast_to(center.v, v.shape),
                                    np.broadcast_to(center.z, z.shape), v, z)
            d = gauge_dist_arrays(alg, v, z,
                                  np.broadcast_to(center.v, v.shape),
                                  np.broadcast_to(center.z, z.shape))
        else:
            d = gauge_arrays(alg, v, z)
        hits = int(np.count_nonzero(d <= r))
        if hits == 0:
            raise ValueError(f"no hits at radius {r}: fit would be degenerate; "
                             "raise the sample count")
        envelope = (_euclidean_ball_volume(alg.dim_v, 2.0 * r) *
                    _euclidean_ball_volume(alg.dim_z, r * r))
        volume = envelope * hits / samples
        volumes.append(volume)
        per_radius.append({"radius": r, "hits": hits, "volume": volume})
    logs_r = np.log(radii)
    logs_v = np.log(volumes)
    design = np.vstack([logs_r, np.ones_like(logs_r)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, logs_v, rcond=None)
    residual = float(np.max(np.abs(design @ np.array([slope, intercept]) - logs_v)))
    statistics = {
        "fitted_exponent": float(slope),
        "fit_residual": residual,
        "homogeneous_dimension": alg.homogeneous_dimension,
        "per_radius": per_radius,
    }
    return DistortionReport("regularity", samples, seed, statistics,
                            algebra_label=alg.label, fingerprint=alg.fingerprint)
