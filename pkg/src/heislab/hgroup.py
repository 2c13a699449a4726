"""The simply connected group of a step-two algebra, in exponential coordinates.

A point is a pair ``(v, z)`` of horizontal and central coordinates.  The
group law is the step-two Baker-Campbell-Hausdorff product

    (v, z) (v', z') = (v + v', z + z' + [v, v'] / 2),

with identity (0, 0) and inverse (-v, -z).  The Koranyi gauge

    ||(v, z)|| = (|v|^4 / 16 + |z|^2)^(1/4)

is homogeneous of degree one under the dilations (v, z) -> (t v, t^2 z),
and ``d(p, q) = ||q^{-1} p||`` is a left-invariant distance on every
Heisenberg-type algebra (on other structure tensors it is only a
quasimetric).  Batch variants of the kernels operate on (n, dim) coordinate
arrays and are used by the samplers and verifiers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from heislab.hlie import HTypeAlgebra, bracket_arrays
from heislab.util import format_float

__all__ = [
    "GroupPoint",
    "PointAtInfinity",
    "INFINITY",
    "ExtendedPoint",
    "point",
    "identity",
    "group_mul",
    "group_inv",
    "dilate",
    "gauge",
    "gauge_dist",
    "left_translate",
    "sample_points",
    "sample_arrays",
    "sample_with_rng",
    "group_mul_arrays",
    "group_inv_arrays",
    "dilate_arrays",
    "gauge_arrays",
    "gauge_dist_arrays",
    "pairwise_gauge_dist",
    "points_to_arrays",
    "arrays_to_points",
    "save_points_csv",
    "load_points_csv",
]


@dataclass(frozen=True, eq=False)
class GroupPoint:
    """A group element in exponential coordinates over its parent algebra."""

    algebra: HTypeAlgebra
    v: np.ndarray
    z: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.v, dtype=np.float64).copy()
        z = np.asarray(self.z, dtype=np.float64).copy()
        if v.shape != (self.algebra.dim_v,) or z.shape != (self.algebra.dim_z,):
            raise ValueError(
                f"coordinates of shape {v.shape}/{z.shape} do not match "
                f"{self.algebra.label} (dim_v={self.algebra.dim_v}, dim_z={self.algebra.dim_z})"
            )
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(z))):
            raise ValueError("group point coordinates must be finite")
        v.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "z", z)

    def __repr__(self) -> str:
        return f"GroupPoint({self.algebra.label}, v={self.v}, z={self.z})"


class PointAtInfinity:
    """The added point of the one-point extension; a singleton."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = PointAtInfinity()

ExtendedPoint = Union[GroupPoint, PointAtInfinity]


def point(alg: HTypeAlgebra, v, z) -> GroupPoint:
    return GroupPoint(alg, np.asarray(v, dtype=np.float64), np.asarray(z, dtype=np.float64))


def identity(alg: HTypeAlgebra) -> GroupPoint:
    return GroupPoint(alg, np.zeros(alg.dim_v), np.zeros(alg.dim_z))


def _require_same_parent(p: GroupPoint, q: GroupPoint) -> HTypeAlgebra:
    if p.algebra is q.algebra:
        return p.algebra
    if (p.algebra.dim_v, p.algebra.dim_z) != (q.algebra.dim_v, q.algebra.dim_z) or \
            not np.array_equal(p.algebra.structure, q.algebra.structure):
        raise ValueError(
            f"parent algebra mismatch: {p.algebra.label} vs {q.algebra.label}"
        )
    return p.algebra


def group_mul(p: GroupPoint, q: GroupPoint) -> GroupPoint:
    """The product pq: (v + v', z + z' + [v, v']/2)."""
    alg = _require_same_parent(p, q)
    corr = bracket_arrays(alg, p.v[None, :], q.v[None, :])[0]
    return GroupPoint(alg, p.v + q.v, p.z + q.z + 0.5 * corr)


def group_inv(p: GroupPoint) -> GroupPoint:
    return GroupPoint(p.algebra, -p.v, -p.z)


def dilate(t: float, p: GroupPoint) -> GroupPoint:
    """The canonical dilation (v, z) -> (t v, t^2 z); a group automorphism."""
    t = float(t)
    if t <= 0.0:
        raise ValueError(f"dilation factor must be positive, got {t}")
    return GroupPoint(p.algebra, t * p.v, (t * t) * p.z)


def gauge(p: GroupPoint) -> float:
    """The Koranyi gauge (|v|^4/16 + |z|^2)^(1/4); zero only at the identity."""
    a = 0.25 * float(p.v @ p.v)
    return float((a * a + p.z @ p.z) ** 0.25)


def gauge_dist(p: GroupPoint, q: GroupPoint) -> float:
    """Left-invariant gauge distance ||q^{-1} p||."""
    return gauge(group_mul(group_inv(q), p))


def left_translate(g: GroupPoint) -> Callable[[ExtendedPoint], ExtendedPoint]:
    """The isometry x -> g x, extended to fix the point at infinity."""

    def translate(x: ExtendedPoint) -> ExtendedPoint:
        if isinstance(x, PointAtInfinity):
            return INFINITY
        return group_mul(g, x)

    return translate


# ---------------------------------------------------------------------------
# batch kernels on coordinate arrays


def group_mul_arrays(alg: HTypeAlgebra, v1, z1, v2, z2) -> tuple[np.ndarray, np.ndarray]:
    corr = bracket_arrays(alg, v1, v2)
    return v1 + v2, z1 + z2 + 0.5 * corr


def group_inv_arrays(v, z) -> tuple[np.ndarray, np.ndarray]:
    return -v, -z


def dilate_arrays(t, v, z) -> tuple[np.ndarray, np.ndarray]:
    """Rowwise dilation; t may be scalar or one factor per row."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(t <= 0.0):
        raise ValueError("dilation factors must be positive")
    if t.ndim == 0:
        return t * v, (t * t) * z
    return t[:, None] * v, (t * t)[:, None] * z


def gauge_arrays(alg: HTypeAlgebra, v, z) -> np.ndarray:
    a = 0.25 * np.sum(np.asarray(v) ** 2, axis=1)
    return (a * a + np.sum(np.asarray(z) ** 2, axis=1)) ** 0.25


def gauge_dist_arrays(alg: HTypeAlgebra, v1, z1, v2, z2) -> np.ndarray:
    """Rowwise gauge distance between two point arrays."""
    dv = v1 - v2
    dz = z1 - z2 - 0.5 * bracket_arrays(alg, v2, v1)
    return gauge_arrays(alg, dv, dz)


def pairwise_gauge_dist(alg: HTypeAlgebra, v: np.ndarray, z: np.ndarray,
                        chunk: int = 256) -> np.ndarray:
    """Full distance matrix of a point sample; exactly symmetric, zero diagonal.

    Row blocks are evaluated in fixed chunks to bound memory; the bracket
    kernel is exactly antisymmetric, so d(p, q) = d(q, p) bitwise and the
    diagonal vanishes without post-correction.
    """
    n = v.shape[0]
    out = np.empty((n, n))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        vq = v[start:stop]
        zq = z[start:stop]
        dv = v[None, :, :] - vq[:, None, :]  # entry [q, p] = v_p - v_q
        i, j, coeff, selector = alg._upper_entries
        if i.size:
            terms = coeff * (vq[:, None, i] * v[None, :, j] - vq[:, None, j] * v[None, :, i])
            corr = np.einsum("qpm,mk->qpk", terms, selector)
        else:
            corr = np.zeros((stop - start, n, alg.dim_z))
        dz = z[None, :, :] - zq[:, None, :] - 0.5 * corr
        a = 0.25 * np.sum(dv * dv, axis=2)
        out[start:stop] = (a * a + np.sum(dz * dz, axis=2)) ** 0.25
    return out


def points_to_arrays(points) -> tuple[HTypeAlgebra, np.ndarray, np.ndarray]:
    points = list(points)
    if not points:
        raise ValueError("empty point list")
    alg = points[0].algebra
    for p in points[1:]:
        _require_same_parent(points[0], p)
    v = np.stack([p.v for p in points])
    z = np.stack([p.z for p in points])
    return alg, v, z


def arrays_to_points(alg: HTypeAlgebra, v: np.ndarray, z: np.ndarray) -> list[GroupPoint]:
    return [GroupPoint(alg, v[i], z[i]) for i in range(v.shape[0])]


# ---------------------------------------------------------------------------
# sampling

def sample_with_rng(alg: HTypeAlgebra, count: int, radius: float,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform draws from the bounding box of the gauge ball of the given radius.

    The box is |v_i| <= 2 r, |z_k| <= r^2 (the tight coordinate box of
    ``gauge <= r``).  Draw order is fixed: all horizontal coordinates first,
    then all central ones.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    v = rng.uniform(-2.0 * radius, 2.0 * radius, size=(count, alg.dim_v))
    z = rng.uniform(-radius * radius, radius * radius, size=(count, alg.dim_z))
    return v, z


def sample_arrays(alg: HTypeAlgebra, count: int, radius: float,
                  seed: int) -> tuple[np.ndarray, np.ndarray]:
    return sample_with_rng(alg, count, radius, np.random.default_rng(seed))


def sample_points(alg: HTypeAlgebra, count: int, radius: float, seed: int) -> list[GroupPoint]:
    """Seeded uniform sample from the coordinate box of the gauge ball."""
    v, z = sample_arrays(alg, count, radius, seed)
    return arrays_to_points(alg, v, z)


# ---------------------------------------------------------------------------
# point-sample files

def _csv_header(alg: HTypeAlgebra) -> list[str]:
    return [f"v_{i + 1}" for i in range(alg.dim_v)] + [f"z_{k + 1}" for k in range(alg.dim_z)]


def save_points_csv(path_or_file, alg: HTypeAlgebra, v: np.ndarray, z: np.ndarray) -> None:
    """Write one point per row with shortest round-trip decimal formatting."""
    rows = np.hstack([v, z]) if alg.dim_z else np.asarray(v, dtype=np.float64)

    def write(fh) -> None:
        fh.write(",".join(_csv_header(alg)) + "\n")
        for row in rows:
            fh.write(",".join(format_float(x) for x in row) + "\n")

    if hasattr(path_or_file, "write"):
        write(path_or_file)
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            write(fh)


def load_points_csv(path, alg: HTypeAlgebra) -> tuple[np.ndarray, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        expected = _csv_header(alg)
        if header != expected:
            raise ValueError(
                f"point file {path}: header {header} does not match {alg.label} "
                f"(expected {expected})"
            )
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(expected):
                raise ValueError(f"point file {path}: row {lineno} has {len(parts)} fields, "
                                 f"expected {len(expected)}")
            try:
                rows.append([float(t) for t in parts])
            except ValueError:
                raise ValueError(f"point file {path}: row {lineno} has a non-numeric field") from None
    if not rows:
        raise ValueError(f"point file {path}: no data rows")
    data = np.asarray(rows, dtype=np.float64)
    return data[:, :alg.dim_v], data[:, alg.dim_v:]
