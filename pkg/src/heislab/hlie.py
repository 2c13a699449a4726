"""Step-two stratified Lie algebras with inner products and J-map machinery.

An algebra lives on ``v (+) z`` with orthonormal coordinates on both layers
and is stored as the structure tensor ``B`` of the bracket,
``[X, Y]_k = sum_ij B[k,i,j] X_i Y_j``, antisymmetric in (i, j).  The map
``J_Z`` on the horizontal layer is defined by ``<J_Z X, Y> = <Z, [X, Y]>``
and comes out in coordinates as ``(J_Z)_{ji} = sum_k Z_k B[k,i,j]``.

An algebra is of Heisenberg type when ``|J_Z X| = |Z||X|`` for all X, Z
(equivalently ``J_Z^2 = -|Z|^2 I``).  A Heisenberg-type algebra satisfies
the J^2-condition when for every X and every orthogonal pair Z, Z' in the
center, ``J_Z J_{Z'} X`` again lies in the span of ``{J_W X : W in z}``.
Both conditions are checked numerically here, with exact basis sweeps plus
seeded random sampling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from heislab import algebra as _algebra
from heislab.algebra import AlgebraKind
from heislab.util import fingerprint_of_arrays

__all__ = [
    "HTypeAlgebra",
    "HTypeReport",
    "J2Report",
    "bracket",
    "bracket_arrays",
    "j_map",
    "check_h_type",
    "check_j2",
    "make_heisenberg",
    "make_truncated_quaternionic",
    "make_degenerate_direct_sum",
    "bracket_vs_algebra_consistency",
    "algebra_from_name",
    "builtin_names",
    "load_algebra_spec",
    "save_algebra_spec",
]

DEFAULT_TOL = 1e-9

_KIND_LETTER = {
    AlgebraKind.REAL: "R",
    AlgebraKind.COMPLEX: "C",
    AlgebraKind.QUATERNION: "H",
    AlgebraKind.OCTONION: "O",
}


@dataclass(frozen=True)
class HTypeAlgebra:
    """A step-two stratified algebra given by its bracket structure tensor."""

    label: str
    dim_v: int
    dim_z: int
    structure: np.ndarray  # shape (dim_z, dim_v, dim_v)

    def __post_init__(self) -> None:
        if self.dim_v < 1 or self.dim_z < 0:
            raise ValueError(f"invalid dimensions dim_v={self.dim_v}, dim_z={self.dim_z}")
        tensor = np.asarray(self.structure, dtype=np.float64).copy()
        expected = (self.dim_z, self.dim_v, self.dim_v)
        if tensor.shape != expected:
            raise ValueError(f"structure tensor shape {tensor.shape} does not match {expected}")
        if not np.all(np.isfinite(tensor)):
            raise ValueError("structure tensor entries must be finite")
        if not np.array_equal(tensor, -tensor.transpose(0, 2, 1)):
            raise ValueError("structure tensor must be antisymmetric in the horizontal indices")
        tensor.setflags(write=False)
        object.__setattr__(self, "structure", tensor)

    @cached_property
    def j_stack(self) -> np.ndarray:
        """Matrices of J over the orthonormal center basis: ``j_stack[k] = J_{Z_k}``."""
        stack = self.structure.transpose(0, 2, 1).copy()
        stack.setflags(write=False)
        return stack

    @cached_property
    def _upper_entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Nonzero strictly-upper structure entries, plus a center selector matrix."""
        k, i, j = np.nonzero(self.structure)
        keep = i < j
        k, i, j = k[keep], i[keep], j[keep]
        coeff = self.structure[k, i, j]
        selector = np.zeros((k.size, self.dim_z))
        selector[np.arange(k.size), k] = 1.0
        return i, j, coeff, selector

    @cached_property
    def fingerprint(self) -> str:
        """Hash of the structure constants (label-independent), for report replay."""
        dims = np.array([self.dim_v, self.dim_z], dtype=np.int64)
        return fingerprint_of_arrays(dims, self.structure)

    @property
    def homogeneous_dimension(self) -> int:
        return self.dim_v + 2 * self.dim_z

    def __repr__(self) -> str:
        return f"HTypeAlgebra({self.label!r}, dim_v={self.dim_v}, dim_z={self.dim_z})"


def _require_horizontal(alg: HTypeAlgebra, x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (alg.dim_v,):
        raise ValueError(f"{name} has shape {x.shape}, expected ({alg.dim_v},) for {alg.label}")
    return x


def bracket(alg: HTypeAlgebra, x, y) -> np.ndarray:
    """The bracket [x, y] of two horizontal vectors, as a center vector."""
    x = _require_horizontal(alg, x, "x")
    y = _require_horizontal(alg, y, "y")
    return bracket_arrays(alg, x[None, :], y[None, :])[0]


def bracket_arrays(alg: HTypeAlgebra, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Rowwise bracket of two (n, dim_v) arrays; returns (n, dim_z).

    Evaluated over strictly-upper structure entries as
    ``sum B[k,i,j] (x_i y_j - x_j y_i)``, which keeps the bracket exactly
    antisymmetric in floating point: [x, x] = 0 and [x, y] = -[y, x]
    bitwise, so gauge distances vanish on, and are symmetric across,
    coincident points.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    i, j, coeff, selector = alg._upper_entries
    if i.size == 0:
        return np.zeros((x.shape[0], alg.dim_z))
    terms = coeff * (x[:, i] * y[:, j] - x[:, j] * y[:, i])
    return np.einsum("nm,mk->nk", terms, selector)


def j_map(alg: HTypeAlgebra, z) -> np.ndarray:
    """The skew-symmetric operator J_Z on the horizontal layer, as a matrix."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (alg.dim_z,):
        raise ValueError(f"z has shape {z.shape}, expected ({alg.dim_z},) for {alg.label}")
    return np.einsum("k,kij->ji", z, alg.structure)


def _apply_j_rows(alg: HTypeAlgebra, z_rows: np.ndarray, x_rows: np.ndarray) -> np.ndarray:
    """Rowwise J_{z_rows[s]} x_rows[s]; returns (n, dim_v)."""
    return np.einsum("sk,kij,si->sj", z_rows, alg.structure, x_rows)


def _unit_rows(rng: np.random.Generator, count: int, dim: int, floor: float = 1e-8) -> np.ndarray:
    out = np.empty((count, dim))
    filled = 0
    while filled < count:
        cand = rng.standard_normal((count - filled, dim))
        norms = np.linalg.norm(cand, axis=1)
        ok = norms > floor
        good = cand[ok] / norms[ok][:, None]
        out[filled:filled + good.shape[0]] = good
        filled += good.shape[0]
    return out


def _orthonormal_pairs(rng: np.random.Generator, count: int, dim: int,
                       floor: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Rowwise orthonormal pairs via Gram-Schmidt, resampling degenerate draws."""
    first = _unit_rows(rng, count, dim, floor)
    second = np.empty_like(first)
    need = np.arange(count)
    while need.size:
        cand = rng.standard_normal((need.size, dim))
        cand -= np.sum(cand * first[need], axis=1, keepdims=True) * first[need]
        norms = np.linalg.norm(cand, axis=1)
        ok = norms > floor
        rows = need[ok]
        second[rows] = cand[ok] / norms[ok][:, None]
        need = need[~ok]
    return first, second


@dataclass
class HTypeReport:
    """Outcome of the |J_Z X| = |Z||X| certification."""

    label: str
    fingerprint: str
    is_h_type: bool
    max_residual: float
    samples: int
    tolerance: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "kind": "h_type",
            "algebra": self.label,
            "fingerprint": self.fingerprint,
            "is_h_type": self.is_h_type,
            "max_residual": self.max_residual,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "seed": self.seed,
        }


@dataclass
class J2Report:
    """Outcome of the J^2-condition certification."""

    label: str
    fingerprint: str
    satisfies_j2: bool
    max_residual: float
    witness: Optional[tuple[np.ndarray, np.ndarray, np.ndarray]]
    samples: int
    tolerance: float
    seed: int

    def to_dict(self) -> dict:
        witness = None
        if self.witness is not None:
            x, z, zp = self.witness
            witness = {"x": [float(t) for t in x],
                       "z": [float(t) for t in z],
                       "z_prime": [float(t) for t in zp]}
        return {
            "kind": "j2",
            "algebra": self.label,
            "fingerprint": self.fingerprint,
            "satisfies_j2": self.satisfies_j2,
            "max_residual": self.max_residual,
            "witness": witness,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "seed": self.seed,
        }


def check_h_type(alg: HTypeAlgebra, samples: int = 2000, tol: float = DEFAULT_TOL,
                 seed: int = 0) -> HTypeReport:
    """Certify |J_Z X|^2 = |Z|^2 |X|^2 over a basis sweep plus random samples.

    The residual is relative, ``||J_Z X|^2 - |Z|^2|X|^2| / (|Z|^2|X|^2)``.
    The basis sweep also checks the operator identity J_Z^2 + |Z|^2 I = 0
    for each basis Z.  With an empty center the condition holds vacuously.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if alg.dim_z == 0:
        return HTypeReport(alg.label, alg.fingerprint, True, 0.0, samples, tol, seed)

    worst = 0.0
    eye = np.eye(alg.dim_v)
    for jk in alg.j_stack:
        col_sq = np.sum(jk * jk, axis=0)  # |J_{Z_k} e_i|^2, target 1
        worst = max(worst, float(np.max(np.abs(col_sq - 1.0))))
        worst = max(worst, float(np.max(np.abs(jk @ jk + eye))))

    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, alg.dim_v))
    z = rng.standard_normal((samples, alg.dim_z))
    x_sq = np.sum(x * x, axis=1)
    z_sq = np.sum(z * z, axis=1)
    keep = (x_sq > 1e-16) & (z_sq > 1e-16)
    jx = _apply_j_rows(alg, z[keep], x[keep])
    target = z_sq[keep] * x_sq[keep]
    residual = np.abs(np.sum(jx * jx, axis=1) - target) / target
    if residual.size:
        worst = max(worst, float(np.max(residual)))
    return HTypeReport(alg.label, alg.fingerprint, worst <= tol, worst, samples, tol, seed)


def _j2_residuals(alg: HTypeAlgebra, x: np.ndarray, z: np.ndarray,
                  zp: np.ndarray) -> np.ndarray:
    """Distance of J_z J_z' x from span{J_{Z_k} x}, for unit rows x, z, z'."""
    inner = _apply_j_rows(alg, zp, x)
    target = _apply_j_rows(alg, z, inner)
    # generators[s, k, :] = J_{Z_k} x_s
    generators = np.einsum("kij,si->skj", alg.structure, x)
    gram = np.einsum("skv,slv->skl", generators, generators)
    rhs = np.einsum("skv,sv->sk", generators, target)
    coeff = np.linalg.solve(gram, rhs[..., None])[..., 0]
    projection = np.einsum("skv,sk->sv", generators, coeff)
    return np.linalg.norm(target - projection, axis=1)


def check_j2(alg: HTypeAlgebra, samples: int = 2000, tol: float = DEFAULT_TOL,
             seed: int = 0) -> J2Report:
    """Certify the J^2-condition over a basis sweep plus random samples.

    Residuals are Euclidean distances of ``J_Z J_{Z'} X`` from the span of
    ``{J_{Z_k} X}``, normalized by |Z||Z'||X| (all sampled at norm one).
    Requires the algebra to pass the Heisenberg-type check first; a center
    of dimension 0 or 1 satisfies the condition vacuously.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    precheck = check_h_type(alg, samples=min(samples, 512), tol=tol, seed=seed)
    if not precheck.is_h_type:
        raise ValueError(
            f"{alg.label} is not of Heisenberg type "
            f"(residual {precheck.max_residual:.3e}); the J^2 check does not apply"
        )
    if alg.dim_z <= 1:
        return J2Report(alg.label, alg.fingerprint, True, 0.0, None, samples, tol, seed)

    xs, zs, zps = [], [], []
    eye_v = np.eye(alg.dim_v)
    eye_z = np.eye(alg.dim_z)
    for a in range(alg.dim_v):
        for b in range(alg.dim_z):
            for c in range(alg.dim_z):
                if b != c:
                    xs.append(eye_v[a])
                    zs.append(eye_z[b])
                    zps.append(eye_z[c])
    rng = np.random.default_rng(seed)
    xs.append(_unit_rows(rng, samples, alg.dim_v))
    z1, z2 = _orthonormal_pairs(rng, samples, alg.dim_z)
    zs.append(z1)
    zps.append(z2)
    x = np.vstack([np.atleast_2d(t) for t in xs])
    z = np.vstack([np.atleast_2d(t) for t in zs])
    zp = np.vstack([np.atleast_2d(t) for t in zps])

    residuals = _j2_residuals(alg, x, z, zp)
    worst = float(np.max(residuals))
    # earliest near-maximal triple, so basis witnesses win ties over samples
    worst_index = int(np.argmax(residuals >= worst * (1.0 - 1e-12)))
    ok = worst <= tol
    witness = None if ok else (x[worst_index], z[worst_index], zp[worst_index])
    return J2Report(alg.label, alg.fingerprint, ok, worst, witness, samples, tol, seed)


def _set_bracket(tensor: np.ndarray, k: int, i: int, j: int, value: float) -> None:
    tensor[k, i, j] = value
    tensor[k, j, i] = -value


def make_heisenberg(kind: AlgebraKind, n: int = 1) -> HTypeAlgebra:
    """The Heisenberg group algebra over one of R, C, H, O with n blocks.

    The horizontal layer is K^n laid out blockwise (dim(K) coordinates per
    block), the center is Im(K).  Over O only n = 1 is defined.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind is AlgebraKind.OCTONION and n != 1:
        raise ValueError("the octonion algebra only exists with n = 1")
    d = kind.dim
    dim_v = n * d
    dim_z = kind.im_dim
    tensor = np.zeros((dim_z, dim_v, dim_v))
    if kind is AlgebraKind.COMPLEX:
        for i in range(n):
            _set_bracket(tensor, 0, 2 * i, 2 * i + 1, 1.0)  # [X_i, Y_i] = Z
    elif kind is AlgebraKind.QUATERNION:
        for i in range(n):
            x, y, v, w = 4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3
            _set_bracket(tensor, 0, x, y, 1.0)  # [X_i, Y_i] = Z_1
            _set_bracket(tensor, 0, v, w, 1.0)  # [V_i, W_i] = Z_1
            _set_bracket(tensor, 1, x, v, 1.0)  # [X_i, V_i] = Z_2
            _set_bracket(tensor, 1, w, y, 1.0)  # [W_i, Y_i] = Z_2
            _set_bracket(tensor, 2, x, w, 1.0)  # [X_i, W_i] = Z_3
            _set_bracket(tensor, 2, y, v, 1.0)  # [Y_i, V_i] = Z_3
    elif kind is AlgebraKind.OCTONION:
        eps = _algebra.epsilon_tensor(kind)
        for k in range(1, 8):
            _set_bracket(tensor, k - 1, 0, k, 1.0)  # [X_0, X_k] = Z_k
        for i in range(1, 8):
            for j in range(i + 1, 8):
                for k in range(1, 8):
                    value = eps[i, j, k]
                    if value:
                        _set_bracket(tensor, k - 1, i, j, float(value))
    letter = _KIND_LETTER[kind]
    label = "H_O" if kind is AlgebraKind.OCTONION else f"H_{letter}:{n}"
    return HTypeAlgebra(label, dim_v, dim_z, tensor)


def make_truncated_quaternionic() -> HTypeAlgebra:
    """Negative control: H-type but not J^2.

    The horizontal layer is the quaternions, the center only the first two
    imaginary directions, with the bracket of the one-block quaternionic
    algebra orthogonally projected onto them.
    """
    full = make_heisenberg(AlgebraKind.QUATERNION, 1)
    return HTypeAlgebra("truncated_HH", 4, 2, full.structure[:2])


def make_degenerate_direct_sum() -> HTypeAlgebra:
    """Negative control: fails the Heisenberg-type condition.

    dim_v = 4, dim_z = 1 with the single bracket [X_1, X_2] = Z, so J_Z
    annihilates the last two horizontal directions.
    """
    tensor = np.zeros((1, 4, 4))
    _set_bracket(tensor, 0, 0, 1, 1.0)
    return HTypeAlgebra("degenerate_sum", 4, 1, tensor)


def bracket_vs_algebra_consistency(kind: AlgebraKind, n: int = 1, samples: int = 10000,
                                   seed: int = 0) -> float:
    """Max deviation between the structure-constant bracket and -sum_i Im(x_i conj(y_i)).

    The blockwise division-algebra formula identifies Im(K) with the center
    via e_k <-> Z_k; the structure constants of :func:`make_heisenberg` are
    oriented so this holds with the single global sign baked in here.
    """
    alg = make_heisenberg(kind, n)
    if alg.dim_z == 0:
        return 0.0
    d = kind.dim
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, alg.dim_v))
    y = rng.standard_normal((samples, alg.dim_v))
    lhs = bracket_arrays(alg, x, y)
    rhs = np.zeros((samples, alg.dim_z))
    for i in range(n):
        xi = x[:, i * d:(i + 1) * d]
        yi = y[:, i * d:(i + 1) * d]
        prod = _algebra.mul_arrays(kind, xi, _algebra.conj_arrays(kind, yi))
        rhs -= prod[:, 1:]
    return float(np.max(np.abs(lhs - rhs)))


_BUILTIN_FIXED = {
    "truncated_HH": make_truncated_quaternionic,
    "degenerate_sum": make_degenerate_direct_sum,
}

_LETTER_KIND = {v: k for k, v in _KIND_LETTER.items()}


def builtin_names() -> list[str]:
    return ["H_R:n", "H_C:n", "H_H:n", "H_O", "truncated_HH", "degenerate_sum"]


def algebra_from_name(name: str) -> HTypeAlgebra:
    """Resolve a builtin algebra name like ``H_C:2``, ``H_O`` or ``truncated_HH``."""
    if name in _BUILTIN_FIXED:
        return _BUILTIN_FIXED[name]()
    base, _, suffix = name.partition(":")
    if base in ("H_R", "H_C", "H_H", "H_O"):
        kind = _LETTER_KIND[base[2]]
        if suffix == "":
            n = 1
        else:
            try:
                n = int(suffix)
            except ValueError:
                raise ValueError(f"invalid block count {suffix!r} in algebra name {name!r}") from None
        if n < 1:
            raise ValueError(f"block count must be >= 1 in algebra name {name!r}")
        if kind is AlgebraKind.OCTONION and n != 1:
            raise ValueError("H_O does not admit more than one block")
        return make_heisenberg(kind, n)
    raise ValueError(
        f"unknown algebra name {name!r} (expected one of {', '.join(builtin_names())}, "
        "or a path to an algebra-spec JSON file)"
    )


def save_algebra_spec(alg: HTypeAlgebra, path) -> None:
    """Write {label, dim_v, dim_z, entries} with 1-based upper-triangle entries."""
    entries = []
    for k in range(alg.dim_z):
        for i in range(alg.dim_v):
            for j in range(i + 1, alg.dim_v):
                value = alg.structure[k, i, j]
                if value != 0.0:
                    entries.append([i + 1, j + 1, k + 1, float(value)])
    payload = {"label": alg.label, "dim_v": alg.dim_v, "dim_z": alg.dim_z, "entries": entries}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_algebra_spec(path) -> HTypeAlgebra:
    """Load an algebra-spec JSON file, antisymmetrizing and validating entries."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed algebra spec {path}: {exc}") from None
    for key in ("label", "dim_v", "dim_z", "entries"):
        if key not in data:
            raise ValueError(f"algebra spec {path} is missing the field {key!r}")
    dim_v, dim_z = int(data["dim_v"]), int(data["dim_z"])
    if dim_v < 1 or dim_z < 0:
        raise ValueError(f"algebra spec {path}: invalid dimensions dim_v={dim_v}, dim_z={dim_z}")
    tensor = np.zeros((dim_z, dim_v, dim_v))
    seen = set()
    for entry in data["entries"]:
        if len(entry) != 4:
            raise ValueError(f"algebra spec {path}: entry {entry!r} is not [i, j, k, value]")
        i, j, k, value = int(entry[0]), int(entry[1]), int(entry[2]), float(entry[3])
        if not (1 <= i < j <= dim_v):
            raise ValueError(f"algebra spec {path}: entry {entry!r} needs 1 <= i < j <= dim_v")
        if not 1 <= k <= dim_z:
            raise ValueError(f"algebra spec {path}: entry {entry!r} has center index out of range")
        if not np.isfinite(value):
            raise ValueError(f"algebra spec {path}: entry {entry!r} has a non-finite value")
        if (i, j, k) in seen:
            raise ValueError(f"algebra spec {path}: duplicate entry for (i, j, k) = {(i, j, k)}")
        seen.add((i, j, k))
        tensor[k - 1, i - 1, j - 1] = value
        tensor[k - 1, j - 1, i - 1] = -value
    return HTypeAlgebra(str(data["label"]), dim_v, dim_z, tensor)
