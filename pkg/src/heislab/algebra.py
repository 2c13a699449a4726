"""Arithmetic in the four real normed division algebras R, C, H and O.

Elements are real coefficient vectors over the canonical basis
``e_0 .. e_{dim-1}``, with ``e_0`` the unit.  Products of imaginary basis
elements are driven by a completely antisymmetric tensor ``eps`` on the
imaginary indices::

    e_i e_j = -delta_ij e_0 + sum_k eps_ijk e_k        (i, j >= 1)

For the octonions ``eps`` is +1 on the cyclic orbits of the seven triples
124, 137, 156, 235, 267, 346, 457 (so e.g. ``e_1 e_2 = e_4``); for the
quaternions the single triple is 123.  This is the unique bilinear unital
extension of those basis rules satisfying the composition law
``|ab| = |a||b|``, which the test suite enforces.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import permutations

import numpy as np

__all__ = [
    "AlgebraKind",
    "AlgebraElement",
    "EpsilonTensor",
    "OCTONION_TRIPLES",
    "QUATERNION_TRIPLES",
    "epsilon_tensor",
    "multiplication_table",
    "multiplication_tensor",
    "element",
    "basis",
    "zero",
    "one",
    "mul",
    "conj",
    "re",
    "im",
    "norm",
    "mul_arrays",
    "conj_arrays",
    "random_elements",
]

OCTONION_TRIPLES = ((1, 2, 4), (1, 3, 7), (1, 5, 6), (2, 3, 5), (2, 6, 7), (3, 4, 6), (4, 5, 7))
QUATERNION_TRIPLES = ((1, 2, 3),)


class AlgebraKind(Enum):
    """One of the four real normed division algebras."""

    REAL = "real"
    COMPLEX = "complex"
    QUATERNION = "quaternion"
    OCTONION = "octonion"

    @property
    def dim(self) -> int:
        return _DIMS[self]

    @property
    def im_dim(self) -> int:
        """Dimension of the imaginary part (0, 1, 3 or 7)."""
        return self.dim - 1


_DIMS = {
    AlgebraKind.REAL: 1,
    AlgebraKind.COMPLEX: 2,
    AlgebraKind.QUATERNION: 4,
    AlgebraKind.OCTONION: 8,
}

_TRIPLES = {
    AlgebraKind.REAL: (),
    AlgebraKind.COMPLEX: (),
    AlgebraKind.QUATERNION: QUATERNION_TRIPLES,
    AlgebraKind.OCTONION: OCTONION_TRIPLES,
}

_PARITY = {p: s for s, group in ((1, ((0, 1, 2), (1, 2, 0), (2, 0, 1))),
                                 (-1, ((1, 0, 2), (0, 2, 1), (2, 1, 0))))
           for p in group}


@dataclass(frozen=True)
class EpsilonTensor:
    """Completely antisymmetric tensor on imaginary indices ``1..m``."""

    values: np.ndarray  # shape (m, m, m); entry [i-1, j-1, k-1]

    def __getitem__(self, ijk: tuple[int, int, int]) -> int:
        i, j, k = ijk
        return int(self.values[i - 1, j - 1, k - 1])

    @property
    def m(self) -> int:
        return self.values.shape[0]


def _epsilon_values(m: int, triples: tuple[tuple[int, int, int], ...]) -> np.ndarray:
    values = np.zeros((m, m, m), dtype=np.int8)
    for triple in triples:
        for perm in permutations(range(3)):
            i, j, k = (triple[p] for p in perm)
            values[i - 1, j - 1, k - 1] = _PARITY[perm]
    values.setflags(write=False)
    return values


@lru_cache(maxsize=None)
def epsilon_tensor(kind: AlgebraKind) -> EpsilonTensor:
    """Antisymmetric structure tensor of the imaginary basis products."""
    return EpsilonTensor(_epsilon_values(kind.im_dim, _TRIPLES[kind]))


@lru_cache(maxsize=None)
def multiplication_table(kind: AlgebraKind) -> tuple[np.ndarray, np.ndarray]:
    """Signed-index basis product table: ``e_i e_j = sign[i,j] * e_{index[i,j]}``."""
    d = kind.dim
    sign = np.zeros((d, d), dtype=np.int8)
    index = np.zeros((d, d), dtype=np.int64)
    sign[0, :] = 1
    index[0, :] = np.arange(d)
    sign[:, 0] = 1
    index[:, 0] = np.arange(d)
    for i in range(1, d):
        sign[i, i] = -1
        index[i, i] = 0
    eps = epsilon_tensor(kind)
    nz = np.argwhere(eps.values != 0)
    for i0, j0, k0 in nz:
        sign[i0 + 1, j0 + 1] = eps.values[i0, j0, k0]
        index[i0 + 1, j0 + 1] = k0 + 1
    sign.setflags(write=False)
    index.setflags(write=False)
    return sign, index


@lru_cache(maxsize=None)
def multiplication_tensor(kind: AlgebraKind) -> np.ndarray:
    """Dense structure tensor M with ``(ab)_k = sum_ij a_i b_j M[i,j,k]``."""
    d = kind.dim
    sign, index = multiplication_table(kind)
    tensor = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            tensor[i, j, index[i, j]] = sign[i, j]
    tensor.setflags(write=False)
    return tensor


@dataclass(frozen=True)
class AlgebraElement:
    """Coefficient vector over the canonical basis of one algebra."""

    kind: AlgebraKind
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=np.float64).copy()
        if coeffs.shape != (self.kind.dim,):
            raise ValueError(
                f"coefficient vector of length {coeffs.size} does not match "
                f"{self.kind.value} (dim {self.kind.dim})"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _require_same_kind(self, other)
        return AlgebraElement(self.kind, self.coeffs + other.coeffs)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _require_same_kind(self, other)
        return AlgebraElement(self.kind, self.coeffs - other.coeffs)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.kind, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        return AlgebraElement(self.kind, self.coeffs * float(other))

    def __rmul__(self, other):
        return AlgebraElement(self.kind, self.coeffs * float(other))

    def __repr__(self) -> str:
        terms = " + ".join(f"{c:g}*e{i}" for i, c in enumerate(self.coeffs) if c != 0.0)
        return f"<{self.kind.value}: {terms or '0'}>"


def _require_same_kind(a: AlgebraElement, b: AlgebraElement) -> None:
    if a.kind is not b.kind:
        raise ValueError(f"kind mismatch: {a.kind.value} vs {b.kind.value}")


def element(kind: AlgebraKind, coeffs) -> AlgebraElement:
    return AlgebraElement(kind, np.asarray(coeffs, dtype=np.float64))


def basis(kind: AlgebraKind, i: int) -> AlgebraElement:
    """The canonical basis element ``e_i``."""
    if not 0 <= i < kind.dim:
        raise ValueError(f"basis index {i} out of range for {kind.value}")
    coeffs = np.zeros(kind.dim)
    coeffs[i] = 1.0
    return AlgebraElement(kind, coeffs)


def zero(kind: AlgebraKind) -> AlgebraElement:
    return AlgebraElement(kind, np.zeros(kind.dim))


def one(kind: AlgebraKind) -> AlgebraElement:
    return basis(kind, 0)


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Algebra product ab (bilinear, satisfies |ab| = |a||b|)."""
    _require_same_kind(a, b)
    tensor = multiplication_tensor(a.kind)
    return AlgebraElement(a.kind, np.einsum("i,j,ijk->k", a.coeffs, b.coeffs, tensor))


def conj(a: AlgebraElement) -> AlgebraElement:
    """Conjugation: negates the coefficients of ``e_1 .. e_{dim-1}``."""
    coeffs = a.coeffs.copy()
    coeffs[1:] *= -1.0
    return AlgebraElement(a.kind, coeffs)


def re(a: AlgebraElement) -> float:
    """Real part, the ``e_0`` coefficient."""
    return float(a.coeffs[0])


def im(a: AlgebraElement) -> AlgebraElement:
    """Imaginary part: zeroes the ``e_0`` coefficient."""
    coeffs = a.coeffs.copy()
    coeffs[0] = 0.0
    return AlgebraElement(a.kind, coeffs)


def norm(a: AlgebraElement) -> float:
    """Euclidean norm of the coefficient vector; satisfies a*conj(a) = |a|^2 e_0."""
    return float(np.linalg.norm(a.coeffs))


def mul_arrays(kind: AlgebraKind, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rowwise product of two (n, dim) coefficient arrays."""
    tensor = multiplication_tensor(kind)
    return np.einsum("ni,nj,ijk->nk", a, b, tensor)


def conj_arrays(kind: AlgebraKind, a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64)
    out[:, 1:] *= -1.0
    return out


def random_elements(kind: AlgebraKind, count: int, rng: np.random.Generator,
                    scale: float = 1.0) -> np.ndarray:
    """Gaussian coefficient rows, one element per row."""
    return scale * rng.standard_normal((count, kind.dim))
