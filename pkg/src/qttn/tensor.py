"""Dense tensors with a precision tag and a pluggable backend.

Everything above this module (tree state, environments, sweeps) talks to
tensors only through the small surface defined here: ``contract``,
``permute``, ``fuse``/``split``, the three decompositions and ``convert``.
:class:`qttn.symmetric.BlockSparseTensor` implements the same surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .backends import Backend, get_backend
from .errors import NumericError, PrecisionError, ShapeError
from .precision import Precision

__all__ = [
    "Tensor",
    "SvdResult",
    "contract",
    "permute",
    "fuse",
    "split",
    "svd",
    "qr",
    "eigh",
    "convert",
    "random_tensor",
    "select_rank",
    "tiled_rank",
    "matrix_svd",
]

SVD_ALGORITHMS = ("direct", "via_eigh")


class Tensor:
    """Dense multi-linear array stored row-major.

    Treat instances as immutable values: every operation returns a new
    tensor and never writes into ``data`` of its inputs.
    """

    __slots__ = ("data", "precision", "backend")

    def __init__(self, data, precision: Precision | str | None = None, backend: str = "optimized"):
        arr = np.asarray(data)
        if precision is None:
            precision = Precision.from_dtype(arr.dtype)
        precision = Precision.parse(precision)
        if np.iscomplexobj(arr) and not precision.is_complex:
            _check_real_representable(arr)
            arr = arr.real
        self.data = np.ascontiguousarray(arr, dtype=precision.dtype)
        self.precision = precision
        self.backend = backend
        if self.data.ndim == 0:
            raise ShapeError("tensors need at least one axis")
        if any(d < 1 for d in self.data.shape):
            raise ShapeError(f"link dimensions must be positive, got {self.data.shape}")
        _check_finite(self.data, "tensor data")
        get_backend(backend)

    @classmethod
    def _wrap(cls, arr: np.ndarray, precision: Precision, backend: str) -> "Tensor":
        # Internal fast path: arr already has the right dtype.
        t = object.__new__(cls)
        t.data = arr
        t.precision = precision
        t.backend = backend
        return t

    # ------------------------------------------------------------------ info
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def nbytes(self) -> int:
        return self.data.nbytes

    @property
    def is_symmetric(self) -> bool:
        return False

    def _impl(self) -> Backend:
        return get_backend(self.backend)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, precision={self.precision.value}, backend={self.backend!r})"

    def to_numpy(self) -> np.ndarray:
        return self.data.copy()

    def norm(self) -> float:
        return float(np.linalg.norm(self.data.ravel()))

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.data).all())

    # ------------------------------------------------------------ arithmetic
    def _same(self, other: "Tensor"):
        if not isinstance(other, Tensor):
            return NotImplemented
        if other.precision != self.precision:
            raise PrecisionError(f"precision mismatch: {self.precision.value} vs {other.precision.value}")
        if other.shape != self.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")
        return other

    def __add__(self, other):
        other = self._same(other)
        return Tensor._wrap(self.data + other.data, self.precision, self.backend)

    def __sub__(self, other):
        other = self._same(other)
        return Tensor._wrap(self.data - other.data, self.precision, self.backend)

    def __mul__(self, scalar):
        if isinstance(scalar, Tensor):
            return NotImplemented
        if np.iscomplexobj(scalar) and not self.precision.is_complex:
            raise PrecisionError("complex scalar times real tensor; convert first")
        return Tensor._wrap((self.data * scalar).astype(self.precision.dtype, copy=False), self.precision,
                            self.backend)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __neg__(self):
        return self * -1.0

    def conj(self) -> "Tensor":
        if not self.precision.is_complex:
            return self
        return Tensor._wrap(self.data.conj(), self.precision, self.backend)

    def vdot(self, other: "Tensor"):
        """``<self|other>`` over all elements."""
        other = self._same(other)
        return np.vdot(self.data, other.data)

    # ----------------------------------------------------------- flattening
    def to_vector(self) -> np.ndarray:
        return self.data.reshape(-1)

    def from_vector(self, vec: np.ndarray) -> "Tensor":
        """New tensor with this tensor's structure and the entries of ``vec``."""
        return Tensor._wrap(np.asarray(vec, dtype=self.precision.dtype).reshape(self.shape), self.precision,
                            self.backend)

    @property
    def vector_size(self) -> int:
        return self.size

    def zeros_like(self) -> "Tensor":
        return Tensor._wrap(np.zeros(self.shape, self.precision.dtype), self.precision, self.backend)

    def with_backend(self, backend: str) -> "Tensor":
        get_backend(backend)
        return Tensor._wrap(self.data, self.precision, backend)

    # -------------------------------------------------- method-style surface
    def transpose(self, order: Sequence[int]) -> "Tensor":
        return permute(self, order)

    def tensordot(self, other: "Tensor", axes_self, axes_other) -> "Tensor":
        return contract(self, other, axes_self, axes_other)

    def astype(self, precision: Precision | str) -> "Tensor":
        return convert(self, precision)

    def apply(self, op: "Tensor", axis: int) -> "Tensor":
        """Act with the matrix ``op`` on one axis, keeping the axis order."""
        if op.ndim != 2:
            raise ShapeError("operators must be rank 2")
        if op.precision != self.precision:
            raise PrecisionError(f"precision mismatch: {op.precision.value} vs {self.precision.value}")
        if op.shape[1] != self.shape[axis]:
            raise ShapeError(f"operator of shape {op.shape} cannot act on axis of dim {self.shape[axis]}")
        out = self._impl().apply_matrix(op.data, self.data, axis)
        return Tensor._wrap(out, self.precision, self.backend)

    def svd(self, left_axes, right_axes, bond_direction=None, **kwargs) -> "SvdResult":
        # bond_direction only matters for block-sparse tensors; accepted here for a shared call shape
        return svd(self, left_axes, right_axes, **kwargs)

    def qr(self, left_axes, right_axes, bond_direction=None):
        return qr(self, left_axes, right_axes)

    def eigh(self, left_axes=None, right_axes=None):
        return eigh(self, left_axes, right_axes)

    def fuse(self, groups):
        return fuse(self, groups)

    def split(self, axis, dims):
        return split(self, axis, dims)


def _check_real_representable(arr: np.ndarray):
    norm = float(np.linalg.norm(arr.ravel()))
    imag = float(np.max(np.abs(arr.imag))) if arr.size else 0.0
    if imag >= 1e-8 * norm and imag > 0.0:
        raise PrecisionError(f"complex to real conversion would drop imaginary parts up to {imag:.3e}")


def _check_finite(arr: np.ndarray, what: str):
    if not np.isfinite(arr).all():
        raise NumericError(f"non-finite entries in {what}")


def _normalize_axes(axes, ndim: int) -> list[int]:
    out = []
    for ax in axes:
        ax = int(ax)
        if ax < 0:
            ax += ndim
        if not 0 <= ax < ndim:
            raise ShapeError(f"axis {ax} out of range for rank {ndim}")
        out.append(ax)
    return out


def _check_same_precision(a: Tensor, b: Tensor):
    if a.precision != b.precision:
        raise PrecisionError(
            f"precision mismatch: {a.precision.value} vs {b.precision.value}; convert explicitly")


# ---------------------------------------------------------------- contraction
def contract(a: Tensor, b: Tensor, axes_a, axes_b) -> Tensor:
    """Tensor-dot over paired axes; free axes of ``a`` come first, then ``b``'s."""
    if not isinstance(a, Tensor) or not isinstance(b, Tensor):
        raise TypeError("contract expects dense Tensors; use qttn.symmetric.bcontract for block-sparse ones")
    axes_a = _normalize_axes(axes_a, a.ndim)
    axes_b = _normalize_axes(axes_b, b.ndim)
    if len(axes_a) != len(axes_b) or len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ShapeError("axes lists must pair up one-to-one")
    for ia, ib in zip(axes_a, axes_b):
        if a.shape[ia] != b.shape[ib]:
            raise ShapeError(f"cannot contract axis {ia} (dim {a.shape[ia]}) with axis {ib} (dim {b.shape[ib]})")
    _check_same_precision(a, b)
    if len(axes_a) == a.ndim and len(axes_b) == b.ndim:
        raise ShapeError("full contraction to a scalar is not a tensor; use Tensor.vdot")
    out = a._impl().tensordot(a.data, b.data, axes_a, axes_b)
    return Tensor._wrap(np.ascontiguousarray(out), a.precision, a.backend)


def permute(a: Tensor, order: Sequence[int]) -> Tensor:
    order = [int(i) for i in order]
    if sorted(order) != list(range(a.ndim)):
        raise ShapeError(f"{order} is not a permutation of {a.ndim} axes")
    if order == list(range(a.ndim)):
        return a
    return Tensor._wrap(np.ascontiguousarray(a.data.transpose(order)), a.precision, a.backend)


def fuse(a: Tensor, groups: Sequence[Sequence[int]]) -> Tensor:
    """Merge consecutive axis groups, e.g. ``[[0, 1], [2]]`` for a matricization."""
    flat = [int(i) for g in groups for i in g]
    if flat != list(range(a.ndim)) or any(len(g) == 0 for g in groups):
        raise ShapeError("fuse groups must be non-empty, consecutive and cover every axis in order; permute first")
    shape = tuple(int(np.prod([a.shape[i] for i in g])) for g in groups)
    return Tensor._wrap(a.data.reshape(shape), a.precision, a.backend)


def split(a: Tensor, axis: int, dims: Sequence[int]) -> Tensor:
    (axis,) = _normalize_axes([axis], a.ndim)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or int(np.prod(dims)) != a.shape[axis]:
        raise ShapeError(f"cannot split axis of dim {a.shape[axis]} into {dims}")
    shape = a.shape[:axis] + dims + a.shape[axis + 1:]
    return Tensor._wrap(a.data.reshape(shape), a.precision, a.backend)


def _matricize(a: Tensor, left_axes, right_axes):
    left = _normalize_axes(left_axes, a.ndim)
    right = _normalize_axes(right_axes, a.ndim)
    if sorted(left + right) != list(range(a.ndim)) or not left or not right:
        raise ShapeError("left and right axes must partition the tensor's axes (both non-empty)")
    perm = a.data.transpose(left + right)
    ldims = tuple(a.shape[i] for i in left)
    rdims = tuple(a.shape[i] for i in right)
    mat = perm.reshape(int(np.prod(ldims)), int(np.prod(rdims)))
    return mat, ldims, rdims


# -------------------------------------------------------------------- SVD
@dataclass
class SvdResult:
    """Truncated SVD ``a ~ U diag(s) V`` of a matricized tensor.

    ``U`` carries the left axes plus the new bond as its last axis, ``V``
    the new bond as its first axis plus the right axes.
    """

    U: Tensor
    singular_values: np.ndarray
    V: Tensor
    truncation_error: float
    kept_rank: int
    available_rank: int = 0

    def sv(self) -> Tensor:
        """``diag(s) V``, i.e. the factor that carries the norm on the right."""
        s = self.singular_values.astype(self.V.precision.dtype)
        shape = (-1,) + (1,) * (self.V.ndim - 1)
        return Tensor._wrap(self.V.data * s.reshape(shape), self.V.precision, self.V.backend)

    def us(self) -> Tensor:
        s = self.singular_values.astype(self.U.precision.dtype)
        return Tensor._wrap(self.U.data * s, self.U.precision, self.U.backend)


def select_rank(s: np.ndarray, max_rank: int | None, cutoff: float) -> int:
    """Number of singular values kept: those with ``s_i / s_1 > cutoff``, capped at ``max_rank``."""
    if len(s) == 0 or s[0] <= 0.0:
        return 1
    keep = int(np.count_nonzero(s / s[0] > cutoff))
    keep = max(keep, 1)
    if max_rank is not None:
        keep = min(keep, int(max_rank))
    return keep


def tiled_rank(kept: int, available: int, max_rank: int | None, tile: int | None) -> int:
    """Round ``kept`` up to a multiple of ``tile`` without exceeding ``available`` or ``max_rank``."""
    if not tile or tile <= 1:
        return kept
    rounded = -(-kept // tile) * tile
    cap = available if max_rank is None else min(available, int(max_rank))
    return max(kept, min(rounded, cap))


def _canonical_phases(u: np.ndarray) -> np.ndarray:
    """Phase per column making the largest-magnitude entry real positive."""
    if u.size == 0:
        return np.ones(u.shape[1], dtype=u.dtype)
    idx = np.argmax(np.abs(u), axis=0)
    piv = u[idx, np.arange(u.shape[1])]
    mag = np.abs(piv)
    ph = np.where(mag > 0, piv / np.where(mag > 0, mag, 1), 1)
    return ph.astype(u.dtype)


def matrix_svd(mat: np.ndarray, backend: Backend, algorithm: str = "direct"):
    """Thin SVD ``mat = u @ diag(s) @ vh`` with ``s`` descending, in the matrix dtype.

    ``via_eigh`` diagonalizes the Gram matrix of the smaller side, projects
    the input onto the resulting eigenbasis and finishes with a QR and a
    small square SVD so that both factors stay exact isometries even for
    tiny singular values.
    """
    if algorithm == "direct":
        u, s, vh = backend.svd(mat)
    elif algorithm == "via_eigh":
        m, n = mat.shape
        if m >= n:
            gram = mat.conj().T @ mat
            _, w = backend.eigh(gram)
            w = w[:, ::-1]
            b = mat @ w
            q, r = backend.qr(b)
            ur, s, vhr = backend.svd(r)
            u = q @ ur
            vh = vhr @ w.conj().T
        else:
            vh_t, s, u_t = matrix_svd(mat.conj().T, backend, "via_eigh")
            u, vh = u_t.conj().T, vh_t.conj().T
    else:
        raise ValueError(f"unknown SVD algorithm {algorithm!r}; expected one of {SVD_ALGORITHMS}")
    s = np.maximum(np.real(s), 0.0)
    ph = _canonical_phases(u)
    u = u / ph
    vh = vh * ph[:, None]
    return u, s, vh


def svd(a: Tensor, left_axes, right_axes, max_rank: int | None = None, cutoff: float = 1e-9,
        algorithm: str = "direct", tile: int | None = None) -> SvdResult:
    """Truncated SVD splitting ``a`` between ``left_axes`` and ``right_axes``.

    The cutoff is relative to the largest singular value.  With ``tile``
    set, the kept rank is rounded up to a multiple of ``tile`` (never past
    the available rank or ``max_rank``; no zero padding).  An all-zero input
    yields rank 1 with singular value 0 and unit-vector factors.
    """
    if max_rank is not None and max_rank < 1:
        raise ValueError("max_rank must be >= 1")
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    mat, ldims, rdims = _matricize(a, left_axes, right_axes)
    _check_finite(mat, "svd input")
    available = min(mat.shape)
    dtype = a.precision.dtype
    if not np.any(mat):
        u = np.zeros((mat.shape[0], 1), dtype)
        u[0, 0] = 1
        vh = np.zeros((1, mat.shape[1]), dtype)
        vh[0, 0] = 1
        s = np.zeros(1)
        kept = 1
        err = 0.0
    else:
        u, s_full, vh = matrix_svd(mat, a._impl(), algorithm)
        s_full = s_full.astype(np.float64)
        kept = select_rank(s_full, max_rank, cutoff)
        kept = tiled_rank(kept, available, max_rank, tile)
        err = float(np.sqrt(np.sum(s_full[kept:] ** 2)))
        u, s, vh = u[:, :kept], s_full[:kept], vh[:kept]
    _check_finite(u, "svd output")
    U = Tensor._wrap(np.ascontiguousarray(u.reshape(ldims + (kept,)), dtype=dtype), a.precision, a.backend)
    V = Tensor._wrap(np.ascontiguousarray(vh.reshape((kept,) + rdims), dtype=dtype), a.precision, a.backend)
    return SvdResult(U, np.asarray(s, dtype=np.float64), V, err, kept, available)


def qr(a: Tensor, left_axes, right_axes) -> tuple[Tensor, Tensor]:
    """Thin QR; ``Q`` is isometric on its fused left axes and ``R`` has a non-negative real diagonal."""
    mat, ldims, rdims = _matricize(a, left_axes, right_axes)
    _check_finite(mat, "qr input")
    q, r = a._impl().qr(mat)
    d = np.diagonal(r)
    mag = np.abs(d)
    ph = np.where(mag > 0, d / np.where(mag > 0, mag, 1), 1).astype(q.dtype)
    q = q * ph
    r = r * ph.conj()[:, None]
    k = q.shape[1]
    Q = Tensor._wrap(np.ascontiguousarray(q.reshape(ldims + (k,))), a.precision, a.backend)
    R = Tensor._wrap(np.ascontiguousarray(r.reshape((k,) + rdims)), a.precision, a.backend)
    return Q, R


def eigh(a: Tensor, left_axes=None, right_axes=None) -> tuple[np.ndarray, Tensor]:
    """Eigen-decomposition of a Hermitian (matricized) tensor; eigenvalues ascending."""
    if left_axes is None and right_axes is None:
        half = a.ndim // 2
        left_axes, right_axes = list(range(half)), list(range(half, a.ndim))
    mat, ldims, rdims = _matricize(a, left_axes, right_axes)
    _check_finite(mat, "eigh input")
    if mat.shape[0] != mat.shape[1]:
        raise ShapeError(f"eigh needs a square matricization, got {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat))))
    tol = 1e-10 if a.precision.is_double else 1e-5
    if float(np.max(np.abs(mat - mat.conj().T))) > tol * scale:
        raise ValueError("eigh input is not Hermitian within tolerance")
    herm = 0.5 * (mat + mat.conj().T)
    w, v = a._impl().eigh(herm)
    v = v / _canonical_phases(v)
    vecs = Tensor._wrap(np.ascontiguousarray(v.reshape(ldims + (v.shape[1],)), dtype=a.precision.dtype),
                        a.precision, a.backend)
    return np.asarray(w, dtype=np.float64), vecs


# ---------------------------------------------------------------- precision
def convert(a: Tensor, precision: Precision | str) -> Tensor:
    """Cast to another precision; complex-to-real fails unless the imaginary part is negligible."""
    precision = Precision.parse(precision)
    if precision == a.precision:
        return a
    data = a.data
    if a.precision.is_complex and not precision.is_complex:
        _check_real_representable(data)
        data = data.real
    return Tensor._wrap(np.ascontiguousarray(data, dtype=precision.dtype), precision, a.backend)


def random_tensor(shape, precision: Precision | str = Precision.D, seed=None, backend: str = "optimized") -> Tensor:
    """Entries i.i.d. uniform on [-1, 1]; real and imaginary parts drawn independently."""
    precision = Precision.parse(precision)
    shape = tuple(int(d) for d in shape)
    if not shape or any(d < 1 for d in shape):
        raise ShapeError(f"invalid shape {shape}")
    rng = np.random.default_rng(seed)
    data = rng.uniform(-1.0, 1.0, size=shape)
    if precision.is_complex:
        data = data + 1j * rng.uniform(-1.0, 1.0, size=shape)
    return Tensor(data, precision, backend)


def identity(dim: int, precision: Precision | str = Precision.D, backend: str = "optimized") -> Tensor:
    precision = Precision.parse(precision)
    return Tensor(np.eye(dim), precision, backend)


def isometry_deviation(t: Tensor, out_axis: int) -> float:
    """``max |Q^H Q - I|`` with ``out_axis`` as the column index."""
    others = [i for i in range(t.ndim) if i != out_axis]
    mat, _, _ = _matricize(t, others, [out_axis])
    g = mat.conj().T @ mat
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))


def frobenius(x) -> float:
    return math.sqrt(float(np.sum(np.abs(np.asarray(x)) ** 2)))
