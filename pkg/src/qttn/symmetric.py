"""Z2 block-sparse tensors.

Every link is split into an even (charge 0) and an odd (charge 1) sector.
A tensor stores one dense block per charge tuple that obeys

    sum(charges on incoming links) - sum(charges on outgoing links) == charge  (mod 2)

where ``charge`` is the tensor's own charge: 0 for states and for
parity-preserving operators, 1 for parity-shifting operators such as
sigma^x.  Densifying orders every link as [even sector, odd sector].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .backends import get_backend
from .errors import ChargeError, PrecisionError, ShapeError
from .precision import Precision
from .tensor import (
    Tensor,
    _canonical_phases,
    _check_finite,
    _check_real_representable,
    _normalize_axes,
    matrix_svd,
    select_rank,
    tiled_rank,
)

__all__ = [
    "Z2Link",
    "BlockSparseTensor",
    "BlockSvdResult",
    "bcontract",
    "bsvd",
    "bqr",
    "beigh",
    "densify",
    "sparsify",
    "random_block_tensor",
]

IN, OUT = "in", "out"
CHARGES = (0, 1)


@dataclass(frozen=True)
class Z2Link:
    """Sector dimensions ``(dim of charge 0, dim of charge 1)`` plus a direction."""

    dims: tuple[int, int]
    direction: str = IN

    def __post_init__(self):
        d0, d1 = (int(d) for d in self.dims)
        object.__setattr__(self, "dims", (d0, d1))
        if d0 < 0 or d1 < 0:
            raise ValueError("sector dimensions must be >= 0")
        if self.direction not in (IN, OUT):
            raise ValueError(f"direction must be 'in' or 'out', got {self.direction!r}")

    @property
    def total(self) -> int:
        return self.dims[0] + self.dims[1]

    def dim(self, q: int) -> int:
        return self.dims[q]

    def offset(self, q: int) -> int:
        return 0 if q == 0 else self.dims[0]

    def flip(self) -> "Z2Link":
        return Z2Link(self.dims, OUT if self.direction == IN else IN)

    def with_direction(self, direction: str) -> "Z2Link":
        return Z2Link(self.dims, direction)

    def sectors(self):
        return [q for q in CHARGES if self.dims[q] > 0]


def _flux(charges, links) -> int:
    tot = 0
    for q, link in zip(charges, links):
        tot += q if link.direction == IN else -q
    return tot % 2


class BlockSparseTensor:
    """Z2-graded tensor; missing allowed blocks are zero."""

    __slots__ = ("links", "_blocks", "precision", "charge", "backend")

    def __init__(self, links: Sequence[Z2Link], blocks=None, precision: Precision | str = Precision.D,
                 charge: int = 0, backend: str = "optimized", check: bool = True):
        self.links = tuple(links)
        self.precision = Precision.parse(precision)
        self.charge = int(charge) % 2
        self.backend = backend
        self._blocks: dict[tuple[int, ...], np.ndarray] = {}
        if not self.links:
            raise ShapeError("block-sparse tensors need at least one link")
        for key, blk in (blocks or {}).items():
            key = tuple(int(q) for q in key)
            arr = blk.data if isinstance(blk, Tensor) else np.asarray(blk)
            if np.iscomplexobj(arr) and not self.precision.is_complex:
                _check_real_representable(arr)
                arr = arr.real
            arr = np.ascontiguousarray(arr, dtype=self.precision.dtype)
            if check:
                self._check_block(key, arr)
            if arr.size:
                self._blocks[key] = arr

    @classmethod
    def _wrap(cls, links, blocks, precision, charge, backend):
        t = object.__new__(cls)
        t.links = tuple(links)
        t._blocks = blocks
        t.precision = precision
        t.charge = charge
        t.backend = backend
        return t

    def _check_block(self, key, arr):
        if len(key) != len(self.links):
            raise ChargeError(f"charge tuple {key} does not match rank {len(self.links)}")
        if any(q not in CHARGES for q in key):
            raise ChargeError(f"Z2 charges must be 0 or 1, got {key}")
        if _flux(key, self.links) != self.charge:
            raise ChargeError(f"block {key} violates charge conservation (tensor charge {self.charge})")
        expected = tuple(link.dim(q) for link, q in zip(self.links, key))
        if arr.shape != expected:
            raise ShapeError(f"block {key} has shape {arr.shape}, sectors require {expected}")

    # ------------------------------------------------------------------ info
    @property
    def blocks(self) -> dict[tuple[int, ...], Tensor]:
        return {k: Tensor._wrap(v, self.precision, self.backend) for k, v in self._blocks.items()}

    def block_arrays(self) -> dict[tuple[int, ...], np.ndarray]:
        return dict(self._blocks)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(link.total for link in self.links)

    @property
    def ndim(self) -> int:
        return len(self.links)

    @property
    def is_symmetric(self) -> bool:
        return True

    @property
    def nbytes(self) -> int:
        return sum(b.nbytes for b in self._blocks.values())

    def __repr__(self):
        dims = [link.dims for link in self.links]
        return (f"BlockSparseTensor(sectors={dims}, blocks={len(self._blocks)}, charge={self.charge}, "
                f"precision={self.precision.value})")

    def allowed_keys(self) -> list[tuple[int, ...]]:
        """Every charge tuple that satisfies conservation and has non-empty sectors."""
        keys = []
        for key in itertools.product(*[link.sectors() for link in self.links]):
            if _flux(key, self.links) == self.charge:
                keys.append(key)
        return keys

    def block_shape(self, key) -> tuple[int, ...]:
        return tuple(link.dim(q) for link, q in zip(self.links, key))

    def check_conservation(self):
        for key, arr in self._blocks.items():
            self._check_block(key, arr)

    def norm(self) -> float:
        return float(np.sqrt(sum(float(np.vdot(b, b).real) for b in self._blocks.values())))

    def is_finite(self) -> bool:
        return all(np.isfinite(b).all() for b in self._blocks.values())

    # ------------------------------------------------------------ arithmetic
    def _same(self, other):
        if not isinstance(other, BlockSparseTensor):
            raise TypeError("cannot combine block-sparse and dense tensors")
        if other.precision != self.precision:
            raise PrecisionError(f"precision mismatch: {self.precision.value} vs {other.precision.value}")
        if [link.dims for link in other.links] != [link.dims for link in self.links] or other.charge != self.charge:
            raise ChargeError("sector structure mismatch")
        return other

    def _combine(self, other, sign):
        other = self._same(other)
        out = dict(self._blocks)
        for k, b in other._blocks.items():
            out[k] = out[k] + sign * b if k in out else sign * b
        return BlockSparseTensor._wrap(self.links, out, self.precision, self.charge, self.backend)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, scalar):
        if isinstance(scalar, BlockSparseTensor):
            return NotImplemented
        if np.iscomplexobj(scalar) and not self.precision.is_complex:
            raise PrecisionError("complex scalar times real tensor; convert first")
        dt = self.precision.dtype
        out = {k: (b * scalar).astype(dt, copy=False) for k, b in self._blocks.items()}
        return BlockSparseTensor._wrap(self.links, out, self.precision, self.charge, self.backend)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __neg__(self):
        return self * -1.0

    def conj(self) -> "BlockSparseTensor":
        links = [link.flip() for link in self.links]
        if self.precision.is_complex:
            blocks = {k: b.conj() for k, b in self._blocks.items()}
        else:
            blocks = dict(self._blocks)
        return BlockSparseTensor._wrap(links, blocks, self.precision, (-self.charge) % 2, self.backend)

    def vdot(self, other):
        other = self._same(other)
        tot = 0.0
        for k, b in self._blocks.items():
            if k in other._blocks:
                tot = tot + np.vdot(b, other._blocks[k])
        return tot

    # ----------------------------------------------------------- flattening
    def to_vector(self) -> np.ndarray:
        parts = []
        for key in self.allowed_keys():
            b = self._blocks.get(key)
            if b is None:
                parts.append(np.zeros(int(np.prod(self.block_shape(key))), self.precision.dtype))
            else:
                parts.append(b.reshape(-1))
        if not parts:
            return np.zeros(0, self.precision.dtype)
        return np.concatenate(parts)

    @property
    def vector_size(self) -> int:
        return sum(int(np.prod(self.block_shape(k))) for k in self.allowed_keys())

    def from_vector(self, vec) -> "BlockSparseTensor":
        vec = np.asarray(vec, dtype=self.precision.dtype)
        blocks = {}
        pos = 0
        for key in self.allowed_keys():
            shape = self.block_shape(key)
            n = int(np.prod(shape))
            blocks[key] = vec[pos:pos + n].reshape(shape)
            pos += n
        if pos != vec.size:
            raise ShapeError(f"vector of length {vec.size} does not match {pos} allowed entries")
        return BlockSparseTensor._wrap(self.links, blocks, self.precision, self.charge, self.backend)

    def zeros_like(self) -> "BlockSparseTensor":
        return BlockSparseTensor._wrap(self.links, {}, self.precision, self.charge, self.backend)

    def with_backend(self, backend: str) -> "BlockSparseTensor":
        get_backend(backend)
        return BlockSparseTensor._wrap(self.links, dict(self._blocks), self.precision, self.charge, backend)

    # -------------------------------------------------- method-style surface
    def transpose(self, order) -> "BlockSparseTensor":
        order = [int(i) for i in order]
        if sorted(order) != list(range(self.ndim)):
            raise ShapeError(f"{order} is not a permutation of {self.ndim} axes")
        if order == list(range(self.ndim)):
            return self
        links = [self.links[i] for i in order]
        blocks = {tuple(k[i] for i in order): np.ascontiguousarray(b.transpose(order))
                  for k, b in self._blocks.items()}
        return BlockSparseTensor._wrap(links, blocks, self.precision, self.charge, self.backend)

    def tensordot(self, other, axes_self, axes_other):
        return bcontract(self, other, axes_self, axes_other)

    def astype(self, precision) -> "BlockSparseTensor":
        precision = Precision.parse(precision)
        if precision == self.precision:
            return self
        blocks = {}
        for k, b in self._blocks.items():
            if self.precision.is_complex and not precision.is_complex:
                _check_real_representable(b)
                b = b.real
            blocks[k] = np.ascontiguousarray(b, dtype=precision.dtype)
        return BlockSparseTensor._wrap(self.links, blocks, precision, self.charge, self.backend)

    def apply(self, op: "BlockSparseTensor", axis: int) -> "BlockSparseTensor":
        """Act with the rank-2 block operator ``op`` on one axis, keeping the axis order."""
        if op.ndim != 2:
            raise ShapeError("operators must be rank 2")
        if op.precision != self.precision:
            raise PrecisionError(f"precision mismatch: {op.precision.value} vs {self.precision.value}")
        _check_pair(op.links[1], self.links[axis])
        impl = get_backend(self.backend)
        out: dict[tuple[int, ...], np.ndarray] = {}
        for (qi, qj), ob in op._blocks.items():
            for key, b in self._blocks.items():
                if key[axis] != qj:
                    continue
                new = key[:axis] + (qi,) + key[axis + 1:]
                r = impl.apply_matrix(ob, b, axis)
                if new in out:
                    out[new] = out[new] + r
                else:
                    out[new] = r
        links = self.links[:axis] + (op.links[0],) + self.links[axis + 1:]
        return BlockSparseTensor._wrap(links, out, self.precision, (self.charge + op.charge) % 2, self.backend)

    def svd(self, left_axes, right_axes, **kwargs):
        return bsvd(self, left_axes, right_axes, **kwargs)

    def qr(self, left_axes, right_axes, **kwargs):
        return bqr(self, left_axes, right_axes, **kwargs)

    def eigh(self, left_axes=None, right_axes=None):
        return beigh(self, left_axes, right_axes)

    def densify(self) -> Tensor:
        return densify(self)


def _check_pair(la: Z2Link, lb: Z2Link):
    if la.dims != lb.dims:
        raise ChargeError(f"sector mismatch: {la.dims} vs {lb.dims}")
    if la.direction == lb.direction:
        raise ChargeError("contracted links must have opposite directions")


def bcontract(a: BlockSparseTensor, b: BlockSparseTensor, axes_a, axes_b) -> BlockSparseTensor:
    """Block-wise tensor-dot; free links of ``a`` first, then ``b``'s."""
    axes_a = _normalize_axes(axes_a, a.ndim)
    axes_b = _normalize_axes(axes_b, b.ndim)
    if len(axes_a) != len(axes_b) or len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ShapeError("axes lists must pair up one-to-one")
    if len(axes_a) == a.ndim and len(axes_b) == b.ndim:
        raise ShapeError("full contraction to a scalar is not a tensor; use vdot")
    for ia, ib in zip(axes_a, axes_b):
        _check_pair(a.links[ia], b.links[ib])
    if a.precision != b.precision:
        raise PrecisionError(f"precision mismatch: {a.precision.value} vs {b.precision.value}; convert explicitly")
    free_a = [i for i in range(a.ndim) if i not in axes_a]
    free_b = [i for i in range(b.ndim) if i not in axes_b]
    by_contracted: dict[tuple, list] = {}
    for kb, blk in b._blocks.items():
        by_contracted.setdefault(tuple(kb[i] for i in axes_b), []).append((kb, blk))
    impl = get_backend(a.backend)
    out: dict[tuple[int, ...], np.ndarray] = {}
    for ka, ba in a._blocks.items():
        for kb, bb in by_contracted.get(tuple(ka[i] for i in axes_a), ()):
            key = tuple(ka[i] for i in free_a) + tuple(kb[i] for i in free_b)
            r = impl.tensordot(ba, bb, axes_a, axes_b)
            out[key] = out[key] + r if key in out else r
    out = {k: np.ascontiguousarray(v) for k, v in out.items()}
    links = [a.links[i] for i in free_a] + [b.links[i] for i in free_b]
    return BlockSparseTensor._wrap(links, out, a.precision, (a.charge + b.charge) % 2, a.backend)


def densify(a: BlockSparseTensor) -> Tensor:
    """Dense embedding: each block sits at its sector offsets, zeros elsewhere."""
    out = np.zeros(a.shape, a.precision.dtype)
    for key, b in a._blocks.items():
        sl = tuple(slice(link.offset(q), link.offset(q) + link.dim(q)) for link, q in zip(a.links, key))
        out[sl] = b
    return Tensor._wrap(out, a.precision, a.backend)


def sparsify(dense, links: Sequence[Z2Link], charge: int = 0, tol: float | None = 0.0,
             backend: str | None = None) -> BlockSparseTensor:
    """Cut a dense tensor into allowed blocks.

    With ``tol`` not ``None``, entries outside the allowed blocks must be at
    most ``tol`` in magnitude, otherwise :class:`ChargeError` is raised.
    """
    if isinstance(dense, Tensor):
        arr, precision, backend = dense.data, dense.precision, backend or dense.backend
    else:
        arr = np.asarray(dense)
        precision, backend = Precision.from_dtype(arr.dtype), backend or "optimized"
    links = tuple(links)
    if arr.shape != tuple(link.total for link in links):
        raise ShapeError(f"dense shape {arr.shape} does not match links {[l.dims for l in links]}")
    t = BlockSparseTensor._wrap(links, {}, precision, int(charge) % 2, backend)
    rest = arr.copy()
    for key in t.allowed_keys():
        sl = tuple(slice(link.offset(q), link.offset(q) + link.dim(q)) for link, q in zip(links, key))
        t._blocks[key] = np.ascontiguousarray(arr[sl], dtype=precision.dtype)
        rest[sl] = 0
    if tol is not None and rest.size and float(np.max(np.abs(rest))) > tol:
        raise ChargeError("dense tensor has weight outside the charge-conserving blocks")
    return t


def random_block_tensor(links, precision: Precision | str = Precision.D, seed=None, charge: int = 0,
                        backend: str = "optimized") -> BlockSparseTensor:
    """Uniform [-1, 1] entries in every allowed block (blocks visited in sorted key order)."""
    precision = Precision.parse(precision)
    rng = np.random.default_rng(seed)
    t = BlockSparseTensor._wrap(tuple(links), {}, precision, int(charge) % 2, backend)
    for key in t.allowed_keys():
        shape = t.block_shape(key)
        data = rng.uniform(-1.0, 1.0, size=shape)
        if precision.is_complex:
            data = data + 1j * rng.uniform(-1.0, 1.0, size=shape)
        t._blocks[key] = np.ascontiguousarray(data, dtype=precision.dtype)
    return t


# ------------------------------------------------------------ decompositions
@dataclass
class _Layout:
    combos: list  # charge tuples of the grouped legs
    offsets: list
    shapes: list
    total: int


def _layout(links, flux_target) -> _Layout:
    combos, offsets, shapes = [], [], []
    pos = 0
    for combo in itertools.product(*[link.sectors() for link in links]):
        if _flux(combo, links) != flux_target:
            continue
        shape = tuple(link.dim(q) for link, q in zip(links, combo))
        combos.append(combo)
        offsets.append(pos)
        shapes.append(shape)
        pos += int(np.prod(shape))
    return _Layout(combos, offsets, shapes, pos)


def _sector_matrices(a: BlockSparseTensor, left, right):
    """Per row flux ``q``: the matricized block ``M_q`` with its row/column layouts."""
    left = _normalize_axes(left, a.ndim)
    right = _normalize_axes(right, a.ndim)
    if sorted(left + right) != list(range(a.ndim)) or not left or not right:
        raise ShapeError("left and right axes must partition the tensor's axes (both non-empty)")
    llinks = [a.links[i] for i in left]
    rlinks = [a.links[i] for i in right]
    out = {}
    for q in CHARGES:
        rows = _layout(llinks, q)
        # Z2: the column flux is fixed by the tensor charge.
        cols = _layout(rlinks, (a.charge - q) % 2)
        if rows.total == 0 or cols.total == 0:
            continue
        mat = np.zeros((rows.total, cols.total), a.precision.dtype)
        ridx = {c: i for i, c in enumerate(rows.combos)}
        cidx = {c: i for i, c in enumerate(cols.combos)}
        for key, blk in a._blocks.items():
            rk = tuple(key[i] for i in left)
            ck = tuple(key[i] for i in right)
            if rk not in ridx or ck not in cidx:
                continue
            i, j = ridx[rk], cidx[ck]
            sub = blk.transpose(left + right).reshape(int(np.prod(rows.shapes[i])), int(np.prod(cols.shapes[j])))
            mat[rows.offsets[i]:rows.offsets[i] + sub.shape[0], cols.offsets[j]:cols.offsets[j] + sub.shape[1]] = sub
        out[q] = (mat, rows, cols)
    return out, left, right, llinks, rlinks


def _rows_to_blocks(mat, layout: _Layout, bond_q: int, dtype):
    blocks = {}
    k = mat.shape[1]
    for combo, off, shape in zip(layout.combos, layout.offsets, layout.shapes):
        n = int(np.prod(shape))
        blocks[combo + (bond_q,)] = np.ascontiguousarray(mat[off:off + n].reshape(shape + (k,)), dtype=dtype)
    return blocks


def _cols_to_blocks(mat, layout: _Layout, bond_q: int, dtype):
    blocks = {}
    k = mat.shape[0]
    for combo, off, shape in zip(layout.combos, layout.offsets, layout.shapes):
        n = int(np.prod(shape))
        blocks[(bond_q,) + combo] = np.ascontiguousarray(mat[:, off:off + n].reshape((k,) + shape), dtype=dtype)
    return blocks


@dataclass
class BlockSvdResult:
    """Block-wise truncated SVD; singular values are kept per charge sector."""

    U: BlockSparseTensor
    singular_values: dict[int, np.ndarray]
    V: BlockSparseTensor
    truncation_error: float
    kept_rank: int
    available_rank: int = 0
    merged: list = field(default_factory=list)

    def merged_values(self) -> np.ndarray:
        return np.array([v for v, _ in self.merged])

    def sv(self) -> BlockSparseTensor:
        blocks = {}
        for key, b in self.V._blocks.items():
            s = self.singular_values[key[0]].astype(self.V.precision.dtype)
            blocks[key] = b * s.reshape((-1,) + (1,) * (b.ndim - 1))
        return BlockSparseTensor._wrap(self.V.links, blocks, self.V.precision, self.V.charge, self.V.backend)

    def us(self) -> BlockSparseTensor:
        blocks = {}
        for key, b in self.U._blocks.items():
            s = self.singular_values[key[-1]].astype(self.U.precision.dtype)
            blocks[key] = b * s
        return BlockSparseTensor._wrap(self.U.links, blocks, self.U.precision, self.U.charge, self.U.backend)


def bsvd(a: BlockSparseTensor, left_axes, right_axes, max_rank: int | None = None, cutoff: float = 1e-9,
         algorithm: str = "direct", tile: int | None = None, bond_direction: str = OUT) -> BlockSvdResult:
    """Truncated SVD performed independently per charge sector.

    Truncation acts on the merged spectrum: the globally largest values
    survive (ties: lower charge first, then lower in-block index), the
    cutoff is relative to the global maximum, and tiling rounds the total.
    """
    if max_rank is not None and max_rank < 1:
        raise ValueError("max_rank must be >= 1")
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    sectors, left, right, llinks, rlinks = _sector_matrices(a, left_axes, right_axes)
    impl = get_backend(a.backend)
    dtype = a.precision.dtype
    dec = {}
    for q, (mat, rows, cols) in sectors.items():
        _check_finite(mat, "bsvd input")
        if np.any(mat):
            u, s, vh = matrix_svd(mat, impl, algorithm)
        else:
            k = min(mat.shape)
            u = np.eye(mat.shape[0], k, dtype=dtype)
            vh = np.eye(k, mat.shape[1], dtype=dtype)
            s = np.zeros(k)
        dec[q] = (u, s.astype(np.float64), vh, rows, cols)
    merged = sorted(((float(s[i]), q, i) for q, (_, s, _, _, _) in dec.items() for i in range(len(s))),
                    key=lambda t: (-t[0], t[1], t[2]))
    available = len(merged)
    values = np.array([m[0] for m in merged])
    if available == 0:
        raise ShapeError("tensor has no non-empty sector to decompose")
    kept = select_rank(values, max_rank, cutoff)
    kept = tiled_rank(kept, available, max_rank, tile)
    err = float(np.sqrt(np.sum(values[kept:] ** 2)))
    keep_per = {q: 0 for q in CHARGES}
    for _, q, _ in merged[:kept]:
        keep_per[q] += 1
    bond_dims = (keep_per[0], keep_per[1])
    ublocks, vblocks, svals = {}, {}, {}
    for q, (u, s, vh, rows, cols) in dec.items():
        k = keep_per[q]
        if k == 0:
            continue
        # Z2: the bond charge equals the row flux whatever the bond direction.
        ublocks.update(_rows_to_blocks(u[:, :k], rows, q, dtype))
        vblocks.update(_cols_to_blocks(vh[:k], cols, q, dtype))
        svals[q] = s[:k]
    for q in CHARGES:
        svals.setdefault(q, np.zeros(0))
    bond = Z2Link(bond_dims, bond_direction)
    U = BlockSparseTensor._wrap(llinks + [bond], ublocks, a.precision, 0, a.backend)
    V = BlockSparseTensor._wrap([bond.flip()] + rlinks, vblocks, a.precision, a.charge, a.backend)
    return BlockSvdResult(U, svals, V, err, kept, available, [(v, q) for v, q, _ in merged[:kept]])


def bqr(a: BlockSparseTensor, left_axes, right_axes, bond_direction: str = OUT):
    """Block-wise thin QR; ``R`` diagonals are real non-negative."""
    sectors, left, right, llinks, rlinks = _sector_matrices(a, left_axes, right_axes)
    impl = get_backend(a.backend)
    dtype = a.precision.dtype
    qblocks, rblocks = {}, {}
    dims = [0, 0]
    for q, (mat, rows, cols) in sectors.items():
        _check_finite(mat, "bqr input")
        qm, rm = impl.qr(mat)
        d = np.diagonal(rm)
        mag = np.abs(d)
        ph = np.where(mag > 0, d / np.where(mag > 0, mag, 1), 1).astype(qm.dtype)
        qm = qm * ph
        rm = rm * ph.conj()[:, None]
        dims[q] = qm.shape[1]
        qblocks.update(_rows_to_blocks(qm, rows, q, dtype))
        rblocks.update(_cols_to_blocks(rm, cols, q, dtype))
    bond = Z2Link(tuple(dims), bond_direction)
    Q = BlockSparseTensor._wrap(llinks + [bond], qblocks, a.precision, 0, a.backend)
    R = BlockSparseTensor._wrap([bond.flip()] + rlinks, rblocks, a.precision, a.charge, a.backend)
    return Q, R


def beigh(a: BlockSparseTensor, left_axes=None, right_axes=None, bond_direction: str = OUT):
    """Per-sector Hermitian eigendecomposition.

    Returns ``(values, charges, vectors)``: all eigenvalues merged in
    ascending order, the sector each one came from, and the eigenvector
    tensor whose last link enumerates each sector's eigenvalues ascending.
    """
    if a.charge != 0:
        raise ChargeError("only charge-0 operators have a block-diagonal eigendecomposition")
    if left_axes is None and right_axes is None:
        half = a.ndim // 2
        left_axes, right_axes = list(range(half)), list(range(half, a.ndim))
    sectors, left, right, llinks, rlinks = _sector_matrices(a, left_axes, right_axes)
    impl = get_backend(a.backend)
    tol = 1e-10 if a.precision.is_double else 1e-5
    vblocks = {}
    dims = [0, 0]
    pairs = []
    for q, (mat, rows, cols) in sectors.items():
        _check_finite(mat, "beigh input")
        if mat.shape[0] != mat.shape[1]:
            raise ShapeError(f"sector {q} matricization is not square: {mat.shape}")
        scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 1.0)
        if float(np.max(np.abs(mat - mat.conj().T))) > tol * scale:
            raise ValueError("beigh input is not Hermitian within tolerance")
        w, v = impl.eigh(0.5 * (mat + mat.conj().T))
        v = v / _canonical_phases(v)
        dims[q] = len(w)
        vblocks.update(_rows_to_blocks(v, rows, q, a.precision.dtype))
        pairs.extend((float(x), q) for x in w)
    pairs.sort(key=lambda t: (t[0], t[1]))
    bond = Z2Link(tuple(dims), bond_direction)
    vecs = BlockSparseTensor._wrap(llinks + [bond], vblocks, a.precision, 0, a.backend)
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs], dtype=int), vecs
