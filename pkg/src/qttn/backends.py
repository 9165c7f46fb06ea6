"""Interchangeable dense array backends.

Both backends consume and produce plain row-major numpy arrays, so tensors
stay portable between them.  ``reference`` spells every contraction out as
an unoptimized einsum loop and uses ``numpy.linalg`` for decompositions;
``optimized`` maps contractions onto BLAS matrix products (which are
cache-blocked internally) and calls LAPACK through scipy without the
finiteness pre-checks.  The thread count is a hint forwarded to the BLAS
thread pool.
"""

from __future__ import annotations

import contextlib
import os
import string
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from threadpoolctl import threadpool_limits

__all__ = ["BackendId", "Backend", "ReferenceBackend", "OptimizedBackend", "get_backend", "available_backends",
           "host_cores", "default_thread_count"]


def host_cores() -> int:
    return os.cpu_count() or 1


def default_thread_count() -> int:
    """Thread count from ``TTN_THREADS`` (falls back to 1)."""
    raw = os.environ.get("TTN_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


@dataclass(frozen=True)
class BackendId:
    name: str = "optimized"
    thread_count: int = 1

    def __post_init__(self):
        if self.name not in _REGISTRY:
            raise ValueError(f"unknown backend {self.name!r}; available: {sorted(_REGISTRY)}")
        if self.thread_count < 1:
            raise ValueError("thread_count must be a positive integer")

    @property
    def backend(self) -> "Backend":
        return get_backend(self.name)

    def threads(self):
        """Context manager that applies the thread-count hint."""
        return self.backend.threads(self.thread_count)


class Backend:
    name = "abstract"

    def tensordot(self, x: np.ndarray, y: np.ndarray, axes_x, axes_y) -> np.ndarray:
        raise NotImplementedError

    def apply_matrix(self, m: np.ndarray, x: np.ndarray, axis: int) -> np.ndarray:
        """``out[..., i, ...] = sum_j m[i, j] x[..., j, ...]`` on ``axis``."""
        raise NotImplementedError

    def svd(self, mat: np.ndarray):
        raise NotImplementedError

    def qr(self, mat: np.ndarray):
        raise NotImplementedError

    def eigh(self, mat: np.ndarray):
        raise NotImplementedError

    def threads(self, n: int):
        return contextlib.nullcontext()

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"


_LETTERS = string.ascii_letters


def _einsum_spec(ndim_x, ndim_y, axes_x, axes_y):
    sx = list(_LETTERS[:ndim_x])
    sy = list(_LETTERS[ndim_x:ndim_x + ndim_y])
    for ax, ay in zip(axes_x, axes_y):
        sy[ay] = sx[ax]
    out = [c for i, c in enumerate(sx) if i not in axes_x] + [c for i, c in enumerate(sy) if i not in axes_y]
    return f"{''.join(sx)},{''.join(sy)}->{''.join(out)}"


class ReferenceBackend(Backend):
    name = "reference"

    def tensordot(self, x, y, axes_x, axes_y):
        spec = _einsum_spec(x.ndim, y.ndim, list(axes_x), list(axes_y))
        return np.einsum(spec, x, y, optimize=False)

    def apply_matrix(self, m, x, axis):
        sx = _LETTERS[:x.ndim]
        new = _LETTERS[x.ndim]
        out = sx[:axis] + new + sx[axis + 1:]
        return np.einsum(f"{new}{sx[axis]},{sx}->{out}", m, x, optimize=False)

    def svd(self, mat):
        return np.linalg.svd(mat, full_matrices=False)

    def qr(self, mat):
        return np.linalg.qr(mat, mode="reduced")

    def eigh(self, mat):
        return np.linalg.eigh(mat)


class OptimizedBackend(Backend):
    name = "optimized"

    def tensordot(self, x, y, axes_x, axes_y):
        return np.tensordot(x, y, axes=(list(axes_x), list(axes_y)))

    def apply_matrix(self, m, x, axis):
        shape = x.shape
        if axis == 0:
            out = m @ x.reshape(shape[0], -1)
            return out.reshape((m.shape[0],) + shape[1:])
        if axis == x.ndim - 1:
            out = x.reshape(-1, shape[-1]) @ m.T
            return out.reshape(shape[:-1] + (m.shape[0],))
        lead = int(np.prod(shape[:axis]))
        x3 = x.reshape(lead, shape[axis], -1)
        out = np.matmul(m, x3)
        return out.reshape(shape[:axis] + (m.shape[0],) + shape[axis + 1:])

    def svd(self, mat):
        return scipy.linalg.svd(mat, full_matrices=False, check_finite=False, lapack_driver="gesdd")

    def qr(self, mat):
        return scipy.linalg.qr(mat, mode="economic", check_finite=False)

    def eigh(self, mat):
        return scipy.linalg.eigh(mat, check_finite=False)

    def threads(self, n):
        return threadpool_limits(limits=int(n))


_REGISTRY: dict[str, Backend] = {
    "reference": ReferenceBackend(),
    "optimized": OptimizedBackend(),
}


def get_backend(name: str) -> Backend:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(_REGISTRY)}") from None


def available_backends() -> list[str]:
    return sorted(_REGISTRY)
