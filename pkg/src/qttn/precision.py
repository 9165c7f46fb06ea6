"""Scalar precisions: single/double, real/complex."""

from __future__ import annotations

import enum

import numpy as np


class Precision(enum.Enum):
    S = "S"
    C = "C"
    D = "D"
    Z = "Z"

    @classmethod
    def parse(cls, value: "Precision | str") -> "Precision":
        if isinstance(value, Precision):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown precision {value!r}; expected one of S, C, D, Z") from None

    @classmethod
    def from_dtype(cls, dtype) -> "Precision":
        dtype = np.dtype(dtype)
        for p in cls:
            if p.dtype == dtype:
                return p
        if dtype.kind in "biu":
            return cls.D
        raise ValueError(f"no precision matches dtype {dtype}")

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(_DTYPES[self])

    @property
    def bytes_per_scalar(self) -> int:
        return self.dtype.itemsize

    @property
    def is_complex(self) -> bool:
        return self in (Precision.C, Precision.Z)

    @property
    def is_double(self) -> bool:
        return self in (Precision.D, Precision.Z)

    @property
    def real(self) -> "Precision":
        return {Precision.C: Precision.S, Precision.Z: Precision.D}.get(self, self)

    @property
    def complex(self) -> "Precision":
        return {Precision.S: Precision.C, Precision.D: Precision.Z}.get(self, self)

    @property
    def tag(self) -> int:
        """Single-byte tag used by the binary formats (ASCII code of the letter)."""
        return ord(self.value)

    @classmethod
    def from_tag(cls, tag: int) -> "Precision":
        return cls(chr(tag))

    @property
    def isometry_tol(self) -> float:
        return 1e-12 if self.is_double else 1e-5

    @property
    def equivalence_tol(self) -> float:
        return 1e-12 if self.is_double else 1e-4

    @property
    def eps(self) -> float:
        return float(np.finfo(self.dtype).eps)

    def can_upcast_to(self, other: "Precision") -> bool:
        """True if ``other`` holds every value of ``self`` exactly (S < D < Z, S < C < Z)."""
        return _RANK[self] <= _RANK[other] and (other.is_complex or not self.is_complex) and (
            other.is_double or not self.is_double
        )


_DTYPES = {
    Precision.S: np.float32,
    Precision.C: np.complex64,
    Precision.D: np.float64,
    Precision.Z: np.complex128,
}

_RANK = {Precision.S: 0, Precision.C: 1, Precision.D: 1, Precision.Z: 2}
