"""Binary serialization of tensors and TTN checkpoints.

All integers are little-endian.  A dense tensor record is::

    b"QTTN" | u16 version=1 | u8 precision tag | u8 rank | rank * u64 dims | payload

with the payload in row-major order.  Block-sparse tensors use version 2::

    b"QTTN" | u16 2 | u8 tag | u8 rank | u8 charge | rank * (u8 direction, u64 d0, u64 d1)
    | u32 nblocks | nblocks * (rank * u8 charges | payload)

A checkpoint wraps the tensors of a state::

    b"QTTC" | u16 version=1 | u32 num_sites | u32 max_bond_dim | u8 symmetric
    | u16 center layer | u32 center position | u8 has_energy | f64 energy
    | u32 count | count * (u16 layer | u32 position | u64 length | tensor record)

with tensors in :meth:`TTNTopology.nodes` order.
"""

from __future__ import annotations

import io as _io
import os
import struct

import numpy as np

from .errors import TTNError
from .precision import Precision
from .symmetric import IN, OUT, BlockSparseTensor, Z2Link
from .tensor import Tensor

__all__ = ["FormatError", "tensor_to_bytes", "tensor_from_bytes", "save_tensor", "load_tensor",
           "checkpoint_to_bytes", "checkpoint_from_bytes", "save_checkpoint", "load_checkpoint"]

TENSOR_MAGIC = b"QTTN"
CHECKPOINT_MAGIC = b"QTTC"
DENSE_VERSION = 1
BLOCK_VERSION = 2
CHECKPOINT_VERSION = 1
_DIR_CODE = {IN: 0, OUT: 1}
_DIR_NAME = {0: IN, 1: OUT}


class FormatError(TTNError, ValueError):
    """Malformed or unsupported serialized data."""


def _le(dtype) -> np.dtype:
    return np.dtype(dtype).newbyteorder("<")


def tensor_to_bytes(t) -> bytes:
    prec = t.precision
    if isinstance(t, BlockSparseTensor):
        out = [TENSOR_MAGIC, struct.pack("<HBBB", BLOCK_VERSION, prec.tag, t.ndim, t.charge)]
        for link in t.links:
            out.append(struct.pack("<BQQ", _DIR_CODE[link.direction], link.dims[0], link.dims[1]))
        blocks = sorted(t.block_arrays().items())
        out.append(struct.pack("<I", len(blocks)))
        for key, arr in blocks:
            out.append(struct.pack(f"<{t.ndim}B", *key))
            out.append(np.ascontiguousarray(arr, dtype=_le(prec.dtype)).tobytes())
        return b"".join(out)
    arr = t.data
    head = TENSOR_MAGIC + struct.pack("<HBB", DENSE_VERSION, prec.tag, arr.ndim)
    head += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    return head + np.ascontiguousarray(arr, dtype=_le(prec.dtype)).tobytes()


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = memoryview(buf)
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError("unexpected end of data")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return bytes(out)

    def unpack(self, fmt: str):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size))

    def array(self, shape, precision: Precision) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        raw = self.take(count * precision.bytes_per_scalar)
        return np.frombuffer(raw, dtype=_le(precision.dtype)).astype(precision.dtype).reshape(shape)


def _read_tensor(r: _Reader, backend: str):
    if r.take(4) != TENSOR_MAGIC:
        raise FormatError("not a tensor record")
    version, tag = r.unpack("<HB")
    try:
        prec = Precision.from_tag(tag)
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    if version == DENSE_VERSION:
        (rank,) = r.unpack("<B")
        dims = r.unpack(f"<{rank}Q")
        return Tensor(r.array(dims, prec), prec, backend)
    if version == BLOCK_VERSION:
        rank, charge = r.unpack("<BB")
        links = []
        for _ in range(rank):
            code, d0, d1 = r.unpack("<BQQ")
            if code not in _DIR_NAME:
                raise FormatError(f"bad link direction code {code}")
            links.append(Z2Link((d0, d1), _DIR_NAME[code]))
        (nblocks,) = r.unpack("<I")
        blocks = {}
        for _ in range(nblocks):
            key = r.unpack(f"<{rank}B")
            shape = tuple(link.dim(q) for link, q in zip(links, key))
            blocks[key] = r.array(shape, prec)
        return BlockSparseTensor(links, blocks, prec, charge=charge, backend=backend)
    raise FormatError(f"unsupported tensor format version {version}")


def tensor_from_bytes(data: bytes, backend: str = "optimized"):
    r = _Reader(data)
    t = _read_tensor(r, backend)
    if r.pos != len(data):
        raise FormatError("trailing bytes after tensor record")
    return t


def save_tensor(path, t) -> None:
    with open(path, "wb") as fh:
        fh.write(tensor_to_bytes(t))


def load_tensor(path, backend: str = "optimized"):
    with open(path, "rb") as fh:
        return tensor_from_bytes(fh.read(), backend)


def checkpoint_to_bytes(state) -> bytes:
    topo = state.topology
    energy = state.energy
    out = _io.BytesIO()
    out.write(CHECKPOINT_MAGIC)
    out.write(struct.pack("<HIIBHIBd", CHECKPOINT_VERSION, topo.num_sites, state.max_bond_dim,
                          int(state.symmetric), state.center[0], state.center[1], int(energy is not None),
                          float(energy) if energy is not None else 0.0))
    nodes = topo.nodes()
    out.write(struct.pack("<I", len(nodes)))
    for node in nodes:
        rec = tensor_to_bytes(state.tensors[node])
        out.write(struct.pack("<HIQ", node[0], node[1], len(rec)))
        out.write(rec)
    return out.getvalue()


def checkpoint_from_bytes(data: bytes, backend: str = "optimized"):
    from .ttn import TTNState, TTNTopology

    r = _Reader(data)
    if r.take(4) != CHECKPOINT_MAGIC:
        raise FormatError("not a checkpoint")
    version, num_sites, chi, symmetric, cl, cp, has_energy, energy = r.unpack("<HIIBHIBd")
    if version != CHECKPOINT_VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")
    topo = TTNTopology(num_sites)
    (count,) = r.unpack("<I")
    expected = topo.nodes()
    if count != len(expected):
        raise FormatError(f"checkpoint holds {count} tensors, topology needs {len(expected)}")
    tensors = {}
    for node in expected:
        layer, pos, length = r.unpack("<HIQ")
        if (layer, pos) != node:
            raise FormatError(f"tensor for node {(layer, pos)} found where {node} was expected")
        tensors[node] = tensor_from_bytes(r.take(length), backend)
    if r.pos != len(data):
        raise FormatError("trailing bytes after checkpoint")
    state = TTNState(topo, tensors, (cl, cp), chi, bool(symmetric))
    state.energy = float(energy) if has_energy else None
    return state


def save_checkpoint(path, state) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(checkpoint_to_bytes(state))
    os.replace(tmp, path)


def load_checkpoint(path, backend: str = "optimized"):
    with open(path, "rb") as fh:
        return checkpoint_from_bytes(fh.read(), backend)
