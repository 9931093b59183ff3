"""Sparse little-endian packet format for control vectors.

Layout::

    offset 0   uint32  period index k
    offset 4   uint16  entry count n
    offset 6   n x (uint16 index m+M, float64 real, float64 imag)

so a packet is exactly ``6 + 18 n`` bytes.
"""
from __future__ import annotations

import struct

import numpy as np

from .solvers import ControlVector

HEADER = struct.Struct("<IH")
ENTRY = struct.Struct("<Hdd")
MAX_COUNT = 0xFFFF
MAX_PERIOD = 0xFFFFFFFF


class MalformedPacketError(ValueError):
    """Raised for undecodable packets; ``offset`` is the byte position of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class TruncatedPacketError(MalformedPacketError):
    pass


class LengthMismatchError(MalformedPacketError):
    pass


class IndexOrderError(MalformedPacketError):
    pass


class IndexRangeError(MalformedPacketError):
    pass


def packet_size(count: int) -> int:
    return HEADER.size + ENTRY.size * count


def dense_packet_size(N: int) -> int:
    return packet_size(N)


def encode_control(theta: ControlVector, k: int) -> bytes:
    if not 0 <= k <= MAX_PERIOD:
        raise OverflowError(f"period index {k} does not fit in uint32")
    vals = theta.theta
    idx = np.flatnonzero(np.abs(vals) > theta.zero_tol)
    if idx.size > MAX_COUNT:
        raise OverflowError(f"{idx.size} entries do not fit in the uint16 count field")
    parts = [HEADER.pack(k, idx.size)]
    parts.extend(ENTRY.pack(int(i), vals[i].real, vals[i].imag) for i in idx)
    return b"".join(parts)


def decode_control(data: bytes, N: int, zero_tol: float = 0.0) -> tuple[int, ControlVector]:
    """Inverse of :func:`encode_control` for vectors of length ``N``."""
    data = bytes(data)
    if len(data) < HEADER.size:
        raise TruncatedPacketError(f"packet of {len(data)} bytes is shorter than the header", len(data))
    k, count = HEADER.unpack_from(data, 0)
    body = len(data) - HEADER.size
    if body % ENTRY.size:
        whole = body // ENTRY.size
        raise TruncatedPacketError("payload ends inside an entry", HEADER.size + whole * ENTRY.size)
    if body // ENTRY.size != count:
        raise LengthMismatchError(
            f"count field says {count} entries but payload holds {body // ENTRY.size}", 4)
    theta = np.zeros(N, dtype=complex)
    prev = -1
    for j in range(count):
        off = HEADER.size + j * ENTRY.size
        i, re, im = ENTRY.unpack_from(data, off)
        if i <= prev:
            raise IndexOrderError(f"entry index {i} does not increase past {prev}", off)
        if i >= N:
            raise IndexRangeError(f"entry index {i} outside vector of length {N}", off)
        theta[i] = complex(re, im)
        prev = i
    return k, ControlVector(theta, zero_tol)


def compression_ratio(result) -> float:
    """Mean transmitted bytes over the dense packet size ``6 + 18 N``."""
    sizes = list(result.bytes_per_period)
    if not sizes:
        raise ValueError("run has no transmitted packets")
    return float(np.mean(sizes)) / dense_packet_size(result.N)
