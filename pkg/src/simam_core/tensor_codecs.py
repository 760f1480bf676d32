# -*- coding: utf-8 -*-
"""
TEN4 tensor serialization, exposed through the stdlib codec registry::

    blob = codecs.encode(array, "ten4")
    array = codecs.decode(blob, "ten4")

Layout (little-endian): magic ``b"TEN4"``, u16 dtype code, u16 rank,
4 x u32 dimensions (trailing ones below rank 4), then the raw IEEE-754 data.
"""
import codecs
import struct

import numpy as np

from .errors import ShapeError

MAGIC = b"TEN4"
HEADER = struct.Struct("<4sHH4I")

DTYPE_CODES = {
    1: np.dtype("<f4"),
    2: np.dtype("<f8"),
    3: np.dtype("<i8"),
}
CODE_FOR_DTYPE = {dtype: code for code, dtype in DTYPE_CODES.items()}


class TEN4Codec:
    @classmethod
    def is_supported(cls, codec_name):
        return codec_name in ("ten4", "tensor4")

    def encode(self, input, errors="strict"):
        array = np.asarray(input.numpy() if hasattr(input, "numpy") else input)
        dtype = array.dtype.newbyteorder("<")
        if dtype not in CODE_FOR_DTYPE:
            raise TypeError(f"TEN4 cannot store dtype {array.dtype}")
        if array.ndim > 4:
            raise ShapeError(f"TEN4 stores at most 4 dimensions, got {array.shape}")

        dims = tuple(array.shape) + (1,) * (4 - array.ndim)
        header = HEADER.pack(MAGIC, CODE_FOR_DTYPE[dtype], array.ndim, *dims)
        payload = np.ascontiguousarray(array, dtype=dtype).tobytes()
        output = header + payload
        return output, len(output)

    def decode(self, input, errors="strict"):
        blob = bytes(input)
        if len(blob) < HEADER.size:
            raise ValueError("TEN4 blob shorter than its header")

        magic, code, rank, *dims = HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise ValueError(f"bad TEN4 magic {magic!r}")
        if code not in DTYPE_CODES or rank > 4:
            raise ValueError(f"bad TEN4 header (dtype code {code}, rank {rank})")

        dtype = DTYPE_CODES[code]
        shape = tuple(dims[:rank])
        count = int(np.prod(shape, dtype=np.int64))
        expected = HEADER.size + count * dtype.itemsize
        if len(blob) != expected:
            raise ValueError(f"TEN4 blob has {len(blob)} bytes, expected {expected}")

        output = np.frombuffer(blob, dtype=dtype, offset=HEADER.size).reshape(shape)
        return output.astype(dtype.newbyteorder("="), copy=True), len(blob)


def lookup(codec_name):
    if not TEN4Codec.is_supported(codec_name):
        return None

    codec = TEN4Codec()
    return codecs.CodecInfo(
        name=codec_name,
        encode=codec.encode,
        decode=codec.decode,
    )
