import codecs

import numpy as np
import pytest

import simam_core  # noqa: F401  registers the codec
from simam_core.errors import ShapeError
from simam_core.tensor import Tensor
from simam_core.tensor_codecs import HEADER, MAGIC


def test_header_layout():
    blob = codecs.encode(np.zeros((2, 3), dtype=np.float32), "ten4")
    magic, code, rank, *dims = HEADER.unpack_from(blob)
    assert HEADER.size == 24
    assert magic == MAGIC
    assert (code, rank) == (1, 2)
    assert dims == [2, 3, 1, 1]
    assert len(blob) == 24 + 6 * 4


@pytest.mark.parametrize("dtype", ["float32", "float64", "int64"])
def test_decode_restores_array(rng, dtype):
    array = (rng.normal(size=(2, 3, 4, 5)) * 100).astype(dtype)
    decoded = codecs.decode(codecs.encode(array, "ten4"), "ten4")
    assert decoded.dtype == array.dtype
    assert np.array_equal(decoded, array)


def test_encodes_tensor_data(rng):
    x = Tensor(rng.normal(size=(3, 3)))
    assert codecs.encode(x, "ten4") == codecs.encode(x.data, "ten4")


def test_scalar_and_alias():
    blob = codecs.encode(np.array(2.5), "tensor4")
    assert codecs.decode(blob, "ten4").shape == ()


def test_rejects_rank_above_four():
    with pytest.raises(ShapeError):
        codecs.encode(np.zeros((1, 1, 1, 1, 1)), "ten4")


def test_rejects_unsupported_dtype():
    with pytest.raises(TypeError):
        codecs.encode(np.zeros(3, dtype=np.int8), "ten4")


@pytest.mark.parametrize(
    "blob",
    [
        b"TEN4",
        b"XXXX" + bytes(20),
        codecs.encode(np.zeros(4), "ten4")[:-1],
    ],
)
def test_rejects_corrupt_blobs(blob):
    with pytest.raises(ValueError):
        codecs.decode(blob, "ten4")
