import numpy as np
import pytest

from rdc_reid.errors import FormatError
from rdc_reid.pnm import encode_pgm, encode_ppm, parse_pgm, parse_ppm


def test_ppm_round_trip():
    px = np.arange(2 * 3 * 3, dtype=np.uint8).reshape(2, 3, 3)
    np.testing.assert_array_equal(parse_ppm(encode_ppm(px)), px)


def test_ppm_header_comments():
    data = b"P6\n# made by hand\n2 1\n# another\n255\n" + bytes([1, 2, 3, 4, 5, 6])
    np.testing.assert_array_equal(parse_ppm(data), [[[1, 2, 3], [4, 5, 6]]])


def test_ppm_raster_may_start_with_whitespace_byte():
    # pixel value 10 is '\n'; only one whitespace byte separates header and raster
    data = b"P6 1 1 255\n" + bytes([10, 32, 9])
    np.testing.assert_array_equal(parse_ppm(data), [[[10, 32, 9]]])


@pytest.mark.parametrize("data", [
    b"P3\n1 1\n255\n1 2 3\n",
    b"P6\n1 1\n65535\n" + bytes(6),
    b"P6\n1 1\n15\n" + bytes(3),
    b"P6\n2 2\n255\n" + bytes(5),
    b"P6\n",
    b"P6\nx 1\n255\n",
])
def test_ppm_rejects(data):
    with pytest.raises(FormatError):
        parse_ppm(data)


def test_pgm_binary_and_ascii():
    v = np.array([[0, 7], [255, 1]], dtype=np.uint8)
    np.testing.assert_array_equal(parse_pgm(encode_pgm(v)), v)
    np.testing.assert_array_equal(parse_pgm(b"P2\n2 2\n255\n0 7\n255 1\n"), v)


def test_pgm_16bit():
    data = b"P5\n2 1\n65535\n" + bytes([0x01, 0x00, 0x00, 0x00])
    np.testing.assert_array_equal(parse_pgm(data), [[256, 0]])


@pytest.mark.parametrize("data", [b"P6\n1 1\n255\n\0\0\0", b"P5\n2 2\n255\n\0", b"P2\n2 1\n255\n3\n"])
def test_pgm_rejects(data):
    with pytest.raises(FormatError):
        parse_pgm(data)
