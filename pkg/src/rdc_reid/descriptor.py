"""Per-pixel features and region covariance descriptors.

Each foreground pixel contributes a 14-dimensional feature vector::

    [x, y, H, S, V_eq, L, a, b, |grad R|, |grad G|, |grad B|, ang R, ang G, ang B]

and an image is summarised by the sample covariance of those vectors.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, FormatError, TooFewForegroundPixels, TooFewSamples
from .pnm import read_pgm, read_ppm
from .spd import SpdMatrix, format_matrix, parse_matrix, read_comments

FEATURE_NAMES = (
    "x", "y", "H", "S", "V_eq", "L", "a", "b",
    "grad_mag_R", "grad_mag_G", "grad_mag_B",
    "grad_ang_R", "grad_ang_G", "grad_ang_B",
)
FEATURE_DIM = len(FEATURE_NAMES)
MIN_FOREGROUND = FEATURE_DIM + 1
DEFAULT_EPS = 1e-5

# sRGB primaries to CIE XYZ, D65 reference white.
_RGB_TO_XYZ = np.array([
    [0.412453, 0.357580, 0.180423],
    [0.212671, 0.715160, 0.072169],
    [0.019334, 0.119193, 0.950227],
])
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]])
_SOBEL_Y = _SOBEL_X.T


@dataclass(frozen=True, eq=False)
class Image:
    """8-bit RGB image stored as a ``(height, width, 3)`` uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] * px.shape[1] == 0:
            raise DimensionMismatch(f"expected a non-empty (h, w, 3) array, got {px.shape}")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255) or np.any(px != np.round(px)):
                raise FormatError("channel values must be integers in [0, 255]")
            px = px.astype(np.uint8)
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @classmethod
    def read(cls, path: str | os.PathLike) -> Image:
        return cls(read_ppm(path))


@dataclass(frozen=True, eq=False)
class ForegroundMask:
    """Boolean ``(height, width)`` array; True marks a foreground pixel."""

    flags: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.flags)
        if f.ndim != 2:
            raise DimensionMismatch(f"mask must be 2-D, got shape {f.shape}")
        f = f.astype(bool)
        f.setflags(write=False)
        object.__setattr__(self, "flags", f)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.flags))

    @classmethod
    def full(cls, image: Image) -> ForegroundMask:
        return cls(np.ones((image.height, image.width), dtype=bool))

    @classmethod
    def read(cls, path: str | os.PathLike) -> ForegroundMask:
        return cls(read_pgm(path) > 0)


@dataclass(frozen=True, eq=False)
class CovarianceDescriptor:
    matrix: SpdMatrix
    pixel_count: int

    def to_text(self) -> str:
        return format_matrix(self.matrix.values, comments=[f"pixels={self.pixel_count}"])

    @classmethod
    def from_text(cls, text: str) -> CovarianceDescriptor:
        meta = read_comments(text)
        try:
            count = int(meta.get("pixels", 0))
        except ValueError:
            raise FormatError(f"bad pixel count {meta['pixels']!r}") from None
        return cls(SpdMatrix(parse_matrix(text)), count)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path: str | os.PathLike) -> CovarianceDescriptor:
        with open(path) as fh:
            text = fh.read()
        try:
            return cls.from_text(text)
        except FormatError as exc:
            raise FormatError(f"{path}: {exc}") from None


# -- colour conversions ------------------------------------------------------


def rgb_to_hsv(rgb) -> np.ndarray:
    """Hexcone RGB to HSV for 8-bit input; all outputs in [0, 1], H < 1.

    Accepts a single triple or any array with a trailing axis of 3.
    """
    rgb = np.asarray(rgb, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    vmax = np.max(rgb, axis=-1)
    vmin = np.min(rgb, axis=-1)
    delta = vmax - vmin
    safe = np.where(delta > 0, delta, 1.0)
    h = np.where(
        vmax == r,
        ((g - b) / safe) % 6.0,
        np.where(vmax == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0),
    )
    h = np.where(delta > 0, h / 6.0, 0.0)
    s = np.where(vmax > 0, delta / np.where(vmax > 0, vmax, 1.0), 0.0)
    return np.stack([h, s, vmax], axis=-1)


def rgb_to_cielab(rgb) -> np.ndarray:
    """sRGB (8-bit) to CIELAB under D65."""
    c = np.asarray(rgb, dtype=np.float64) / 255.0
    lin = np.where(c > 0.04045, ((c + 0.055) / 1.055) ** 2.4, c / 12.92)
    xyz = lin @ _RGB_TO_XYZ.T / _D65_WHITE
    eps = (6.0 / 29.0) ** 3
    f = np.where(xyz > eps, np.cbrt(xyz), xyz / (3 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    L = 116.0 * fy - 16.0
    a = 500.0 * (fx - fy)
    b = 200.0 * (fy - fz)
    return np.stack([L, a, b], axis=-1)


def histogram_equalize_v(image: Image, mask: ForegroundMask | None = None) -> np.ndarray:
    """Equalised V channel, ``cdf(V)`` over 256 bins, shape ``(h, w)``.

    The histogram is taken over the pixels selected by ``mask`` (all pixels
    when omitted); every pixel is then mapped through that CDF.
    """
    v = np.max(image.pixels, axis=-1).astype(np.intp)
    sample = v if mask is None else v[mask.flags]
    if sample.size == 0:
        return np.zeros(v.shape)
    hist = np.bincount(sample.ravel(), minlength=256)
    cdf = np.cumsum(hist) / sample.size
    return cdf[v]


def gradients(image: Image) -> tuple[np.ndarray, np.ndarray]:
    """Sobel magnitude and orientation per RGB channel.

    Returns ``(magnitude, angle)``, each ``(h, w, 3)``. Borders replicate
    edge pixels; angles lie in (-pi, pi] with 0 where the gradient vanishes.
    """
    px = np.pad(image.pixels.astype(np.int64), ((1, 1), (1, 1), (0, 0)), mode="edge")
    h, w = image.height, image.width
    gx = np.zeros((h, w, 3), dtype=np.int64)
    gy = np.zeros((h, w, 3), dtype=np.int64)
    for dy in range(3):
        for dx in range(3):
            win = px[dy : dy + h, dx : dx + w]
            gx += _SOBEL_X[dy, dx] * win
            gy += _SOBEL_Y[dy, dx] * win
    gx = gx.astype(np.float64)
    gy = gy.astype(np.float64)
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx)
    ang[ang <= -np.pi] = np.pi
    return mag, ang


# -- descriptor ----------------------------------------------------------------


def _check_pair(image: Image, mask: ForegroundMask) -> None:
    if mask.flags.shape != (image.height, image.width):
        raise DimensionMismatch(
            f"mask {mask.flags.shape[::-1]} does not match image {image.width}x{image.height}"
        )
    if mask.count < MIN_FOREGROUND:
        raise TooFewForegroundPixels(
            f"{mask.count} foreground pixels; at least {MIN_FOREGROUND} are required"
        )


def extract_features(image: Image, mask: ForegroundMask | None = None) -> np.ndarray:
    """Feature vectors of the foreground pixels, shape ``(N, 14)``, row-major order."""
    if mask is None:
        mask = ForegroundMask.full(image)
    _check_pair(image, mask)
    ys, xs = np.nonzero(mask.flags)
    rgb = image.pixels[ys, xs]
    hsv = rgb_to_hsv(rgb)
    hsv[:, 2] = histogram_equalize_v(image, mask)[ys, xs]
    lab = rgb_to_cielab(rgb)
    mag, ang = gradients(image)
    return np.column_stack([
        xs.astype(np.float64), ys.astype(np.float64), hsv, lab, mag[ys, xs], ang[ys, xs],
    ])


def covariance(features, eps: float = DEFAULT_EPS) -> CovarianceDescriptor:
    """Unbiased sample covariance of the rows of ``features`` plus ``eps * I``."""
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2:
        raise DimensionMismatch("features must be a 2-D array")
    n = f.shape[0]
    if n < 2:
        raise TooFewSamples(f"need at least 2 feature vectors, got {n}")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    centered = f - f.mean(axis=0)
    c = centered.T @ centered / (n - 1)
    c = 0.5 * (c + c.T) + eps * np.eye(f.shape[1])
    return CovarianceDescriptor(SpdMatrix(c), n)


def describe(image: Image, mask: ForegroundMask | None = None,
             eps: float = DEFAULT_EPS) -> CovarianceDescriptor:
    return covariance(extract_features(image, mask), eps)


def describe_file(ppm_path: str | os.PathLike, mask_path: str | os.PathLike | None = None,
                  eps: float = DEFAULT_EPS) -> CovarianceDescriptor:
    """Describe a PPM image; ``mask_path=None`` means every pixel is foreground."""
    image = Image.read(ppm_path)
    mask = ForegroundMask.read(mask_path) if mask_path is not None else None
    return describe(image, mask, eps)
