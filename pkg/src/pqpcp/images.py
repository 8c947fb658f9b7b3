"""Image denoising on top of the matrix solver.

Images are carried as per-channel float64 matrices normalized to [0, 1];
grayscale images have one channel, color images three. Corruption adds
Gaussian noise to a seeded random subset of pixels, denoising solves each
channel independently and keeps the low-rank part, and quality is scored
with PSNR against a reference. File I/O covers binary PGM (P5) and PPM
(P6) at 8 bits per sample with a bit-exact round trip for clean images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix import _atomic_write_bytes
from .solver import SolverConfig, solve

__all__ = [
    "ImagePlane",
    "NoiseSpec",
    "read_image",
    "write_image",
    "corrupt",
    "denoise",
    "psnr",
    "image_rse",
]


@dataclass(frozen=True)
class ImagePlane:
    """One image as a tuple of height-by-width channel matrices."""

    channels: tuple

    def __post_init__(self):
        if len(self.channels) not in (1, 3):
            raise ValueError(
                f"expected 1 or 3 channels, got {len(self.channels)}"
            )
        shapes = {c.shape for c in self.channels}
        if len(shapes) != 1:
            raise ValueError(f"channel shapes disagree: {sorted(shapes)}")
        for c in self.channels:
            if c.ndim != 2 or c.size == 0:
                raise ValueError("channels must be nonempty 2-D matrices")
            if not np.all(np.isfinite(c)):
                raise ValueError("channel contains NaN or Inf")

    @property
    def height(self) -> int:
        return self.channels[0].shape[0]

    @property
    def width(self) -> int:
        return self.channels[0].shape[1]

    @property
    def n_channels(self) -> int:
        return len(self.channels)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian corruption of a random pixel subset."""

    pixel_fraction: float
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.pixel_fraction <= 1.0:
            raise ValueError(
                f"pixel_fraction must lie in [0, 1], got {self.pixel_fraction}"
            )
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")


def _parse_pnm_tokens(blob: bytes, count: int, path) -> tuple[list[int], int]:
    """Read ``count`` whitespace-separated ASCII integers after the magic,
    honoring '#' comments; returns the values and the raster start offset."""
    values = []
    i = 2  # past the 2-byte magic
    while len(values) < count:
        if i >= len(blob):
            raise ValueError(f"malformed image header in {path!r}")
        byte = blob[i:i + 1]
        if byte.isspace():
            i += 1
        elif byte == b"#":
            while i < len(blob) and blob[i:i + 1] != b"\n":
                i += 1
        elif byte.isdigit():
            j = i
            while j < len(blob) and blob[j:j + 1].isdigit():
                j += 1
            values.append(int(blob[i:j]))
            i = j
        else:
            raise ValueError(f"malformed image header in {path!r}")
    # exactly one whitespace byte separates the header from the raster
    if i >= len(blob) or not blob[i:i + 1].isspace():
        raise ValueError(f"malformed image header in {path!r}")
    return values, i + 1


def read_image(path) -> ImagePlane:
    """Read a binary PGM (P5) or PPM (P6) image; pixel v maps to v / 255."""
    with open(path, "rb") as handle:
        blob = handle.read()
    magic = blob[:2]
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"unsupported image format in {path!r} (need P5/P6)")
    (width, height, maxval), offset = _parse_pnm_tokens(blob, 3, path)
    if maxval != 255:
        raise ValueError(f"{path!r}: only 8-bit images supported, maxval={maxval}")
    if width < 1 or height < 1:
        raise ValueError(f"{path!r}: bad image dimensions {width}x{height}")
    n_channels = 1 if magic == b"P5" else 3
    expected = width * height * n_channels
    raster = blob[offset:]
    if len(raster) != expected:
        raise ValueError(
            f"{path!r}: raster has {len(raster)} bytes, expected {expected}"
        )
    data = np.frombuffer(raster, dtype=np.uint8).astype(np.float64) / 255.0
    if n_channels == 1:
        return ImagePlane(channels=(data.reshape(height, width),))
    planes = data.reshape(height, width, 3)
    return ImagePlane(channels=tuple(planes[:, :, c] for c in range(3)))


def write_image(img: ImagePlane, path) -> None:
    """Write PGM (1 channel) or PPM (3 channels), clamping values to [0, 1]."""
    height, width = img.height, img.width
    quantized = [
        np.rint(np.clip(c, 0.0, 1.0) * 255.0).astype(np.uint8)
        for c in img.channels
    ]
    if img.n_channels == 1:
        magic, raster = b"P5", quantized[0].tobytes()
    else:
        magic = b"P6"
        raster = np.stack(quantized, axis=-1).tobytes()
    header = magic + b"\n" + f"{width} {height}\n255\n".encode("ascii")
    _atomic_write_bytes(path, header + raster)


def corrupt(img: ImagePlane, spec: NoiseSpec) -> ImagePlane:
    """Add N(0, sigma^2) noise to a seeded Bernoulli subset of pixels.

    Each channel draws its own subset; untouched pixels keep their exact
    values and no clamping is applied (clamping happens only on encode).
    """
    rng = np.random.default_rng(spec.seed)
    noisy = []
    for channel in img.channels:
        mask = rng.random(channel.shape) < spec.pixel_fraction
        noise = spec.sigma * rng.standard_normal(channel.shape)
        noisy.append(channel + noise * mask)
    return ImagePlane(channels=tuple(noisy))


def denoise(img: ImagePlane, cfg: SolverConfig | None = None):
    """Solve each channel independently and keep its low-rank part.

    Returns the reassembled image and one iteration trace per channel. The
    sparse parts are treated as noise and dropped.
    """
    recovered = []
    traces = []
    for index, channel in enumerate(img.channels):
        try:
            result = solve(channel, cfg)
        except Exception as exc:
            raise type(exc)(f"channel {index}: {exc}") from exc
        recovered.append(result.l_star)
        traces.append(result.trace)
    return ImagePlane(channels=tuple(recovered)), traces


def _stack(img: ImagePlane) -> np.ndarray:
    return np.stack(img.channels)


def _check_same_geometry(a: ImagePlane, b: ImagePlane) -> None:
    if a.n_channels != b.n_channels or a.channels[0].shape != b.channels[0].shape:
        raise ValueError(
            f"image geometry mismatch: {a.n_channels}x{a.channels[0].shape} vs "
            f"{b.n_channels}x{b.channels[0].shape}"
        )


def psnr(a: ImagePlane, b: ImagePlane) -> float:
    """Peak signal-to-noise ratio in dB for [0, 1]-normalized images.

    10 * log10(1 / MSE) with the MSE averaged over all pixels and channels.
    Identical images return +inf.
    """
    _check_same_geometry(a, b)
    diff = _stack(a) - _stack(b)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def image_rse(a: ImagePlane, reference: ImagePlane) -> float:
    """Relative error ||a - ref||_F / ||ref||_F over all channels."""
    _check_same_geometry(a, reference)
    denom = float(np.linalg.norm(_stack(reference)))
    err = float(np.linalg.norm(_stack(a) - _stack(reference)))
    if denom == 0.0:
        return err
    return err / denom
