"""Image decoding, color transforms, and resolution-halving preprocessing.

A grayscale plane is a 2D float64 array indexed ``[row, col]`` with nominal
intensity range [0, 255]; a color image is an ``(H, W, 3)`` float64 array in
RGB channel order. 8-bit sources are decoded to [0, 255] exactly, 16-bit
grayscale sources are rescaled to the same range.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError


class ImageDecodeError(ValueError):
    """Base class for image decoding failures."""


class UnreadableFileError(ImageDecodeError):
    """The file could not be opened or read at all."""


class UnsupportedFormatError(ImageDecodeError):
    """The file is readable but not in a supported raster format."""


class CorruptStreamError(ImageDecodeError):
    """The raster stream is recognized but damaged or truncated."""


# Row 1 is the luminance weighting also used for plain grayscale conversion.
YIQ_FROM_RGB = np.array([
    [0.299, 0.587, 0.114],
    [0.596, -0.274, -0.322],
    [0.211, -0.523, 0.312],
])


def as_plane(samples) -> np.ndarray:
    """Validate and return a 2D float64 grayscale plane."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2D plane, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("plane contains non-finite samples")
    return arr


def as_color(samples) -> np.ndarray:
    """Validate and return an (H, W, 3) float64 RGB image."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"expected a non-empty (H, W, 3) RGB image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite samples")
    return arr


def decode_image(path) -> np.ndarray:
    """Decode a raster file into a grayscale plane or an RGB image.

    Returns a 2D array for single-channel input and an (H, W, 3) array for
    three-channel input. 8-bit samples map to [0, 255] unchanged; 16-bit
    grayscale samples are scaled by 255/65535. Alpha channels are rejected.
    """
    p = Path(path)
    try:
        img = Image.open(p)
        img.load()
    except UnidentifiedImageError as exc:
        raise UnsupportedFormatError(f"{p}: not a supported raster format ({exc})") from exc
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        raise UnreadableFileError(f"{p}: cannot read file ({exc})") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptStreamError(f"{p}: corrupt or truncated raster stream ({exc})") from exc

    mode = img.mode
    if mode == "1":
        img = img.convert("L")
        mode = "L"
    elif mode == "P":
        if "transparency" in img.info:
            raise UnsupportedFormatError(f"{p}: alpha/transparency is not supported")
        img = img.convert("RGB")
        mode = "RGB"

    if mode == "L":
        return np.asarray(img, dtype=np.float64)
    if mode == "RGB":
        return np.asarray(img, dtype=np.float64)
    if mode in ("I", "I;16", "I;16B", "I;16L"):
        raw = np.asarray(img, dtype=np.float64)
        return raw * (255.0 / 65535.0)
    if mode in ("LA", "RGBA", "PA"):
        raise UnsupportedFormatError(f"{p}: alpha channels are not supported")
    raise UnsupportedFormatError(f"{p}: unsupported pixel mode {mode!r}")


def encode_image(path, samples) -> None:
    """Write a plane or RGB image as an 8-bit raster file.

    Values are rounded and clipped to [0, 255]; the format is inferred from
    the file extension (PNG, PGM, and PPM are the supported targets).
    """
    arr = np.asarray(samples, dtype=np.float64)
    data = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    if data.ndim == 2:
        img = Image.fromarray(data, mode="L")
    elif data.ndim == 3 and data.shape[2] == 3:
        img = Image.fromarray(data, mode="RGB")
    else:
        raise ValueError(f"cannot encode array of shape {arr.shape}")
    img.save(Path(path))


def rgb_to_gray(img) -> np.ndarray:
    """Convert an RGB image to luminance with the 0.299/0.587/0.114 weights."""
    rgb = as_color(img)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    return 0.299 * r + 0.587 * g + 0.114 * b


def rgb_to_yiq(img) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split an RGB image into luminance (Y) and chroma (I, Q) planes."""
    rgb = as_color(img)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    i = 0.596 * r - 0.274 * g - 0.322 * b
    q = 0.211 * r - 0.523 * g + 0.312 * b
    return y, i, q


def mean_pool_2x2(plane) -> np.ndarray:
    """Halve resolution by averaging disjoint 2x2 blocks.

    Output pixel (i, j) is the mean of input rows {2i, 2i+1} and columns
    {2j, 2j+1}; a trailing odd row or column is dropped.
    """
    arr = as_plane(plane)
    h, w = arr.shape
    if h < 2 or w < 2:
        raise ValueError(f"plane must be at least 2x2 to pool, got {h}x{w}")
    h2, w2 = h // 2, w // 2
    arr = arr[: 2 * h2, : 2 * w2]
    top = arr[0::2, 0::2] + arr[0::2, 1::2]
    bottom = arr[1::2, 0::2] + arr[1::2, 1::2]
    return 0.25 * (top + bottom)
