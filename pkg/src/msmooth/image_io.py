"""8-bit PNM input/output and conversions to normalized float planes.

Images are plain numpy arrays: ``uint8`` of shape ``(H, W)`` for gray and
``(H, W, 3)`` for RGB. Planes are ``float64`` arrays of shape ``(H, W)`` whose
intensities live in ``[0, 1]`` (cost planes may leave that range).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

MAXVAL = 255
_WHITESPACE = b" \t\n\r\v\f"


class PNMError(ValueError):
    """Malformed or unsupported PNM data.

    ``offset`` is the byte position at which parsing failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class DimensionMismatch(ValueError):
    """Two images or planes that must share a shape do not."""


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "images") -> None:
    if a.shape[:2] != b.shape[:2]:
        raise DimensionMismatch(
            f"{what} differ in size: {a.shape[1]}x{a.shape[0]} vs {b.shape[1]}x{b.shape[0]}"
        )


def _header_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # Skips whitespace and '#' comments, then returns the next token.
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c in _WHITESPACE and c:
            pos += 1
        elif c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PNMError("malformed header: unexpected end of data", start)
    return data[start:pos], pos


def _header_int(data: bytes, pos: int, name: str) -> tuple[int, int]:
    token, end = _header_token(data, pos)
    if not token.isdigit():
        raise PNMError(f"malformed header: {name} is not a positive integer", end - len(token))
    return int(token), end


def read_pnm(data: bytes) -> np.ndarray:
    """Parse a binary P5 (gray) or P6 (RGB) image with maxval 255.

    Raises:
        PNMError: bad magic, malformed header, unsupported maxval, or a
            truncated body. The message names the byte offset.
    """
    data = bytes(data)
    if len(data) < 2 or data[:2] not in (b"P5", b"P6"):
        raise PNMError("malformed header: expected magic 'P5' or 'P6'", 0)
    channels = 1 if data[:2] == b"P5" else 3
    pos = 2
    if pos < len(data) and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        raise PNMError("malformed header: expected whitespace after magic", pos)
    width, pos = _header_int(data, pos, "width")
    height, pos = _header_int(data, pos, "height")
    maxval_at = pos
    maxval, pos = _header_int(data, pos, "maxval")
    if width == 0 or height == 0:
        raise PNMError("malformed header: zero image dimension", maxval_at)
    if maxval != MAXVAL:
        raise PNMError(f"unsupported maxval {maxval}", maxval_at)
    # Exactly one whitespace byte separates the header from the raster.
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise PNMError("malformed header: missing whitespace before raster", pos)
    pos += 1
    size = width * height * channels
    body = data[pos : pos + size]
    if len(body) < size:
        raise PNMError(
            f"truncated body: expected {size} bytes, found {len(body)}", pos + len(body)
        )
    img = np.frombuffer(body, dtype=np.uint8).copy()
    shape = (height, width) if channels == 1 else (height, width, 3)
    return img.reshape(shape)


def write_pnm(img: np.ndarray) -> bytes:
    """Encode a gray ``(H, W)`` or RGB ``(H, W, 3)`` uint8 image as binary PNM."""
    img = _as_image8(img)
    magic = b"P5" if img.ndim == 2 else b"P6"
    h, w = img.shape[:2]
    return magic + f"\n{w} {h}\n{MAXVAL}\n".encode("ascii") + img.tobytes()


def load(path: str | Path) -> np.ndarray:
    return read_pnm(Path(path).read_bytes())


def save(path: str | Path, img: np.ndarray) -> None:
    Path(path).write_bytes(write_pnm(img))


def _as_image8(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise TypeError(f"expected uint8 image, got {img.dtype}")
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    if not (img.ndim == 2 or (img.ndim == 3 and img.shape[2] == 3)):
        raise ValueError(f"expected (H, W) or (H, W, 3) image, got shape {img.shape}")
    return np.ascontiguousarray(img)


def channels(img: np.ndarray) -> int:
    return 1 if img.ndim == 2 else img.shape[2]


def normalize(img: np.ndarray, channel: int = 0) -> np.ndarray:
    """Return one channel of an 8-bit image as a float plane in [0, 1]."""
    img = _as_image8(img)
    if not 0 <= channel < channels(img):
        raise IndexError(f"channel {channel} out of range for {channels(img)}-channel image")
    plane = img if img.ndim == 2 else img[:, :, channel]
    return plane.astype(np.float64) / MAXVAL


def quantize(plane: np.ndarray) -> np.ndarray:
    """Map a float plane back to 8 bits, rounding half away from zero.

    Values are clamped to [0, 255] after rounding.
    """
    scaled = np.asarray(plane, dtype=np.float64) * MAXVAL
    rounded = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    return np.clip(rounded, 0, MAXVAL).astype(np.uint8)


def to_luminance(img: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an RGB image, normalized to [0, 1]."""
    img = _as_image8(img)
    if channels(img) != 3:
        raise ValueError("to_luminance needs a 3-channel image")
    rgb = img.astype(np.float64)
    y = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    return y / MAXVAL
