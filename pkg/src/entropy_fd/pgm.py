"""Minimal PGM (P2/P5, maxval 255) reader and writer."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import MalformedHeader, TruncatedData
from .grid import TorusGrid

_WHITESPACE = b" \t\n\r\v\f"


@dataclass(frozen=True)
class GrayImage:
    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"bad image size {self.width}x{self.height}")
        if len(self.pixels) != self.width * self.height:
            raise ValueError(f"{len(self.pixels)} pixels for a {self.width}x{self.height} image")

    @classmethod
    def from_array(cls, a: np.ndarray) -> "GrayImage":
        """From a ``(height, width)`` array of values in 0..255."""
        a = np.asarray(a)
        if a.ndim != 2:
            raise ValueError("expected a 2D array")
        if a.min() < 0 or a.max() > 255:
            raise ValueError("pixel values must lie in 0..255")
        return cls(a.shape[1], a.shape[0], a.astype(np.uint8).tobytes())

    def to_array(self) -> np.ndarray:
        """Row-major ``(height, width)`` uint8 array."""
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width)


def _tokens(data: bytes, count: int, pos: int):
    """Read ``count`` header tokens, skipping whitespace and ``#`` comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos >= n:
            raise MalformedHeader("header ends early")
        if data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        out.append(data[start:pos])
    return out, pos


def _int(tok: bytes, what: str) -> int:
    try:
        val = int(tok)
    except ValueError:
        raise MalformedHeader(f"{what} is not an integer: {tok!r}") from None
    if val <= 0:
        raise MalformedHeader(f"{what} must be positive, got {val}")
    return val


def parse_pgm(data: bytes) -> GrayImage:
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MalformedHeader(f"unknown magic {magic!r}")
    (w, h, m), pos = _tokens(data, 3, 2)
    width, height, maxval = _int(w, "width"), _int(h, "height"), _int(m, "maxval")
    if maxval != 255:
        raise MalformedHeader(f"only maxval 255 is supported, got {maxval}")
    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise TruncatedData("missing raster")
        raster = data[pos + 1 : pos + 1 + n]
        if len(raster) < n:
            raise TruncatedData(f"expected {n} pixels, found {len(raster)}")
        return GrayImage(width, height, bytes(raster))
    body = data[pos:]
    body = b"\n".join(line.split(b"#", 1)[0] for line in body.splitlines())
    toks = body.split()
    if len(toks) < n:
        raise TruncatedData(f"expected {n} pixels, found {len(toks)}")
    try:
        vals = [int(t) for t in toks[:n]]
    except ValueError as exc:
        raise TruncatedData(f"bad pixel value: {exc}") from None
    if min(vals) < 0 or max(vals) > 255:
        raise TruncatedData("pixel value outside 0..255")
    return GrayImage(width, height, bytes(vals))


def load_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def render_pgm(image: GrayImage, binary: bool = True) -> bytes:
    header = f"{image.width} {image.height}\n255\n".encode()
    if binary:
        return b"P5\n" + header + image.pixels
    rows = image.to_array()
    body = "\n".join(" ".join(str(int(p)) for p in row) for row in rows)
    return b"P2\n" + header + body.encode() + b"\n"


def save_pgm(image: GrayImage, path, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(render_pgm(image, binary))


def image_grid(image: GrayImage) -> TorusGrid:
    """Square pixels with ``h = 1 / max(width, height)``; axis 0 runs over rows."""
    return TorusGrid((image.height, image.width), 1.0 / max(image.width, image.height))


def image_to_field(image: GrayImage, floor: float = 1e-2) -> tuple[np.ndarray, TorusGrid]:
    """``u = max(floor, pixel / 255)`` shaped ``(height, width)``, with its grid."""
    if not 0 < floor < 0.5:
        raise ValueError(f"floor must lie in (0, 0.5), got {floor}")
    u = np.maximum(floor, image.to_array() / 255.0)
    return u, image_grid(image)


def field_to_image(u: np.ndarray) -> GrayImage:
    u = np.asarray(u, dtype=float)
    return GrayImage.from_array(np.rint(255.0 * np.clip(u, 0.0, 1.0)))


def synthetic_image(width: int = 77, height: int = 100, seed: int = 0) -> GrayImage:
    """Lantern-like test picture: a dark frame with a bright lamp, plus salt-and-pepper noise."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width]
    img = np.full((height, width), 40.0)
    cx = width / 2
    body = (np.abs(x - cx) < 0.28 * width) & (y > 0.22 * height) & (y < 0.82 * height)
    img[body] = 90.0
    lamp = ((x - cx) / (0.18 * width)) ** 2 + ((y - 0.5 * height) / (0.2 * height)) ** 2 < 1
    img[lamp] = 230.0
    img[(np.abs(x - cx) < 0.06 * width) & (y <= 0.22 * height) & (y > 0.08 * height)] = 150.0
    img += 0.25 * x
    noise = rng.random(img.shape)
    img[noise < 0.05] = 0.0
    img[noise > 0.95] = 255.0
    return GrayImage.from_array(np.clip(np.rint(img), 0, 255))


def bundled_image() -> GrayImage:
    """The shipped 77x100 copy of :func:`synthetic_image`."""
    return parse_pgm(resources.files("entropy_fd").joinpath("data/lantern_synthetic.pgm").read_bytes())
