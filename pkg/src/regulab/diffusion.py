"""Forward noising of grayscale images.

Two noise families, both blended into the image by a pixelwise convex
combination ``out = (1 - alpha) * img + alpha * noise``:

* uniform fields, each pixel drawn uniformly on [0, 1), with the blend
  fraction alpha as the noising level;
* power-law fields, each pixel drawn from the density a * x^(a-1) on
  [0, 1) (inverse-CDF: u^(1/a)), where small shape values pile mass near
  zero and the field's own blend alpha defaults to 0.75.

A schedule applies one fresh noise field per step to the ORIGINAL image
(independent noisings, not a chained walk), with per-step generators split
off a single master seed; a cumulative flag chains them instead. Only the
forward direction exists here; nothing denoises.

Images are immutable [0, 1] rasters with binary (P5) and ASCII (P2) PGM
round-trips at 8-bit quantization.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .rng import SplitMix64


@dataclass(frozen=True)
class GrayImage:
    """Row-major grayscale raster with every pixel in [0, 1]."""

    width: int
    height: int
    pixels: np.ndarray  # shape (height, width), float64, read-only

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=float)
        if px.shape != (self.height, self.width):
            raise ValueError(
                f"pixel block {px.shape} does not match {self.height}x{self.width}"
            )
        if px.size and (px.min() < 0.0 or px.max() > 1.0):
            raise ValueError("pixels must lie in [0, 1]")
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)


@dataclass(frozen=True)
class UniformBlend:
    """Uniform noise blended at fraction ``alpha``."""

    alpha: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class PowerMask:
    """Power-law noise with density shape * x^(shape-1), blended at
    fraction ``alpha``."""

    shape: float
    alpha: float = 0.75

    def __post_init__(self) -> None:
        if self.shape <= 0:
            raise ValueError(f"shape must be positive, got {self.shape}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


NoiseSpec = Union[UniformBlend, PowerMask]


@dataclass(frozen=True)
class NoiseSchedule:
    steps: tuple[NoiseSpec, ...]

    def __post_init__(self) -> None:
        if len(self.steps) == 0:
            raise ValueError("a schedule needs at least one step")


# Default level ladders: uniform blends span 0.2 -> 0.9 evenly; power
# shapes sharpen toward 0.
DEFAULT_UNIFORM_ALPHAS = (0.2, 0.375, 0.55, 0.725, 0.9)
DEFAULT_POWER_SHAPES = (0.8, 0.6, 0.4, 0.2, 0.01)


def uniform_schedule(alphas=DEFAULT_UNIFORM_ALPHAS) -> NoiseSchedule:
    return NoiseSchedule(tuple(UniformBlend(a) for a in alphas))


def power_schedule(shapes=DEFAULT_POWER_SHAPES, alpha: float = 0.75) -> NoiseSchedule:
    return NoiseSchedule(tuple(PowerMask(s, alpha) for s in shapes))


def gen_noise_field(w: int, h: int, spec: NoiseSpec, seed: int) -> GrayImage:
    """I.i.d. noise raster, generated row-major from the seeded project RNG."""
    if w < 1 or h < 1:
        raise ValueError(f"field must be at least 1x1, got {w}x{h}")
    rng = SplitMix64(seed)
    flat = np.empty(w * h, dtype=float)
    if isinstance(spec, UniformBlend):
        for i in range(flat.size):
            flat[i] = rng.next_float()
    elif isinstance(spec, PowerMask):
        inv = 1.0 / spec.shape
        for i in range(flat.size):
            flat[i] = rng.next_float() ** inv
    else:
        raise TypeError(f"unknown noise spec: {spec!r}")
    return GrayImage(width=w, height=h, pixels=flat.reshape(h, w))


def blend(img: GrayImage, noise: GrayImage, alpha: float) -> GrayImage:
    """Pixelwise convex combination; alpha 0 returns the image bit-identical,
    alpha 1 the noise."""
    if (img.width, img.height) != (noise.width, noise.height):
        raise ValueError(
            f"dimension mismatch: {img.width}x{img.height} vs {noise.width}x{noise.height}"
        )
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if alpha == 0.0:
        return img
    if alpha == 1.0:
        return noise
    # a + alpha*(b - a) stays inside [min(a,b), max(a,b)] under IEEE rounding.
    out = img.pixels + alpha * (noise.pixels - img.pixels)
    return GrayImage(width=img.width, height=img.height, pixels=out)


def run_schedule(
    img: GrayImage, sched: NoiseSchedule, seed: int, cumulative: bool = False
) -> list[GrayImage]:
    """One noised image per schedule step. Each step blends the original
    image with a fresh field from a split sub-generator; with
    ``cumulative`` set, each step blends the previous step's result."""
    master = SplitMix64(seed)
    outputs: list[GrayImage] = []
    base = img
    for spec in sched.steps:
        sub = master.split()
        field = gen_noise_field(base.width, base.height, spec, sub.next_u64())
        noised = blend(base, field, spec.alpha)
        outputs.append(noised)
        if cumulative:
            base = noised
    return outputs


def image_stats(img: GrayImage) -> tuple[float, float, np.ndarray]:
    """Exact sample mean and population variance, plus a 256-bin histogram
    over [0, 1] whose counts sum to width*height."""
    px = img.pixels.ravel()
    mean = float(px.mean())
    var = float(((px - mean) ** 2).mean())
    idx = np.minimum((px * 256).astype(int), 255)
    hist = np.bincount(idx, minlength=256)
    return mean, var, hist


def luminance(rgb: np.ndarray) -> GrayImage:
    """Collapse an (h, w, 3) float array in [0, 1] to grayscale by the
    Rec. 601 luma weights."""
    arr = np.asarray(rgb, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3), got {arr.shape}")
    gray = arr[..., 0] * 0.299 + arr[..., 1] * 0.587 + arr[..., 2] * 0.114
    gray = np.clip(gray, 0.0, 1.0)
    return GrayImage(width=arr.shape[1], height=arr.shape[0], pixels=gray)


def pgm_bytes(img: GrayImage) -> bytes:
    """Binary P5 encoding, maxval 255, pixel = round(value * 255)."""
    quant = np.rint(img.pixels * 255.0).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + quant.tobytes()


def write_pgm(img: GrayImage, path: str | Path, ascii_format: bool = False) -> None:
    """Write 8-bit PGM: binary P5 by default, ASCII P2 on request."""
    if ascii_format:
        quant = np.rint(img.pixels * 255.0).astype(np.uint8)
        lines = [f"P2\n{img.width} {img.height}\n255\n"]
        for row in quant:
            lines.append(" ".join(str(int(v)) for v in row) + "\n")
        Path(path).write_text("".join(lines), encoding="ascii")
    else:
        Path(path).write_bytes(pgm_bytes(img))


def read_pgm(path: str | Path) -> GrayImage:
    """Read binary P5 or ASCII P2, mapping raw values to value/maxval."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise ValueError(f"not a PGM file (magic {magic!r})")

    # Tokenize the header, skipping '#' comments to end of line.
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        tokens.append(data[start:pos])
    w, h, maxval = (int(t) for t in tokens)
    if maxval < 1 or maxval > 255:
        raise ValueError(f"unsupported maxval {maxval}")

    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        raster = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos)
    else:
        values = data[pos:].split()
        if len(values) < w * h:
            raise ValueError(f"expected {w * h} pixels, found {len(values)}")
        raster = np.array([int(v) for v in values[: w * h]], dtype=np.uint8)
    pixels = raster.astype(float).reshape(h, w) / float(maxval)
    return GrayImage(width=w, height=h, pixels=pixels)


def synthetic_portrait(w: int = 96, h: int = 96) -> GrayImage:
    """Deterministic stand-in subject for the noising demos: radial vignette
    with a bright diagonal band."""
    ys, xs = np.mgrid[0:h, 0:w]
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    r = np.sqrt(((xs - cx) / w) ** 2 + ((ys - cy) / h) ** 2)
    band = np.exp(-(((xs - ys) / (0.18 * (w + h))) ** 2))
    img = np.clip(0.85 - 1.1 * r + 0.35 * band, 0.0, 1.0)
    return GrayImage(width=w, height=h, pixels=img)
