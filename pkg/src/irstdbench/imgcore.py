"""Core raster types, statistics, windowed operations, and file I/O.

Images are plain 2-D float64 numpy arrays (row-major, indexed ``img[y, x]``).
Binary images are 2-D bool arrays of the same shape. All pixel coordinates
exchanged with the outside world (ground-truth JSON, masks, bounding boxes)
are ``(x, y)`` pairs.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import uniform_filter


# documented aliases: a grayscale raster is a 2-D float64 array, a binary
# raster a 2-D bool array of the same shape
GrayImage = np.ndarray
BinaryImage = np.ndarray


class ImageFormatError(ValueError):
    """Base class for image decoding failures."""


class MalformedHeaderError(ImageFormatError):
    pass


class TruncatedPayloadError(ImageFormatError):
    pass


class UnsupportedBitDepthError(ImageFormatError):
    pass


def as_gray(img) -> np.ndarray:
    """Validate and coerce an array-like into a float64 grayscale raster.

    Requires a 2-D array with at least one pixel and all-finite samples.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a 2-D raster, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("raster contains non-finite samples")
    return arr


@dataclass(frozen=True)
class RegionStats:
    """Mean / population standard deviation / pixel count of a pixel set."""

    mean: float
    std: float
    count: int


@dataclass(frozen=True)
class TargetRegion:
    """One annotated target: pixel mask, tight bbox, and centroid.

    ``mask`` is an (N, 2) int array of (x, y) coordinates, sorted by (y, x)
    so the representation is canonical. ``bbox`` is inclusive (x0, y0, x1, y1)
    and ``centroid`` is the arithmetic mean of the mask coordinates.
    """

    mask: np.ndarray
    bbox: tuple[int, int, int, int]
    centroid: tuple[float, float]

    @classmethod
    def from_mask(cls, coords) -> "TargetRegion":
        mask = np.atleast_2d(np.asarray(coords, dtype=np.int64))
        if mask.size == 0 or mask.shape[1] != 2:
            raise ValueError("target mask must be a non-empty list of (x, y) pairs")
        order = np.lexsort((mask[:, 0], mask[:, 1]))
        mask = mask[order]
        if len(np.unique(mask, axis=0)) != len(mask):
            raise ValueError("target mask contains duplicate pixels")
        x0, y0 = mask.min(axis=0)
        x1, y1 = mask.max(axis=0)
        cx, cy = mask.mean(axis=0)
        return cls(mask=mask, bbox=(int(x0), int(y0), int(x1), int(y1)),
                   centroid=(float(cx), float(cy)))

    @classmethod
    def from_bbox(cls, x0: int, y0: int, x1: int, y1: int) -> "TargetRegion":
        """Build a region whose mask fills the whole (inclusive) bbox."""
        if x1 < x0 or y1 < y0:
            raise ValueError(f"degenerate bbox ({x0},{y0},{x1},{y1})")
        xs, ys = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
        return cls.from_mask(np.column_stack([xs.ravel(), ys.ravel()]))

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        """(ys, xs) index arrays for fancy-indexing an image."""
        return self.mask[:, 1], self.mask[:, 0]

    def pixel_set(self) -> set[tuple[int, int]]:
        return {(int(x), int(y)) for x, y in self.mask}


@dataclass
class GroundTruth:
    """Target annotations for one image."""

    targets: list[TargetRegion]
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("ground truth needs positive image dimensions")
        seen: set[tuple[int, int]] = set()
        for t in self.targets:
            px = t.pixel_set()
            if not px:
                raise ValueError("empty target mask")
            for x, y in px:
                if not (0 <= x < self.width and 0 <= y < self.height):
                    raise ValueError(f"target pixel ({x},{y}) outside image bounds")
            if seen & px:
                raise ValueError("target masks overlap")
            seen |= px

    def mask_image(self) -> np.ndarray:
        """Boolean image marking the union of all target masks."""
        out = np.zeros((self.height, self.width), dtype=bool)
        for t in self.targets:
            ys, xs = t.indices()
            out[ys, xs] = True
        return out

    def total_target_pixels(self) -> int:
        return sum(len(t.mask) for t in self.targets)

    def to_json_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "targets": [
                {
                    "bbox": list(t.bbox),
                    "mask": [[int(x), int(y)] for x, y in t.mask],
                    "centroid": [t.centroid[0], t.centroid[1]],
                }
                for t in self.targets
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "GroundTruth":
        targets = []
        for td in d.get("targets", []):
            if td.get("mask"):
                region = TargetRegion.from_mask(td["mask"])
            else:
                # absent mask means the full bbox
                x0, y0, x1, y1 = td["bbox"]
                region = TargetRegion.from_bbox(x0, y0, x1, y1)
            targets.append(region)
        return cls(targets=targets, width=int(d["width"]), height=int(d["height"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "GroundTruth":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

def global_stats(img) -> RegionStats:
    """Mean and population standard deviation over the whole raster."""
    arr = as_gray(img)
    return RegionStats(mean=float(arr.mean()), std=float(arr.std()),
                       count=int(arr.size))


def local_stats(img, n_side: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel mean and population std over an n_side x n_side window.

    Borders use replicate padding. The variance is computed on samples
    centered by the global mean, which keeps the running-sum formulation
    stable for rasters with a large constant offset.
    """
    if n_side % 2 == 0 or n_side < 3:
        raise ValueError(f"window side must be odd and >= 3, got {n_side}")
    arr = as_gray(img)
    offset = arr.mean()
    centered = arr - offset
    m1 = uniform_filter(centered, size=n_side, mode="nearest")
    m2 = uniform_filter(centered * centered, size=n_side, mode="nearest")
    var = np.clip(m2 - m1 * m1, 0.0, None)
    return m1 + offset, np.sqrt(var)


def region_stats(img, region) -> RegionStats:
    """Mean / population std restricted to a pixel set.

    ``region`` is a TargetRegion or an (N, 2) array of (x, y) coordinates.
    """
    arr = as_gray(img)
    if isinstance(region, TargetRegion):
        ys, xs = region.indices()
    else:
        coords = np.atleast_2d(np.asarray(region, dtype=np.int64))
        if coords.size == 0:
            raise ValueError("empty region")
        xs, ys = coords[:, 0], coords[:, 1]
    if xs.size == 0:
        raise ValueError("empty region")
    if (xs.min() < 0 or ys.min() < 0
            or xs.max() >= arr.shape[1] or ys.max() >= arr.shape[0]):
        raise ValueError("region outside image bounds")
    vals = arr[ys, xs]
    return RegionStats(mean=float(vals.mean()), std=float(vals.std()),
                       count=int(vals.size))


def dilate_coords(coords, radius: int, width: int, height: int) -> np.ndarray:
    """Square (Chebyshev) dilation of a coordinate set, clipped to bounds.

    Returns an (M, 2) array of (x, y) pairs sorted by (y, x).
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
    if radius < 0:
        raise ValueError("radius must be >= 0")
    offs = np.arange(-radius, radius + 1)
    dx, dy = np.meshgrid(offs, offs)
    shifted = coords[:, None, :] + np.stack([dx.ravel(), dy.ravel()], axis=1)[None, :, :]
    flat = shifted.reshape(-1, 2)
    keep = ((flat[:, 0] >= 0) & (flat[:, 0] < width)
            & (flat[:, 1] >= 0) & (flat[:, 1] < height))
    flat = np.unique(flat[keep], axis=0)
    order = np.lexsort((flat[:, 0], flat[:, 1]))
    return flat[order]


def background_ring(target: TargetRegion, width: int,
                    image_width: int, image_height: int,
                    exclusion: int = 1) -> np.ndarray:
    """Background neighborhood of a target.

    Pixels inside the target bbox dilated by ``width``, minus the target mask
    dilated by ``exclusion``, clipped to the image. Raises if the ring ends up
    empty after clipping.
    """
    if width < 1:
        raise ValueError("ring width must be >= 1")
    x0, y0, x1, y1 = target.bbox
    gx0, gy0 = max(0, x0 - width), max(0, y0 - width)
    gx1, gy1 = min(image_width - 1, x1 + width), min(image_height - 1, y1 + width)
    xs, ys = np.meshgrid(np.arange(gx0, gx1 + 1), np.arange(gy0, gy1 + 1))
    block = np.column_stack([xs.ravel(), ys.ravel()])
    excluded = dilate_coords(target.mask, exclusion, image_width, image_height)
    excl_set = {(int(x), int(y)) for x, y in excluded}
    keep = np.array([(x, y) not in excl_set for x, y in block], dtype=bool)
    ring = block[keep]
    if ring.size == 0:
        raise ValueError("background ring empty after clipping")
    order = np.lexsort((ring[:, 0], ring[:, 1]))
    return ring[order]


# ---------------------------------------------------------------------------
# raster file I/O
# ---------------------------------------------------------------------------

_PGM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*([^\s#]+)")


def _pgm_tokens(data: bytes, count: int, start: int) -> tuple[list[bytes], int]:
    """Read whitespace/comment-separated header tokens from PGM bytes."""
    toks = []
    pos = start
    for _ in range(count):
        m = _PGM_TOKEN.match(data, pos)
        if not m:
            raise MalformedHeaderError("incomplete PGM header")
        toks.append(m.group(1))
        pos = m.end()
    return toks, pos


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise MalformedHeaderError("not a PGM file (expected P2 or P5 magic)")
    magic = data[:2]
    toks, pos = _pgm_tokens(data, 3, 2)
    try:
        w, h, maxval = (int(t) for t in toks)
    except ValueError as exc:
        raise MalformedHeaderError(f"non-integer PGM header token: {exc}") from exc
    if w < 1 or h < 1:
        raise MalformedHeaderError(f"bad PGM dimensions {w}x{h}")
    if maxval <= 0 or maxval > 65535:
        raise UnsupportedBitDepthError(f"unsupported PGM maxval {maxval}")
    n = w * h
    if magic == b"P2":
        try:
            vals = np.array(data[pos:].split(), dtype=np.int64)
        except ValueError as exc:
            raise TruncatedPayloadError(f"bad P2 sample: {exc}") from exc
        if vals.size < n:
            raise TruncatedPayloadError(
                f"P2 payload has {vals.size} samples, expected {n}")
        vals = vals[:n]
    else:
        # single whitespace byte separates header from raster
        payload = data[pos + 1:]
        itemsize = 1 if maxval < 256 else 2
        if len(payload) < n * itemsize:
            raise TruncatedPayloadError(
                f"P5 payload has {len(payload)} bytes, expected {n * itemsize}")
        dtype = np.uint8 if itemsize == 1 else np.dtype(">u2")
        vals = np.frombuffer(payload[:n * itemsize], dtype=dtype).astype(np.int64)
    if vals.min() < 0 or vals.max() > maxval:
        raise TruncatedPayloadError("PGM sample outside [0, maxval]")
    return vals.reshape(h, w).astype(np.float64)


def write_pgm(path, img, maxval: int | None = None, plain: bool = False) -> None:
    """Write integer-valued samples as PGM (binary P5 by default).

    Samples must already be integers in [0, maxval]; no rescaling happens.
    """
    arr = as_gray(img)
    rounded = np.rint(arr)
    if not np.allclose(arr, rounded, atol=1e-9):
        raise ValueError("PGM output requires integer-valued samples")
    ivals = rounded.astype(np.int64)
    if maxval is None:
        maxval = 255 if ivals.max() <= 255 else 65535
    if maxval <= 0 or maxval > 65535:
        raise UnsupportedBitDepthError(f"unsupported PGM maxval {maxval}")
    if ivals.min() < 0 or ivals.max() > maxval:
        raise ValueError("sample outside [0, maxval]")
    h, w = ivals.shape
    header = f"{'P2' if plain else 'P5'}\n{w} {h}\n{maxval}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if plain:
            lines = [" ".join(str(v) for v in row) for row in ivals]
            fh.write(("\n".join(lines) + "\n").encode("ascii"))
        else:
            dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
            fh.write(ivals.astype(dtype).tobytes())


def read_png(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                arr = np.asarray(im, dtype=np.int64)
            elif mode in ("I", "I;16", "I;16B"):
                arr = np.asarray(im.convert("I"), dtype=np.int64)
            else:
                raise UnsupportedBitDepthError(
                    f"unsupported PNG mode {mode!r} (need 8/16-bit gray)")
    except ImageFormatError:
        raise
    except OSError as exc:
        if "truncated" in str(exc).lower():
            raise TruncatedPayloadError(str(exc)) from exc
        raise MalformedHeaderError(str(exc)) from exc
    if arr.min() < 0 or arr.max() > 65535:
        raise UnsupportedBitDepthError("PNG samples outside 16-bit range")
    return arr.astype(np.float64)


def write_png(path, img, maxval: int | None = None) -> None:
    arr = as_gray(img)
    rounded = np.rint(arr)
    if not np.allclose(arr, rounded, atol=1e-9):
        raise ValueError("PNG output requires integer-valued samples")
    ivals = rounded.astype(np.int64)
    if maxval is None:
        maxval = 255 if ivals.max() <= 255 else 65535
    if ivals.min() < 0 or ivals.max() > maxval:
        raise ValueError("sample outside [0, maxval]")
    if maxval <= 255:
        Image.fromarray(ivals.astype(np.uint8), mode="L").save(path, format="PNG")
    elif maxval <= 65535:
        Image.fromarray(ivals.astype(np.uint16)).save(path, format="PNG")
    else:
        raise UnsupportedBitDepthError(f"unsupported PNG maxval {maxval}")


def load_gray(path, fmt: str | None = None) -> np.ndarray:
    """Load an 8/16-bit grayscale raster, preserving integer levels exactly.

    ``fmt`` may force 'pgm' or 'png'; by default the file suffix decides.
    """
    p = Path(path)
    kind = (fmt or p.suffix.lstrip(".")).lower()
    if kind == "pgm":
        return read_pgm(p)
    if kind == "png":
        return read_png(p)
    raise ImageFormatError(f"unknown raster format {kind!r}")


def save_gray(path, img, maxval: int | None = None, plain: bool = False) -> None:
    p = Path(path)
    kind = p.suffix.lstrip(".").lower()
    if kind == "pgm":
        write_pgm(p, img, maxval=maxval, plain=plain)
    elif kind == "png":
        write_png(p, img, maxval=maxval)
    else:
        raise ImageFormatError(f"unknown raster format {kind!r}")


def scale_to_levels(img, maxval: int = 65535) -> tuple[np.ndarray, dict]:
    """Affine-rescale a real map onto [0, maxval] integer levels.

    Returns the quantized raster and a sidecar dict with the inverse map
    (value = vmin + level * (vmax - vmin) / maxval).
    """
    arr = as_gray(img)
    vmin, vmax = float(arr.min()), float(arr.max())
    if vmax > vmin:
        levels = np.rint((arr - vmin) * (maxval / (vmax - vmin)))
    else:
        levels = np.zeros_like(arr)
    sidecar = {"vmin": vmin, "vmax": vmax, "maxval": int(maxval)}
    return levels, sidecar


# ---------------------------------------------------------------------------
# delimited output
# ---------------------------------------------------------------------------

FLOAT_FMT = "%.12g"


def write_csv(path, header: list[str], rows) -> None:
    """Write a minimal CSV with >= 9 significant digits per float."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, str):
                cells.append(v)
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(FLOAT_FMT % float(v))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a CSV written by write_csv; numeric cells only."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines:
        raise ValueError(f"empty CSV {path}")
    header = lines[0].split(",")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]],
                    dtype=np.float64)
    return header, data


def write_map_csv(path, img) -> None:
    """Full-precision dump of a raster, one image row per CSV line."""
    arr = as_gray(img)
    np.savetxt(path, arr, delimiter=",", fmt="%.17g")


def read_map_csv(path) -> np.ndarray:
    arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return as_gray(arr)
