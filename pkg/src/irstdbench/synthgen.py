"""Deterministic synthetic IR scene generator with ground truth.

Scenes are built as background + sum of Gaussian-shaped targets + seeded
Gaussian noise. The ground-truth mask of a target is the set of pixels where
its noiseless contribution exceeds a fixed fraction of its amplitude
(5 % by default), a concrete stand-in for the blurred target boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imgcore import GroundTruth, TargetRegion

DEFAULT_MASK_CUT = 0.05


@dataclass(frozen=True)
class FlatBackground:
    level: float

    def render(self, width: int, height: int) -> np.ndarray:
        return np.full((height, width), float(self.level))


@dataclass(frozen=True)
class GradientBackground:
    """Linear ramp from ``low`` to ``high`` along the given axis ('x' or 'y')."""

    low: float
    high: float
    axis: str = "x"

    def render(self, width: int, height: int) -> np.ndarray:
        if self.axis not in ("x", "y"):
            raise ValueError(f"gradient axis must be 'x' or 'y', got {self.axis!r}")
        n = width if self.axis == "x" else height
        ramp = np.linspace(self.low, self.high, n)
        if self.axis == "x":
            return np.tile(ramp, (height, 1))
        return np.tile(ramp[:, None], (1, width))


@dataclass(frozen=True)
class ClutterBackground:
    """Seeded field of broad Gaussian blobs over a flat base level.

    Blob edges are the stress case for detectors that key on local contrast.
    """

    count: int
    spread: float
    seed: int
    amplitude: float = 50.0
    level: float = 20.0

    def render(self, width: int, height: int) -> np.ndarray:
        if self.count < 1:
            raise ValueError("clutter needs at least one blob")
        if self.spread <= 0:
            raise ValueError("blob spread must be positive")
        rng = np.random.default_rng(self.seed)
        out = np.full((height, width), float(self.level))
        yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
        for _ in range(self.count):
            cx = rng.uniform(0, width - 1)
            cy = rng.uniform(0, height - 1)
            s = rng.uniform(0.7, 1.3) * self.spread
            a = rng.uniform(0.4, 1.0) * self.amplitude
            out += a * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * s * s))
        return out


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise; the seed is mandatory when sigma > 0."""

    sigma: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("noise sigma must be >= 0")
        if self.sigma > 0 and self.seed is None:
            raise ValueError("noise requires an explicit seed")


@dataclass(frozen=True)
class TargetSpec:
    """Gaussian-shaped point target."""

    cx: float
    cy: float
    amplitude: float
    sigma: float

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ValueError("target amplitude must be positive")
        if self.sigma <= 0:
            raise ValueError("target spread must be positive")

    def field(self, width: int, height: int) -> np.ndarray:
        yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
        d2 = (xx - self.cx) ** 2 + (yy - self.cy) ** 2
        return self.amplitude * np.exp(-d2 / (2 * self.sigma ** 2))


@dataclass
class SceneSpec:
    size: tuple[int, int]                  # (width, height)
    background: FlatBackground | GradientBackground | ClutterBackground
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    targets: list[TargetSpec] = field(default_factory=list)
    mask_cut: float = DEFAULT_MASK_CUT
    name: str = ""

    def __post_init__(self):
        w, h = self.size
        if w < 1 or h < 1:
            raise ValueError("scene size must be positive")
        if not (0.0 < self.mask_cut < 1.0):
            raise ValueError("mask cut must be in (0, 1)")

    def to_json_dict(self) -> dict:
        bg = self.background
        if isinstance(bg, FlatBackground):
            bgd = {"kind": "flat", "level": bg.level}
        elif isinstance(bg, GradientBackground):
            bgd = {"kind": "gradient", "low": bg.low, "high": bg.high,
                   "axis": bg.axis}
        else:
            bgd = {"kind": "clutter", "count": bg.count, "spread": bg.spread,
                   "seed": bg.seed, "amplitude": bg.amplitude, "level": bg.level}
        return {
            "name": self.name,
            "size": list(self.size),
            "background": bgd,
            "noise": {"sigma": self.noise.sigma, "seed": self.noise.seed},
            "targets": [{"centroid": [t.cx, t.cy], "amplitude": t.amplitude,
                         "sigma": t.sigma} for t in self.targets],
            "mask_cut": self.mask_cut,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SceneSpec":
        bgd = d["background"]
        kind = bgd["kind"]
        if kind == "flat":
            bg = FlatBackground(level=float(bgd["level"]))
        elif kind == "gradient":
            bg = GradientBackground(low=float(bgd["low"]), high=float(bgd["high"]),
                                    axis=bgd.get("axis", "x"))
        elif kind == "clutter":
            bg = ClutterBackground(count=int(bgd["count"]),
                                   spread=float(bgd["spread"]),
                                   seed=int(bgd["seed"]),
                                   amplitude=float(bgd.get("amplitude", 50.0)),
                                   level=float(bgd.get("level", 20.0)))
        else:
            raise ValueError(f"unknown background kind {kind!r}")
        nd = d.get("noise", {})
        noise = NoiseSpec(sigma=float(nd.get("sigma", 0.0)),
                          seed=None if nd.get("seed") is None else int(nd["seed"]))
        targets = [TargetSpec(cx=float(t["centroid"][0]), cy=float(t["centroid"][1]),
                              amplitude=float(t["amplitude"]), sigma=float(t["sigma"]))
                   for t in d.get("targets", [])]
        return cls(size=(int(d["size"][0]), int(d["size"][1])), background=bg,
                   noise=noise, targets=targets,
                   mask_cut=float(d.get("mask_cut", DEFAULT_MASK_CUT)),
                   name=d.get("name", ""))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "SceneSpec":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


@dataclass
class Scene:
    image: np.ndarray
    gt: GroundTruth
    spec: SceneSpec


def _target_mask(t: TargetSpec, width: int, height: int,
                 mask_cut: float) -> TargetRegion:
    """Pixels where the noiseless contribution exceeds mask_cut * amplitude."""
    r = t.sigma * math.sqrt(-2.0 * math.log(mask_cut))
    x0, x1 = math.floor(t.cx - r), math.ceil(t.cx + r)
    y0, y1 = math.floor(t.cy - r), math.ceil(t.cy + r)
    coords = []
    cut = mask_cut * t.amplitude
    for y in range(y0, y1 + 1):
        for x in range(x0, x1 + 1):
            d2 = (x - t.cx) ** 2 + (y - t.cy) ** 2
            if t.amplitude * math.exp(-d2 / (2 * t.sigma ** 2)) > cut:
                if not (0 <= x < width and 0 <= y < height):
                    raise ValueError(
                        f"target at ({t.cx},{t.cy}) has footprint outside bounds")
                coords.append((x, y))
    if not coords:
        raise ValueError(f"target at ({t.cx},{t.cy}) has an empty mask")
    return TargetRegion.from_mask(coords)


def render(spec: SceneSpec) -> Scene:
    """Render a scene; identical spec (and seeds) gives a bit-identical image."""
    w, h = spec.size
    img = spec.background.render(w, h)
    regions = []
    for t in spec.targets:
        img = img + t.field(w, h)
        regions.append(_target_mask(t, w, h, spec.mask_cut))
    gt = GroundTruth(targets=regions, width=w, height=h)  # rejects overlaps
    if spec.noise.sigma > 0:
        rng = np.random.default_rng(spec.noise.seed)
        img = img + rng.normal(0.0, spec.noise.sigma, size=(h, w))
    return Scene(image=img, gt=gt, spec=spec)


def standard_suite() -> list[Scene]:
    """Six fixed, seeded scenes exercising the evaluation pipeline.

    1. low-noise single target on a flat background
    2. strong-noise single target
    3. target-free noisy background (false-alarm behavior only)
    4. three disjoint targets of different size and brightness
    5. single target on a linear illumination gradient
    6. single target among broad clutter blobs (clutter-edge stress)
    """
    specs = [
        SceneSpec(name="scene1-low-noise", size=(128, 128),
                  background=FlatBackground(30.0),
                  noise=NoiseSpec(sigma=2.0, seed=101),
                  targets=[TargetSpec(64.0, 64.0, 120.0, 1.4)]),
        SceneSpec(name="scene2-strong-noise", size=(128, 128),
                  background=FlatBackground(40.0),
                  noise=NoiseSpec(sigma=8.0, seed=202),
                  targets=[TargetSpec(48.0, 72.0, 140.0, 1.6)]),
        SceneSpec(name="scene3-target-free", size=(128, 128),
                  background=FlatBackground(35.0),
                  noise=NoiseSpec(sigma=4.0, seed=303),
                  targets=[]),
        SceneSpec(name="scene4-multi-target", size=(128, 128),
                  background=FlatBackground(30.0),
                  noise=NoiseSpec(sigma=3.0, seed=404),
                  targets=[TargetSpec(32.0, 36.0, 90.0, 1.2),
                           TargetSpec(84.0, 52.0, 130.0, 1.8),
                           TargetSpec(56.0, 100.0, 110.0, 1.5)]),
        SceneSpec(name="scene5-gradient", size=(128, 128),
                  background=GradientBackground(10.0, 90.0, axis="x"),
                  noise=NoiseSpec(sigma=2.0, seed=505),
                  targets=[TargetSpec(80.0, 40.0, 110.0, 1.4)]),
        SceneSpec(name="scene6-clutter-edges", size=(128, 128),
                  background=ClutterBackground(count=6, spread=5.0, seed=606,
                                               amplitude=45.0, level=20.0),
                  noise=NoiseSpec(sigma=2.0, seed=707),
                  targets=[TargetSpec(96.0, 96.0, 120.0, 1.2)]),
    ]
    return [render(s) for s in specs]
