"""Synthetic photon-event scenes with planted sources and known ground truth."""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError
from .events import DEFAULT_BAND_HI, DEFAULT_BAND_LO, EventTable
from .gbt import SourceClass

E_LO, E_HI = DEFAULT_BAND_LO, DEFAULT_BAND_HI
BRIGHT_THRESHOLD = 200.0
POINT_SIGMA_MAX = 2.5
EXTENDED_SIGMA_MIN = 6.0

_SPECTRUM_RE = re.compile(r"^\s*(powerlaw|thermal|flat)\s*(?:\(\s*([-+0-9.eE]+)\s*\))?\s*$")


@dataclass(frozen=True)
class SpectrumModel:
    kind: str = "flat"
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in ("powerlaw", "thermal", "flat"):
            raise DomainError(f"unknown spectrum kind {self.kind!r}")
        if self.kind == "thermal" and not self.param > 0:
            raise DomainError("thermal spectrum needs kT > 0")

    @classmethod
    def parse(cls, text: str) -> "SpectrumModel":
        m = _SPECTRUM_RE.match(text)
        if not m:
            raise DomainError(f"cannot parse spectrum {text!r}")
        return cls(m.group(1), float(m.group(2)) if m.group(2) else 0.0)

    def __str__(self):
        return self.kind if self.kind == "flat" else f"{self.kind}({self.param!r})"

    def sample(self, rng: np.random.Generator, n: int, lo: float = E_LO,
               hi: float = E_HI) -> np.ndarray:
        """Inverse-CDF draws from the model truncated to ``[lo, hi)``."""
        u = rng.random(n)
        if self.kind == "flat":
            e = lo + u * (hi - lo)
        elif self.kind == "powerlaw":
            s = 1.0 - self.param
            if abs(s) < 1e-12:
                e = lo * (hi / lo) ** u
            else:
                a, b = lo**s, hi**s
                e = (a + u * (b - a)) ** (1.0 / s)
        else:
            kt = self.param
            a, b = math.exp(-lo / kt), math.exp(-hi / kt)
            e = -kt * np.log(a - u * (a - b))
        return np.clip(e, lo, np.nextafter(hi, lo))


POWERLAW = SpectrumModel("powerlaw", 1.7)
THERMAL = SpectrumModel("thermal", 1.0)
FLAT = SpectrumModel("flat")


@dataclass(frozen=True)
class SourceSpec:
    kind: str
    center: tuple[float, float]  # (x, y)
    total_counts: float
    sigma_major: float
    sigma_minor: float
    angle: float = 0.0
    spectrum: SpectrumModel = POWERLAW

    def __post_init__(self):
        if self.kind not in ("point", "extended"):
            raise DomainError(f"source kind must be 'point' or 'extended', got {self.kind!r}")
        if not self.total_counts > 0:
            raise DomainError("total_counts must be > 0")
        if not (self.sigma_major > 0 and self.sigma_minor > 0):
            raise DomainError("source widths must be > 0")
        if self.kind == "point" and self.sigma_major > POINT_SIGMA_MAX:
            raise DomainError(f"point source sigma_major must be <= {POINT_SIGMA_MAX}")
        if self.kind == "extended" and self.sigma_major < EXTENDED_SIGMA_MIN:
            raise DomainError(f"extended source sigma_major must be >= {EXTENDED_SIGMA_MIN}")


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    bkg_rate: float
    sources: tuple = ()
    seed: int = 0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DomainError("scene extent must be positive")
        if not self.bkg_rate >= 0:
            raise DomainError("bkg_rate must be >= 0")
        for s in self.sources:
            x, y = s.center
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise DomainError(f"source centre {s.center} outside the scene")
        object.__setattr__(self, "sources", tuple(self.sources))


@dataclass(frozen=True)
class TruthSource:
    row: int
    col: int
    class_name: SourceClass
    counts: float = field(default=0.0, compare=False)

    @property
    def position(self) -> tuple[int, int]:
        return self.row, self.col


def truth_class(source: SourceSpec, bright_threshold: float = BRIGHT_THRESHOLD) -> SourceClass:
    if source.kind == "extended":
        return SourceClass.BRIGHT_BKG
    if source.total_counts >= bright_threshold:
        return SourceClass.BRIGHT_PS
    return SourceClass.FAINT_PS


def _source_positions(src: SourceSpec, rng, n: int, width: int, height: int):
    cx, cy = src.center
    ca, sa = math.cos(src.angle), math.sin(src.angle)
    xs, ys = [], []
    need = n
    while need > 0:
        u = rng.standard_normal(need) * src.sigma_major
        v = rng.standard_normal(need) * src.sigma_minor
        x = cx + u * ca - v * sa
        y = cy + u * sa + v * ca
        ok = (x >= 0) & (x < width) & (y >= 0) & (y < height)
        xs.append(x[ok])
        ys.append(y[ok])
        need -= int(ok.sum())
    return np.concatenate(xs)[:n], np.concatenate(ys)[:n]


def simulate(scene: SceneSpec, bright_threshold: float = BRIGHT_THRESHOLD):
    """Draw the photon events of a scene.

    Returns ``(EventTable, truth)`` where ``truth`` lists every planted
    source centre with its class.
    """
    rng = np.random.default_rng(scene.seed)
    w, h = scene.width, scene.height
    n_bkg = rng.poisson(scene.bkg_rate * w * h)
    xs = [rng.random(n_bkg) * w]
    ys = [rng.random(n_bkg) * h]
    es = [FLAT.sample(rng, n_bkg)]
    truth = []
    for src in scene.sources:
        n = rng.poisson(src.total_counts)
        x, y = _source_positions(src, rng, n, w, h)
        xs.append(x)
        ys.append(y)
        es.append(src.spectrum.sample(rng, n))
        truth.append(TruthSource(int(src.center[1]), int(src.center[0]),
                                 truth_class(src, bright_threshold), src.total_counts))
    # float rounding can land exactly on the upper edge
    x = np.minimum(np.concatenate(xs), np.nextafter(w, 0))
    y = np.minimum(np.concatenate(ys), np.nextafter(h, 0))
    return EventTable(x, y, np.concatenate(es), w, h), truth


# -- benchmark ---------------------------------------------------------------

N_TRAIN, N_TEST = 20, 5


def random_scene(seed: int, size: int = 128, bkg_rate: float = 0.1) -> SceneSpec:
    """A scene with ~20 point sources (bright and faint) and 1-2 extended sources."""
    rng = np.random.default_rng(seed)
    sources = []
    ext_zones = []
    for _ in range(int(rng.integers(1, 3))):
        sig = float(rng.uniform(6.0, 9.0))
        for _ in range(1000):
            c = rng.uniform(16.0, size - 16.0, 2)
            if all(np.hypot(*(c - z)) > 3.0 * (sig + zs) for z, zs in ext_zones):
                break
        ext_zones.append((c, sig))
        sources.append(SourceSpec(
            "extended", (float(c[0]), float(c[1])), float(rng.uniform(2000.0, 5000.0)),
            sig, sig * float(rng.uniform(0.7, 1.0)), float(rng.uniform(0, math.pi)), THERMAL,
        ))

    n_ps = int(rng.integers(18, 23))
    placed = []
    attempts = 0
    while len(placed) < n_ps and attempts < 20000:
        attempts += 1
        # pixel-centred so the truth pixel is the true peak pixel
        c = np.floor(rng.uniform(8.0, size - 8.0, 2)) + 0.5
        if any(np.max(np.abs(c - p)) < 14 for p in placed):
            continue
        if any(np.hypot(*(c - z)) < 2.5 * zs + 4 for z, zs in ext_zones):
            continue
        placed.append(c)
    for c in placed:
        if rng.random() < 0.4:
            counts = float(np.exp(rng.uniform(np.log(BRIGHT_THRESHOLD), np.log(1500.0))))
        else:
            counts = float(np.exp(rng.uniform(np.log(50.0), np.log(BRIGHT_THRESHOLD))))
        sig = float(rng.uniform(0.8, 1.6))
        sources.append(SourceSpec(
            "point", (float(c[0]), float(c[1])), counts, sig,
            sig * float(rng.uniform(0.6, 1.0)), float(rng.uniform(0, math.pi)), POWERLAW,
        ))
    return SceneSpec(size, size, bkg_rate, tuple(sources), seed)


def scene_seeds(master_seed: int, n: int = N_TRAIN + N_TEST) -> list[int]:
    children = np.random.SeedSequence(master_seed).spawn(n)
    return [int(c.generate_state(1)[0]) for c in children]


def default_benchmark(seed: int = 0):
    """Return ``(train_scenes, test_scenes)``: 20 training and 5 test scenes."""
    scenes = [random_scene(s) for s in scene_seeds(seed)]
    return scenes[:N_TRAIN], scenes[N_TRAIN:]


# -- files -------------------------------------------------------------------

def write_truth(truth, path) -> None:
    lines = ["row,col,class"] + [f"{t.row},{t.col},{t.class_name.value}" for t in truth]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_truth(path) -> list[TruthSource]:
    out = []
    text = Path(path).read_text(encoding="ascii")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("row,"):
            continue
        try:
            row, col, cls = (f.strip() for f in line.split(","))
            out.append(TruthSource(int(row), int(col), SourceClass(cls)))
        except ValueError:
            raise ParseError(f"expected 'row,col,class', got {line!r}", lineno) from None
    return out


def dump_scene(scene: SceneSpec, path) -> None:
    cp = configparser.ConfigParser()
    cp["scene"] = {"width": str(scene.width), "height": str(scene.height),
                   "bkg_rate": repr(scene.bkg_rate), "seed": str(scene.seed)}
    for k, s in enumerate(scene.sources):
        cp[f"source.{k}"] = {
            "kind": s.kind, "x": repr(s.center[0]), "y": repr(s.center[1]),
            "total_counts": repr(s.total_counts), "sigma_major": repr(s.sigma_major),
            "sigma_minor": repr(s.sigma_minor), "angle": repr(s.angle),
            "spectrum": str(s.spectrum),
        }
    with open(path, "w") as fh:
        cp.write(fh)


def load_scene(path) -> SceneSpec:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ParseError(f"cannot read scene file {path}")
    try:
        sc = cp["scene"]
        sources = []
        names = sorted((s for s in cp.sections() if s.startswith("source.")),
                       key=lambda s: int(s.split(".", 1)[1]))
        for name in names:
            s = cp[name]
            kind = s.get("kind", "point")
            default_spec = "powerlaw(1.7)" if kind == "point" else "thermal(1.0)"
            major = s.getfloat("sigma_major")
            sources.append(SourceSpec(
                kind, (s.getfloat("x"), s.getfloat("y")), s.getfloat("total_counts"),
                major, s.getfloat("sigma_minor", major), s.getfloat("angle", 0.0),
                SpectrumModel.parse(s.get("spectrum", default_spec)),
            ))
        return SceneSpec(sc.getint("width"), sc.getint("height"), sc.getfloat("bkg_rate"),
                         tuple(sources), sc.getint("seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise ParseError(f"invalid scene file {path}: {exc}") from None
