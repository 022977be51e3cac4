"""Photon event tables, count images, region patches and spectra.

Coordinates follow the image convention used everywhere in the package:
``x`` is the column axis and ``y`` the row axis, so an event at
``(x, y)`` lands in pixel ``(floor(y), floor(x))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import BoundsError, ConfigError, DomainError, ParseError

DEFAULT_BAND_LO = 0.5
DEFAULT_BAND_HI = 3.0
DEFAULT_NBINS = 25


@dataclass(frozen=True)
class Event:
    x: float
    y: float
    energy: float

    def __post_init__(self):
        if not self.energy > 0:
            raise DomainError(f"event energy must be > 0 keV, got {self.energy}")


@dataclass(frozen=True)
class EnergyBand:
    lo: float = DEFAULT_BAND_LO
    hi: float = DEFAULT_BAND_HI
    nbins: int = DEFAULT_NBINS

    def __post_init__(self):
        if int(self.nbins) != self.nbins or self.nbins <= 0:
            raise ConfigError(f"nbins must be a positive integer, got {self.nbins}")
        if not self.lo < self.hi:
            raise ConfigError(f"energy band needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.nbins


class EventTable:
    """Immutable column store of photon events inside a ``width x height`` frame."""

    def __init__(self, x, y, energy, width: int, height: int):
        if int(width) != width or int(height) != height or width <= 0 or height <= 0:
            raise DomainError(f"extent must be positive integers, got {width}x{height}")
        x = np.array(x, dtype=float).ravel()
        y = np.array(y, dtype=float).ravel()
        energy = np.array(energy, dtype=float).ravel()
        if not (x.shape == y.shape == energy.shape):
            raise DomainError("x, y and energy columns differ in length")
        if energy.size and not np.all(energy > 0):
            raise DomainError("event energy must be > 0 keV")
        outside = (x < 0) | (x >= width) | (y < 0) | (y >= height)
        if np.any(outside):
            k = int(np.flatnonzero(outside)[0])
            raise BoundsError(
                f"event {k} at ({x[k]}, {y[k]}) lies outside [0,{width})x[0,{height})"
            )
        for arr in (x, y, energy):
            arr.flags.writeable = False
        self.x, self.y, self.energy = x, y, energy
        self.width, self.height = int(width), int(height)

    @classmethod
    def from_events(cls, events, width: int, height: int) -> "EventTable":
        events = list(events)
        return cls(
            [e.x for e in events], [e.y for e in events], [e.energy for e in events],
            width, height,
        )

    def __len__(self) -> int:
        return self.x.size

    def __iter__(self) -> Iterator[Event]:
        for x, y, e in zip(self.x, self.y, self.energy):
            yield Event(float(x), float(y), float(e))

    @property
    def events(self) -> list[Event]:
        return list(self)

    def __eq__(self, other):
        if not isinstance(other, EventTable):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.energy, other.energy)
        )

    def __repr__(self):
        return f"EventTable(n={len(self)}, extent={self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class RegionPatch:
    """Sub-image around a candidate peak.

    ``origin`` is the top-left corner in the parent image and ``center`` the
    peak position, both in parent-image (row, col) coordinates.
    """

    counts: np.ndarray
    origin: tuple[int, int]
    center: tuple[int, int]

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    @property
    def area(self) -> int:
        return self.counts.size

    @property
    def local_center(self) -> tuple[int, int]:
        return self.center[0] - self.origin[0], self.center[1] - self.origin[1]

    @property
    def peak_value(self):
        return self.counts[self.local_center]


def load_events(path) -> EventTable:
    """Read an event CSV: ``width,height`` header then ``x,y,energy`` rows."""
    path = Path(path)
    extent = None
    xs, ys, es = [], [], []
    with path.open("r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if extent is None:
                if len(fields) != 2:
                    raise ParseError("header must be 'width,height'", lineno)
                try:
                    extent = (int(fields[0]), int(fields[1]))
                except ValueError:
                    raise ParseError(f"bad extent {line!r}", lineno) from None
                if extent[0] <= 0 or extent[1] <= 0:
                    raise ParseError(f"extent must be positive, got {line!r}", lineno)
                continue
            if len(fields) != 3:
                raise ParseError(f"expected 'x,y,energy', got {line!r}", lineno)
            try:
                x, y, e = (float(f) for f in fields)
            except ValueError:
                raise ParseError(f"non-numeric field in {line!r}", lineno) from None
            if not e > 0:
                raise DomainError(f"line {lineno}: energy must be > 0 keV, got {e}")
            if not (0 <= x < extent[0] and 0 <= y < extent[1]):
                raise BoundsError(
                    f"line {lineno}: event ({x}, {y}) outside {extent[0]}x{extent[1]}"
                )
            xs.append(x)
            ys.append(y)
            es.append(e)
    if extent is None:
        raise ParseError("missing 'width,height' header", 1)
    return EventTable(xs, ys, es, *extent)


def save_events(table: EventTable, path) -> None:
    lines = [f"{table.width},{table.height}"]
    lines += [f"{x!r},{y!r},{e!r}" for x, y, e in zip(table.x.tolist(), table.y.tolist(),
                                                      table.energy.tolist())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _in_band(table: EventTable, band: EnergyBand) -> np.ndarray:
    return (table.energy >= band.lo) & (table.energy < band.hi)


def bin_image(table: EventTable, band: EnergyBand = EnergyBand()) -> np.ndarray:
    """Histogram in-band events into an integer ``(height, width)`` count image."""
    keep = _in_band(table, band)
    rows = np.floor(table.y[keep]).astype(np.intp)
    cols = np.floor(table.x[keep]).astype(np.intp)
    flat = np.bincount(rows * table.width + cols, minlength=table.width * table.height)
    return flat.reshape(table.height, table.width).astype(np.int64)


def extract_region(image: np.ndarray, center, window: int) -> RegionPatch:
    """Cut the ``window x window`` square around ``center``, shrinking at borders."""
    if window < 3 or window % 2 == 0:
        raise ConfigError(f"window must be odd and >= 3, got {window}")
    image = np.asarray(image)
    r, c = int(center[0]), int(center[1])
    nrows, ncols = image.shape
    if not (0 <= r < nrows and 0 <= c < ncols):
        raise BoundsError(f"center {(r, c)} outside {nrows}x{ncols} image")
    half = window // 2
    r0, r1 = max(0, r - half), min(nrows, r + half + 1)
    c0, c1 = max(0, c - half), min(ncols, c + half + 1)
    counts = image[r0:r1, c0:c1].copy()
    counts.flags.writeable = False
    return RegionPatch(counts=counts, origin=(r0, c0), center=(r, c))


def extract_spectrum(
    table: EventTable, patch: RegionPatch, band: EnergyBand = EnergyBand()
) -> np.ndarray:
    """Per-pixel spectrum of the events inside the patch footprint.

    Returns a length-``band.nbins`` vector of counts per pixel per energy bin.
    """
    if band.nbins <= 0:
        raise ConfigError("nbins must be positive")
    m, n = patch.shape
    r0, c0 = patch.origin
    if r0 + m > table.height or c0 + n > table.width:
        raise BoundsError("patch extends beyond the event table extent")
    rows = np.floor(table.y)
    cols = np.floor(table.x)
    inside = (rows >= r0) & (rows < r0 + m) & (cols >= c0) & (cols < c0 + n)
    energy = table.energy[inside & _in_band(table, band)]
    idx = np.floor((energy - band.lo) / band.width).astype(np.intp)
    idx = np.clip(idx, 0, band.nbins - 1)
    return np.bincount(idx, minlength=band.nbins).astype(float) / (m * n)
