"""Detection matching, accuracy, and level-averaged precision/recall."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DomainError, UndefinedMetricError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise DomainError("confusion counts must be non-negative")

    @property
    def n_samples(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.tn + other.tn, self.fn + other.fn)

    def record(self, truth: bool, predicted: bool) -> "ConfusionCounts":
        return self + ConfusionCounts(
            tp=int(truth and predicted), fp=int(predicted and not truth),
            tn=int(not truth and not predicted), fn=int(truth and not predicted),
        )


def chebyshev(a, b) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def match_pairs(candidates, truth, radius: int) -> list[tuple[int, int]]:
    """Greedy nearest-first one-to-one matching within a Chebyshev radius.

    Pairs are taken in order of (Chebyshev distance, squared Euclidean
    distance, candidate index, truth index).  Returns ``(candidate, truth)``
    index pairs.
    """
    if radius < 1:
        raise DomainError("matching radius must be >= 1")
    cand = [tuple(getattr(c, "position", c)) for c in candidates]
    pairs = []
    for ci, c in enumerate(cand):
        for ti, t in enumerate(truth):
            d = chebyshev(c, t)
            if d <= radius:
                pairs.append((d, (c[0] - t[0]) ** 2 + (c[1] - t[1]) ** 2, ci, ti))
    pairs.sort()
    used_c, used_t, out = set(), set(), []
    for _, _, ci, ti in pairs:
        if ci not in used_c and ti not in used_t:
            used_c.add(ci)
            used_t.add(ti)
            out.append((ci, ti))
    return out


def match_detections(candidates, truth, radius: int = 4) -> tuple[int, int, int]:
    """Return ``(n_true, n_false, n_missed)``."""
    n_true = len(match_pairs(candidates, truth, radius))
    return n_true, len(candidates) - n_true, len(truth) - n_true


def accuracy(n_correct_ps: int, n_correct_bkg: int, n_samples: int) -> float:
    """Fraction of recognised point sources plus correctly discarded backgrounds."""
    if n_samples <= 0:
        raise DomainError("accuracy needs at least one sample")
    if n_correct_ps < 0 or n_correct_bkg < 0 or n_correct_ps + n_correct_bkg > n_samples:
        raise DomainError("correct counts must be non-negative and at most n_samples")
    return (n_correct_ps + n_correct_bkg) / n_samples


def precision_recall(per_level) -> tuple[float, float]:
    """Precision and recall from confusion counts averaged over the tree levels."""
    per_level = list(per_level)
    tp = np.mean([c.tp for c in per_level])
    fp = np.mean([c.fp for c in per_level])
    fn = np.mean([c.fn for c in per_level])
    if tp + fp == 0:
        raise UndefinedMetricError("precision")
    if tp + fn == 0:
        raise UndefinedMetricError("recall")
    return float(tp / (tp + fp)), float(tp / (tp + fn))


LEVEL_NAMES = ("L1", "L2L", "L2R")


@dataclass
class EvalReport:
    """Scores for one or more scenes, with the raw counts they derive from.

    ``precision``/``recall`` are ``None`` when undefined; ``status`` then
    names the undefined metric(s).
    """

    n_correct_ps: int = 0
    n_correct_bkg: int = 0
    n_samples: int = 0
    per_level: tuple = field(default_factory=lambda: (ConfusionCounts(),) * 3)
    n_ref: int = 0
    n_true: int = 0
    n_false: int = 0
    accuracy: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    status: str = "ok"

    def finalize(self) -> "EvalReport":
        self.accuracy = (accuracy(self.n_correct_ps, self.n_correct_bkg, self.n_samples)
                         if self.n_samples else None)
        tp, fp, fn = (np.mean([getattr(c, k) for c in self.per_level])
                      for k in ("tp", "fp", "fn"))
        self.precision = float(tp / (tp + fp)) if tp + fp > 0 else None
        self.recall = float(tp / (tp + fn)) if tp + fn > 0 else None
        undefined = [k for k in ("accuracy", "precision", "recall") if getattr(self, k) is None]
        self.status = "ok" if not undefined else "undefined: " + ",".join(undefined)
        return self

    @property
    def detection(self) -> tuple[int, int, int]:
        return self.n_ref, self.n_true, self.n_false

    def __add__(self, other: "EvalReport") -> "EvalReport":
        return EvalReport(
            n_correct_ps=self.n_correct_ps + other.n_correct_ps,
            n_correct_bkg=self.n_correct_bkg + other.n_correct_bkg,
            n_samples=self.n_samples + other.n_samples,
            per_level=tuple(a + b for a, b in zip(self.per_level, other.per_level)),
            n_ref=self.n_ref + other.n_ref,
            n_true=self.n_true + other.n_true,
            n_false=self.n_false + other.n_false,
        ).finalize()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_level"] = {name: asdict(c) for name, c in zip(LEVEL_NAMES, self.per_level)}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        d = dict(d)
        d["per_level"] = tuple(ConfusionCounts(**d["per_level"][n]) for n in LEVEL_NAMES)
        return cls(**d)

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["metric", "value"])
            for key in ("accuracy", "precision", "recall"):
                value = getattr(self, key)
                w.writerow([key, "undefined" if value is None else repr(value)])
            w.writerow(["status", self.status])
            w.writerow([])
            w.writerow(["count", "value"])
            for key in ("n_correct_ps", "n_correct_bkg", "n_samples", "n_ref", "n_true",
                        "n_false"):
                w.writerow([key, getattr(self, key)])
            for name, c in zip(LEVEL_NAMES, self.per_level):
                for key in ("tp", "fp", "tn", "fn"):
                    w.writerow([f"{name}.{key}", getattr(c, key)])


def evaluate_pipeline(model, observation, truth, band=None, detection=None,
                      match_radius: int = 4, bkg_group_radius: float = 20.0) -> EvalReport:
    """Detect, extract features and classify one observation, then score it.

    A candidate is correct when it is called a point source and matches a
    planted point source, or is called background and matches none.  The
    per-level confusions use bright as the positive class at the first
    level and the point-source class at each leaf; a leaf is only scored
    when the first level routed the candidate to its true branch.
    Unmatched candidates within ``bkg_group_radius`` of an extended source
    are treated as bright background, all others as faint background.
    """
    from .detect import DetectionConfig
    from .errors import GBTError
    from .events import EnergyBand
    from .gbt import SourceClass, classify_many
    from .pipeline import Observation, detect_and_extract

    band = band or EnergyBand()
    detection = detection or DetectionConfig()
    try:
        obs = observation if isinstance(observation, Observation) else \
            Observation.from_table(observation, band)
        candidates, feats = detect_and_extract(obs, band, detection)
    except GBTError as exc:
        exc.args = (f"detection stage: {exc}",)
        raise
    try:
        codes = classify_many(model, feats)
    except GBTError as exc:
        exc.args = (f"classification stage: {exc}",)
        raise

    ps = [t for t in truth if t.class_name.is_point_source]
    ext = [t for t in truth if t.class_name is SourceClass.BRIGHT_BKG]
    matched = dict(match_pairs(candidates, [t.position for t in ps], match_radius))

    report = EvalReport(n_ref=len(ps), n_true=len(matched), n_false=len(candidates) - len(matched))
    l1, l2l, l2r = report.per_level
    n_ps = n_bkg = 0
    for k, (cand, code) in enumerate(zip(candidates, codes)):
        if k in matched:
            true_cls = ps[matched[k]].class_name
            n_ps += code.decision == 1
        else:
            near_ext = any(np.hypot(cand.row - t.row, cand.col - t.col) <= bkg_group_radius
                           for t in ext)
            true_cls = SourceClass.BRIGHT_BKG if near_ext else SourceClass.FAINT_BKG
            n_bkg += code.decision == 0
        l1 = l1.record(true_cls.is_bright, code.label1 == 1)
        if code.label1 == 1 and true_cls.is_bright:
            l2l = l2l.record(true_cls.is_point_source, code.label2 == 0)
        elif code.label1 == 0 and not true_cls.is_bright:
            l2r = l2r.record(true_cls.is_point_source, code.label2 == 1)
    report.n_correct_ps, report.n_correct_bkg = int(n_ps), int(n_bkg)
    report.n_samples = len(candidates)
    report.per_level = (l1, l2l, l2r)
    return report.finalize()
