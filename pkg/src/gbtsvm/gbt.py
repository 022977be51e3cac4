"""Two-level binary tree of granular ensembles with XOR decision coding.

Level 1 separates the bright group (bright PS, bright background) from the
faint group.  The bright branch then separates bright PS from bright
background, the faint branch faint PS from faint background.  The final
point-source verdict is ``label1 XOR label2``:

=============  ======  ======  ========
class          label1  label2  decision
=============  ======  ======  ========
bright_ps      1       0       1
bright_bkg     1       1       0
faint_ps       0       1       1
faint_bkg      0       0       0
=============  ======  ======  ========
"""

from __future__ import annotations

import enum
import hashlib
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from . import granular, svm
from .errors import (
    ChecksumError,
    DimensionError,
    ModelFormatError,
    TrainingError,
    TruncatedModelError,
    VersionError,
)
from .features import FeatureScaler, FeatureVector, as_matrix

FORMAT_HEADER = "GBTSVM v1"


class SourceClass(str, enum.Enum):
    BRIGHT_PS = "bright_ps"
    BRIGHT_BKG = "bright_bkg"
    FAINT_PS = "faint_ps"
    FAINT_BKG = "faint_bkg"

    def __str__(self):
        return self.value

    @property
    def is_point_source(self) -> bool:
        return self in (SourceClass.BRIGHT_PS, SourceClass.FAINT_PS)

    @property
    def is_bright(self) -> bool:
        return self in (SourceClass.BRIGHT_PS, SourceClass.BRIGHT_BKG)


_BITS = {
    SourceClass.BRIGHT_PS: (1, 0),
    SourceClass.BRIGHT_BKG: (1, 1),
    SourceClass.FAINT_PS: (0, 1),
    SourceClass.FAINT_BKG: (0, 0),
}
_FROM_BITS = {bits: cls for cls, bits in _BITS.items()}


@dataclass(frozen=True)
class ClassCode:
    label1: int
    label2: int
    decision: int
    class_name: SourceClass

    @property
    def is_point_source(self) -> bool:
        return self.decision == 1


def code_for(label1: int, label2: int) -> ClassCode:
    cls = _FROM_BITS[(int(label1), int(label2))]
    return ClassCode(int(label1), int(label2), int(label1) ^ int(label2), cls)


def code_of_class(cls) -> ClassCode:
    return code_for(*_BITS[SourceClass(cls)])


@dataclass(frozen=True)
class LabeledSample:
    features: FeatureVector
    class_name: SourceClass

    def __post_init__(self):
        object.__setattr__(self, "class_name", SourceClass(self.class_name))


@dataclass(frozen=True)
class _Level:
    name: str
    bit_of: Mapping  # SourceClass -> bit for the classes this level sees
    tags: Mapping  # bit -> tag stored in the model file


LEVELS = (
    _Level("L1", {c: _BITS[c][0] for c in SourceClass}, {1: "bright", 0: "faint"}),
    _Level("L2L", {SourceClass.BRIGHT_PS: 0, SourceClass.BRIGHT_BKG: 1},
           {0: "bright_ps", 1: "bright_bkg"}),
    _Level("L2R", {SourceClass.FAINT_PS: 1, SourceClass.FAINT_BKG: 0},
           {1: "faint_ps", 0: "faint_bkg"}),
)


@dataclass(frozen=True, eq=False)
class GBTModel:
    level1: granular.GranularModel
    level2_left: granular.GranularModel
    level2_right: granular.GranularModel
    nbins: int

    @property
    def levels(self) -> tuple:
        return (self.level1, self.level2_left, self.level2_right)

    @property
    def dim(self) -> int:
        return self.level1.dim

    @property
    def n_submodels(self) -> int:
        return sum(level.n_submodels for level in self.levels)


def _bit_for_vote(level: _Level, model: granular.GranularModel, vote: int) -> int:
    minor_bit = next(b for b, tag in level.tags.items() if tag == model.positive_label_meaning)
    return minor_bit if vote > 0 else 1 - minor_bit


def train_level(level: _Level, samples, config: svm.TrainConfig) -> granular.GranularModel:
    by_bit = {0: [], 1: []}
    for s in samples:
        if s.class_name in level.bit_of:
            by_bit[level.bit_of[s.class_name]].append(s.features)
    # the larger side is the major class; on a tie bit 0 is major
    minor_bit = 1 if len(by_bit[1]) <= len(by_bit[0]) else 0
    try:
        return granular.train_granular(
            by_bit[1 - minor_bit], by_bit[minor_bit], config,
            positive_label_meaning=level.tags[minor_bit],
        )
    except TrainingError as exc:
        exc.level = level.name
        exc.args = (f"level {level.name}: {exc}",)
        raise


def train_gbt(samples, config: svm.TrainConfig = svm.TrainConfig(),
              level_configs: Optional[Mapping[str, svm.TrainConfig]] = None) -> GBTModel:
    """Fit the three level ensembles from 4-way labelled samples."""
    samples = list(samples)
    present = Counter(s.class_name for s in samples)
    for cls in SourceClass:
        if present[cls] == 0:
            raise TrainingError(f"no training samples of class {cls.value!r}")
    dims = {s.features.flatten().shape[0] for s in samples}
    if len(dims) != 1:
        raise DimensionError("training samples differ in feature dimension")
    level_configs = level_configs or {}
    models = [train_level(lv, samples, level_configs.get(lv.name, config)) for lv in LEVELS]
    return GBTModel(*models, nbins=samples[0].features.nbins)


def classify(model: GBTModel, x, counters: Optional[Counter] = None) -> ClassCode:
    """Walk the tree for one sample.

    ``counters``, when given, is incremented once per level consulted.
    """
    if isinstance(x, FeatureVector):
        x = x.flatten()
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise DimensionError(f"expected dimension {model.dim}, got {x.shape}")
    l1, l2l, l2r = LEVELS
    label1 = _bit_for_vote(l1, model.level1, granular.vote_predict(model.level1, x))
    if counters is not None:
        counters["L1"] += 1
    if label1 == 1:
        level, sub = l2l, model.level2_left
    else:
        level, sub = l2r, model.level2_right
    label2 = _bit_for_vote(level, sub, granular.vote_predict(sub, x))
    if counters is not None:
        counters[level.name] += 1
    return code_for(label1, label2)


def classify_many(model: GBTModel, X) -> list[ClassCode]:
    X = as_matrix(X)
    if X.size == 0:
        return []
    if X.shape[1] != model.dim:
        raise DimensionError(f"expected dimension {model.dim}, got {X.shape[1]}")
    l1, l2l, l2r = LEVELS
    v1 = granular.vote_predict_many(model.level1, X)
    bits1 = np.array([_bit_for_vote(l1, model.level1, v) for v in v1])
    bits2 = np.zeros(len(X), dtype=int)
    for flag, level, sub in ((1, l2l, model.level2_left), (0, l2r, model.level2_right)):
        rows = np.flatnonzero(bits1 == flag)
        if rows.size:
            v2 = granular.vote_predict_many(sub, X[rows])
            bits2[rows] = [_bit_for_vote(level, sub, v) for v in v2]
    return [code_for(a, b) for a, b in zip(bits1, bits2)]


# -- persistence ------------------------------------------------------------

def _fmt(values) -> str:
    return " ".join(format(float(v), ".17g") for v in np.ravel(values))


def dumps_model(model: GBTModel) -> str:
    body = [FORMAT_HEADER, f"dim {model.dim}", f"nbins {model.nbins}"]
    for level, sub in zip(LEVELS, model.levels):
        body += [
            f"level {level.name}",
            f"positive {sub.positive_label_meaning}",
            f"mean {_fmt(sub.scaler.mean)}",
            f"stddev {_fmt(sub.scaler.stddev)}",
            f"granules {sub.n_submodels}",
        ]
        for m in sub.submodels:
            body += [f"gamma {_fmt([m.gamma])}", f"bias {_fmt([m.bias])}",
                     f"nsv {m.n_support}"]
            body += [_fmt(np.concatenate([[c], v])) for c, v in zip(m.coef, m.support_vectors)]
    text = "\n".join(body) + "\n"
    return text + f"checksum sha256 {hashlib.sha256(text.encode('ascii')).hexdigest()}\n"


def save_model(model: GBTModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="ascii")


class _Reader:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise TruncatedModelError("model file ends prematurely")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def keyed(self, key: str) -> str:
        line = self.next()
        head, _, rest = line.partition(" ")
        if head != key:
            raise ModelFormatError(f"expected '{key}' at line {self.pos}, got {line!r}")
        return rest

    def floats(self, key: str, n: int) -> np.ndarray:
        vals = np.array(self.keyed(key).split(), dtype=float)
        if vals.shape != (n,):
            raise ModelFormatError(f"'{key}' at line {self.pos} needs {n} values")
        return vals


def loads_model(text: str) -> GBTModel:
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_HEADER:
        found = lines[0].strip() if lines else "<empty>"
        raise VersionError(f"unsupported model format {found!r}, expected {FORMAT_HEADER!r}")
    if not lines[-1].startswith("checksum "):
        raise TruncatedModelError("model file has no checksum line")
    parts = lines[-1].split()
    if len(parts) != 3 or parts[1] != "sha256":
        raise ModelFormatError(f"bad checksum line {lines[-1]!r}")
    body = "\n".join(lines[:-1]) + "\n"
    if hashlib.sha256(body.encode("ascii")).hexdigest() != parts[2]:
        raise ChecksumError("model checksum does not match its contents")

    try:
        rd = _Reader(lines[1:-1])
        dim = int(rd.keyed("dim"))
        nbins = int(rd.keyed("nbins"))
        levels = []
        for level in LEVELS:
            if rd.keyed("level") != level.name:
                raise ModelFormatError(f"expected level {level.name}")
            tag = rd.keyed("positive")
            if tag not in level.tags.values():
                raise ModelFormatError(f"unknown tag {tag!r} for level {level.name}")
            scaler = FeatureScaler(rd.floats("mean", dim), rd.floats("stddev", dim))
            subs = []
            for _ in range(int(rd.keyed("granules"))):
                gamma = float(rd.keyed("gamma"))
                bias = float(rd.keyed("bias"))
                nsv = int(rd.keyed("nsv"))
                rows = np.array([rd.next().split() for _ in range(nsv)], dtype=float)
                rows = rows.reshape(nsv, dim + 1)
                subs.append(svm.TrainedSVM(rows[:, 1:].copy(), rows[:, 0].copy(), bias, gamma))
            levels.append(granular.GranularModel(tuple(subs), scaler, tag))
        if rd.pos != len(rd.lines):
            raise ModelFormatError("trailing content after last level")
    except ValueError as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model file: {exc}") from None
    return GBTModel(*levels, nbins=nbins)


def load_model(path) -> GBTModel:
    return loads_model(Path(path).read_text(encoding="ascii"))
