"""Synthetic ordinal datasets and JSON-Lines IO.

Latent depths are drawn uniformly from [1, 10]. Item features are a fixed
map of the depth

    [d, d**2 / 10, log d, 0, 0, ...]

(the trailing zero columns are distractors) plus isotropic Gaussian noise.
Clean items use ``base_noise_scale``; ambiguous items use
``ambiguous_noise_scale``. Pair relations come from the latent depths and
are then flipped independently with probability ``label_flip_prob``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from distrank.errors import DatasetFormatError, DegenerateSplitError, UnsupportedRelationError
from distrank.ranking import OrdinalPair, pairs_to_arrays

DEPTH_RANGE = (1.0, 10.0)
N_SIGNAL_FEATURES = 3

CLEAN = "clean"
AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class GenConfig:
    item_count: int = 2000
    feature_dim: int = 5
    pairs_per_item: float = 5.0
    label_flip_prob: float = 0.0
    ambiguous_fraction: float = 0.0
    base_noise_scale: float = 0.02
    ambiguous_noise_scale: float = 0.1
    seed: int = 7

    def __post_init__(self):
        if self.item_count < 2:
            raise ValueError("item_count must be at least 2")
        if self.feature_dim < N_SIGNAL_FEATURES:
            raise ValueError(f"feature_dim must be at least {N_SIGNAL_FEATURES}")
        if not self.pairs_per_item > 0:
            raise ValueError("pairs_per_item must be positive")
        if not 0.0 <= self.label_flip_prob < 0.5:
            raise ValueError("label_flip_prob must lie in [0, 0.5)")
        if not 0.0 <= self.ambiguous_fraction <= 1.0:
            raise ValueError("ambiguous_fraction must lie in [0, 1]")
        if self.base_noise_scale < 0 or self.ambiguous_noise_scale < 0:
            raise ValueError("noise scales must be non-negative")

    @property
    def pair_count(self) -> int:
        return int(round(self.item_count * self.pairs_per_item))


@dataclass
class RankingDataset:
    """Items (feature rows) plus labelled pairs over them.

    ``depths`` and ``noise_class`` are only known for synthetic data.
    ``label_flip_prob`` is the generator's flip rate, i.e. the best WHDR any
    predictor can expect against these labels.
    """

    features: np.ndarray
    pairs: list[OrdinalPair]
    depths: np.ndarray | None = None
    noise_class: list[str] | None = None
    split: str = "train"
    label_flip_prob: float | None = None
    _arrays: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d array")
        n = len(self.features)
        for p in self.pairs:
            if not (0 <= p.i < n and 0 <= p.j < n):
                raise IndexError(f"pair ({p.i}, {p.j}) out of range for {n} items")

    @property
    def n_items(self) -> int:
        return len(self.features)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def pair_arrays(self):
        if self._arrays is None:
            self._arrays = pairs_to_arrays(self.pairs)
        return self._arrays

    def equals(self, other: "RankingDataset") -> bool:
        def same_opt(a, b):
            if a is None or b is None:
                return a is None and b is None
            return np.array_equal(np.asarray(a), np.asarray(b))

        return (
            np.array_equal(self.features, other.features)
            and self.pairs == other.pairs
            and same_opt(self.depths, other.depths)
            and same_opt(self.noise_class, other.noise_class)
        )


def feature_map(depths: np.ndarray, feature_dim: int) -> np.ndarray:
    """Noise-free features of each depth."""
    d = np.asarray(depths, dtype=float)
    out = np.zeros((len(d), feature_dim))
    out[:, 0] = d
    out[:, 1] = d * d / 10.0
    out[:, 2] = np.log(d)
    return out


def generate(config: GenConfig) -> RankingDataset:
    rng = np.random.default_rng(config.seed)
    n = config.item_count
    depths = rng.uniform(*DEPTH_RANGE, size=n)
    ambiguous = rng.random(n) < config.ambiguous_fraction
    scale = np.where(ambiguous, config.ambiguous_noise_scale, config.base_noise_scale)
    features = feature_map(depths, config.feature_dim)
    features += rng.standard_normal(features.shape) * scale[:, None]

    m = config.pair_count
    i = rng.integers(0, n, size=m)
    j = rng.integers(0, n - 1, size=m)
    j += j >= i
    tied = depths[i] == depths[j]
    while np.any(tied):
        k = np.flatnonzero(tied)
        j[k] = rng.integers(0, n - 1, size=len(k))
        j[k] += j[k] >= i[k]
        tied = depths[i] == depths[j]
    relation = np.where(depths[i] > depths[j], 1, -1)
    flip = rng.random(m) < config.label_flip_prob
    relation[flip] *= -1

    pairs = [OrdinalPair(int(a), int(b), int(r)) for a, b, r in zip(i, j, relation)]
    return RankingDataset(
        features=features,
        pairs=pairs,
        depths=depths,
        noise_class=[AMBIGUOUS if a else CLEAN for a in ambiguous],
        label_flip_prob=config.label_flip_prob,
    )


def _subset(ds: RankingDataset, keep: np.ndarray, split: str) -> RankingDataset:
    remap = np.full(ds.n_items, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    pairs = [
        OrdinalPair(int(remap[p.i]), int(remap[p.j]), p.relation, p.weight)
        for p in ds.pairs
        if remap[p.i] >= 0 and remap[p.j] >= 0
    ]
    return RankingDataset(
        features=ds.features[keep],
        pairs=pairs,
        depths=None if ds.depths is None else ds.depths[keep],
        noise_class=None if ds.noise_class is None else [ds.noise_class[k] for k in keep],
        split=split,
        label_flip_prob=ds.label_flip_prob,
    )


def split(ds: RankingDataset, test_fraction: float = 0.2, seed: int = 0):
    """Partition items into disjoint train/test sides; pairs crossing sides are dropped."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n_items)
    n_test = int(round(test_fraction * ds.n_items))
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    train, test = _subset(ds, train_idx, "train"), _subset(ds, test_idx, "test")
    for side in (train, test):
        if not side.pairs:
            raise DegenerateSplitError(f"{side.split} side of the split has no pairs")
    return train, test


# -- JSON Lines ------------------------------------------------------------------


def save_jsonl(ds: RankingDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, row in enumerate(ds.features):
            rec = {"type": "item", "id": k, "features": [float(x) for x in row]}
            if ds.depths is not None:
                rec["depth"] = float(ds.depths[k])
            if ds.noise_class is not None:
                rec["noise_class"] = ds.noise_class[k]
            fh.write(json.dumps(rec) + "\n")
        for p in ds.pairs:
            rec = {"type": "pair", "i": p.i, "j": p.j, "r": p.relation}
            if p.weight != 1.0:
                rec["w"] = p.weight
            fh.write(json.dumps(rec) + "\n")


def _number(rec, key, lineno, kind=float):
    v = rec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DatasetFormatError(f"field {key!r} must be numeric", lineno)
    if kind is int:
        if isinstance(v, float) and not v.is_integer():
            raise DatasetFormatError(f"field {key!r} must be an integer", lineno)
        return int(v)
    if not math.isfinite(v):
        raise DatasetFormatError(f"field {key!r} must be finite", lineno)
    return float(v)


def load_jsonl(path) -> RankingDataset:
    """Read a dataset; items must precede the pairs that reference them."""
    features: list[list[float]] = []
    depths: list[float] = []
    classes: list[str] = []
    pairs: list[OrdinalPair] = []
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"malformed JSON ({exc.msg})", lineno) from None
            if not isinstance(rec, dict):
                raise DatasetFormatError("record must be a JSON object", lineno)
            try:
                kind = rec["type"]
                if kind == "item":
                    if _number(rec, "id", lineno, int) != len(features):
                        raise DatasetFormatError(
                            f"item ids must be consecutive from 0; expected {len(features)}", lineno
                        )
                    row = rec["features"]
                    if not isinstance(row, list) or not row:
                        raise DatasetFormatError("features must be a non-empty list", lineno)
                    if features and len(row) != len(features[0]):
                        raise DatasetFormatError("feature dimension differs from earlier items", lineno)
                    features.append([_number({"x": x}, "x", lineno) for x in row])
                    if "depth" in rec:
                        depths.append(_number(rec, "depth", lineno))
                    if "noise_class" in rec:
                        if rec["noise_class"] not in (CLEAN, AMBIGUOUS):
                            raise DatasetFormatError("unknown noise_class", lineno)
                        classes.append(rec["noise_class"])
                elif kind == "pair":
                    i = _number(rec, "i", lineno, int)
                    j = _number(rec, "j", lineno, int)
                    r = _number(rec, "r", lineno, int)
                    w = _number(rec, "w", lineno) if "w" in rec else 1.0
                    if r not in (-1, 0, 1):
                        raise DatasetFormatError(f"relation r must be -1 or 1, got {r}", lineno)
                    if r == 0:
                        raise UnsupportedRelationError(
                            f"line {lineno}: relation r = 0 (equal depth) is not supported"
                        )
                    if not (0 <= i < len(features) and 0 <= j < len(features)):
                        raise DatasetFormatError(f"pair ({i}, {j}) references an unknown item", lineno)
                    try:
                        pairs.append(OrdinalPair(i, j, r, w))
                    except ValueError as exc:
                        raise DatasetFormatError(str(exc), lineno) from None
                else:
                    raise DatasetFormatError(f"unknown record type {kind!r}", lineno)
            except KeyError as exc:
                raise DatasetFormatError(f"missing field {exc.args[0]!r}", lineno) from None
    if not features:
        raise DatasetFormatError("dataset contains no items")
    n = len(features)
    if depths and len(depths) != n:
        raise DatasetFormatError("depth given for some items but not all")
    if classes and len(classes) != n:
        raise DatasetFormatError("noise_class given for some items but not all")
    return RankingDataset(
        features=np.array(features, dtype=float),
        pairs=pairs,
        depths=np.array(depths) if depths else None,
        noise_class=classes or None,
    )
