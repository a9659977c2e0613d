"""Ordinal pairs, test-time relation prediction, and the WHDR metric."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from distrank.core import GaussianScore
from distrank.errors import DegenerateMetricError, UnsupportedRelationError


@dataclass(frozen=True)
class OrdinalPair:
    """Ground-truth relation between items ``i`` and ``j``.

    ``relation`` is +1 when ``i`` is farther (larger score) than ``j`` and -1
    otherwise. ``weight`` is the annotation weight used by WHDR.
    """

    i: int
    j: int
    relation: int
    weight: float = 1.0

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError(f"pair must join two distinct items, got i = j = {self.i}")
        if self.relation == 0:
            raise UnsupportedRelationError(f"pair ({self.i}, {self.j}) has relation 0")
        if self.relation not in (-1, 1):
            raise ValueError(f"relation must be -1 or +1, got {self.relation!r}")
        if not (math.isfinite(self.weight) and self.weight >= 0):
            raise ValueError(f"weight must be finite and >= 0, got {self.weight!r}")


def pairs_to_arrays(pairs: Sequence[OrdinalPair]):
    """Columns ``(i, j, relation, weight)`` as numpy arrays."""
    i = np.fromiter((p.i for p in pairs), dtype=np.int64, count=len(pairs))
    j = np.fromiter((p.j for p in pairs), dtype=np.int64, count=len(pairs))
    r = np.fromiter((p.relation for p in pairs), dtype=np.int64, count=len(pairs))
    w = np.fromiter((p.weight for p in pairs), dtype=float, count=len(pairs))
    return i, j, r, w


def predict_relation(a: GaussianScore, b: GaussianScore) -> int:
    """+1 if ``a`` ranks above ``b``, -1 if below, 0 on an exact tie. Only means are compared."""
    if a.mu > b.mu:
        return 1
    if a.mu < b.mu:
        return -1
    return 0


def predict_relations(mu, i, j) -> np.ndarray:
    """Vectorized ``predict_relation`` from an array of means and index columns."""
    mu = np.asarray(mu, dtype=float)
    return np.sign(mu[i] - mu[j]).astype(np.int64)


def whdr_arrays(mu, i, j, relation, weight) -> float:
    """WHDR from raw arrays. Ties count as disagreements."""
    mu = np.asarray(mu)
    i = np.asarray(i)
    j = np.asarray(j)
    if len(i) and (min(i.min(), j.min()) < 0 or max(i.max(), j.max()) >= len(mu)):
        raise IndexError(f"pair index out of range for {len(mu)} scores")
    weight = np.asarray(weight, dtype=float)
    total = float(np.sum(weight))
    if not total > 0:
        raise DegenerateMetricError("WHDR undefined: total pair weight is zero")
    wrong = predict_relations(mu, i, j) != np.asarray(relation)
    return float(np.sum(weight[wrong])) / total


def whdr(pairs: Sequence[OrdinalPair], scores: Sequence[GaussianScore]) -> float:
    """Weighted fraction of pairs whose predicted relation disagrees with the label."""
    mu = np.array([s.mu for s in scores], dtype=float)
    i, j, r, w = pairs_to_arrays(pairs)
    return whdr_arrays(mu, i, j, r, w)
