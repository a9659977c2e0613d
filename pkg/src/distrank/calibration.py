"""Calibration measures (ECE, AdaECE, MCE) and reliability tables.

Outcomes are binary: ``probability`` is the predicted P(r = +1) and
``correct`` records whether the positive class actually occurred.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from distrank.core import GaussianScore, prob_farther, prob_from_stats
from distrank.errors import DegenerateMetricError
from distrank.ranking import OrdinalPair, pairs_to_arrays

EQUAL_WIDTH = "equal-width"
EQUAL_MASS = "equal-mass"
SCHEMES = (EQUAL_WIDTH, EQUAL_MASS)

DEFAULT_BINS = 15
RELIABILITY_BINS = 25

# probability interpretations
DISTRIBUTION = "distribution"
MU_DIFF = "mu-diff"

CSV_HEADER = ("bin_index", "mean_confidence", "accuracy", "count")


@dataclass(frozen=True)
class ScoredOutcome:
    probability: float
    correct: bool

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must lie in [0, 1], got {self.probability!r}")


@dataclass(frozen=True)
class CalibrationBins:
    """Per-bin counts, accuracies and mean confidences.

    Empty bins keep count 0, accuracy 0 and, for equal-width bins, the bin
    midpoint as their nominal confidence.
    """

    counts: np.ndarray
    accuracy: np.ndarray
    mean_confidence: np.ndarray
    total: int
    scheme: str

    @property
    def n_bins(self) -> int:
        return len(self.counts)


def prob_from_distribution(a: GaussianScore, b: GaussianScore) -> float:
    """P(r_ab = +1) read off the two score distributions."""
    return prob_farther(a, b)


def mu_diff_minmax(diffs) -> np.ndarray:
    diffs = np.asarray(diffs, dtype=float)
    if diffs.size < 2:
        raise DegenerateMetricError("min-max mapping needs at least two differences")
    lo, hi = diffs.min(), diffs.max()
    if not hi > lo:
        raise DegenerateMetricError("all mean differences are identical; min-max mapping undefined")
    return (diffs - lo) / (hi - lo)


def prob_from_mu_diff(scores: Sequence[GaussianScore], pairs: Sequence[OrdinalPair]) -> np.ndarray:
    """Map mean differences mu_i - mu_j onto [0, 1] by min-max over the pair set."""
    mu = np.array([s.mu for s in scores], dtype=float)
    i, j, _, _ = pairs_to_arrays(pairs)
    return mu_diff_minmax(mu[i] - mu[j])


def distribution_probs(mu, sigma, i, j) -> np.ndarray:
    """Vectorized P(d_i > d_j) for index columns ``i`` and ``j``."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    return prob_from_stats(mu[i] - mu[j], np.hypot(sigma[i], sigma[j]))


def _columns(outcomes) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(outcomes, tuple) and len(outcomes) == 2:
        p, y = outcomes
        return np.asarray(p, dtype=float), np.asarray(y, dtype=bool)
    outcomes = list(outcomes)
    p = np.array([o.probability for o in outcomes], dtype=float)
    y = np.array([o.correct for o in outcomes], dtype=bool)
    return p, y


def _equal_mass_groups(p_sorted: np.ndarray, n_bins: int) -> list[tuple[int, int]]:
    # np.array_split sizes; a boundary that would split a run of tied
    # probabilities is pushed forward to the end of the run.
    n = len(p_sorted)
    bounds = np.cumsum([len(a) for a in np.array_split(np.arange(n), n_bins)])
    groups = []
    start = 0
    for k in range(n_bins):
        end = n if k == n_bins - 1 else max(int(bounds[k]), start)
        while 0 < end < n and p_sorted[end] == p_sorted[end - 1]:
            end += 1
        groups.append((start, end))
        start = end
    return groups


def bin_outcomes(outcomes, n_bins: int = DEFAULT_BINS, scheme: str = EQUAL_WIDTH) -> CalibrationBins:
    """Group outcomes into bins by predicted probability.

    ``outcomes`` is either a sequence of :class:`ScoredOutcome` or a
    ``(probabilities, correct)`` tuple of arrays.

    Equal-width bins are ``[k/M, (k+1)/M)`` with the last bin closed. Equal-mass
    bins are contiguous runs of the stably sorted probabilities whose sizes
    differ by at most one; tied probabilities are kept in a single bin.
    """
    if n_bins < 1:
        raise ValueError(f"number of bins must be >= 1, got {n_bins}")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown binning scheme {scheme!r}")
    p, y = _columns(outcomes)
    if p.size == 0:
        raise ValueError("cannot bin an empty set of outcomes")
    if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must lie in [0, 1]")

    counts = np.zeros(n_bins, dtype=np.int64)
    acc = np.zeros(n_bins)
    conf = np.zeros(n_bins)

    if scheme == EQUAL_WIDTH:
        idx = np.minimum((p * n_bins).astype(np.int64), n_bins - 1)
        counts = np.bincount(idx, minlength=n_bins)
        hits = np.bincount(idx, weights=y.astype(float), minlength=n_bins)
        psum = np.bincount(idx, weights=p, minlength=n_bins)
        full = counts > 0
        acc[full] = hits[full] / counts[full]
        conf[full] = psum[full] / counts[full]
        conf[~full] = (np.arange(n_bins)[~full] + 0.5) / n_bins
    else:
        order = np.argsort(p, kind="stable")
        ps, ys = p[order], y[order]
        for k, (a, b) in enumerate(_equal_mass_groups(ps, n_bins)):
            counts[k] = b - a
            if b > a:
                acc[k] = ys[a:b].mean()
                conf[k] = ps[a:b].mean()

    return CalibrationBins(counts, acc, np.clip(conf, 0.0, 1.0), int(p.size), scheme)


def ece(bins: CalibrationBins) -> float:
    """Count-weighted mean of |accuracy - confidence| over bins."""
    if bins.total <= 0:
        raise DegenerateMetricError("ECE undefined for zero outcomes")
    gaps = np.abs(bins.accuracy - bins.mean_confidence)
    return float(np.sum(bins.counts * gaps) / bins.total)


def mce(bins: CalibrationBins) -> float:
    """Largest |accuracy - confidence| over non-empty bins."""
    full = bins.counts > 0
    if not np.any(full):
        raise DegenerateMetricError("MCE undefined: every bin is empty")
    return float(np.max(np.abs(bins.accuracy[full] - bins.mean_confidence[full])))


def calibration_report(probabilities, correct, n_bins: int = DEFAULT_BINS) -> dict[str, float]:
    """ECE and MCE on equal-width bins plus AdaECE on equal-mass bins."""
    ew = bin_outcomes((probabilities, correct), n_bins, EQUAL_WIDTH)
    em = bin_outcomes((probabilities, correct), n_bins, EQUAL_MASS)
    return {"ece": ece(ew), "adaece": ece(em), "mce": mce(ew)}


def reliability_table(bins: CalibrationBins) -> list[tuple[int, float, float, int]]:
    """Rows ``(bin_index, mean_confidence, accuracy, count)`` in ascending confidence order."""
    return [
        (k, float(bins.mean_confidence[k]), float(bins.accuracy[k]), int(bins.counts[k]))
        for k in range(bins.n_bins)
    ]


def reliability_csv(rows: Iterable[tuple[int, float, float, int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for k, c, a, n in rows:
        w.writerow((k, repr(c), repr(a), n))
    return buf.getvalue()
