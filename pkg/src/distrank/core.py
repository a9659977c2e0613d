"""Gaussian pairwise comparison: farther-probability, loss, and closed-form gradients.

Each item is scored by a normal distribution N(mu, sigma^2) where sigma is
carried as ``confidence = 1 / sigma``. For an ordered pair (farther f, closer c)
the difference z = d_f - d_c is again normal with

    mu_z = mu_f - mu_c,    sigma_z = sqrt(sigma_f^2 + sigma_c^2)

and the loss is -log P(z > 0). Everything below is written in terms of the
standardized argument ``t = -mu_z / (sqrt(2) sigma_z)``, for which
P(z > 0) = erfc(t) / 2.

The array functions (``pair_loss_terms`` and friends) operate elementwise on
numpy arrays and are what the trainer uses; the ``GaussianScore`` wrappers
are the scalar API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy import special as _sp

from distrank.errors import UnsupportedRelationError
from distrank.special import log_erfc, tail_ratio

if TYPE_CHECKING:
    from distrank.ranking import OrdinalPair

MIN_CONFIDENCE = 1e-8
MAX_CONFIDENCE = 1e8

_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_LOG_HALF = math.log(0.5)


@dataclass(frozen=True)
class GaussianScore:
    """Predicted score distribution of one item: mean and reciprocal std."""

    mu: float
    confidence: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        c = self.confidence
        if not (math.isfinite(c) and MIN_CONFIDENCE <= c <= MAX_CONFIDENCE):
            raise ValueError(
                f"confidence must lie in [{MIN_CONFIDENCE:g}, {MAX_CONFIDENCE:g}], got {c!r}"
            )

    @property
    def sigma(self) -> float:
        return 1.0 / self.confidence

    @classmethod
    def from_sigma(cls, mu: float, sigma: float) -> "GaussianScore":
        return cls(mu, 1.0 / sigma)


@dataclass(frozen=True)
class PairStatistic:
    """Mean and std of the score difference d_f - d_c."""

    mu_z: float
    sigma_z: float

    def __post_init__(self):
        if not (math.isfinite(self.mu_z) and math.isfinite(self.sigma_z) and self.sigma_z > 0):
            raise ValueError(f"invalid pair statistic ({self.mu_z!r}, {self.sigma_z!r})")

    @classmethod
    def of(cls, f: GaussianScore, c: GaussianScore) -> "PairStatistic":
        return cls(f.mu - c.mu, math.hypot(f.sigma, c.sigma))

    @property
    def t(self) -> float:
        return -self.mu_z / (_SQRT2 * self.sigma_z)


# -- array level -------------------------------------------------------------


def _neg_log_half_erfc(t):
    # -log(erfc(t) / 2). For t < 0 the probability is 1 - erfc(-t)/2 and the
    # loss is tiny, so log1p keeps its relative accuracy.
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    neg = t < 0
    out[neg] = -np.log1p(-0.5 * _sp.erfc(-t[neg]))
    out[~neg] = -(_LOG_HALF + log_erfc(t[~neg]))
    return out if out.ndim else float(out)


def loss_from_stats(mu_z, sigma_z):
    """-log P(z > 0), evaluated in the log domain."""
    t = -np.asarray(mu_z, dtype=float) / (_SQRT2 * np.asarray(sigma_z, dtype=float))
    return _neg_log_half_erfc(t)


def prob_from_stats(mu_z, sigma_z):
    t = -np.asarray(mu_z, dtype=float) / (_SQRT2 * np.asarray(sigma_z, dtype=float))
    return 0.5 * _sp.erfc(t)


def pair_loss_terms(mu_f, mu_c, sigma_f, sigma_c):
    """Loss and its partials for arrays of oriented pairs.

    Returns ``(loss, d_mu_f, d_mu_c, d_sigma_f, d_sigma_c)``.
    """
    mu_f, mu_c, sigma_f, sigma_c = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (mu_f, mu_c, sigma_f, sigma_c))
    )
    mu_z = mu_f - mu_c
    sigma_z = np.hypot(sigma_f, sigma_c)
    t = -mu_z / (_SQRT2 * sigma_z)
    loss = _neg_log_half_erfc(t)
    # common factor sqrt(2/pi) exp(-t^2) / (sigma_z erfc(t))
    g = _SQRT_2_OVER_PI * tail_ratio(t) / sigma_z
    d_mu_f = -g
    d_mu_c = g
    k = mu_z * g / (sigma_z * sigma_z)
    return loss, d_mu_f, d_mu_c, k * sigma_f, k * sigma_c


# -- scalar API --------------------------------------------------------------


def prob_farther(f: GaussianScore, c: GaussianScore) -> float:
    """P(d_f > d_c) under independent Gaussian scores."""
    s = PairStatistic.of(f, c)
    return float(prob_from_stats(s.mu_z, s.sigma_z))


def pair_loss(f: GaussianScore, c: GaussianScore) -> float:
    """Distributional loss of a single pair where ``f`` should be farther."""
    s = PairStatistic.of(f, c)
    return float(loss_from_stats(s.mu_z, s.sigma_z))


def grad_mu(f: GaussianScore, c: GaussianScore) -> tuple[float, float]:
    _, dmf, dmc, _, _ = pair_loss_terms(f.mu, c.mu, f.sigma, c.sigma)
    return float(dmf), float(dmc)


def grad_sigma(f: GaussianScore, c: GaussianScore) -> tuple[float, float]:
    _, _, _, dsf, dsc = pair_loss_terms(f.mu, c.mu, f.sigma, c.sigma)
    return float(dsf), float(dsc)


def grad_confidence(f: GaussianScore, c: GaussianScore) -> tuple[float, float]:
    """Gradient w.r.t. confidence, via sigma = 1/confidence."""
    dsf, dsc = grad_sigma(f, c)
    return -dsf / f.confidence**2, -dsc / c.confidence**2


def orient(pair: "OrdinalPair") -> tuple[int, int]:
    """Return (farther, closer) item indices for a labelled pair."""
    if pair.relation == 1:
        return pair.i, pair.j
    if pair.relation == -1:
        return pair.j, pair.i
    if pair.relation == 0:
        raise UnsupportedRelationError(f"pair ({pair.i}, {pair.j}) has relation 0")
    raise ValueError(f"relation must be -1 or +1, got {pair.relation!r}")


def batch_loss(scores: Sequence[GaussianScore], pairs: Sequence["OrdinalPair"]) -> float:
    """Mean distributional loss over ``pairs``; 0 for an empty batch."""
    n = len(scores)
    total = 0.0
    for p in pairs:
        f, c = orient(p)
        if not (0 <= f < n and 0 <= c < n):
            raise IndexError(f"pair ({p.i}, {p.j}) out of range for {n} scores")
        total += pair_loss(scores[f], scores[c])
    return total / len(pairs) if pairs else 0.0
