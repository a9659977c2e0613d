"""Pairwise ranking with Gaussian score distributions and a distributional loss."""

from distrank.core import (
    GaussianScore,
    PairStatistic,
    batch_loss,
    grad_confidence,
    grad_mu,
    grad_sigma,
    pair_loss,
    prob_farther,
)
from distrank.ranking import OrdinalPair, predict_relation, whdr

__version__ = "0.1.0"
