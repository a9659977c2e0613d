import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distrank.core import (
    GaussianScore,
    PairStatistic,
    batch_loss,
    grad_confidence,
    grad_mu,
    grad_sigma,
    pair_loss,
    pair_loss_terms,
    prob_farther,
)
from distrank.errors import UnsupportedRelationError
from distrank.gradcheck import check_core, central_diff
from distrank.ranking import OrdinalPair

# normal-CDF / -log Phi values from adaptive quadrature at 40 digits (mpmath)
PHI_AT_INV_SQRT2 = 0.76024993890652326884
LOSS_MU_Z_POS1 = 0.17275377902344988953
LOSS_MU_Z_NEG1 = 1.8410216450092635058
# central differences of -log Phi at 40 digits, h = 1e-12
GRAD_MU_F_AT_0 = -0.797884560802865
GRAD_SIGMA_F_AT_1 = 0.144489090686316
GRAD_CONF_F_CF2 = -0.0293677768214962

LN2 = math.log(2.0)

mus = st.floats(-3, 3)
sigmas = st.floats(0.1, 5)


def score(mu, sigma):
    return GaussianScore.from_sigma(mu, sigma)


class TestGaussianScore:
    def test_rejects_bad_confidence(self):
        for c in (0.0, -1.0, 1e-9, 1e9, math.inf, math.nan):
            with pytest.raises(ValueError):
                GaussianScore(0.0, c)

    def test_rejects_non_finite_mu(self):
        with pytest.raises(ValueError):
            GaussianScore(math.nan, 1.0)

    def test_sigma_is_reciprocal(self):
        assert GaussianScore(0.0, 4.0).sigma == 0.25

    def test_pair_statistic(self):
        s = PairStatistic.of(score(1.0, 0.6), score(0.0, 0.8))
        assert s.mu_z == 1.0
        assert s.sigma_z == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(ValueError):
            PairStatistic(0.0, 0.0)


class TestProbFarther:
    def test_symmetric_case(self):
        assert prob_farther(GaussianScore(0, 1), GaussianScore(0, 1)) == 0.5

    def test_against_quadrature(self):
        p = prob_farther(GaussianScore(1, 1), GaussianScore(0, 1))
        assert p == pytest.approx(PHI_AT_INV_SQRT2, abs=1e-12)

    @given(mus, mus, sigmas, sigmas)
    def test_complementary(self, ma, mb, sa, sb):
        a, b = score(ma, sa), score(mb, sb)
        assert prob_farther(a, b) + prob_farther(b, a) == pytest.approx(1.0, abs=1e-12)

    @given(mus, mus, sigmas, sigmas, st.floats(-100, 100))
    def test_translation_invariant(self, ma, mb, sa, sb, shift):
        p0 = prob_farther(score(ma, sa), score(mb, sb))
        p1 = prob_farther(score(ma + shift, sa), score(mb + shift, sb))
        assert p1 == pytest.approx(p0, abs=1e-12)


class TestPairLoss:
    @given(mus, sigmas, sigmas)
    def test_equal_means_give_ln2(self, m, sa, sb):
        assert pair_loss(score(m, sa), score(m, sb)) == pytest.approx(LN2, abs=1e-12)

    def test_oracle_values(self):
        f, c = score(1.0, 0.6), score(0.0, 0.8)
        assert pair_loss(f, c) == pytest.approx(LOSS_MU_Z_POS1, rel=1e-12)
        assert pair_loss(c, f) == pytest.approx(LOSS_MU_Z_NEG1, rel=1e-12)

    @given(mus, mus, sigmas, sigmas)
    def test_matches_log_of_probability(self, ma, mb, sa, sb):
        f, c = score(ma, sa), score(mb, sb)
        assert pair_loss(f, c) == pytest.approx(-math.log(prob_farther(f, c)), rel=1e-9, abs=1e-15)
        assert pair_loss(f, c) >= 0

    def test_monotone_in_mu_z(self):
        mu_z = np.linspace(-5, 5, 1001)
        loss = pair_loss_terms(mu_z, 0.0, 1 / math.sqrt(2), 1 / math.sqrt(2))[0]
        assert np.all(np.diff(loss) < 0)

    def test_uncertainty_behaviour(self):
        s = np.linspace(0.1, 10, 1000) / math.sqrt(2)
        assert np.all(np.diff(pair_loss_terms(1.0, 0.0, s, s)[0]) > 0)
        assert np.all(np.diff(pair_loss_terms(-1.0, 0.0, s, s)[0]) < 0)

    def test_no_underflow_in_tail(self):
        # probability underflows to 0 here; the loss must not
        loss = pair_loss(score(-40.0, 1 / math.sqrt(2)), score(0.0, 1 / math.sqrt(2)))
        assert math.isfinite(loss)
        assert loss == pytest.approx(800 + math.log(40 * math.sqrt(2 * math.pi)), rel=1e-3)


class TestBatchLoss:
    def test_empty(self):
        assert batch_loss([GaussianScore(0, 1)], []) == 0.0

    def test_single_tie(self):
        scores = [GaussianScore(0, 1), GaussianScore(0, 1)]
        assert batch_loss(scores, [OrdinalPair(0, 1, 1)]) == pytest.approx(LN2, abs=1e-15)

    def test_three_pair_example(self):
        s = 1 / math.sqrt(2)
        scores = [score(1, s), score(0, s), score(0, s)]
        pairs = [OrdinalPair(0, 1, 1), OrdinalPair(1, 2, 1), OrdinalPair(1, 0, 1)]
        expected = (LOSS_MU_Z_POS1 + LN2 + LOSS_MU_Z_NEG1) / 3
        assert batch_loss(scores, pairs) == pytest.approx(expected, rel=1e-12)

    def test_relation_orientation(self):
        scores = [score(1, 1), score(0, 1)]
        assert batch_loss(scores, [OrdinalPair(0, 1, 1)]) == batch_loss(scores, [OrdinalPair(1, 0, -1)])

    def test_index_error(self):
        with pytest.raises(IndexError):
            batch_loss([GaussianScore(0, 1)], [OrdinalPair(0, 3, 1)])

    def test_zero_relation_rejected(self):
        with pytest.raises(UnsupportedRelationError):
            OrdinalPair(0, 1, 0)

        class Raw:
            i, j, relation = 0, 1, 0

        with pytest.raises(UnsupportedRelationError):
            batch_loss([GaussianScore(0, 1)] * 2, [Raw()])


class TestGradients:
    def test_grad_mu_at_zero(self):
        s = 1 / math.sqrt(2)
        dmf, dmc = grad_mu(score(0, s), score(0, s))
        assert dmf == pytest.approx(GRAD_MU_F_AT_0, rel=1e-10)
        assert dmc == pytest.approx(-GRAD_MU_F_AT_0, rel=1e-10)
        assert dmf == pytest.approx(-math.sqrt(2 / math.pi), rel=1e-12)

    def test_grad_mu_vanishes(self):
        s = 1 / math.sqrt(2)
        dmf, dmc = grad_mu(score(10, s), score(0, s))
        assert abs(dmf) < 1e-10 and abs(dmc) < 1e-10

    @given(mus, mus, sigmas, sigmas)
    def test_grad_mu_antisymmetric_and_negative(self, ma, mb, sa, sb):
        dmf, dmc = grad_mu(score(ma, sa), score(mb, sb))
        assert dmf + dmc == 0.0
        assert dmf < 0

    def test_grad_sigma_zero_at_equal_means(self):
        assert grad_sigma(score(0.3, 1), score(0.3, 2)) == (0.0, 0.0)

    def test_grad_sigma_oracle(self):
        dsf, dsc = grad_sigma(score(1, 1), score(0, 1))
        assert dsf == pytest.approx(GRAD_SIGMA_F_AT_1, rel=1e-9)
        assert dsc == pytest.approx(GRAD_SIGMA_F_AT_1, rel=1e-9)

    def test_grad_sigma_negative_when_wrong(self):
        dsf, dsc = grad_sigma(score(-1, 1), score(0, 1))
        assert dsf < 0 and dsc < 0

    @given(mus, mus, sigmas, sigmas)
    def test_grad_sigma_sign_and_ratio(self, ma, mb, sa, sb):
        dsf, dsc = grad_sigma(score(ma, sa), score(mb, sb))
        mu_z = ma - mb
        assert np.sign(dsf) == np.sign(mu_z) or dsf == 0.0
        if dsc != 0:
            assert dsf / dsc == pytest.approx(sa / sb, rel=1e-12)

    def test_grad_confidence_examples(self):
        assert grad_confidence(score(0, 1), score(0, 2)) == (0.0, 0.0)
        dcf, dcc = grad_confidence(GaussianScore(1, 1), GaussianScore(0, 1))
        assert dcf == pytest.approx(-GRAD_SIGMA_F_AT_1, rel=1e-9)
        assert dcc == pytest.approx(-GRAD_SIGMA_F_AT_1, rel=1e-9)

    def test_grad_confidence_chain_rule_scaling(self):
        dcf2, _ = grad_confidence(GaussianScore(1, 2), GaussianScore(0, 1))
        assert dcf2 == pytest.approx(GRAD_CONF_F_CF2, rel=1e-9)

    @settings(max_examples=200)
    @given(mus, mus, sigmas, sigmas, st.floats(-50, 50))
    def test_gradients_translation_invariant(self, ma, mb, sa, sb, shift):
        a = grad_mu(score(ma, sa), score(mb, sb)) + grad_sigma(score(ma, sa), score(mb, sb))
        b = grad_mu(score(ma + shift, sa), score(mb + shift, sb)) + grad_sigma(
            score(ma + shift, sa), score(mb + shift, sb)
        )
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)

    def test_finite_difference_suite(self):
        res = check_core(samples=1000, seed=1)
        assert res.ok, res.worst_sample
        assert res.worst_rel <= 1e-5

    @given(mus, mus, sigmas, sigmas)
    def test_finite_difference_property(self, ma, mb, sa, sb):
        f, c = score(ma, sa), score(mb, sb)
        num = central_diff(lambda v: pair_loss(score(v, sa), c), ma, 1e-6)
        assert grad_mu(f, c)[0] == pytest.approx(num, rel=1e-5, abs=1e-8)


@pytest.mark.parametrize("ratio", [-40, -20, -5, 0, 5, 20, 40])
@pytest.mark.parametrize("sigma_z", [1e-3, 1.0, 100.0])
def test_stability(ratio, sigma_z):
    s = sigma_z / math.sqrt(2)
    out = pair_loss_terms(ratio * sigma_z, 0.0, s, s)
    assert all(np.all(np.isfinite(v)) for v in out)
