"""Finite-difference verification of the analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from distrank.core import GaussianScore, grad_confidence, grad_mu, grad_sigma, pair_loss
from distrank.scorer import DIRECT, RECIPROCAL, init_params, loss_and_grad

CORE_TOL = 1e-5
BACKWARD_TOL = 1e-4
ABS_FLOOR = 1e-8


@dataclass
class CheckResult:
    name: str
    worst_rel: float
    worst_sample: str
    failures: int
    checked: int

    @property
    def ok(self) -> bool:
        return self.failures == 0


def _agree(analytic, numeric, rel_tol, abs_floor=ABS_FLOOR):
    # relative error is only reported where the gradient is well above the floor
    err = abs(analytic - numeric)
    scale = max(abs(numeric), abs(analytic))
    rel = err / scale if scale > 100 * abs_floor else 0.0
    return err <= abs_floor or rel <= rel_tol, float(rel)


def central_diff(f, x, h):
    """Fourth-order central difference."""
    return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h)


def check_core(samples: int = 1000, seed: int = 0, tol: float = CORE_TOL) -> CheckResult:
    """Compare closed-form mu/sigma/confidence gradients with central differences of pair_loss."""
    rng = np.random.default_rng(seed)
    worst, where, bad = 0.0, "", 0
    for k in range(samples):
        mf, mc = (float(v) for v in rng.uniform(-3, 3, 2))
        sf, sc = (float(v) for v in rng.uniform(0.1, 5, 2))
        f, c = GaussianScore.from_sigma(mf, sf), GaussianScore.from_sigma(mc, sc)

        def L(mf=mf, mc=mc, sf=sf, sc=sc):
            return pair_loss(GaussianScore.from_sigma(mf, sf), GaussianScore.from_sigma(mc, sc))

        h = 1e-3
        cf, cc = 1.0 / sf, 1.0 / sc
        numeric = {
            "d_mu_f": central_diff(lambda v: L(mf=v), mf, h),
            "d_mu_c": central_diff(lambda v: L(mc=v), mc, h),
            "d_sigma_f": central_diff(lambda v: L(sf=v), sf, h * sf),
            "d_sigma_c": central_diff(lambda v: L(sc=v), sc, h * sc),
            "d_conf_f": central_diff(lambda v: L(sf=1.0 / v), cf, h * cf),
            "d_conf_c": central_diff(lambda v: L(sc=1.0 / v), cc, h * cc),
        }
        analytic = dict(
            zip(numeric, (*grad_mu(f, c), *grad_sigma(f, c), *grad_confidence(f, c)))
        )
        for name, n in numeric.items():
            ok, rel = _agree(analytic[name], n, tol)
            if not ok:
                bad += 1
            if rel > worst:
                worst = rel
                where = (
                    f"sample={k} {name} mu_f={mf!r} mu_c={mc!r} sigma_f={sf!r} sigma_c={sc!r} "
                    f"analytic={analytic[name]!r} numeric={float(n)!r}"
                )
    return CheckResult("core", worst, where, bad, samples * 6)


def check_backward(
    samples: int = 20,
    seed: int = 0,
    tol: float = BACKWARD_TOL,
    n_features: int = 2,
    hidden: int = 4,
    n_items: int = 8,
    n_pairs: int = 12,
) -> CheckResult:
    """Compare the scorer's backward pass with central differences of the batch loss.

    Alternates between the reciprocal and direct parameterizations and
    between a hidden layer and a linear scorer.
    """
    rng = np.random.default_rng(seed)
    worst, where, bad, checked = 0.0, "", 0, 0
    for k in range(samples):
        par = (RECIPROCAL, DIRECT)[k % 2]
        width = hidden if k % 4 < 2 else 0
        x = rng.normal(size=(n_items, n_features))
        i = rng.integers(0, n_items, n_pairs)
        j = (i + rng.integers(1, n_items, n_pairs)) % n_items
        r = rng.choice([-1, 1], n_pairs)
        params = init_params(n_features, width, par, seed=int(rng.integers(2**31)), features=x)
        _, grad = loss_and_grad(params, x, i, j, r)
        for name, w in params.weights.items():
            flat = w.reshape(-1)
            g = np.asarray(grad[name]).reshape(-1)
            for q in range(flat.size):
                orig = flat[q]
                h = 1e-3 * max(1.0, abs(orig))

                def L(v):
                    flat[q] = v
                    out = loss_and_grad(params, x, i, j, r)[0]
                    flat[q] = orig
                    return out

                n = central_diff(L, orig, h)
                ok, rel = _agree(float(g[q]), n, tol)
                checked += 1
                if not ok:
                    bad += 1
                if rel > worst:
                    worst = rel
                    where = f"sample={k} {par} hidden={width} {name}[{q}] analytic={float(g[q])!r} numeric={float(n)!r}"
    return CheckResult("backward", worst, where, bad, checked)
