"""Error-function helpers that stay finite far into the Gaussian tail.

``erf`` is delegated to scipy. ``log_erfc`` and ``erfcx`` switch to a
continued fraction once ``erfc`` starts losing relative precision, so the
log-probabilities used by the loss never pass through an underflowed value.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

# Above this point erfc(x) < 2e-5 and the continued fraction converges fast.
_CF_SWITCH = 3.0
_CF_TERMS = 90
_INV_SQRT_PI = 1.0 / np.sqrt(np.pi)


def _as_output(x, out):
    return float(out) if np.ndim(x) == 0 else out


def erf(x):
    """Error function, elementwise. Accepts scalars or arrays."""
    return _as_output(x, _sp.erf(np.asarray(x, dtype=float)))


def _erfcx_cf(x: np.ndarray) -> np.ndarray:
    # Laplace continued fraction, evaluated bottom-up with a fixed depth:
    #   erfcx(x) = 1/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tail = np.zeros_like(x)
    for k in range(_CF_TERMS, 0, -1):
        tail = (0.5 * k) / (x + tail)
    return _INV_SQRT_PI / (x + tail)


def erfcx(x):
    """Scaled complementary error function ``exp(x**2) * erfc(x)``.

    Only used on the range where it is finite; for very negative ``x`` it
    overflows like the exact function does.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = x >= _CF_SWITCH
    out[big] = _erfcx_cf(x[big])
    small = ~big
    with np.errstate(over="ignore"):
        out[small] = np.exp(x[small] ** 2) * _sp.erfc(x[small])
    return _as_output(x, out)


def log_erfc(x):
    """``log(erfc(x))`` without underflow for large positive ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = x >= _CF_SWITCH
    xb = x[big]
    out[big] = -xb * xb + np.log(_erfcx_cf(xb))
    # near zero erfc(x) ~ 1, so go through log1p(-erf) to keep relative accuracy
    near = np.abs(x) < 0.5
    out[near] = np.log1p(-_sp.erf(x[near]))
    rest = ~big & ~near
    out[rest] = np.log(_sp.erfc(x[rest]))
    return _as_output(x, out)


def tail_ratio(x):
    """``exp(-x**2) / erfc(x)``, i.e. ``1 / erfcx(x)``, evaluated stably.

    For negative ``x`` the numerator underflows harmlessly to zero; for
    large positive ``x`` the continued fraction avoids 0/0.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = x >= _CF_SWITCH
    out[big] = 1.0 / _erfcx_cf(x[big])
    xs = x[~big]
    out[~big] = np.exp(-xs * xs) / _sp.erfc(xs)
    return _as_output(x, out)
