"""Large-deviation quantities for sums of u-weighted binomial vectors.

    gamma(x)        = x log x - x + 1
    f_{a,b}(p)      = (p e^a + (1-p) e^b) / exp(p a + (1-p) b),  p in [0, 1]
    G(x; A, B)      = exp(-gamma(x) B) * max_p f_{A(x-1), B(x-1)}(p)
    lower tail      P[Z <= x K u t] <= exp(-gamma(x) K u t),  x < 1
    upper tail      P[Z >= y K U t] <= exp(-gamma(y) K U t),  y > 1

with K = mu * lambda * (1 - delta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DomainError

SERIES_CUTOFF = 1e-6


@dataclass(frozen=True)
class RatioMax:
    p0: float
    value: float


def gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"gamma needs x > 0, got {x}")
    return x * math.log(x) - x + 1.0


def ratio(p, a, b):
    """f_{a,b}(p), evaluated in a shifted form that avoids overflow."""
    p = np.asarray(p, dtype=float)
    mix = p * a + (1.0 - p) * b
    return p * np.exp(a - mix) + (1.0 - p) * np.exp(b - mix)


def _ratio_max_log(d):
    """(p0, log max f) for difference d = b - a != 0."""
    if abs(d) < SERIES_CUTOFF:
        return 0.5 + d / 12.0, math.log1p(d * d / 8.0)
    # f_{a,b}(p) = f_{b,a}(1-p): work with D = |d| > 0 and mirror p0
    D = abs(d)
    em = -math.expm1(-D)                       # 1 - e^{-D}
    p0 = 1.0 / em - 1.0 / D
    log_num = D + math.log(em) - math.log(D)   # log((e^D - 1) / D)
    log_value = log_num - (D + 1.0 - D / em)
    return (1.0 - p0 if d < 0 else p0), log_value


def ratio_max(a: float, b: float) -> RatioMax:
    """Closed-form maximiser and maximum of f_{a,b} over [0, 1].

    Only d = b - a matters. For |d| < 1e-6 the second-order series
    p0 = 1/2 + d/12, value = 1 + d^2/8 replaces the 0/0 closed form.
    The value overflows to inf once |d| exceeds roughly 710.
    """
    d = b - a
    if d == 0:
        raise DegenerateInput("ratio_max is undefined for a == b; the limit is p0=1/2, value=1")
    p0, log_value = _ratio_max_log(d)
    if not (0.0 <= p0 <= 1.0 and log_value >= -1e-15):
        raise ArithmeticError(f"ratio_max out of range: p0={p0}, log value={log_value}")
    value = math.exp(log_value) if log_value < 709.0 else math.inf
    return RatioMax(p0, max(value, 1.0))


def g_function(x: float, A: float, B: float) -> float:
    """G(x) for weights in [B, A]; G(1) = 1 and G = exp(-gamma(x) B) when A == B."""
    if not x > 0:
        raise DomainError(f"G needs x > 0, got {x}")
    if not 0 < B <= A:
        raise DomainError(f"G needs 0 < B <= A, got A={A}, B={B}")
    log_g = -gamma(x) * B
    if A != B and x != 1.0:
        log_g += max(_ratio_max_log((B - A) * (x - 1.0))[1], 0.0)
    return math.exp(min(log_g, 709.0))


def g_below_one_interval(A: float, B: float, grid: int = 20_000, lo: float = 1e-6):
    """Largest interval (x*, 1) on a uniform grid where G < 1, as ``(x*, 1.0)``.

    Returns None if G >= 1 already at the grid point next to 1.
    """
    xs = np.linspace(1.0, lo, grid + 1)[1:]
    x_star = None
    for x in xs:
        if g_function(float(x), A, B) < 1.0:
            x_star = float(x)
        else:
            break
    if x_star is None:
        return None
    return (x_star, 1.0)


def g_below_one_above(A: float, B: float, y_max: float = 1e3, grid: int = 20_000):
    """Smallest grid y > 1 beyond which G(y) < 1 holds up to ``y_max`` (or None)."""
    ys = np.geomspace(1.0 + 1e-6, y_max, grid)
    ok = np.array([g_function(float(y), A, B) < 1.0 for y in ys])
    if not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    return float(ys[0] if bad.size == 0 else ys[bad[-1] + 1])


def lower_tail_bound(x, mu_lambda, delta, u, t):
    if not 0 < x < 1:
        raise DomainError(f"lower-tail bound needs 0 < x < 1, got {x}")
    _check(mu_lambda, delta, t)
    return math.exp(-gamma(x) * mu_lambda * (1.0 - delta) * u * t)


def upper_tail_bound(y, mu_lambda, delta, U, t):
    if not y > 1:
        raise DomainError(f"upper-tail bound needs y > 1, got {y}")
    _check(mu_lambda, delta, t)
    return math.exp(-gamma(y) * mu_lambda * (1.0 - delta) * U * t)


def _check(mu_lambda, delta, t):
    if not mu_lambda > 0:
        raise DomainError("mu_lambda must be positive")
    if not 0 <= delta < 1:
        raise DomainError("delta must lie in [0, 1)")
    if t < 1:
        raise DomainError("t must be >= 1")


def chernoff_bounds(x_or_y, mu_lambda, delta, u, U, t):
    """(lower, upper) tail bounds; the side that does not apply is None.

    ``x_or_y == 1`` gives (1.0, 1.0), the common limit of both bounds.
    """
    if x_or_y == 1:
        _check(mu_lambda, delta, t)
        return 1.0, 1.0
    if x_or_y < 1:
        return lower_tail_bound(x_or_y, mu_lambda, delta, u, t), None
    return None, upper_tail_bound(x_or_y, mu_lambda, delta, U, t)


def simulate_z(counts, probs, u, type_weights, t, replicas, rng, delta=0.0):
    """Draws of Z = sum_{i<=t} u . (Bin(floor((1-delta) n_l), p_{k_i l}))_l.

    Each step's type k_i is drawn independently from ``type_weights``,
    independently of the binomials.
    """
    counts = np.asarray(counts)
    probs = np.asarray(probs, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(type_weights, dtype=float)
    trials = np.floor((1.0 - delta) * counts).astype(np.int64)
    kinds = rng.choice(len(w), size=(replicas, t), p=w / w.sum())
    draws = rng.binomial(trials, probs[kinds])          # (replicas, t, m)
    return (draws @ u).sum(axis=1)
