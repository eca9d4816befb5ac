"""Independent numerical checks: adaptive quadrature, KS goodness of fit,
Monte-Carlo moments with standard errors.

Nothing in here knows about the closed forms it is used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureError",
    "QuadratureResult",
    "KSReport",
    "integrate",
    "ks_test",
    "ks_critical_value",
    "mc_moment",
]

# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_K_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes.
_G_WEIGHTS[1:7:2] = _WG[:3]
_G_WEIGHTS[7] = _WG[3]
_G_WEIGHTS[9:15:2] = _WG[2::-1]

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    est_error: float
    evaluations: int


@dataclass(frozen=True)
class KSReport:
    d_statistic: float
    n: int
    threshold_at_alpha: float
    alpha: float

    @property
    def passed(self) -> bool:
        return self.d_statistic < self.threshold_at_alpha


def _eval(f, x):
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.vectorize(f, otypes=[float])(x)
    return y


def _gk15(f, a, b):
    """Apply the 15-point Kronrod rule to each interval [a_i, b_i]."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = center[:, None] + half[:, None] * _NODES[None, :]
    fx = _eval(f, x)
    if not np.all(np.isfinite(fx)):
        raise QuadratureError("integrand returned a non-finite value")
    k = fx @ _K_WEIGHTS
    g = fx @ _G_WEIGHTS
    mean = 0.5 * k
    resabs = np.abs(fx) @ _K_WEIGHTS
    resasc = np.abs(fx - mean[:, None]) @ _K_WEIGHTS
    err = np.abs((k - g) * half)
    resasc = resasc * np.abs(half)
    resabs = resabs * np.abs(half)
    scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * err / np.where(resasc > 0, resasc, 1.0)) ** 1.5), err)
    floor = np.where(resabs > _TINY / (50 * _EPS), 50 * _EPS * resabs, 0.0)
    return k * half, np.maximum(scaled, floor), scaled <= floor


def _integrate_finite(f, a, b, tol, rtol, points, max_intervals):
    edges = [a, *(p for p in sorted(points or ()) if a < p < b), b]
    lo = np.array(edges[:-1], dtype=float)
    hi = np.array(edges[1:], dtype=float)
    val, err, floored = _gk15(f, lo, hi)
    evaluations = 15 * lo.size
    while True:
        total = float(np.sum(val))
        total_err = float(np.sum(err))
        target = max(tol, rtol * abs(total))
        if total_err <= target:
            return QuadratureResult(total, total_err, evaluations)
        if lo.size >= max_intervals:
            raise QuadratureError(
                f"no convergence after {lo.size} intervals: "
                f"estimate {total!r}, error {total_err:.3g} > target {target:.3g}"
            )
        if np.all(floored):
            # only round-off is left; est_error already reports it
            return QuadratureResult(total, total_err, evaluations)
        # bisect every interval carrying more than its share of the budget
        split = (err > target / lo.size) & ~floored
        if not np.any(split):
            split = (err >= err[~floored].max()) & ~floored
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_val, new_err, new_floored = _gk15(f, new_lo, new_hi)
        evaluations += 15 * new_lo.size
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], new_val])
        err = np.concatenate([err[keep], new_err])
        floored = np.concatenate([floored[keep], new_floored])


def integrate(f, a, b, tol=1e-10, rtol=1e-12, *, log_window=None, points=None,
              max_intervals=20000):
    """Globally adaptive Gauss-Kronrod (7/15) quadrature.

    Parameters
    ----------
    f : callable
        Integrand. Called with ndarrays; scalar-only callables are
        vectorized automatically.
    a, b : float
        Limits with ``a < b``. The half-lines ``(0, inf)`` and ``(-inf, 0)``
        are handled by substituting ``x = ln|z|`` and integrating ``x`` over
        ``log_window``, which is then mandatory.
    tol, rtol : float
        Converged once the summed error estimate is below
        ``max(tol, rtol * |value|)``.
    log_window : (float, float), optional
        Range of ``ln|z|`` carrying the mass of the integrand.
    points : sequence of float, optional
        Breakpoints (in the integration variable actually used).

    When every subinterval is limited by round-off rather than truncation
    the result is returned with ``est_error`` set to that round-off bound,
    which may exceed the requested tolerance.

    Raises
    ------
    QuadratureError
        If the interval budget is exhausted.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a!r}, b={b!r}")
    if math.isinf(a) or math.isinf(b):
        if log_window is None:
            raise ValueError("infinite limits need log_window for the ln substitution")
        x_lo, x_hi = log_window
        if a == 0 and b == math.inf:
            g = lambda x: f(np.exp(x)) * np.exp(x)  # noqa: E731
        elif a == -math.inf and b == 0:
            g = lambda x: f(-np.exp(x)) * np.exp(x)  # noqa: E731
        else:
            raise ValueError("only (0, inf) and (-inf, 0) are supported as improper ranges")
        return _integrate_finite(g, float(x_lo), float(x_hi), tol, rtol, points, max_intervals)
    return _integrate_finite(f, float(a), float(b), tol, rtol, points, max_intervals)


def ks_critical_value(alpha: float) -> float:
    """Asymptotic c(alpha) with threshold c(alpha)/sqrt(n)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return math.sqrt(-0.5 * math.log(alpha / 2))


def ks_test(samples, cdf, alpha=0.01) -> KSReport:
    """One-sample Kolmogorov-Smirnov test against a continuous ``cdf``.

    ``D`` is the exact supremum over the sorted samples; the pass threshold
    is the asymptotic ``c(alpha)/sqrt(n)``.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("ks_test needs at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - F)
    d_minus = np.max(F - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    return KSReport(d, n, ks_critical_value(alpha) / math.sqrt(n), alpha)


def mc_moment(samples, k):
    """Sample moment ``mean(x**k)`` and its standard error ``std(x**k)/sqrt(n)``."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples")
    xk = x**k
    return float(xk.mean()), float(xk.std(ddof=1) / math.sqrt(x.size))
