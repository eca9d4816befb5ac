"""Hidden-variable densities.

The symmetric law ``P(lambda; hbar, sigma)`` is built by mirroring a
normalized half-line density ``P+`` on ``lambda > 0``.  Two half-line
families are provided: a log-normal with location ``ln(hbar)`` and scale
``sigma``, and the degenerate point mass at ``hbar`` that stands for the
exact quantum law (``sigma = 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "Family",
    "HiddenVarParams",
    "HalfLineDensity",
    "HiddenDensity",
    "make_lognormal",
    "make_dirac",
    "make_half_line",
    "moment_plus",
    "variance_plus",
    "symmetrize",
    "sample_lambda",
    "worker_stream",
    "as_generator",
    "WINDOW_SIGMAS",
]

# Half-width, in units of sigma, of the ln(lambda) window used for quadrature.
WINDOW_SIGMAS = 12.0

_MAX_LOG = math.log(np.finfo(float).max)


class Family(str, Enum):
    LOGNORMAL = "lognormal"
    DIRAC = "dirac"


@dataclass(frozen=True)
class HiddenVarParams:
    """``hbar > 0`` (action unit, 1 in simulation units) and width ``sigma >= 0``."""

    hbar: float = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise ValueError(f"hbar must be finite and positive, got {self.hbar!r}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be finite and non-negative, got {self.sigma!r}")


@dataclass(frozen=True)
class HalfLineDensity:
    """Normalized density ``P+`` on ``lambda > 0``.

    For ``Family.DIRAC`` the law is a unit atom at ``hbar``; :meth:`pdf`
    then returns the (identically zero) continuous part and the atom is
    exposed through :attr:`atoms`.
    """

    family: Family
    params: HiddenVarParams

    def __post_init__(self):
        if self.family is Family.LOGNORMAL and self.params.sigma == 0:
            raise ValueError("sigma = 0 is the degenerate law; use make_dirac")

    @property
    def hbar(self) -> float:
        return self.params.hbar

    @property
    def sigma(self) -> float:
        return self.params.sigma if self.family is Family.LOGNORMAL else 0.0

    @property
    def is_degenerate(self) -> bool:
        return self.family is Family.DIRAC

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        return ((self.hbar, 1.0),) if self.is_degenerate else ()

    @property
    def mode(self) -> float:
        return self.hbar * math.exp(-self.sigma**2)

    def pdf(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.is_degenerate:
            return np.zeros_like(lam)
        s = self.sigma
        out = np.zeros_like(lam)
        pos = lam > 0
        x = np.log(lam[pos] / self.hbar)
        out[pos] = np.exp(-0.5 * (x / s) ** 2) / (lam[pos] * math.sqrt(2 * math.pi) * s)
        return out

    def cdf(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.is_degenerate:
            return np.where(lam >= self.hbar, 1.0, 0.0)
        with np.errstate(divide="ignore"):
            z = np.log(np.where(lam > 0, lam, 0.0) / self.hbar) / self.sigma
        return np.where(lam > 0, ndtr(z), 0.0)

    def ppf(self, q):
        """Quantile function of ``|lambda|``."""
        q = np.asarray(q, dtype=float)
        if np.any((q <= 0) | (q >= 1)):
            raise ValueError("quantile levels must lie in (0, 1)")
        if self.is_degenerate:
            return np.full_like(q, self.hbar)
        return self.hbar * np.exp(self.sigma * ndtri(q))

    def log_window(self) -> tuple[float, float]:
        """``ln(lambda)`` range holding all but a negligible tail of the mass."""
        c = math.log(self.hbar)
        w = WINDOW_SIGMAS * self.sigma
        return c - w, c + w

    def sample_magnitude(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.is_degenerate:
            return np.full(n, self.hbar)
        return self.hbar * np.exp(self.sigma * rng.standard_normal(n))


@dataclass(frozen=True)
class HiddenDensity:
    """Even density ``P(lambda) = P+(|lambda|)/2``; no mass at zero."""

    plus: HalfLineDensity

    @property
    def hbar(self) -> float:
        return self.plus.hbar

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        return tuple(
            (s * loc, 0.5 * w) for loc, w in self.plus.atoms for s in (-1.0, 1.0)
        )

    def pdf(self, lam):
        lam = np.asarray(lam, dtype=float)
        return 0.5 * self.plus.pdf(np.abs(lam))

    def cdf(self, lam):
        lam = np.asarray(lam, dtype=float)
        upper = 0.5 + 0.5 * self.plus.cdf(np.abs(lam))
        return np.where(lam >= 0, upper, 1.0 - upper + self._atom_at(lam))

    def _atom_at(self, lam):
        # left-limit correction so cdf stays right-continuous at -hbar
        if not self.plus.is_degenerate:
            return 0.0
        return np.where(np.abs(lam) == self.hbar, 0.5, 0.0)


def make_lognormal(params: HiddenVarParams) -> HalfLineDensity:
    """Log-normal ``P+`` with location ``ln(hbar)`` and scale ``sigma > 0``."""
    if params.sigma == 0:
        raise ValueError("sigma must be > 0 for the log-normal family; use make_dirac")
    return HalfLineDensity(Family.LOGNORMAL, params)


def make_dirac(hbar: float = 1.0) -> HalfLineDensity:
    return HalfLineDensity(Family.DIRAC, HiddenVarParams(hbar=hbar, sigma=0.0))


def make_half_line(family, hbar=1.0, sigma=0.0) -> HalfLineDensity:
    family = Family(family)
    if family is Family.DIRAC:
        return make_dirac(hbar)
    return make_lognormal(HiddenVarParams(hbar=hbar, sigma=sigma))


def moment_plus(d: HalfLineDensity, k: int) -> float:
    """Raw moment ``M_k = E[lambda**k]`` of the half-line law, in closed form."""
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    k = int(k)
    log_m = k * math.log(d.hbar) + 0.5 * (k * d.sigma) ** 2
    if log_m > _MAX_LOG:
        raise OverflowError(f"M_{k} overflows (log value {log_m:.4g})")
    return math.exp(log_m)


def variance_plus(d: HalfLineDensity) -> float:
    """``M2 - M1**2`` written as ``hbar^2 e^{s^2}(e^{s^2}-1)`` to avoid cancellation."""
    s2 = d.sigma**2
    return d.hbar**2 * math.exp(s2) * math.expm1(s2)


def symmetrize(plus: HalfLineDensity) -> HiddenDensity:
    if not isinstance(plus, HalfLineDensity):
        raise TypeError("symmetrize expects a HalfLineDensity")
    return HiddenDensity(plus)


def as_generator(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return np.random.default_rng(stream)


def worker_stream(seed: int, worker: int) -> np.random.Generator:
    """Independent stream for ``worker`` derived from the master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(worker)]))


def sample_lambda(P: HiddenDensity, stream, n: int) -> np.ndarray:
    """Draw ``n`` i.i.d. values of ``lambda``: magnitude from ``P+``, fair sign."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_generator(stream)
    mag = P.plus.sample_magnitude(rng, n)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return sign * mag

