"""Von Neumann angular-momentum measurement with a hidden variable.

Each event picks an eigenvalue ``l`` with its Born weight, draws
``lambda`` from the hidden density and records ``l' = |lambda| l / hbar``
together with the pointer displacement ``g l' t``.  Closed-form moments of
``l'`` live next to quadrature of the same quantities so the two can be
compared.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .distributions import (
    HalfLineDensity,
    HiddenDensity,
    as_generator,
    moment_plus,
    sample_lambda,
    variance_plus,
    worker_stream,
)
from .oracle import integrate

__all__ = [
    "SpectralState",
    "MeasurementConfig",
    "MeasurementEvent",
    "EventTable",
    "MixtureStats",
    "OutcomeDensity",
    "SeparationReport",
    "EVENT_FIELDS",
    "classical_pointer",
    "outcome_given_eigenvalue",
    "conditional_density",
    "eigenstate_moments",
    "modified_born_density",
    "mixture_moments",
    "quadrature_moments",
    "quadrature_expectation",
    "simulate_events",
    "reliability_bound",
    "packet_separation_check",
]

EVENT_FIELDS = ("index", "chosen_l", "lambda", "outcome", "pointer_shift")


@dataclass(frozen=True)
class SpectralState:
    """Eigenvalues ``l_k`` (units of hbar) with amplitudes ``c_k``."""

    levels: tuple
    amplitudes: tuple

    def __post_init__(self):
        levels = tuple(float(l) for l in self.levels)
        amps = tuple(complex(c) for c in self.amplitudes)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "amplitudes", amps)
        if not levels:
            raise ValueError("a state needs at least one level")
        if len(levels) != len(amps):
            raise ValueError("levels and amplitudes differ in length")
        if len(set(levels)) != len(levels):
            raise ValueError("eigenvalues must be pairwise distinct")
        if not all(math.isfinite(l) for l in levels):
            raise ValueError("eigenvalues must be finite")
        norm = sum(abs(c) ** 2 for c in amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"sum |c_k|^2 = {norm!r}, expected 1")

    @classmethod
    def eigenstate(cls, l) -> "SpectralState":
        return cls((l,), (1.0,))

    @classmethod
    def from_weights(cls, levels, weights) -> "SpectralState":
        """Real non-negative amplitudes ``sqrt(w_k)``."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        return cls(tuple(levels), tuple(np.sqrt(w)))

    @classmethod
    def random(cls, stream, n_levels=3, max_level=5) -> "SpectralState":
        """Amplitudes uniform on the complex unit sphere; distinct integer levels."""
        rng = as_generator(stream)
        levels = rng.choice(np.arange(-max_level, max_level + 1), size=n_levels, replace=False)
        z = rng.standard_normal(n_levels) + 1j * rng.standard_normal(n_levels)
        z /= np.linalg.norm(z)
        return cls(tuple(levels.tolist()), tuple(z.tolist()))

    @property
    def weights(self) -> np.ndarray:
        return np.abs(np.asarray(self.amplitudes)) ** 2

    @property
    def quantum_mean(self) -> float:
        return float(np.dot(self.levels, self.weights))

    @property
    def quantum_variance(self) -> float:
        mq = self.quantum_mean
        return float(np.dot((np.asarray(self.levels) - mq) ** 2, self.weights))


@dataclass(frozen=True)
class MeasurementConfig:
    g: float
    t: float
    hbar: float = 1.0
    n_events: int = 100_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.g * self.t > 0:
            raise ValueError("need g * t > 0")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.n_events < 1:
            raise ValueError("n_events must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class MeasurementEvent:
    index: int
    chosen_l: float
    lam: float
    outcome_lprime: float
    pointer_shift: float


@dataclass(frozen=True)
class EventTable:
    """Column-oriented event record; iterating yields :class:`MeasurementEvent`."""

    chosen_l: np.ndarray
    lam: np.ndarray
    outcome: np.ndarray
    pointer_shift: np.ndarray

    def __len__(self):
        return self.chosen_l.size

    def __getitem__(self, i):
        i = range(len(self))[i]
        return MeasurementEvent(
            i, float(self.chosen_l[i]), float(self.lam[i]),
            float(self.outcome[i]), float(self.pointer_shift[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_FIELDS)
        for i in range(len(self)):
            w.writerow((
                i, repr(float(self.chosen_l[i])), repr(float(self.lam[i])),
                repr(float(self.outcome[i])), repr(float(self.pointer_shift[i])),
            ))


@dataclass(frozen=True)
class MixtureStats:
    m1: float
    m2: float
    var: float
    mq: float
    varq: float


def classical_pointer(q2_0, g, L, t):
    """Final pointer position after the impulsive coupling ``g L p2``."""
    return q2_0 + g * L * t


def outcome_given_eigenvalue(l, lam, hbar=1.0):
    """Measured value ``|lambda| l / hbar``."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    return np.abs(lam) * l / hbar


@dataclass(frozen=True)
class OutcomeDensity:
    """Law of ``l'`` for a weighted set of eigenvalues.

    Continuous part from the log-normal branch of each non-zero level,
    plus explicit point masses: every ``l = 0`` level puts its weight at
    ``l' = 0``, and the degenerate family puts each weight at ``l' = l``.
    """

    levels: tuple
    weights: tuple
    plus: HalfLineDensity
    hbar: float

    def _continuous(self):
        if self.plus.is_degenerate:
            return []
        return [(l, w) for l, w in zip(self.levels, self.weights) if l != 0 and w > 0]

    @property
    def atoms(self) -> tuple:
        masses: dict[float, float] = {}
        for l, w in zip(self.levels, self.weights):
            if w == 0:
                continue
            if l == 0 or self.plus.is_degenerate:
                masses[l] = masses.get(l, 0.0) + w
        return tuple(sorted(masses.items()))

    def pdf(self, lp):
        """Continuous part of the density (point masses excluded)."""
        lp = np.asarray(lp, dtype=float)
        out = np.zeros_like(lp)
        for l, w in self._continuous():
            out += w * (self.hbar / abs(l)) * self.plus.pdf(self.hbar * lp / l)
        return out

    def cdf(self, lp):
        lp = np.asarray(lp, dtype=float)
        out = np.zeros_like(lp)
        for l, w in self._continuous():
            a = self.hbar * lp / l
            out += w * (self.plus.cdf(a) if l > 0 else 1.0 - self.plus.cdf(a))
        for loc, w in self.atoms:
            out += w * (lp >= loc)
        return out

    def log_windows(self) -> dict:
        """``ln|l'|`` ranges for the positive (+1) and negative (-1) half-axes."""
        lo_p, hi_p = self.plus.log_window()
        out = {}
        for l, _ in self._continuous():
            s = 1 if l > 0 else -1
            shift = math.log(abs(l) / self.hbar)
            lo, hi, centers = out.get(s, (math.inf, -math.inf, ()))
            out[s] = (min(lo, lo_p + shift), max(hi, hi_p + shift),
                      centers + (math.log(abs(l)),))
        return out


def conditional_density(l, plus: HalfLineDensity, hbar=None) -> OutcomeDensity:
    """Density of ``l'`` for an eigenstate with eigenvalue ``l != 0``."""
    if l == 0:
        raise ValueError("l = 0 gives a point mass at l' = 0; use modified_born_density")
    hbar = plus.hbar if hbar is None else hbar
    return OutcomeDensity((float(l),), (1.0,), plus, float(hbar))


def modified_born_density(state: SpectralState, plus: HalfLineDensity, hbar=None) -> OutcomeDensity:
    """Born-weighted mixture ``sum_k |c_k|^2 P(l'|l_k)``."""
    hbar = plus.hbar if hbar is None else hbar
    return OutcomeDensity(state.levels, tuple(state.weights.tolist()), plus, float(hbar))


def eigenstate_moments(l, plus: HalfLineDensity, hbar=None):
    hbar = plus.hbar if hbar is None else hbar
    m1 = l / hbar * moment_plus(plus, 1)
    m2 = (l / hbar) ** 2 * moment_plus(plus, 2)
    var = (l / hbar) ** 2 * variance_plus(plus)
    return m1, m2, var


def mixture_moments(state: SpectralState, plus: HalfLineDensity, hbar=None) -> MixtureStats:
    hbar = plus.hbar if hbar is None else hbar
    mq = state.quantum_mean
    varq = state.quantum_variance
    m1 = mq * moment_plus(plus, 1) / hbar
    var = varq * moment_plus(plus, 2) / hbar**2 + mq**2 * variance_plus(plus) / hbar**2
    return MixtureStats(m1=m1, m2=var + m1**2, var=var, mq=mq, varq=varq)


def quadrature_expectation(density: OutcomeDensity, func, rtol=1e-11):
    """``E[func(l')]`` by adaptive quadrature of the density itself.

    Each half-axis is integrated in ``ln|l'|`` over the union of its
    components' windows; point masses are added separately.
    """
    total = 0.0
    for sign, (lo, hi, centers) in density.log_windows().items():
        integrand = lambda z: func(z) * density.pdf(z)  # noqa: E731
        a, b = (0.0, math.inf) if sign > 0 else (-math.inf, 0.0)
        res = integrate(integrand, a, b, tol=0.0, rtol=rtol,
                        log_window=(lo, hi), points=centers)
        total += res.value
    for loc, w in density.atoms:
        total += w * float(func(np.asarray(loc)))
    return total


def quadrature_moments(density: OutcomeDensity, rtol=1e-11):
    """``(m1, m2, var)`` of ``l'`` from quadrature; the independent route."""
    m1 = quadrature_expectation(density, lambda z: z, rtol)
    m2 = quadrature_expectation(density, lambda z: z * z, rtol)
    var = quadrature_expectation(density, lambda z: (z - m1) ** 2, rtol)
    return m1, m2, var


def _simulate_block(levels, weights, P, rng, m):
    k = rng.choice(len(levels), size=m, p=weights)
    chosen = levels[k]
    lam = sample_lambda(P, rng, m)
    return chosen, lam


def simulate_events(state: SpectralState, config: MeasurementConfig, P: HiddenDensity) -> EventTable:
    """Monte-Carlo measurement record.

    Events are split into ``config.workers`` contiguous blocks, block ``w``
    drawing from ``worker_stream(config.seed, w)``; output order is the
    event index.  Wave packets of different levels are assumed perfectly
    separated (see :func:`packet_separation_check`).
    """
    levels = np.asarray(state.levels)
    weights = state.weights / state.weights.sum()
    sizes = [len(b) for b in np.array_split(np.arange(config.n_events), config.workers)]
    jobs = [(w, m) for w, m in enumerate(sizes) if m > 0]

    def run(job):
        w, m = job
        return _simulate_block(levels, weights, P, worker_stream(config.seed, w), m)

    if len(jobs) == 1:
        parts = [run(jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(jobs)) as ex:
            parts = list(ex.map(run, jobs))
    chosen = np.concatenate([p[0] for p in parts])
    lam = np.concatenate([p[1] for p in parts])
    outcome = np.abs(lam) * chosen / config.hbar
    shift = config.g * outcome * config.t
    return EventTable(chosen, lam, outcome, shift)


def reliability_bound(sigma, delta_l):
    """Quantum number at which the mean shift ``|l| sigma^2 / 2`` equals ``delta_l``."""
    if sigma == 0:
        raise ValueError("sigma = 0: the bound is infinite")
    if sigma < 0 or delta_l <= 0:
        raise ValueError("need sigma > 0 and delta_l > 0")
    return 2.0 * delta_l / sigma / sigma


@dataclass(frozen=True)
class SeparationReport:
    separated: dict = field(default_factory=dict)
    violating_mass: dict = field(default_factory=dict)

    @property
    def all_separated(self) -> bool:
        return all(self.separated.values())

    @property
    def max_violating_mass(self) -> float:
        return max(self.violating_mass.values(), default=0.0)


def packet_separation_check(state: SpectralState, plus: HalfLineDensity, g, t,
                            lambda_quantile, sigma0, k_sep, hbar=None) -> SeparationReport:
    """Check that pointer packets of distinct levels do not overlap.

    A pair ``(l_j, l_k)`` counts as separated when
    ``g |l_j - l_k| lambda_q t / hbar >= k_sep * sigma0`` with ``lambda_q``
    the ``lambda_quantile`` point of ``|lambda|``.  ``violating_mass`` is
    the probability of a ``|lambda|`` too small to separate the pair.
    """
    if not 0 < lambda_quantile < 1:
        raise ValueError("lambda_quantile must lie in (0, 1)")
    if k_sep <= 0 or sigma0 <= 0:
        raise ValueError("k_sep and sigma0 must be positive")
    hbar = plus.hbar if hbar is None else hbar
    lam_q = float(plus.ppf(lambda_quantile))
    separated, mass = {}, {}
    for lj, lk in combinations(state.levels, 2):
        gap = abs(g) * abs(lj - lk) * abs(t) / hbar
        separated[(lj, lk)] = bool(gap * lam_q >= k_sep * sigma0)
        if gap == 0:
            mass[(lj, lk)] = 1.0
        else:
            lam_min = k_sep * sigma0 / gap
            # strict: |lambda| < lam_min violates
            m = float(plus.cdf(np.nextafter(lam_min, 0)))
            mass[(lj, lk)] = m
    return SeparationReport(separated, mass)
