"""Stern-Gerlach measurement: magnet phase imprint, then free flight of a
Gaussian atomic packet under the hidden-variable free equation.

Sign convention.  The magnet imprints ``exp(-i Delta_l z / hbar)`` with
``Delta_l = mu l T``, i.e. a wavevector ``-Delta_l / hbar``.  The packet
therefore drifts towards negative ``z`` for ``mu l > 0``, with
displacement ``-g_M l |lambda| t / hbar`` (``g_M = mu T / m_a``); the
read-out :func:`sg_outcome` undoes that sign so that the inferred value is
``l' = |lambda| l / hbar``, the same law as the von Neumann pointer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .evolution import MARGIN_SIGMAS, WaveGrid, l2_error, observables, propagate_free

__all__ = [
    "SGParams",
    "GaussianPacket",
    "phase_imprint",
    "imprinted_packet",
    "analytic_evolve",
    "packet_displacement",
    "sg_outcome",
    "packet_grid",
    "compare_numeric",
]


@dataclass(frozen=True)
class SGParams:
    mu: float
    T: float
    m_a: float

    def __post_init__(self):
        if not self.m_a > 0:
            raise ValueError("m_a must be positive")

    @property
    def g_M(self) -> float:
        return self.mu * self.T / self.m_a


@dataclass(frozen=True)
class GaussianPacket:
    """Free Gaussian packet after elapsed time ``t`` (``center`` is current).

    The amplitude at ``t = 0`` is ``exp(-(z - c0)^2 / (4 sigma0^2) + i k z)``
    up to normalisation, with ``k = wavevector``.
    """

    sigma0: float
    center: float
    wavevector: float
    m_a: float
    lam: float
    t: float = 0.0

    def __post_init__(self):
        if self.sigma0 <= 0 or self.m_a <= 0:
            raise ValueError("sigma0 and m_a must be positive")
        if self.lam == 0:
            raise ValueError("lambda must be non-zero")

    @property
    def tau(self) -> float:
        return abs(self.lam) * self.t / (2 * self.m_a * self.sigma0**2)

    @property
    def complex_width(self) -> complex:
        """``sigma_t = sigma0 (1 + i |lam| t / (2 m_a sigma0^2))``."""
        return self.sigma0 * complex(1.0, self.tau)

    @property
    def spatial_variance(self) -> float:
        return self.sigma0**2 * (1.0 + self.tau**2)

    @property
    def velocity(self) -> float:
        return abs(self.lam) * self.wavevector / self.m_a

    @property
    def initial_center(self) -> float:
        return self.center - self.velocity * self.t

    def wavefunction(self, z):
        z = np.asarray(z, dtype=float)
        s0, sw = self.sigma0, self.complex_width
        k = self.wavevector
        c0 = self.initial_center
        pref = (2 * math.pi * s0**2) ** -0.25 * np.sqrt(s0 / sw)
        expo = (-((z - self.center) ** 2) / (4 * s0 * sw)
                + 1j * k * (z - c0)
                - 0.5j * abs(self.lam) * k**2 * self.t / self.m_a)
        return pref * np.exp(expo)

    def density(self, z):
        z = np.asarray(z, dtype=float)
        v = self.spatial_variance
        return np.exp(-((z - self.center) ** 2) / (2 * v)) / math.sqrt(2 * math.pi * v)


def phase_imprint(sg: SGParams, l) -> float:
    """Momentum kick ``Delta_l = mu l T``; the phase factor is ``exp(-i Delta_l z / hbar)``."""
    return sg.mu * l * sg.T


def imprinted_packet(sg: SGParams, l, sigma0, lam, hbar=1.0, center=0.0) -> GaussianPacket:
    return GaussianPacket(sigma0, center, -phase_imprint(sg, l) / hbar, sg.m_a, lam)


def packet_displacement(wavevector, lam, m_a, t):
    """Centre displacement ``|lam| k t / m_a`` during free flight (vectorised)."""
    return np.abs(lam) * wavevector * t / m_a


def analytic_evolve(p: GaussianPacket, t) -> GaussianPacket:
    """Exact free evolution of the packet by a further time ``t >= 0``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return p
    shift = packet_displacement(p.wavevector, p.lam, p.m_a, t)
    return replace(p, center=p.center + float(shift), t=p.t + t)


def sg_outcome(displacement, g_M, t):
    """Inferred ``l'`` from the packet displacement after flight time ``t``.

    The displacement is ``-g_M l' t`` with ``l' = |lambda| l / hbar``, so
    ``hbar`` cancels and is not needed here.
    """
    if g_M * t == 0:
        raise ValueError("g_M * t = 0: no measurement took place")
    return -np.asarray(displacement) / (g_M * t)


def packet_grid(p: GaussianPacket, t, n=4096, pad=2.0):
    """Periodic domain holding the packet from now until ``t`` later, with
    ``MARGIN_SIGMAS + pad`` final standard deviations of room on each side."""
    end = analytic_evolve(p, t)
    reach = (MARGIN_SIGMAS + pad) * math.sqrt(end.spatial_variance)
    lo = min(p.center, end.center) - reach
    hi = max(p.center, end.center) + reach
    dz = (hi - lo) / n
    k_needed = abs(p.wavevector) + (MARGIN_SIGMAS + pad) / (2 * p.sigma0)
    if k_needed > math.pi / dz:
        raise ValueError(
            f"{n} points cannot resolve the packet: need dz <= {math.pi / k_needed:.4g}, "
            f"domain gives {dz:.4g}"
        )
    return WaveGrid.from_function(p.wavefunction, lo, hi, n)


def compare_numeric(p: GaussianPacket, t, n=4096, scheme="spectral", dt=None) -> dict:
    """Evolve ``p`` numerically and compare with :func:`analytic_evolve`."""
    grid0 = packet_grid(p, t, n)
    norm0 = observables(grid0)[0]
    grid = propagate_free(grid0, p.lam, p.m_a, t, dt=dt, scheme=scheme)
    exact = analytic_evolve(p, t)
    norm, mean, var = observables(grid)
    psi_err = math.sqrt(float(np.sum(np.abs(grid.values - exact.wavefunction(grid.z)) ** 2)) * grid.dz)
    return {
        "center_analytic": exact.center,
        "center_numeric": mean,
        "center_error": abs(mean - exact.center),
        "var_analytic": exact.spatial_variance,
        "var_numeric": var,
        "var_error": abs(var - exact.spatial_variance),
        "l2_density_error": l2_error(grid, exact.density(grid.z)),
        "l2_wavefunction_error": psi_err,
        "norm_drift": abs(norm - norm0),
        "grid": grid,
    }
