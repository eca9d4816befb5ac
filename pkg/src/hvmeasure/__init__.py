"""Measurement statistics under a random hidden action variable.

Public API re-exported from the submodules; see each module for details.
"""

from .distributions import (
    Family,
    HalfLineDensity,
    HiddenDensity,
    HiddenVarParams,
    make_dirac,
    make_half_line,
    make_lognormal,
    moment_plus,
    sample_lambda,
    symmetrize,
    variance_plus,
    worker_stream,
)
from .evolution import (
    AliasingWarning,
    InstabilityError,
    MarginError,
    WaveGrid,
    advect,
    evolve_free,
    propagate_free,
)
from .oracle import KSReport, QuadratureError, QuadratureResult, integrate, ks_test, mc_moment
from .stern_gerlach import (
    GaussianPacket,
    SGParams,
    analytic_evolve,
    compare_numeric,
    imprinted_packet,
    phase_imprint,
    sg_outcome,
)
from .von_neumann import (
    EventTable,
    MeasurementConfig,
    MixtureStats,
    SpectralState,
    conditional_density,
    eigenstate_moments,
    mixture_moments,
    modified_born_density,
    packet_separation_check,
    quadrature_moments,
    reliability_bound,
    simulate_events,
)

__version__ = "0.1.0"
