"""Large-delay DDE toolkit: integration, spectrum, diffusion limit."""

__version__ = "0.1.0"

from .dde import (  # noqa: E402
    CubicCounterexample, DdeProblem, GaussianHistory, LinearDecayFeedback, SineMixHistory,
    SolverConfig, Trajectory, dense_eval, integrate, linear_oracle_integrate,
)
from .diffusion import PeriodicField, evolve, mode_decay_rate, wrapped_heat_kernel  # noqa: E402
from .mapper import (  # noqa: E402
    coefficients, compare_profiles, envelope_prediction, extract_peaks, prefactor, reshape,
)
from .spectrum import (  # noqa: E402
    SpectrumRequest, asymptotic_root, exact_root, lambert_identity_check, spectrum,
)
