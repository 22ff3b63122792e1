"""Local master equations for weakly coupled open quantum systems."""
from .bath import BathSpec, correlation, d_zero, decay_time, spectral_density
from .filtered import CouplingChannel, SpectralDecomposition, filtered, heisenberg
from .master import EvolutionConfig, EvolutionError, evolve
from .fixed_point import gibbs_state, perturbative_correction, fixed_point_report
from .positivity import rho_prime_spectrum, sweep_Tprime
from .unraveling import estimate_observable, jump_operators, sample_trajectories
from .bench import build_bath, exact_evolve, powder_scenario
from .budget import error_budget

__version__ = "0.1.0"

__all__ = [
    "BathSpec", "correlation", "d_zero", "decay_time", "spectral_density",
    "CouplingChannel", "SpectralDecomposition", "filtered", "heisenberg",
    "EvolutionConfig", "EvolutionError", "evolve",
    "gibbs_state", "perturbative_correction", "fixed_point_report",
    "rho_prime_spectrum", "sweep_Tprime",
    "estimate_observable", "jump_operators", "sample_trajectories",
    "build_bath", "exact_evolve", "powder_scenario", "error_budget",
]
