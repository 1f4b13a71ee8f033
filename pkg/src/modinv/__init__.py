"""Modulating-function estimation of sources and coefficients in 1D PDEs."""

from .basis import BasisSet, Expansion, eval_expansion, make_basis, make_hermite, make_monomial
from .errors import ConfigInvalid, ModinvError, NumericalFailure, RankDeficient
from .estimators import (
    EstimateResult,
    LinearSystem,
    assemble_ip1,
    assemble_ip2,
    assemble_ip3,
    assemble_kawahara,
    error_bound,
    estimate_constant_c,
    expand_block,
    noise_error_vector,
    reconstruct_spacetime,
    simpson_weights,
    solve_least_squares,
)
from .experiments import ExperimentConfig, load_config, run_experiment, sweep_domain, sweep_m
from .forward import WaveProblem, WaveSolution, kawahara_u, kawahara_ut, solve_wave
from .grid import Field1D, Field2D, Grid1D, NoiseSpec, add_noise, relative_error
from .modulating import (
    ModulatingFamily,
    eval_derivative,
    make_family,
    make_polynomial_family,
    make_sinusoidal_family,
    verify_order,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSet",
    "ConfigInvalid",
    "EstimateResult",
    "Expansion",
    "ExperimentConfig",
    "Field1D",
    "Field2D",
    "Grid1D",
    "LinearSystem",
    "ModinvError",
    "ModulatingFamily",
    "NoiseSpec",
    "NumericalFailure",
    "RankDeficient",
    "WaveProblem",
    "WaveSolution",
    "add_noise",
    "assemble_ip1",
    "assemble_ip2",
    "assemble_ip3",
    "assemble_kawahara",
    "error_bound",
    "estimate_constant_c",
    "eval_derivative",
    "eval_expansion",
    "expand_block",
    "kawahara_u",
    "kawahara_ut",
    "load_config",
    "make_basis",
    "make_family",
    "make_hermite",
    "make_monomial",
    "make_polynomial_family",
    "make_sinusoidal_family",
    "noise_error_vector",
    "reconstruct_spacetime",
    "relative_error",
    "run_experiment",
    "simpson_weights",
    "solve_least_squares",
    "solve_wave",
    "sweep_domain",
    "sweep_m",
    "verify_order",
]
