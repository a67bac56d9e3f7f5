"""Adiabatic state preparation by measurements, accelerated with fixed-point quantum search."""
from .evolution import CostLedger, EvolutionConfig, RunResult, childs_run, choose_parameters, fpqs_run
from .fpqs import build_sequence, fpqs_step
from .interpolation import InterpolationProblem, make_grover_instance, make_random_instance

__all__ = [
    "CostLedger",
    "EvolutionConfig",
    "InterpolationProblem",
    "RunResult",
    "build_sequence",
    "childs_run",
    "choose_parameters",
    "fpqs_run",
    "fpqs_step",
    "make_grover_instance",
    "make_random_instance",
]
