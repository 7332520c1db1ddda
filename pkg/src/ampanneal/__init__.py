"""Quantum annealing simulator for the asymmetric magnetization problem."""

from .problem import (
    AmpParams,
    DEFAULT_ENSEMBLE,
    DifficultyEnsemble,
    SET_NAMES,
    classical_energy,
    density_of_states,
    magnetization,
)

__all__ = [
    "AmpParams",
    "DEFAULT_ENSEMBLE",
    "DifficultyEnsemble",
    "SET_NAMES",
    "classical_energy",
    "density_of_states",
    "magnetization",
]

__version__ = "0.1.0"
