"""Simulator for the exact distributed quantum algorithm solving the generalized Simon problem."""

from .algorithms import compute_phases, ds, dsl_round, eds, edsl, qaa_round, solve
from .gf2 import BitVector, Gf2Basis
from .instance import (
    HspInstance,
    NodeOracle,
    ProblemParams,
    brute_force_solve,
    generate,
)

__all__ = [
    "BitVector",
    "Gf2Basis",
    "HspInstance",
    "NodeOracle",
    "ProblemParams",
    "brute_force_solve",
    "compute_phases",
    "ds",
    "dsl_round",
    "eds",
    "edsl",
    "generate",
    "qaa_round",
    "solve",
]
