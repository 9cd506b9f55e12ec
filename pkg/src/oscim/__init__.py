"""Simulation toolkit for oscillator Ising machines.

Coupled Kuramoto oscillators with sub-harmonic injection locking minimize
Ising/MaxCut objectives; this package integrates those dynamics, emulates the
resistive coupling board, and checks results against exact and tabu oracles.
"""
from .problem import (IsingProblem, WeightedGraph, cut_value, gen_instance, hamiltonian, laplacian,
                      machine_energy, maxcut_to_ising, parse_problem, serialize_problem)
from .schedule import Schedule, constant, default_schedule, hardware_mode, linear_ramp_Kc
from .dynamics import (PhaseState, SimParams, Trajectory, binarized_energy, drift, lyapunov_energy,
                       simulate, step)
from .readout import binarize, bitflip_count, comparator_readout
from .hardware import QuantizerModel, code_to_resistance, pack_codes, quantize_problem
from .oracle import brute_force, tabu_search
from .bench import run_ensemble

__version__ = "0.1.0"
