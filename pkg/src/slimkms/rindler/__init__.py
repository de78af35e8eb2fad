"""Boost-orbit physics on the Rindler wedge."""

from .fields import BoostCommutator, commutator_massive, pauli_jordan_gate, vacuum_massive, vacuum_massless
from .kinematics import RindlerPoint, WedgePairGeometry, minkowski_interval
from .modesum import wightman_modesum
from .thermal import ThermalWightman, dowker_massless, ground_state_massless, wightman_beta
from .verify import (
    Probe,
    antisymmetric_part_beta_independence,
    bisognano_wichmann_gate,
    l1_family_report,
    scaling_limit_horizon,
    slc_check,
    smeared_scaling_check,
)

__all__ = [
    "BoostCommutator", "Probe", "RindlerPoint", "ThermalWightman", "WedgePairGeometry",
    "antisymmetric_part_beta_independence", "bisognano_wichmann_gate", "commutator_massive",
    "dowker_massless", "ground_state_massless", "l1_family_report", "minkowski_interval",
    "pauli_jordan_gate", "scaling_limit_horizon", "slc_check", "smeared_scaling_check",
    "vacuum_massive", "vacuum_massless", "wightman_beta", "wightman_modesum",
]
