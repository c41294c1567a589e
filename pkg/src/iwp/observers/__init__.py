from .base import DesignError, DivergenceError, Observer
from .ekf import EKF, EkfState, ekf_jacobian, ekf_predict, ekf_step, ekf_update
from .nol import NOL, NolDesign, nol_design, nol_step
from .nop import NOP, NopDesign, desired_hamiltonian, nop_rhs, nop_step

__all__ = [
    "DesignError",
    "DivergenceError",
    "Observer",
    "EKF",
    "EkfState",
    "ekf_jacobian",
    "ekf_predict",
    "ekf_step",
    "ekf_update",
    "NOL",
    "NolDesign",
    "nol_design",
    "nol_step",
    "NOP",
    "NopDesign",
    "desired_hamiltonian",
    "nop_rhs",
    "nop_step",
]
