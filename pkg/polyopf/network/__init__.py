"""Network model, OPF matrices and constraint residuals."""

from .feasibility import FeasibilityReport, bus_injections, objective_value, residuals
from .matrices import OpfMatrices, build_opf_matrices, real_forms
from .model import Branch, FlowEnd, PowerNetwork, build_network

__all__ = [
    "Branch",
    "FeasibilityReport",
    "FlowEnd",
    "OpfMatrices",
    "PowerNetwork",
    "build_network",
    "build_opf_matrices",
    "bus_injections",
    "objective_value",
    "real_forms",
    "residuals",
]
