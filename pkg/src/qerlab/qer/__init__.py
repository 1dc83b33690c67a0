"""Cauchy-data functional, restriction density, symbol checks and h-sweeps."""
from .cauchy import (CauchyData, ModeForms, cauchy_lhs, grid_for, log_restriction_norm, log_weighted_norm,
                     mode_forms, restriction_norm, weighted_norm)
from .density import (B0SQ, GeneralPosition, calibrate_b0sq, density_q, density_q_fd, general_position_check,
                      qer_rhs, qer_rhs_angular_average, qer_rhs_defect)
from .identities import cr_residual, r_identity_residual, y_commutator_closed_form, y_decomposition_residual
from .multiplier import QSymbol, multiplier_residual
from .scaling import Fit, QERReport, QERRow, emit_report, fit_loglog, scaling_experiment
from .symbols import EllipticityScan, ellipticity_scan, symbol_A, symbol_B
from .wavefront import FlowOutSet, containment_sweep, flow_out_set, wf_sigma_containment

__all__ = [
    "CauchyData", "ModeForms", "cauchy_lhs", "grid_for", "log_restriction_norm", "log_weighted_norm",
    "mode_forms", "restriction_norm", "weighted_norm",
    "B0SQ", "GeneralPosition", "calibrate_b0sq", "density_q", "density_q_fd", "general_position_check",
    "qer_rhs", "qer_rhs_angular_average", "qer_rhs_defect",
    "cr_residual", "r_identity_residual", "y_commutator_closed_form", "y_decomposition_residual",
    "QSymbol", "multiplier_residual",
    "Fit", "QERReport", "QERRow", "emit_report", "fit_loglog", "scaling_experiment",
    "EllipticityScan", "ellipticity_scan", "symbol_A", "symbol_B",
    "FlowOutSet", "containment_sweep", "flow_out_set", "wf_sigma_containment",
]
