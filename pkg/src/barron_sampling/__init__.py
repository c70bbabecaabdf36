"""Sampling-based recovery of Barron functions on the cube ``[-1/2, 1/2]^d``."""

from .barron_core import FourierSum, barron_norm_bound, evaluate, random_unit_sum
from .global_recon import GlobalPlan, PiecewiseReconstruction, make_global_plan, reconstruct_global
from .holder_recon import GridInterpolant, grid_plan
from .l1_solver import MeasurementSystem, ToleranceConfig, bpdn_solve
from .lp_combine import ClipCombiner, clip_bound, combine_lp_estimator
from .trig_poly import TrigPoly

__all__ = [
    "FourierSum", "barron_norm_bound", "evaluate", "random_unit_sum",
    "GlobalPlan", "PiecewiseReconstruction", "make_global_plan", "reconstruct_global",
    "GridInterpolant", "grid_plan", "MeasurementSystem", "ToleranceConfig", "bpdn_solve",
    "ClipCombiner", "clip_bound", "combine_lp_estimator", "TrigPoly",
]
__version__ = "0.1.0"
