"""Wave-front tracking for the inverse problem of supersonic flow past a curved wedge."""
from .gas import FlowState, GasParams
from .scenario import Background, ConditionError, Perturbation, Scenario, SolverConfig
from .tracking import TrackingParams, run, sample_solution

__all__ = ["FlowState", "GasParams", "Background", "ConditionError", "Perturbation",
           "Scenario", "SolverConfig", "TrackingParams", "run", "sample_solution"]
__version__ = "0.1.0"
