"""Fast-slow bursting models, bifurcation landscapes and burst-feature fitting."""

from .params import ModelParams, FULL7D, REDUCED4D, InvalidParameterError
from .paths import EllipsePath, ellipse_point, ellipse_rhs, path_extent
from .model import (ReducedFast, FullFast, gate_inf, gate_tau, currents,
                    rhs_fast7, rhs_slow7, rhs_fast4)
from .integrate import (integrate, detect_events, rk4, Trajectory,
                        EventRecord, StepSizeError)
from .bifurcation import (Equilibrium, BifCurve, find_equilibria, eigen,
                          trace_fold_curve, trace_hopf_curve, verify_snic,
                          read_curves, write_curves)
from .landscape import (GridSpec, ScalarField, ContourSet, orbit_period,
                        relambda, build_field, extract_contours,
                        PERIOD, RE_LAMBDA)
from .features import (BurstTrace, FeatureVector, Spike, Stages,
                       ClassificationError, detect_spikes, segment_stages,
                       burst_features, feature_distance, run_driven,
                       run_autonomous, min_oscillation_amplitude)
from .fit import FitProblem, FitResult, Trial, fit_path

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "FULL7D", "REDUCED4D", "InvalidParameterError",
    "EllipsePath", "ellipse_point", "ellipse_rhs", "path_extent",
    "ReducedFast", "FullFast", "gate_inf", "gate_tau", "currents",
    "rhs_fast7", "rhs_slow7", "rhs_fast4",
    "integrate", "detect_events", "rk4", "Trajectory", "EventRecord",
    "StepSizeError",
    "Equilibrium", "BifCurve", "find_equilibria", "eigen",
    "trace_fold_curve", "trace_hopf_curve", "verify_snic",
    "read_curves", "write_curves",
    "GridSpec", "ScalarField", "ContourSet", "orbit_period", "relambda",
    "build_field", "extract_contours", "PERIOD", "RE_LAMBDA",
    "BurstTrace", "FeatureVector", "Spike", "Stages", "ClassificationError",
    "detect_spikes", "segment_stages", "burst_features", "feature_distance",
    "run_driven", "run_autonomous", "min_oscillation_amplitude",
    "FitProblem", "FitResult", "Trial", "fit_path",
    "__version__",
]
