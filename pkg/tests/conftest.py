import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from burstlab import FULL7D, REDUCED4D, EllipsePath
from burstlab.figures import CURVE_RANGES
from burstlab.bifurcation import trace_fold_curve, trace_hopf_curve
from burstlab.features import run_driven
from burstlab.model import FullFast, ReducedFast


@pytest.fixture(scope="session")
def reduced():
    return ReducedFast(REDUCED4D)


@pytest.fixture(scope="session")
def full():
    return FullFast(FULL7D)


@pytest.fixture(scope="session")
def curves2(reduced):
    rng = CURVE_RANGES["reduced"]
    snic = trace_fold_curve(reduced, na_range=rng["snic"])
    ah = trace_hopf_curve(reduced, na_range=rng["ah"])
    return snic, ah


@pytest.fixture(scope="session")
def curves5(full):
    rng = CURVE_RANGES["full"]
    snic = trace_fold_curve(full, na_range=rng["snic"])
    ah = trace_hopf_curve(full, na_range=rng["ah"])
    return snic, ah


@pytest.fixture(scope="session")
def fig4_d1_path():
    return EllipsePath.centered(0.15, 5.85, 1.0, 0.0, 0.004)


@pytest.fixture(scope="session")
def fig4_d1_trace(reduced, curves2, fig4_d1_path):
    snic, ah = curves2
    return run_driven(reduced, fig4_d1_path, snic, ah)
