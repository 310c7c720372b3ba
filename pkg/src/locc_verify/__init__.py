"""Measurement strategies that test a two-qubit source against an entangled target state."""

from .errors import VerificationError
from .spectral import analyze, num_tests, second_largest, twirl, worst_case_pass, worst_case_state
from .states import TargetState, make_target
from .strategies import STRATEGY_NAMES, PovmElement, Strategy, StrategyClass, build_strategy

__version__ = "0.1.0"

__all__ = [
    "STRATEGY_NAMES",
    "PovmElement",
    "Strategy",
    "StrategyClass",
    "TargetState",
    "VerificationError",
    "analyze",
    "build_strategy",
    "make_target",
    "num_tests",
    "second_largest",
    "twirl",
    "worst_case_pass",
    "worst_case_state",
]
