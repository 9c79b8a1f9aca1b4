"""Finite-frame workbench for pretransitive modal logics."""

from .formula import SchemeId, parse, render, scheme
from .kripke import Frame, Model, evaluate
from .validity import LogicSpec, is_lambda_frame, logic, valid_axiom, valid_bruteforce

__version__ = "0.1.0"

__all__ = [
    "Frame", "Model", "LogicSpec", "SchemeId", "evaluate", "is_lambda_frame",
    "logic", "parse", "render", "scheme", "valid_axiom", "valid_bruteforce",
]
