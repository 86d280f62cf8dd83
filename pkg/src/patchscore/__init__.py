"""Theoretical patchability scoring for RTL designs.

Parses a synthesizable SystemVerilog subset, lowers it to per-signal drive
trees, and quantifies how controllable (and observable) each signal becomes
under a chosen set of patching control cells.
"""

from importlib import resources
from pathlib import Path

from .ast_nodes import SourceModule, module_to_source
from .elaborate import (CaseK, Cond, DataflowModel, DriveTree, Hold, Leaf,
                        SignalInfo, elaborate, model_from_json, model_to_json,
                        rewrite_combinational, rewrite_sequential, unroll_loops,
                        width_of)
from .errors import (ConfigError, ElabError, EvalError, LexError, LimitError,
                     ParseError, PatchScoreError, UnsupportedConstruct)
from .evaluate import (ComparisonTable, CweRequirement, OptionReport,
                       compare_options, evaluate_option, load_cwe_requirements,
                       load_patch_configs, suggest_options)
from .lexer import Token, TokenKind, tokenize
from .parser import parse_module, parse_source
from .scoring import (PatchConfig, compute_pc, compute_po, score_case,
                      score_cond, score_drive, score_expr)

__version__ = "0.1.0"

__all__ = [
    "CaseK", "ComparisonTable", "Cond", "ConfigError", "CweRequirement",
    "DataflowModel", "DriveTree", "ElabError", "EvalError", "Hold", "Leaf",
    "LexError", "LimitError", "OptionReport", "ParseError", "PatchConfig",
    "PatchScoreError", "SignalInfo", "SourceModule", "Token", "TokenKind",
    "UnsupportedConstruct", "compare_options", "compute_pc", "compute_po",
    "elaborate", "evaluate_option", "fixture_path", "load_cwe_requirements",
    "load_patch_configs", "model_from_json", "model_to_json", "module_to_source",
    "parse_module", "parse_source", "rewrite_combinational", "rewrite_sequential",
    "score_case", "score_cond", "score_drive", "score_expr", "suggest_options",
    "tokenize", "unroll_loops", "width_of",
]


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture file (reglk_wrapper.sv, options_table2.json,
    cwe_fixture.json)."""
    return Path(resources.files(__name__) / "fixtures" / name)
