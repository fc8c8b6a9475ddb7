"""Case files: MATPOWER parsing and the bundled corpus."""

from .case import BranchRow, BusRow, CaseData, GenCostRow, GenRow
from .corpus import apply_overrides, corpus_case, corpus_dir, list_corpus, load_case
from .parser import format_case, parse_case, validate_case

__all__ = [
    "BranchRow",
    "BusRow",
    "CaseData",
    "GenCostRow",
    "GenRow",
    "apply_overrides",
    "corpus_case",
    "corpus_dir",
    "format_case",
    "list_corpus",
    "load_case",
    "parse_case",
    "validate_case",
]
