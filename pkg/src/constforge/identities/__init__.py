"""Expression language, identity registry and verification."""

from .evaluate import closed_form_A, eval_expr, eval_stabilized, evaluate
from .expr import Expression, ParseError, parse_expr, to_text
from .registry import (
    BUILTIN_MANIFEST,
    Identity,
    ManifestError,
    builtin_registry,
    load_manifest,
    parse_manifest,
)
from .verify import VerificationReport, verify, verify_all

__all__ = [
    "BUILTIN_MANIFEST", "Expression", "Identity", "ManifestError", "ParseError",
    "VerificationReport", "builtin_registry", "closed_form_A", "eval_expr",
    "eval_stabilized", "evaluate", "load_manifest", "parse_expr", "parse_manifest",
    "to_text", "verify", "verify_all",
]
