"""Parsers, printers and per-dialect typing ontology for the mini dialects."""

from .dialect import DIALECTS, DialectSpec, Violation, ViolationReason, install_catalog, validate
from .miniproc import parse_source
from .printer import print_model, render_fragment
from .targets import parse_target_skeleton

__all__ = [
    "DIALECTS",
    "DialectSpec",
    "Violation",
    "ViolationReason",
    "install_catalog",
    "validate",
    "parse_source",
    "parse_target_skeleton",
    "print_model",
    "render_fragment",
]
