"""minimig: interactive, iterative, rule-based migration of procedural
mini-programs into object-oriented target models."""

__version__ = "0.1.0"
