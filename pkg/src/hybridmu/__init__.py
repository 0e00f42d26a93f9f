"""Toolkit for the hybrid mu-calculus: model checking via parity games,
circular proof search in an annotated sequent calculus, and proof checking."""

from .syntax import parse, show, negate, unfold, closure, dependency_order, make_well_named

__all__ = ["parse", "show", "negate", "unfold", "closure", "dependency_order",
           "make_well_named"]
