"""Property language: parser, printer, and normalizer."""

from .ast import (Arith, BoolOp, F, G, In, ListLit, ListOp, Lit, Neg, Node, Not, P, Quant,
                  RangeList, Rel, Var, free_vars, has_primes, has_temporal, is_temporal)
from .normalize import normalize
from .parser import PropertySyntaxError, parse_property, tokenize
from .printer import pretty_print

__all__ = [
    "Arith", "BoolOp", "F", "G", "In", "ListLit", "ListOp", "Lit", "Neg", "Node", "Not", "P",
    "Quant", "RangeList", "Rel", "Var", "free_vars", "has_primes", "has_temporal", "is_temporal",
    "normalize", "PropertySyntaxError", "parse_property", "tokenize", "pretty_print",
]
