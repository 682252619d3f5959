"""Zariski closures of rational matrix semigroups and polynomial invariants of affine programs."""

__version__ = "0.1.0"
