"""Exact arithmetic for free nilpotent Lie algebras over Q and their
Mal'cev-corresponding torsion-free nilpotent groups."""

__version__ = "0.1.0"
