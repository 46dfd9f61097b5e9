"""Invariant special symplectic half-flat structures and the Type IIA flow on six-dimensional Lie algebras."""

from . import catalog, cli, flow, forms, hitchin, liealg, su3
from ._kernels import backend
from .forms import EPS, KForm

__all__ = ["EPS", "KForm", "backend", "catalog", "cli", "flow", "forms", "hitchin", "liealg", "su3"]
__version__ = "0.1.0"
