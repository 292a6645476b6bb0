"""Offline figures from the energy-efficiency solver's CSV outputs."""

from .figures import FigureSpec, RenderSummary, SchemaMismatch, render

__version__ = "0.1.0"
