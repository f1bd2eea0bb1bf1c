"""Batch figure rendering for memcomp CSV artifacts."""

from .render import FIGURE_KINDS, FigureJob, SchemaError, read_table, render

__version__ = "0.1.0"
