"""Figures from modcomp metric CSVs and gap reports."""

from plotkit.figures import FigureSpec, plot_error_curves, plot_gamma_race, plot_p_hat, render
from plotkit.io import SchemaError, load_arm_summary, load_gap_report, load_metrics

__all__ = [
    "FigureSpec",
    "SchemaError",
    "load_arm_summary",
    "load_gap_report",
    "load_metrics",
    "plot_error_curves",
    "plot_gamma_race",
    "plot_p_hat",
    "render",
]
