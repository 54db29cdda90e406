"""Figure rendering for assessment reports: output scatter, cover
boundary, safe-set line. Consumes only the report JSON and samples CSV."""

from .plotting import boundary_points, plot_cover, plot_sweep, read_report, read_samples

__all__ = ["boundary_points", "plot_cover", "plot_sweep", "read_report", "read_samples"]

__version__ = "0.1.0"
