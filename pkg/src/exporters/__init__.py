"""Output writers for netflux runs."""

from src.exporters.csv_exporter import export_diagnostics, export_snapshots, export_table
from src.exporters.json_exporter import export_diagnostics_json
from src.exporters.readme_exporter import export_output_readme

__all__ = [
    "export_diagnostics",
    "export_diagnostics_json",
    "export_output_readme",
    "export_snapshots",
    "export_table",
]
