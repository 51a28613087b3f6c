"""Dataset exporter: public benchmarks -> the neutral dataset directory format."""

from .cli import ExportManifest, export_dataset, main
from .raw import ExportError, LoadedDataset, fetch_raw_files, load_planetoid

__all__ = [
    "ExportError", "ExportManifest", "LoadedDataset",
    "export_dataset", "fetch_raw_files", "load_planetoid", "main",
]
