from .export_to_csv import export_records, export_scan, export_sweep
from .export_to_excel import ExportToExcel
from .manifest import build_manifest, canonical_manifest, load_config_or_manifest, write_manifest


__all__ = ['ExportToExcel', 'export_records', 'export_scan', 'export_sweep',
           'build_manifest', 'canonical_manifest', 'load_config_or_manifest', 'write_manifest']
