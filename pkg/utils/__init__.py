"""
Output helpers: CSV tables, legacy VTK, MatrixMarket and console reports
"""
from .csv_export import CSV_HEADER, reports_to_csv, write_reports_csv
from .vtk_export import export_vtk, vtk_text
from .matrix_market import export_matrix
from .reports import format_reports, print_reports

__all__ = [
    'CSV_HEADER',
    'reports_to_csv',
    'write_reports_csv',
    'export_vtk',
    'vtk_text',
    'export_matrix',
    'format_reports',
    'print_reports'
]
