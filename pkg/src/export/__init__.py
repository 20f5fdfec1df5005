"""
Export Module - Emissão de CSV e resumos dos comandos.
"""

from .export_manager import DESIGN_COLUMNS, ExportManager, ExportStats, design_to_frame

__all__ = ['DESIGN_COLUMNS', 'ExportManager', 'ExportStats', 'design_to_frame']
