"""File formats shared by the command line and the HTTP layer"""

from .export import TIMELINE_COLUMNS, decision_log_csv, timeline_csv
from .manifest import load_manifest, load_network_config, network_from_dict, parse_manifest

__all__ = [
    'TIMELINE_COLUMNS',
    'decision_log_csv',
    'timeline_csv',
    'load_manifest',
    'load_network_config',
    'network_from_dict',
    'parse_manifest',
]
