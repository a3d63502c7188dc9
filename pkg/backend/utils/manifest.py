"""
Dataset Manifests and Network Configs

A manifest lists one file per line as "path size_bytes"; blank lines and
lines starting with '#' are skipped. A network config is a JSON object
{"bandwidth_bps", "rtt_s", "buffer_bytes"}.
"""

import json
import logging
import os

from core.errors import InvalidParameterError, ScenarioError
from core.types import FileInfo, NetworkProfile

logger = logging.getLogger(__name__)


def parse_manifest(text, source='<manifest>'):
    files = []
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        path, sep, size = line.rpartition(' ')
        path = path.strip()
        if not sep or not path:
            raise ScenarioError(f"{source}:{line_no}: expected 'path size_bytes'")
        try:
            size = int(size)
            info = FileInfo(path, size)
        except (ValueError, InvalidParameterError) as exc:
            raise ScenarioError(f"{source}:{line_no}: bad size {size!r}") from exc
        if path in seen:
            raise ScenarioError(f"{source}:{line_no}: duplicate path {path!r}")
        seen.add(path)
        files.append(info)

    if not files:
        raise ScenarioError(f"{source}: manifest lists no files")
    return files


def load_manifest(path):
    """Read a dataset manifest into FileInfo records"""
    if not os.path.exists(path):
        raise ScenarioError(f"manifest not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        files = parse_manifest(f.read(), source=path)
    logger.info("Loaded %d files (%d bytes) from %s", len(files), sum(f.size for f in files), path)
    return files


def network_from_dict(doc):
    if not isinstance(doc, dict):
        raise ScenarioError("network config must be a JSON object")
    try:
        return NetworkProfile(
            bandwidth=float(doc['bandwidth_bps']),
            rtt=float(doc['rtt_s']),
            buffer_size=float(doc['buffer_bytes']),
        )
    except KeyError as exc:
        raise ScenarioError(f"network config is missing {exc.args[0]!r}") from exc
    except (TypeError, ValueError, InvalidParameterError) as exc:
        raise ScenarioError(f"bad network config: {exc}") from exc


def load_network_config(path):
    if not os.path.exists(path):
        raise ScenarioError(f"network config not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: invalid JSON ({exc.msg})") from exc
    return network_from_dict(doc)
