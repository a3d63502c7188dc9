"""
Shared Route Helpers

Service context kept on the Flask app, request payload parsing, and the
error response contract.
"""

import logging
import threading

from flask import current_app, jsonify, request
from werkzeug.exceptions import BadRequest

from core.errors import InvalidParameterError, ScenarioError, TuningError
from core.types import FileInfo
from engine.optimizer import HarpOptimizer
from simnet.scenario import scenario_from_dict, traffic_preset
from utils.manifest import network_from_dict, parse_manifest

logger = logging.getLogger(__name__)


class ServiceContext:
    """Settings, the history store and a lazily built optimizer"""

    def __init__(self, settings, store):
        self.settings = settings
        self.store = store
        self._lock = threading.Lock()
        self._optimizer = None

    @property
    def optimizer(self):
        with self._lock:
            if self._optimizer is None:
                self._optimizer = HarpOptimizer.from_settings(self.store, self.settings)
            return self._optimizer

    def history_changed(self):
        """Drop cached models after the store was modified"""
        with self._lock:
            self._optimizer = None


def get_context() -> ServiceContext:
    return current_app.extensions['harp']


def error_response(exc):
    """Map an exception onto the response contract"""
    if isinstance(exc, TuningError):
        logger.warning("Request failed: %s", exc)
        return jsonify(exc.to_dict()), 400
    logger.exception("Unexpected error")
    return jsonify({'success': False, 'reason': 'INTERNAL_ERROR', 'details': str(exc)}), 500


def read_json():
    """The request body as a JSON object"""
    try:
        data = request.get_json(force=True)
    except BadRequest:
        raise InvalidParameterError("request body is not valid JSON") from None
    if not isinstance(data, dict):
        raise InvalidParameterError("request body must be a JSON object")
    return data


def files_from_payload(data):
    """Files from either a 'files' list of {path, size} or a 'manifest' text"""
    if 'manifest' in data:
        return parse_manifest(str(data['manifest']), source='manifest')
    items = data.get('files')
    if not isinstance(items, list) or not items:
        raise InvalidParameterError("provide 'files' as a non-empty list or a 'manifest' text")
    try:
        return [FileInfo(str(item['path']), int(item['size'])) for item in items]
    except (KeyError, TypeError, ValueError):
        raise InvalidParameterError("each file needs 'path' and an integer 'size'") from None


def network_from_payload(data):
    if 'network' in data:
        return network_from_dict(data['network'])
    if 'scenario' in data:
        return scenario_from_payload(data).network
    raise InvalidParameterError("provide a 'network' or a 'scenario'")


def scenario_from_payload(data, required=True):
    """
    Scenario from the 'scenario' object; an optional top-level 'seed'
    overrides its seed and 'traffic' overrides its background load.
    """
    doc = data.get('scenario')
    if doc is None:
        if required:
            raise ScenarioError("request needs a 'scenario' object")
        return None
    seed = data.get('seed')
    scenario = scenario_from_dict(doc, seed=int(seed) if seed is not None else None)
    if data.get('traffic'):
        scenario = scenario.with_traffic(traffic_preset(data['traffic']))
    return scenario
