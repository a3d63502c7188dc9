from flask import Flask, jsonify
from flask_cors import CORS
import logging
import os
import sys

# Add backend directory to Python path
backend_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'backend')
if backend_dir not in sys.path:
    sys.path.insert(0, backend_dir)

from config import configure_logging, load_settings
from history.store import HistoryStore
from routes.common import ServiceContext
from routes.history_routes import history_bp
from routes.tuning_routes import tuning_bp

logger = logging.getLogger(__name__)


def create_app(settings=None, store=None):
    """
    Build the Flask application.

    Args:
        settings: TuningSettings (default: loaded from the environment)
        store: HistoryStore (default: the file at settings.history_path)
    """
    settings = settings or load_settings()
    if store is None:
        os.makedirs(settings.data_dir, exist_ok=True)
        store = HistoryStore.open(settings.history_path, settings.session_window)

    app = Flask(__name__)
    # Allow CORS for all domains for development simplicity
    CORS(app, resources={r"/api/*": {"origins": "*"}})
    app.extensions['harp'] = ServiceContext(settings, store)

    # Register blueprints
    app.register_blueprint(tuning_bp)
    app.register_blueprint(history_bp)

    @app.errorhandler(404)
    def not_found(_):
        return jsonify({'success': False, 'reason': 'NOT_FOUND', 'details': 'no such endpoint'}), 404

    @app.errorhandler(405)
    def method_not_allowed(_):
        return jsonify({'success': False, 'reason': 'METHOD_NOT_ALLOWED', 'details': 'method not allowed'}), 405

    logger.info("History store: %d entries (%s)", len(store), store.path or 'memory')
    return app


if __name__ == '__main__':
    settings = load_settings()
    configure_logging(settings.log_level)
    app = create_app(settings)
    logger.info("Server running on http://localhost:5000")
    app.run(debug=False, host='0.0.0.0', port=int(os.getenv('PORT', '5000')))
