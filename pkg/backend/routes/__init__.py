# HTTP blueprints for tuning and history
from .history_routes import history_bp
from .tuning_routes import tuning_bp

__all__ = ['history_bp', 'tuning_bp']
