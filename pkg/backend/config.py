"""
Settings

Loads tunables from the environment (and a .env file when present). Every
value has a default; invalid values fail at load time naming the key.
"""

import logging
import os
from dataclasses import dataclass

from dotenv import load_dotenv

from core.errors import ConfigurationError
from core.partition import ChunkThresholds
from core.types import ParameterBounds


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass(frozen=True)
class TuningSettings:
    """All environment-driven settings in one immutable bundle"""

    data_dir: str = 'data'
    history_path: str = 'data/history.jsonl'
    log_level: str = 'INFO'
    cc_max: int = 32
    p_max: int = 32
    pp_max: int = 32
    min_entries: int = 432
    min_group: int = 27
    cc_default: int = 4
    user_max_cc: int = 10
    rho_cc: float = 0.7
    rho_p: float = 0.7
    rho_pp: float = 0.99
    dbscan_eps_fraction: float = 0.10
    convergence_pct: float = 0.05
    monitor_interval: float = 3.0
    max_sample_time: float = 30.0
    sample_share: float = 0.2
    optimizer_latency: float = 3.0
    online_k: int = 4
    online_min_diff: int = 2
    online_shift_pct: float = 0.2
    conn_setup: float = 2.0
    tiny_ratio: float = 0.05
    small_ratio: float = 0.5
    medium_ratio: float = 5.0
    session_window: int = 1800

    @property
    def bounds(self) -> ParameterBounds:
        return ParameterBounds(self.cc_max, self.p_max, self.pp_max)

    @property
    def thresholds(self) -> ChunkThresholds:
        return ChunkThresholds(self.tiny_ratio, self.small_ratio, self.medium_ratio)

    @property
    def relaxation(self):
        return (self.rho_cc, self.rho_p, self.rho_pp)


# env key -> (field name, parser)
_ENV_KEYS = {
    'HARP_DATA_DIR': ('data_dir', str),
    'HARP_HISTORY_PATH': ('history_path', str),
    'HARP_LOG_LEVEL': ('log_level', str),
    'HARP_CC_MAX': ('cc_max', int),
    'HARP_P_MAX': ('p_max', int),
    'HARP_PP_MAX': ('pp_max', int),
    'HARP_MIN_ENTRIES': ('min_entries', int),
    'HARP_MIN_GROUP': ('min_group', int),
    'HARP_CC_DEFAULT': ('cc_default', int),
    'HARP_USER_MAX_CC': ('user_max_cc', int),
    'HARP_RHO_CC': ('rho_cc', float),
    'HARP_RHO_P': ('rho_p', float),
    'HARP_RHO_PP': ('rho_pp', float),
    'HARP_DBSCAN_EPS_FRACTION': ('dbscan_eps_fraction', float),
    'HARP_CONVERGENCE_PCT': ('convergence_pct', float),
    'HARP_MONITOR_INTERVAL': ('monitor_interval', float),
    'HARP_MAX_SAMPLE_TIME': ('max_sample_time', float),
    'HARP_SAMPLE_SHARE': ('sample_share', float),
    'HARP_OPTIMIZER_LATENCY': ('optimizer_latency', float),
    'HARP_ONLINE_K': ('online_k', int),
    'HARP_ONLINE_MIN_DIFF': ('online_min_diff', int),
    'HARP_ONLINE_SHIFT_PCT': ('online_shift_pct', float),
    'HARP_CONN_SETUP': ('conn_setup', float),
    'HARP_TINY_RATIO': ('tiny_ratio', float),
    'HARP_SMALL_RATIO': ('small_ratio', float),
    'HARP_MEDIUM_RATIO': ('medium_ratio', float),
    'HARP_SESSION_WINDOW': ('session_window', int),
}


def load_settings(env=None, dotenv_path=None) -> TuningSettings:
    """
    Build settings from the environment.

    Args:
        env: Mapping to read instead of os.environ (tests pass a dict)
        dotenv_path: Optional explicit .env file

    Returns:
        TuningSettings
    """
    if env is None:
        load_dotenv(dotenv_path)
        env = os.environ

    values = {}
    for key, (name, parser) in _ENV_KEYS.items():
        raw = env.get(key)
        if raw is None or raw == '':
            continue
        try:
            values[name] = parser(raw)
        except ValueError:
            raise ConfigurationError(f"{key} has unusable value {raw!r}") from None

    settings = TuningSettings(**values)
    _validate(settings)
    return settings


def _validate(settings: TuningSettings):
    try:
        settings.bounds
        settings.thresholds
    except Exception as exc:
        raise ConfigurationError(str(exc)) from None

    for key, value in (('HARP_RHO_CC', settings.rho_cc), ('HARP_RHO_P', settings.rho_p),
                       ('HARP_RHO_PP', settings.rho_pp)):
        if not 0 < value <= 1:
            raise ConfigurationError(f"{key} must be in (0, 1], got {value}")
    if not 0 < settings.convergence_pct < 1:
        raise ConfigurationError("HARP_CONVERGENCE_PCT must be in (0, 1)")
    if not 0 < settings.sample_share <= 1:
        raise ConfigurationError(f"HARP_SAMPLE_SHARE must be in (0, 1], got {settings.sample_share}")
    if not settings.online_shift_pct > 0:
        raise ConfigurationError("HARP_ONLINE_SHIFT_PCT must be positive")
    if settings.online_k < 2:
        raise ConfigurationError("HARP_ONLINE_K must be at least 2")
    if settings.min_entries < 1 or settings.min_group < 1:
        raise ConfigurationError("HARP_MIN_ENTRIES and HARP_MIN_GROUP must be positive")
    if not isinstance(logging.getLevelName(settings.log_level.upper()), int):
        raise ConfigurationError(f"HARP_LOG_LEVEL {settings.log_level!r} is not a logging level")


def configure_logging(level='INFO'):
    """Configure root logging once for an entry point"""
    logging.basicConfig(level=str(level).upper(), format=LOG_FORMAT)
