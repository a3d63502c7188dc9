"""
Simulation Scenarios

Describes the environment a simulated transfer runs in: the network path,
the storage saturation curve, background traffic over time, and the
constants of the throughput model. Also provides the presets used by the
command line and the tests, and the JSON scenario loader.
"""

import dataclasses
import json
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.errors import InvalidParameterError, ScenarioError
from core.types import NetworkProfile
from core.units import Gbps, MB

logger = logging.getLogger(__name__)


TICK_SECONDS = 0.1

# (concurrent I/O operations, bytes/second)
DEFAULT_FS_PROFILE = (
    (1, 250 * MB),
    (4, 700 * MB),
    (8, 1000 * MB),
    (16, 1200 * MB),
    (32, 1200 * MB),
    (64, 1000 * MB),
)

TRAFFIC_LEVELS = {
    'light': 0,
    'medium': 16,
    'heavy': 48,
}


@dataclass(frozen=True)
class TrafficInterval:
    """Number of competing background flows during [start, end)"""

    start: float
    end: float
    bg_flows: int

    def __post_init__(self):
        if self.bg_flows < 0:
            raise ScenarioError(f"bg_flows must be non-negative, got {self.bg_flows}")
        if not self.end > self.start:
            raise ScenarioError(f"traffic interval end {self.end} must follow start {self.start}")


@dataclass(frozen=True)
class SimScenario:
    """Everything the simulator needs besides the chunks themselves"""

    network: NetworkProfile
    fs_profile: Tuple[Tuple[float, float], ...] = DEFAULT_FS_PROFILE
    traffic_timeline: Tuple[TrafficInterval, ...] = ()
    control_latency: Optional[float] = None
    slow_start_tau: float = 1.0
    noise_sigma: float = 0.05
    seed: int = 0
    stripe_overhead: float = 0.002
    tick: float = TICK_SECONDS

    def __post_init__(self):
        timeline = tuple(self.traffic_timeline)
        for earlier, later in zip(timeline, timeline[1:]):
            if later.start < earlier.end:
                raise ScenarioError("traffic intervals must be sorted and non-overlapping")
        object.__setattr__(self, 'traffic_timeline', timeline)

        profile = tuple(sorted((float(n), float(rate)) for n, rate in self.fs_profile))
        if any(n < 0 or rate < 0 for n, rate in profile):
            raise ScenarioError("fs_profile points must be non-negative")
        object.__setattr__(self, 'fs_profile', profile)

        if not 0 <= self.noise_sigma <= 0.3:
            raise ScenarioError(f"noise_sigma must be within [0, 0.3], got {self.noise_sigma}")
        if self.slow_start_tau < 0:
            raise ScenarioError("slow_start_tau must be non-negative")
        if self.control_latency is not None and self.control_latency < 0:
            raise ScenarioError("control_latency must be non-negative")
        if self.stripe_overhead < 0:
            raise ScenarioError("stripe_overhead must be non-negative")
        if not self.tick > 0:
            raise ScenarioError("tick must be positive")

    @property
    def effective_control_latency(self) -> float:
        """Seconds per unpipelined file command; defaults to one round trip"""
        if self.control_latency is None:
            return self.network.rtt
        return self.control_latency

    def bg_flows_at(self, t) -> int:
        for interval in self.traffic_timeline:
            if interval.start <= t < interval.end:
                return interval.bg_flows
        return 0

    def fs_capacity(self, io_ops) -> float:
        """
        Storage throughput ceiling in bytes/second at a number of concurrent
        I/O operations. Linear between table points, clamped at both ends;
        an empty table means unlimited.
        """
        if not self.fs_profile:
            return math.inf
        points = np.array(self.fs_profile)
        return float(np.interp(io_ops, points[:, 0], points[:, 1]))

    def with_seed(self, seed) -> 'SimScenario':
        return dataclasses.replace(self, seed=int(seed))

    def with_traffic(self, timeline) -> 'SimScenario':
        return dataclasses.replace(self, traffic_timeline=tuple(timeline))


def constant_traffic(bg_flows) -> Tuple[TrafficInterval, ...]:
    if bg_flows == 0:
        return ()
    return (TrafficInterval(0.0, math.inf, int(bg_flows)),)


def traffic_preset(level) -> Tuple[TrafficInterval, ...]:
    """Timeline for one of the named load levels: light, medium or heavy"""
    try:
        return constant_traffic(TRAFFIC_LEVELS[level])
    except KeyError:
        raise ScenarioError(
            f"unknown traffic level {level!r}, expected one of {sorted(TRAFFIC_LEVELS)}"
        ) from None


def step_traffic(before, after, at) -> Tuple[TrafficInterval, ...]:
    """Background load switching from one level to another at time `at`"""
    first = TRAFFIC_LEVELS[before] if isinstance(before, str) else int(before)
    second = TRAFFIC_LEVELS[after] if isinstance(after, str) else int(after)
    return (TrafficInterval(0.0, float(at), first), TrafficInterval(float(at), math.inf, second))


def default_network() -> NetworkProfile:
    return NetworkProfile(bandwidth=10 * Gbps, rtt=0.040, buffer_size=32 * MB)


def default_scenario(traffic='light', seed=0, **overrides) -> SimScenario:
    """
    The calibrated reference environment: 10 Gbps, 40 ms, 32 MB buffers,
    1 s slow start, 5% noise, storage saturating around 16 operations.
    """
    timeline = traffic_preset(traffic) if isinstance(traffic, str) else tuple(traffic)
    return SimScenario(network=default_network(), traffic_timeline=timeline, seed=seed, **overrides)


# Scenario documents

def _number(doc, key, default=None, required=False):
    if key not in doc or doc[key] is None:
        if required:
            raise ScenarioError(f"scenario is missing '{key}'")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"scenario field '{key}' must be a number, got {value!r}")
    return value


def _parse_traffic(value):
    if value is None:
        return ()
    if isinstance(value, str):
        return traffic_preset(value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return constant_traffic(int(value))
    if not isinstance(value, list):
        raise ScenarioError("traffic must be a level name, a flow count or a list of intervals")

    intervals = []
    for item in value:
        try:
            end = item.get('end')
            intervals.append(TrafficInterval(
                float(item['start']),
                math.inf if end is None else float(end),
                int(item['bg_flows']),
            ))
        except (KeyError, TypeError, ValueError, AttributeError):
            raise ScenarioError(f"malformed traffic interval {item!r}") from None
    return tuple(intervals)


def scenario_from_dict(doc, seed=None) -> SimScenario:
    """
    Build a scenario from a decoded JSON document.

    Recognised keys: bandwidth_bps, rtt_s, buffer_bytes (required),
    fs_profile, traffic, control_latency_s, slow_start_tau_s, noise_sigma,
    stripe_overhead_s, seed.
    """
    if not isinstance(doc, dict):
        raise ScenarioError("a scenario must be a JSON object")

    bandwidth = _number(doc, 'bandwidth_bps', required=True)
    if bandwidth <= 0:
        raise ScenarioError("bandwidth_bps must be positive")
    try:
        network = NetworkProfile(
            bandwidth=float(bandwidth),
            rtt=float(_number(doc, 'rtt_s', required=True)),
            buffer_size=float(_number(doc, 'buffer_bytes', required=True)),
        )
    except InvalidParameterError as exc:
        raise ScenarioError(str(exc)) from None

    fs_profile = doc.get('fs_profile', DEFAULT_FS_PROFILE)
    if fs_profile is None:
        fs_profile = ()
    try:
        fs_profile = tuple((float(n), float(rate)) for n, rate in fs_profile)
    except (TypeError, ValueError):
        raise ScenarioError("fs_profile must be a list of [io_ops, bytes_per_second] pairs") from None

    return SimScenario(
        network=network,
        fs_profile=fs_profile,
        traffic_timeline=_parse_traffic(doc.get('traffic')),
        control_latency=_number(doc, 'control_latency_s'),
        slow_start_tau=_number(doc, 'slow_start_tau_s', 1.0),
        noise_sigma=_number(doc, 'noise_sigma', 0.05),
        stripe_overhead=_number(doc, 'stripe_overhead_s', 0.002),
        seed=int(seed if seed is not None else _number(doc, 'seed', 0)),
    )


def read_scenario_document(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from None


def load_scenarios(path, seed=None):
    """
    Load one or more scenarios from a JSON file. The document is either a
    single scenario object or {"scenarios": [...]} with optional shared
    "defaults" merged into each.
    """
    doc = read_scenario_document(path)
    if isinstance(doc, dict) and 'scenarios' in doc:
        defaults = doc.get('defaults', {})
        items = doc['scenarios']
        if not isinstance(items, list) or not items:
            raise ScenarioError("'scenarios' must be a non-empty list")
        scenarios = [scenario_from_dict({**defaults, **item}, seed=seed) for item in items]
    else:
        scenarios = [scenario_from_dict(doc, seed=seed)]
    logger.info("Loaded %d scenario(s) from %s", len(scenarios), path)
    return scenarios


def load_scenario(path, seed=None) -> SimScenario:
    return load_scenarios(path, seed=seed)[0]
