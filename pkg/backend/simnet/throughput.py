"""
Throughput model terms used by the simulation engine.
"""

import math

import numpy as np

from core.errors import InvalidParameterError


# Fitted depth of the pipelining penalty at full concurrency, by log2(pp).
# Reproduces the 8120 -> 6730 / 7300 / 7290 Mbps pattern at pp = 8 / 16 / 32.
_PENALTY_DEPTH_LOG2PP = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
_PENALTY_DEPTH = (0.0, 0.04, 0.10, 0.17, 0.10, 0.12)

PENALTY_FLOOR = 0.8


def pipelining_imbalance_penalty(cc, pp, file_count) -> float:
    """
    Rate factor for channels that pre-assign files through deep pipelines.

    With many channels each queueing pp files ahead, the tail of the file
    list ends up spread unevenly. The loss grows with concurrency (full
    strength from cc = 32), bottoms out at pp = 8 and never drops below 0.8.

    Args:
        cc: Concurrency of the chunk
        pp: Pipelining depth
        file_count: Number of files in the chunk

    Returns:
        Factor in [0.8, 1.0]
    """
    for name, value in (('cc', cc), ('pp', pp), ('file_count', file_count)):
        if value < 1:
            raise InvalidParameterError(f"{name} must be >= 1, got {value}")

    if cc == 1 or pp == 1 or file_count <= cc:
        return 1.0

    strength = min(1.0, math.log2(cc) / 5.0)
    depth = float(np.interp(math.log2(pp), _PENALTY_DEPTH_LOG2PP, _PENALTY_DEPTH))
    return max(PENALTY_FLOOR, 1.0 - strength * depth)


def control_delay(control_latency, params, stripe_overhead) -> float:
    """Idle seconds a channel spends before each file's data flows"""
    delay = control_latency / params.pp
    if params.p > 1:
        delay += (params.p - 1) * stripe_overhead
    return delay


def slow_start_factor(elapsed, tau) -> float:
    if tau == 0:
        return 1.0
    if elapsed <= 0:
        return 0.0
    return 1.0 - math.exp(-elapsed / tau)


def per_flow_rate(network, total_flows) -> float:
    """Bits/second one flow gets: window limit or fair share, whichever is lower"""
    if total_flows <= 0:
        return 0.0
    return min(network.window_limit, network.bandwidth / total_flows)
