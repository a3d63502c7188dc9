"""
Parameter Heuristics

Closed-form starting points derived from the bandwidth-delay product, plus
the fixed tables and estimates the baseline strategies rely on.
"""

import math

from core.types import DEFAULT_BOUNDS, Chunk, NetworkProfile, ParamTriple
from core.units import MB

CC_DEFAULT = 4
USER_MAX_CC = 10

GO_SMALL = (2, 2, 8)     # avg file < 50 MB
GO_MEDIUM = (2, 2, 2)    # 50 MB to 250 MB
GO_LARGE = (2, 4, 1)     # > 250 MB


def _ceil_ratio(numerator, denominator):
    if denominator <= 0:
        return 1
    # round first so exact ratios like 48/3 do not tip over to the next integer
    return int(math.ceil(round(numerator / denominator, 9)))


def heuristic_params(chunk: Chunk, network: NetworkProfile, bounds=DEFAULT_BOUNDS, cc_default=CC_DEFAULT) -> ParamTriple:
    """
    Starting parameters for a chunk.

    Pipelining covers a BDP worth of files, parallelism fills the BDP with
    buffer-sized windows, and concurrency starts at a small default.
    """
    pp = _ceil_ratio(network.bdp, chunk.avg_file_size)
    p = _ceil_ratio(network.bdp, network.buffer_size)
    cc = min(chunk.file_count, cc_default)
    return bounds.clamp(cc, p, pp)


def sc_concurrency(chunk: Chunk, network: NetworkProfile, user_max_cc=USER_MAX_CC) -> int:
    """Channels needed to keep a BDP of this chunk in flight, capped by the user"""
    if network.bdp <= 0:
        return max(1, user_max_cc)
    return max(1, min(_ceil_ratio(chunk.total_size, network.bdp), user_max_cc))


def go_params(avg_file_size, bounds=DEFAULT_BOUNDS) -> ParamTriple:
    """Predefined parameters by file size"""
    if avg_file_size < 50 * MB:
        return bounds.clamp(*GO_SMALL)
    if avg_file_size <= 250 * MB:
        return bounds.clamp(*GO_MEDIUM)
    return bounds.clamp(*GO_LARGE)
