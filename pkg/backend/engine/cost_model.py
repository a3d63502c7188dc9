"""
Cost Model

Smallest chunk for which sampling plus optimisation pays off. A plain
transfer takes D / Thr0. Tuning spends `sample_time` at a slowed rate
Thr_S = (1 - slowdown) Thr0, waits c seconds for the optimizer, then moves
the rest at Thr_H = (1 + speedup) Thr0. Equating both times gives

    D / Thr0 = (sample_time (speedup + slowdown) + c (1 + speedup)) / speedup
"""

from core.errors import InvalidParameterError


SAMPLE_TIME = 15.0
SPEEDUPS = (0.10, 0.30, 0.50)
SLOWDOWNS = (0.50, 0.30, 0.10)


def cost_min_chunk_size(speedup, slowdown, sample_time=SAMPLE_TIME, c=0.0) -> float:
    """
    Break-even chunk size in units of Thr0 x seconds.

    Args:
        speedup: Fractional throughput gain after tuning (> 0)
        slowdown: Fractional throughput loss while sampling, in [0, 1)
        sample_time: Seconds spent sampling
        c: Optimizer latency in seconds
    """
    if not speedup > 0:
        raise InvalidParameterError(f"speedup must be positive, got {speedup}")
    if not 0 <= slowdown < 1:
        raise InvalidParameterError(f"slowdown must be in [0, 1), got {slowdown}")
    return (sample_time * (speedup + slowdown) + c * (1 + speedup)) / speedup


def cost_table(sample_time=SAMPLE_TIME, c=0.0):
    """Break-even sizes for every speedup/slowdown pairing"""
    return [
        {
            'speedup': speedup,
            'slowdown': slowdown,
            'minChunkSize': cost_min_chunk_size(speedup, slowdown, sample_time, c),
        }
        for speedup in SPEEDUPS
        for slowdown in SLOWDOWNS
    ]
