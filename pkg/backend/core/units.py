"""
Unit Conventions

Sizes are bytes, throughput is bits/second, time is seconds. Everything that
crosses a module boundary uses these units; the constants below exist only to
write literals readably.
"""

KB = 1_000
MB = 1_000_000
GB = 1_000_000_000

Kbps = 1e3
Mbps = 1e6
Gbps = 1e9


def format_rate(bps):
    """Human readable throughput, e.g. '7.30 Gbps'"""
    magnitude = abs(bps)
    if magnitude >= Gbps:
        return f"{bps / Gbps:.2f} Gbps"
    if magnitude >= Mbps:
        return f"{bps / Mbps:.1f} Mbps"
    return f"{bps / Kbps:.1f} Kbps"
