"""
Online Tuning

Adjusts the parameters of running transfers as network conditions change.
"""

from .controller import (
    Decision,
    OnlineConfig,
    OnlineState,
    apply_update,
    consider,
    evaluate_ring,
    on_interval,
    request_suggestion,
    transition_cost,
)
from .driver import DECISION_COLUMNS, DecisionRecord, OnlineReport, run_online_transfer

__all__ = [
    'Decision',
    'OnlineConfig',
    'OnlineState',
    'apply_update',
    'consider',
    'evaluate_ring',
    'on_interval',
    'request_suggestion',
    'transition_cost',
    'DECISION_COLUMNS',
    'DecisionRecord',
    'OnlineReport',
    'run_online_transfer',
]
