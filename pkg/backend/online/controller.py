"""
Online Tuning Controller

Re-optimises a running transfer every monitor interval, using the observed
throughput as the probe. A suggestion only takes effect once it has been
consistent for k intervals: every suggestion in the ring must lie on the
same side of the current value, and for concurrency and parallelism the
median distance must reach min_diff, because changing those reopens
connections. Pipelining changes are free and skip the distance test.

Suggestions only count while conditions hold: the reading right after
channels open is skipped, and a reading that jumps more than shift_pct
away from the previous one clears the ring.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from statistics import median, median_low
from typing import Optional

from core.errors import InvalidParameterError, TuningError
from core.types import ParamTriple

logger = logging.getLogger(__name__)


PARAM_NAMES = ('cc', 'p', 'pp')
CONNECTION_PARAMS = ('cc', 'p')


@dataclass(frozen=True)
class OnlineConfig:
    k: int = 4
    min_diff: int = 2
    monitor_interval: float = 3.0
    conn_setup: float = 2.0
    shift_pct: float = 0.2

    def __post_init__(self):
        if self.k < 2:
            raise InvalidParameterError(f"k must be at least 2, got {self.k}")
        if self.min_diff < 0:
            raise InvalidParameterError("min_diff must not be negative")
        if not self.monitor_interval > 0:
            raise InvalidParameterError("monitor_interval must be positive")
        if self.conn_setup < 0:
            raise InvalidParameterError("conn_setup must not be negative")
        if not self.shift_pct > 0:
            raise InvalidParameterError("shift_pct must be positive")

    @classmethod
    def from_settings(cls, settings):
        return cls(settings.online_k, settings.online_min_diff,
                   settings.monitor_interval, settings.conn_setup, settings.online_shift_pct)


@dataclass
class OnlineState:
    """Controller memory for one running chunk"""

    params: ParamTriple
    k: int = 4
    min_diff: int = 2
    monitor_interval: float = 3.0
    shift_pct: float = 0.2
    rings: dict = field(default_factory=dict)
    intervals: int = 0
    last_observed: Optional[float] = None
    settling: int = 1

    def __post_init__(self):
        if self.k < 2:
            raise InvalidParameterError(f"k must be at least 2, got {self.k}")
        for name in PARAM_NAMES:
            self.rings.setdefault(name, deque(maxlen=self.k))

    @classmethod
    def from_config(cls, params, config: OnlineConfig):
        return cls(params, config.k, config.min_diff, config.monitor_interval, config.shift_pct)

    def push(self, suggestion: ParamTriple):
        for name in PARAM_NAMES:
            self.rings[name].append(getattr(suggestion, name))

    def reset(self):
        for ring in self.rings.values():
            ring.clear()

    def observe(self, throughput) -> str:
        """
        Record one interval's throughput and classify it.

        Returns:
            'settling' for the first reading after channels (re)opened, which
            only becomes the baseline; 'shift' when the reading moved more
            than shift_pct from the previous one, after clearing the ring;
            'steady' otherwise
        """
        previous, self.last_observed = self.last_observed, throughput
        if self.settling:
            self.settling -= 1
            return 'settling'
        if previous and abs(throughput - previous) > self.shift_pct * previous:
            self.reset()
            return 'shift'
        return 'steady'

    @property
    def full(self):
        return all(len(ring) == self.k for ring in self.rings.values())


@dataclass(frozen=True)
class Decision:
    action: str
    params: ParamTriple
    suggestion: Optional[ParamTriple] = None
    changed: tuple = ()
    reason: str = ''

    @property
    def updated(self):
        return self.action == 'update'


def _suggested_params(result):
    return result if isinstance(result, ParamTriple) else result.params


def _sign(value):
    return (value > 0) - (value < 0)


def evaluate_ring(state: OnlineState, current: ParamTriple) -> Decision:
    """Apply the consistency rules to the suggestions collected so far"""
    if not state.full:
        return Decision('keep', current, reason='ring not full')

    changes = {}
    for name in PARAM_NAMES:
        values = list(state.rings[name])
        now = getattr(current, name)
        diffs = [value - now for value in values]
        signs = {_sign(d) for d in diffs}
        if len(signs) != 1 or 0 in signs:
            continue
        if name in CONNECTION_PARAMS and median(abs(d) for d in diffs) < state.min_diff:
            continue
        changes[name] = median_low(values)

    if not changes:
        return Decision('keep', current, reason='suggestions not consistent')
    return Decision('update', current.replace(**changes), changed=tuple(changes))


def consider(state: OnlineState, suggestion, current: ParamTriple) -> Decision:
    """
    Feed one optimizer suggestion into the ring and decide. After an update
    the ring starts over so the next change needs k fresh suggestions, and
    the first reading under the new parameters is skipped.
    """
    state.intervals += 1
    suggested = _suggested_params(suggestion)
    state.push(suggested)
    decision = evaluate_ring(state, current)
    if decision.updated:
        state.reset()
        state.settling = 1
        state.params = decision.params
        logger.info("Online update %s -> %s (changed %s)",
                    current, decision.params, ', '.join(decision.changed))
    else:
        state.params = current
    return Decision(decision.action, decision.params, suggested, decision.changed, decision.reason)


def request_suggestion(optimizer, params: ParamTriple, observed):
    """Call the optimizer with (params, observed) as the probe; None on failure"""
    if not observed > 0:
        return None
    try:
        return _suggested_params(optimizer(params, observed))
    except TuningError as exc:
        logger.warning("Online optimizer call failed: %s", exc)
        return None


def on_interval(state: OnlineState, observed_throughput, current_params: ParamTriple, optimizer) -> Decision:
    """
    One monitor interval of online tuning.

    Args:
        state: Controller memory for the chunk
        observed_throughput: Throughput of the interval that just ended
        current_params: Parameters the chunk ran with
        optimizer: Callable (params, observed) -> OptimizerResult or ParamTriple

    Returns:
        Decision; a settling reading, a failed optimizer call or a
        non-positive observation keeps the parameters and adds nothing to
        the ring
    """
    if state.observe(observed_throughput) == 'settling':
        state.params = current_params
        return Decision('keep', current_params, reason='settling')
    suggestion = request_suggestion(optimizer, current_params, observed_throughput)
    if suggestion is None:
        state.params = current_params
        return Decision('keep', current_params, reason='no suggestion')
    return consider(state, suggestion, current_params)


def transition_cost(old: ParamTriple, new: ParamTriple, conn_setup) -> float:
    """
    Connection setup seconds a parameter change costs: every existing
    channel reopens when parallelism changes, every added channel opens
    once, pipelining is free.
    """
    cost = 0.0
    if new.p != old.p:
        cost += conn_setup * old.cc
    if new.cc > old.cc:
        cost += conn_setup * (new.cc - old.cc)
    return cost


def apply_update(executor, handle, old: ParamTriple, new: ParamTriple, conn_setup) -> float:
    """Retune a running chunk; returns the setup seconds charged"""
    if old == new:
        return 0.0
    return executor.retune(handle, new, conn_setup=conn_setup)
