"""
Online Transfer Driver

Runs chunks concurrently on the simulator while the controller watches
each of them. The optimizer call issued at the end of one interval is
answered during the next, so its suggestion is consumed one boundary
later. A suggestion made before the throughput shifted is dropped unused.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from core.errors import PlanError, ScenarioError
from core.types import Chunk, ParamTriple
from simnet.executor import SimulatedExecutor

from .controller import OnlineConfig, OnlineState, apply_update, consider, request_suggestion

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecisionRecord:
    """One row of the decision log"""

    t: float
    chunk: str
    interval: int
    observed: float
    suggestion: Optional[ParamTriple]
    action: str
    params: ParamTriple
    cost: float
    flows: int

    def as_row(self):
        suggested = self.suggestion.as_tuple() if self.suggestion else ('', '', '')
        return (
            round(self.t, 6), self.chunk, self.interval, self.observed,
            *suggested, self.action, *self.params.as_tuple(), self.cost, self.flows,
        )


DECISION_COLUMNS = (
    't_s', 'chunk', 'interval', 'observed_bps',
    'suggested_cc', 'suggested_p', 'suggested_pp',
    'action', 'cc', 'p', 'pp', 'cost_s', 'flows',
)


@dataclass(frozen=True)
class OnlineReport:
    result: object
    decisions: Tuple[DecisionRecord, ...]
    final_params: dict

    @property
    def updates(self) -> List[DecisionRecord]:
        return [d for d in self.decisions if d.action == 'update']

    def decision_rows(self):
        return [d.as_row() for d in self.decisions]

    def to_dict(self, include_timeline=False):
        return {
            'result': self.result.to_dict(include_timeline),
            'updates': len(self.updates),
            'finalParams': {label: list(p.as_tuple()) for label, p in self.final_params.items()},
        }


def run_online_transfer(
    assignments: Sequence[Tuple[Chunk, ParamTriple]],
    scenario,
    optimizer,
    config: OnlineConfig = OnlineConfig(),
    start=0.0,
    time_limit=None,
) -> OnlineReport:
    """
    Transfer chunks with online tuning.

    Args:
        assignments: (chunk, initial params) pairs, started together
        scenario: Simulation environment
        optimizer: Object with suggester(chunk, network) returning a
            callable (params, observed) -> OptimizerResult
        config: Controller settings
        start: Simulated start time
        time_limit: Optional cap on simulated seconds

    Returns:
        OnlineReport with the aggregate SimResult and the decision log
    """
    assignments = list(assignments)
    if not assignments:
        raise PlanError("nothing to transfer")

    executor = SimulatedExecutor(scenario, start=start)
    labels, states, suggesters, pending, counts = {}, {}, {}, {}, {}
    for chunk, params in assignments:
        handle = executor.start(chunk, params)
        labels[handle] = chunk.chunk_type.value
        states[handle] = OnlineState.from_config(params, config)
        suggesters[handle] = optimizer.suggester(chunk, scenario.network)
        pending[handle] = None
        counts[handle] = 0

    records = []
    live = list(labels)
    while live:
        if time_limit is not None and executor.now() - start >= time_limit:
            raise ScenarioError(f"online transfer did not finish within {time_limit}s")

        readings = executor.poll_many(live, config.monitor_interval)
        t = executor.now()
        flows = executor.simulation.active_flows()
        for handle in list(live):
            reading = readings[handle]
            if reading.finished:
                live.remove(handle)
                continue

            state = states[handle]
            counts[handle] += 1
            current = executor.progress(handle).params
            action, cost, suggestion = 'keep', 0.0, pending[handle]
            status = state.observe(reading.throughput)
            if status == 'shift':
                logger.info("%s throughput moved to %.0f bps at t=%.1f; collecting afresh",
                            labels[handle], reading.throughput, t)
                suggestion = None
            if suggestion is not None:
                decision = consider(state, suggestion, current)
                if decision.updated:
                    cost = apply_update(executor, handle, current, decision.params, config.conn_setup)
                    action = 'update'
                    current = decision.params

            # answered during the next interval; a retuned chunk is measured afresh
            pending[handle] = None
            if action == 'keep' and status != 'settling':
                pending[handle] = request_suggestion(suggesters[handle], current, reading.throughput)

            records.append(DecisionRecord(
                t=t,
                chunk=labels[handle],
                interval=counts[handle],
                observed=reading.throughput,
                suggestion=suggestion,
                action=action,
                params=current,
                cost=cost,
                flows=flows,
            ))

    result = executor.finish(list(labels))
    final = {labels[h]: executor.progress(h).params for h in labels}
    report = OnlineReport(result, tuple(records), final)
    logger.info("Online transfer: %.0f bps in %.1fs with %d update(s)",
                result.aggregate_throughput, result.duration, len(report.updates))
    return report
