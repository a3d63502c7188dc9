"""Command line for history generation, optimisation and simulated transfers."""

import functools
import json
import logging
import os
import sys

import click

# Add backend directory to Python path
backend_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'backend')
if backend_dir not in sys.path:
    sys.path.insert(0, backend_dir)

from config import configure_logging, load_settings
from core.errors import HistoryParseError, ScenarioError, TuningError
from core.partition import partition_files
from core.types import ChunkType, ParamTriple
from core.units import format_rate
from engine.cost_model import SAMPLE_TIME, cost_table
from engine.experiments import (
    STRATEGY_NAMES,
    compare_strategies,
    comparison_table,
    optimize_dataset,
    parse_probe,
    run_strategy,
)
from engine.optimizer import HarpOptimizer
from history.store import HistoryStore
from simnet.history_generator import GRID_VALUES, default_param_grid, generate_history, uniform_dataset
from simnet.scenario import load_scenario, load_scenarios, traffic_preset
from simnet.simulator import simulate_transfer
from utils.export import decision_log_csv, timeline_csv
from utils.manifest import load_manifest, load_network_config

logger = logging.getLogger('cli')

FILE_ERRORS = (ScenarioError, HistoryParseError, OSError)


def handle_errors(command):
    """Exit 1 on domain errors, 2 on unreadable or malformed input files"""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except FILE_ERRORS as exc:
            click.echo(f"Error: {exc}", err=True)
            sys.exit(2)
        except TuningError as exc:
            click.echo(f"Error: {exc}", err=True)
            sys.exit(1)
    return wrapper


def _gbps(bps):
    return bps / 1e9


def _load_store(path, settings):
    if not os.path.exists(path):
        raise ScenarioError(f"history file not found: {path}")
    return HistoryStore.load(path, settings.session_window)


def _parse_dataset(text):
    try:
        count, size = text.lower().split('x', 1)
        return int(count), int(float(size))
    except ValueError:
        raise click.BadParameter(f"expected COUNTxSIZE (e.g. 64x16000000), got {text!r}") from None


def _parse_grid(text):
    try:
        values = sorted({int(v) for v in text.split(',') if v.strip()})
    except ValueError:
        raise click.BadParameter(f"expected comma separated integers, got {text!r}") from None
    if not values:
        raise click.BadParameter("the grid needs at least one value")
    return default_param_grid(values)


def _parse_fixed_params(values):
    fixed = {}
    for value in values:
        try:
            label, triple = value.split('=', 1)
            cc, p, pp = (int(v) for v in triple.split(','))
        except ValueError:
            raise click.BadParameter(f"expected TYPE=cc,p,pp, got {value!r}") from None
        fixed[ChunkType.from_label(label)] = ParamTriple(cc, p, pp)
    return fixed


@click.group()
@click.option('--log-level', default=None, help='Logging level (default: HARP_LOG_LEVEL)')
@click.option('--env-file', type=click.Path(dir_okay=False), default=None, help='Explicit .env file')
@click.pass_context
def main(ctx, log_level, env_file):
    """Transfer parameter tuning: history, optimisation and simulated transfers."""
    try:
        settings = load_settings(dotenv_path=env_file)
    except TuningError as exc:
        click.echo(f"Error: {exc}", err=True)
        sys.exit(2)
    configure_logging(log_level or settings.log_level)
    ctx.obj = settings


@main.command('generate-history')
@click.argument('scenario_file', type=click.Path())
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='History file to write')
@click.option('--repeats', default=1, show_default=True, type=int, help='Sweeps per scenario and dataset')
@click.option('--seed', default=None, type=int, help='Override the scenario seeds')
@click.option('--dataset', 'datasets', multiple=True, default=('64x16000000',), show_default=True,
              help='Dataset as COUNTxSIZE_BYTES; repeatable')
@click.option('--grid', 'grid_values', default=','.join(str(v) for v in GRID_VALUES), show_default=True,
              help='Values swept for each of cc, p and pp')
@click.option('--append/--overwrite', default=False, help='Append to an existing history file')
@click.pass_obj
@handle_errors
def generate_history_command(settings, scenario_file, out_path, repeats, seed, datasets, grid_values, append):
    """Sweep the parameter grid on simulated scenarios and write history."""
    grid = _parse_grid(grid_values)
    scenarios = load_scenarios(scenario_file, seed=seed)
    chunks = []
    for index, text in enumerate(datasets):
        count, size = _parse_dataset(text)
        chunks.append(uniform_dataset(count, size, scenarios[0].network,
                                      name=f"d{index}", thresholds=settings.thresholds))

    entries = generate_history(scenarios, chunks, grid, repeats=repeats)
    if append and os.path.exists(out_path):
        HistoryStore.load(out_path, settings.session_window).append(entries)
    else:
        HistoryStore(entries).save(out_path)
    click.echo(f"{len(entries)} entries written to {out_path}")


@main.command()
@click.argument('history_file', type=click.Path())
@click.argument('manifest', type=click.Path())
@click.argument('network_config', type=click.Path())
@click.option('--probe', default='adaptive', show_default=True,
              help="'adaptive' or 'given:cc,p,pp=throughput_bps'")
@click.option('--scenario', 'scenario_file', type=click.Path(), default=None,
              help='Scenario for adaptive probes (default: the network, no traffic)')
@click.option('--seed', default=None, type=int, help='Scenario seed')
@click.option('--json', 'as_json', is_flag=True, help='Print the full result as JSON')
@click.pass_obj
@handle_errors
def optimize(settings, history_file, manifest, network_config, probe, scenario_file, seed, as_json):
    """Optimize parameters per chunk of a dataset."""
    store = _load_store(history_file, settings)
    files = load_manifest(manifest)
    network = load_network_config(network_config)

    given = None
    if probe != 'adaptive':
        if not probe.startswith('given:'):
            raise click.BadParameter("use 'adaptive' or 'given:cc,p,pp=throughput'", param_hint='--probe')
        given = parse_probe(probe[len('given:'):])
    scenario = load_scenario(scenario_file, seed=seed) if scenario_file else None

    optimizer = HarpOptimizer.from_settings(store, settings)
    outcome = optimize_dataset(files, network, optimizer, probe=given, scenario=scenario, settings=settings)

    if as_json:
        click.echo(json.dumps(outcome, indent=2, sort_keys=True))
        return
    for row in outcome['chunks']:
        cc, p, pp = row['params']
        models = row['modelSet']
        click.echo(
            f"{row['chunkType']:<7} files={row['fileCount']:<6} params=({cc},{p},{pp}) "
            f"estimate={format_rate(row['estimatedThroughput'])} "
            f"unit={format_rate(row['unitThroughput'])} "
            f"groups kept={models['groupsKept']} rejected={models['groupsRejected']} "
            f"weights={[m['weight'] for m in row['models']]}"
        )
    plan = outcome['plan']
    click.echo(f"plan maxCC={plan['maxCc']}: " + ', '.join(
        f"{c['chunkType']}({','.join(str(v) for v in c['params'])})" for c in plan['chunks']
    ))


@main.command()
@click.argument('scenario_file', type=click.Path())
@click.argument('manifest', type=click.Path())
@click.option('--strategy', type=click.Choice(['harp', 'go', 'sc', 'promc', 'pcp', 'oracle']),
              default='harp', show_default=True)
@click.option('--online', is_flag=True, help='Tune the running transfer (harp only)')
@click.option('--history', 'history_file', type=click.Path(), default=None,
              help='History file (default: HARP_HISTORY_PATH)')
@click.option('--params', 'fixed', multiple=True, help='Fixed plan entry TYPE=cc,p,pp; repeatable')
@click.option('--traffic', type=click.Choice(['light', 'medium', 'heavy']), default=None)
@click.option('--seed', default=None, type=int)
@click.option('--timeline', 'timeline_path', type=click.Path(dir_okay=False), default=None,
              help='Write the throughput timeline CSV here')
@click.option('--decisions', 'decisions_path', type=click.Path(dir_okay=False), default=None,
              help='Write the online decision log CSV here')
@click.pass_obj
@handle_errors
def simulate(settings, scenario_file, manifest, strategy, online, history_file, fixed,
             traffic, seed, timeline_path, decisions_path):
    """Simulate one transfer and report its aggregate throughput."""
    scenario = load_scenario(scenario_file, seed=seed)
    if traffic:
        scenario = scenario.with_traffic(traffic_preset(traffic))
    files = load_manifest(manifest)
    chunks = partition_files(files, scenario.network, settings.thresholds)

    if fixed:
        plan = _parse_fixed_params(fixed)
        missing = [c.chunk_type.value for c in chunks if c.chunk_type not in plan]
        if missing:
            raise click.BadParameter(f"no parameters for {', '.join(missing)}", param_hint='--params')
        result = simulate_transfer([(c, plan[c.chunk_type]) for c in chunks], scenario)
        label, throughput, duration = 'fixed', result.aggregate_throughput, result.duration
        rows, decisions = result.timeline_rows(), ()
    else:
        if online and strategy != 'harp':
            raise click.BadParameter('--online needs --strategy harp', param_hint='--online')
        name = 'harp-ot' if online else strategy
        optimizer = None
        if name in ('harp', 'harp-ot'):
            optimizer = HarpOptimizer.from_settings(_load_store(history_file or settings.history_path, settings), settings)
        outcome = run_strategy(name, chunks, scenario, optimizer=optimizer, settings=settings)
        label, throughput, duration = outcome.strategy, outcome.aggregate_throughput, outcome.duration
        rows, decisions = outcome.timeline_rows(), outcome.decision_rows

    click.echo(f"{label}: {format_rate(throughput)} over {duration:.1f} s")
    if timeline_path:
        timeline_csv(rows, timeline_path)
        click.echo(f"timeline written to {timeline_path}")
    if decisions_path:
        decision_log_csv(decisions, decisions_path)
        click.echo(f"decision log written to {decisions_path}")


@main.command()
@click.argument('scenario_file', type=click.Path())
@click.argument('manifest', type=click.Path())
@click.option('--strategies', default='go,sc,promc,pcp', show_default=True,
              help=f"Comma separated, from {','.join(STRATEGY_NAMES)}")
@click.option('--traffic', type=click.Choice(['light', 'medium', 'heavy']), default=None)
@click.option('--history', 'history_file', type=click.Path(), default=None)
@click.option('--baseline', default=None, help='Strategy the ratio column is relative to')
@click.option('--seed', default=None, type=int)
@click.pass_obj
@handle_errors
def compare(settings, scenario_file, manifest, strategies, traffic, history_file, baseline, seed):
    """Run several strategies under identical conditions."""
    names = [s.strip().lower() for s in strategies.split(',') if s.strip()]
    unknown = [s for s in names if s not in STRATEGY_NAMES]
    if not names or unknown:
        raise click.BadParameter(f"unknown strategies: {', '.join(unknown) or '(none given)'}",
                                 param_hint='--strategies')

    scenario = load_scenario(scenario_file, seed=seed)
    if traffic:
        scenario = scenario.with_traffic(traffic_preset(traffic))
    chunks = partition_files(load_manifest(manifest), scenario.network, settings.thresholds)

    optimizer = None
    if any(s in ('harp', 'harp-ot') for s in names):
        optimizer = HarpOptimizer.from_settings(_load_store(history_file or settings.history_path, settings), settings)

    outcomes = compare_strategies(names, chunks, scenario, optimizer=optimizer, settings=settings)
    click.echo(f"{'strategy':<9}{'Gbps':>10}{'seconds':>10}{'ratio':>8}")
    for name, throughput, duration, ratio in comparison_table(outcomes, baseline):
        ratio_text = f"{ratio:.2f}" if ratio is not None else '-'
        click.echo(f"{name:<9}{_gbps(throughput):>10.3f}{duration:>10.1f}{ratio_text:>8}")


@main.command('cost-table')
@click.option('--sample-time', default=SAMPLE_TIME, show_default=True, type=float)
@click.option('--latency', 'c', default=0.0, show_default=True, type=float, help='Optimizer latency c')
@handle_errors
def cost_table_command(sample_time, c):
    """Minimum chunk size (in Thr0 x seconds) for tuning to pay off."""
    click.echo(f"{'speedup%':>9}{'slowdown%':>10}{'min size':>10}")
    for row in cost_table(sample_time, c):
        click.echo(f"{row['speedup'] * 100:>9.0f}{row['slowdown'] * 100:>10.0f}{row['minChunkSize']:>10.0f}")


@main.command()
@click.argument('history_file', type=click.Path())
@click.argument('manifest', type=click.Path())
@click.argument('network_config', type=click.Path())
@click.pass_obj
@handle_errors
def inspect(settings, history_file, manifest, network_config):
    """Show the models fitted for each chunk of a dataset."""
    store = _load_store(history_file, settings)
    network = load_network_config(network_config)
    chunks = partition_files(load_manifest(manifest), network, settings.thresholds)
    optimizer = HarpOptimizer.from_settings(store, settings)

    for chunk in chunks:
        model_set = optimizer.models_for(chunk, network)
        click.echo(
            f"{chunk.chunk_type.value}: {model_set.entries_used} entries "
            f"(similarity >= {model_set.threshold:.2f}{', below minimum' if model_set.warning else ''}), "
            f"{len(model_set.models)} models, {len(model_set.rejected)} rejected"
        )
        for model in model_set.models:
            click.echo(
                f"  {model.group_id:<28} degree={model.degree} "
                f"r2_train={model.r2_train:.4f} r2_validation={model.r2_validation:.4f} "
                f"terms={len(model.coefficients)} samples={model.sample_count}"
            )
        for rejected in model_set.rejected:
            click.echo(f"  {rejected.group_id:<28} rejected: {rejected.reason}")


if __name__ == '__main__':
    main()
