"""Command-line entry points.

Subcommands: gen (write a synthetic stream), cost-matrix, oracle (optimal
strategy for one kappa), run (single policy), sweep (full grid) and report
(aggregate a results CSV). Everything beyond argument handling lives in the
library modules.
"""

from __future__ import annotations

import csv

import click

from .costmatrix import StreamCosts, cumulative_cost_trace, format_value, strategy_cost
from .datagen import StreamSpec, generate_stream
from .harness import (
    PolicySpec,
    RunConfig,
    evaluate_prequential,
    render_summary,
    report,
    results_from_csv,
    results_to_csv,
    run_sweep,
    save_stream_csv,
    scpe,
    summary_to_csv,
)
from .oracle import expand_to_strategy, memoize_dp, oracle_retrains, oracle_strategy
from .policies import run_policy


@click.group()
def main():
    """Cost-aware retraining decisions over batched data and query streams."""


@main.command()
@click.option("--dataset", type=click.Choice(["gauss", "circle", "covcon"]), required=True)
@click.option("--n-batches", default=100, show_default=True)
@click.option("--batch-size", default=1000, show_default=True)
@click.option("--queries", "queries_per_batch", default=100, show_default=True)
@click.option("--query-mode", type=click.Choice(["D", "S"]), default="D", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--covcon-alpha", default=1.0, show_default=True)
@click.option("--gauss-sigma", default=0.1, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def gen(dataset, n_batches, batch_size, queries_per_batch, query_mode, seed, covcon_alpha, gauss_sigma, out):
    """Generate a synthetic stream and write it as a stream CSV."""
    spec = StreamSpec(
        dataset=dataset,
        n_batches=n_batches,
        batch_size=batch_size,
        queries_per_batch=queries_per_batch,
        query_mode=query_mode,
        seed=seed,
        covcon_alpha=covcon_alpha,
        gauss_sigma=gauss_sigma,
    )
    data, queries = generate_stream(spec)
    save_stream_csv(out, data, queries)
    click.echo(f"wrote {spec.name}: {n_batches} batches x {batch_size} points to {out}")


def _setup(cfg: RunConfig, seed, kappa):
    seed = cfg.seeds[0] if seed is None else seed
    kappa = cfg.kappas[0] if kappa is None else kappa
    data, queries = cfg.stream_for_seed(seed)
    costs = StreamCosts(data, queries, cfg.model_for_seed(seed), cfg.kernel)
    return seed, kappa, data, queries, costs


@main.command("cost-matrix")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--phase", type=click.Choice(["offline", "online"]), default="offline", show_default=True)
@click.option("--kappa", type=float, default=None, help="defaults to the first configured value")
@click.option("--seed", type=int, default=None, help="defaults to the first configured seed")
@click.option("--out", type=click.Path(), required=True)
def cost_matrix_cmd(config_path, phase, kappa, seed, out):
    """Build one phase's cost matrix and export it as CSV."""
    cfg = RunConfig.load(config_path)
    seed, kappa, _, _, costs = _setup(cfg, seed, kappa)
    if phase == "offline":
        start, end = 0, cfg.t_offline
    else:
        start, end = cfg.t_offline + 1, cfg.t_online
    matrix = costs.cost_matrix(start, end, kappa)
    matrix.to_csv(out)
    click.echo(f"wrote {phase} cost matrix [{start}, {end}] at kappa={kappa} to {out}")


@main.command("oracle")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--kappa", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None, help="write the strategy as CSV")
@click.option("--table-out", type=click.Path(), default=None, help="export the DP table")
def oracle_cmd(config_path, kappa, seed, out, table_out):
    """Optimal online strategy and its cost for one kappa."""
    cfg = RunConfig.load(config_path)
    seed, kappa, _, _, costs = _setup(cfg, seed, kappa)
    matrix = costs.cost_matrix(cfg.t_offline + 1, cfg.t_online, kappa)
    table = memoize_dp(matrix)
    strategy = expand_to_strategy(oracle_retrains(table), matrix.start, matrix.end)
    click.echo(f"optimal cost: {format_value(table.optimal_cost)}")
    click.echo(f"retrains at: {','.join(str(b) for b in strategy.retrain_batches)}")
    click.echo(f"strategy: {strategy}")
    if out:
        _write_strategy_csv(out, strategy)
    if table_out:
        table.to_csv(table_out)


def _write_strategy_csv(path, strategy):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "served_by"])
        for t in range(strategy.start, strategy.end + 1):
            writer.writerow([t, strategy.serving(t)])


@main.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--policy", "policy_name", required=True)
@click.option("--kappa", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--trace-out", type=click.Path(), default=None, help="write the cumulative cost trace")
def run_cmd(config_path, policy_name, kappa, seed, trace_out):
    """Run one policy online and print its result row."""
    cfg = RunConfig.load(config_path)
    seed, kappa, data, queries, costs = _setup(cfg, seed, kappa)
    start, end = cfg.t_offline + 1, cfg.t_online
    matrix = costs.cost_matrix(start, end, kappa)

    spec = next((p for p in cfg.policies if p.name == policy_name), None)
    if spec is None:
        spec = PolicySpec(policy_name, {})
    policy = spec.build(costs.cost_matrix(0, cfg.t_offline, kappa))
    strategy = run_policy(policy, data, queries, kappa, costs.model, start=start, end=end, costs=costs)
    cost = strategy_cost(strategy, matrix)
    _, opt_cost = oracle_strategy(matrix)
    accuracy = evaluate_prequential(strategy, data, queries, costs=costs)
    click.echo(f"policy: {policy!r}")
    click.echo(f"strategy_cost: {format_value(cost)}")
    click.echo(f"oracle_cost: {format_value(opt_cost)}")
    if opt_cost != 0:
        click.echo(f"scpe: {format_value(scpe(cost, opt_cost))}")
    else:
        click.echo("scpe: undefined (zero oracle cost)")
    click.echo(f"n_retrains: {strategy.n_retrains}")
    click.echo(f"query_accuracy: {format_value(accuracy)}")
    click.echo(f"strategy: {strategy}")
    if trace_out:
        trace = cumulative_cost_trace(strategy, matrix)
        with open(trace_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "cumulative_cost"])
            for t, value in zip(range(start, end + 1), trace):
                writer.writerow([t, format_value(value)])


@main.command("sweep")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None, help="defaults to the config's output path")
def sweep_cmd(config_path, out):
    """Run the full (policy, kappa, seed) grid and write the results CSV."""
    cfg = RunConfig.load(config_path)
    out = out or cfg.output
    if out is None:
        raise click.UsageError("no output path: pass --out or set 'output' in the config")
    results = run_sweep(cfg)
    results_to_csv(results, out)
    click.echo(f"wrote {len(results)} result rows to {out}")
    click.echo(render_summary(report(results)))


@main.command("report")
@click.option("--results", "results_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None, help="also write the summary as CSV")
def report_cmd(results_path, out):
    """Aggregate a results CSV into per-(dataset, policy) means."""
    summary = report(results_from_csv(results_path))
    click.echo(render_summary(summary))
    if out:
        summary_to_csv(summary, out)
        click.echo(f"wrote summary to {out}")


if __name__ == "__main__":
    main()
