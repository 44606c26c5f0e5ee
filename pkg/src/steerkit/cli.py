"""Command line front end.

Exit codes: 0 on success, 2 on invalid configuration or arguments (the
message names the offending field), 1 on any computational fault.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import analysis, cph, models, pauli, runner, steering
from .errors import ConfigError


def _load_json(path, what: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(what, f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(what, f"invalid JSON: {exc}")


def _load_hamiltonian(path) -> cph.CommutingHamiltonian:
    try:
        return cph.load_hamiltonian(path)
    except FileNotFoundError:
        raise ConfigError("hamiltonian", f"file not found: {path}")
    except (json.JSONDecodeError, ValueError) as exc:
        raise ConfigError("hamiltonian", str(exc))


def _guarded(fn):
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(2)
        except Exception as exc:
            click.echo(f"fault: {type(exc).__name__}: {exc}", err=True)
            sys.exit(1)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group()
def main():
    """Steer commuting Pauli models to their ground space, or bound why not."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="model config JSON")
@click.option("--out", "out_path", required=True, type=click.Path(), help="output Hamiltonian JSON")
@_guarded
def build(config_path, out_path):
    """Build a commuting Pauli Hamiltonian and write its term list."""
    cfg = _load_json(config_path, "config")
    model = models.build_from_config(cfg.get("model", cfg))
    if not isinstance(model, cph.CommutingHamiltonian):
        raise ConfigError("model.kind", "build expects a commuting Pauli model")
    cph.dump_hamiltonian(model, out_path)
    click.echo(
        f"n={model.n} terms={model.N} relations={model.d_r} "
        f"multiplicity={model.multiplicity()} -> {out_path}"
    )


@main.command()
@click.option("--hamiltonian", "h_path", required=True, type=click.Path(), help="Hamiltonian JSON")
@click.option("--out", "out_path", required=True, type=click.Path(), help="spectrum CSV")
@_guarded
def spectrum(h_path, out_path):
    """Enumerate every energy level of a commuting Pauli Hamiltonian."""
    h = _load_hamiltonian(h_path)
    runner.spectrum_to_csv(h, out_path)
    res = cph.ground_energy_search(h)
    click.echo(
        f"levels=2^{h.N - h.d_r} multiplicity={h.multiplicity()} "
        f"ground={res.energy:.12g} -> {out_path}"
    )


@main.command()
@click.option("--hamiltonian", "h_path", required=True, type=click.Path(), help="Hamiltonian JSON")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--max-steps", default=10_000, show_default=True, type=int)
@click.option("--mode", default="exact", show_default=True, type=click.Choice(["exact", "symbolic"]))
@click.option("--out", "out_path", type=click.Path(), help="trajectory JSON")
@_guarded
def steer(h_path, seed, max_steps, mode, out_path):
    """Run the blind steering protocol on a commuting Pauli Hamiltonian."""
    h = _load_hamiltonian(h_path)
    result = steering.run_protocol(h, seed=seed, max_steps=max_steps, mode=mode)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(result.to_json())
    pop = "n/a" if result.gs_population is None else f"{result.gs_population:.9f}"
    click.echo(
        f"converged={result.converged} steps={result.steps_used} "
        f"energy={result.final_energy} ground={result.ground_energy} population={pop}"
    )
    if not result.converged:
        click.echo(f"incomplete: {result.incomplete_reason}", err=True)


@main.command()
@click.option("--hamiltonian", "h_path", type=click.Path(), help="Hamiltonian JSON")
@click.option("--config", "config_path", type=click.Path(), help="model config JSON")
@_guarded
def classify(h_path, config_path):
    """Assign a steerability class to a model."""
    if (h_path is None) == (config_path is None):
        raise ConfigError("", "give exactly one of --hamiltonian or --config")
    if h_path:
        target = _load_hamiltonian(h_path)
        report = analysis.classify(target)
    else:
        cfg = _load_json(config_path, "config")
        model = models.build_from_config(cfg.get("model", cfg))
        report = analysis.classify(model)
    evidence = {
        k: (float(v) if isinstance(v, (np.floating, float)) else v)
        for k, v in report.evidence.items()
        if not isinstance(v, np.ndarray)
    }
    click.echo(json.dumps({"label": report.label, "evidence": evidence}, indent=1))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="ensemble config JSON")
@click.option("--seed", type=int, help="override base seed")
@click.option("--out", "out_path", type=click.Path(), help="report JSON")
@_guarded
def glassfloor(config_path, seed, out_path):
    """Population, energy and temperature floors for one realization."""
    raw = _load_json(config_path, "config")
    if seed is not None:
        raw["base_seed"] = seed
    cfg = runner.EnsembleConfig.from_dict(raw)
    report = runner.single_glass_floor(cfg)
    payload = report.to_json()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(payload)
        click.echo(f"p={report.p:.6g} T_eff_min={report.T_eff_min} -> {out_path}")
    else:
        click.echo(payload)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="ensemble config JSON")
@click.option("--seed", type=int, help="override base seed")
@click.option("--out", "out_prefix", required=True, type=click.Path(), help="output prefix")
@_guarded
def ensemble(config_path, seed, out_prefix):
    """Disorder ensemble sweep; writes rows, histogram and summary files."""
    raw = _load_json(config_path, "config")
    if seed is not None:
        raw["base_seed"] = seed
    cfg = runner.EnsembleConfig.from_dict(raw)
    result = runner.run_ensemble(cfg)
    result.to_csv(f"{out_prefix}_rows.csv")
    hist = result.histogram("p")
    hist.to_csv(f"{out_prefix}_p_hist.csv")
    with open(f"{out_prefix}_summary.json", "w") as fh:
        json.dump(result.summary(), fh, indent=1)
    click.echo(
        f"rows={len(result.rows)} failures={len(result.failures)} -> "
        f"{out_prefix}_rows.csv, {out_prefix}_p_hist.csv, {out_prefix}_summary.json"
    )


@main.command()
@click.option("--rows", "rows_path", required=True, type=click.Path(), help="CSV with size,p columns")
@click.option("--size-column", default="n", show_default=True)
@click.option("--value-column", default="p", show_default=True)
@click.option("--out", "out_path", type=click.Path(), help="fit JSON")
@_guarded
def fit(rows_path, size_column, value_column, out_path):
    """Log-log scaling fit of ensemble means against system size."""
    import csv as _csv
    from collections import defaultdict

    groups = defaultdict(list)
    with open(rows_path) as fh:
        reader = _csv.DictReader(fh)
        if reader.fieldnames is None or size_column not in reader.fieldnames:
            raise ConfigError("rows", f"column {size_column!r} not found")
        if value_column not in reader.fieldnames:
            raise ConfigError("rows", f"column {value_column!r} not found")
        for row in reader:
            try:
                groups[int(row[size_column])].append(float(row[value_column]))
            except ValueError:
                continue
    if len(groups) < 2:
        raise ConfigError("rows", "need at least two distinct sizes to fit")
    sizes = sorted(groups)
    means = [float(np.mean(groups[n])) for n in sizes]
    variances = [
        float(np.var(groups[n], ddof=1)) if len(groups[n]) > 1 else 0.0 for n in sizes
    ]
    fit_out = runner.scaling_fit(sizes, means, variances)
    payload = json.dumps(
        {k: (v if not isinstance(v, float) or np.isfinite(v) else None) for k, v in fit_out.items()},
        indent=1,
        default=lambda o: o,
    )
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(payload)
    click.echo(payload)


if __name__ == "__main__":
    main()
