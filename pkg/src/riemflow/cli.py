"""Command line interface: ``riemflow gen|run|sweep|diagnose|report``."""
import csv
import json
import logging
import sys
from pathlib import Path

import click

from . import bench, io
from . import diagnostics as diag
from .curvature import rate_exponent
from .errors import InputError
from .integrator import SolverConfig, Trajectory, TrajectorySample

PROBLEMS = ["eigenvalue", "karcher", "flat"]


def _instance_options(f):
    opts = [
        click.option("--problem", type=click.Choice(PROBLEMS), default="eigenvalue", show_default=True),
        click.option("--n", type=int, default=None, help="Matrix/vector dimension (desk default per problem)."),
        click.option("--m", type=int, default=None, help="Rows of G (eigenvalue) or number of matrices (karcher)."),
        click.option("--beta", type=float, default=None, help="Scaling of A = G^T G / beta."),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--kmin", type=float, default=None, help="Lower curvature bound for the SPD profile."),
        click.option("--diameter", type=float, default=None, help="Override the heuristic diameter D."),
        click.option("--instance", "instance_path", type=click.Path(exists=True), default=None,
                     help="Load a saved instance instead of generating one."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _solver_options(f):
    opts = [
        click.option("--dt", type=float, default=0.1, show_default=True),
        click.option("--T", "horizon", type=float, default=200.0, show_default=True),
        click.option("--time-origin", type=float, default=None, help="Clock value of the first step (default max(dt, alpha*dt))."),
        click.option("--record-every", type=int, default=1, show_default=True),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _build(problem, n, m, beta, seed, kmin, diameter, instance_path):
    if instance_path:
        inst, spec = bench.load_instance(instance_path)
        if kmin is not None:
            spec.k_min = kmin
        if diameter is not None:
            spec.diameter = diameter
        return inst, spec
    overrides = {k: v for k, v in {"n": n, "m": m, "beta": beta}.items() if v is not None}
    spec = bench.InstanceSpec.desk(problem, seed=seed, k_min=kmin, diameter=diameter, **overrides)
    return bench.generate(spec), spec


def _parse_alphas(text):
    if text is None:
        return None
    text = text.strip()
    if not text:
        return []
    return [float(a) for a in text.replace(";", ",").split(",") if a.strip()]


@click.group()
@click.option("-v", "--verbose", count=True)
def main(verbose):
    """Accelerated Riemannian gradient flow: benchmarks and diagnostics."""
    logging.basicConfig(level=logging.WARNING - 10 * verbose, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@_instance_options
@click.option("--out", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "bin"]), default="csv", show_default=True)
def gen(out, fmt, **kw):
    """Generate an instance and its oracle; write matrices and instance.json."""
    inst, spec = _build(**kw)
    path = bench.save_instance(inst, spec, out, fmt=fmt)
    prof = bench.curvature_for(inst, spec)
    click.echo(f"{path}\tfstar={inst.fstar!r}\tdelta={prof.delta:.6g}\thash={bench.instance_hash(inst)[:16]}")


def _do_sweep(alphas, out, states, dt, horizon, time_origin, record_every, **kw):
    try:
        cfg = SolverConfig(alpha=1.0, dt=dt, horizon=horizon, time_origin=time_origin, record_every=record_every)
        inst, spec = _build(**kw)
    except InputError as exc:
        raise click.UsageError(str(exc)) from exc
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    bench.save_instance(inst, spec, out / "instance")
    try:
        manifest = bench.sweep(inst, alphas, cfg, out, spec=spec, states=states)
    except InputError as exc:
        raise click.BadParameter(str(exc), param_hint="alpha") from exc
    _print_table(manifest, sys.stdout)
    return manifest


@main.command()
@_instance_options
@_solver_options
@click.option("--alpha", type=float, required=True)
@click.option("--out", type=click.Path(), required=True)
def run(alpha, out, **kw):
    """Integrate one trajectory and write its CSVs, states and manifest."""
    _do_sweep([alpha], out, True, **kw)


@main.command()
@_instance_options
@_solver_options
@click.option("--alphas", type=str, default=None, help="Comma-separated list (default: the published list).")
@click.option("--out", type=click.Path(), required=True)
@click.option("--states/--no-states", default=False, help="Also dump (t, x, v) per sample.")
def sweep(alphas, out, states, **kw):
    """Run an alpha sweep on one instance."""
    parsed = _parse_alphas(alphas)
    if parsed is None:
        parsed = bench.DEFAULT_ALPHAS[kw["problem"]]
    _do_sweep(parsed, out, states, **kw)


def _load_trajectory(run_dir, entry, inst):
    man = inst.manifold
    cfg = SolverConfig(**entry["config"])
    samples = []
    obj = inst.objective
    with open(run_dir / entry["files"]["states"]) as fh:
        for line in fh:
            rec = json.loads(line)
            x = man.from_json(rec["x"])
            v = man.from_json(rec["v"])
            g = obj.gradient(x)
            samples.append(TrajectorySample(rec["t"], x, v, obj.value(x), man.norm(x, g), True, man.inner(x, v, g)))
    return Trajectory(samples, cfg, instance_id=inst.name, manifold=man)


@main.command()
@click.option("--run", "run_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--kmin", type=float, default=None)
@click.option("--diameter", type=float, default=None)
def diagnose(run_dir, kmin, diameter):
    """Recompute diagnostics from dumped states (written by ``run`` or ``sweep --states``)."""
    run_dir = Path(run_dir)
    manifest = io.read_json(run_dir / "manifest.json")
    inst, spec = bench.load_instance(run_dir / "instance")
    if kmin is not None:
        spec.k_min = kmin
    if diameter is not None:
        spec.diameter = diameter
    prof = bench.curvature_for(inst, spec)
    out = []
    for entry in manifest["runs"]:
        if "states" not in entry.get("files", {}):
            click.echo(f"alpha={entry['alpha']}: no state dump, skipped", err=True)
            continue
        traj = _load_trajectory(run_dir, entry, inst)
        trace = diag.energy_trace(traj, inst.zref, inst.fstar)
        sub = None
        if traj.config.alpha <= prof.delta:
            sub = diag.subcritical_energy(traj, inst.zref, inst.fstar, traj.config.alpha, prof)
        summary = diag.summarize(traj, trace, traj.config.alpha, prof, sub)
        tag = Path(entry["files"]["states"]).name.replace("_states.jsonl", "")
        bench.write_diagnostics_csv(run_dir / f"{tag}_diagnostics.csv", trace, sub)
        out.append(io.sanitize(summary.__dict__))
    io.write_json(run_dir / "summary.json", {"curvature_profile": prof.to_dict(), "runs": out})
    click.echo(json.dumps({"curvature_profile": prof.to_dict(), "runs": out}, indent=2, default=float))


REPORT_COLUMNS = [
    "alpha", "delta", "predicted_exponent", "fitted_exponent", "r_squared",
    "stagnation_time", "final_gap", "energy_monotone", "shadow_energy_monotone", "status",
]


def _report_rows(manifest):
    delta = manifest["curvature_profile"]["delta"]
    rows = []
    for r in manifest["runs"]:
        s = r.get("summary") or {}
        rows.append([
            r["alpha"], delta, rate_exponent(r["alpha"], delta), r.get("fitted_exponent"),
            s.get("fit_r_squared"), r.get("stagnation_time"), s.get("final_gap"),
            s.get("energy_monotone"), s.get("shadow_energy_monotone"), r["status"],
        ])
    return rows


def _print_table(manifest, stream, delimiter="\t"):
    w = csv.writer(stream, delimiter=delimiter, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for row in _report_rows(manifest):
        w.writerow([io.fmt(c) if not isinstance(c, str) else c for c in row])


@main.command()
@click.option("--sweep", "sweep_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--delimiter", type=click.Choice(["tab", "comma"]), default="tab", show_default=True)
def report(sweep_dir, delimiter):
    """Summarize a sweep: predicted vs fitted exponents, stagnation, energy checks."""
    sweep_dir = Path(sweep_dir)
    manifest = io.read_json(sweep_dir / "manifest.json")
    _print_table(manifest, sys.stdout, "\t" if delimiter == "tab" else ",")
    with open(sweep_dir / "report.csv", "w", newline="") as fh:
        _print_table(manifest, fh, ",")


if __name__ == "__main__":
    main()
