"""Benchmark instances, reference oracles and alpha sweeps."""
import hashlib
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import diagnostics as diag
from . import io, linalg
from .curvature import profile as make_profile
from .errors import InputError, OracleError
from .integrator import solve
from .objectives import FlatQuadratic, KarcherMean, ProblemInstance, RayleighQuotient

log = logging.getLogger(__name__)

DEFAULT_ALPHAS = {
    "eigenvalue": [1.5, 2.0, 2.5, 2.9, 3.0, 3.1, 4.0, 6.0, 8.0],
    "karcher": [2.0, 2.5, 3.0, 3.9, 4.1, 4.5, 5.0, 6.0, 7.0],
    "flat": [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0],
}

DESK_DEFAULTS = {
    "eigenvalue": {"m": 200, "n": 50, "beta": 100.0},
    "karcher": {"m": 5, "n": 10},
    "flat": {"n": 10},
}


@dataclass
class InstanceSpec:
    problem: str
    n: int
    m: int = 1
    beta: float = 1.0
    eig_range: tuple = (0.0, 100.0)
    seed: int = 0
    k_min: Optional[float] = None
    diameter: Optional[float] = None
    diameter_safety: float = 1.0

    def __post_init__(self):
        if self.problem not in DEFAULT_ALPHAS:
            raise InputError(f"unknown problem {self.problem!r}")
        if self.n < 1 or self.m < 1:
            raise InputError("dimensions must be positive")
        if not self.beta > 0:
            raise InputError("beta must be positive")
        lo, hi = self.eig_range
        if not 0 <= lo < hi:
            raise InputError("eig_range must be an interval in (0, inf)")
        self.eig_range = (float(lo), float(hi))

    @classmethod
    def desk(cls, problem, **overrides):
        kw = dict(DESK_DEFAULTS[problem])
        kw.update(overrides)
        return cls(problem=problem, **kw)

    def to_dict(self):
        d = asdict(self)
        d["eig_range"] = list(self.eig_range)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "eig_range" in d:
            d["eig_range"] = tuple(d["eig_range"])
        return cls(**d)


@dataclass
class BenchmarkOracle:
    fstar: float
    zref: np.ndarray
    method: str
    iterations: int = 0
    grad_norm: float = 0.0


# --- instance generation ------------------------------------------------------


def gen_eigenvalue_instance(spec):
    """``A = G^T G / beta`` with Gaussian ``G`` (m x n); start uniform on the hemisphere."""
    rng = np.random.default_rng(spec.seed)
    g = rng.standard_normal((spec.m, spec.n))
    a = linalg.symmetrize(g.T @ g / spec.beta)
    obj = RayleighQuotient(a)
    x0 = obj.manifold.random_point(rng)
    oracle = eigenvalue_oracle(obj, x0)
    return ProblemInstance(
        obj, x0, oracle.fstar, oracle.zref, name=f"eigenvalue-n{spec.n}-m{spec.m}-s{spec.seed}",
        oracle_method=oracle.method, meta={"spec": spec.to_dict()},
    )


def eigenvalue_oracle(obj, x0):
    """Top eigenpair by a dense symmetric eigensolve.

    Of the two unit eigenvectors ``+-u`` the one on the side of ``x0`` is
    returned as the reference minimizer.
    """
    w, q = np.linalg.eigh(obj.a)
    u = q[:, -1].copy()
    if np.dot(u, x0) < 0:
        u = -u
    return BenchmarkOracle(fstar=-0.5 * float(w[-1]), zref=u, method="dense-eigh")


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def explog_mean(matrices):
    return linalg.expm(sum(linalg.logm(a) for a in matrices) / len(matrices))


def gen_karcher_instance(spec, tol=1e-10):
    """``A_j = U_j Q_j U_j^T`` with random orthogonal ``U_j`` and diagonal ``Q_j``.

    The start point is the log-Euclidean mean ``Expm(mean_j Logm(A_j))``.
    """
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.eig_range
    mats = []
    for _ in range(spec.m):
        u = random_orthogonal(rng, spec.n)
        d = rng.uniform(lo, hi, size=spec.n)
        while np.any(d <= 0):
            d = np.where(d <= 0, rng.uniform(lo, hi, size=spec.n), d)
        mats.append(linalg.symmetrize((u * d) @ u.T))
    obj = KarcherMean(mats)
    x0 = explog_mean(mats)
    inst = ProblemInstance(obj, x0, np.nan, x0, name=f"karcher-n{spec.n}-m{spec.m}-s{spec.seed}",
                           meta={"spec": spec.to_dict()})
    oracle = karcher_oracle(inst, tol=tol)
    inst.fstar, inst.zref, inst.oracle_method = oracle.fstar, oracle.zref, oracle.method
    inst.meta["oracle_iterations"] = oracle.iterations
    return inst


def karcher_oracle(instance, tol=1e-10, max_iter=10_000):
    """Karcher mean by the fixed-point iteration ``P <- Exp_P(-grad f(P) / (2m))``.

    Equivalently ``P <- Exp_P(mean_j Log_P A_j)``. Stops once the Riemannian
    gradient norm is at most ``tol``.
    """
    obj = instance.objective
    if not isinstance(obj, KarcherMean):
        raise InputError("karcher_oracle needs a Karcher-mean instance")
    man = obj.manifold
    p = np.array(instance.x0, dtype=float)
    for it in range(max_iter + 1):
        s, si = linalg.sqrtm_and_invsqrtm(p)
        whitened = -2.0 * sum(linalg.logm(si @ a @ si) for a in obj.matrices)
        gnorm = float(np.linalg.norm(whitened))
        if gnorm <= tol:
            return BenchmarkOracle(obj.value(p), p, "karcher-fixed-point", iterations=it, grad_norm=gnorm)
        # Exp_P(-G/(2m)) with P^{-1/2} G P^{-1/2} = whitened
        p = linalg.symmetrize(s @ linalg.expm(-whitened / (2.0 * obj.m)) @ s)
    man.check_point(p)
    raise OracleError(f"Karcher fixed point not reached in {max_iter} iterations (|grad|={gnorm:.3e})")


def geometric_midpoint(a, b):
    """``A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}``."""
    s, si = linalg.sqrtm_and_invsqrtm(a)
    return linalg.symmetrize(s @ linalg.sqrtm(si @ b @ si) @ s)


def gen_flat_instance(spec):
    """Diagonal quadratic with eigenvalues in ``eig_range`` scaled to (0, 1]; minimizer 0."""
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.eig_range
    d = np.sort(rng.uniform(lo, hi, size=spec.n))
    d = np.maximum(d, 1e-3 * hi) / hi
    obj = FlatQuadratic(np.diag(d))
    x0 = rng.standard_normal(spec.n)
    return ProblemInstance(obj, x0, 0.0, np.zeros(spec.n), name=f"flat-n{spec.n}-s{spec.seed}",
                           oracle_method="closed-form", meta={"spec": spec.to_dict()})


def generate(spec):
    return {"eigenvalue": gen_eigenvalue_instance, "karcher": gen_karcher_instance, "flat": gen_flat_instance}[
        spec.problem
    ](spec)


def instance_hash(instance):
    """SHA-256 over the problem data and start point."""
    obj = instance.objective
    h = hashlib.sha256()
    h.update(type(obj).__name__.encode())
    arrays = {"rayleigh": lambda: [obj.a], "karcher": lambda: obj.matrices, "flat-quadratic": lambda: [obj.q]}[
        obj.kind
    ]()
    for a in list(arrays) + [instance.x0]:
        h.update(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return h.hexdigest()


def curvature_for(instance, spec):
    """Curvature profile for a benchmark instance.

    Hemisphere: constant curvature 1. SPD: ``K_min`` defaults to -0.1 and the
    diameter to the start-to-minimizer distance times ``diameter_safety``.
    Flat: zero curvature.
    """
    man = instance.manifold
    if spec.problem == "eigenvalue":
        d = spec.diameter if spec.diameter is not None else man.distance(instance.x0, instance.zref)
        d = min(max(d, 1e-6), np.pi - 1e-6)
        return make_profile(1.0, 1.0, d)
    if spec.problem == "karcher":
        kmin = -0.1 if spec.k_min is None else spec.k_min
        if spec.diameter is not None:
            d = spec.diameter
        else:
            d = spec.diameter_safety * man.distance(instance.x0, instance.zref)
        return make_profile(kmin, 0.0, max(d, 1e-6))
    d = spec.diameter if spec.diameter is not None else max(man.distance(instance.x0, instance.zref), 1e-6)
    return make_profile(0.0, 0.0, d)


# --- writing runs ----------------------------------------------------------------

TRAJECTORY_COLUMNS = ["t", "f_gap", "t2_f_gap", "grad_norm", "speed", "energy", "dist_to_ref", "containment"]
DIAGNOSTIC_COLUMNS = ["t", "W", "shadow_W", "scaled_gap", "h", "subcritical_W"]


def _alpha_tag(alpha):
    return f"{alpha:g}".replace(".", "p")


def write_trajectory_csv(path, traj, trace):
    man = traj.manifold
    rows = []
    for s, e in zip(traj.samples, trace):
        rows.append([s.t, e.gap, e.scaled_gap, s.grad_norm, man.norm(s.x, s.v), e.W, np.sqrt(2 * e.h), s.containment_ok])
    return io.write_csv(path, TRAJECTORY_COLUMNS, rows)


def write_diagnostics_csv(path, trace, sub=None):
    rows = []
    for i, e in enumerate(trace):
        rows.append([e.t, e.W, e.shadow_W, e.scaled_gap, e.h, sub[i].W if sub else None])
    return io.write_csv(path, DIAGNOSTIC_COLUMNS, rows)


def write_states(path, traj):
    """JSON-lines dump of ``(t, x, v)`` for later re-diagnosis."""
    import json

    man = traj.manifold
    with open(path, "w") as fh:
        for s in traj.samples:
            fh.write(json.dumps({"t": s.t, "x": man.to_json(s.x), "v": man.to_json(s.v)}) + "\n")
    return Path(path)


def run_one(instance, config, prof, outdir=None, prefix=None, states=False):
    """Solve, diagnose and (optionally) write one run; returns ``(traj, trace, summary, files)``."""
    traj = solve(instance, config)
    trace = diag.energy_trace(traj, instance.zref, instance.fstar)
    sub = None
    if config.alpha <= prof.delta:
        sub = diag.subcritical_energy(traj, instance.zref, instance.fstar, config.alpha, prof)
    summary = diag.summarize(traj, trace, config.alpha, prof, sub)
    files = {}
    if outdir is not None:
        outdir = Path(outdir)
        prefix = prefix or f"alpha_{_alpha_tag(config.alpha)}"
        files["trajectory"] = write_trajectory_csv(outdir / f"{prefix}_trajectory.csv", traj, trace).name
        files["diagnostics"] = write_diagnostics_csv(outdir / f"{prefix}_diagnostics.csv", trace, sub).name
        if states:
            files["states"] = write_states(outdir / f"{prefix}_states.jsonl", traj).name
    return traj, trace, summary, files


def _threads():
    try:
        return max(1, int(os.environ.get("RIEMFLOW_THREADS", "1")))
    except ValueError:
        return 1


def sweep(instance, alphas, config, outdir, spec=None, prof=None, states=False):
    """Run every alpha, write per-run CSVs, figure data and ``manifest.json``.

    A failing run is recorded with its error and does not stop the sweep.
    Runs execute concurrently up to ``RIEMFLOW_THREADS`` workers; each run
    writes only its own files and the manifest is written once at the end.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if prof is None:
        prof = curvature_for(instance, spec) if spec is not None else make_profile(0.0, 0.0, 1.0)

    def task(alpha):
        cfg = replace(config, alpha=float(alpha))
        try:
            traj, trace, summary, files = run_one(instance, cfg, prof, outdir, states=states)
        except Exception as exc:  # recorded in the manifest, sweep continues
            log.exception("run alpha=%g failed", alpha)
            return {"alpha": float(alpha), "status": f"error: {exc}", "files": {}}, None
        status = "ok" if traj.ok else f"error: {traj.error}"
        entry = {
            "alpha": float(alpha),
            "config": cfg.to_dict(),
            "files": files,
            "fitted_exponent": summary.fitted_exponent,
            "stagnation_time": summary.stagnation_time,
            "status": status,
            "summary": asdict(summary),
        }
        return entry, trace

    alphas = [float(a) for a in alphas]
    bad = [a for a in alphas if not a > 0]
    if bad:
        raise InputError(f"alpha must be positive, got {bad}")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(task, alphas))

    fig_rows = []
    for entry, trace in results:
        if trace is None:
            continue
        for e in trace:
            fig_rows.append([entry["alpha"], e.t, e.gap, e.scaled_gap])
    io.write_csv(outdir / "figure_data.csv", ["alpha", "t", "f_gap", "t2_f_gap"], fig_rows)

    manifest = {
        "spec": spec.to_dict() if spec is not None else None,
        "seed": spec.seed if spec is not None else None,
        "instance": {
            "name": instance.name,
            "hash": instance_hash(instance),
            "fstar": instance.fstar,
            "oracle_method": instance.oracle_method,
            "zref": instance.manifold.to_json(instance.zref),
        },
        "curvature_profile": prof.to_dict(),
        "config": {k: v for k, v in config.to_dict().items() if k not in ("alpha", "time_origin")},
        "subcritical_exponent_rule": "p = alpha/delta (admissible set min(1, alpha/delta, (alpha+1)/4))",
        "stagnation_tol": diag.STAGNATION_TOL,
        "figure_data": "figure_data.csv",
        "runs": [entry for entry, _ in results],
    }
    io.write_json(outdir / "manifest.json", io.sanitize(manifest))
    return manifest


# --- persistence of instances -----------------------------------------------------


def save_instance(instance, spec, outdir, fmt="csv"):
    """Write problem matrices, start point and reference minimizer to ``outdir``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    obj = instance.objective
    ext = ".csv" if fmt == "csv" else ".bin"
    files = {}
    if obj.kind == "rayleigh":
        files["A"] = io.write_matrix(outdir / f"A{ext}", obj.a).name
    elif obj.kind == "karcher":
        mdir = outdir / "matrices"
        mdir.mkdir(exist_ok=True)
        for j, a in enumerate(obj.matrices):
            io.write_matrix(mdir / f"A_{j:03d}{ext}", a)
        files["matrices"] = "matrices"
    else:
        files["Q"] = io.write_matrix(outdir / f"Q{ext}", obj.q).name
    man = instance.manifold
    meta = {
        "spec": spec.to_dict(),
        "files": files,
        "x0": man.to_json(instance.x0),
        "zref": man.to_json(instance.zref),
        "fstar": instance.fstar,
        "oracle_method": instance.oracle_method,
        "hash": instance_hash(instance),
    }
    if obj.kind == "rayleigh":
        meta["pole"] = obj.manifold.pole.tolist()
    io.write_json(outdir / "instance.json", meta)
    return outdir / "instance.json"


def load_instance(path):
    """Load an instance written by :func:`save_instance`; returns ``(instance, spec)``."""
    path = Path(path)
    if path.is_dir():
        path = path / "instance.json"
    meta = io.read_json(path)
    base = path.parent
    spec = InstanceSpec.from_dict(meta["spec"])
    files = meta["files"]
    if spec.problem == "eigenvalue":
        obj = RayleighQuotient(io.read_matrix(base / files["A"]), pole=meta.get("pole"))
    elif spec.problem == "karcher":
        obj = KarcherMean(io.read_matrix_stack(base / files["matrices"]))
    else:
        obj = FlatQuadratic(io.read_matrix(base / files["Q"]))
    man = obj.manifold
    inst = ProblemInstance(
        obj, man.from_json(meta["x0"]), float(meta["fstar"]), man.from_json(meta["zref"]),
        name=path.parent.name, oracle_method=meta.get("oracle_method", "unknown"), meta={"spec": meta["spec"]},
    )
    return inst, spec
