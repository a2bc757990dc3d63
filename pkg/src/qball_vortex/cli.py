"""Batch driver: ``qball-vortex {solve,verify-seed,check-potential,identities,sweep} CONFIG``.

The config is an INI file with sections [grid], [potential], [solver], [run].
Potential terms are a JSON list of [coefficient, exponent] pairs::

    [potential]
    m = 1
    terms = [[-2000, 4], [24.25, 5]]
    D = 1000
    tau = 4
    eps0 = 0.019

Errors exit nonzero and print one JSON object with ``error`` and ``reason``
to stderr (2: configuration, 3: solver).
"""
from __future__ import annotations

import argparse
import configparser
import io
import json
import os
import platform
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import scipy

from .diagnostics import certificate_for, identity_report, pohozaev_report
from .energy import ReducedEnergy
from .exceptions import ConfigurationError, QBallError, SolverError
from .minimize import SolverConfig, bounds_report, minimize
from .potential import PotentialModel, verify_hypotheses
from .seeds import (choose_seed_params, estimate_D0, seed_field, torus_moment,
                    verify_lemma17)

__version__ = "0.1.0"

GRID_KEYS = ("n_r", "n_z", "r_max", "z_half")
SOLVER_KEYS = tuple(f.name for f in fields(SolverConfig) if f.name not in GRID_KEYS)
POTENTIAL_KEYS = ("m", "terms", "D", "tau", "eps0")
SWEEP_PARAMS = ("sigma", "q", "D", "l", "grid")


# -- configuration -----------------------------------------------------------

@dataclass
class RunConfig:
    solver: SolverConfig
    model: PotentialModel
    output_dir: str = "out"
    run_seed: int = 0
    seed_kind: str = "torus"
    seed_lambda: float | None = None
    seed_eps: float | None = None

    def snapshot(self):
        return {
            "grid": {k: getattr(self.solver, k) for k in GRID_KEYS},
            "potential": {
                "m": self.model.m,
                "terms": [list(t) for t in self.model.terms],
                "D": self.model.D,
                "tau": self.model.tau,
                "eps0": self.model.eps0,
            },
            "solver": {k: getattr(self.solver, k) for k in SOLVER_KEYS},
            "run": {
                "output_dir": self.output_dir,
                "run_seed": self.run_seed,
                "seed_kind": self.seed_kind,
                "seed_lambda": self.seed_lambda,
                "seed_eps": self.seed_eps,
            },
        }


def _coerce(value, like):
    if isinstance(like, bool):
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"not a boolean: {value!r}")
    if isinstance(like, int):
        f = float(value)
        if f != int(f):
            raise ConfigurationError(f"not an integer: {value!r}")
        return int(f)
    if isinstance(like, float):
        return float(value)
    return value


def _optional_float(section, key):
    v = section.get(key)
    if v is None or v.strip().lower() in ("", "none", "null"):
        return None
    return float(v)


def parse_config_text(text):
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keys are case sensitive (D vs d)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse error: {exc}") from exc
    for sec in ("grid", "potential", "solver"):
        if not cp.has_section(sec):
            raise ConfigurationError(f"missing section [{sec}]")
    defaults = SolverConfig()
    kw = {}
    try:
        for sec, keys in (("grid", GRID_KEYS), ("solver", SOLVER_KEYS)):
            for key, val in cp.items(sec):
                if key not in keys:
                    raise ConfigurationError(f"unknown key {key!r} in [{sec}]")
                kw[key] = _coerce(val, getattr(defaults, key))
        pot = cp["potential"]
        for key in pot:
            if key not in POTENTIAL_KEYS:
                raise ConfigurationError(f"unknown key {key!r} in [potential]")
        terms = json.loads(pot.get("terms", "[]"))
        if not isinstance(terms, list) or any(not isinstance(t, list) or len(t) != 2 for t in terms):
            raise ConfigurationError("terms must be a JSON list of [coefficient, exponent] pairs")
        model = PotentialModel(
            m=float(pot.get("m", "1")),
            terms=tuple((float(c), float(p)) for c, p in terms),
            D=float(pot.get("D", "0")),
            tau=float(pot.get("tau", "3")),
            eps0=float(pot.get("eps0", "1")),
        )
        run = cp["run"] if cp.has_section("run") else {}
        rc = RunConfig(
            solver=SolverConfig(**kw),
            model=model,
            output_dir=run.get("output_dir", "out"),
            run_seed=int(run.get("run_seed", "0")),
            seed_kind=run.get("seed_kind", "torus"),
            seed_lambda=_optional_float(run, "seed_lambda") if run else None,
            seed_eps=_optional_float(run, "seed_eps") if run else None,
        )
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"config value error: {exc}") from exc
    if rc.seed_kind not in ("torus",):
        raise ConfigurationError(f"unknown seed_kind {rc.seed_kind!r}")
    return rc


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config_text(text)


def config_text(snapshot):
    """Inverse of ``parse_config_text`` for a snapshot dict."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    for sec, items in snapshot.items():
        cp[sec] = {}
        for k, v in items.items():
            if k == "terms":
                cp[sec][k] = json.dumps(v)
            elif v is None:
                cp[sec][k] = "none"
            else:
                cp[sec][k] = repr(v) if isinstance(v, float) else str(v)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


# -- manifest ----------------------------------------------------------------

@dataclass
class RunManifest:
    config: dict
    versions: dict
    timestamps: dict
    outputs: dict
    run_seed: int = 0
    command: str = "solve"
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def versions():
    return {
        "qball_vortex": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def _timestamp():
    # SOURCE_DATE_EPOCH pins the manifest for reproducible builds
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = float(epoch) if epoch else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


# -- output helpers ----------------------------------------------------------

def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def dump_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def fields_csv(grid, u, a, phi):
    """Rows ``r,z,u,a,phi`` with z as the outer loop, 17 significant digits."""
    cols = [grid.R, grid.Z, u, a, phi]
    data = np.column_stack([np.asarray(c).T.ravel() for c in cols])
    lines = ["r,z,u,a,phi"]
    lines += [",".join("%.17g" % v for v in row) for row in data]
    return "\n".join(lines) + "\n"


def read_fields_csv(path, grid):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape != (grid.n_r * grid.n_z, 5):
        raise ConfigurationError(f"{path}: expected {grid.n_r * grid.n_z} rows of 5 columns")
    out = [data[:, k].reshape(grid.n_z, grid.n_r).T for k in range(5)]
    if not (np.allclose(out[0], grid.R) and np.allclose(out[1], grid.Z)):
        raise ConfigurationError(f"{path}: node coordinates do not match the configured grid")
    return out[2], out[3], out[4]


# -- commands ----------------------------------------------------------------

def make_seed(rc, grid):
    cfg, model = rc.solver, rc.model
    if rc.seed_lambda is not None and rc.seed_eps is not None:
        return seed_field(grid, rc.seed_eps, rc.seed_lambda), {"eps": rc.seed_eps, "lam": rc.seed_lambda}
    sp_ = choose_seed_params(cfg.sigma, model.m, cfg.q, cfg.l, model.tau, model.D)
    if not sp_.feasible:
        raise ConfigurationError(f"seed recipe infeasible: {sp_.violated}")
    return seed_field(grid, sp_.eps, sp_.lam), {"eps": sp_.eps, "lam": sp_.lam}


def solve_summary(sol):
    cfg = sol.config
    rep = pohozaev_report(sol)
    cert = certificate_for(sol)
    return {
        "sigma": cfg.sigma,
        "q": cfg.q,
        "l": cfg.l,
        "mode": cfg.mode,
        "omega": sol.omega,
        "mu": sol.mu,
        "effective_mass": sol.effective_mass,
        "energy": sol.breakdown.as_dict(),
        "charge_Q": sol.scalars["Q"],
        "angular_momentum_Mm": sol.scalars["M_m"],
        "identity_residuals": rep.residuals(),
        "identity_residuals_whole_space": rep.whole_space,
        "identity_residuals_literal": rep.literal,
        "field_equation_residuals": sol.residuals,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "grad_norm": sol.grad_norm,
        "max_abs_a": float(np.max(np.abs(sol.a))),
        "max_q_phi": float(cfg.q * np.max(sol.phi_hat)) if cfg.q > 0 else 0.0,
        "descent_monotone": sol.trace.monotone(),
        "bounds": bounds_report(sol),
        "certificate": {"applies": cert.applies, "branch": cert.branch,
                        "witness": cert.positivity_witness, "certified": cert.certified},
    }


def run_solve(rc):
    grid = rc.solver.grid()
    u0, seed_info = make_seed(rc, grid)
    sol = minimize(rc.solver, rc.model, u0, None, grid)
    summary = solve_summary(sol)
    summary["seed"] = seed_info
    return sol, summary


def cmd_solve(rc, out_dir=None):
    out = out_dir or rc.output_dir
    sol, summary = run_solve(rc)
    paths = {k: os.path.join(out, f) for k, f in
             (("fields", "fields.csv"), ("summary", "summary.json"), ("manifest", "manifest.json"))}
    _atomic_write(paths["fields"], fields_csv(sol.grid, sol.u, sol.a, sol.phi))
    _atomic_write(paths["summary"], dump_json(summary))
    manifest = RunManifest(rc.snapshot(), versions(), {"created": _timestamp()}, paths,
                           rc.run_seed, "solve")
    _atomic_write(paths["manifest"], manifest.to_json() + "\n")
    return summary


def cmd_verify_seed(rc):
    cfg, model = rc.solver, rc.model
    args = (cfg.sigma, model.m, cfg.q, cfg.l, model.tau)
    seed = choose_seed_params(*args, model.D)
    report = {
        "feasible": seed.feasible,
        "seed": seed.as_dict(),
        "D0_estimate": estimate_D0(*args),
        "scale_target": 6.0 * cfg.sigma / (model.m * np.pi**2),
        "int_vtau": torus_moment(model.tau),
    }
    if seed.feasible:
        report["scale_relation"] = seed.scale_relation
        lem = verify_lemma17(seed, cfg.sigma, cfg.q, cfg.l, model)
        report.update({"E_value": lem.E_value, "bound_m_sigma": lem.bound, "ok": lem.ok,
                       "margin": lem.margin, "chain": lem.chain, "numeric": lem.numeric})
    else:
        report["violated"] = seed.violated
    return report


def cmd_check_potential(rc, samples=4096, s_max=None):
    return verify_hypotheses(rc.model, s_max=s_max, samples=samples).as_dict()


def cmd_identities(rc, csv_path):
    cfg, model = rc.solver, rc.model
    grid = cfg.grid()
    u, a, _phi = read_fields_csv(csv_path, grid)
    fn = ReducedEnergy(grid, cfg.sigma, cfg.q, cfg.l, model, cfg.cg())
    st = fn.state(u, a)
    rep = identity_report(grid, u, a, st.phi_hat, st.omega, cfg.q, cfg.l, model, st.breakdown.E_hat)
    return {"omega": st.omega, "energy": st.breakdown.as_dict(),
            "identity_residuals": rep.residuals(),
            "identity_residuals_whole_space": rep.whole_space,
            "identity_residuals_literal": rep.literal,
            "tables": rep.tables}


def _with_param(rc, name, value):
    snap = rc.snapshot()
    if name == "grid":
        n_r, n_z = (int(v) for v in str(value).lower().split("x"))
        snap["grid"]["n_r"], snap["grid"]["n_z"] = n_r, n_z
    elif name == "D":
        snap["potential"]["D"] = float(value)
    elif name == "l":
        snap["solver"]["l"] = int(value)
    else:
        snap["solver"][name] = float(value)
    return parse_config_text(config_text(snap))


SWEEP_COLUMNS = ("value", "converged", "iterations", "omega", "E_total", "mu", "charge_Q",
                 "angular_momentum_Mm", "max_abs_a", "max_q_phi", "res_v3", "res_ne4",
                 "res_ne5", "res_ne7", "error")


def cmd_sweep(rc, param, values, out_dir=None):
    if param not in SWEEP_PARAMS:
        raise ConfigurationError(f"unknown sweep parameter {param!r}; choose from {SWEEP_PARAMS}")
    out = out_dir or rc.output_dir
    rows = []
    for k, value in enumerate(values):
        row = {"value": value}
        try:
            _, s = run_solve(_with_param(rc, param, value))
            row.update({key: s[key] for key in ("converged", "iterations", "omega", "mu", "charge_Q",
                                                 "angular_momentum_Mm", "max_abs_a", "max_q_phi")})
            row["E_total"] = s["energy"]["E_total"]
            for name in ("v3", "ne4", "ne5", "ne7"):
                row["res_" + name] = s["identity_residuals"][name]
            row["error"] = ""
        except QBallError as exc:
            row["error"] = str(exc)
        _atomic_write(os.path.join(out, f"row_{k:03d}.json"), dump_json(row))
        rows.append(row)
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        cells = []
        for c in SWEEP_COLUMNS:
            v = row.get(c)
            if v is None:
                cells.append("")
            elif isinstance(v, (float, np.floating)):
                cells.append("%.17g" % v)
            else:
                cells.append(str(v).replace(",", ";"))
        lines.append(",".join(cells))
    _atomic_write(os.path.join(out, f"sweep_{param}.csv"), "\n".join(lines) + "\n")
    return rows


# -- entry point -------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="qball-vortex", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="minimize the reduced energy and write fields, summary, manifest")
    s.add_argument("config")
    s.add_argument("--out", help="override [run] output_dir")
    s = sub.add_parser("verify-seed", help="torus seed parameters, D0 estimate and E vs m*sigma")
    s.add_argument("config")
    s = sub.add_parser("check-potential", help="sampled checks of the W1-W4 hypotheses")
    s.add_argument("config")
    s.add_argument("--samples", type=int, default=4096)
    s.add_argument("--s-max", type=float, default=None)
    s = sub.add_parser("identities", help="re-evaluate identity residuals on a saved field CSV")
    s.add_argument("config")
    s.add_argument("fields")
    s = sub.add_parser("sweep", help="one solve per parameter value, tabulated")
    s.add_argument("config")
    s.add_argument("--param", required=True)
    s.add_argument("--values", required=True, help="comma separated; grid values look like 64x128")
    s.add_argument("--out", help="override [run] output_dir")
    return p


def _fail(kind, exc, code):
    info = {"error": kind, "reason": str(exc)}
    if isinstance(exc, SolverError):
        info["info"] = {k: v for k, v in exc.info.items() if k != "trace"}
    sys.stderr.write(dump_json(info))
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        rc = load_config(args.config)
        if args.command == "solve":
            result = cmd_solve(rc, args.out)
        elif args.command == "verify-seed":
            result = cmd_verify_seed(rc)
        elif args.command == "check-potential":
            result = cmd_check_potential(rc, args.samples, args.s_max)
        elif args.command == "identities":
            result = cmd_identities(rc, args.fields)
        else:
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            if args.param != "grid":
                values = [float(v) for v in values]
            result = cmd_sweep(rc, args.param, values, args.out)
            result = {"rows": result}
    except ConfigurationError as exc:
        return _fail("configuration", exc, 2)
    except (SolverError, QBallError) as exc:
        return _fail("solver", exc, 3)
    sys.stdout.write(dump_json(result))
    if args.command == "check-potential" and not (result["W1_ok"] and result["W2_ok"] and result["W3_ok"]):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
