"""Command-line front door: reproducible experiments with JSON/CSV/SVG output.

Every subcommand takes its parameters either as ``--key value`` flags or
from a flat ``key = value`` config file (``--config``); flags override the
file. Values are Python literals (``2``, ``1e-3``, ``"inf"``, ``[0.1, 1]``).
The output directory is ``--out`` unless ``LIOUVILLE_LAB_OUT`` is set.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 precondition
violation. Errors are reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import ast
import csv
import glob
import json
import math
import os
import sys
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from . import _io
from . import classification as C
from . import doubling as D
from . import elliptic_radial as ER
from . import estimates as ES
from . import expr as E
from . import ode_blowup as OB
from . import parabolic_fd as PF
from ._svg import line_plot
from .errors import ConfigError, LabError, PreconditionError
from .nonlinearity import build_example, parse_nonlinearity

OUT_ENV = "LIOUVILLE_LAB_OUT"

_FUNC_KEYS = {"f": None, "catalog": None, "catalog_params": {}}

SCHEMAS: dict[str, dict] = {
    "classify": {**_FUNC_KEYS, "at": "inf", "check": "variation", "deep": False,
                 "n": 3, "tol": 0.02},
    "blowup": {**_FUNC_KEYS, "y0": 1.0, "decades": 8.0, "count": 161},
    "shoot": {**_FUNC_KEYS, "n": 3, "v0": [0.1, 1.0, 10.0], "r_max": 1e3},
    "simulate": {"f": None, "geometry": "interval", "a": 0.0, "b": 1.0, "dim": 1,
                 "bc": "dirichlet", "u0": "20*sin(pi*s)", "grid": 256, "safety": 0.9,
                 "safety_f": 0.03, "cap": 1e12, "horizon": 10.0, "snapshot_times": []},
    "verify-estimate": {"source": "snapshots", "input": None, "f": None,
                        "functional": "both", "p": 4.0, "n": 3, "count": 201},
    "doubling-demo": {"dist": None, "weights": None, "gamma": [], "k": 1.0, "y": 0,
                      "seed": 0, "instances": 1000, "n_max": 200},
    "sweep": {"family": None, "param": "a", "n": 3, "lo": 0.0, "hi": 4.0,
              "v0": [0.1, 1.0, 10.0], "r_max": 1e3, "iters": 10},
    "report": {"input": None},
}
REQUIRED = {"simulate": ("f",), "verify-estimate": (), "sweep": ("family",),
            "report": ("input",)}


# --------------------------------------------------------------------------
# configuration

@dataclass
class ExperimentConfig:
    """A subcommand with fully resolved parameters and an output directory."""

    subcommand: str
    params: dict = field(default_factory=dict)
    out: str = "out"

    def to_text(self) -> str:
        """Canonical flat text: one ``key = literal`` per line, keys sorted."""
        lines = [f"subcommand = {self.subcommand!r}", f"out = {self.out!r}"]
        lines += [f"{k} = {self.params[k]!r}" for k in sorted(self.params)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        raw = parse_config_text(text)
        if "subcommand" not in raw:
            raise ConfigError("config has no 'subcommand'")
        sub = raw.pop("subcommand")
        out = raw.pop("out", "out")
        return cls(sub, resolve_params(sub, raw), out)

    def hash(self) -> str:
        """Hash of everything except the output location."""
        body = [f"subcommand = {self.subcommand!r}"]
        body += [f"{k} = {self.params[k]!r}" for k in sorted(self.params)]
        return _io.config_hash("\n".join(body))


def parse_config_text(text: str) -> dict:
    out = {}
    for i, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {i}: expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        if key in out:
            raise ConfigError(f"line {i}: duplicate key {key!r}")
        try:
            out[key] = ast.literal_eval(val)
        except (ValueError, SyntaxError):
            raise ConfigError(f"line {i}: value for {key!r} is not a literal: {val!r}") from None
    return out


def _coerce(key, value, default):
    if default is None or value is None:
        return value
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
    elif isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif isinstance(default, list):
        if isinstance(value, (list, tuple)):
            return list(value)
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return [value]
    elif isinstance(value, type(default)):
        return value
    elif isinstance(default, str) and isinstance(value, (int, float)) and not isinstance(value, bool):
        return str(value)
    raise ConfigError(f"{key!r} expects {type(default).__name__}, got {value!r}")


def resolve_params(sub: str, raw: dict) -> dict:
    if sub not in SCHEMAS:
        raise ConfigError(f"unknown subcommand {sub!r}")
    schema = SCHEMAS[sub]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) for {sub}: {', '.join(unknown)}")
    params = {k: _coerce(k, raw.get(k, d), d) for k, d in schema.items()}
    for k in REQUIRED.get(sub, ()):
        if params[k] is None:
            raise ConfigError(f"{sub} needs {k!r}")
    return params


def _flag_value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _function(params: dict):
    if params.get("catalog"):
        if params.get("f"):
            raise ConfigError("give either 'f' or 'catalog', not both")
        return build_example(params["catalog"], **params.get("catalog_params", {}))
    if not params.get("f"):
        raise ConfigError("missing nonlinearity: set 'f' or 'catalog'")
    return parse_nonlinearity(params["f"])


# --------------------------------------------------------------------------
# subcommands

class _Writer:
    def __init__(self, cfg: ExperimentConfig):
        self.dir = _io.ensure_dir(cfg.out)
        self.hash = cfg.hash()
        self.files: list[str] = []
        with open(os.path.join(self.dir, "config.txt"), "w") as fh:
            fh.write(cfg.to_text())

    def path(self, name):
        return os.path.join(self.dir, name)

    def json(self, name, obj):
        self.files.append(name)
        return _io.write_json(self.path(name), obj, self.hash)

    def csv(self, name, header, rows):
        self.files.append(name)
        return _io.write_csv(self.path(name), header, rows, self.hash)

    def svg(self, name, text):
        self.files.append(name)
        with open(self.path(name), "w") as fh:
            fh.write(text)


def cmd_classify(p: dict, w: _Writer) -> dict:
    f = _function(p)
    if p["at"] not in ("inf", "0"):
        raise ConfigError("'at' must be 'inf' or '0'")
    check = p["check"]
    if check == "variation":
        rep = C.classify(f, p["at"], deep=p["deep"]).to_dict()
    elif check == "regular":
        rep = C.estimate_rv_index(f, p["at"], tol=p["tol"], deep=p["deep"]).to_dict()
    elif check == "controlled":
        rep = C.controlled_variation_inf(f).to_dict()
    elif check == "hypotheses":
        rep = C.liouville_hypothesis_check(f, p["n"]).to_dict()
    else:
        raise ConfigError("'check' must be variation, regular, controlled or hypotheses")
    w.json("classify.json", rep)
    return {"verdict": rep["verdict"]}


def cmd_blowup(p: dict, w: _Writer) -> dict:
    f = _function(p)
    rc = OB.verify_rate(f, p["y0"], decades=p["decades"], count=p["count"])
    prof = rc.profile
    order = np.argsort(prof.t)
    w.csv("blowup.csv", ["t", "y", "rho", "T_minus_t"],
          [(prof.t[i], prof.y[i], prof.rho[i], prof.tau[i]) for i in order])
    summary = {"function": str(f), "y0": p["y0"], "T": prof.T, "rho_min": rc.rho_min,
               "rho_max": rc.rho_max, "passed": rc.passed}
    w.json("blowup.json", summary)
    w.svg("rate.svg", line_plot([(prof.tau, prof.rho, "rho")], title=f"rate for {f}",
                                xlabel="T - t", ylabel="(f(y)/y)(T - t)", xlog=True))
    return {"T": prof.T}


def cmd_shoot(p: dict, w: _Writer) -> dict:
    f = _function(p)
    shots, series = [], []
    for i, v0 in enumerate(p["v0"]):
        res = ER.shoot(f, p["n"], float(v0), p["r_max"])
        name = f"shoot_{i:03d}.csv"
        w.csv(name, ["r", "v", "dv"], list(zip(res.r, res.v, res.dv)))
        shots.append({**res.summary(), "trace": name})
        series.append((res.r, res.v, f"v0={float(v0):g}"))
    ok = any(s["outcome"] == ER.POSITIVE_GLOBAL for s in shots)
    w.json("search.json", {"function": str(f), "n": p["n"], "r_max": p["r_max"],
                           "shots": shots, "existence_corroborated": ok})
    w.svg("shoot.svg", line_plot(series, title=f"radial shots for {f}", xlabel="r",
                                 ylabel="v", xlog=True, ylog=True))
    return {"outcomes": [s["outcome"] for s in shots]}


def cmd_simulate(p: dict, w: _Writer) -> dict:
    f = parse_nonlinearity(p["f"])
    kind = p["geometry"]
    if kind == "interval":
        geom = PF.Geometry.interval(p["a"], p["b"])
    elif kind == "ball":
        geom = PF.Geometry.ball(p["dim"], p["b"])
    elif kind == "line":
        geom = PF.Geometry.line(p["a"], p["b"])
    else:
        raise ConfigError("'geometry' must be interval, ball or line")
    if not (isinstance(p["grid"], int) and p["grid"] >= 4):
        raise ConfigError("'grid' is the number of cells, an integer >= 4")
    h = (geom.b - geom.a) / p["grid"]
    u0 = E.parse(p["u0"], {"pi": math.pi})
    opts = PF.SimOptions(h=h, safety=p["safety"], safety_f=p["safety_f"], cap=p["cap"],
                         horizon=p["horizon"],
                         snapshot_times=tuple(float(t) for t in p["snapshot_times"]))
    traj = PF.simulate(f, geom, p["bc"], lambda x: np.maximum(u0.value(x), 0.0), opts)
    summary = {"function": str(f), "termination": traj.termination, "steps": traj.steps}
    rows = list(zip(traj.t_hist, traj.M_hist))
    if traj.termination == PF.BLOW_UP:
        T_hat, unc = PF.estimate_blowup_time(traj, f)
        rep = PF.rate_report(traj, f, T_hat, unc)
        summary.update(T_hat=T_hat, T_uncertainty=unc,
                       rate={k: rep[k] for k in ("sup", "inf", "sup_last_decade",
                                                 "inf_last_decade", "window")})
        w.csv("rate.csv", ["t", "rho"], list(zip(rep["t"], rep["rho"])))
        w.svg("rate.svg", line_plot([(T_hat - rep["t"], rep["rho"], "rho")],
                                    title="parabolic blow-up rate", xlabel="T - t",
                                    ylabel="(f(M)/M)(T - t)", xlog=True))
    snapdir = os.path.join(w.dir, "snapshots")
    traj.write_snapshots(snapdir)
    man_path = os.path.join(snapdir, "manifest.json")
    with open(man_path) as fh:
        man = json.load(fh)
    _io.write_json(man_path, man, w.hash)
    for name in man["files"]:
        _io.stamp_csv(os.path.join(snapdir, name), w.hash)
    w.csv("history.csv", ["t", "M"], rows)
    w.json("simulate.json", summary)
    return {"termination": traj.termination, "T_hat": summary.get("T_hat")}


def _float(v: str) -> float:
    try:
        return float(v)
    except ValueError:
        return math.nan


def _read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], np.array([[_float(v) for v in r] for r in rows[1:]])


def load_trajectory(snapdir: str) -> SimpleNamespace:
    """Rebuild the parts of a trajectory that the estimate functionals use."""
    path = os.path.join(snapdir, "manifest.json")
    if not os.path.exists(path):
        raise ConfigError(f"no manifest.json in {snapdir!r}")
    with open(path) as fh:
        man = json.load(fh)
    snaps, x = [], None
    for name in man["files"]:
        _, data = _read_csv(os.path.join(snapdir, name))
        x = data[:, 0]
        snaps.append(data[:, 1])
    g = man["geometry"]
    return SimpleNamespace(x=x, snaps=snaps, snap_times=man["times"], manifest=man,
                           geometry=PF.Geometry(g["kind"], g["a"], g["b"], g["n"]))


def cmd_verify_estimate(p: dict, w: _Writer) -> dict:
    if p["source"] == "singular":
        sol = ER.singular_steady_state(p["p"], p["n"])
        r = np.linspace(0.5 / p["count"], 0.5, p["count"])
        f = parse_nonlinearity(f"pow(s,{p['p']!r})")
        model = ES.DistanceModel("elliptic", ES.Domain("punctured_ball", 0.0, 1.0))
        rep = ES.interior_constant(sol(r), r, f, model, "homogeneous", family="singular")
        vals = sol(r) ** (p["p"] - 1) * r ** 2
        out = {"reports": [rep.to_dict()], "expected": sol.beta * (p["n"] - 2 - sol.beta),
               "min": float(vals.min()), "max": float(vals.max())}
    elif p["source"] == "snapshots":
        if not p["input"] or not p["f"]:
            raise ConfigError("snapshot source needs 'input' and 'f'")
        traj = load_trajectory(p["input"])
        f = parse_nonlinearity(p["f"])
        T_hat = traj.manifest.get("T_hat")
        if T_hat is None:
            raise PreconditionError("manifest has no blow-up time estimate")
        reps = []
        if p["functional"] in ("interior", "both"):
            reps.append(ES.snapshot_interior_constant(traj, f, T_hat).to_dict())
        if p["functional"] in ("temporal", "both"):
            reps.append(ES.temporal_constant(traj, f, T_hat).to_dict())
        if not reps:
            raise ConfigError("'functional' must be interior, temporal or both")
        out = {"reports": reps, "T_hat": T_hat}
    else:
        raise ConfigError("'source' must be snapshots or singular")
    w.json("estimate.json", out)
    return {"sup": [r["sup"] for r in out["reports"]]}


def cmd_doubling_demo(p: dict, w: _Writer) -> dict:
    rows = []
    if p["dist"]:
        with open(p["dist"]) as fh:
            dist = np.array([[float(v) for v in r] for r in csv.reader(
                ln for ln in fh if ln.strip() and not ln.startswith("#"))])
        n = dist.shape[0]
        M = np.asarray(p["weights"] if p["weights"] is not None else np.ones(n), dtype=float)
        if M.shape != (n,):
            raise ConfigError(f"'weights' must have {n} entries")
        sigma = frozenset(range(n))
        space = D.FiniteMetricSpace(dist, sigma, sigma - frozenset(p["gamma"]))
        res = D.doubling_select(space, M, p["k"], p["y"])
        concl = D.verify_conclusions(space, M, p["k"], p["y"], res.x)
        out = {"x": res.x, "trace": list(res.trace), "iterations": res.iterations,
               "bound": res.bound, "conclusions": concl}
    else:
        rng = np.random.default_rng(p["seed"])
        held = failures = 0
        worst = 0
        for i in range(p["instances"]):
            space, M, k, y = D.random_instance(rng, p["n_max"])
            try:
                res = D.doubling_select(space, M, k, y)
            except PreconditionError:
                rows.append((i, space.n_points, 0, "", "", ""))
                continue
            held += 1
            c = D.verify_conclusions(space, M, k, y, res.x)
            failures += not all(c.values())
            worst = max(worst, res.iterations - res.bound)
            rows.append((i, space.n_points, 1, res.iterations, res.bound, int(all(c.values()))))
        out = {"instances": p["instances"], "precondition_held": held,
               "conclusion_failures": failures, "max_iterations_minus_bound": worst}
        w.csv("doubling.csv", ["instance", "points", "precondition", "iterations", "bound",
                               "conclusions_hold"], rows)
    w.json("doubling.json", out)
    return out


def cmd_sweep(p: dict, w: _Writer) -> dict:
    name = p["param"]
    evals = {}

    def oracle(a):
        if a not in evals:
            f = parse_nonlinearity(p["family"], {name: a})
            s = ER.entire_solution_search(f, p["n"], p["v0"], p["r_max"])
            evals[a] = s.existence_corroborated
        return evals[a]

    lo, hi = p["lo"], p["hi"]
    if not lo < hi:
        raise ConfigError("need lo < hi")
    o_lo, o_hi = oracle(lo), oracle(hi)
    if o_lo == o_hi:
        status, interval = "no_transition", None
    else:
        for _ in range(p["iters"]):
            mid = 0.5 * (lo + hi)
            if oracle(mid) == o_lo:
                lo = mid
            else:
                hi = mid
        status, interval = "transition", [lo, hi]
    rows = [(a, int(evals[a])) for a in sorted(evals)]
    w.csv("sweep.csv", [name, "positive_global"], rows)
    out = {"family": p["family"], "param": name, "n": p["n"], "status": status,
           "interval": interval, "positive_at_lo": o_lo, "positive_at_hi": o_hi,
           "evaluations": len(rows)}
    w.json("sweep.json", out)
    return {"status": status, "interval": interval}


def cmd_report(p: dict, w: _Writer) -> dict:
    src = p["input"]
    if not os.path.isdir(src):
        raise ConfigError(f"not a directory: {src!r}")
    bundle, series = {}, []
    for path in sorted(glob.glob(os.path.join(src, "**", "*.json"), recursive=True)):
        rel = os.path.relpath(path, src)
        if rel == "report.json" or os.path.abspath(os.path.dirname(path)) == os.path.abspath(w.dir):
            continue
        with open(path) as fh:
            bundle[rel] = json.load(fh)
    for path in sorted(glob.glob(os.path.join(src, "**", "*.csv"), recursive=True)):
        rel = os.path.relpath(path, src)
        if "snapshots" in rel.split(os.sep):
            continue
        header, data = _read_csv(path)
        if data.ndim == 2 and data.shape[0] and "rho" in header:
            j = header.index("rho")
            if "T_minus_t" in header:
                x = data[:, header.index("T_minus_t")]
            else:
                x = data[:, 0]
            series.append((x, data[:, j], rel))
    w.json("report.json", {"input": src, "artifacts": bundle})
    w.svg("report.svg", line_plot(series, title="rate series", xlabel="time coordinate",
                                  ylabel="rho", xlog=True))
    return {"artifacts": len(bundle)}


COMMANDS = {"classify": cmd_classify, "blowup": cmd_blowup, "shoot": cmd_shoot,
            "simulate": cmd_simulate, "verify-estimate": cmd_verify_estimate,
            "doubling-demo": cmd_doubling_demo, "sweep": cmd_sweep, "report": cmd_report}


# --------------------------------------------------------------------------
# driver

def run(cfg: ExperimentConfig) -> dict:
    """Execute one experiment; artifacts go to ``cfg.out``."""
    w = _Writer(cfg)
    result = COMMANDS[cfg.subcommand](cfg.params, w)
    return {"subcommand": cfg.subcommand, "out": cfg.out, "files": w.files, **result}


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return 2
    if isinstance(exc, PreconditionError):
        return 4
    # numerical failure, out-of-range and divergent integrals
    return 3


class _Parser(argparse.ArgumentParser):
    """Argument errors become config errors (exit 2, JSON on stderr)."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="liouville-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config")
    r.add_argument("--out")
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, help=f"{name} experiment")
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--out", help="output directory")
        for key in schema:
            sp.add_argument("--" + key.replace("_", "-"), dest=key, type=_flag_value,
                            default=argparse.SUPPRESS)
    return ap


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    args = vars(ns).copy()
    sub = args.pop("subcommand")
    out = args.pop("out", None)
    if sub == "run":
        with open(args.pop("config")) as fh:
            cfg = ExperimentConfig.from_text(fh.read())
    else:
        raw = {}
        path = args.pop("config", None)
        if path:
            with open(path) as fh:
                raw = parse_config_text(fh.read())
            file_sub = raw.pop("subcommand", sub)
            if file_sub != sub:
                raise ConfigError(f"config is for {file_sub!r}, not {sub!r}")
            out = out or raw.pop("out", None)
            raw.pop("out", None)
        raw.update(args)
        cfg = ExperimentConfig(sub, resolve_params(sub, raw), "out")
    cfg.out = os.environ.get(OUT_ENV) or out or cfg.out
    return cfg


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        result = run(cfg)
    except (LabError, ArithmeticError, OSError) as exc:
        code = 2 if isinstance(exc, OSError) else exit_code(exc)
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return code
    sys.stdout.write(_io.dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
