"""Config-driven batch front end.

Usage::

    phigeom <command> --config run.json [--theta 0.1,0.2 ...] [--alpha 0.5 ...]
                      [--h STEP] [--format json|csv] [--output FILE]

Commands: validate-phi, divergence, metric, christoffel, curvature,
geodesic, transport, natgrad, check-all.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 failed invariant battery (or failed phi validation).

The ``divergence`` command reports ``D(p || q)`` with ``p`` first, the
usual reading order; the geometry internally differentiates the swapped
contrast ``D(q || p)``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import checks, geometry as geo, transport as tr
from .divergence import divergence_gradient, phi_divergence
from .errors import DegenerateDirectionError, DensityError, PhiGeomError
from .phi_core import PhiFunction, validate_phi
from .phi_family import PhiFamily
from .sample_space import FiniteSpace, load_density

SCHEMA_VERSION = 1
COMMANDS = ("validate-phi", "divergence", "metric", "christoffel", "curvature",
            "geodesic", "transport", "natgrad", "check-all")

_SCHEMA = {
    "schema": None,
    "space": {"size", "weights"},
    "phi": {"kind", "kappa"},
    "family": {"center", "u0", "directions"},
    "theta": None,
    "alpha": None,
    "h": None,
    "seed": None,
    "output": None,
    "format": None,
    "validate": {"grid", "tol"},
    "divergence": {"p", "q"},
    "geodesic": {"theta0", "v0", "alpha", "t_end", "steps"},
    "transport": {"from", "to", "vector", "alpha", "substeps"},
    "natgrad": {"target", "theta0", "rate", "max_steps", "tol"},
    "check": {"points", "spread", "pairs"},
}


class ConfigError(Exception):
    pass


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"config must declare \"schema\": {SCHEMA_VERSION}")
    for key, value in cfg.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        allowed = _SCHEMA[key]
        if allowed is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"{key!r} must be an object")
            extra = set(value) - allowed
            if extra:
                raise ConfigError(f"unknown keys in {key!r}: {sorted(extra)}")
    cfg["_dir"] = str(path.parent)
    return cfg


def _resolve_source(cfg, src):
    """A density source is an inline list or {"csv": path} relative to the config."""
    if isinstance(src, dict):
        if set(src) != {"csv"}:
            raise ConfigError("density source objects take exactly one key, 'csv'")
        p = Path(src["csv"])
        if not p.is_absolute():
            p = Path(cfg["_dir"]) / p
        if not p.is_file():
            raise ConfigError(f"density file {p} not found")
        return str(p)
    if not isinstance(src, list):
        raise ConfigError("density must be a list of numbers or {\"csv\": path}")
    return src


def build_space(cfg):
    sc = cfg.get("space")
    if sc is None:
        raise ConfigError("config needs a 'space' section")
    if "weights" in sc:
        space = FiniteSpace(sc["weights"])
        if "size" in sc and sc["size"] != space.size:
            raise ConfigError("space.size disagrees with len(space.weights)")
        return space
    if "size" not in sc:
        raise ConfigError("space needs 'size' or 'weights'")
    return FiniteSpace.counting(sc["size"])


def build_phi(cfg):
    if "phi" not in cfg:
        raise ConfigError("config needs a 'phi' section")
    try:
        return PhiFunction.from_config(cfg["phi"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_family(cfg):
    space, phi = build_space(cfg), build_phi(cfg)
    fc = cfg.get("family")
    if fc is None:
        raise ConfigError("config needs a 'family' section")
    for key in ("center", "directions"):
        if key not in fc:
            raise ConfigError(f"family needs {key!r}")
    center = load_density(space, _resolve_source(cfg, fc["center"]))
    return PhiFamily.build(phi, center, fc["directions"], fc.get("u0"))


def _thetas(args, cfg, dim):
    if args.theta:
        raw = [[float(x) for x in t.split(",")] for t in args.theta]
    elif "theta" in cfg:
        raw = cfg["theta"]
        if raw and not isinstance(raw[0], list):
            raw = [raw]
    else:
        raw = [[0.0] * dim]
    out = [np.asarray(t, dtype=float) for t in raw]
    for t in out:
        if t.shape != (dim,):
            raise ConfigError(f"theta {t.tolist()} must have {dim} components")
    return out


def _alphas(args, cfg, default):
    if args.alpha:
        return [float(a) for a in args.alpha]
    a = cfg.get("alpha", default)
    return [float(x) for x in (a if isinstance(a, list) else [a])]


def _section(cfg, name):
    if name not in cfg:
        raise ConfigError(f"command needs a {name!r} section in the config")
    return cfg[name]


def _require(sec, key, name):
    if key not in sec:
        raise ConfigError(f"{name}.{key} is required")
    return sec[key]


def cmd_validate_phi(args, cfg):
    phi = build_phi(cfg)
    sec = cfg.get("validate", {})
    grid = sec.get("grid", list(np.linspace(-10.0, 10.0, 41)))
    report = validate_phi(phi, grid, float(sec.get("tol", 1e-12)))
    return report.to_dict(), (0 if report.passed else 3)


def cmd_divergence(args, cfg):
    space, phi = build_space(cfg), build_phi(cfg)
    sec = _section(cfg, "divergence")
    p = load_density(space, _resolve_source(cfg, _require(sec, "p", "divergence")))
    q = load_density(space, _resolve_source(cfg, _require(sec, "q", "divergence")))
    fc = cfg.get("family", {})
    u0 = fc.get("u0")
    value = phi_divergence(phi, u0, p, q)
    return {"value": value, "phi": phi.to_config(), "u0_kind": "ones" if u0 is None else "custom",
            "order": "D(p||q)"}, 0


def cmd_metric(args, cfg):
    fam = build_family(cfg)
    results = [geo.metric(fam.point_at(t)).to_dict() for t in _thetas(args, cfg, fam.dim)]
    return {"phi": fam.phi.to_config(), "results": results}, 0


def cmd_christoffel(args, cfg):
    fam = build_family(cfg)
    results = []
    for t in _thetas(args, cfg, fam.dim):
        pt = fam.point_at(t)
        p1, m1 = geo.christoffel_pm1(pt)
        entry = {"theta": t.tolist(), "indices": "(i,j,k)", "plus1": p1.gamma.tolist(),
                 "minus1": m1.gamma.tolist(), "skewness": geo.skewness(pt).tolist(),
                 "alpha": [geo.christoffel_alpha(pt, a).to_dict() for a in _alphas(args, cfg, [0.0])]}
        results.append(entry)
    return {"phi": fam.phi.to_config(), "results": results}, 0


def cmd_curvature(args, cfg):
    fam = build_family(cfg)
    h = args.h if args.h is not None else cfg.get("h")
    results = []
    for t in _thetas(args, cfg, fam.dim):
        for a in _alphas(args, cfg, [1.0]):
            R = geo.riemann_curvature(fam, t, a, h)
            results.append({"theta": t.tolist(), "alpha": a, "indices": "(l,k,i,j)", "riemann": R.tolist(),
                            "max_abs": float(np.max(np.abs(R)))})
    return {"phi": fam.phi.to_config(), "results": results}, 0


def cmd_geodesic(args, cfg):
    fam = build_family(cfg)
    sec = _section(cfg, "geodesic")
    alpha = float(args.alpha[0]) if args.alpha else float(sec.get("alpha", 0.0))
    times, thetas, vels = geo.geodesic(fam, _require(sec, "theta0", "geodesic"), _require(sec, "v0", "geodesic"),
                                       alpha, float(sec.get("t_end", 1.0)), int(sec.get("steps", 100)))
    rows = [[float(t)] + th.tolist() + v.tolist() for t, th, v in zip(times, thetas, vels)]
    n = fam.dim
    header = ["t"] + [f"theta_{i}" for i in range(n)] + [f"v_{i}" for i in range(n)]
    return {"alpha": alpha, "columns": header, "rows": rows}, 0


def cmd_transport(args, cfg):
    fam = build_family(cfg)
    sec = _section(cfg, "transport")
    start = np.asarray(_require(sec, "from", "transport"), dtype=float)
    end = np.asarray(_require(sec, "to", "transport"), dtype=float)
    v0 = np.asarray(_require(sec, "vector", "transport"), dtype=float)
    alpha = float(args.alpha[0]) if args.alpha else float(sec.get("alpha", 1.0))
    substeps = int(sec.get("substeps", tr.DEFAULT_SUBSTEPS))
    curve = np.array([start, end])
    p0, p1 = fam.point_at(start), fam.point_at(end)
    v_ode = tr.transport_ode(fam, curve, alpha, v0, substeps)
    w_ode = tr.transport_ode(fam, curve, -alpha, v0, substeps)
    out = {
        "alpha": alpha,
        "from": start.tolist(),
        "to": end.tolist(),
        "before": v0.tolist(),
        "after": v_ode[-1].tolist(),
        "diagnostics": {
            "norm_before": tr.inner(p0, v0, v0),
            "norm_after": tr.inner(p1, v_ode[-1], v_ode[-1]),
            "dual_pairing_before": tr.inner(p0, v0, v0),
            "dual_pairing_after": tr.inner(p1, v_ode[-1], w_ode[-1]),
        },
    }
    if alpha == 1.0:
        closed = tr.transport_1(fam, p0, p1, tr.coords_to_function(p0, v0))
        comps, residual = tr.function_to_coords(p1, closed)
        out["closed_form"] = {"function": closed.values.tolist(), "components": comps.tolist(),
                              "span_residual": residual,
                              "ode_gap": float(np.max(np.abs(comps - v_ode[-1])))}
    return out, 0


def cmd_natgrad(args, cfg):
    fam = build_family(cfg)
    sec = _section(cfg, "natgrad")
    target = load_density(fam.space, _resolve_source(cfg, _require(sec, "target", "natgrad")))
    theta0 = sec.get("theta0", [0.0] * fam.dim)
    theta, path = geo.natural_gradient_descent(
        fam, lambda th: divergence_gradient(fam, target, th), theta0,
        rate=float(sec.get("rate", 1.0)), max_steps=int(sec.get("max_steps", 200)), tol=float(sec.get("tol", 1e-12)))
    value = phi_divergence(fam.phi, fam.u0, target, fam.point_at(theta).density)
    return {"theta": theta.tolist(), "steps": len(path) - 1, "objective": value,
            "path": [p.tolist() for p in path]}, 0


def cmd_check_all(args, cfg):
    fam = build_family(cfg)
    sec = cfg.get("check", {})
    seed = int(cfg.get("seed", 0))
    results = checks.run_battery(fam, seed=seed, n_points=int(sec.get("points", 3)),
                                 spread=float(sec.get("spread", 0.5)), n_pairs=int(sec.get("pairs", 1000)))
    print(checks.format_table(results), file=sys.stderr)
    ok = all(r.passed for r in results)
    return {"seed": seed, "passed": ok, "checks": [r.to_dict() for r in results]}, (0 if ok else 3)


HANDLERS = {
    "validate-phi": cmd_validate_phi,
    "divergence": cmd_divergence,
    "metric": cmd_metric,
    "christoffel": cmd_christoffel,
    "curvature": cmd_curvature,
    "geodesic": cmd_geodesic,
    "transport": cmd_transport,
    "natgrad": cmd_natgrad,
    "check-all": cmd_check_all,
}


def _to_csv(payload):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "rows" in payload:
        writer.writerow(payload["columns"])
        writer.writerows(payload["rows"])
    elif "path" in payload:
        writer.writerow(["step"] + [f"theta_{i}" for i in range(len(payload["theta"]))])
        writer.writerows([[k] + p for k, p in enumerate(payload["path"])])
    else:
        raise ConfigError("csv output is only available for geodesic and natgrad")
    return buf.getvalue()


def build_parser():
    parser = argparse.ArgumentParser(prog="phigeom", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--theta", action="append", help="comma separated parameter vector; repeatable")
    parser.add_argument("--alpha", action="append", type=float)
    parser.add_argument("--h", type=float)
    parser.add_argument("--format", choices=("json", "csv"))
    parser.add_argument("--output")
    return parser


def run(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        fmt = args.format or cfg.get("format", "json")
        payload, code = HANDLERS[args.command](args, cfg)
        text = _to_csv(payload) if fmt == "csv" else _dumps(payload)
    except PhiGeomError as exc:
        if not isinstance(exc, (DensityError, DegenerateDirectionError)):
            return _numerical_failure(exc, stdout)
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    target = args.output or cfg.get("output")
    if target:
        Path(target).write_text(text)
    else:
        stdout.write(text)
    return code


def _numerical_failure(exc, stdout):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("u", "spectrum", "last_t", "location"):
        if hasattr(exc, attr):
            val = getattr(exc, attr)
            payload[attr] = np.asarray(val).tolist()
    stdout.write(_dumps(payload))
    return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
