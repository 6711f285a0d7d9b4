"""Command line driver: ``arcscat solve|convergence|spectrum|nearfield --config cfg.json``.

Exit codes: 0 success, 1 numerical failure, 2 configuration error. Every
command writes a JSON report (``"schema": 1``) into the output directory.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bvp import IncidentField, circle_points, distance_to_arc, near_field, near_field_error, solve_bvp
from .errors import ConfluentWavenumbersError, NumericalError
from .geometry import ARC_NAMES, make_arc, make_custom_arc
from .medium import MediumParams, compute_wavenumbers
from .operators import assemble, compose, identity_operator
from .quadrature import ChebyshevGrid
from .spectrum import eigenvalues, write_eigenvalues_csv

SCHEMA_VERSION = 1
COMMANDS = ("solve", "convergence", "spectrum", "nearfield")

_MEDIUM_KEYS = ("lam", "mu", "rho", "kappa", "gamma", "eta")
_MEDIUM_ALIASES = {"lambda": "lam"}
_EXPR_NAMES = {name: getattr(np, name) for name in
               ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "pi")}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _expr_map(exprs, label):
    if not (isinstance(exprs, list) and len(exprs) == 2 and all(isinstance(e, str) for e in exprs)):
        raise ConfigError(f"custom arc {label} must be a list of two expressions in t")
    codes = [compile(e, f"<{label}>", "eval") for e in exprs]

    def fn(t):
        t = np.asarray(t, dtype=float)
        scope = dict(_EXPR_NAMES, t=t)
        return np.stack([np.broadcast_to(eval(c, {"__builtins__": {}}, scope), t.shape) for c in codes],
                        axis=-1).astype(float)

    return fn


def build_arc(arc_cfg):
    if isinstance(arc_cfg, str):
        if arc_cfg not in ARC_NAMES:
            raise ConfigError(f"unknown arc {arc_cfg!r}; expected one of {ARC_NAMES} or a custom parametrization")
        return make_arc(arc_cfg)
    if isinstance(arc_cfg, dict) and "position" in arc_cfg and "derivative" in arc_cfg:
        try:
            return make_custom_arc(_expr_map(arc_cfg["position"], "position"),
                                   _expr_map(arc_cfg["derivative"], "derivative"),
                                   name=str(arc_cfg.get("name", "custom")))
        except (SyntaxError, NameError, TypeError) as exc:
            raise ConfigError(f"invalid custom arc expression: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"invalid custom arc: {exc}") from None
    raise ConfigError("arc must be a built-in name or {'position': [..], 'derivative': [..]}")


def build_medium(cfg: dict) -> MediumParams:
    raw = dict(cfg.get("medium", {}))
    for old, new in _MEDIUM_ALIASES.items():
        if old in raw:
            raw[new] = raw.pop(old)
    unknown = set(raw) - set(_MEDIUM_KEYS)
    if unknown:
        raise ConfigError(f"unknown medium fields: {sorted(unknown)}")
    if "omega" not in cfg:
        raise ConfigError("missing required field 'omega'")
    try:
        m = MediumParams(omega=float(cfg["omega"]), **{k: float(v) for k, v in raw.items()})
        compute_wavenumbers(m)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return m


def _int_field(cfg, key, default=None, minimum=1):
    value = cfg.get(key, default)
    if value is None:
        raise ConfigError(f"missing required field {key!r}")
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {value!r}")
    return value


def _kind(cfg):
    kind = cfg.get("bc_kind")
    if kind not in (1, 2, 3, 4):
        raise ConfigError(f"bc_kind must be 1, 2, 3 or 4, got {kind!r}")
    return kind


def _variant(cfg):
    variant = cfg.get("variant", "regularized")
    if variant not in ("direct", "regularized"):
        raise ConfigError(f"variant must be 'direct' or 'regularized', got {variant!r}")
    return variant


def _gmres(cfg):
    g = cfg.get("gmres", {})
    tol = g.get("tol", 1e-10)
    if not isinstance(tol, (int, float)) or not tol > 0:
        raise ConfigError(f"gmres.tol must be positive, got {tol!r}")
    max_it = g.get("max_it")
    if max_it is not None and (not isinstance(max_it, int) or max_it < 1):
        raise ConfigError(f"gmres.max_it must be a positive integer, got {max_it!r}")
    return float(tol), max_it


def _incident(cfg):
    theta = cfg.get("incident", {}).get("theta_inc", 0.0)
    if not isinstance(theta, (int, float)) or not math.isfinite(theta):
        raise ConfigError(f"incident.theta_inc must be a finite number, got {theta!r}")
    return IncidentField(theta_inc=float(theta))


def _circle(cfg):
    c = cfg.get("circle", {})
    return circle_points(float(c.get("radius", 4.0)), int(c.get("n_points", 128)))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(cfg: dict, out: Path) -> int:
    m, arc = build_medium(cfg), build_arc(cfg.get("arc", "flat_strip"))
    kind, variant, n = _kind(cfg), _variant(cfg), _int_field(cfg, "N")
    tol, max_it = _gmres(cfg)
    grid = ChebyshevGrid(n)
    density, report = solve_bvp(kind, variant, m, arc, grid, _incident(cfg), tol=tol, max_it=max_it)
    payload = {"schema": SCHEMA_VERSION, "command": "solve", "status": "ok" if report.converged else "not_converged",
               "bc_kind": kind, "variant": variant, "N": n}
    payload.update(report.to_dict())
    _write_json(out / "solve.json", payload)
    if cfg.get("outputs", {}).get("density_csv", False):
        _write_density(out / "density.csv", grid, density.values)
    return 0 if report.converged or report.stagnated else 1


def cmd_convergence(cfg: dict, out: Path) -> int:
    m, arc = build_medium(cfg), build_arc(cfg.get("arc", "spiral"))
    kind, variant = _kind(cfg), _variant(cfg)
    ns = cfg.get("N_list")
    if not (isinstance(ns, list) and ns and all(isinstance(v, int) and v >= 1 for v in ns)):
        raise ConfigError("N_list must be a non-empty list of positive integers")
    if ns != sorted(ns):
        raise ConfigError("N_list must be ascending")
    n_ref = cfg.get("reference", {}).get("N_K", 800)
    if not isinstance(n_ref, int) or n_ref <= max(ns):
        raise ConfigError(f"reference.N_K must exceed max(N_list) = {max(ns)}, got {n_ref!r}")
    tol, max_it = _gmres(cfg)
    inc, pts = _incident(cfg), _circle(cfg)

    def field(n):
        grid = ChebyshevGrid(n)
        density, report = solve_bvp(kind, variant, m, arc, grid, inc, tol=tol, max_it=max_it)
        return near_field(density, kind, variant, m, arc, grid, pts), report

    ref, _ = field(n_ref)
    rows = []
    for n in ns:
        u, report = field(n)
        rows.append({"N": n, "eps_inf": near_field_error(u, ref), "n_iterations": report.n_iterations})
    with open(out / "convergence.csv", "w") as fh:
        fh.write("# N,eps_inf\n")
        for r in rows:
            fh.write(f"{r['N']},{r['eps_inf']!r}\n")
    _write_json(out / "convergence.json", {"schema": SCHEMA_VERSION, "command": "convergence", "status": "ok",
                                           "bc_kind": kind, "variant": variant, "N_K": n_ref, "rows": rows})
    return 0


def cmd_spectrum(cfg: dict, out: Path) -> int:
    m, arc = build_medium(cfg), build_arc(cfg.get("arc", "flat_strip"))
    n = _int_field(cfg, "N")
    tag = cfg.get("operator", "V4wV3w")
    grid = ChebyshevGrid(n)
    if tag == "I":
        op = identity_operator(grid)
    elif tag in ("V2wV1w", "V4wV3w"):
        outer, inner = (("V2w", "V1w") if tag == "V2wV1w" else ("V4w", "V3w"))
        w = compute_wavenumbers(m)
        op = compose(assemble(outer, m, w, arc, grid), assemble(inner, m, w, arc, grid))
    else:
        raise ConfigError(f"operator must be V2wV1w, V4wV3w or I, got {tag!r}")
    report = eigenvalues(op, m)
    write_eigenvalues_csv(report, out / "eigenvalues.csv", tag, n, m)
    payload = {"schema": SCHEMA_VERSION, "command": "spectrum", "status": "ok", "operator": tag, "N": n}
    payload.update(report.to_dict())
    _write_json(out / "clusters.json", payload)
    return 0


def cmd_nearfield(cfg: dict, out: Path) -> int:
    m, arc = build_medium(cfg), build_arc(cfg.get("arc", "flat_strip"))
    kind, variant, n = _kind(cfg), _variant(cfg), _int_field(cfg, "N")
    tol, max_it = _gmres(cfg)
    g = cfg.get("grid", {})
    try:
        xs = np.linspace(float(g["xmin"]), float(g["xmax"]), int(g["nx"]))
        ys = np.linspace(float(g["ymin"]), float(g["ymax"]), int(g["ny"]))
    except (KeyError, TypeError, ValueError):
        raise ConfigError("grid needs numeric xmin, xmax, ymin, ymax and integer nx, ny") from None
    mask_dist = float(g.get("min_distance", 1e-2))
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    values = np.full((len(pts), 3), complex(np.nan, np.nan))
    masked = np.zeros(len(pts), dtype=bool)
    if len(pts):
        masked = distance_to_arc(arc, pts) <= mask_dist
        grid = ChebyshevGrid(n)
        density, report = solve_bvp(kind, variant, m, arc, grid, _incident(cfg), tol=tol, max_it=max_it)
        if not masked.all():
            values[~masked] = near_field(density, kind, variant, m, arc, grid, pts[~masked])
    with open(out / "nearfield.csv", "w") as fh:
        fh.write("# x,y,re_u1,im_u1,re_u2,im_u2,re_p,im_p,masked\n")
        for p, v, flag in zip(pts, values, masked):
            nums = [p[0], p[1]] + [c for z in v for c in (z.real, z.imag)]
            fh.write(",".join(repr(float(x)) for x in nums) + f",{int(flag)}\n")
    _write_json(out / "nearfield.json", {"schema": SCHEMA_VERSION, "command": "nearfield", "status": "ok",
                                         "bc_kind": kind, "variant": variant, "N": n,
                                         "n_points": int(len(pts)), "n_masked": int(masked.sum())})
    return 0


_HANDLERS = {"solve": cmd_solve, "convergence": cmd_convergence,
             "spectrum": cmd_spectrum, "nearfield": cmd_nearfield}


def _write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_density(path: Path, grid: ChebyshevGrid, values):
    n = grid.n_points
    comps = np.asarray(values).reshape(3, n)
    with open(path, "w") as fh:
        fh.write("# t,re_1,im_1,re_2,im_2,re_3,im_3\n")
        for j in range(n):
            nums = [grid.nodes[j]] + [c for z in comps[:, j] for c in (z.real, z.imag)]
            fh.write(",".join(repr(float(x)) for x in nums) + "\n")


def _error(out: Path | None, command: str, kind: str, message: str, code: int) -> int:
    payload = {"schema": SCHEMA_VERSION, "command": command, "status": "error",
               "error": {"type": kind, "message": message}}
    text = json.dumps(payload)
    print(text, file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            _write_json(out / "error.json", payload)
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="arcscat", description="Thermoelastic scattering by open arcs.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("configuration must be a JSON object")
        out.mkdir(parents=True, exist_ok=True)
        return _HANDLERS[args.command](cfg, out)
    except (OSError, json.JSONDecodeError, ConfigError, ConfluentWavenumbersError) as exc:
        return _error(out, args.command, "config", str(exc), 2)
    except NumericalError as exc:
        return _error(out, args.command, "numerical", str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
