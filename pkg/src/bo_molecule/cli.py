"""Command-line front end.

Every mode reads its parameters from flags and/or a flat ``key=value``
config file (flags win), writes one CSV or JSON artifact atomically, prints
a one-line summary on stdout and diagnostics on stderr.

Exit status: 0 success, 1 domain error (bad parameters, no bound state,
grid misalignment), 2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .linear_oscillator import airy_level, expect_abs_z, expect_z2, level
from .nonrel_centers import (
    NoOddBoundState,
    PhysicalParams,
    effective_potential_exact,
    effective_potential_linear,
    solve_fixed_centers,
)
from .oracle import OracleConvergenceError, neglected_term_checks, scaling_study, solve_1d_grid, solve_fixed_centers_grid, uniform_grid_1d
from .principal_corrections import ordering_ambiguity_magnitude, second_order_coeffs, second_order_energy
from .relativistic import DegenerateDenominator, RelParams, mu_exact, rel_spectrum, solve_mu0
from .specfun import QuadratureError, RootFindingError

log = logging.getLogger("bo_molecule")

MODES = ("centers", "spectrum", "correct2", "relativistic", "validate", "scaling", "neglected-terms")

# documented defaults; a config file may override any of them and flags
# override the file
DEFAULTS: dict[str, Any] = {
    "mode": None,
    "m": 1.0,
    "M": 1000.0,
    "lambda": 1.0,
    "hbar": 1.0,
    "levels": 4,
    "ratios": None,
    "z": None,
    "format": "json",
    "output": None,
    "units": "natural",
    "plotdata": None,
}

_FLOAT_KEYS = ("m", "M", "lambda", "hbar")

SPECTRUM_COLUMNS = ("n", "parity", "sigma_n", "deltaE", "C_n", "expect_abs_z", "expect_z2")

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _parse_list(text: str | None) -> list[float] | None:
    if text is None or str(text).strip() == "":
        return None
    return [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        key = "lambda" if key in ("lam", "lambda_") else key
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = val
    return out


def _coerce(key: str, val: Any) -> Any:
    if val is None:
        return None
    if key in _FLOAT_KEYS:
        return float(val)
    if key == "levels":
        return int(val)
    if key in ("ratios", "z"):
        return val if isinstance(val, list) else _parse_list(val)
    return str(val)


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update({k: _coerce(k, v) for k, v in read_config_file(args.config).items()})
    for key in DEFAULTS:
        val = getattr(args, key.replace("-", "_") if key != "lambda" else "lam", None)
        if val is not None:
            cfg[key] = _coerce(key, val)
    if cfg["mode"] is None:
        raise ConfigError("no mode given (positional argument or 'mode=' in the config file)")
    if cfg["mode"] not in MODES:
        raise ConfigError(f"unknown mode {cfg['mode']!r}; choose from {', '.join(MODES)}")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if cfg["units"] not in ("natural", "si-like"):
        raise ConfigError("units must be natural or si-like")
    if cfg["units"] == "natural" and cfg["hbar"] != 1.0:
        raise ConfigError("natural units fix hbar = 1; pass --units si-like to use another hbar")
    if cfg["levels"] < 1:
        raise ConfigError("levels must be >= 1")
    if cfg["output"] is None:
        cfg["output"] = f"bo_{cfg['mode'].replace('-', '_')}.{cfg['format']}"
    return cfg


def dump_config(cfg: dict[str, Any]) -> str:
    """Config text that reproduces ``cfg`` exactly (floats via repr)."""
    lines = []
    for key in DEFAULTS:
        val = cfg[key]
        if val is None:
            continue
        if isinstance(val, list):
            val = ",".join(repr(float(v)) for v in val)
        elif isinstance(val, float):
            val = repr(val)
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def _json_text(obj: Any, indent: int = 0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if is_dataclass(obj) and not isinstance(obj, type):
        obj = asdict(obj)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return "%.17g" % x if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {_json_text(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        return "[" + ", ".join(_json_text(v, indent + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_json(obj: Any) -> str:
    """JSON with every float at 17 significant digits."""
    return _json_text(obj) + "\n"


def to_csv(rows: Sequence[dict[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["%.12g" % v if isinstance(v, (float, np.floating)) else v for v in (row[c] for c in columns)])
    return buf.getvalue()


def write_atomic(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _columnar(x, y, y_err=None, header: str = "") -> str:
    y_err = np.zeros(len(x)) if y_err is None else y_err
    lines = [f"# {header}", "# x y y_err"] if header else ["# x y y_err"]
    lines += ["%.17g %.17g %.17g" % (a, b, c) for a, b, c in zip(x, y, y_err)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# modes; each returns (payload, csv rows, csv columns, summary, plot series)
# ---------------------------------------------------------------------------


def _params(cfg) -> PhysicalParams:
    return PhysicalParams(cfg["m"], cfg["M"], cfg["lambda"], cfg["hbar"])


def _unit_labels(cfg) -> dict[str, str]:
    if cfg["units"] == "natural":
        return {"energy": "natural (hbar=1)", "length": "natural (hbar=1)"}
    return {"energy": "m*lambda^2/hbar^2 scale, hbar as given", "length": "hbar^2/(m*lambda) scale"}


def run_centers(cfg):
    p = _params(cfg)
    zs = cfg["z"] or [0.0, 0.5 / p.kappa0, 1.0 / p.kappa0, 2.0 / p.kappa0, 5.0 / p.kappa0]
    rows = []
    for z in zs:
        for parity in ("even", "odd"):
            try:
                s = solve_fixed_centers(p, z, parity)
            except NoOddBoundState:
                log.info("z=%g: no odd bound state", z)
                continue
            rows.append(
                {
                    "z": float(z),
                    "parity": parity,
                    "kappa": s.kappa,
                    "energy": -s.nu_squared,
                    "energy_linear": float(effective_potential_linear(p, z)) if parity == "even" else float("nan"),
                    "residual": s.residual,
                }
            )
    zz = np.linspace(0.0, 5.0 / p.kappa0, 200)
    plots = {"effective_potential": _columnar(zz, effective_potential_exact(p, zz), None, "z E(z)")}
    payload = {"mode": "centers", "nu0_sq": p.nu0_sq, "kappa0": p.kappa0, "slope": p.linear_slope, "rows": rows}
    summary = f"centers: {len(rows)} states, nu0^2={p.nu0_sq:.12g}"
    return payload, rows, ("z", "parity", "kappa", "energy", "energy_linear", "residual"), summary, plots


def _spectrum_rows(levels):
    rows = []
    for lv in levels:
        rows.append(
            {
                "n": lv.n,
                "parity": lv.parity,
                "sigma_n": lv.sigma_n,
                "deltaE": lv.deltaE,
                "C_n": lv.C_n,
                "expect_abs_z": expect_abs_z(lv),
                "expect_z2": expect_z2(lv),
            }
        )
    return rows


def run_spectrum(cfg):
    p = _params(cfg)
    rows = _spectrum_rows(level(p, n) for n in range(cfg["levels"]))
    payload = {"mode": "spectrum", "nu0_sq": p.nu0_sq, "slope": p.linear_slope, "mass_ratio": p.mass_ratio, "levels": rows}
    summary = f"spectrum: {len(rows)} levels, deltaE0={rows[0]['deltaE']:.12g}"
    return payload, rows, SPECTRUM_COLUMNS, summary, {}


def run_correct2(cfg):
    p = _params(cfg)
    rows = []
    for n in range(0, 2 * cfg["levels"], 2):
        c = second_order_coeffs(n)
        d1 = level(p, n).deltaE
        d2 = second_order_energy(p, n)
        rows.append(
            {
                "n": n,
                "a_n": c.a_n,
                "b_n": c.b_n,
                "d_n": c.d_n,
                "alpha_n": c.alpha_n,
                "first_order": d1,
                "second_order": d2,
                "ordering_ambiguity": ordering_ambiguity_magnitude(p, n),
                "total": -p.nu0_sq + d1 + d2,
            }
        )
    cols = ("n", "a_n", "b_n", "d_n", "alpha_n", "first_order", "second_order", "ordering_ambiguity", "total")
    summary = f"correct2: {len(rows)} even levels, alpha0={rows[0]['alpha_n']:.12g}"
    return {"mode": "correct2", "nu0_sq": p.nu0_sq, "levels": rows}, rows, cols, summary, {}


def run_relativistic(cfg):
    rel = RelParams(cfg["m"], cfg["M"], cfg["lambda"])
    b = solve_mu0(rel)
    levels = _spectrum_rows(rel_spectrum(rel, cfg["levels"], b))
    zs = cfg["z"] or list(np.linspace(0.0, 0.2 / rel.m, 11))
    mu_rows = [{"z": float(z), "mu_exact": mu_exact(rel, z, b), "mu_linear": b.mu0 + b.slope * abs(z)} for z in zs]
    rows = [{"mu0": b.mu0, "slope": b.slope, "residual": b.residual, **lv} for lv in levels]
    z_arr = np.array([r["z"] for r in mu_rows])
    plots = {
        "mu_exact": _columnar(z_arr, [r["mu_exact"] for r in mu_rows], None, "z mu_exact(z)"),
        "mu_linear": _columnar(z_arr, [r["mu_linear"] for r in mu_rows], None, "z mu0+slope*|z|"),
    }
    payload = {"mode": "relativistic", "mu0": b.mu0, "slope": b.slope, "residual": b.residual, "levels": levels, "mu_of_z": mu_rows}
    summary = f"relativistic: mu0={b.mu0:.12g} slope={b.slope:.12g}"
    return payload, rows, ("mu0", "slope", "residual") + SPECTRUM_COLUMNS, summary, plots


def run_validate(cfg):
    """Analytic results against the grid oracles for the given parameters."""
    p = _params(cfg)
    rows = []
    for z in cfg["z"] or [0.0, 1.0 / p.kappa0, 2.0 / p.kappa0]:
        exact = -solve_fixed_centers(p, z).nu_squared
        grid = solve_fixed_centers_grid(p, z)
        rows.append({"check": f"fixed_centers z={z:.6g}", "analytic": exact, "grid": grid.energies[0], "grid_error": grid.error_estimate[0]})
    lv0 = level(p, 0)
    reach = (abs(lv0.sigma_n) + abs(airy_level(cfg["levels"] - 1, p.linear_slope, p.mu, p.hbar).sigma_n) + 10.0) / lv0.beta
    g = uniform_grid_1d(reach, 0.004 / lv0.beta)
    slope = p.linear_slope
    res = solve_1d_grid(lambda z: slope * np.abs(z), p.mu, p.hbar, g, cfg["levels"])
    for n in range(cfg["levels"]):
        rows.append({"check": f"airy_level n={n}", "analytic": level(p, n).deltaE, "grid": res.energies[n], "grid_error": res.error_estimate[n]})
    for r in rows:
        r["rel_diff"] = abs(r["analytic"] - r["grid"]) / abs(r["analytic"])
    worst = max(r["rel_diff"] for r in rows)
    summary = f"validate: {len(rows)} checks, worst relative difference {worst:.3g}"
    return {"mode": "validate", "checks": rows}, rows, ("check", "analytic", "grid", "grid_error", "rel_diff"), summary, {}


def run_scaling(cfg):
    p = _params(cfg)
    ratios = cfg["ratios"] or [100.0, 200.0, 400.0, 800.0]
    rep = scaling_study(p, ratios)
    x = rep.small_parameter
    err = [e / rep.nu0_sq for e in rep.extrapolation_error]
    rows = [
        {
            "mass_ratio": r,
            "m_over_mu": xi,
            "E_exact": e,
            "E_bo1": b1,
            "E_bo2": b2,
            "bo1_error": d1,
            "bo2_error": d2,
            "extrapolation_error": xe,
            "converged": int(c),
        }
        for r, xi, e, b1, b2, d1, d2, xe, c in zip(
            rep.mass_ratios, x, rep.E_exact, rep.E_bo1, rep.E_bo2, rep.bo1_error, rep.bo2_error, rep.extrapolation_error, rep.converged
        )
    ]
    payload = asdict(rep)
    payload["mode"] = "scaling"
    plots = {
        "scaling_bo1_error": _columnar(x, rep.bo1_error, err, "m/mu |E_exact-E_bo1|/nu0^2"),
        "scaling_bo2_error": _columnar(x, rep.bo2_error, err, "m/mu |E_exact-E_bo2|/nu0^2"),
    }
    f = rep.fitted_exponents
    summary = f"scaling: bo1 exponent {f['bo1_error']:.4f}, bo2 exponent {f['bo2_error']:.4f}"
    return payload, rows, tuple(rows[0]), summary, plots


def run_neglected_terms(cfg):
    p = _params(cfg)
    table = neglected_term_checks(p, 0, cfg["ratios"])
    rows = [asdict(r) for r in table.rows]
    summary_rows = [dict(asdict(s), exponent_gap=s.exponent_gap) for s in table.summary.values()]
    held = sum(s.within_bound for s in table.summary.values())
    payload = {"mode": "neglected-terms", "level_index": table.level_index, "rows": rows, "summary": summary_rows}
    summary = f"neglected-terms: {held}/{len(summary_rows)} groups within their bounds"
    return payload, rows, ("term", "mass_ratio", "value", "bound"), summary, {}


RUNNERS: dict[str, Callable] = {
    "centers": run_centers,
    "spectrum": run_spectrum,
    "correct2": run_correct2,
    "relativistic": run_relativistic,
    "validate": run_validate,
    "scaling": run_scaling,
    "neglected-terms": run_neglected_terms,
}


def emit_plotdata(directory: str | os.PathLike, series: dict[str, str]) -> list[Path]:
    """Write each ``(x, y, y_err)`` series as ``<name>.dat``."""
    return [write_atomic(Path(directory) / f"{name}.dat", text) for name, text in series.items()]


def run(cfg: dict[str, Any]) -> tuple[str, Path]:
    payload, rows, cols, summary, plots = RUNNERS[cfg["mode"]](cfg)
    if isinstance(payload, dict):
        payload = {"units": _unit_labels(cfg), **payload}
    text = to_json(payload) if cfg["format"] == "json" else to_csv(rows, cols)
    out = write_atomic(cfg["output"], text)
    if cfg["plotdata"]:
        for path in emit_plotdata(cfg["plotdata"], plots):
            log.info("wrote %s", path)
    return summary, out


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bo-molecule", description="Born-Oppenheimer three-body calculations.")
    ap.add_argument("mode", nargs="?", choices=MODES, help="computation to run (may also come from --config)")
    ap.add_argument("--m", type=float, help="light mass (default 1)")
    ap.add_argument("--M", type=float, help="heavy mass (default 1000)")
    ap.add_argument("--lambda", dest="lam", type=float, help="contact strength (default 1)")
    ap.add_argument("--hbar", type=float, help="Planck constant, only with --units si-like (default 1)")
    ap.add_argument("--levels", type=int, help="number of levels (default 4)")
    ap.add_argument("--ratios", help="comma-separated M/m values for scaling sweeps")
    ap.add_argument("--z", help="comma-separated separations")
    ap.add_argument("--format", choices=("csv", "json"), help="artifact format (default json)")
    ap.add_argument("--output", help="artifact path (default bo_<mode>.<format>)")
    ap.add_argument("--config", help="key=value file; flags override its entries")
    ap.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    ap.add_argument("--units", choices=("natural", "si-like"), help="unit convention (default natural)")
    ap.add_argument("--plotdata", help="directory for (x, y, y_err) columnar series")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        if args.dump_config:
            sys.stdout.write(dump_config(cfg))
            return EXIT_OK
        t0 = time.perf_counter()
        summary, out = run(cfg)
    except (QuadratureError, RootFindingError, OracleConvergenceError, ArithmeticError) as exc:
        if isinstance(exc, DegenerateDenominator):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DOMAIN
        print(f"error: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    log.info("finished in %.2f s", time.perf_counter() - t0)
    print(f"{summary} -> {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
