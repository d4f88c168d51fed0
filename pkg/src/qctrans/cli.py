"""Scenario runner: writes curve data (CSV or JSON) plus a ``summary.json`` report.

Scenarios
---------
single-packet       x, P_cl, P_qm for one packet
superposition       x, P_cl, P_qm for the two-packet state
k0-scan             k0, P_trunc at a fixed position ``--x``
truncation-profile  x, P_cl, P_qm, P_trunc for each cutoff
decoherence         x, P_cl, P_qm, P_lr, interference (P_lr is the epsilon = 0 diagonal)
mc-validate         x (bin centres), P_cl (bin averages), P_mc (Monte Carlo histogram)

Defaults are the reference parameter set: ``hbar = sigma = m = 1``,
``d = v0 = 10``, ``x0 = 0`` (``hbar = 2`` for ``superposition``), the grid
``[-25, 25]`` with 8192 points, ``sigma_x = sigma`` and
``sigma_v = hbar / (2 sigma m)``. A TOML file given with ``--config`` uses
the flag names as keys (``sigma-v = 0.5``, ``t = [0.2, 0.3]``); flags
override the file, the file overrides the defaults.

Exit codes: 0 success, 1 invariant-check failure, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classical import (ClassicalScenario, McConfig, bin_averaged_density, classical_density_single,
                        classical_density_superposed, histogram_l1, sample_trajectories)
from .core import (DEFAULT_N_POINTS, DEFAULT_X_MAX, DEFAULT_X_MIN, Grid, ParameterError, PhysParams,
                   RealField, integrate_trapezoid)
from .decoherence import lr_split
from .filter import default_k0_values, transition_scan, truncated_density, truncated_density_fft
from .quantum import WavePacketSpec, density, propagate_quadrature

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

SCENARIOS = ("single-packet", "superposition", "k0-scan", "truncation-profile", "decoherence", "mc-validate")
SUPERPOSED = frozenset(SCENARIOS) - {"single-packet"}

DEFAULT_TIMES = {
    "single-packet": (0.25, 0.35, 0.5, 0.75),
    "superposition": (0.25, 0.35, 0.5, 0.75),
    "k0-scan": (0.3,),
    "truncation-profile": (0.3,),
    "decoherence": (0.2, 0.3, 0.4),
    "mc-validate": (0.0, 0.3, 0.5),
}
DEFAULT_HBAR = {"superposition": 2.0}
DEFAULTS = {
    "hbar": 1.0, "mass": 1.0, "sigma": 1.0, "x0": 0.0, "v0": 10.0, "d": 10.0,
    "grid-min": DEFAULT_X_MIN, "grid-max": DEFAULT_X_MAX, "grid-points": DEFAULT_N_POINTS,
    "seed": 0, "out": "out", "format": "csv", "x": 0.5, "oracles": False,
}

NORM_TOL = 1e-7
RECON_TOL = 1e-7

_FLOAT_KEYS = {"hbar", "mass", "sigma", "sigma-v", "x0", "v0", "d", "grid-min", "grid-max", "x"}
_INT_KEYS = {"grid-points", "mc-samples", "seed"}
_LIST_KEYS = {"t", "k0"}
_STR_KEYS = {"scenario", "out", "format"}
_BOOL_KEYS = {"oracles"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _LIST_KEYS | _STR_KEYS | _BOOL_KEYS


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: PhysParams
    times: tuple[float, ...]
    grid: Grid
    out: Path
    format: str = "csv"
    k0: tuple[float, ...] | None = None
    mc: McConfig | None = None
    x: float = 0.5
    oracles: bool = False
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario: unknown scenario {self.scenario!r}; expected one of {', '.join(SCENARIOS)}")
        if not self.times:
            raise ConfigError("t: at least one time is required")
        if any(not (math.isfinite(t) and t >= 0) for t in self.times):
            raise ConfigError("t: times must be finite and non-negative")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: expected 'csv' or 'json', got {self.format!r}")
        if self.scenario in ("k0-scan", "truncation-profile"):
            if not self.k0:
                raise ConfigError(f"k0: scenario {self.scenario} needs at least one cutoff")
            if any(not (math.isfinite(k) and k >= 0) for k in self.k0):
                raise ConfigError("k0: cutoffs must be finite and non-negative")
        if self.scenario == "mc-validate" and self.mc is None:
            raise ConfigError("mc-samples: scenario mc-validate needs a sample count")
        if self.scenario in SUPERPOSED and not self.params.d > 0:
            raise ConfigError(f"d: scenario {self.scenario} needs a positive separation")
        if not math.isfinite(self.x):
            raise ConfigError("x: must be finite")


@dataclass(frozen=True)
class Report:
    exit_code: int
    summary: dict
    files: tuple[Path, ...]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qctrans", description="Reproduce the classical/quantum free-particle curves.")
    ap.add_argument("--config", type=Path, help="TOML file with flag names as keys")
    ap.add_argument("--scenario", choices=SCENARIOS)
    for name in ("hbar", "mass", "sigma", "sigma-v", "x0", "v0", "d", "grid-min", "grid-max"):
        ap.add_argument(f"--{name}", type=float)
    ap.add_argument("--t", type=float, action="append", help="time (repeatable)")
    ap.add_argument("--k0", type=float, action="append", help="spectral cutoff (repeatable)")
    ap.add_argument("--grid-points", type=int)
    ap.add_argument("--mc-samples", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--x", type=float, help="evaluation point for k0-scan")
    ap.add_argument("--oracles", action="store_true", default=None,
                    help="also compare against the numerical oracles (slower)")
    return ap


def _check_type(key, value):
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if key in _LIST_KEYS:
        items = value if isinstance(value, list) else [value]
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in items):
            raise ConfigError(f"{key}: expected a number or a list of numbers, got {value!r}")
        return [float(v) for v in items]
    if key in _STR_KEYS:
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    if not isinstance(value, bool):
        raise ConfigError(f"{key}: expected true or false, got {value!r}")
    return value


def read_config_file(path) -> dict:
    """Parse a TOML config, rejecting unknown keys. ``sigma_v`` and ``sigma-v`` are both accepted."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror or exc}") from exc
    try:
        data = tomllib.loads(raw)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: {path}: {exc}") from exc
    out = {}
    for key, value in data.items():
        norm = key.replace("_", "-")
        if norm not in KNOWN_KEYS:
            raise ConfigError(f"{key}: unknown config key in {path}")
        out[norm] = _check_type(norm, value)
    return out


def load_config(argv=None) -> ScenarioConfig:
    """Merge defaults, an optional config file and command-line flags (flags win)."""
    args = build_parser().parse_args(argv)
    merged, source = {}, {}
    if args.config is not None:
        for key, value in read_config_file(args.config).items():
            merged[key], source[key] = value, "file"
    for key, value in vars(args).items():
        if key == "config" or value is None:
            continue
        key = key.replace("_", "-")
        merged[key], source[key] = value, "flag"

    scenario = merged.get("scenario")
    if scenario is None:
        raise ConfigError("scenario: required (flag --scenario or config key 'scenario')")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario: unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}")

    def get(key, default):
        if key in merged:
            return merged[key]
        source[key] = "default"
        return default

    hbar = get("hbar", DEFAULT_HBAR.get(scenario, DEFAULTS["hbar"]))
    mass, sigma = get("mass", DEFAULTS["mass"]), get("sigma", DEFAULTS["sigma"])
    try:
        base = PhysParams.from_quantum(mass=mass, hbar=hbar, sigma=sigma, x0=get("x0", DEFAULTS["x0"]),
                                       v0=get("v0", DEFAULTS["v0"]), d=get("d", DEFAULTS["d"]))
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    if "sigma-v" in merged:
        try:
            params = base.with_(sigma_v=merged["sigma-v"])
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        params = base
        source["sigma-v"] = "default"
    source["sigma-x"] = "default"

    try:
        grid = Grid(get("grid-min", DEFAULTS["grid-min"]), get("grid-max", DEFAULTS["grid-max"]),
                    get("grid-points", DEFAULTS["grid-points"]))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc

    times = tuple(get("t", DEFAULT_TIMES[scenario]))
    k0 = None
    if scenario == "k0-scan":
        k0 = tuple(get("k0", default_k0_values()))
    elif scenario == "truncation-profile":
        k0 = tuple(get("k0", (30.0, 20.0, 10.0)))
    elif "k0" in merged:
        k0 = tuple(merged["k0"])

    mc = None
    seed = get("seed", DEFAULTS["seed"])
    if "mc-samples" in merged:
        try:
            mc = McConfig(n_samples=merged["mc-samples"], seed=seed)
        except ValueError as exc:
            raise ConfigError(f"mc-samples: {exc}") from exc

    return ScenarioConfig(
        scenario=scenario, params=params, times=times, grid=grid,
        out=Path(get("out", DEFAULTS["out"])), format=get("format", DEFAULTS["format"]),
        k0=k0, mc=mc, x=get("x", DEFAULTS["x"]), oracles=bool(get("oracles", DEFAULTS["oracles"])),
        provenance=dict(sorted(source.items())),
    )


def _tag(value: float) -> str:
    return repr(float(value)).replace("-", "m")


def write_table(path: Path, columns: dict[str, np.ndarray], fmt: str) -> None:
    """CSV with a header row and 17 significant digits, or a JSON list of curves.

    Each JSON curve is ``{"name", "axis", "x", "values"}``; ``axis`` names the
    abscissa column (``x``, or ``k0`` for the scan).
    """
    names = list(columns)
    if fmt == "csv":
        rows = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
        with open(path, "w", encoding="utf-8", newline="") as fh:
            np.savetxt(fh, rows, fmt="%.17g", delimiter=",", header=",".join(names), comments="", newline="\n")
        return
    axis = [float(v) for v in columns[names[0]]]
    curves = [{"name": n, "axis": names[0], "x": axis, "values": [float(v) for v in columns[n]]}
              for n in names[1:]]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(curves, fh)
        fh.write("\n")


class _Checks:
    def __init__(self):
        self.items = []

    def add(self, name: str, value: float, tol: float):
        ok = bool(np.isfinite(value) and value <= tol)
        self.items.append({"name": name, "value": float(value), "tol": tol, "passed": ok})

    @property
    def ok(self) -> bool:
        return all(c["passed"] for c in self.items)


def _norm(grid: Grid, values) -> float:
    return integrate_trapezoid(RealField(grid, values))


def _curves(cfg: ScenarioConfig, checks: _Checks):
    """Yield ``(stem, columns, record)`` for each output file."""
    p, grid, x = cfg.params, cfg.grid, cfg.grid.x
    superposed = cfg.scenario in SUPERPOSED
    spec = WavePacketSpec(p, superposed=superposed) if cfg.scenario != "mc-validate" else None
    p_cl_fn = classical_density_superposed if superposed else classical_density_single

    for t in cfg.times:
        if cfg.scenario == "k0-scan":
            scan = transition_scan(cfg.x, t, cfg.k0, p)
            rec = {"t": t, "x": cfg.x,
                   "P_qm": float(density(cfg.x, t, spec)), "P_cl": float(p_cl_fn(cfg.x, t, p))}
            yield f"k0-scan_t{_tag(t)}", {"k0": np.array([k for k, _ in scan]),
                                          "P_trunc": np.array([v for _, v in scan])}, rec
            continue

        if cfg.scenario == "mc-validate":
            hist = sample_trajectories(ClassicalScenario(p, superposed=True), t, cfg.mc)
            dens = lambda xx: classical_density_superposed(xx, t, p)  # noqa: E731
            rec = {"t": t, "n_samples": cfg.mc.n_samples, "seed": cfg.mc.seed,
                   "histogram_mass": float(hist.counts.sum() / hist.n_samples),
                   "l1_vs_P_cl": histogram_l1(hist, dens)}
            cols = {"x": hist.centers, "P_cl": bin_averaged_density(dens, hist.edges), "P_mc": hist.density}
            yield f"mc-validate_t{_tag(t)}", cols, rec
            continue

        p_cl = p_cl_fn(x, t, p)
        p_qm = density(x, t, spec)
        base = {"x": x, "P_cl": p_cl, "P_qm": p_qm}
        norms = {"P_cl": _norm(grid, p_cl), "P_qm": _norm(grid, p_qm)}
        for name in ("P_cl", "P_qm"):
            checks.add(f"normalization {name} t={t:g}", abs(norms[name] - 1.0), NORM_TOL)
        rec = {"t": t, "normalization": norms, "max_abs_P_cl_minus_P_qm": float(np.max(np.abs(p_cl - p_qm)))}
        if cfg.oracles and t > 0:
            quad = propagate_quadrature(spec, t, grid).density().values
            rec["oracle_quadrature_max_dev"] = float(np.max(np.abs(quad - p_qm)))

        if cfg.scenario in ("single-packet", "superposition"):
            yield f"{cfg.scenario}_t{_tag(t)}", base, rec

        elif cfg.scenario == "decoherence":
            lr = lr_split(grid, t, p)
            interf = lr.interference().values
            p_lr = np.abs(lr.psi_l.values) ** 2 + np.abs(lr.psi_r.values) ** 2
            recon = float(np.max(np.abs(p_lr + interf - p_qm)))
            checks.add(f"reconstruction t={t:g}", recon, RECON_TOL)
            rec["normalization"]["P_lr"] = _norm(grid, p_lr)
            checks.add(f"normalization P_lr t={t:g}", abs(rec["normalization"]["P_lr"] - 1.0), NORM_TOL)
            rec.update(reconstruction_max_dev=recon,
                       l1_P_lr_vs_P_cl=float(grid.dx * np.sum(np.abs(p_lr - p_cl))),
                       interference_max_abs=float(np.max(np.abs(interf))))
            yield f"decoherence_t{_tag(t)}", {**base, "P_lr": p_lr, "interference": interf}, rec

        else:  # truncation-profile
            for k0 in cfg.k0:
                res = truncated_density(grid, t, k0, p)
                vals = res.field.values
                krec = {**rec, "normalization": {**norms, "P_trunc": _norm(grid, vals)}, "k0": k0,
                        "max_imag_residue": res.max_imag_residue,
                        "fft_fallback_points": int(len(res.fallback_indices))}
                if cfg.oracles:
                    fft = truncated_density_fft(grid, t, k0, p)
                    krec["oracle_fft_max_dev"] = float(np.max(np.abs(fft.values - vals)))
                yield f"truncation-profile_t{_tag(t)}_k0{_tag(k0)}", {**base, "P_trunc": vals}, krec


def run_scenario(cfg: ScenarioConfig) -> Report:
    """Evaluate every (time, cutoff) combination, write the files and ``summary.json``."""
    checks = _Checks()
    results, files = [], []
    ext = ".csv" if cfg.format == "csv" else ".json"
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        for stem, cols, rec in _curves(cfg, checks):
            path = cfg.out / (stem + ext)
            write_table(path, cols, cfg.format)
            files.append(path)
            results.append({"file": path.name, **rec})
        ok = checks.ok
        summary = {
            "version": __version__,
            "scenario": cfg.scenario,
            "status": "ok" if ok else "invariant-failure",
            "params": asdict(cfg.params),
            "grid": asdict(cfg.grid),
            "times": list(cfg.times),
            "k0": None if cfg.k0 is None else list(cfg.k0),
            "x": cfg.x,
            "mc": None if cfg.mc is None else {**asdict(cfg.mc), "histogram_range": list(cfg.mc.histogram_range)},
            "format": cfg.format,
            "oracles": cfg.oracles,
            "provenance": cfg.provenance,
            "checks": checks.items,
            "results": results,
        }
        summary_path = cfg.out / "summary.json"
        with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        return Report(EXIT_IO, {"status": "io-error", "error": str(exc)}, tuple(files))
    files.append(summary_path)
    return Report(EXIT_OK if ok else EXIT_INVARIANT, summary, tuple(files))


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = run_scenario(cfg)
    if report.exit_code == EXIT_IO:
        print(f"i/o error: {report.summary['error']}", file=sys.stderr)
    elif report.exit_code == EXIT_INVARIANT:
        failed = [c["name"] for c in report.summary["checks"] if not c["passed"]]
        print("invariant check failed: " + "; ".join(failed), file=sys.stderr)
    else:
        print(f"wrote {len(report.files)} files to {cfg.out}")
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
