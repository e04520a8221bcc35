"""Command-line interface: ``confnodal <command> [options]``.

Every command writes one JSON document (``schema_version`` 1; the field
layout is in the packaged ``schema.json``) and optionally a CSV derived from
it.  Options may also come from an INI-style config file passed with
``--config``: one section per command, ``key = value`` lines, keys spelled
like the long options.  Flags override the file, which overrides defaults.

Exit codes: 0 success, 1 invariant violation, 2 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    """Invalid or incomplete run configuration (exit code 2)."""


# ---------------------------------------------------------------------------
# option tables
# ---------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    text = str(text).strip()
    out: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        out.extend(range(int(lo), int(hi) + 1) if sep else [int(part)])
    if not out:
        raise ValueError("empty integer list")
    return out


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class Option:
    name: str
    type: Callable[[str], Any]
    default: Any
    help: str
    choices: Optional[Sequence[str]] = None
    flag: bool = False

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_OUTPUT = [
    Option("out", str, None, "JSON output path (default: stdout)"),
    Option("csv", str, None, "optional CSV output path"),
]

COMMANDS: dict[str, list[Option]] = {
    "heisenberg-spectrum": [
        Option("d", int, 1, "half-dimension d (manifold dimension 2d+1)"),
        Option("r", _int_list, None, "lattice sequence r_1,...,r_d with r_j | r_{j+1} (default all ones)"),
        Option("s", float, None, "metric parameter s > 0 (required)"),
        Option("operator", str, "laplacian", "operator", ("laplacian", "yamabe", "paneitz")),
        Option("max-eigenvalue", float, 100.0, "spectral cutoff"),
        *_OUTPUT,
    ],
    "nu-sweep": [
        Option("d", int, 1, "half-dimension d"),
        Option("r", _int_list, None, "lattice sequence (default all ones)"),
        Option("operator", str, "yamabe", "operator", ("yamabe", "paneitz")),
        Option("s-min", float, 8.0, "first s value"),
        Option("s-max", float, 64.0, "last s value"),
        Option("points", int, 12, "number of s values"),
        Option("spacing", str, "log", "spacing of the s values", ("log", "linear")),
        Option("tail", float, 0.5, "fraction of the sweep (from the top) used for the slope fit"),
        Option("jobs", int, 1, "worker processes"),
        *_OUTPUT,
    ],
    "conformal-verify": [
        Option("N", int, 16, "grid points per axis"),
        Option("n", int, 3, "torus dimension (3 or 4)"),
        Option("seed", int, 0, "seed of the first conformal factor"),
        Option("amplitude", float, 0.5, "max |U| of each conformal factor"),
        Option("count", int, 5, "number of conformal factors"),
        Option("inject-bug", _bool, False, "negative control: flip the curvature weight of the last member", flag=True),
        Option("refine", _bool, False, "add the covariance refinement study", flag=True),
        Option("flat", _bool, False, "use the flat torus as base instead of the tuned warped metric", flag=True),
        Option("out", str, None, "JSON output path (default: stdout)"),
    ],
    "prescription": [
        Option("N", int, 16, "grid points per axis"),
        Option("n", int, 3, "torus dimension (3 or 4)"),
        Option("j", int, 2, "index of the eigenvalue tuned to zero"),
        Option("offset", float, 2.0, "warp offset K"),
        Option("c-min", float, 1.5, "lower end of the tuning range"),
        Option("c-max", float, 3.0, "upper end of the tuning range"),
        Option("candidates", lambda t: [c.strip() for c in str(t).split(",") if c.strip()],
               ["u", "random", "positive", "scalar-curvature"],
               "comma list from: u, minus-u, constant, random, positive, scalar-curvature"),
        Option("probes", int, 20, "number of probe weights"),
        Option("probe-amplitude", float, 0.5, "max |U| of the probe weights"),
        Option("seed", int, 0, "seed for random candidates and the conformal factor"),
        Option("amplitude", float, 0.5, "max |U| of the factor used by the scalar-curvature candidate"),
        Option("nodal-csv", str, None, "write the nodal point cloud of the null vector (x, y, t, value)"),
        Option("out", str, None, "JSON output path (default: stdout)"),
    ],
    "einstein": [
        Option("n", int, 9, "dimension"),
        Option("k", _int_list, [1], "orders, e.g. 1,3 or 1-7"),
        Option("einstein-constant", float, None, "lambda in Ric = lambda (n-1) g (Einstein mode)"),
        Option("base-spectrum", str, None, "file or JSON with [eigenvalue, multiplicity] pairs (Einstein mode)"),
        Option("surface-spectrum", str, None, "file or JSON array of surface eigenvalues (product mode)"),
        Option("synthetic", int, None, "draw this many surface eigenvalues in (lo, hi) (product mode)"),
        Option("lo", float, 0.0, "lower end for synthetic eigenvalues"),
        Option("hi", float, None, "upper end for synthetic eigenvalues (default mu_{(n-1)/2})"),
        Option("seed", int, 0, "seed for synthetic eigenvalues"),
        Option("samples", int, 100, "sample count of the sign table"),
        Option("extended", _bool, False, "Einstein-extended: allow k > n/2 in even dimension", flag=True),
        *_OUTPUT,
    ],
}


@dataclass
class RunConfig:
    """Validated parameters of one command."""

    command: str
    params: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.params[key]

    def to_dict(self) -> dict:
        return {k: v for k, v in sorted(self.params.items()) if k not in ("out", "csv", "nodal_csv")}


def _options(command: str) -> dict[str, Option]:
    return {o.dest: o for o in COMMANDS[command]}


def read_config_file(path: str, command: str) -> dict:
    """Section ``[command]`` of an INI file; unknown sections or keys raise :class:`ConfigError`."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    unknown = [s for s in parser.sections() if s not in COMMANDS]
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(unknown)}")
    if not parser.has_section(command):
        return {}
    opts = _options(command)
    out = {}
    for key, raw in parser.items(command):
        dest = key.replace("-", "_")
        if dest not in opts:
            raise ConfigError(f"unknown key {key!r} in section [{command}]")
        out[dest] = raw
    return out


def _coerce(opt: Option, value):
    if value is None:
        return None
    try:
        v = opt.type(value) if not isinstance(value, (list, bool)) else value
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {opt.name}: {value!r} ({exc})") from None
    if opt.choices and v not in opt.choices:
        raise ConfigError(f"{opt.name} must be one of {', '.join(opt.choices)}, got {v!r}")
    return v


def resolve_config(command: str, flags: dict, config_path: Optional[str] = None) -> RunConfig:
    """Merge defaults, config file and flags (in increasing precedence)."""
    opts = _options(command)
    unknown = set(flags) - set(opts)
    if unknown:
        raise ConfigError(f"unknown option(s): {', '.join(sorted(unknown))}")
    file_values = read_config_file(config_path, command) if config_path else {}
    params, sources = {}, {}
    for dest, opt in opts.items():
        if dest in flags:
            params[dest], sources[dest] = _coerce(opt, flags[dest]), "flag"
        elif dest in file_values:
            params[dest], sources[dest] = _coerce(opt, file_values[dest]), "config"
        else:
            params[dest], sources[dest] = opt.default, "default"
    cfg = RunConfig(command, params, sources)
    VALIDATORS[command](cfg)
    return cfg


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def _validate_heisenberg(cfg: RunConfig):
    from .heisenberg import HeisenbergModel, LatticeError

    _require(cfg["s"] is not None, "missing required option --s")
    _require(cfg["d"] >= 1, "d must be at least 1")
    if cfg["r"] is None:
        cfg.params["r"] = [1] * cfg["d"]
    try:
        HeisenbergModel(cfg["d"], tuple(cfg["r"]), cfg["s"])
    except LatticeError as exc:
        raise ConfigError(f"invalid lattice r = {cfg['r']}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _validate_sweep(cfg: RunConfig):
    from .heisenberg import HeisenbergModel, LatticeError

    _require(cfg["d"] >= 1, "d must be at least 1")
    if cfg["r"] is None:
        cfg.params["r"] = [1] * cfg["d"]
    _require(0 < cfg["s_min"] <= cfg["s_max"], "need 0 < s-min <= s-max")
    _require(cfg["points"] >= 1, "points must be positive")
    _require(0 < cfg["tail"] <= 1, "tail must lie in (0, 1]")
    _require(cfg["jobs"] >= 1, "jobs must be positive")
    _require(not (cfg["operator"] == "paneitz" and cfg["d"] == 1),
             "the Paneitz count needs d >= 2 (the d = 1 discriminant is negative)")
    try:
        HeisenbergModel(cfg["d"], tuple(cfg["r"]), cfg["s_min"])
    except LatticeError as exc:
        raise ConfigError(f"invalid lattice r = {cfg['r']}: {exc}") from None


def _validate_grid(cfg: RunConfig):
    _require(cfg["n"] in (3, 4), "n must be 3 or 4")
    _require(cfg["N"] >= 8, "N must be at least 8")
    _require(cfg["amplitude"] >= 0, "amplitude must be nonnegative")


def _validate_verify(cfg: RunConfig):
    _validate_grid(cfg)
    _require(cfg["count"] >= 1, "count must be positive")


_CANDIDATES = ("u", "minus-u", "constant", "random", "positive", "scalar-curvature")


def _validate_prescription(cfg: RunConfig):
    _validate_grid(cfg)
    _require(cfg["j"] >= 1, "j must be at least 1")
    _require(cfg["c_min"] < cfg["c_max"], "need c-min < c-max")
    _require(cfg["probes"] >= 1, "probes must be positive")
    bad = [c for c in cfg["candidates"] if c not in _CANDIDATES]
    _require(not bad, f"unknown candidate(s) {', '.join(bad)}; choose from {', '.join(_CANDIDATES)}")


def _validate_einstein(cfg: RunConfig):
    _require(cfg["n"] >= 3, "n must be at least 3")
    _require(all(k >= 1 for k in cfg["k"]), "orders k must be positive")
    product = cfg["surface_spectrum"] is not None or cfg["synthetic"] is not None
    einstein = cfg["base_spectrum"] is not None
    _require(product != einstein,
             "give either --base-spectrum (with --einstein-constant) or one of --surface-spectrum/--synthetic")
    _require(not (cfg["surface_spectrum"] is not None and cfg["synthetic"] is not None),
             "--surface-spectrum and --synthetic are exclusive")
    if einstein:
        _require(cfg["einstein_constant"] is not None, "Einstein mode needs --einstein-constant")
    else:
        _require(cfg["n"] >= 4, "product models need n >= 4")
    _require(cfg["samples"] >= 1, "samples must be positive")


VALIDATORS = {
    "heisenberg-spectrum": _validate_heisenberg,
    "nu-sweep": _validate_sweep,
    "conformal-verify": _validate_verify,
    "prescription": _validate_prescription,
    "einstein": _validate_einstein,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def envelope(cfg: RunConfig, result: dict, timestamp: Optional[str] = None) -> dict:
    ts = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    doc = {"schema_version": SCHEMA_VERSION, "command": cfg.command, "timestamp": ts,
           "config": cfg.to_dict()}
    doc.update(result)
    return _jsonable(doc)


def dump_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _write(path: Optional[str], text: str, stdout):
    if path is None or path == "-":
        stdout.write(text)
    else:
        Path(path).write_text(text)


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def schema() -> dict:
    """The JSON schema of all command outputs."""
    return json.loads(resources.files("confnodal").joinpath("schema.json").read_text())


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

@dataclass
class Outcome:
    result: dict
    exit_code: int = EXIT_OK
    csv: Optional[str] = None
    extra_files: dict = field(default_factory=dict)
    message: Optional[str] = None


def cmd_heisenberg_spectrum(cfg: RunConfig) -> Outcome:
    from .heisenberg import HeisenbergModel, paneitz_constants, spectrum_lines, spectrum_record

    model = HeisenbergModel(cfg["d"], tuple(cfg["r"]), cfg["s"])
    notes = []
    if cfg["operator"] == "paneitz" and cfg["d"] == 1:
        disc = paneitz_constants(1).delta0
        notes.append(f"d = 1: the Paneitz discriminant c1^2 - 4 c0 = {disc} is negative; "
                     "the negative-eigenvalue bounds need d >= 2")
    lines = spectrum_lines(model, cfg["operator"], cfg["max_eigenvalue"])
    rec = spectrum_record(model, cfg["operator"], lines)
    rec["volume"] = model.volume
    rec["max_eigenvalue"] = cfg["max_eigenvalue"]
    rec["warnings"] = notes
    rows = [(repr(float(l["eigenvalue"])), l["multiplicity"], json.dumps(l["label"], sort_keys=True))
            for l in rec["lines"]]
    return Outcome(rec, csv=csv_text(["eigenvalue", "multiplicity", "label"], rows),
                   message="; ".join(notes) or None)


def _sweep_point(args):
    from .heisenberg import HeisenbergModel, count_negative

    d, r, s, operator = args
    model = HeisenbergModel(d, tuple(r), s)
    return int(count_negative(model, operator).total)


def sweep_values(s_min: float, s_max: float, points: int, spacing: str) -> np.ndarray:
    if points == 1:
        return np.array([s_min])
    if spacing == "log":
        return np.geomspace(s_min, s_max, points)
    return np.linspace(s_min, s_max, points)


def cmd_nu_sweep(cfg: RunConfig) -> Outcome:
    from .heisenberg import HeisenbergModel, fit_slope

    s_values = sweep_values(cfg["s_min"], cfg["s_max"], cfg["points"], cfg["spacing"])
    tasks = [(cfg["d"], cfg["r"], float(s), cfg["operator"]) for s in s_values]
    if cfg["jobs"] > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            counts = list(pool.map(_sweep_point, tasks))
    else:
        counts = [_sweep_point(t) for t in tasks]
    volume = HeisenbergModel(cfg["d"], tuple(cfg["r"]), 1.0).volume
    tail = max(2, int(math.ceil(cfg["tail"] * len(s_values))))
    slope = None
    fit_range = None
    if len(s_values) >= 2:
        ts, tc = s_values[-tail:], counts[-tail:]
        if sum(c > 0 for c in tc) >= 2:
            slope = fit_slope(ts, tc)
            fit_range = [float(ts[0]), float(ts[-1])]
    result = {"operator": cfg["operator"], "d": cfg["d"], "r": list(cfg["r"]), "volume": volume,
              "exponent": 2 * cfg["d"] + 2,
              "points": [{"s": float(s), "nu": c, "volume": volume} for s, c in zip(s_values, counts)],
              "slope": slope, "fit_range": fit_range}
    rows = [(repr(float(s)), c, volume, "" if slope is None else repr(slope)) for s, c in zip(s_values, counts)]
    return Outcome(result, csv=csv_text(["s", "nu", "volume", "slope"], rows))


def cmd_conformal_verify(cfg: RunConfig) -> Outcome:
    from .conformal import FamilySpec
    from .verify import conformal_invariance_suite

    family = FamilySpec(cfg["seed"], cfg["amplitude"], cfg["count"])
    report = conformal_invariance_suite(cfg["N"], cfg["n"], family, inject_bug=cfg["inject_bug"],
                                        refine=cfg["refine"], flat_base=cfg["flat"])
    report.pop("elapsed_seconds", None)
    code = EXIT_OK if report["passed"] else EXIT_VIOLATION
    msg = None if report["passed"] else "invariant violated: " + ", ".join(report["failed"])
    return Outcome(report, exit_code=code, message=msg)


def cmd_prescription(cfg: RunConfig) -> Outcome:
    from .conformal import NoSignChange, bandlimited_field, kernel_basis, metric_lowest, tuned_kernel_example
    from .nodal import nodal_domains, nodal_point_cloud, obstruction_integral, point_cloud_csv
    from .prescription import (constant_q_obstruction, forbidden_function_test, probe_factors)

    try:
        tk = tuned_kernel_example(cfg["N"], cfg["n"], cfg["offset"], cfg["j"], (cfg["c_min"], cfg["c_max"]))
    except NoSignChange as exc:
        raise ConfigError(f"tuning failed: {exc}") from None
    metric, grid = tk.metric, tk.metric.grid
    eig = metric_lowest(metric, cfg["j"] + 3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        kernel = kernel_basis(tk.operator, tk.tolerance, eig=eig)
    u = tk.null_vector
    dec = nodal_domains(u.reshape(grid.shape))
    probes = probe_factors(grid, cfg["probes"], cfg["probe_amplitude"], seed=100 + cfg["seed"])
    upsilon = bandlimited_field(grid, cfg["seed"], cfg["amplitude"])
    w0 = metric.base_weights
    results = {}
    for name in cfg["candidates"]:
        f, up = _candidate(name, u, grid, upsilon, metric, cfg["seed"])
        entry = {"forbidden_test": forbidden_function_test(u, f, probes, w0, grid.n).to_dict()}
        entry["obstruction"] = [
            dict(obstruction_integral(u, dec.mask(lab), f, up, metric).to_dict(), domain=lab,
                 sign=int(dec.signs[lab - 1]))
            for lab in range(1, dec.count + 1)]
        entry["factor_amplitude"] = float(np.abs(up).max())
        results[name] = entry
    result = {
        "tuning": tk.tune.to_dict(), "nu": tk.nu, "zero_tolerance": tk.tolerance,
        "eigenvalues": tk.eigenvalues, "kernel_dimension": kernel.dimension,
        "kernel_warning": kernel.warning or (str(caught[0].message) if caught else None),
        "nodal_domains": dec.count,
        "constant_q": _without_vector(constant_q_obstruction(kernel).to_dict()),
        "candidates": results,
    }
    extra = {}
    if cfg["nodal_csv"]:
        extra[cfg["nodal_csv"]] = point_cloud_csv(nodal_point_cloud(u.reshape(grid.shape), dec))
    return Outcome(result, extra_files=extra)


def _without_vector(verdict: dict) -> dict:
    verdict["witness"].pop("vector", None)
    return verdict


def _candidate(name, u, grid, upsilon, metric, seed):
    from .conformal import bandlimited_field, scalar_curvature_conformal

    zero = np.zeros(grid.size)
    if name == "u":
        return u.copy(), zero
    if name == "minus-u":
        return -u, zero
    if name == "constant":
        return np.ones(grid.size), zero
    if name == "random":
        return bandlimited_field(grid, 500 + seed, 1.0).ravel(), zero
    if name == "positive":
        return 1.0 + 0.5 * bandlimited_field(grid, 600 + seed, 1.0).ravel(), zero
    # scalar curvature of e^{2U} g, tested against the null vector of g
    up = upsilon.ravel()
    return scalar_curvature_conformal(upsilon, grid, metric.base).ravel(), up


def _load_base_spectrum(source: str) -> list[tuple[float, int]]:
    text = source if source.lstrip().startswith("[") else Path(source).read_text()
    stripped = text.strip()
    if stripped.startswith("["):
        pairs = json.loads(stripped)
    else:
        pairs = []
        for line in stripped.splitlines():
            body = line.split("#", 1)[0].split()
            if body:
                pairs.append((body[0], body[1] if len(body) > 1 else 1))
    out = []
    for p in pairs:
        if isinstance(p, (int, float)):
            out.append((float(p), 1))
        else:
            out.append((float(p[0]), int(p[1]) if len(p) > 1 else 1))
    return sorted(out)


def cmd_einstein(cfg: RunConfig) -> Outcome:
    from .einstein import (EinsteinModel, HyperbolicProductModel, OrderOutOfRange, check_order,
                           count_negative_gjms_product, load_surface_spectrum, mu_threshold, sign_table,
                           synthetic_surface_spectrum)

    n, ks = cfg["n"], cfg["k"]
    try:
        for k in ks:
            check_order(n, k, cfg["extended"])
    except OrderOutOfRange as exc:
        raise ConfigError(str(exc)) from None
    if cfg["base_spectrum"] is not None:
        try:
            base = _load_base_spectrum(cfg["base_spectrum"])
            model = EinsteinModel(n, cfg["einstein_constant"], tuple(base), cfg["extended"])
        except (OSError, ValueError) as exc:
            raise ConfigError(f"bad base spectrum: {exc}") from None
        from .einstein import gjms_spectrum

        spectra = {str(k): [l.to_dict() for l in gjms_spectrum(model, k)] for k in ks}
        rows = [(k, repr(l["eigenvalue"]), l["multiplicity"], repr(l["label"]["laplacian"]))
                for k in ks for l in spectra[str(k)]]
        result = {"mode": "einstein", "n": n, "einstein_constant": cfg["einstein_constant"],
                  "scalar_curvature": model.scalar_curvature, "spectra": spectra}
        return Outcome(result, csv=csv_text(["k", "eigenvalue", "multiplicity", "laplacian"], rows))
    threshold = float(mu_threshold(n))
    try:
        if cfg["synthetic"] is not None:
            hi = threshold if cfg["hi"] is None else cfg["hi"]
            surface = synthetic_surface_spectrum(cfg["synthetic"], cfg["lo"], hi, cfg["seed"])
        else:
            surface = load_surface_spectrum(cfg["surface_spectrum"])
    except (OSError, ValueError) as exc:
        raise ConfigError(f"bad surface spectrum: {exc}") from None
    counts = {}
    rows = []
    for k in ks:
        c = count_negative_gjms_product(HyperbolicProductModel(n, tuple(surface), k))
        counts[str(k)] = c.to_dict()
        rows.extend((k, repr(lam), repr(v)) for lam, v in zip(surface, c.values))
    table = {str(k): v for k, v in sign_table(n, ks, cfg["samples"]).items()}
    result = {"mode": "hyperbolic-product", "n": n, "mu_threshold": threshold,
              "surface_spectrum": surface, "counts": counts, "sign_table": table}
    return Outcome(result, csv=csv_text(["k", "surface_eigenvalue", "gjms_eigenvalue"], rows))


HANDLERS = {
    "heisenberg-spectrum": cmd_heisenberg_spectrum,
    "nu-sweep": cmd_nu_sweep,
    "conformal-verify": cmd_conformal_verify,
    "prescription": cmd_prescription,
    "einstein": cmd_einstein,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_HELP = {
    "heisenberg-spectrum": "closed-form spectrum of a Heisenberg nilmanifold",
    "nu-sweep": "negative-eigenvalue counts over a sweep of s, with a log-log slope",
    "conformal-verify": "invariance suite over a seeded family of conformal factors",
    "prescription": "tune a grid metric to a null eigenvalue and test Q-curvature candidates",
    "einstein": "GJMS spectra on Einstein manifolds and sign tables on hyperbolic products",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="confnodal", description="Conformal spectral invariants and nodal sets.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, opts in COMMANDS.items():
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", default=None, help="INI config file with a [%s] section" % name)
        for o in opts:
            flag = f"--{o.name}"
            if o.flag:
                p.add_argument(flag, dest=o.dest, action="store_true", default=argparse.SUPPRESS, help=o.help)
            else:
                p.add_argument(flag, dest=o.dest, type=str, default=argparse.SUPPRESS,
                               help=f"{o.help} (default: {o.default})")
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None, timestamp: Optional[str] = None) -> int:
    """Parse ``argv``, run the command and write outputs; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        ns = vars(build_parser().parse_args(argv))
        command = ns.pop("command")
        config_path = ns.pop("config", None)
        cfg = resolve_config(command, ns, config_path)
        outcome = HANDLERS[command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CONFIG
    doc = envelope(cfg, outcome.result, timestamp)
    _write(cfg.params.get("out"), dump_json(doc), stdout)
    if cfg.params.get("csv") and outcome.csv is not None:
        Path(cfg.params["csv"]).write_text(outcome.csv)
    for path, text in outcome.extra_files.items():
        Path(path).write_text(text)
    if outcome.message:
        print(outcome.message, file=stderr)
    return outcome.exit_code


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
