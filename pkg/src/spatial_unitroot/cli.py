"""Command-line front end.

Exit codes: 0 ok, 2 usage or parameter error, 3 I/O or unreadable input file,
4 numerical failure (singular normal equations).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .covariance import (
    covariance_exact,
    covariance_growth_scan,
    growth_scan_to_csv,
    z_alpha_limit,
)
from .errors import InvalidArgumentError, SingularSystemError, UnsupportedRegimeError
from .estimation import EstimateResult, Regime, lse_canonical, unit_root_statistic
from .lattice import ModelParams, NoiseSpec, Stability, TriangularField, simulate_triangle
from .montecarlo import StudyConfig, run_study
from .serialize import dumps17

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS = {
    "simulate": {"alpha": None, "beta": None, "n": None, "seed": 0, "noise": "normal",
                 "format": "json", "output": None},
    "estimate": {"input": None, "alpha": None, "beta": None, "n": None, "seed": 0,
                 "noise": "normal", "signs": None, "regime": None, "known_alpha": None,
                 "one_sided": False, "format": "json", "output": "estimate.json"},
    "unit-root": {"input": None, "alpha": None, "beta": None, "n": None, "seed": 0,
                  "noise": "normal", "signs": None, "regime": "unstable", "known_alpha": None,
                  "one_sided": False, "null_rho": 1.0, "format": "json", "output": "-"},
    "mc-study": {"n_list": None, "M": None, "alpha": None, "beta": None, "noise": "normal",
                 "seed": 0, "statistics": "scaled_rho,scaled_alpha,scaled_beta",
                 "format": "json", "output": "report.json", "raw_output": None, "threads": None},
    "covariance": {"k1": None, "l1": None, "k2": None, "l2": None, "alpha": None, "beta": None,
                   "z_limit": False, "s1": None, "t1": None, "s2": None, "t2": None,
                   "scan": False, "n": None, "pairs": None, "m_values": None,
                   "format": "json", "output": "-"},
}


class UsageError(Exception):
    pass


class DataFileError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_sim_flags(p, required=False):
    p.add_argument("--alpha", type=float, help="coefficient of X[k-1, l]")
    p.add_argument("--beta", type=float, help="coefficient of X[k, l-1]")
    p.add_argument("--n", type=int, help="triangle order")
    p.add_argument("--seed", type=int, help="unsigned 64-bit noise seed (default 0)")
    p.add_argument("--noise", choices=["normal", "rademacher", "uniform"],
                   help="innovation distribution (default normal)")


def _add_io_flags(p, formats=("csv", "json")):
    p.add_argument("--config", help="JSON file with flag values; flags override it")
    p.add_argument("--output", help="output path, '-' for standard output")
    p.add_argument("--format", choices=list(formats), help="output format (default json)")
    p.add_argument("--threads", type=int, help="worker cap (default: machine parallelism)")


def _add_test_flags(p):
    p.add_argument("--signs", help="sign pattern of (alpha, beta), e.g. '+,-'")
    p.add_argument("--regime", choices=["stable", "unstable"], help="asymptotic regime")
    p.add_argument("--known-alpha", dest="known_alpha", type=float,
                   help="use this alpha in the limit variance instead of the estimate")
    p.add_argument("--one-sided", dest="one_sided", action="store_true", default=None,
                   help="lower-tail p-value (alternative rho < 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spatial-unitroot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a field on T_n", argument_default=argparse.SUPPRESS)
    _add_sim_flags(p)
    _add_io_flags(p)

    p = sub.add_parser("estimate", help="least-squares estimates from a field",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--input", help="field file (CSV or JSON); otherwise simulate inline")
    _add_sim_flags(p)
    _add_test_flags(p)
    _add_io_flags(p, formats=("json", "csv"))

    p = sub.add_parser("unit-root", help="scaled unit-root statistic and p-value",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--input", help="estimate JSON or field file; otherwise simulate inline")
    _add_sim_flags(p)
    _add_test_flags(p)
    p.add_argument("--null-rho", dest="null_rho", type=float,
                   help="centre of the stable-regime statistic (default 1)")
    _add_io_flags(p, formats=("json",))

    p = sub.add_parser("mc-study", help="Monte Carlo study of the scaled estimators",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--n-list", dest="n_list", help="comma-separated triangle orders")
    p.add_argument("--M", type=int, help="replicates per order")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--noise", choices=["normal", "rademacher", "uniform"])
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--statistics", help="comma-separated subset of scaled_rho,scaled_alpha,"
                   "scaled_beta,s_sums")
    p.add_argument("--raw-output", dest="raw_output", help="CSV dump of replicate values")
    _add_io_flags(p)

    p = sub.add_parser("covariance", help="exact covariances, limit function, growth scan",
                       argument_default=argparse.SUPPRESS)
    for name in ("k1", "l1", "k2", "l2"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--z-limit", dest="z_limit", action="store_true", default=None,
                   help="evaluate the limit covariance function at scaled points")
    for name in ("s1", "t1", "s2", "t2"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--scan", action="store_true", default=None, help="emit the growth-scan CSV")
    p.add_argument("--n", type=int, help="largest m in the growth scan")
    p.add_argument("--pairs", help="scaled point pairs 's1,t1,s2,t2;...'")
    p.add_argument("--m-values", dest="m_values", help="comma-separated m values for the scan")
    _add_io_flags(p)
    return parser


def _load_config(path):
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _merge(command, namespace):
    flags = {k: v for k, v in vars(namespace).items() if k not in ("command", "config") and v is not None}
    file_cfg = _load_config(getattr(namespace, "config", None))
    defaults = dict(DEFAULTS[command])
    defaults.setdefault("threads", None)
    unknown = set(file_cfg) - set(defaults)
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
    return {**defaults, **file_cfg, **flags}


def _require(cfg, *names):
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _parse_signs(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return tuple(int(s) for s in text)
    parts = [p.strip() for p in str(text).split(",")]
    table = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}
    try:
        return tuple(table[p] for p in parts)
    except KeyError as exc:
        raise UsageError(f"bad sign pattern {text!r}; use e.g. '+,-'") from exc


def _int_list(value):
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(v) for v in str(value).split(",") if v.strip()]


def _write(cfg, text, stdout):
    out = cfg["output"]
    if out == "-":
        stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc}") from exc


def _summary_stream(cfg, stdout, stderr):
    return stderr if cfg["output"] == "-" else stdout


def _inline_field(cfg):
    _require(cfg, "alpha", "beta", "n")
    params = ModelParams(cfg["alpha"], cfg["beta"])
    return simulate_triangle(cfg["n"], params, NoiseSpec(cfg["noise"], cfg["seed"]))


def _read_field(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFileError(f"cannot read {path}: {exc}") from exc
    try:
        if text.lstrip().startswith("{"):
            return TriangularField.from_json(text)
        return TriangularField.from_csv(text)
    except (InvalidArgumentError, ValueError, IndexError) as exc:
        raise DataFileError(f"{path} is not a valid field file: {exc}") from exc


def _check_regime_consistency(cfg):
    regime = cfg.get("regime")
    if regime is None or cfg.get("alpha") is None or cfg.get("beta") is None:
        return
    stability = ModelParams(cfg["alpha"], cfg["beta"]).stability
    expected = {Stability.STABLE: "stable", Stability.UNSTABLE: "unstable"}.get(stability)
    if expected != regime:
        raise UsageError(
            f"--regime {regime} is inconsistent with alpha={cfg['alpha']}, beta={cfg['beta']}"
        )


def cmd_simulate(cfg, stdout, stderr):
    _require(cfg, "alpha", "beta", "n")
    fld = _inline_field(cfg)
    if cfg["output"] is None:
        cfg["output"] = f"field.{cfg['format']}"
    text = fld.to_csv() if cfg["format"] == "csv" else fld.to_json()
    _write(cfg, text, stdout)
    info = _summary_stream(cfg, stdout, stderr)
    print(
        f"n={fld.n} cells={len(fld)} min={fld.values.min():.12g} max={fld.values.max():.12g}",
        file=info,
    )
    if fld.params.stability is Stability.EXPLOSIVE:
        print(f"warning: rho={fld.params.rho} > 1, the field is explosive", file=stderr)
    return EXIT_OK


def _estimate(cfg):
    _check_regime_consistency(cfg)
    fld = _read_field(cfg["input"]) if cfg.get("input") else _inline_field(cfg)
    return lse_canonical(fld, _parse_signs(cfg.get("signs")))


def cmd_estimate(cfg, stdout, stderr):
    result = _estimate(cfg)
    if cfg.get("regime"):
        result.statistic, result.p_value = unit_root_statistic(
            result, cfg["regime"], cfg.get("known_alpha"), bool(cfg.get("one_sided"))
        )
        result.regime = cfg["regime"]
    if cfg["format"] == "csv":
        keys = list(result.to_dict())
        row = []
        for v in result.to_dict().values():
            if isinstance(v, float):
                row.append(format(v, ".12g"))
            elif isinstance(v, list):
                row.append(json.dumps(v))
            else:
                row.append("" if v is None else str(v))
        text = ",".join(keys) + "\n" + ",".join(f'"{c}"' if "," in c else c for c in row) + "\n"
    else:
        text = dumps17(result.to_dict())
    _write(cfg, text, stdout)
    print(
        f"n={result.n} alpha_hat={result.alpha_hat:.12g} beta_hat={result.beta_hat:.12g} "
        f"rho_hat={result.rho_hat:.12g}",
        file=_summary_stream(cfg, stdout, stderr),
    )
    return EXIT_OK


def cmd_unit_root(cfg, stdout, stderr):
    result = None
    if cfg.get("input"):
        path = cfg["input"]
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise DataFileError(f"cannot read {path}: {exc}") from exc
        try:
            data = json.loads(text) if text.lstrip().startswith("{") else None
        except json.JSONDecodeError as exc:
            raise DataFileError(f"{path} is not valid JSON: {exc}") from exc
        if data is not None and "rho_hat" in data:
            try:
                result = EstimateResult.from_dict(data)
            except InvalidArgumentError as exc:
                raise DataFileError(str(exc)) from exc
    if result is None:
        result = _estimate(cfg)
    regime = Regime(cfg["regime"])
    stat, p = unit_root_statistic(
        result, regime, cfg.get("known_alpha"), bool(cfg.get("one_sided")), float(cfg["null_rho"])
    )
    payload = {
        "n": result.n,
        "rho_hat": result.rho_hat,
        "alpha_hat": result.alpha_hat,
        "regime": regime.value,
        "statistic": stat,
        "p_value": p,
        "one_sided": bool(cfg.get("one_sided")),
    }
    _write(cfg, dumps17(payload), stdout)
    print(f"statistic={stat:.12g} p_value={p:.12g}", file=_summary_stream(cfg, stdout, stderr))
    return EXIT_OK


def cmd_mc_study(cfg, stdout, stderr):
    _require(cfg, "n_list", "M", "alpha", "beta")
    try:
        config = StudyConfig(
            n_list=tuple(_int_list(cfg["n_list"])),
            M=int(cfg["M"]),
            params=ModelParams(cfg["alpha"], cfg["beta"]),
            noise_kind=cfg["noise"],
            master_seed=int(cfg["seed"]),
            statistics=tuple(
                cfg["statistics"] if isinstance(cfg["statistics"], list)
                else [s.strip() for s in str(cfg["statistics"]).split(",") if s.strip()]
            ),
            keep_raw=cfg.get("raw_output") is not None,
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid study configuration: {exc}") from exc
    workers = cfg.get("threads") or os.cpu_count() or 1
    report = run_study(config, workers=workers)
    text = report.to_csv() if cfg["format"] == "csv" else report.to_json()
    _write(cfg, text, stdout)
    if cfg.get("raw_output"):
        Path(cfg["raw_output"]).write_text(report.raw_csv())
    info = _summary_stream(cfg, stdout, stderr)
    for s in report.summaries:
        print(f"n={s.n} {s.statistic}: mean={s.mean:.6g} var={s.variance:.6g}", file=info)
    return EXIT_OK


def _parse_pairs(text):
    pairs = []
    for chunk in str(text).split(";"):
        if not chunk.strip():
            continue
        vals = [float(v) for v in chunk.split(",")]
        if len(vals) != 4:
            raise UsageError(f"pair {chunk!r} needs four numbers s1,t1,s2,t2")
        pairs.append(((vals[0], vals[1]), (vals[2], vals[3])))
    return pairs


def cmd_covariance(cfg, stdout, stderr):
    if cfg.get("scan"):
        _require(cfg, "alpha", "n", "pairs")
        m_values = _int_list(cfg["m_values"]) if cfg.get("m_values") else None
        rows = covariance_growth_scan(cfg["n"], cfg["alpha"], _parse_pairs(cfg["pairs"]), m_values)
        _write(cfg, growth_scan_to_csv(rows), stdout)
        return EXIT_OK
    if cfg.get("z_limit"):
        _require(cfg, "alpha", "s1", "t1", "s2", "t2")
        value = z_alpha_limit((cfg["s1"], cfg["t1"]), (cfg["s2"], cfg["t2"]), cfg["alpha"])
    else:
        _require(cfg, "k1", "l1", "k2", "l2", "alpha", "beta")
        value = covariance_exact(
            (cfg["k1"], cfg["l1"]), (cfg["k2"], cfg["l2"]), ModelParams(cfg["alpha"], cfg["beta"])
        )
    if cfg["format"] == "csv":
        text = f"value\n{value:.12g}\n"
    else:
        text = format(value, ".17g") + "\n"
    _write(cfg, text, stdout)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "unit-root": cmd_unit_root,
    "mc-study": cmd_mc_study,
    "covariance": cmd_covariance,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = _merge(ns.command, ns)
        return COMMANDS[ns.command](cfg, stdout, stderr)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except (InvalidArgumentError, UnsupportedRegimeError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except SingularSystemError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (DataFileError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
