"""Command line front end.

Subcommands: ``simulate``, ``table1``, ``roc``, ``dist``, ``fit``, ``ingest``.

Any flag may also be given in a ``--config`` file of ``key = value`` lines
(``#`` starts a comment; keys are flag names without dashes, ``-`` or ``_``).
Command-line flags override the file.

Exit codes: 0 success, 1 usage error, 2 data error, 3 acceptance-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io
from .covariance import ModelParams
from .detection import default_pfa_grid, roc_curve
from .errors import DataError, DegenerateInput, InvalidParams
from .estimator import fit_closed_form, fit_numeric
from .harness import (
    DESK_ROWS,
    TABLE_I,
    CampaignConfig,
    format_table,
    ingest_iq,
    roc_report,
    run_campaign,
    table1_report,
)
from .rice import RhoModel, RiceParams, rho_model_params, rice_cdf, rice_pdf

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CHECK = 0, 1, 2, 3

DEFAULTS = {
    "rho": 0.5,
    "sigma1": 0.5,
    "sigma2": 2.0,
    "phi": 0.0,
    "n": 10_000,
    "trials": 5000,
    "seed": 0,
    "family": "qtms",
    "path": "wishart",
    "out": None,
    "workers": 1,
    "bins": "fd",
    "rows": None,
    "full": False,
    "points": 200,
    "format": "csv",
    "alpha": None,
    "beta": None,
    "xmax": None,
    "matrix": None,
    "numeric": False,
    "window": 50_000,
    "file": None,
}

_CASTS = {
    "rho": float, "sigma1": float, "sigma2": float, "phi": float, "alpha": float,
    "beta": float, "xmax": float, "n": int, "trials": int, "seed": int, "workers": int,
    "points": int, "window": int,
}
_BOOLS = {"full", "numeric"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict:
    """Parse a ``key = value`` config file."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_").lower()
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _convert(key, value)
    return values


def _convert(key, value):
    if key in _BOOLS:
        if isinstance(value, bool):
            return value
        return str(value).lower() in ("1", "true", "yes", "on")
    cast = _CASTS.get(key)
    if cast is None or value is None:
        return value
    try:
        if cast is int:
            return int(float(value)) if "e" in str(value).lower() else int(value)
        return cast(value)
    except ValueError:
        raise UsageError(f"invalid value for {key}: {value!r}") from None


def _resolve(args) -> dict:
    file_values = read_config(args.config) if getattr(args, "config", None) else {}
    merged = dict(DEFAULTS)
    merged.update(file_values)
    given = set(file_values)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            merged[key] = _convert(key, value)
            given.add(key)
    merged["given"] = given
    return merged


def _common(p, *names):
    helps = {
        "rho": "true correlation coefficient",
        "sigma1": "received-signal RMS voltage",
        "sigma2": "recorded-signal RMS voltage",
        "phi": "inter-channel phase (rad)",
        "n": "integration count N",
        "trials": "Monte Carlo trials",
        "seed": "master seed",
        "family": "qtms or noise",
        "path": "wishart or snapshot",
        "out": "output path",
        "workers": "worker threads",
    }
    for name in names:
        p.add_argument(f"--{name}", default=None, help=helps.get(name))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtmsradar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", default=None, help="key = value config file")
        return p

    p = add("simulate", "run one Monte Carlo campaign")
    _common(p, "rho", "sigma1", "sigma2", "phi", "n", "trials", "seed", "family", "path", "out",
            "workers")
    p.add_argument("--bins", default=None, help="histogram bins (rule name or count)")

    p = add("table1", "reproduce the reference rho_hat table")
    _common(p, "trials", "seed", "path", "out", "workers")
    p.add_argument("--rows", default=None, help="comma-separated rho:N pairs")
    p.add_argument("--full", action="store_true", help="all 27 rows at 50 000 trials")

    p = add("roc", "analytic ROC; with --trials also the simulated empirical ROC")
    _common(p, "rho", "n", "trials", "seed", "path", "out", "workers")
    p.add_argument("--points", default=None, help="grid size")
    p.add_argument("--format", default=None, choices=("csv", "json"))

    p = add("dist", "Rice pdf/cdf grid")
    _common(p, "rho", "n", "out")
    p.add_argument("--alpha", default=None)
    p.add_argument("--beta", default=None)
    p.add_argument("--points", default=None)
    p.add_argument("--xmax", default=None)

    p = add("fit", "fit one covariance matrix file")
    _common(p, "family", "out")
    p.add_argument("--matrix", default=None, help="CSV or JSON 4x4 matrix")
    p.add_argument("--numeric", action="store_true", help="use the numeric optimizer")

    p = add("ingest", "analyze an I/Q snapshot CSV")
    _common(p, "family", "out", "rho")
    p.add_argument("file", nargs="?", default=None)
    p.add_argument("--window", default=None, help="snapshots per rho_hat")
    return parser


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj))


def cmd_simulate(o) -> int:
    params = ModelParams(o["sigma1"], o["sigma2"], o["rho"], o["phi"])
    bins = o["bins"]
    if isinstance(bins, str) and bins.isdigit():
        bins = int(bins)
    cfg = CampaignConfig(params, o["n"], o["trials"], o["family"], o["path"], o["seed"],
                         o["out"], o["workers"], bins)
    result = run_campaign(cfg)
    sys.stdout.write(json.dumps({"config": result.config, "summary": asdict(result.summary)},
                                indent=2, default=_json_default) + "\n")
    return EXIT_OK


def _parse_rows(text):
    rows = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            rho, n = item.split(":")
            rows.append((float(rho), int(float(n))))
        except ValueError:
            raise UsageError(f"bad row {item!r}; expected rho:N") from None
    return rows


def cmd_table1(o) -> int:
    if o["full"]:
        rows = sorted(TABLE_I)
        trials = 50_000
    else:
        rows = DESK_ROWS if o["rows"] is None else _parse_rows(o["rows"])
        trials = o["trials"]
    report = table1_report(rows, trials, o["seed"], o["path"], o["workers"])
    _emit(format_table(report), o["out"])
    return EXIT_OK if all(r.passed for r in report) else EXIT_CHECK


def cmd_roc(o) -> int:
    model = RhoModel(o["rho"], o["n"])
    if "trials" in o["given"]:
        rep = roc_report(model, o["trials"], o["seed"], path=o["path"], workers=o["workers"])
        meta = {"rho": model.rho, "n": model.n, "trials": o["trials"],
                "max_dev_pd": rep.max_dev_pd, "max_dev_pfa": rep.max_dev_pfa,
                "within_envelope": rep.within_envelope}
        if o["format"] == "json":
            text = json.dumps({**meta,
                               "p_fa": rep.p_fa_nominal.tolist(),
                               "threshold": rep.thresholds.tolist(),
                               "p_d": rep.p_d_analytic.tolist(),
                               "p_fa_empirical": rep.empirical.p_fa.tolist(),
                               "p_d_empirical": rep.empirical.p_d.tolist()}) + "\n"
        else:
            lines = ["p_fa,p_d,threshold,p_fa_empirical,p_d_empirical"]
            for row in zip(rep.p_fa_nominal, rep.p_d_analytic, rep.thresholds,
                           rep.empirical.p_fa, rep.empirical.p_d):
                lines.append(",".join(repr(float(v)) for v in row))
            text = "\n".join(lines) + "\n"
        _emit(text, o["out"])
        return EXIT_OK if rep.within_envelope else EXIT_CHECK
    curve = roc_curve(model, default_pfa_grid(o["points"]))
    if o["format"] == "json":
        text = io.roc_to_json(curve.p_fa, curve.p_d, curve.thresholds,
                              rho=model.rho, n=model.n) + "\n"
    else:
        text = io.roc_to_csv(curve.p_fa, curve.p_d, curve.thresholds)
    _emit(text, o["out"])
    return EXIT_OK


def cmd_dist(o) -> int:
    if o["alpha"] is not None or o["beta"] is not None:
        if o["alpha"] is None or o["beta"] is None:
            raise UsageError("--alpha and --beta must be given together")
        p = RiceParams(o["alpha"], o["beta"])
    else:
        p = rho_model_params(RhoModel(o["rho"], o["n"]))
    xmax = o["xmax"] if o["xmax"] is not None else p.alpha + 8.0 * p.beta
    x = np.linspace(0.0, xmax, o["points"])
    lines = ["x,pdf,cdf"]
    for xi, f, c in zip(x, rice_pdf(x, p), rice_cdf(x, p)):
        lines.append(f"{float(xi)!r},{float(f)!r},{float(c)!r}")
    _emit("\n".join(lines) + "\n", o["out"])
    return EXIT_OK


def cmd_fit(o) -> int:
    if not o["matrix"]:
        raise UsageError("fit needs --matrix FILE")
    m = io.read_cov(o["matrix"])
    fit = fit_numeric(m, o["family"]) if o["numeric"] else fit_closed_form(m, o["family"])
    _emit(json.dumps(fit.as_dict(), indent=2) + "\n", o["out"])
    return EXIT_OK


def cmd_ingest(o) -> int:
    if not o["file"]:
        raise UsageError("ingest needs a snapshot file")
    result = ingest_iq(o["file"], o["window"], o["family"])
    if o["out"]:
        io.write_rho_csv(o["out"], result.rho_hats)
    sys.stdout.write(json.dumps(result.to_dict(), indent=2, default=_json_default) + "\n")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "table1": cmd_table1,
    "roc": cmd_roc,
    "dist": cmd_dist,
    "fit": cmd_fit,
    "ingest": cmd_ingest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        options = _resolve(args)
        return COMMANDS[args.command](options)
    except (UsageError, InvalidParams) as exc:
        print(f"qtmsradar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DegenerateInput, OSError) as exc:
        print(f"qtmsradar: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"qtmsradar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
