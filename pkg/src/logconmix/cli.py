"""Command-line front end.

Subcommands:

- ``fit``       mixture estimation on a column of raw values
- ``logcx``     standalone weighted log-concave density fit
- ``simulate``  Monte-Carlo scenario sweeps
- ``tstats``    two-sample t statistics / p-values from an expression matrix

Exit codes: 0 success, 2 malformed input or bad parameters, 3 estimation
failure. All output files use UTF-8 with LF line endings and shortest
round-trip decimals, so a fixed invocation produces identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .em import EmConfig, classification_error, em_result_to_dict, run_em
from .errors import (CliInputError, DegenerateSampleError, LogconmixError)
from .families import (Exponential, KnownComponent, Normal, StudentT,
                       Uniform, load_tabulated_csv, log_pdf_known)
from .logcon import (FitOptions, WeightedSample, eval_log_density,
                     fit_to_dict, fit_weighted_logconcave)
from .simulate import ScenarioSpec, ScenarioSummary, run_scenario, summary_table
from .special import student_t_two_sided_p

__all__ = ["main", "parse_f0_spec"]


def parse_f0_spec(text: str) -> KnownComponent:
    """Parse an f0 description such as ``normal:0,2`` or ``table:f0.csv``."""
    name, sep, rest = text.partition(":")
    if not sep:
        raise CliInputError(
            f"f0 spec {text!r} has no ':'; expected "
            "normal:MU,SIGMA | uniform:A,B | exp:LAMBDA | t:NU | table:PATH")
    name = name.strip().lower()
    if name == "table":
        if not rest:
            raise CliInputError("f0 spec 'table:' is missing a file path")
        return load_tabulated_csv(rest)
    try:
        params = [float(tok) for tok in rest.split(",")] if rest else []
    except ValueError as exc:
        raise CliInputError(f"f0 spec {text!r}: non-numeric parameter ({exc})")
    try:
        if name == "normal":
            if len(params) != 2:
                raise CliInputError(
                    f"f0 spec 'normal' needs MU,SIGMA; got {len(params)} values")
            return Normal(params[0], params[1])
        if name == "uniform":
            if len(params) != 2:
                raise CliInputError(
                    f"f0 spec 'uniform' needs A,B; got {len(params)} values")
            return Uniform(params[0], params[1])
        if name == "exp":
            if len(params) != 1:
                raise CliInputError(
                    f"f0 spec 'exp' needs LAMBDA; got {len(params)} values")
            return Exponential(params[0])
        if name == "t":
            if len(params) != 1:
                raise CliInputError(
                    f"f0 spec 't' needs NU; got {len(params)} values")
            return StudentT(params[0])
    except ValueError as exc:
        raise CliInputError(f"f0 spec {text!r}: {exc}")
    raise CliInputError(
        f"unknown f0 family {name!r}; expected normal, uniform, exp, t or table")


def _parse_grid(text: str) -> Tuple[float, float, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise CliInputError(f"grid spec {text!r} must be LO,HI,COUNT")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise CliInputError(f"grid spec {text!r}: {exc}")
    if not (lo < hi):
        raise CliInputError(f"grid spec {text!r}: LO must be < HI")
    if count < 2:
        raise CliInputError(f"grid spec {text!r}: COUNT must be >= 2")
    return lo, hi, count


def _read_value_csv(path: str) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Read a `x` or `x,label` CSV; returns (values, labels-or-None)."""
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CliInputError(f"cannot open {path}: {exc}")
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CliInputError(f"{path}: empty file; expected header 'x'")
        header = [h.strip() for h in header]
        if header not in (["x"], ["x", "label"]):
            raise CliInputError(
                f"{path} line 1: header must be 'x' or 'x,label', "
                f"got {','.join(header)!r}")
        labeled = len(header) == 2
        xs: List[float] = []
        labels: List[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CliInputError(
                    f"{path} line {lineno}: expected {len(header)} fields, "
                    f"got {len(row)}")
            try:
                xs.append(float(row[0]))
            except ValueError:
                raise CliInputError(
                    f"{path} line {lineno}: field 'x' is not numeric: "
                    f"{row[0]!r}")
            if labeled:
                tok = row[1].strip()
                if tok not in ("0", "1"):
                    raise CliInputError(
                        f"{path} line {lineno}: field 'label' must be 0 or 1, "
                        f"got {tok!r}")
                labels.append(float(tok))
    if not xs:
        raise CliInputError(f"{path}: no data rows")
    values = np.asarray(xs, dtype=float)
    return values, (np.asarray(labels, dtype=float) if labeled else None)


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _write_json(path: str, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2) + "\n")


def _density_grid_rows(grid: np.ndarray, f0: Optional[KnownComponent],
                       fit, p_hat: Optional[float]) -> str:
    """Grid CSV: for mixture fits 'x,f0,f_hat,g_hat,posterior'; for bare
    log-concave fits 'x,f_hat'. Posterior is 0 wherever the fitted mixture
    density vanishes (outside both supports)."""
    f_hat = np.exp(eval_log_density(fit, grid))
    lines: List[str] = []
    if f0 is None:
        lines.append("x,f_hat")
        for x, fh in zip(grid, f_hat):
            lines.append(f"{float(x)!r},{float(fh)!r}")
    else:
        f0_vals = np.exp(log_pdf_known(f0, grid))
        g_hat = (1.0 - p_hat) * f0_vals + p_hat * f_hat
        with np.errstate(invalid="ignore", divide="ignore"):
            posterior = np.where(g_hat > 0.0, p_hat * f_hat / np.where(
                g_hat > 0.0, g_hat, 1.0), 0.0)
        lines.append("x,f0,f_hat,g_hat,posterior")
        for x, a, b, c, d in zip(grid, f0_vals, f_hat, g_hat, posterior):
            lines.append(",".join(repr(float(v)) for v in (x, a, b, c, d)))
    return "\n".join(lines) + "\n"


def _cmd_fit(args: argparse.Namespace) -> int:
    f0 = parse_f0_spec(args.f0)
    values, labels = _read_value_csv(args.input)
    config = EmConfig(p_init=args.p_init, max_iters=args.max_iters,
                      tol_loglik=args.tol_loglik,
                      min_component_mass=args.min_component_mass,
                      fit_options=FitOptions(tol_kkt=args.tol_kkt),
                      init=args.init)
    result = run_em(values, f0, config)
    payload = em_result_to_dict(result)
    if labels is not None:
        payload["cla_error"] = classification_error(result.omega, labels)
    if args.out:
        _write_json(args.out, payload)
    if args.grid_out:
        lo, hi, count = args.grid if args.grid is not None else (
            result.fit.support[0], result.fit.support[1], 201)
        grid = np.linspace(lo, hi, count)
        _write_text(args.grid_out,
                    _density_grid_rows(grid, f0, result.fit, result.p_hat))
    print(f"p_hat = {result.p_hat!r}")
    print(f"identifiability = {result.identifiability.verdict}")
    if labels is not None:
        print(f"cla_error = {payload['cla_error']!r}")
    return 0


def _read_weighted_csv_cli(path: str) -> Tuple[np.ndarray, np.ndarray]:
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CliInputError(f"cannot open {path}: {exc}")
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CliInputError(f"{path}: empty file; expected header 'x,weight'")
        if [h.strip() for h in header] != ["x", "weight"]:
            raise CliInputError(
                f"{path} line 1: header must be 'x,weight', "
                f"got {','.join(header)!r}")
        xs: List[float] = []
        ws: List[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise CliInputError(
                    f"{path} line {lineno}: expected 2 fields, got {len(row)}")
            for field, name, dest in ((row[0], "x", xs), (row[1], "weight", ws)):
                try:
                    dest.append(float(field))
                except ValueError:
                    raise CliInputError(
                        f"{path} line {lineno}: field {name!r} is not "
                        f"numeric: {field!r}")
    if not xs:
        raise CliInputError(f"{path}: no data rows")
    return np.asarray(xs, dtype=float), np.asarray(ws, dtype=float)


def _cmd_logcx(args: argparse.Namespace) -> int:
    x, w = _read_weighted_csv_cli(args.input)
    sample = WeightedSample.from_observations(x, w)
    fit = fit_weighted_logconcave(sample,
                                  options=FitOptions(tol_kkt=args.tol_kkt))
    if args.out:
        _write_json(args.out, fit_to_dict(fit))
    if args.grid_out:
        lo, hi, count = args.grid if args.grid is not None else (
            fit.support[0], fit.support[1], 201)
        grid = np.linspace(lo, hi, count)
        _write_text(args.grid_out, _density_grid_rows(grid, None, fit, None))
    print(f"objective = {fit.objective!r}")
    print(f"converged = {fit.converged}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.full_profile:
        reps = args.reps if args.reps is not None else 200
        scenarios = []
        idx = 0
        for model_id in (1, 2, 3, 4, 5, 6):
            for p in (0.2, 0.5, 0.8):
                for n in (250, 500, 1000):
                    seed = int(np.random.SeedSequence(
                        entropy=args.seed,
                        spawn_key=(idx,)).generate_state(1)[0])
                    scenarios.append(ScenarioSpec(model_id=model_id, p=p,
                                                  n=n, reps=reps, seed=seed))
                    idx += 1
    else:
        reps = args.reps if args.reps is not None else 50
        try:
            scenarios = [ScenarioSpec(model_id=args.model, p=args.p,
                                      n=args.n, reps=reps, seed=args.seed)]
        except ValueError as exc:
            raise CliInputError(str(exc))
    summaries: List[ScenarioSummary] = []
    for scenario in scenarios:
        summaries.append(run_scenario(scenario, workers=args.workers))
    table = summary_table(summaries)
    if args.out:
        _write_text(args.out, table)
    else:
        sys.stdout.write(table)
    return 0


def _cmd_tstats(args: argparse.Namespace) -> int:
    m1 = args.group1_cols
    try:
        handle = open(args.input, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CliInputError(f"cannot open {args.input}: {exc}")
    with handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CliInputError(f"{args.input}: empty file; expected a header")
        has_id = bool(header) and header[0].lower() == "gene"
        n_data = len(header) - (1 if has_id else 0)
        if m1 < 2 or n_data - m1 < 2:
            raise CliInputError(
                f"need at least 2 columns per group: matrix has {n_data} "
                f"data columns, group1 takes {m1}")
        lines = ["gene,t,p_value"]
        df = n_data - 2
        rows_seen = 0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CliInputError(
                    f"{args.input} line {lineno}: expected {len(header)} "
                    f"fields, got {len(row)}")
            rows_seen += 1
            gene = row[0].strip() if has_id else str(rows_seen)
            data_fields = row[1:] if has_id else row
            try:
                vals = np.array([float(tok) for tok in data_fields])
            except ValueError as exc:
                raise CliInputError(
                    f"{args.input} line {lineno}: non-numeric entry ({exc})")
            t = _pooled_t(vals[:m1], vals[m1:])
            p = student_t_two_sided_p(t, float(df))
            lines.append(f"{gene},{t!r},{p!r}")
    if rows_seen == 0:
        raise CliInputError(f"{args.input}: no data rows")
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _pooled_t(group1: np.ndarray, group2: np.ndarray) -> float:
    """Two-sample t with pooled variance:
    t = (mean1 - mean2) / s, s^2 = pooled SSE / (m-2) * (1/n1 + 1/n2)."""
    n1, n2 = group1.size, group2.size
    diff = float(np.mean(group1) - np.mean(group2))
    sse = float(np.sum((group1 - np.mean(group1)) ** 2)
                + np.sum((group2 - np.mean(group2)) ** 2))
    s2 = sse / (n1 + n2 - 2) * (1.0 / n1 + 1.0 / n2)
    if s2 <= 0.0:
        if diff == 0.0:
            return 0.0
        return math.inf if diff > 0.0 else -math.inf
    return diff / math.sqrt(s2)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logconmix",
        description="Two-component mixture estimation with a known component "
                    "and a log-concave unknown component.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_fit = sub.add_parser(
        "fit", help="fit the mixture to a CSV of raw values",
        description="Input: CSV with header 'x' (optionally 'x,label' with "
                    "label 1 = drawn from f0, enabling classification-error "
                    "reporting). Writes the estimate as JSON and, with "
                    "--grid-out, a density grid CSV "
                    "'x,f0,f_hat,g_hat,posterior'.")
    p_fit.add_argument("input", help="input CSV path")
    p_fit.add_argument("--f0", required=True,
                       help="known component: normal:MU,SIGMA | uniform:A,B | "
                            "exp:LAMBDA | t:NU | table:PATH")
    p_fit.add_argument("--out", help="output JSON path")
    p_fit.add_argument("--grid", type=_parse_grid, default=None,
                       metavar="LO,HI,COUNT",
                       help="density-export grid (default: fitted support, "
                            "201 points)")
    p_fit.add_argument("--grid-out", help="density grid CSV path")
    p_fit.add_argument("--init", choices=("pilot", "flat"), default="pilot",
                       help="starting responsibilities: 'pilot' "
                            "(density-ratio, default) or 'flat' (1 - p_init "
                            "everywhere)")
    p_fit.add_argument("--p-init", type=float, default=0.5)
    p_fit.add_argument("--max-iters", type=int, default=500)
    p_fit.add_argument("--tol-loglik", type=float, default=1e-8)
    p_fit.add_argument("--min-component-mass", type=float, default=1e-6)
    p_fit.add_argument("--tol-kkt", type=float, default=1e-8)

    p_logcx = sub.add_parser(
        "logcx", help="weighted log-concave density fit",
        description="Input: CSV with header 'x,weight'. Duplicate x values "
                    "are merged by summing weights. Writes the fit as JSON "
                    "and, with --grid-out, a grid CSV 'x,f_hat'.")
    p_logcx.add_argument("input", help="input CSV path")
    p_logcx.add_argument("--out", help="output JSON path")
    p_logcx.add_argument("--grid", type=_parse_grid, default=None,
                         metavar="LO,HI,COUNT")
    p_logcx.add_argument("--grid-out", help="density grid CSV path")
    p_logcx.add_argument("--tol-kkt", type=float, default=1e-8)

    p_sim = sub.add_parser(
        "simulate", help="Monte-Carlo scenario sweep",
        description="Writes a scenario summary CSV (columns model,p,n,reps,"
                    "bias_p,mse_p,bias_mu,mse_mu,mean_cla_error,failures). "
                    "Identical flags give identical output bytes, for any "
                    "--workers value.")
    p_sim.add_argument("--model", type=int, default=1, help="model id 1-6")
    p_sim.add_argument("--p", type=float, default=0.5)
    p_sim.add_argument("--n", type=int, default=500)
    p_sim.add_argument("--reps", type=int, default=None,
                       help="replications (default 50; 200 with "
                            "--full-profile)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.add_argument("--out", help="output CSV path (default: stdout)")
    p_sim.add_argument("--full-profile", action="store_true",
                       help="run the full grid: models 1-6 x p in "
                            "{0.2,0.5,0.8} x n in {250,500,1000}")

    p_t = sub.add_parser(
        "tstats", help="two-sample t statistics from an expression matrix",
        description="Input: CSV matrix with one header row; if the first "
                    "header field is 'gene' it names an identifier column, "
                    "otherwise genes are numbered from 1. The first "
                    "--group1-cols data columns form group 1, the rest group "
                    "2. Output: 'gene,t,p_value' with two-sided p-values "
                    "from the t distribution with m-2 degrees of freedom.")
    p_t.add_argument("input", help="input CSV path")
    p_t.add_argument("--group1-cols", type=int, required=True,
                     help="number of leading data columns in group 1")
    p_t.add_argument("--out", help="output CSV path (default: stdout)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return exc.code if isinstance(exc.code, int) else 2
        if getattr(args, "grid", None) is not None and not args.grid_out:
            raise CliInputError("--grid requires --grid-out")
        if args.subcommand == "fit":
            return _cmd_fit(args)
        if args.subcommand == "logcx":
            return _cmd_logcx(args)
        if args.subcommand == "simulate":
            return _cmd_simulate(args)
        if args.subcommand == "tstats":
            return _cmd_tstats(args)
        parser.error(f"unknown subcommand {args.subcommand!r}")
    except (CliInputError, DegenerateSampleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return 2
    except LogconmixError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return 3
    except FloatingPointError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
