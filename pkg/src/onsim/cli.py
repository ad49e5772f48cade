"""Command line interface.

Subcommands: gap, simulate, floquet, beats, scan.  Exit codes:

    0  success
    2  configuration or validation error
    3  numerical failure
    4  resonance gate failed (scan --assert-stable)

All numeric output uses 17 significant digits; identical invocations
produce byte-identical output.  A JSON config file (--config) may supply
any long flag by name; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import floquet as fl
from .analysis import beat_report, extract_envelope
from .dynamics import S_MIN, IntegratorConfig, integrate
from .errors import NumericalError, SimulationError, ValidationError
from .formats import format_float, render_json
from .potential import Potential
from .scan import (
    GridSpec,
    assert_no_resonance,
    default_grid,
    records_to_csv,
    run_scan,
)
from .thermal import build_setup, gap_residual, matsubara_x0, solve_gap_equation

__all__ = ["main"]


def _parse_beta(text) -> float:
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        stripped = str(text).strip().lower()
        if stripped in ("inf", "+inf", "infinity"):
            return math.inf
        try:
            value = float(stripped)
        except ValueError:
            raise ValidationError(f"beta {text!r} is neither a number nor 'inf'") from None
    if not (value > 0.0):
        raise ValidationError("beta must be positive")
    return value


def _float_list(text: str) -> tuple[float, ...]:
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    if not items:
        raise ValidationError("empty value list")
    return tuple(_parse_beta(t) if t.lower() == "inf" else float(t) for t in items)


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError("config file must contain a JSON object")
    return data


def _resolve(ns, key: str, cfg: dict, default=None):
    """Flag value if given, else config file entry, else default."""
    attr = key.replace("-", "_")
    value = getattr(ns, attr, None)
    if value is None:
        value = cfg.get(key, default)
    return value


def _resolve_model(ns, cfg) -> Potential:
    coeffs = _resolve(ns, "coeffs", cfg)
    w = _resolve(ns, "w", cfg)
    lam = ns.lam if ns.lam is not None else cfg.get("lambda")
    if coeffs is not None and (w is not None or lam is not None):
        raise ValidationError("give either --coeffs or --w/--lambda, not both")
    if coeffs is not None:
        return Potential.parse(str(coeffs))
    if w is None:
        raise ValidationError("potential missing: give --coeffs or --w [--lambda]")
    return Potential.from_w_lambda(float(w), float(lam) if lam is not None else 0.0)


def _resolve_integrator(ns, cfg, stride=None) -> IntegratorConfig:
    rtol = _resolve(ns, "rtol", cfg, 1e-10)
    atol = _resolve(ns, "atol", cfg, 1e-12)
    return IntegratorConfig(rtol=float(rtol), atol=float(atol), output_stride=stride)


def _write_output(ns, text: str) -> None:
    if getattr(ns, "out", None):
        with open(ns.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _resolve_t_end(ns, cfg, setup, model, config) -> float:
    t_end = _resolve(ns, "t-end", cfg)
    n_periods = _resolve(ns, "n-periods", cfg)
    if (t_end is None) == (n_periods is None):
        raise ValidationError("give exactly one of --t-end and --n-periods")
    if t_end is not None:
        return float(t_end)
    n = int(n_periods)
    if n < 1:
        raise ValidationError("--n-periods must be >= 1")
    if setup.s > S_MIN:
        period = fl.period_by_events(setup, model, config).period
    else:
        # no x oscillation: count perturbation cycles instead
        period = 2.0 * math.pi / setup.omega_eff
    return n * period


# -- subcommands ------------------------------------------------------------


def _cmd_gap(ns) -> int:
    cfg = _load_config(ns.config) if ns.config else {}
    model = _resolve_model(ns, cfg)
    beta = _parse_beta(_require(ns, cfg, "beta"))
    tol = float(_resolve(ns, "tol", cfg, 1e-12))
    x0 = solve_gap_equation(model, beta, tol)
    omega = math.sqrt(2.0 * model.derivative(x0))
    residual = gap_residual(model, beta, x0)
    line = (
        f"x0={format_float(x0)} omega={format_float(omega)} "
        f"residual={format_float(residual)}"
    )
    oracle_n = _resolve(ns, "oracle", cfg)
    if oracle_n is not None:
        oracle = matsubara_x0(omega, beta, int(oracle_n))
        line += f" oracle={format_float(oracle)}"
    _write_output(ns, line + "\n")
    return 0


def _require(ns, cfg, key):
    value = _resolve(ns, key, cfg)
    if value is None:
        raise ValidationError(f"--{key} is required")
    return value


def _build_setup(ns, cfg):
    model = _resolve_model(ns, cfg)
    beta = _parse_beta(_require(ns, cfg, "beta"))
    s = float(_require(ns, cfg, "s"))
    return model, build_setup(model, beta, s)


def _cmd_simulate(ns) -> int:
    cfg = _load_config(ns.config) if ns.config else {}
    model, setup = _build_setup(ns, cfg)
    stride = _resolve(ns, "stride", cfg)
    config = _resolve_integrator(ns, cfg, float(stride) if stride else None)
    t_end = _resolve_t_end(ns, cfg, setup, model, config)
    traj = integrate(setup, model, config, t_end)
    lines = ["t,x,x_dot,u,u_dot,energy_x"]
    for i in range(len(traj)):
        lines.append(
            ",".join(
                format_float(v)
                for v in (
                    traj.t[i],
                    traj.x[i],
                    traj.x_dot[i],
                    traj.u[i],
                    traj.u_dot[i],
                    traj.energy_x[i],
                )
            )
        )
    _write_output(ns, "\n".join(lines) + "\n")
    return 0


def _cmd_floquet(ns) -> int:
    cfg = _load_config(ns.config) if ns.config else {}
    model, setup = _build_setup(ns, cfg)
    config = _resolve_integrator(ns, cfg)
    estimate = fl.period_by_events(setup, model, config)
    x_f = fl.find_inner_turning_point(setup, model)
    mono = fl.compute_monodromy(setup, model, config, estimate.period)
    payload = {
        "period": mono.period,
        "x_f": x_f,
        "monodromy": [list(row) for row in mono.matrix],
        "trace": mono.trace,
        "det_error": mono.det_error,
        "symmetry_error": mono.symmetry_error,
        "multipliers": [
            {"re": m.real, "im": m.imag} for m in mono.multipliers
        ],
        "classification": mono.classification,
    }
    _write_output(ns, render_json(payload) + "\n")
    return 0


def _cmd_beats(ns) -> int:
    cfg = _load_config(ns.config) if ns.config else {}
    model, setup = _build_setup(ns, cfg)
    stride = _resolve(ns, "stride", cfg)
    config = _resolve_integrator(ns, cfg, float(stride) if stride else None)
    t_end = _resolve_t_end(ns, cfg, setup, model, config)
    late_fraction = float(_resolve(ns, "late-fraction", cfg, 0.2))
    traj = integrate(setup, model, config, t_end)
    envelope = extract_envelope(traj)
    report = beat_report(envelope, late_fraction)
    if ns.envelope_csv:
        rows = ["t,amplitude"] + [
            f"{format_float(t)},{format_float(a)}"
            for t, a in zip(envelope.times, envelope.amplitudes)
        ]
        with open(ns.envelope_csv, "w", encoding="utf-8") as fh:
            fh.write("\n".join(rows) + "\n")
    _write_output(ns, render_json(report.to_dict()) + "\n")
    return 0


def _grid_from_cli(ns, cfg) -> GridSpec:
    config = _resolve_integrator(ns, cfg)
    if ns.default_grid:
        base = default_grid()
        return GridSpec(
            w=base.w, lam=base.lam, beta=base.beta, s=base.s, config=config
        )
    if ns.grid:
        spec = _load_config(ns.grid)
        kwargs = {}
        if "coeffs" in spec:
            kwargs["coeffs"] = tuple(str(c) for c in spec["coeffs"])
        if "w" in spec:
            kwargs["w"] = tuple(float(v) for v in spec["w"])
        if "lambda" in spec:
            kwargs["lam"] = tuple(float(v) for v in spec["lambda"])
        beta = spec.get("beta")
        s = spec.get("s")
        if beta is None or s is None:
            raise ValidationError("grid file needs beta and s axes")
        kwargs["beta"] = tuple(_parse_beta(b) for b in beta)
        kwargs["s"] = tuple(float(v) for v in s)
        if "cap" in spec:
            kwargs["cap"] = int(spec["cap"])
        return GridSpec(config=config, **kwargs)
    axes = {}
    if ns.coeffs_values:
        axes["coeffs"] = tuple(
            c.strip() for c in ns.coeffs_values.split(";") if c.strip()
        )
    if ns.w_values:
        axes["w"] = _float_list(ns.w_values)
    if ns.lambda_values:
        axes["lam"] = _float_list(ns.lambda_values)
    if not axes:
        raise ValidationError(
            "give --grid FILE, --default-grid, or inline axis flags"
        )
    if ns.beta_values is None or ns.s_values is None:
        raise ValidationError("inline grids need --beta-values and --s-values")
    axes["beta"] = tuple(_parse_beta(b) for b in ns.beta_values.split(","))
    axes["s"] = _float_list(ns.s_values)
    return GridSpec(config=config, **axes)


def _cmd_scan(ns) -> int:
    cfg = _load_config(ns.config) if ns.config else {}
    grid = _grid_from_cli(ns, cfg)
    records = run_scan(grid, jobs=ns.jobs)
    _write_output(ns, records_to_csv(records))
    failed = [r for r in records if r.error is not None]
    for r in failed:
        print(f"scan point failed: {r.error}", file=sys.stderr)
    if ns.assert_stable is not None:
        if failed:
            print(
                "cannot certify stability: some grid points failed",
                file=sys.stderr,
            )
            return 3
        if not assert_no_resonance(records, ns.assert_stable):
            print(
                f"resonance gate failed: multipliers leave the unit circle "
                f"beyond {ns.assert_stable:g} or resonant points found",
                file=sys.stderr,
            )
            return 4
    return 0


# -- parser -----------------------------------------------------------------


def _add_model_flags(p):
    p.add_argument(
        "--coeffs",
        help="potential coefficients 'k:c[,k:c...]' with integer exponents k >= 1",
    )
    p.add_argument(
        "--w", type=float, help="harmonic frequency; shorthand for the term 1:(w^2/2)"
    )
    p.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        help="quartic coupling; shorthand for the term 2:(lambda/4)",
    )


def _add_common_flags(p, tolerances=True):
    p.add_argument("--config", help="JSON file supplying any long flag by name")
    p.add_argument("--out", help="write output to this file instead of stdout")
    if tolerances:
        p.add_argument("--rtol", type=float, help="relative tolerance (default 1e-10)")
        p.add_argument("--atol", type=float, help="absolute tolerance (default 1e-12)")


def _add_setup_flags(p):
    p.add_argument("--beta", help="inverse temperature: a positive float or 'inf'")
    p.add_argument("--s", type=float, help="initial shift of the mean square displacement")


def _add_span_flags(p):
    p.add_argument("--t-end", type=float, help="integration time span")
    p.add_argument(
        "--n-periods",
        type=int,
        help="span as a number of oscillation periods (perturbation cycles when s = 0)",
    )
    p.add_argument("--stride", type=float, help="output sampling interval")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onsim",
        description="Thermal dynamics, Floquet stability and beat analysis "
        "of the large-N O(N) oscillator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gap", help="solve the gap equation for x0")
    _add_model_flags(p)
    p.add_argument("--beta", help="inverse temperature: a positive float or 'inf'")
    p.add_argument("--tol", type=float, help="residual tolerance (default 1e-12)")
    p.add_argument(
        "--oracle",
        type=int,
        metavar="N_MAX",
        help="also print the Matsubara-sum cross-check with this cutoff",
    )
    _add_common_flags(p, tolerances=False)
    p.set_defaults(func=_cmd_gap)

    p = sub.add_parser("simulate", help="integrate the coupled (x, u) system to CSV")
    _add_model_flags(p)
    _add_setup_flags(p)
    _add_span_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("floquet", help="period, monodromy and stability to JSON")
    _add_model_flags(p)
    _add_setup_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=_cmd_floquet)

    p = sub.add_parser("beats", help="envelope and beat statistics to JSON")
    _add_model_flags(p)
    _add_setup_flags(p)
    _add_span_flags(p)
    p.add_argument(
        "--late-fraction",
        type=float,
        help="fraction of the run treated as the late window (default 0.2)",
    )
    p.add_argument(
        "--envelope-csv",
        metavar="PATH",
        help="also write the envelope series as t,amplitude CSV",
    )
    _add_common_flags(p)
    p.set_defaults(func=_cmd_beats)

    p = sub.add_parser("scan", help="grid scan for parametric resonance to CSV")
    p.add_argument("--grid", help="JSON grid file with axes w, lambda (or coeffs), beta, s")
    p.add_argument(
        "--default-grid",
        action="store_true",
        help="use the built-in 192-point standard grid",
    )
    p.add_argument("--w-values", help="comma list of w grid values")
    p.add_argument("--lambda-values", help="comma list of lambda grid values")
    p.add_argument(
        "--coeffs-values",
        help="semicolon list of coefficient strings (replaces w/lambda axes)",
    )
    p.add_argument("--beta-values", help="comma list of beta values ('inf' allowed)")
    p.add_argument("--s-values", help="comma list of shift values")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument(
        "--assert-stable",
        type=float,
        nargs="?",
        const=1e-6,
        metavar="TOL",
        help="exit 4 unless all multipliers sit on the unit circle within TOL "
        "(default 1e-6) and no point is resonant",
    )
    _add_common_flags(p)
    p.set_defaults(func=_cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return ns.func(ns)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
