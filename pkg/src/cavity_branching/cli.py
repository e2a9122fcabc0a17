"""Command-line front end.

Subcommands: ``point`` (single-parameter-set branching report), ``dynamics``
(time series CSV), ``sweep`` (config-driven grid), ``figure`` (bundled
survey presets fig2/fig3a/fig3b/fig4/fig5) and ``selftest`` (the property
suites).  JSON config in, CSV/JSON out; command-line flags override config
values, which override built-in defaults.  All frequencies are in units of
the vacuum half-width unless ``--kappa`` overrides it.

Exit codes: 0 ok, 1 selftest failure, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import __version__, dynamics, model, spectral, sweep
from .errors import NumericalError, ParameterError
from .tables import format_value, render_csv, render_json_payload

_PARAM_DEFAULTS = {"gamma_b": 1.0, "gamma_c": 1.0, "delta_b": 0.0,
                   "delta_c": 0.0, "drive_g": 0.0, "drive_detuning": 0.0,
                   "kappa": 1.0}

# CLI flag destination -> SystemParams field
_FLAG_TO_FIELD = {"gamma_b": "gamma_b", "gamma_c": "gamma_c",
                  "delta_b": "delta_b", "delta_c": "delta_c",
                  "g": "drive_g", "delta": "drive_detuning", "kappa": "kappa"}

_ALLOWED_CONFIG_KEYS = {
    "point": {"params", "quadrature", "step", "route", "format", "out"},
    "dynamics": {"params", "step", "t_max", "n_samples", "format", "out"},
    "sweep": {"sweep", "quadrature", "step", "route", "format", "out"},
    "figure": {"quadrature", "step", "route", "format", "out"},
    "selftest": set(),
}

_FIGURE_NAMES = ("fig2", "fig3a", "fig3b", "fig4", "fig5")


def _load_config(path: str | None, command: str) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc}")
    if not isinstance(config, dict):
        raise ParameterError("config must be a JSON object")
    allowed = _ALLOWED_CONFIG_KEYS[command]
    unknown = sorted(set(config) - allowed)
    if unknown:
        raise ParameterError(
            f"config keys not valid for command {command!r}: {', '.join(unknown)}")
    return config


def _params_from(args, config: dict) -> model.SystemParams:
    values = dict(_PARAM_DEFAULTS)
    block = config.get("params", {})
    if not isinstance(block, dict):
        raise ParameterError("config 'params' must be an object")
    unknown = sorted(set(block) - set(_PARAM_DEFAULTS))
    if unknown:
        raise ParameterError(f"unknown parameter names in config: {', '.join(unknown)}")
    values.update(block)
    for flag, field in _FLAG_TO_FIELD.items():
        flag_value = getattr(args, flag, None)
        if flag_value is not None:
            values[field] = flag_value
    return model.validate(model.SystemParams(**values))


def _options_from(config: dict, key: str, cls):
    block = config.get(key, {})
    if not isinstance(block, dict):
        raise ParameterError(f"config {key!r} must be an object")
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(block) - fields)
    if unknown:
        raise ParameterError(f"unknown {key} option(s): {', '.join(unknown)}")
    return cls(**block).validated()


def _route_from(args, config: dict) -> str:
    route = args.route if getattr(args, "route", None) else config.get("route")
    return sweep.normalize_route(route or "quadrature")


def _format_from(args, config: dict, default: str) -> str:
    return args.format if getattr(args, "format", None) else config.get("format", default)


def _out_from(args, config: dict) -> str | None:
    return args.out if getattr(args, "out", None) else config.get("out")


def _write_text(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _config_echo(params: model.SystemParams, quad_opts, step_opts, route: str,
                 fmt: str) -> dict:
    """Config object that reproduces the run when fed back via --config."""
    return {
        "params": dataclasses.asdict(params),
        "quadrature": dataclasses.asdict(quad_opts),
        "step": dataclasses.asdict(step_opts),
        "route": route,
        "format": fmt,
    }


def cmd_point(args) -> int:
    config = _load_config(args.config, "point")
    params = _params_from(args, config)
    quad_opts = _options_from(config, "quadrature", spectral.QuadratureOptions)
    step_opts = _options_from(config, "step", dynamics.StepOptions)
    route = _route_from(args, config)
    fmt = _format_from(args, config, "text")

    poles = model.find_poles(params)
    result_q = result_t = None
    if route in ("quadrature", "both"):
        result_q = spectral.branching_ratio(params, quad_opts)
    if route in ("time_domain", "both"):
        result_t = dynamics.branching_ratio_time_domain(params, step_opts)
    primary = result_q if result_q is not None else result_t
    disagreement = None
    if result_q is not None and result_t is not None:
        disagreement = max(abs(result_q.p_b - result_t.p_b),
                           abs(result_q.p_c - result_t.p_c))

    if fmt == "json":
        payload = {
            "config": _config_echo(params, quad_opts, step_opts, route, fmt),
            "p_b": primary.p_b, "p_c": primary.p_c, "ratio": primary.ratio,
            "err_b": primary.err_b, "err_c": primary.err_c,
            "ratio_err": primary.ratio_error(), "route": primary.route,
            "poles": [{"re": z.real, "im": z.imag,
                       "residue_re": r.real, "residue_im": r.imag}
                      for z, r in poles],
            "degenerate_poles": poles.degenerate,
        }
        if disagreement is not None:
            payload["disagreement"] = disagreement
        _write_text(_out_from(args, config), json.dumps(payload, indent=2) + "\n")
        return 0
    if fmt == "csv":
        columns = ["p_b", "p_c", "ratio", "err_b", "err_c", "route"]
        row = [primary.p_b, primary.p_c, primary.ratio, primary.err_b,
               primary.err_c, primary.route]
        if disagreement is not None:
            columns.append("disagreement")
            row.append(disagreement)
        for k, (z, _) in enumerate(poles, start=1):
            columns += [f"pole{k}_re", f"pole{k}_im"]
            row += [z.real, z.imag]
        metadata = {name: getattr(params, name) for name in _PARAM_DEFAULTS}
        _write_text(_out_from(args, config), render_csv(columns, [tuple(row)], metadata))
        return 0

    lines = [
        f"P_b   = {format_value(primary.p_b)} +- {primary.err_b:.3e}",
        f"P_c   = {format_value(primary.p_c)} +- {primary.err_c:.3e}",
        f"ratio = {format_value(primary.ratio)} +- {primary.ratio_error():.3e}",
        f"route = {primary.route}",
        "poles (root, residue):",
    ]
    for z, r in poles:
        lines.append(f"  z = {format_value(z.real)} {z.imag:+.12g}i"
                     f"    r = {format_value(r.real)} {r.imag:+.12g}i")
    if poles.degenerate:
        lines.append("  (degenerate pole pair present)")
    if disagreement is not None:
        lines.append(f"disagreement (quadrature vs time-domain) = {disagreement:.3e}")
    _write_text(_out_from(args, config), "\n".join(lines) + "\n")
    return 0


def cmd_dynamics(args) -> int:
    config = _load_config(args.config, "dynamics")
    params = _params_from(args, config)
    step_opts = _options_from(config, "step", dynamics.StepOptions)
    fmt = _format_from(args, config, "csv")
    t_max = args.t_max if args.t_max is not None else config.get("t_max")
    if t_max is None:
        t_max = dynamics.suggest_t_max(params)
    n_samples = args.samples if args.samples is not None else config.get("n_samples")

    traj = dynamics.evolve(params, t_max, step_opts, n_samples=n_samples)
    columns = ["t", "alpha_re", "alpha_im", "u_re", "u_im", "v_b_re", "v_b_im",
               "v_c_re", "v_c_im", "alpha_sq", "rho_bb", "rho_cc", "norm"]
    norm = traj.norm
    rows = []
    for k, t in enumerate(traj.times):
        a, u, vb, vc = traj.states[k]
        rows.append((float(t), a.real, a.imag, u.real, u.imag, vb.real, vb.imag,
                     vc.real, vc.imag, float(abs(a) ** 2),
                     float(traj.rho_b[k]), float(traj.rho_c[k]), float(norm[k])))
    metadata = {name: getattr(params, name) for name in _PARAM_DEFAULTS}
    metadata["t_max"] = float(t_max)
    out = _out_from(args, config)
    if fmt == "json":
        payload = render_json_payload(columns, rows, metadata)
        payload["config"] = {"params": dataclasses.asdict(params),
                             "step": dataclasses.asdict(step_opts),
                             "t_max": float(t_max)}
        _write_text(out, json.dumps(payload, indent=2) + "\n")
    else:
        _write_text(out, render_csv(columns, rows, metadata))
    return 0


def _axis_from_config(entry) -> sweep.GridAxis:
    if not isinstance(entry, dict) or "name" not in entry:
        raise ParameterError("each sweep axis needs a 'name'")
    name = entry["name"]
    if "values" in entry:
        values = tuple(float(v) for v in entry["values"])
    elif {"start", "stop", "num"} <= set(entry):
        values = tuple(np.linspace(float(entry["start"]), float(entry["stop"]),
                                   int(entry["num"])))
    else:
        raise ParameterError(
            f"axis {name!r} needs 'values' or 'start'/'stop'/'num'")
    return sweep.GridAxis(name=name, values=values)


def cmd_sweep(args) -> int:
    config = _load_config(args.config, "sweep")
    if "sweep" not in config:
        raise ParameterError("sweep command needs a config with a 'sweep' block")
    block = config["sweep"]
    if not isinstance(block, dict) or "axes" not in block:
        raise ParameterError("config 'sweep' block needs 'axes'")
    base_values = dict(_PARAM_DEFAULTS)
    base_values.update(block.get("base", {}))
    unknown = sorted(set(base_values) - set(_PARAM_DEFAULTS))
    if unknown:
        raise ParameterError(f"unknown base parameter(s): {', '.join(unknown)}")
    base = model.validate(model.SystemParams(**base_values))
    axes = tuple(_axis_from_config(entry) for entry in block["axes"])
    spec = sweep.GridSpec(axes=axes, base=base,
                          metadata={"sweep": "config", **{n: getattr(base, n) for n in _PARAM_DEFAULTS}})
    quad_opts = _options_from(config, "quadrature", spectral.QuadratureOptions)
    step_opts = _options_from(config, "step", dynamics.StepOptions)
    route = _route_from(args, config)
    table = sweep.run_sweep(spec, route, quad_opts, step_opts,
                            n_workers=args.workers)
    _emit_table(table, _format_from(args, config, "csv"), _out_from(args, config))
    return 0


def _emit_table(table: sweep.SweepTable, fmt: str, out: str | None) -> None:
    if fmt == "json":
        _write_text(out, json.dumps(table.to_json_payload(), indent=2) + "\n")
    else:
        _write_text(out, table.to_csv())


def cmd_figure(args) -> int:
    config = _load_config(args.config, "figure")
    quad_opts = _options_from(config, "quadrature", spectral.QuadratureOptions)
    step_opts = _options_from(config, "step", dynamics.StepOptions)
    route = _route_from(args, config)
    fmt = _format_from(args, config, "csv")
    out = _out_from(args, config)
    name = args.name

    common = {}
    if args.gamma_b is not None:
        common["gamma_b"] = args.gamma_b
    if args.gamma_c is not None:
        common["gamma_c"] = args.gamma_c

    if name == "fig3b":
        kwargs = dict(common)
        kwargs.pop("gamma_b", None)
        kwargs.pop("gamma_c", None)
        if args.t_max is not None:
            kwargs["t_max"] = args.t_max
        if args.samples is not None:
            kwargs["n_samples"] = args.samples
        if args.delta_b is not None:
            kwargs["delta_b"] = args.delta_b
        if args.delta_c is not None:
            kwargs["delta_c"] = args.delta_c
        if args.g is not None:
            kwargs["drive_g"] = args.g
        if args.delta is not None:
            kwargs["drive_detuning"] = args.delta
        traj_two, traj_one, metadata = sweep.preset_fig3b(step_opts=step_opts,
                                                          **kwargs)
        metadata["route"] = "time_domain"
        columns = ["t", "alpha_sq_two_channel", "alpha_sq_single_channel"]
        rows = [(float(t), float(p2), float(p1))
                for t, p2, p1 in zip(traj_two.times,
                                     traj_two.excited_population,
                                     traj_one.excited_population)]
        if fmt == "json":
            _write_text(out, json.dumps(render_json_payload(columns, rows, metadata),
                                        indent=2) + "\n")
        else:
            _write_text(out, render_csv(columns, rows, metadata))
        return 0

    kwargs = dict(common)
    if args.points is not None:
        kwargs["n_points"] = args.points
    if name == "fig2":
        if args.omega_bc is not None:
            kwargs["omega_bc"] = args.omega_bc
        if args.range is not None:
            kwargs["delta_range"] = tuple(args.range)
        spec = sweep.preset_fig2(**kwargs)
    elif name == "fig3a":
        if args.range is not None:
            kwargs["g_range"] = tuple(args.range)
        if args.delta_b is not None:
            kwargs["delta_b"] = args.delta_b
        if args.delta is not None:
            kwargs["drive_detuning"] = args.delta
        spec = sweep.preset_fig3a(**kwargs)
    else:
        if args.range is not None:
            kwargs["delta_range"] = tuple(args.range)
        if args.g_values is not None:
            kwargs["g_values"] = args.g_values
        if args.delta_b is not None:
            kwargs["delta_b"] = args.delta_b
        preset = sweep.preset_fig4 if name == "fig4" else sweep.preset_fig5
        spec = preset(**kwargs)

    table = sweep.run_sweep(spec, route, quad_opts, step_opts,
                            n_workers=args.workers)
    _emit_table(table, fmt, out)
    return 0


def cmd_selftest(args) -> int:
    from . import selftest

    names = args.suite or None
    if names:
        unknown = [n for n in names if n not in selftest.SUITES]
        if unknown:
            raise ParameterError(
                f"unknown suite(s) {', '.join(unknown)}; valid: "
                f"{', '.join(selftest.SUITES)}")
    results = selftest.run_suites(names=names, fast=args.fast)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status}  {res.name:<22s} ({res.seconds:7.2f} s, "
              f"{res.n_checks} checks)  {res.detail}")
    failed = [res.name for res in results if not res.passed]
    if failed:
        print(f"FAILED: {failed[0]}")
        return 1
    print("all suites passed")
    return 0


def _comma_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavity-branching",
        description="Branching ratios for a driven four-level emitter in a "
                    "Lorentzian structured vacuum.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, formats, default_format):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=formats, default=None,
                       help=f"output format (default {default_format})")

    def add_params(p):
        p.add_argument("--gamma-b", dest="gamma_b", type=float, default=None)
        p.add_argument("--gamma-c", dest="gamma_c", type=float, default=None)
        p.add_argument("--delta-b", dest="delta_b", type=float, default=None)
        p.add_argument("--delta-c", dest="delta_c", type=float, default=None)
        p.add_argument("--g", dest="g", type=float, default=None,
                       help="drive coupling G (half Rabi frequency)")
        p.add_argument("--delta", dest="delta", type=float, default=None,
                       help="drive detuning")
        p.add_argument("--kappa", dest="kappa", type=float, default=None,
                       help="vacuum half-width (default 1; all other "
                            "frequencies are in these units)")

    def add_route(p):
        p.add_argument("--route", choices=["quadrature", "time-domain", "both"],
                       default=None)

    p_point = sub.add_parser("point", help="single-parameter-set report")
    add_common(p_point, ["text", "json", "csv"], "text")
    add_params(p_point)
    add_route(p_point)
    p_point.set_defaults(func=cmd_point)

    p_dyn = sub.add_parser("dynamics", help="time-domain amplitudes as CSV")
    add_common(p_dyn, ["csv", "json"], "csv")
    add_params(p_dyn)
    p_dyn.add_argument("--t-max", dest="t_max", type=float, default=None,
                       help="integration time (default: auto until decayed)")
    p_dyn.add_argument("--samples", type=int, default=None,
                       help="uniform sample count (default: integrator steps)")
    p_dyn.set_defaults(func=cmd_dynamics)

    p_sweep = sub.add_parser("sweep", help="config-driven parameter grid")
    add_common(p_sweep, ["csv", "json"], "csv")
    add_route(p_sweep)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_fig = sub.add_parser("figure", help="bundled survey presets")
    p_fig.add_argument("name", choices=_FIGURE_NAMES)
    add_common(p_fig, ["csv", "json"], "csv")
    add_params(p_fig)
    add_route(p_fig)
    p_fig.add_argument("--points", type=int, default=None)
    p_fig.add_argument("--range", nargs=2, type=float, default=None,
                       metavar=("LO", "HI"), help="scan range of the preset axis")
    p_fig.add_argument("--g-values", dest="g_values", type=_comma_floats,
                       default=None, help="comma-separated drive strengths")
    p_fig.add_argument("--omega-bc", dest="omega_bc", type=float, default=None,
                       help="final-state separation (fig2)")
    p_fig.add_argument("--t-max", dest="t_max", type=float, default=None)
    p_fig.add_argument("--samples", type=int, default=None)
    p_fig.add_argument("--workers", type=int, default=1)
    p_fig.set_defaults(func=cmd_figure)

    p_self = sub.add_parser("selftest", help="run the property suites")
    p_self.add_argument("--fast", action="store_true",
                        help="reduced draw counts (seconds instead of minutes)")
    p_self.add_argument("--suite", action="append", default=None,
                        help="run only the named suite (repeatable)")
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
