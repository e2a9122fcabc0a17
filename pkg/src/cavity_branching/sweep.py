"""Parameter-grid execution engine and the bundled survey presets.

Grids are expressed in units of the vacuum half-width (``kappa = 1`` in the
base parameters unless overridden).  Every grid point is an independent
pure computation; execution may be parallel, but tables come out in
row-major grid order with content independent of the worker count.
"""

from __future__ import annotations

import functools
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import dynamics, model, spectral
from .errors import NumericalError, ParameterError
from .tables import render_csv, render_json_payload

_PARAM_FIELDS = ("gamma_b", "gamma_c", "delta_b", "delta_c",
                 "drive_g", "drive_detuning", "kappa")

ROUTE_ALIASES = {"quadrature": "quadrature", "time-domain": "time_domain",
                 "time_domain": "time_domain", "both": "both"}


def normalize_route(route: str) -> str:
    try:
        return ROUTE_ALIASES[route]
    except KeyError:
        raise ParameterError(
            f"route must be one of quadrature, time-domain, both; got {route!r}")


@dataclass(frozen=True)
class GridAxis:
    name: str
    values: tuple[float, ...]


@dataclass
class GridSpec:
    """Axes over parameter (or derived) names, a base point, and an evaluator.

    ``derive`` maps (base params, axis-value dict) to the SystemParams of a
    grid point; when absent, axis names must be SystemParams fields and are
    substituted directly.  ``evaluator`` computes the per-point output
    columns (default: branching-ratio columns).
    """

    axes: tuple[GridAxis, ...]
    base: model.SystemParams
    derive: Callable[[model.SystemParams, Mapping[str, float]], model.SystemParams] | None = None
    evaluator: Callable | None = None
    metadata: dict = field(default_factory=dict)

    def point_params(self, values: Mapping[str, float]) -> model.SystemParams:
        if self.derive is not None:
            return self.derive(self.base, values)
        return self.base.replace(**dict(values))

    def points(self):
        names = [axis.name for axis in self.axes]
        for combo in itertools.product(*(axis.values for axis in self.axes)):
            values = dict(zip(names, combo))
            yield combo, self.point_params(values)

    def n_points(self) -> int:
        n = 1
        for axis in self.axes:
            n *= len(axis.values)
        return n

    def validated(self) -> "GridSpec":
        if not self.axes:
            raise ParameterError("grid needs at least one axis")
        for axis in self.axes:
            if len(axis.values) == 0:
                raise ParameterError(f"empty axis {axis.name!r}")
            if self.derive is None and axis.name not in _PARAM_FIELDS:
                raise ParameterError(
                    f"unknown axis name {axis.name!r}; expected one of "
                    f"{', '.join(_PARAM_FIELDS)}")
            if not all(np.isfinite(v) for v in axis.values):
                raise ParameterError(f"axis {axis.name!r} has non-finite values")
        model.validate(self.base)
        for _, params in self.points():
            model.validate(params)
        return self


@dataclass
class SweepTable:
    columns: list[str]
    rows: list[tuple]
    metadata: dict

    def to_csv(self) -> str:
        return render_csv(self.columns, self.rows, self.metadata)

    def to_json_payload(self) -> dict:
        return render_json_payload(self.columns, self.rows, self.metadata)

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def _route_populations(params, route, quad_opts, step_opts):
    """Populations by the requested route(s); primary values plus disagreement."""
    out = {}
    if route in ("quadrature", "both"):
        poles = model.find_poles(params)
        p_b, e_b = spectral.population("b", params, quad_opts, poles=poles)
        p_c, e_c = spectral.population("c", params, quad_opts, poles=poles)
        out.update(p_b=p_b, p_c=p_c, err_b=e_b, err_c=e_c)
    if route in ("time_domain", "both"):
        t_b, t_c, defect = dynamics.populations_time_domain(params, step_opts)
        if route == "both":
            out["disagreement"] = max(abs(out["p_b"] - t_b), abs(out["p_c"] - t_c))
        else:
            err = max(defect, 1e-12)
            out.update(p_b=t_b, p_c=t_c, err_b=err, err_c=err)
    return out


def evaluate_branching_point(params, route, quad_opts, step_opts) -> dict:
    """Default per-point outputs: populations, ratio, errors."""
    out = {"p_b": float("nan"), "p_c": float("nan"), "ratio": float("nan"),
           "err_b": float("nan"), "err_c": float("nan"), "route": route,
           "error": ""}
    if route == "both":
        out["disagreement"] = float("nan")
    try:
        pops = _route_populations(params, route, quad_opts, step_opts)
        out.update(pops)
        if out["p_c"] <= 0.0 or out["p_c"] < 10.0 * out["err_c"]:
            raise NumericalError(
                f"ratio undefined: P_c = {out['p_c']:.3e} consistent with zero")
        out["ratio"] = out["p_b"] / out["p_c"]
    except NumericalError as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def evaluate_normalized_populations_point(params, route, quad_opts, step_opts) -> dict:
    """Per-point outputs for the cavity-scan preset.

    Populations with both channels open are normalized by the sole-channel
    runs: R_b = P_b(gamma_b, gamma_c) / P_b(gamma_b, 0) and
    R_c = P_c(gamma_b, gamma_c) / P_c(0, gamma_c).
    """
    out = {"delta_b": params.delta_b, "delta_c": params.delta_c,
           "p_b": float("nan"), "p_c": float("nan"),
           "p_b_solo": float("nan"), "p_c_solo": float("nan"),
           "r_b": float("nan"), "r_c": float("nan"),
           "route": route, "error": ""}
    if route == "both":
        out["disagreement"] = float("nan")
    try:
        disagreements = []
        full = _route_populations(params, route, quad_opts, step_opts)
        solo_b = _route_populations(params.replace(gamma_c=0.0), route,
                                    quad_opts, step_opts)
        solo_c = _route_populations(params.replace(gamma_b=0.0), route,
                                    quad_opts, step_opts)
        for pops in (full, solo_b, solo_c):
            if "disagreement" in pops:
                disagreements.append(pops["disagreement"])
        out["p_b"] = full["p_b"]
        out["p_c"] = full["p_c"]
        out["p_b_solo"] = solo_b["p_b"]
        out["p_c_solo"] = solo_c["p_c"]
        out["r_b"] = full["p_b"] / solo_b["p_b"]
        out["r_c"] = full["p_c"] / solo_c["p_c"]
        if disagreements:
            out["disagreement"] = max(disagreements)
    except NumericalError as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def _run_point(task):
    evaluator, params, route, quad_opts, step_opts = task
    return evaluator(params, route, quad_opts, step_opts)


def run_sweep(spec: GridSpec, route: str = "quadrature",
              quad_opts: spectral.QuadratureOptions | None = None,
              step_opts: dynamics.StepOptions | None = None,
              n_workers: int = 1) -> SweepTable:
    """Evaluate every grid point and collect a deterministic table.

    Per-point numerical failures are recorded in the ``error`` column and
    never abort the sweep.  With ``n_workers > 1`` points are evaluated in
    a process pool; rows are emitted in grid order either way.
    """
    spec.validated()
    route = normalize_route(route)
    evaluator = spec.evaluator or evaluate_branching_point
    combos = []
    tasks = []
    for combo, params in spec.points():
        combos.append(combo)
        tasks.append((evaluator, params, route, quad_opts, step_opts))
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_point, tasks, chunksize=8))
    else:
        results = [_run_point(task) for task in tasks]

    axis_names = [axis.name for axis in spec.axes]
    result_keys = list(results[0].keys())
    columns = axis_names + result_keys
    rows = [tuple(combo) + tuple(res[k] for k in result_keys)
            for combo, res in zip(combos, results)]
    metadata = dict(spec.metadata)
    metadata["route"] = route
    metadata["n_points"] = len(rows)
    return SweepTable(columns=columns, rows=rows, metadata=metadata)


def symmetric_linspace(lo: float, hi: float, n: int) -> tuple[float, ...]:
    """linspace that is exactly sign-symmetric when the range is.

    For lo == -hi the grid is built by mirroring the non-negative half, so
    each point has an exact negative partner and 0 is hit exactly.
    """
    if n < 2:
        raise ParameterError("n_points must be >= 2")
    if lo == -hi and n % 2 == 1:
        half = np.linspace(0.0, hi, (n + 1) // 2)
        return tuple(np.concatenate([-half[:0:-1], half]))
    return tuple(np.linspace(lo, hi, n))


def _base_metadata(base: model.SystemParams) -> dict:
    return {name: getattr(base, name) for name in _PARAM_FIELDS}


def _cavity_scan_derive(omega_bc: float, base: model.SystemParams,
                        values: Mapping[str, float]) -> model.SystemParams:
    # delta = delta_b + delta_c is scanned at fixed line separation
    # omega_bc = delta_b - delta_c.
    delta = values["delta"]
    return base.replace(delta_b=0.5 * (delta + omega_bc),
                        delta_c=0.5 * (delta - omega_bc))


def preset_fig2(omega_bc: float = 4.0, delta_range: tuple[float, float] = (-10.0, 10.0),
                n_points: int = 201, gamma_b: float = 1.0,
                gamma_c: float = 1.0) -> GridSpec:
    """Cavity-center scan with no drive: normalized populations R_b, R_c.

    The scanned variable is the summed detuning delta = delta_b + delta_c
    of the two emission lines from the cavity, at fixed line separation
    ``omega_bc``.
    """
    if n_points < 2:
        raise ParameterError("n_points must be >= 2")
    base = model.SystemParams(gamma_b=gamma_b, gamma_c=gamma_c,
                              delta_b=0.5 * omega_bc, delta_c=-0.5 * omega_bc,
                              drive_g=0.0, drive_detuning=0.0, kappa=1.0)
    axes = (GridAxis("delta", symmetric_linspace(delta_range[0], delta_range[1],
                                                 n_points)),)
    metadata = {"figure": "fig2", **_base_metadata(base), "omega_bc": omega_bc,
                "delta_min": delta_range[0], "delta_max": delta_range[1]}
    return GridSpec(axes=axes, base=base,
                    derive=functools.partial(_cavity_scan_derive, omega_bc),
                    evaluator=evaluate_normalized_populations_point,
                    metadata=metadata)


def preset_fig3a(g_range: tuple[float, float] = (0.0, 5.0), n_points: int = 201,
                 gamma_b: float = 1.0, gamma_c: float = 1.0,
                 delta_b: float = 2.0, drive_detuning: float = 2.0) -> GridSpec:
    """Drive-strength scan at symmetric cavity detuning delta_b = -delta_c."""
    if n_points < 2:
        raise ParameterError("n_points must be >= 2")
    base = model.SystemParams(gamma_b=gamma_b, gamma_c=gamma_c,
                              delta_b=delta_b, delta_c=-delta_b,
                              drive_g=0.0, drive_detuning=drive_detuning,
                              kappa=1.0)
    axes = (GridAxis("drive_g", tuple(np.linspace(g_range[0], g_range[1],
                                                  n_points))),)
    metadata = {"figure": "fig3a", **_base_metadata(base),
                "g_min": g_range[0], "g_max": g_range[1]}
    return GridSpec(axes=axes, base=base, metadata=metadata)


def preset_fig3b(t_max: float = 10.0, n_samples: int = 501,
                 drive_g: float = 1.0, delta_b: float = 2.0,
                 delta_c: float = -2.0, drive_detuning: float = 2.0,
                 step_opts: dynamics.StepOptions | None = None):
    """Excited-state decay with both channels open versus only one.

    Returns (trajectory_two_channel, trajectory_single_channel, metadata);
    the single-channel run closes the b channel (gamma_b = 0).  The scanned
    detuning of the open c channel is fixed by the preset; delta_b of the
    closed-channel partner run defaults to +2.0 (mirror of delta_c) and is
    overridable.
    """
    params_two = model.SystemParams(gamma_b=1.0, gamma_c=1.0, delta_b=delta_b,
                                    delta_c=delta_c, drive_g=drive_g,
                                    drive_detuning=drive_detuning, kappa=1.0)
    params_one = params_two.replace(gamma_b=0.0)
    traj_two = dynamics.evolve(params_two, t_max, step_opts, n_samples=n_samples)
    traj_one = dynamics.evolve(params_one, t_max, step_opts, n_samples=n_samples)
    metadata = {"figure": "fig3b", **_base_metadata(params_two),
                "gamma_b_single": 0.0, "t_max": t_max, "n_samples": n_samples}
    return traj_two, traj_one, metadata


def _drive_detuning_grid(delta_range, g_values, n_points, gamma_b, gamma_c,
                         delta_b, figure) -> GridSpec:
    if n_points < 2:
        raise ParameterError("n_points must be >= 2")
    if len(g_values) == 0:
        raise ParameterError("g_values must be non-empty")
    base = model.SystemParams(gamma_b=gamma_b, gamma_c=gamma_c,
                              delta_b=delta_b, delta_c=-delta_b,
                              drive_g=g_values[0], drive_detuning=0.0, kappa=1.0)
    axes = (GridAxis("drive_detuning",
                     symmetric_linspace(delta_range[0], delta_range[1], n_points)),
            GridAxis("drive_g", tuple(float(g) for g in g_values)))
    metadata = {"figure": figure, **_base_metadata(base),
                "g_values": ",".join(f"{g:.12g}" for g in g_values),
                "detuning_min": delta_range[0], "detuning_max": delta_range[1]}
    return GridSpec(axes=axes, base=base, metadata=metadata)


def preset_fig4(delta_range: tuple[float, float] = (-10.0, 10.0),
                g_values: tuple[float, ...] = (0.5, 1.0, 2.0),
                n_points: int = 201, gamma_b: float = 1.0, gamma_c: float = 1.0,
                delta_b: float = 2.0) -> GridSpec:
    """Branching ratio over drive detuning for several drive strengths,
    lines detuned by one cavity width on either side."""
    return _drive_detuning_grid(delta_range, g_values, n_points, gamma_b,
                                gamma_c, delta_b, "fig4")


def preset_fig5(delta_range: tuple[float, float] = (-10.0, 10.0),
                g_values: tuple[float, ...] = (0.5, 1.0, 2.0),
                n_points: int = 201, gamma_b: float = 1.0, gamma_c: float = 1.0,
                delta_b: float = 0.5) -> GridSpec:
    """Same scan with both lines inside the cavity width."""
    return _drive_detuning_grid(delta_range, g_values, n_points, gamma_b,
                                gamma_c, delta_b, "fig5")
