"""Batch front end: parse a run configuration, dispatch an engine, and
write CSV + JSON artifacts.

Configuration comes from command-line flags or a flat key=value file
(flags win).  Every run writes ``<output>.csv`` (header ``omega,intensity``,
12 significant digits, ascending frequency) and ``<output>.meta.json``
with the fully resolved configuration, the engine tag, the discretization
error bound where applicable, and the wall time.  Exit codes: 0 success,
2 invalid configuration, 3 numeric failure.

In tpi mode the grid keys define the inter-click delay grid instead, and
``delta`` is the detuning difference between the two emitters; the CSV
columns are ``theta,g34,g2``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import ensemble as ens_mod
from . import heisenberg as hs
from . import master as ms
from . import oracle as oc
from . import tpi as tpi_mod
from .errors import CapacityExceeded, InvalidParameter, NumericFailure
from .model import (
    EmitterParams,
    FrequencyGrid,
    PulseSequence,
    SequenceKind,
    Spectrum,
    discretize_bath,
    make_cp,
    make_pdd,
    make_udd,
)

MODES = ("spectrum", "tpi", "ensemble", "oracle", "compare")
ENGINES = ("heisenberg", "master-numeric", "master-closed", "oracle")
NORMALIZATIONS = ("raw", "unit-peak")
SEQUENCES = ("pdd", "cp", "udd")

_CONFIG_KEYS = [
    "mode", "engine", "delta", "gamma", "tau", "n_pulses", "pulse_width",
    "rotation_deg", "sequence", "total_time", "omega_min", "omega_max",
    "omega_points", "L", "D", "n_max", "delta_std", "quad_order", "t_final",
    "normalization", "output",
]


@dataclass
class RunConfig:
    mode: str = "spectrum"
    engine: str = "heisenberg"
    delta: float = 3.0
    gamma: float = 2.0
    tau: float = 0.2
    n_pulses: int = 8
    pulse_width: float = 0.0
    rotation_deg: float = 180.0
    sequence: str = "pdd"
    total_time: float | None = None
    omega_min: float = -20.0
    omega_max: float = 20.0
    omega_points: int = 401
    L: int = 151
    D: float = 20.0
    n_max: int | None = None
    delta_std: float = 3.0
    quad_order: int = 24
    t_final: float | None = None
    normalization: str = "raw"
    output: str = "run"
    screen_odd: bool = False

    def validate(self):
        if self.mode not in MODES:
            raise InvalidParameter(f"mode must be one of {MODES}")
        if self.engine not in ENGINES:
            raise InvalidParameter(f"engine must be one of {ENGINES}")
        if self.normalization not in NORMALIZATIONS:
            raise InvalidParameter(f"normalization must be one of {NORMALIZATIONS}")
        if self.sequence not in SEQUENCES:
            raise InvalidParameter(f"sequence must be one of {SEQUENCES}")


def build_sequence(cfg: RunConfig) -> PulseSequence | None:
    if cfg.n_pulses == 0:
        return None
    if cfg.sequence == "pdd":
        seq = make_pdd(cfg.tau, cfg.n_pulses)
    elif cfg.sequence == "cp":
        seq = make_cp(cfg.tau, cfg.n_pulses)
    else:
        if cfg.total_time is None:
            raise InvalidParameter("total_time is required for a udd sequence")
        seq = make_udd(cfg.total_time, cfg.n_pulses)
    if cfg.pulse_width > 0 or abs(cfg.rotation_deg - 180.0) > 1e-12:
        seq = PulseSequence(
            timings=seq.timings,
            rotation_angle=math.radians(cfg.rotation_deg),
            pulse_width=cfg.pulse_width,
            kind=seq.kind,
        )
    return seq


def _default_horizon(cfg: RunConfig) -> float:
    if cfg.t_final is not None:
        return cfg.t_final
    if cfg.sequence == "udd" and cfg.total_time is not None:
        return cfg.total_time
    return (cfg.n_pulses + 1) * cfg.tau


def _spectrum_for(cfg: RunConfig, delta: float) -> Spectrum:
    emitter = EmitterParams(delta=delta, gamma=cfg.gamma)
    if cfg.engine == "heisenberg":
        if cfg.sequence != "pdd" or cfg.pulse_width > 0 or cfg.rotation_deg != 180.0:
            raise InvalidParameter(
                "engine heisenberg supports only ideal instantaneous pdd "
                "pulses (sequence, pulse_width, rotation_deg)"
            )
        bath = discretize_bath(cfg.L, cfg.D, cfg.gamma)
        if cfg.n_pulses == 0:
            if cfg.t_final is None:
                raise InvalidParameter("t_final is required for a pulse-free run")
            return hs.free_spectrum(emitter, bath, cfg.t_final)
        offset = None
        if cfg.t_final is not None:
            offset = cfg.t_final - cfg.n_pulses * cfg.tau
        req = hs.SpectrumRequest(
            emitter=emitter, bath=bath, tau=cfg.tau, n_pulses=cfg.n_pulses,
            post_pulse_offset=offset,
        )
        return hs.spectrum_heisenberg(req)
    if cfg.engine == "master-numeric":
        grid = FrequencyGrid.linspace(cfg.omega_min, cfg.omega_max, cfg.omega_points)
        seq = build_sequence(cfg)
        return ms.spectrum_numeric(grid, _default_horizon(cfg), seq, emitter)
    if cfg.engine == "master-closed":
        if cfg.sequence != "pdd" or cfg.pulse_width > 0 or cfg.rotation_deg != 180.0:
            raise InvalidParameter(
                "engine master-closed supports only ideal pdd pulses"
            )
        grid = FrequencyGrid.linspace(cfg.omega_min, cfg.omega_max, cfg.omega_points)
        if cfg.n_pulses % 2 != 0 or cfg.n_pulses < 2:
            raise InvalidParameter("n_pulses must be even and >= 2 for master-closed")
        return ms.spectrum_closed_form(grid, cfg.n_pulses // 2, cfg.tau, emitter)
    # oracle
    bath = discretize_bath(cfg.L, cfg.D, cfg.gamma)
    seq = build_sequence(cfg)
    return oc.run_pulsed_emission(
        emitter, bath, seq, _default_horizon(cfg), max_excitations=cfg.n_max
    )


def _format_rows(columns: dict[str, np.ndarray]) -> str:
    names = list(columns)
    lines = [",".join(names)]
    arrays = [np.asarray(columns[n]) for n in names]
    for row in zip(*arrays):
        lines.append(",".join(f"{v:.12g}" for v in row))
    return "\n".join(lines) + "\n"


def _write_csv(path: str, columns: dict[str, np.ndarray]):
    with open(path, "w") as fh:
        fh.write(_format_rows(columns))


def _write_meta(path: str, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _spectrum_outputs(cfg: RunConfig, sp: Spectrum, base: str, started: float,
                      extra_meta: dict | None = None) -> list[str]:
    out = sp.normalized_to_unit_peak() if cfg.normalization == "unit-peak" else sp
    csv_path = f"{base}.csv"
    _write_csv(csv_path, {"omega": out.grid.points, "intensity": out.intensity})
    meta = {
        "config": asdict(cfg),
        "engine_tag": sp.engine_tag.value,
        "observation_time": sp.observation_time,
        "spectrum_meta": sp.meta,
        "wall_time_s": time.monotonic() - started,
    }
    if extra_meta:
        meta.update(extra_meta)
    if cfg.engine in ("heisenberg", "oracle") and sp.meta.get("error_bound") is None:
        bath = discretize_bath(cfg.L, cfg.D, cfg.gamma)
        if bath.half_bandwidth > abs(cfg.delta):
            meta["error_bound"] = hs.discretization_error_bound(
                bath, cfg.delta, max(sp.observation_time, 1e-12))
    _write_meta(f"{base}.meta.json", meta)
    return [csv_path, f"{base}.meta.json"]


def run(cfg: RunConfig) -> list[str]:
    """Execute one configuration; returns the list of files written."""
    cfg.validate()
    started = time.monotonic()
    base = cfg.output

    if cfg.mode == "spectrum" or cfg.mode == "oracle":
        if cfg.mode == "oracle":
            cfg.engine = "oracle"
        sp = _spectrum_for(cfg, cfg.delta)
        return _spectrum_outputs(cfg, sp, base, started)

    if cfg.mode == "ensemble":
        if cfg.engine == "oracle":
            raise InvalidParameter("engine oracle is not supported in ensemble mode")
        spec = ens_mod.EnsembleSpec(delta_std=cfg.delta_std,
                                    quadrature_order=cfg.quad_order)
        sp = ens_mod.ensemble_spectrum(lambda d: _spectrum_for(cfg, d), spec)
        return _spectrum_outputs(cfg, sp, base, started)

    if cfg.mode == "compare":
        files = []
        curves = {}
        for engine in ("heisenberg", "master-numeric", "master-closed"):
            sub = RunConfig(**{**asdict(cfg), "engine": engine})
            # Master engines are sampled on the heisenberg mode grid so the
            # pointwise differences are taken without interpolation.
            if engine != "heisenberg":
                bath = discretize_bath(cfg.L, cfg.D, cfg.gamma)
                sub.omega_min = float(bath.mode_frequencies[0])
                sub.omega_max = float(bath.mode_frequencies[-1])
                sub.omega_points = cfg.L
            sp = _spectrum_for(sub, cfg.delta)
            curves[engine] = sp
            files += _spectrum_outputs(sub, sp, f"{base}.{engine}", started)
        units = {k: v.intensity / v.intensity.max() for k, v in curves.items()}
        omega = curves["heisenberg"].grid.points
        _write_csv(f"{base}.delta.csv", {
            "omega": omega,
            "heisenberg_minus_master_numeric": units["heisenberg"] - units["master-numeric"],
            "heisenberg_minus_master_closed": units["heisenberg"] - units["master-closed"],
            "master_numeric_minus_master_closed": units["master-numeric"] - units["master-closed"],
        })
        files.append(f"{base}.delta.csv")
        return files

    # tpi mode: theta grid in the omega_* keys, delta21 in the delta key.
    thetas = np.linspace(max(cfg.omega_min, 0.0), cfg.omega_max, cfg.omega_points)
    seq = build_sequence(cfg)
    if seq is None:
        raise InvalidParameter("n_pulses must be >= 1 in tpi mode")
    g34_vals = np.array([tpi_mod.g34_time_averaged(t, cfg.tau) for t in thetas])
    g2_vals = np.array([tpi_mod.g2_single(t, seq, cfg.gamma) for t in thetas])
    if cfg.screen_odd:
        from .model import _snap_count
        keep = np.array([
            _snap_count(t, cfg.tau) % 2 == 0 for t in thetas
        ])
        thetas, g34_vals, g2_vals = thetas[keep], g34_vals[keep], g2_vals[keep]
    _write_csv(f"{base}.csv", {"theta": thetas, "g34": g34_vals, "g2": g2_vals})
    _write_meta(f"{base}.meta.json", {
        "config": asdict(cfg),
        "observable": "time-averaged g34 and parity g2 vs inter-click delay",
        "delta21": cfg.delta,
        "wall_time_s": time.monotonic() - started,
    })
    return [f"{base}.csv", f"{base}.meta.json"]


def _recipe_runs(name: str) -> list[RunConfig]:
    base = dict(mode="spectrum", engine="heisenberg", gamma=2.0, L=151, D=20.0)
    if name == "fig2":
        return [
            RunConfig(**base, delta=5.0, tau=0.2, n_pulses=4, output="fig2_4pulses"),
            RunConfig(**base, delta=5.0, tau=0.2, n_pulses=8, output="fig2_8pulses"),
        ]
    if name == "fig3":
        return [RunConfig(**base, delta=3.0, tau=0.2, n_pulses=8, output="fig3")]
    if name == "fig4a":
        return [
            RunConfig(**base, delta=3.0, tau=0.4, n_pulses=8, output="fig4a_8pulses"),
            RunConfig(**base, delta=3.0, tau=0.4, n_pulses=12, output="fig4a_12pulses"),
        ]
    if name == "fig4b":
        return [
            RunConfig(**base, delta=5.0, tau=0.4, n_pulses=8, output="fig4b_8pulses"),
            RunConfig(**base, delta=5.0, tau=0.4, n_pulses=12, output="fig4b_12pulses"),
        ]
    if name == "robustness":
        shared = dict(mode="spectrum", engine="master-numeric", delta=3.0,
                      gamma=2.0, tau=0.2, n_pulses=6, omega_min=-20.0,
                      omega_max=20.0, omega_points=401)
        return [
            RunConfig(**shared, output="robustness_ideal"),
            RunConfig(**shared, rotation_deg=175.0, output="robustness_175deg"),
            RunConfig(**shared, pulse_width=0.05, output="robustness_finite"),
        ]
    if name == "ddcompare":
        shared = dict(mode="spectrum", engine="master-numeric", delta=3.0,
                      gamma=2.0, n_pulses=8, t_final=1.6, omega_min=-20.0,
                      omega_max=20.0, omega_points=401)
        return [
            RunConfig(**shared, sequence="pdd", tau=0.2, output="ddcompare_pdd"),
            RunConfig(**shared, sequence="cp", tau=0.2, output="ddcompare_cp"),
            RunConfig(**shared, sequence="udd", tau=0.2, total_time=1.6,
                      output="ddcompare_udd"),
        ]
    if name == "ensemble":
        shared = dict(engine="master-numeric", delta=3.0, gamma=2.0, tau=0.2,
                      n_pulses=8, omega_min=-20.0, omega_max=20.0,
                      omega_points=401)
        return [
            RunConfig(mode="ensemble", delta_std=3.0, quad_order=24,
                      output="ensemble_gauss", **shared),
            RunConfig(mode="spectrum", output="ensemble_single", **shared),
        ]
    if name == "totaltime":
        shared = dict(mode="spectrum", engine="master-numeric", delta=3.0,
                      gamma=2.0, t_final=3.0, omega_min=-20.0, omega_max=20.0,
                      omega_points=401)
        return [
            RunConfig(**shared, tau=0.2, n_pulses=14, output="totaltime_tau02"),
            RunConfig(**shared, tau=0.3, n_pulses=9, output="totaltime_tau03"),
        ]
    raise InvalidParameter(
        f"unknown recipe {name!r}; valid names: fig2, fig3, fig4a, fig4b, "
        "robustness, ddcompare, ensemble, totaltime"
    )


def recipe(name: str) -> list[str]:
    """Run a stored parameter set; returns the files written."""
    files = []
    for cfg in _recipe_runs(name):
        files += run(cfg)
    return files


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParameter(
                    f"{path}:{line_no}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise InvalidParameter(f"{path}:{line_no}: unknown key {key!r}")
            values[key] = value
    return values


_INT_KEYS = {"n_pulses", "omega_points", "L", "n_max", "quad_order"}
_FLOAT_KEYS = {"delta", "gamma", "tau", "pulse_width", "rotation_deg",
               "total_time", "omega_min", "omega_max", "D", "delta_std",
               "t_final"}


def _coerce(key: str, value):
    if value is None or not isinstance(value, str):
        return value
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise InvalidParameter(f"could not parse {key}={value!r}") from exc
    return value


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        values.update(_read_config_file(args.config))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    cfg = RunConfig()
    for key, value in values.items():
        setattr(cfg, key, _coerce(key, value))
    cfg.screen_odd = bool(args.screen_odd)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="linepin",
        description="Emission spectra and photon correlations for a "
                    "two-level emitter under periodic pi-pulse control.",
    )
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--recipe", help="run a stored parameter set")
    parser.add_argument("--screen-odd", action="store_true", dest="screen_odd",
                        help="tpi mode: drop delays with odd pulse parity")
    for key in _CONFIG_KEYS:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)
    args = parser.parse_args(argv)

    try:
        if args.recipe:
            files = recipe(args.recipe)
        else:
            files = run(build_config(args))
    except (InvalidParameter, CapacityExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"numeric failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return 3
    for path in files:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
