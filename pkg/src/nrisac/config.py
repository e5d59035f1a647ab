"""Simulation configuration: defaults, JSON loading, strict validation.

The default configuration is desk-scale (reduced grid, 200 slots, reduced
radar receive array) so that full sweeps finish in seconds; every physical
constant (carrier, numerology, noise sigmas, kinematics) keeps its
full-scale default.  Unknown keys anywhere in the file are errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .frame import MODE_CONVENTIONAL, MODE_ISAC, FrameConfig
from .scenario import (
    LOS_VEHICLE,
    NLOS_STATIC,
    SceneGeometry,
    ScattererSpec,
    VehicleState,
    observe,
)
from .upa import UpaConfig
from .waveform import Numerology, numerology_params

SCHEME_ISAC = "isac"
SCHEME_CODEBOOK = "codebook"


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration input."""


def default_config_dict() -> dict:
    """Full default configuration as a plain nested dict."""
    return {
        "scheme": SCHEME_ISAC,
        "scene": {
            "bs_position": [0.0, 0.0, 4.0],
            "road_axis": [0.0, -1.0],
            "vehicle_start": [25.0, 40.0],
            "vehicle_height": 1.0,
            "speed_mps": 20.0,
            "vehicle_rcs": 2000.0,
            "nlos_rel_power_db": -10.0,
            "reference_gain": 1.0,
            "scatterers": [
                {"position": [55.0, 25.0, 10.0], "rcs": 600.0},
                {"position": [60.0, -35.0, 10.0], "rcs": 600.0},
            ],
        },
        "arrays": {
            "tx": {"nx": 8, "ny": 8},
            "radar_rx": {"nx": 4, "ny": 4},
            "vehicle": {"nx": 4, "ny": 4},
        },
        "waveform": {
            "mu": 3,
            "n_prb": 52,
            "m_subcarriers": 64,
            "l_symbols": 14,
            "q_m": 4,
            "carrier_hz": 35e9,
        },
        "frame": {
            "pattern": "DDDSU",
            "special_slot_split": [10, 2, 2],
            "dmrs_re_per_period": 42,
            "csirs_re_per_period": 32,
            "csirs_period_slots": 5,
            "csirs_slot_index": 0,
        },
        "radar": {
            "pad_m": 4,
            "pad_l": 16,
            "music_grid_step_deg": 0.1,
            "guard_bins": [1, 1],
            "cos_floor": 0.05,
            "init_mse_scale": 10.0,
            "snr_scaled_sigmas": False,
        },
        "noise": {
            "snr_t_db": 20.0,
            "process_sigma": [1e-3, 1e-3, 1e-3, 1e-4],
            "meas_sigma": [0.1, 0.2, 0.15, 0.02],
        },
        "run": {
            "t_max_s": 0.025,
            "trials": 20,
            "seed": 12345,
            "burn_in_slots": 10,
        },
        "throughput": {"carriers": 1, "layers": 1, "n_prb": 52},
        "codebook": {"o_az": 4, "o_el": 4},
    }


def _merge(defaults, override, path=""):
    if not isinstance(override, dict):
        raise ConfigError(f"expected an object at {path or 'top level'}")
    merged = dict(defaults)
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown configuration key: {here}")
        if isinstance(defaults[key], dict):
            merged[key] = _merge(defaults[key], value, here)
        else:
            merged[key] = value
    return merged


@dataclass(frozen=True)
class SceneConfig:
    geometry: SceneGeometry
    initial_state: VehicleState
    scatterers: list[ScattererSpec]
    nlos_rel_power_db: float
    reference_gain: float

    @property
    def n_targets(self) -> int:
        return len(self.scatterers)


@dataclass(frozen=True)
class SimConfig:
    scheme: str
    scene: SceneConfig
    tx_array: UpaConfig
    radar_rx_array: UpaConfig
    vehicle_array: UpaConfig
    numerology: Numerology
    m_subcarriers: int
    l_symbols: int
    q_m: int
    carrier_hz: float
    frame_conventional: FrameConfig
    frame_isac: FrameConfig
    pad_m: int
    pad_l: int
    music_grid_step: float
    guard_bins: tuple[int, int]
    cos_floor: float
    init_mse_scale: float
    snr_scaled_sigmas: bool
    snr_t_db: float
    process_sigma: np.ndarray
    meas_sigma: np.ndarray
    n_slots: int
    trials: int
    seed: int
    burn_in_slots: int
    throughput_carriers: int
    throughput_layers: int
    throughput_n_prb: int
    codebook_o_az: int
    codebook_o_el: int
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def slot_duration(self) -> float:
        return self.numerology.slot_duration


def _build_scene(d: dict) -> SceneConfig:
    geometry = SceneGeometry(
        bs_position=np.asarray(d["bs_position"], dtype=float),
        road_axis=np.asarray(d["road_axis"], dtype=float),
        vehicle_height=float(d["vehicle_height"]),
    )
    initial = VehicleState(
        position=np.asarray(d["vehicle_start"], dtype=float),
        speed=float(d["speed_mps"]),
        time=0.0,
        road_axis=geometry.road_axis,
    )
    scatterers = [ScattererSpec(kind=LOS_VEHICLE, rcs=_as_complex(d["vehicle_rcs"]))]
    for item in d["scatterers"]:
        extra = set(item) - {"position", "rcs", "path_gain"}
        if extra:
            raise ConfigError(f"unknown scatterer keys: {sorted(extra)}")
        scatterers.append(
            ScattererSpec(
                kind=NLOS_STATIC,
                position=np.asarray(item["position"], dtype=float),
                rcs=_as_complex(item.get("rcs", 1.0)),
                path_gain=_as_complex(item.get("path_gain", 1.0)),
            )
        )
    return SceneConfig(
        geometry=geometry,
        initial_state=initial,
        scatterers=scatterers,
        nlos_rel_power_db=float(d["nlos_rel_power_db"]),
        reference_gain=float(d["reference_gain"]),
    )


def _as_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError("complex values are [real, imag] pairs")
        return complex(float(value[0]), float(value[1]))
    return complex(float(value), 0.0)


def _sigma_vec(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (4,) or np.any(arr <= 0):
        raise ConfigError(f"{name} must be 4 positive values")
    return arr


def build_sim_config(overrides: dict | None = None) -> SimConfig:
    """Validate and assemble the runtime configuration from a raw dict."""
    raw = _merge(default_config_dict(), overrides or {})
    try:
        numerology = numerology_params(int(raw["waveform"]["mu"]))
    except ValueError as exc:
        raise ConfigError(f"waveform.mu: {exc}") from exc

    wf = raw["waveform"]
    if wf["m_subcarriers"] is not None:
        m_subcarriers = int(wf["m_subcarriers"])
    else:
        m_subcarriers = 12 * int(wf["n_prb"])
    if m_subcarriers < 4:
        raise ConfigError("waveform: need at least 4 subcarriers")
    if int(wf["q_m"]) not in (2, 4, 6):
        raise ConfigError("waveform.q_m must be 2, 4 or 6")

    fr = raw["frame"]
    frame_kwargs = dict(
        numerology=numerology,
        pattern=str(fr["pattern"]),
        dmrs_re_per_period=int(fr["dmrs_re_per_period"]),
        csirs_re_per_period=int(fr["csirs_re_per_period"]),
        csirs_period_slots=int(fr["csirs_period_slots"]),
        csirs_slot_index=int(fr["csirs_slot_index"]),
        special_slot_split=tuple(int(v) for v in fr["special_slot_split"]),
    )
    try:
        frame_conv = FrameConfig(mode=MODE_CONVENTIONAL, **frame_kwargs)
        frame_isac = FrameConfig(mode=MODE_ISAC, **frame_kwargs)
    except ValueError as exc:
        raise ConfigError(f"frame: {exc}") from exc

    run = raw["run"]
    slot = numerology.slot_duration
    n_slots_f = float(run["t_max_s"]) / slot
    n_slots = int(round(n_slots_f))
    if n_slots < 1 or abs(n_slots_f - n_slots) > 1e-6:
        raise ConfigError(
            f"run.t_max_s must be a positive integer multiple of the slot duration {slot:.6g} s"
        )

    scheme = str(raw["scheme"])
    if scheme not in (SCHEME_ISAC, SCHEME_CODEBOOK):
        raise ConfigError(f"scheme must be '{SCHEME_ISAC}' or '{SCHEME_CODEBOOK}'")

    try:
        scene = _build_scene(raw["scene"])
        arrays = {
            name: UpaConfig(nx=int(a["nx"]), ny=int(a["ny"]))
            for name, a in raw["arrays"].items()
        }
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc

    radar = raw["radar"]
    guard = tuple(int(v) for v in radar["guard_bins"])
    if len(guard) != 2 or min(guard) < 0:
        raise ConfigError("radar.guard_bins must be two nonnegative integers")

    cfg = SimConfig(
        scheme=scheme,
        scene=scene,
        tx_array=arrays["tx"],
        radar_rx_array=arrays["radar_rx"],
        vehicle_array=arrays["vehicle"],
        numerology=numerology,
        m_subcarriers=m_subcarriers,
        l_symbols=int(wf["l_symbols"]),
        q_m=int(wf["q_m"]),
        carrier_hz=float(wf["carrier_hz"]),
        frame_conventional=frame_conv,
        frame_isac=frame_isac,
        pad_m=int(radar["pad_m"]),
        pad_l=int(radar["pad_l"]),
        music_grid_step=np.radians(float(radar["music_grid_step_deg"])),
        guard_bins=guard,
        cos_floor=float(radar["cos_floor"]),
        init_mse_scale=float(radar["init_mse_scale"]),
        snr_scaled_sigmas=bool(radar["snr_scaled_sigmas"]),
        snr_t_db=float(raw["noise"]["snr_t_db"]),
        process_sigma=_sigma_vec(raw["noise"]["process_sigma"], "noise.process_sigma"),
        meas_sigma=_sigma_vec(raw["noise"]["meas_sigma"], "noise.meas_sigma"),
        n_slots=n_slots,
        trials=int(run["trials"]),
        seed=int(run["seed"]),
        burn_in_slots=int(run["burn_in_slots"]),
        throughput_carriers=int(raw["throughput"]["carriers"]),
        throughput_layers=int(raw["throughput"]["layers"]),
        throughput_n_prb=int(raw["throughput"]["n_prb"]),
        codebook_o_az=int(raw["codebook"]["o_az"]),
        codebook_o_el=int(raw["codebook"]["o_el"]),
        raw=raw,
    )
    _check_physics(cfg)
    return cfg


def _check_physics(cfg: SimConfig) -> None:
    if cfg.trials < 1 or cfg.burn_in_slots < 0:
        raise ConfigError("run.trials must be >= 1 and run.burn_in_slots >= 0")
    if cfg.pad_m < 1 or cfg.pad_l < 1:
        raise ConfigError("radar pad factors must be >= 1")
    if not 0 < cfg.cos_floor < 1:
        raise ConfigError("radar.cos_floor must be in (0, 1)")
    if cfg.scene.n_targets >= cfg.radar_rx_array.n_elements:
        raise ConfigError(
            "scene has too many scatterers for the radar array "
            f"({cfg.scene.n_targets} targets, {cfg.radar_rx_array.n_elements} antennas)"
        )
    # the cyclic prefix must absorb every round-trip delay; straight-line
    # distance is convex in time, so checking the run endpoints suffices
    start = cfg.scene.initial_state
    end = VehicleState(
        position=start.position + start.speed * cfg.n_slots * cfg.slot_duration * start.road_axis,
        speed=start.speed,
        time=cfg.n_slots * cfg.slot_duration,
        road_axis=start.road_axis,
    )
    max_d = 0.0
    for state in (start, end):
        for scat in cfg.scene.scatterers:
            max_d = max(max_d, observe(cfg.scene.geometry, state, scat, cfg.carrier_hz).distance)
    tau_max = 2.0 * max_d / SPEED_OF_LIGHT
    if tau_max >= cfg.numerology.cp_duration:
        raise ConfigError(
            f"round-trip delay {tau_max:.3e} s exceeds the cyclic prefix "
            f"{cfg.numerology.cp_duration:.3e} s; shrink the scene or lower mu"
        )


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> SimConfig:
    """Load JSON config from ``path`` (defaults when None) and validate it."""
    data: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    if overrides:
        data = _merge_shallow(data, overrides)
    return build_sim_config(data)


def _merge_shallow(base: dict, extra: dict) -> dict:
    out = json.loads(json.dumps(base))
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge_shallow(out[key], value)
        else:
            out[key] = value
    return out
