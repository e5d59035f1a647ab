"""Per-slot link simulation for the sensing-assisted and codebook schemes.

One trial walks the vehicle through ``n_slots`` slots.  In the
sensing-assisted scheme every slot is full downlink: the BS transmits with
the one-step-predicted beam, processes its own echo through the radar
pipeline, updates the tracker, and the vehicle receive beam follows the
two-step prediction shipped one slot ahead.  In the codebook baseline the BS
sweeps an oversampled DFT codebook on each CSI-RS slot and applies the
reported best pair one period later; guard and uplink symbols carry no data.

All randomness flows from one integer seed through named substreams, so a
(config, seed) pair reproduces byte-identical outputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import frame as nr_frame
from . import radar, tracker
from .channel import SnrSpec, path_gains_from_scene, synthesize_echo, transmit_link
from .config import SCHEME_CODEBOOK, SCHEME_ISAC, SimConfig
from .scenario import observe, propagate
from .upa import Codebook, dft_codebook, steering_vector
from .waveform import (
    build_grid_subcarriers,
    expand_re_types,
    qam_demodulate,
    random_payload,
)

_STREAM_NAMES = ("payload", "pilot", "radar_noise", "comm_noise")


@dataclass(frozen=True)
class SlotRecord:
    """Everything observed in one slot (NaN where a scheme has no estimate)."""

    slot: int
    t_s: float
    theta_true: float
    d_true: float
    v_true: float
    theta_meas: float
    d_meas: float
    v_meas: float
    theta_est: float
    d_est: float
    v_est: float
    beam_tx: float
    beam_rx: float
    snr_rx_db: float
    bit_errors: int
    bits: int
    data_re: int


@dataclass(frozen=True)
class TrialResult:
    """Per-slot records plus the trial-level summary."""

    scheme: str
    seed: int
    records: list[SlotRecord]
    angle_rmse: float
    distance_rmse: float
    meas_angle_rmse: float
    ber: float
    throughput_mbps: float
    oh_fraction: float


def _streams(rng_seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(rng_seed).spawn(len(_STREAM_NAMES))
    return {name: np.random.default_rng(ss) for name, ss in zip(_STREAM_NAMES, children)}


def _elevation_from_distance(cfg: SimConfig, distance: float) -> float:
    dz = cfg.scene.geometry.vehicle_height - cfg.scene.geometry.bs_position[2]
    return float(np.arcsin(np.clip(dz / max(distance, abs(dz) + 1e-9), -1.0, 1.0)))


def _measurement_sigmas(cfg: SimConfig) -> np.ndarray:
    sigmas = cfg.meas_sigma
    if cfg.snr_scaled_sigmas:
        # optional hook: variance proportional to 1/SNR, referenced to 20 dB
        sigmas = sigmas * np.sqrt(10.0 ** ((20.0 - cfg.snr_t_db) / 10.0))
    return sigmas


def _period_re_types(cfg: SimConfig, frame_cfg) -> list[np.ndarray]:
    """Expanded (subcarrier, symbol) RE-type maps for each slot of one period."""
    period = nr_frame.re_positions(frame_cfg)
    return [expand_re_types(period[i].T, cfg.m_subcarriers) for i in range(frame_cfg.n_slots)]


def _transmit_slot(cfg, re_types, paths, tx_beam, rx_beam, snr, streams):
    """Build the slot grid, run the downlink, demodulate the data REs."""
    mask = re_types == nr_frame.RE_DATA
    n_data = int(mask.sum())
    payload = random_payload(n_data, cfg.q_m, streams["payload"])
    grid = build_grid_subcarriers(
        cfg.m_subcarriers, cfg.l_symbols, payload, cfg.numerology,
        re_types=re_types, pilot_rng=streams["pilot"],
    )
    if n_data == 0:
        return grid, 0, 0, math.nan
    link = transmit_link(
        grid, paths, tx_beam, rx_beam, cfg.tx_array, cfg.vehicle_array,
        snr=snr, rng=streams["comm_noise"],
    )
    gain = link.effective_gain if abs(link.effective_gain) > 1e-300 else 1.0
    # transposed masking recovers symbols in the grid's symbol-major fill order
    equalized = link.rx_symbols.T[grid.data_mask.T] / gain
    decided = qam_demodulate(equalized, cfg.q_m)
    errors = int(np.sum(decided.bits != payload.bits))
    snr_db = 10.0 * np.log10(link.receive_snr) if link.receive_snr > 0 else -math.inf
    return grid, errors, n_data * cfg.q_m, snr_db


def _summarize(cfg: SimConfig, scheme: str, seed: int, records: list[SlotRecord]) -> TrialResult:
    frame_cfg = cfg.frame_isac if scheme == SCHEME_ISAC else cfg.frame_conventional
    ledger = nr_frame.build_ledger(frame_cfg)
    oh = nr_frame.overhead_fraction(ledger)
    tail = [r for r in records if r.slot >= cfg.burn_in_slots] or records
    ang = [r.theta_est - r.theta_true for r in tail if not math.isnan(r.theta_est)]
    dist = [r.d_est - r.d_true for r in tail if not math.isnan(r.d_est)]
    meas = [r.theta_meas - r.theta_true for r in tail if not math.isnan(r.theta_meas)]
    rmse = lambda e: float(np.sqrt(np.mean(np.square(e)))) if e else math.nan
    bits = sum(r.bits for r in records)
    errors = sum(r.bit_errors for r in records)
    ber = errors / bits if bits else math.nan
    params = nr_frame.ThroughputParams(
        modulation_order=cfg.q_m,
        n_prb=cfg.throughput_n_prb,
        symbol_duration=cfg.numerology.symbol_duration,
        ber=0.0 if math.isnan(ber) else ber,
        overhead=oh,
        layers=cfg.throughput_layers,
        carriers=cfg.throughput_carriers,
    )
    return TrialResult(
        scheme=scheme,
        seed=seed,
        records=records,
        angle_rmse=rmse(ang),
        distance_rmse=rmse(dist),
        meas_angle_rmse=rmse(meas),
        ber=ber,
        throughput_mbps=nr_frame.throughput(params),
        oh_fraction=oh,
    )


def run_isac_trial(cfg: SimConfig, rng_seed: int) -> TrialResult:
    """One sensing-assisted trial: radar-pipeline measurements drive the EKF."""
    if cfg.scheme != SCHEME_ISAC:
        cfg = replace(cfg, scheme=SCHEME_ISAC)
    streams = _streams(rng_seed)
    snr = SnrSpec.from_db(cfg.snr_t_db)
    dt = cfg.slot_duration
    geom = cfg.scene.geometry
    scats = cfg.scene.scatterers
    k_targets = len(scats)
    sigmas = _measurement_sigmas(cfg)
    process = tracker.ProcessNoise(cfg.process_sigma)
    zeta = np.sqrt(cfg.tx_array.n_elements * cfg.radar_rx_array.n_elements)

    vstate = cfg.scene.initial_state
    init_target = observe(geom, vstate, scats[0], cfg.carrier_hz)
    ekf: tracker.EkfState | None = None
    records: list[SlotRecord] = []
    period_maps = _period_re_types(cfg, cfg.frame_isac)

    for n in range(cfg.n_slots):
        truth = observe(geom, vstate, scats[0], cfg.carrier_hz)
        if ekf is None:
            tx_az = rx_az = init_target.azimuth
            d_pred = init_target.distance
            v_rel_pred = init_target.radial_velocity
        else:
            ekf = tracker.predict(ekf, process, dt)
            tx_az, rx_az = tracker.beam_angles(ekf)
            d_pred = ekf.one_step.distance
            v_rel_pred = ekf.one_step.speed * np.cos(ekf.one_step.azimuth)
        elev = _elevation_from_distance(cfg, d_pred)
        tx_beam = steering_vector(cfg.tx_array, tx_az, elev)
        rx_beam = steering_vector(cfg.vehicle_array, rx_az, elev)

        re_types = period_maps[n % len(period_maps)]
        paths = path_gains_from_scene(
            scats, vstate, geom, cfg.carrier_hz,
            reference_gain=cfg.scene.reference_gain,
            nlos_rel_power_db=cfg.scene.nlos_rel_power_db,
        )
        grid, errors, bits, snr_db = _transmit_slot(
            cfg, re_types, paths, tx_beam, rx_beam, snr, streams
        )

        # radar chain on the slot's own echo
        targets = [observe(geom, vstate, s, cfg.carrier_hz) for s in scats]
        echo = synthesize_echo(
            grid, targets, tx_beam, cfg.tx_array, cfg.radar_rx_array,
            snr=snr, rng=streams["radar_noise"],
        )
        divs = radar.matched_division(echo, grid)
        combined = radar.combined_range_doppler(
            divs, cfg.numerology, cfg.carrier_hz, cfg.pad_m, cfg.pad_l
        )
        peaks = radar.detect_peaks(combined, k_targets, cfg.guard_bins)
        candidates = [radar.bins_to_range_velocity(p, combined) for p in peaks]
        if ekf is None:
            pick = 0  # strongest peak; beams point at the vehicle during access
        else:
            cost = [
                ((d - d_pred) / combined.range_bin_m) ** 2
                + ((v - v_rel_pred) / combined.velocity_bin_mps) ** 2
                for d, v in candidates
            ]
            pick = int(np.argmin(cost))
        d_hat, v_rel_hat = candidates[pick]

        music = radar.music_doa(
            divs, cfg.radar_rx_array, k_targets, cfg.music_grid_step, elev
        )
        ref_az = tx_az if ekf is None else ekf.one_step.azimuth
        theta_hat = float(music.estimates[np.argmin(np.abs(music.estimates - ref_az))])

        amps = radar.peak_amplitudes(divs, peaks[pick], combined)
        combined_amp = radar.combine_peak_amplitude(amps, cfg.radar_rx_array, theta_hat, elev)
        tx_gain_model = zeta * np.sqrt(snr.power) * np.vdot(
            steering_vector(cfg.tx_array, theta_hat, elev), tx_beam
        )
        try:
            beta_hat = radar.estimate_beta(max(d_hat, 1e-9), combined_amp, tx_gain_model)
        except ValueError:
            beta_hat = 0.0 + 0.0j

        y = radar.assemble_measurement(
            theta_hat, d_hat, v_rel_hat, beta_hat, sigmas, cfg.cos_floor
        )
        if ekf is None:
            ekf = tracker.initialize(y, cfg.init_mse_scale)
        else:
            ekf = tracker.update(ekf, y)

        records.append(
            SlotRecord(
                slot=n,
                t_s=n * dt,
                theta_true=truth.azimuth,
                d_true=truth.distance,
                v_true=truth.speed,
                theta_meas=y.azimuth,
                d_meas=y.distance,
                v_meas=y.speed if y.velocity_valid else math.nan,
                theta_est=ekf.estimate.azimuth,
                d_est=ekf.estimate.distance,
                v_est=ekf.estimate.speed,
                beam_tx=tx_az,
                beam_rx=rx_az,
                snr_rx_db=snr_db,
                bit_errors=errors,
                bits=bits,
                data_re=bits // cfg.q_m,
            )
        )
        vstate = propagate(vstate, dt)
    return _summarize(cfg, SCHEME_ISAC, rng_seed, records)


def _best_pair(paths, tx_cb: Codebook, rx_cb: Codebook, cfg: SimConfig) -> tuple[int, int]:
    """Joint sweep: indices of the codebook pair maximizing channel power."""
    m_ch = np.zeros((cfg.vehicle_array.n_elements, cfg.tx_array.n_elements), dtype=complex)
    for tgt, path_gain in paths:
        a = steering_vector(cfg.tx_array, tgt.azimuth, tgt.elevation)
        u = steering_vector(cfg.vehicle_array, tgt.azimuth, tgt.elevation)
        m_ch += path_gain * np.outer(u, a.conj())
    gains = np.abs(rx_cb.vectors.conj() @ m_ch @ tx_cb.vectors.T)
    r, t = np.unravel_index(int(np.argmax(gains)), gains.shape)
    return int(t), int(r)


def run_codebook_trial(cfg: SimConfig, rng_seed: int) -> TrialResult:
    """One conventional-baseline trial with periodic codebook sweeps."""
    if cfg.scheme != SCHEME_CODEBOOK:
        cfg = replace(cfg, scheme=SCHEME_CODEBOOK)
    streams = _streams(rng_seed)
    snr = SnrSpec.from_db(cfg.snr_t_db)
    dt = cfg.slot_duration
    geom = cfg.scene.geometry
    scats = cfg.scene.scatterers
    period = cfg.frame_conventional.csirs_period_slots
    sweep_slot = cfg.frame_conventional.csirs_slot_index
    tx_cb = dft_codebook(cfg.tx_array, cfg.codebook_o_az, cfg.codebook_o_el)
    rx_cb = dft_codebook(cfg.vehicle_array, cfg.codebook_o_az, cfg.codebook_o_el)

    vstate = cfg.scene.initial_state
    active: tuple[int, int] | None = None
    pending: tuple[int, tuple[int, int]] | None = None  # (apply_at_slot, pair)
    records: list[SlotRecord] = []
    period_maps = _period_re_types(cfg, cfg.frame_conventional)

    for n in range(cfg.n_slots):
        truth = observe(geom, vstate, scats[0], cfg.carrier_hz)
        paths = path_gains_from_scene(
            scats, vstate, geom, cfg.carrier_hz,
            reference_gain=cfg.scene.reference_gain,
            nlos_rel_power_db=cfg.scene.nlos_rel_power_db,
        )
        if pending is not None and n >= pending[0]:
            active = pending[1]
            pending = None
        if active is None:
            active = _best_pair(paths, tx_cb, rx_cb, cfg)  # one-shot initial access
        elif n % period == sweep_slot:
            pending = (n + period, _best_pair(paths, tx_cb, rx_cb, cfg))
        tx_idx, rx_idx = active
        tx_beam = tx_cb.vectors[tx_idx]
        rx_beam = rx_cb.vectors[rx_idx]

        re_types = period_maps[n % len(period_maps)]
        _, errors, bits, snr_db = _transmit_slot(
            cfg, re_types, paths, tx_beam, rx_beam, snr, streams
        )
        records.append(
            SlotRecord(
                slot=n,
                t_s=n * dt,
                theta_true=truth.azimuth,
                d_true=truth.distance,
                v_true=truth.speed,
                theta_meas=math.nan,
                d_meas=math.nan,
                v_meas=math.nan,
                theta_est=float(tx_cb.azimuths[tx_idx]),
                d_est=math.nan,
                v_est=math.nan,
                beam_tx=float(tx_cb.azimuths[tx_idx]),
                beam_rx=float(rx_cb.azimuths[rx_idx]),
                snr_rx_db=snr_db,
                bit_errors=errors,
                bits=bits,
                data_re=bits // cfg.q_m,
            )
        )
        vstate = propagate(vstate, dt)
    return _summarize(cfg, SCHEME_CODEBOOK, rng_seed, records)


def run_trial(cfg: SimConfig, rng_seed: int) -> TrialResult:
    if cfg.scheme == SCHEME_ISAC:
        return run_isac_trial(cfg, rng_seed)
    return run_codebook_trial(cfg, rng_seed)


def trial_seeds(cfg: SimConfig, trials: int | None = None) -> list[int]:
    """Derive one deterministic integer seed per trial from the master seed."""
    n = cfg.trials if trials is None else trials
    return [int(ss.generate_state(1)[0]) for ss in np.random.SeedSequence(cfg.seed).spawn(n)]


def run_trials(cfg: SimConfig, trials: int | None = None) -> list[TrialResult]:
    return [run_trial(cfg, seed) for seed in trial_seeds(cfg, trials)]


def rmse_cdf(results: list[TrialResult], field: str, burn_in: int = 0) -> np.ndarray:
    """Empirical CDF of per-slot absolute errors pooled across trials.

    Returns an (n, 2) array of (error, cumulative probability) rows.
    """
    if not results:
        raise ValueError("no trial results")
    if field == "angle":
        pick = lambda r: r.theta_est - r.theta_true
    elif field == "distance":
        pick = lambda r: r.d_est - r.d_true
    else:
        raise ValueError("field must be 'angle' or 'distance'")
    errors = [
        abs(pick(rec))
        for res in results
        for rec in res.records
        if rec.slot >= burn_in and not math.isnan(pick(rec))
    ]
    if not errors:
        raise ValueError(f"no {field} errors recorded")
    values = np.sort(np.asarray(errors))
    probs = np.arange(1, len(values) + 1) / len(values)
    return np.column_stack([values, probs])


def sweep_snr(
    cfg: SimConfig,
    snr_list_db,
    trials: int | None = None,
    schemes: tuple[str, ...] = (SCHEME_ISAC, SCHEME_CODEBOOK),
) -> list[dict]:
    """BER and throughput per (transmit SNR, scheme), averaged over trials.

    Trials are paired: every scheme and SNR point consumes the same per-trial
    seeds, so comparisons share payloads and noise substreams.
    """
    snr_list_db = list(snr_list_db)
    if not snr_list_db:
        raise ValueError("empty SNR sweep")
    rows = []
    for snr_db in snr_list_db:
        for scheme in schemes:
            sub = replace(cfg, snr_t_db=float(snr_db), scheme=scheme)
            results = run_trials(sub, trials)
            rows.append(
                {
                    "snr_db": float(snr_db),
                    "scheme": scheme,
                    "ber": float(np.mean([r.ber for r in results])),
                    "throughput_mbps": float(np.mean([r.throughput_mbps for r in results])),
                    "oh_fraction": results[0].oh_fraction,
                }
            )
    return rows


# --- output writers ---------------------------------------------------------

SLOT_CSV_COLUMNS = (
    "slot,t_s,theta_true_rad,d_true_m,v_true_mps,theta_meas_rad,d_meas_m,v_meas_mps,"
    "theta_est_rad,d_est_m,v_est_mps,beam_tx_rad,beam_rx_rad,snr_rx_db,bit_errors,bits,data_re"
)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_slots_csv(result: TrialResult, path: str | Path) -> None:
    lines = [SLOT_CSV_COLUMNS]
    for r in result.records:
        lines.append(
            ",".join(
                [
                    str(r.slot),
                    _fmt(r.t_s),
                    _fmt(r.theta_true),
                    _fmt(r.d_true),
                    _fmt(r.v_true),
                    _fmt(r.theta_meas),
                    _fmt(r.d_meas),
                    _fmt(r.v_meas),
                    _fmt(r.theta_est),
                    _fmt(r.d_est),
                    _fmt(r.v_est),
                    _fmt(r.beam_tx),
                    _fmt(r.beam_rx),
                    _fmt(r.snr_rx_db),
                    str(r.bit_errors),
                    str(r.bits),
                    str(r.data_re),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _nanmean(values) -> float:
    finite = [v for v in values if not math.isnan(v)]
    return float(np.mean(finite)) if finite else math.nan


def summary_dict(cfg: SimConfig, results: list[TrialResult]) -> dict:
    conv = nr_frame.build_ledger(cfg.frame_conventional)
    isac = nr_frame.build_ledger(cfg.frame_isac)
    return {
        "schema_version": 1,
        "config": cfg.raw,
        "seed": cfg.seed,
        "scheme": results[0].scheme,
        "trials": len(results),
        "angle_rmse_rad": _nanmean([r.angle_rmse for r in results]),
        "distance_rmse_m": _nanmean([r.distance_rmse for r in results]),
        "meas_angle_rmse_rad": _nanmean([r.meas_angle_rmse for r in results]),
        "ber": float(np.mean([r.ber for r in results])),
        "throughput_mbps": float(np.mean([r.throughput_mbps for r in results])),
        "oh_fraction": results[0].oh_fraction,
        "reduction_fraction": nr_frame.overhead_reduction(conv, isac),
    }


def write_summary_json(cfg: SimConfig, results: list[TrialResult], path: str | Path) -> None:
    Path(path).write_text(json.dumps(summary_dict(cfg, results), indent=2, sort_keys=True) + "\n")


def write_sweep_csv(rows: list[dict], path: str | Path) -> None:
    lines = ["snr_db,scheme,ber,throughput_mbps,oh_fraction"]
    for row in rows:
        lines.append(
            f"{_fmt(row['snr_db'])},{row['scheme']},{_fmt(row['ber'])},"
            f"{_fmt(row['throughput_mbps'])},{_fmt(row['oh_fraction'])}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_cdf_csv(cdf: np.ndarray, path: str | Path) -> None:
    lines = ["error,cumulative_probability"]
    lines.extend(f"{_fmt(v)},{_fmt(p)}" for v, p in cdf)
    Path(path).write_text("\n".join(lines) + "\n")
