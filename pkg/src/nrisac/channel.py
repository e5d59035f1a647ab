"""Radar echo and downlink channel synthesis at resource-element level.

The echo observed at BS antenna i, subcarrier m, symbol l for a set of
point scatterers is

    r[i, m, l] = zeta sqrt(p) sum_k beta_k b_i(th_k) (a(th_k)^H f) s[m, l]
                 * exp(+j 2 pi mu_k l T_s) exp(-j 2 pi m df tau_k) + noise

with zeta = sqrt(N_t N_r) and unit-norm steering vectors.  The downlink is
flat per slot: the vehicle sees g * s[m, l] + noise with a single complex
effective gain g (cyclic prefix absorbs the delays).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .scenario import (
    LOS_VEHICLE,
    SceneGeometry,
    ScattererSpec,
    TargetParams,
    VehicleState,
    observe,
)
from .upa import UpaConfig, steering_vector
from .waveform import ResourceGrid


@dataclass(frozen=True)
class SnrSpec:
    """Transmit SNR definition: p over the per-RE noise variance."""

    transmit_snr: float      # linear
    power: float = 1.0       # p, normalized

    def __post_init__(self):
        if self.transmit_snr <= 0:
            raise ValueError("transmit SNR must be positive")
        if self.power <= 0:
            raise ValueError("power must be positive")

    @property
    def noise_var(self) -> float:
        return self.power / self.transmit_snr

    @classmethod
    def from_db(cls, snr_db: float, power: float = 1.0) -> "SnrSpec":
        return cls(transmit_snr=10.0 ** (snr_db / 10.0), power=power)


@dataclass(frozen=True)
class LinkSample:
    """Beamformed downlink observation at the vehicle for one slot."""

    rx_symbols: np.ndarray   # (M, L) complex
    effective_gain: complex  # includes sqrt(p) and both beamforming gains
    noise_var: float

    @property
    def receive_snr(self) -> float:
        if self.noise_var == 0:
            return np.inf
        return abs(self.effective_gain) ** 2 / self.noise_var


def _complex_noise(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    scale = np.sqrt(var / 2.0)
    return rng.normal(scale=scale, size=shape) + 1j * rng.normal(scale=scale, size=shape)


def synthesize_echo(
    grid: ResourceGrid,
    targets: list[TargetParams],
    tx_beam: np.ndarray,
    tx_cfg: UpaConfig,
    rx_cfg: UpaConfig,
    snr: SnrSpec | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Echo cube of shape (N_r, M, L); pass snr=None for the noiseless echo."""
    if not targets:
        raise ValueError("need at least one target")
    if tx_beam.shape != (tx_cfg.n_elements,):
        raise ValueError("transmit beam length does not match the transmit array")
    m_idx = np.arange(grid.m_subcarriers)
    l_idx = np.arange(grid.l_symbols)
    df = grid.numerology.scs
    t_sym = grid.numerology.symbol_duration
    power = snr.power if snr is not None else 1.0
    zeta = np.sqrt(tx_cfg.n_elements * rx_cfg.n_elements)
    echo = np.zeros((rx_cfg.n_elements, grid.m_subcarriers, grid.l_symbols), dtype=complex)
    for tgt in targets:
        a = steering_vector(tx_cfg, tgt.azimuth, tgt.elevation)
        b = steering_vector(rx_cfg, tgt.azimuth, tgt.elevation)
        gain = zeta * np.sqrt(power) * tgt.reflection * np.vdot(a, tx_beam)
        delay_ramp = np.exp(-2j * np.pi * m_idx * df * tgt.delay)
        doppler_ramp = np.exp(2j * np.pi * tgt.doppler * l_idx * t_sym)
        echo += gain * b[:, None, None] * (grid.symbols * np.outer(delay_ramp, doppler_ramp))
    if snr is not None:
        if rng is None:
            raise ValueError("noisy synthesis needs an rng")
        echo += _complex_noise(rng, echo.shape, snr.noise_var)
    return echo


def transmit_link(
    grid: ResourceGrid,
    paths: list[tuple[TargetParams, complex]],
    tx_beam: np.ndarray,
    rx_beam: np.ndarray,
    tx_cfg: UpaConfig,
    rx_cfg: UpaConfig,
    snr: SnrSpec | None = None,
    rng: np.random.Generator | None = None,
) -> LinkSample:
    """Downlink through the beamformed multipath channel for one slot."""
    if tx_beam.shape != (tx_cfg.n_elements,):
        raise ValueError("transmit beam length does not match the transmit array")
    if rx_beam.shape != (rx_cfg.n_elements,):
        raise ValueError("receive beam length does not match the vehicle array")
    power = snr.power if snr is not None else 1.0
    zeta = np.sqrt(tx_cfg.n_elements * rx_cfg.n_elements)
    gain = 0.0 + 0.0j
    for tgt, path_gain in paths:
        a = steering_vector(tx_cfg, tgt.azimuth, tgt.elevation)
        u = steering_vector(rx_cfg, tgt.azimuth, tgt.elevation)
        gain += path_gain * np.vdot(rx_beam, u) * np.vdot(a, tx_beam)
    gain *= zeta * np.sqrt(power)
    rx = gain * grid.symbols
    noise_var = 0.0
    if snr is not None:
        if rng is None:
            raise ValueError("noisy transmission needs an rng")
        noise_var = snr.noise_var
        rx = rx + _complex_noise(rng, rx.shape, noise_var)
    return LinkSample(rx_symbols=rx, effective_gain=complex(gain), noise_var=noise_var)


def path_gains_from_scene(
    scene: list[ScattererSpec],
    vstate: VehicleState,
    geom: SceneGeometry,
    carrier_hz: float,
    reference_gain: float = 1.0,
    nlos_rel_power_db: float = -10.0,
) -> list[tuple[TargetParams, complex]]:
    """Communication path list (angles plus complex gains) for the scene.

    The LoS gain magnitude is reference_gain / distance; each NLoS reflector
    sits the configured number of dB below it.  Phases follow the carrier
    phase of the geometric path lengths.
    """
    if not scene:
        raise ValueError("scene must contain at least one scatterer")
    los = [s for s in scene if s.kind == LOS_VEHICLE]
    if len(los) != 1:
        raise ValueError("scene must contain exactly one LoS vehicle entry")
    vehicle_pos = np.array([vstate.position[0], vstate.position[1], geom.vehicle_height])
    los_target = observe(geom, vstate, los[0], carrier_hz)
    los_mag = reference_gain / los_target.distance
    paths: list[tuple[TargetParams, complex]] = []
    nlos_scale = 10.0 ** (nlos_rel_power_db / 20.0)
    for scat in scene:
        tgt = observe(geom, vstate, scat, carrier_hz)
        if scat.kind == LOS_VEHICLE:
            length = tgt.distance
            mag = los_mag
        else:
            length = tgt.distance + float(np.linalg.norm(scat.position - vehicle_pos))
            mag = los_mag * nlos_scale
        phase = np.exp(-2j * np.pi * carrier_hz * length / SPEED_OF_LIGHT)
        paths.append((tgt, mag * phase * scat.path_gain))
    return paths
