"""Range, velocity, angle and reflection estimation from the echo cube.

Pipeline: element-wise division by the transmitted symbols, a 2D DFT per
antenna (inverse along subcarriers for delay, forward along symbols for
Doppler), non-coherent peak detection, subspace-based angle estimation over
the antenna dimension, and inversion of the synthesis gain for beta.

Index convention: the delay bin lives on the subcarrier-transform axis
(M bins, resolution c / (2 M' df)) and the Doppler bin on the
symbol-transform axis (L bins, resolution c / (2 f_c L' T_s)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .upa import UpaConfig, steering_vector
from .waveform import Numerology, ResourceGrid


@dataclass(frozen=True)
class RangeDopplerMap:
    """Magnitude map over (delay bin, Doppler bin) with physical bin sizes."""

    magnitudes: np.ndarray    # (M', L') real
    range_bin_m: float        # meters per delay bin, c / (2 M' df)
    velocity_bin_mps: float   # m/s per Doppler bin, c / (2 f_c L' T_s)
    pad_m: int
    pad_l: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.magnitudes.shape


@dataclass(frozen=True)
class MusicResult:
    """Spatial spectrum over the azimuth grid and its top-K peak angles."""

    grid: np.ndarray          # scanned azimuths, radians
    spectrum: np.ndarray      # same length, positive
    estimates: np.ndarray     # (k,) azimuths sorted by peak height
    grid_step: float


@dataclass(frozen=True)
class Measurement:
    """One radar observation of the kinematic state, with its covariance."""

    azimuth: float
    distance: float
    speed: float              # road speed, radial / cos(azimuth)
    reflection: complex
    covariance: np.ndarray    # 4x4 diagonal
    velocity_valid: bool = True


def matched_division(echo: np.ndarray, grid: ResourceGrid) -> np.ndarray:
    """Divide the echo cube element-wise by the transmitted symbols.

    Returns one (M, L) divided grid per antenna, stacked as (N_r, M, L).
    """
    if echo.shape[1:] != grid.symbols.shape:
        raise ValueError("echo cube does not match the resource grid")
    if np.any(grid.symbols == 0):
        raise ValueError("grid contains zero symbols; division undefined")
    return echo / grid.symbols[None, :, :]


def range_doppler_map(
    div: np.ndarray,
    numerology: Numerology,
    carrier_hz: float,
    pad_m: int = 1,
    pad_l: int = 1,
) -> RangeDopplerMap:
    """2D DFT of one divided grid: IDFT over subcarriers, DFT over symbols.

    Zero padding by pad_m/pad_l refines the bin grid.  An approaching target
    (positive radial velocity) lands at a positive Doppler bin.
    """
    if pad_m < 1 or pad_l < 1:
        raise ValueError("pad factors must be >= 1")
    mags = np.abs(_complex_range_doppler(div, pad_m, pad_l))
    m_pad, l_pad = mags.shape
    return RangeDopplerMap(
        magnitudes=mags,
        range_bin_m=SPEED_OF_LIGHT / (2.0 * m_pad * numerology.scs),
        velocity_bin_mps=SPEED_OF_LIGHT
        / (2.0 * carrier_hz * l_pad * numerology.symbol_duration),
        pad_m=pad_m,
        pad_l=pad_l,
    )


def _complex_range_doppler(div: np.ndarray, pad_m: int, pad_l: int) -> np.ndarray:
    m, l = div.shape
    ranged = np.fft.ifft(div, n=m * pad_m, axis=0)
    return np.fft.fft(ranged, n=l * pad_l, axis=1) / l


def combine_maps(maps: list[RangeDopplerMap]) -> RangeDopplerMap:
    """Non-coherent average of per-antenna maps (bin geometry preserved)."""
    if not maps:
        raise ValueError("no maps to combine")
    avg = np.mean([m.magnitudes for m in maps], axis=0)
    first = maps[0]
    return RangeDopplerMap(avg, first.range_bin_m, first.velocity_bin_mps, first.pad_m, first.pad_l)


def combined_range_doppler(
    divs: np.ndarray,
    numerology: Numerology,
    carrier_hz: float,
    pad_m: int = 1,
    pad_l: int = 1,
) -> RangeDopplerMap:
    """Batched per-antenna transform plus non-coherent magnitude averaging.

    Equivalent to combine_maps over range_doppler_map per antenna, but with
    one 3D FFT pass over the whole cube.
    """
    if pad_m < 1 or pad_l < 1:
        raise ValueError("pad factors must be >= 1")
    n_ant, m, l = divs.shape
    ranged = np.fft.ifft(divs, n=m * pad_m, axis=1)
    full = np.fft.fft(ranged, n=l * pad_l, axis=2) / l
    mags = np.mean(np.abs(full), axis=0)
    return RangeDopplerMap(
        magnitudes=mags,
        range_bin_m=SPEED_OF_LIGHT / (2.0 * m * pad_m * numerology.scs),
        velocity_bin_mps=SPEED_OF_LIGHT
        / (2.0 * carrier_hz * l * pad_l * numerology.symbol_duration),
        pad_m=pad_m,
        pad_l=pad_l,
    )


def detect_peaks(
    rd_map: RangeDopplerMap, k: int, guard: tuple[int, int] = (1, 1)
) -> list[tuple[int, int]]:
    """The k strongest map cells with a guard neighborhood excluded per peak.

    ``guard`` is in unpadded bins per axis; the Doppler axis wraps.  Peaks
    come back strongest first.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    mags = rd_map.magnitudes.copy()
    m_pad, l_pad = mags.shape
    g_m = guard[0] * rd_map.pad_m
    g_l = guard[1] * rd_map.pad_l
    peaks: list[tuple[int, int]] = []
    for _ in range(k):
        if not np.any(np.isfinite(mags)):
            raise ValueError(f"only found {len(peaks)} peaks, needed {k}")
        i, j = np.unravel_index(int(np.argmax(mags)), mags.shape)
        peaks.append((int(i), int(j)))
        lo_m, hi_m = max(0, i - g_m), min(m_pad, i + g_m + 1)
        cols = np.arange(j - g_l, j + g_l + 1) % l_pad
        mags[lo_m:hi_m, cols[None, :]] = -np.inf
    return peaks


def bins_to_range_velocity(
    peak: tuple[int, int], rd_map: RangeDopplerMap
) -> tuple[float, float]:
    """Convert a (delay bin, Doppler bin) pair to (distance m, radial m/s)."""
    delay_bin, doppler_bin = peak
    m_pad, l_pad = rd_map.shape
    if not (0 <= delay_bin < m_pad and 0 <= doppler_bin < l_pad):
        raise ValueError("peak outside the map")
    signed = doppler_bin if doppler_bin < (l_pad + 1) // 2 else doppler_bin - l_pad
    return delay_bin * rd_map.range_bin_m, signed * rd_map.velocity_bin_mps


def peak_amplitudes(divs: np.ndarray, peak: tuple[int, int], rd_map: RangeDopplerMap) -> np.ndarray:
    """Complex per-antenna amplitude at one map cell, normalized so a
    noiseless on-grid target returns exactly its synthesis gain alpha_i."""
    m, l = divs.shape[1:]
    m_pad, l_pad = rd_map.shape
    delay_bin, doppler_bin = peak
    delay_probe = np.exp(2j * np.pi * np.arange(m) * delay_bin / m_pad) / m
    doppler_probe = np.exp(-2j * np.pi * np.arange(l) * doppler_bin / l_pad) / l
    return np.einsum("iml,m,l->i", divs, delay_probe, doppler_probe)


def music_doa(
    divs: np.ndarray,
    rx_cfg: UpaConfig,
    k: int,
    grid_step: float,
    elevation: float,
    grid_limit: float = np.radians(89.9),
) -> MusicResult:
    """Subspace azimuth estimation across the antenna dimension.

    The sample covariance pools all M*L divided cells as antenna snapshots;
    its K principal eigenvectors span the steering directions, and the
    spatial spectrum is 1 / ||U_n^H b(theta)||^2 over the azimuth grid at the
    supplied (known) elevation.
    """
    n_r = divs.shape[0]
    if k >= n_r:
        raise ValueError("model order must be below the antenna count")
    if not np.all(np.isfinite(divs)):
        raise ValueError("divided grids contain non-finite values")
    n_sym = divs.shape[2]
    x = divs.reshape(n_r, -1)
    cov = (x @ x.conj().T) / n_sym
    _, vecs = np.linalg.eigh(cov)
    noise_space = vecs[:, : n_r - k]

    grid = np.arange(-grid_limit, grid_limit + grid_step / 2, grid_step)
    u = np.sin(grid) * np.cos(elevation)
    v = np.sin(elevation)
    az = np.exp(1j * np.pi * np.outer(np.arange(rx_cfg.nx), u)) / np.sqrt(rx_cfg.nx)
    el = np.exp(1j * np.pi * np.arange(rx_cfg.ny) * v) / np.sqrt(rx_cfg.ny)
    steer = np.einsum("pg,q->pqg", az, el).reshape(rx_cfg.n_elements, -1)
    denom = np.sum(np.abs(noise_space.conj().T @ steer) ** 2, axis=0)
    spectrum = 1.0 / np.maximum(denom, 1e-300)

    interior = (spectrum[1:-1] > spectrum[:-2]) & (spectrum[1:-1] >= spectrum[2:])
    maxima = np.where(interior)[0] + 1
    if len(maxima) < k:
        extra = np.argsort(spectrum)[::-1]
        maxima = np.unique(np.concatenate([maxima, extra[: k - len(maxima)]]))
    top = maxima[np.argsort(spectrum[maxima])[::-1][:k]]
    return MusicResult(
        grid=grid,
        spectrum=spectrum,
        estimates=grid[top],
        grid_step=grid_step,
    )


def estimate_beta(d_hat: float, echo_amplitude: complex, tx_gain_model: complex) -> complex:
    """Invert the synthesis gain: beta = amplitude / (zeta sqrt(p) a^H f).

    ``tx_gain_model`` is the known factor zeta * sqrt(p) * a(theta_hat)^H f;
    ``echo_amplitude`` is the receive-combined peak amplitude b^H alpha.
    """
    if d_hat <= 0:
        raise ValueError("distance estimate must be positive")
    if echo_amplitude == 0:
        return 0.0 + 0.0j
    if abs(tx_gain_model) < 1e-12:
        raise ValueError("transmit gain model is numerically zero")
    return echo_amplitude / tx_gain_model


def combine_peak_amplitude(
    amps: np.ndarray, rx_cfg: UpaConfig, azimuth: float, elevation: float
) -> complex:
    """Coherent receive combining b(theta)^H alpha of per-antenna amplitudes."""
    b = steering_vector(rx_cfg, azimuth, elevation)
    return complex(np.vdot(b, amps))


def assemble_measurement(
    azimuth: float,
    distance: float,
    radial_velocity: float,
    reflection: complex,
    sigmas: np.ndarray,
    cos_floor: float = 0.05,
) -> Measurement:
    """Package raw estimates as a state-space measurement.

    The road speed is radial_velocity / cos(azimuth); when |cos| falls at or
    below ``cos_floor`` the conversion is near singular and the velocity
    component is flagged invalid (the tracker then keeps its prediction).
    """
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.shape != (4,) or np.any(sigmas <= 0):
        raise ValueError("need 4 positive measurement sigmas")
    cos_az = np.cos(azimuth)
    valid = bool(abs(cos_az) > cos_floor)
    speed = radial_velocity / cos_az if valid else 0.0
    return Measurement(
        azimuth=float(azimuth),
        distance=float(distance),
        speed=float(speed),
        reflection=complex(reflection),
        covariance=np.diag(sigmas**2),
        velocity_valid=valid,
    )


def dump_range_doppler_csv(rd_map: RangeDopplerMap, path) -> None:
    """Write the magnitude map as CSV (rows = delay bins)."""
    np.savetxt(path, rd_map.magnitudes, delimiter=",", fmt="%.9g")


def dump_music_csv(result: MusicResult, path) -> None:
    """Write (azimuth_rad, spectrum) rows as CSV."""
    np.savetxt(
        path,
        np.column_stack([result.grid, result.spectrum]),
        delimiter=",",
        fmt="%.9g",
        header="azimuth_rad,spectrum",
        comments="",
    )
