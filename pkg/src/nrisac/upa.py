"""Uniform planar array steering vectors and oversampled DFT codebooks.

All arrays have half-wavelength element spacing.  A beam is a unit-norm
complex weight vector of length nx*ny, ordered as the Kronecker product of
the azimuth factor (length nx) with the elevation factor (length ny):
element (p, q) has phase pi * (p * sin(az) * cos(el) + q * sin(el)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UpaConfig:
    """Antenna counts per row (nx) and per column (ny)."""

    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("antenna counts must be >= 1")

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny


@dataclass(frozen=True)
class Codebook:
    """Oversampled DFT beam grid.

    ``vectors`` holds one unit-norm beam per row.  ``azimuths``/``elevations``
    are the pointing labels of each beam; for beams whose spatial-frequency
    pair falls outside the unit disk (no physical pointing direction) the
    azimuth label is clamped to the visible edge.
    """

    azimuths: np.ndarray      # (n_beams,)
    elevations: np.ndarray    # (n_beams,)
    vectors: np.ndarray       # (n_beams, nx*ny) complex
    oversampling: tuple[int, int]

    @property
    def n_beams(self) -> int:
        return self.vectors.shape[0]


def steering_vector(cfg: UpaConfig, azimuth: float, elevation: float) -> np.ndarray:
    """Unit-norm UPA steering vector at (azimuth, elevation)."""
    if not abs(elevation) < np.pi / 2:
        raise ValueError("elevation must satisfy |elevation| < pi/2")
    u = np.sin(azimuth) * np.cos(elevation)
    v = np.sin(elevation)
    return _freq_vector(cfg, u, v)


def conjugate_beamformer(cfg: UpaConfig, azimuth: float, elevation: float) -> np.ndarray:
    """Matched beamformer pointed at (azimuth, elevation).

    Equals the steering vector at the same angles, so the array response
    a(theta)^H f peaks at 1 when the pointing is true.
    """
    return steering_vector(cfg, azimuth, elevation)


def _freq_vector(cfg: UpaConfig, u: float, v: float) -> np.ndarray:
    az = np.exp(1j * np.pi * np.arange(cfg.nx) * u) / np.sqrt(cfg.nx)
    el = np.exp(1j * np.pi * np.arange(cfg.ny) * v) / np.sqrt(cfg.ny)
    return np.kron(az, el)


def _wrap_freq(k: int, n: int) -> float:
    # DFT grid point 2k/n wrapped into [-1, 1)
    f = 2.0 * k / n
    return f - 2.0 if f >= 1.0 else f


def dft_codebook(cfg: UpaConfig, o_az: int = 1, o_el: int = 1) -> Codebook:
    """Build the nx*o_az by ny*o_el oversampled DFT beam grid.

    Per-axis spatial frequencies are wrapped into the visible range [-1, 1),
    so every grid point is kept; with oversampling 1 the beams are the
    orthonormal 2D DFT basis.
    """
    if o_az < 1 or o_el < 1:
        raise ValueError("oversampling factors must be >= 1")
    n_az = cfg.nx * o_az
    n_el = cfg.ny * o_el
    azimuths = np.empty(n_az * n_el)
    elevations = np.empty(n_az * n_el)
    vectors = np.empty((n_az * n_el, cfg.n_elements), dtype=complex)
    i = 0
    for k in range(n_az):
        u = _wrap_freq(k, n_az)
        for l in range(n_el):
            v = _wrap_freq(l, n_el)
            el = np.arcsin(v)
            cos_el = np.cos(el)
            if cos_el > 1e-12:
                az = np.arcsin(np.clip(u / cos_el, -1.0, 1.0))
            else:
                az = 0.0
            azimuths[i] = az
            elevations[i] = el
            vectors[i] = _freq_vector(cfg, u, v)
            i += 1
    return Codebook(
        azimuths=azimuths,
        elevations=elevations,
        vectors=vectors,
        oversampling=(o_az, o_el),
    )


def array_response(cfg: UpaConfig, beam: np.ndarray, azimuth, elevation) -> np.ndarray:
    """|a(azimuth, elevation)^H beam| evaluated over broadcastable angle grids."""
    azimuth = np.asarray(azimuth, dtype=float)
    elevation = np.broadcast_to(np.asarray(elevation, dtype=float), azimuth.shape)
    u = np.sin(azimuth) * np.cos(elevation)
    v = np.sin(elevation)
    az = np.exp(-1j * np.pi * np.outer(u, np.arange(cfg.nx))) / np.sqrt(cfg.nx)
    el = np.exp(-1j * np.pi * np.outer(v, np.arange(cfg.ny))) / np.sqrt(cfg.ny)
    # a^H beam = sum_{p,q} conj(a_pq) beam_pq with the Kronecker layout
    w = beam.reshape(cfg.nx, cfg.ny)
    return np.abs(np.einsum("gp,pq,gq->g", az, w, el))
