"""NR numerology arithmetic, Gray-mapped QAM, and OFDM resource grids.

The simulator works entirely at resource-element level: a grid is an M x L
complex matrix of frequency-domain symbols, never an IFFT time waveform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame import RE_CSIRS, RE_DATA, RE_DMRS

SYMBOLS_PER_SLOT = 14  # normal cyclic prefix


@dataclass(frozen=True)
class Numerology:
    """Subcarrier spacing family: scs = 2^mu * 15 kHz."""

    mu: int
    scs: float                # Hz
    slots_per_subframe: int
    symbol_duration: float    # seconds, CP-inclusive average T_s
    cp_duration: float        # seconds
    useful_duration: float    # seconds, 1 / scs

    @property
    def slot_duration(self) -> float:
        return self.symbol_duration * SYMBOLS_PER_SLOT


def numerology_params(mu: int) -> Numerology:
    """Numerology constants for index mu in 0..6."""
    if not 0 <= mu <= 6:
        raise ValueError(f"numerology index must be in 0..6, got {mu}")
    scs = 15e3 * 2**mu
    useful = 1.0 / scs
    symbol = 1e-3 / (SYMBOLS_PER_SLOT * 2**mu)
    return Numerology(
        mu=mu,
        scs=scs,
        slots_per_subframe=2**mu,
        symbol_duration=symbol,
        cp_duration=symbol - useful,
        useful_duration=useful,
    )


@dataclass(frozen=True)
class BitPayload:
    """Bit sequence plus the modulation order it will be mapped with."""

    bits: np.ndarray          # uint8 values in {0, 1}
    modulation_order: int     # Q_m bits per symbol

    def __post_init__(self):
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=np.uint8))
        if self.bits.ndim != 1 or not np.all(self.bits <= 1):
            raise ValueError("bits must be a 1D array of 0/1")
        if len(self.bits) % self.modulation_order != 0:
            raise ValueError("bit count must be divisible by the modulation order")

    @property
    def n_symbols(self) -> int:
        return len(self.bits) // self.modulation_order


def random_payload(n_symbols: int, q_m: int, rng: np.random.Generator) -> BitPayload:
    return BitPayload(rng.integers(0, 2, size=n_symbols * q_m, dtype=np.uint8), q_m)


# --- Gray-mapped square QAM -------------------------------------------------
#
# Even-indexed bits map to the in-phase axis, odd-indexed to quadrature.
# Per axis, the bit group is read as a Gray code; index 0 is the most
# positive level, so QPSK bits 00 -> (1+1j)/sqrt(2).

_AXIS_NORM = {2: np.sqrt(2.0), 4: np.sqrt(10.0), 6: np.sqrt(42.0)}


def _gray_decode(bits: np.ndarray) -> np.ndarray:
    # bits shape (..., m) -> binary index, MSB first
    out = bits[..., 0].astype(np.int64)
    for j in range(1, bits.shape[-1]):
        out = (out << 1) | (out & 1) ^ bits[..., j]
    return out


def _gray_encode(idx: np.ndarray, m: int) -> np.ndarray:
    g = idx ^ (idx >> 1)
    return ((g[..., None] >> np.arange(m - 1, -1, -1)) & 1).astype(np.uint8)


def constellation(q_m: int) -> np.ndarray:
    """All 2^q_m constellation points indexed by the packed bit word."""
    if q_m not in _AXIS_NORM:
        raise ValueError(f"unsupported modulation order {q_m} (use 2, 4 or 6)")
    m = q_m // 2
    levels = 2**m
    words = ((np.arange(2**q_m)[:, None] >> np.arange(q_m - 1, -1, -1)) & 1).astype(np.uint8)
    i_idx = _gray_decode(words[:, 0::2])
    q_idx = _gray_decode(words[:, 1::2])
    amp = lambda idx: (levels - 1) - 2 * idx
    return (amp(i_idx) + 1j * amp(q_idx)) / _AXIS_NORM[q_m]


def qam_modulate(payload: BitPayload) -> np.ndarray:
    """Map the payload bits to unit-average-energy QAM symbols."""
    q_m = payload.modulation_order
    table = constellation(q_m)
    words = payload.bits.reshape(-1, q_m)
    idx = np.zeros(len(words), dtype=np.int64)
    for j in range(q_m):
        idx = (idx << 1) | words[:, j]
    return table[idx]


def qam_demodulate(symbols: np.ndarray, q_m: int) -> BitPayload:
    """Hard-decision nearest-point demapping back to bits."""
    if q_m not in _AXIS_NORM:
        raise ValueError(f"unsupported modulation order {q_m} (use 2, 4 or 6)")
    m = q_m // 2
    levels = 2**m
    scale = _AXIS_NORM[q_m]
    symbols = np.asarray(symbols).ravel()

    def axis_bits(x):
        idx = np.rint(((levels - 1) - x * scale) / 2.0).astype(np.int64)
        return _gray_encode(np.clip(idx, 0, levels - 1), m)

    i_bits = axis_bits(symbols.real)
    q_bits = axis_bits(symbols.imag)
    bits = np.empty((len(symbols), q_m), dtype=np.uint8)
    bits[:, 0::2] = i_bits
    bits[:, 1::2] = q_bits
    return BitPayload(bits.ravel(), q_m)


# --- Resource grid ----------------------------------------------------------


@dataclass(frozen=True)
class ResourceGrid:
    """M x L frequency-domain symbol matrix plus numerology metadata.

    ``re_types`` (same shape) labels each RE with the frame module's type
    codes; when absent every RE is payload data.
    """

    symbols: np.ndarray       # (M, L) complex
    m_subcarriers: int
    l_symbols: int
    numerology: Numerology
    re_types: np.ndarray | None = None

    @property
    def data_mask(self) -> np.ndarray:
        if self.re_types is None:
            return np.ones((self.m_subcarriers, self.l_symbols), dtype=bool)
        return self.re_types == RE_DATA

    @property
    def n_data_re(self) -> int:
        return int(self.data_mask.sum())


def expand_re_types(rb_types: np.ndarray, m_subcarriers: int) -> np.ndarray:
    """Tile a per-resource-block (12 x L) RE-type map over M subcarriers."""
    reps = -(-m_subcarriers // 12)
    return np.tile(rb_types, (reps, 1))[:m_subcarriers]


def _fill_grid(
    m_subcarriers: int,
    l_symbols: int,
    payload: BitPayload,
    numerology: Numerology,
    re_types: np.ndarray | None,
    pilot_rng: np.random.Generator | None,
) -> ResourceGrid:
    symbols = np.zeros((m_subcarriers, l_symbols), dtype=complex)
    if re_types is None:
        mask = np.ones((m_subcarriers, l_symbols), dtype=bool)
    else:
        if re_types.shape != (m_subcarriers, l_symbols):
            raise ValueError("re_types shape must match the grid")
        mask = re_types == RE_DATA
    n_data = int(mask.sum())
    if payload.n_symbols != n_data:
        raise ValueError(
            f"payload carries {payload.n_symbols} symbols but the grid has {n_data} data REs"
        )
    data = qam_modulate(payload)
    # column-major by symbol index: fill subcarriers within each symbol
    order = np.argwhere(mask.T)
    symbols[order[:, 1], order[:, 0]] = data
    if re_types is not None and pilot_rng is not None:
        pilot_mask = (re_types == RE_DMRS) | (re_types == RE_CSIRS)
        n_pilot = int(pilot_mask.sum())
        if n_pilot:
            pilots = qam_modulate(random_payload(n_pilot, 2, pilot_rng))
            order = np.argwhere(pilot_mask.T)
            symbols[order[:, 1], order[:, 0]] = pilots
    return ResourceGrid(symbols, m_subcarriers, l_symbols, numerology, re_types)


def build_grid(
    n_prb: int,
    l_symbols: int,
    payload: BitPayload,
    numerology: Numerology,
    re_types: np.ndarray | None = None,
    pilot_rng: np.random.Generator | None = None,
) -> ResourceGrid:
    """Assemble a 12*n_prb by l_symbols grid from payload bits.

    Data REs are filled column-major by symbol index; DMRS/CSI-RS REs get
    unit-magnitude QPSK pilots from ``pilot_rng``; guard and uplink REs stay
    zero (never transmitted downlink).
    """
    if n_prb < 1:
        raise ValueError("n_prb must be >= 1")
    return _fill_grid(12 * n_prb, l_symbols, payload, numerology, re_types, pilot_rng)


def build_grid_subcarriers(
    m_subcarriers: int,
    l_symbols: int,
    payload: BitPayload,
    numerology: Numerology,
    re_types: np.ndarray | None = None,
    pilot_rng: np.random.Generator | None = None,
) -> ResourceGrid:
    """Like build_grid but with a raw subcarrier count (reduced-scale runs)."""
    if m_subcarriers < 1:
        raise ValueError("m_subcarriers must be >= 1")
    return _fill_grid(m_subcarriers, l_symbols, payload, numerology, re_types, pilot_rng)
