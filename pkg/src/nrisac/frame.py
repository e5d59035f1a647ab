"""NR frame-structure accounting: RE ledgers, overhead, and throughput.

All counts are per accounting period (one slot-pattern repetition, e.g.
"DDDSU" = 5 slots) and per resource block (12 subcarriers, 14 symbols per
slot with normal CP).  The conventional mode carries DMRS plus periodic
CSI-RS and keeps guard/uplink symbols; the sensing-assisted mode drops
CSI-RS entirely and reallocates guard and uplink symbols to downlink data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .waveform import Numerology

RE_DATA = 0
RE_DMRS = 1
RE_CSIRS = 2
RE_GUARD = 3
RE_UL = 4

RE_TYPE_NAMES = {RE_DATA: "data", RE_DMRS: "dmrs", RE_CSIRS: "csirs", RE_GUARD: "guard", RE_UL: "ul"}

MODE_CONVENTIONAL = "conventional"
MODE_ISAC = "isac"

_SC_PER_RB = 12
_SYM_PER_SLOT = 14
# DMRS mapping type A: symbol 2 plus one additional DMRS symbol
_DMRS_SYMBOLS = (2, 11)
_CSIRS_SYMBOLS = (5, 6, 7, 8, 9, 10)


@dataclass(frozen=True)
class FrameConfig:
    """Slot pattern and reference-signal budget for one accounting period."""

    numerology: "Numerology"
    pattern: str = "DDDSU"
    dmrs_re_per_period: int = 42
    csirs_re_per_period: int = 32
    csirs_period_slots: int = 5
    csirs_slot_index: int = 0
    special_slot_split: tuple[int, int, int] = (10, 2, 2)  # dl, guard, ul symbols
    mode: str = MODE_CONVENTIONAL

    def __post_init__(self):
        if not self.pattern or set(self.pattern) - set("DSU"):
            raise ValueError("pattern must be a non-empty string over {D, S, U}")
        if sum(self.special_slot_split) != _SYM_PER_SLOT:
            raise ValueError("special slot split must sum to 14 symbols")
        if min(self.special_slot_split) < 0:
            raise ValueError("special slot split entries must be nonnegative")
        if self.dmrs_re_per_period < 0 or self.csirs_re_per_period < 0:
            raise ValueError("reference-signal RE counts must be nonnegative")
        if self.csirs_period_slots != len(self.pattern):
            raise ValueError("csirs_period_slots must equal the pattern length")
        if not 0 <= self.csirs_slot_index < len(self.pattern):
            raise ValueError("csirs_slot_index outside the pattern")
        if self.mode not in (MODE_CONVENTIONAL, MODE_ISAC):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def n_slots(self) -> int:
        return len(self.pattern)


@dataclass(frozen=True)
class ReLedger:
    """Per-period, per-resource-block RE counts by type."""

    total_dl_re: int
    data_re: int
    dmrs_re: int
    csirs_re: int
    guard_re: int
    ul_re: int
    period_slots: int

    @property
    def total_re(self) -> int:
        return _SC_PER_RB * _SYM_PER_SLOT * self.period_slots

    @property
    def reference_re(self) -> int:
        return self.dmrs_re + self.csirs_re


def re_positions(cfg: FrameConfig) -> np.ndarray:
    """Concrete RE-type map, shape (period_slots, 14 symbols, 12 subcarriers).

    Downlink region: D slots contribute all 14 symbols, the S slot its DL
    part; in sensing-assisted mode guard and uplink REs become downlink data.
    DMRS fills a 6-RE comb on symbol 2 of every DL slot, then on symbol 11 of
    full D slots, then the odd-subcarrier combs, until the configured count
    is placed.  CSI-RS fills symbols 5.. of the configured slot (skipping
    DMRS symbols) in conventional mode only.
    """
    n_slots = cfg.n_slots
    grid = np.full((n_slots, _SYM_PER_SLOT, _SC_PER_RB), RE_DATA, dtype=np.int8)
    dl_symbols: list[int] = []
    for i, slot_type in enumerate(cfg.pattern):
        if slot_type == "D":
            dl_symbols.append(_SYM_PER_SLOT)
        elif slot_type == "S":
            dl, guard, ul = cfg.special_slot_split
            dl_symbols.append(dl)
            if cfg.mode == MODE_CONVENTIONAL:
                grid[i, dl : dl + guard, :] = RE_GUARD
                grid[i, dl + guard :, :] = RE_UL
        else:  # U
            dl_symbols.append(0)
            if cfg.mode == MODE_CONVENTIONAL:
                grid[i, :, :] = RE_UL

    # DMRS candidates in deterministic priority order; both modes use the
    # conventional DL positions so the count is mode-invariant.
    combs = (range(0, _SC_PER_RB, 2), range(1, _SC_PER_RB, 2))
    candidates = []
    for comb in combs:
        for sym in _DMRS_SYMBOLS:
            for i in range(n_slots):
                if sym < dl_symbols[i]:
                    candidates.extend((i, sym, sc) for sc in comb)
    if cfg.dmrs_re_per_period > len(candidates):
        raise ValueError(
            f"cannot place {cfg.dmrs_re_per_period} DMRS REs "
            f"({len(candidates)} candidate positions)"
        )
    for slot, sym, sc in candidates[: cfg.dmrs_re_per_period]:
        grid[slot, sym, sc] = RE_DMRS

    if cfg.mode == MODE_CONVENTIONAL and cfg.csirs_re_per_period > 0:
        slot = cfg.csirs_slot_index
        positions = [
            (sym, sc)
            for sym in _CSIRS_SYMBOLS
            if sym < dl_symbols[slot] and sym not in _DMRS_SYMBOLS
            for sc in range(_SC_PER_RB)
        ]
        if cfg.csirs_re_per_period > len(positions):
            raise ValueError(
                f"cannot place {cfg.csirs_re_per_period} CSI-RS REs in slot {slot}"
            )
        for sym, sc in positions[: cfg.csirs_re_per_period]:
            grid[slot, sym, sc] = RE_CSIRS
    return grid


def build_ledger(cfg: FrameConfig) -> ReLedger:
    """RE counts by type over one period of one resource block."""
    grid = re_positions(cfg)
    counts = {t: int(np.sum(grid == t)) for t in RE_TYPE_NAMES}
    total_dl = counts[RE_DATA] + counts[RE_DMRS] + counts[RE_CSIRS]
    return ReLedger(
        total_dl_re=total_dl,
        data_re=counts[RE_DATA],
        dmrs_re=counts[RE_DMRS],
        csirs_re=counts[RE_CSIRS],
        guard_re=counts[RE_GUARD],
        ul_re=counts[RE_UL],
        period_slots=cfg.n_slots,
    )


def overhead_fraction(ledger: ReLedger) -> float:
    """Fraction of downlink REs spent on reference signals."""
    if ledger.total_dl_re <= 0:
        raise ValueError("ledger has no downlink REs")
    return ledger.reference_re / ledger.total_dl_re


def overhead_reduction(conv: ReLedger, isac: ReLedger) -> float:
    """Relative cut in reference-signal REs going from conventional to ISAC."""
    if conv.reference_re <= 0:
        raise ValueError("conventional ledger has no reference REs")
    return (conv.reference_re - isac.reference_re) / conv.reference_re


@dataclass(frozen=True)
class ThroughputParams:
    """Inputs of the NR throughput formula."""

    modulation_order: int
    n_prb: int
    symbol_duration: float    # seconds
    ber: float = 0.0
    overhead: float = 0.0
    layers: int = 1
    carriers: int = 1

    def __post_init__(self):
        if self.ber < 0 or self.overhead < 0 or self.ber + self.overhead > 1:
            raise ValueError("need 0 <= ber, overhead and ber + overhead <= 1")
        if min(self.modulation_order, self.n_prb, self.layers, self.carriers) < 1:
            raise ValueError("counts must be positive")
        if self.symbol_duration <= 0:
            raise ValueError("symbol duration must be positive")


def throughput(params: ThroughputParams) -> float:
    """Throughput in Mbps: 1e-6 * J * layers * Q_m * (N_PRB*12/T_s) * (1-BER-OH)."""
    per_carrier = (
        params.layers
        * params.modulation_order
        * (params.n_prb * _SC_PER_RB / params.symbol_duration)
        * (1.0 - params.ber - params.overhead)
    )
    return 1e-6 * params.carriers * per_carrier


def ledger_as_dict(ledger: ReLedger) -> dict:
    return {
        "total_dl_re": ledger.total_dl_re,
        "data_re": ledger.data_re,
        "dmrs_re": ledger.dmrs_re,
        "csirs_re": ledger.csirs_re,
        "guard_re": ledger.guard_re,
        "ul_re": ledger.ul_re,
        "period_slots": ledger.period_slots,
        "overhead_fraction": overhead_fraction(ledger),
    }
