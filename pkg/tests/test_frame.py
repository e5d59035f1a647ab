import numpy as np
import pytest

from nrisac.frame import (
    MODE_CONVENTIONAL,
    MODE_ISAC,
    RE_CSIRS,
    RE_DATA,
    RE_DMRS,
    RE_GUARD,
    RE_UL,
    FrameConfig,
    ReLedger,
    ThroughputParams,
    build_ledger,
    overhead_fraction,
    overhead_reduction,
    re_positions,
    throughput,
)
from nrisac.waveform import numerology_params

NUM = numerology_params(3)


def frame_cfg(mode=MODE_CONVENTIONAL, **kwargs):
    defaults = dict(numerology=NUM, mode=mode)
    defaults.update(kwargs)
    return FrameConfig(**defaults)


class TestLedger:
    def test_conventional_defaults(self):
        ledger = build_ledger(frame_cfg())
        assert ledger.dmrs_re == 42
        assert ledger.csirs_re == 32
        assert ledger.total_dl_re == 624
        assert ledger.data_re == 550

    def test_isac_drops_csirs_keeps_dmrs(self):
        ledger = build_ledger(frame_cfg(MODE_ISAC))
        assert ledger.csirs_re == 0
        assert ledger.dmrs_re == 42
        assert ledger.guard_re == 0
        assert ledger.ul_re == 0
        assert ledger.total_dl_re == 840

    def test_single_empty_downlink_slot(self):
        cfg = frame_cfg(pattern="D", dmrs_re_per_period=0, csirs_re_per_period=0,
                        csirs_period_slots=1)
        ledger = build_ledger(cfg)
        assert ledger.data_re == 168
        assert overhead_fraction(ledger) == 0.0

    @pytest.mark.parametrize("mode", [MODE_CONVENTIONAL, MODE_ISAC])
    @pytest.mark.parametrize("pattern,split", [
        ("DDDSU", (10, 2, 2)),
        ("DDSU", (6, 4, 4)),
        ("DSUUD", (3, 10, 1)),
        ("DDDDD", (10, 2, 2)),
    ])
    def test_conservation(self, mode, pattern, split):
        cfg = frame_cfg(mode, pattern=pattern, special_slot_split=split,
                        csirs_period_slots=len(pattern), dmrs_re_per_period=24,
                        csirs_re_per_period=12)
        ledger = build_ledger(cfg)
        total = ledger.data_re + ledger.dmrs_re + ledger.csirs_re + ledger.guard_re + ledger.ul_re
        assert total == 12 * 14 * len(pattern) == ledger.total_re

    def test_isac_never_loses_data_res(self):
        for pattern, split in [("DDDSU", (10, 2, 2)), ("DSU", (7, 3, 4)), ("DU", (10, 2, 2))]:
            kwargs = dict(pattern=pattern, special_slot_split=split,
                          csirs_period_slots=len(pattern), dmrs_re_per_period=12,
                          csirs_re_per_period=8)
            conv = build_ledger(frame_cfg(MODE_CONVENTIONAL, **kwargs))
            isac = build_ledger(frame_cfg(MODE_ISAC, **kwargs))
            assert isac.data_re >= conv.data_re

    def test_invalid_configs_rejected(self):
        with pytest.raises(ValueError):
            frame_cfg(pattern="DDXSU")
        with pytest.raises(ValueError):
            frame_cfg(special_slot_split=(10, 2, 1))
        with pytest.raises(ValueError):
            frame_cfg(csirs_period_slots=4)
        with pytest.raises(ValueError):
            frame_cfg(dmrs_re_per_period=-1)

    def test_unplaceable_counts_rejected(self):
        with pytest.raises(ValueError):
            re_positions(frame_cfg(dmrs_re_per_period=500))
        with pytest.raises(ValueError):
            re_positions(frame_cfg(csirs_re_per_period=100))


class TestOverhead:
    def test_conventional_fraction(self):
        ledger = build_ledger(frame_cfg())
        assert overhead_fraction(ledger) == pytest.approx(74 / 624)

    def test_all_overhead_degenerate(self):
        ledger = ReLedger(total_dl_re=74, data_re=0, dmrs_re=42, csirs_re=32,
                          guard_re=0, ul_re=0, period_slots=1)
        assert overhead_fraction(ledger) == 1.0

    def test_empty_ledger_rejected(self):
        ledger = ReLedger(0, 0, 0, 0, 0, 0, period_slots=1)
        with pytest.raises(ValueError):
            overhead_fraction(ledger)

    def test_reduction_is_4324_percent(self):
        conv = build_ledger(frame_cfg(MODE_CONVENTIONAL))
        isac = build_ledger(frame_cfg(MODE_ISAC))
        assert overhead_reduction(conv, isac) == pytest.approx(32 / 74, rel=1e-12)

    def test_reduction_identical_ledgers_zero(self):
        conv = build_ledger(frame_cfg(MODE_CONVENTIONAL))
        assert overhead_reduction(conv, conv) == 0.0

    def test_reduction_csirs_only_is_total(self):
        kwargs = dict(dmrs_re_per_period=0, csirs_re_per_period=32)
        conv = build_ledger(frame_cfg(MODE_CONVENTIONAL, **kwargs))
        isac = build_ledger(frame_cfg(MODE_ISAC, **kwargs))
        assert overhead_reduction(conv, isac) == 1.0

    def test_reduction_scale_invariant(self):
        conv = build_ledger(frame_cfg(MODE_CONVENTIONAL))
        isac = build_ledger(frame_cfg(MODE_ISAC))
        scale = 7
        conv_s = ReLedger(conv.total_dl_re * scale, conv.data_re * scale,
                          conv.dmrs_re * scale, conv.csirs_re * scale,
                          conv.guard_re * scale, conv.ul_re * scale, conv.period_slots)
        isac_s = ReLedger(isac.total_dl_re * scale, isac.data_re * scale,
                          isac.dmrs_re * scale, isac.csirs_re * scale,
                          isac.guard_re * scale, isac.ul_re * scale, isac.period_slots)
        assert overhead_reduction(conv_s, isac_s) == pytest.approx(
            overhead_reduction(conv, isac), rel=1e-12
        )


class TestThroughput:
    def table_params(self, **kwargs):
        defaults = dict(modulation_order=4, n_prb=52, symbol_duration=NUM.symbol_duration,
                        ber=0.0, overhead=0.0, layers=1, carriers=1)
        defaults.update(kwargs)
        return ThroughputParams(**defaults)

    def test_reference_point(self):
        # 1e-6 * 4 * 624 / T_s with everything else ideal
        assert throughput(self.table_params()) == pytest.approx(279.5, abs=0.1)

    def test_zero_when_ber_plus_overhead_is_one(self):
        assert throughput(self.table_params(ber=0.4, overhead=0.6)) == 0.0

    def test_linear_in_layers(self):
        one = throughput(self.table_params())
        two = throughput(self.table_params(layers=2))
        assert two == pytest.approx(2 * one)

    def test_linear_in_carriers(self):
        one = throughput(self.table_params())
        three = throughput(self.table_params(carriers=3))
        assert three == pytest.approx(3 * one)

    def test_monotone_in_ber_and_overhead(self):
        base = throughput(self.table_params(ber=0.01, overhead=0.05))
        assert throughput(self.table_params(ber=0.02, overhead=0.05)) < base
        assert throughput(self.table_params(ber=0.01, overhead=0.06)) < base

    def test_validation(self):
        with pytest.raises(ValueError):
            self.table_params(ber=0.7, overhead=0.4)
        with pytest.raises(ValueError):
            self.table_params(n_prb=0)


class TestRePositions:
    def test_counts_match_ledger(self):
        for mode in (MODE_CONVENTIONAL, MODE_ISAC):
            cfg = frame_cfg(mode)
            grid = re_positions(cfg)
            ledger = build_ledger(cfg)
            assert int(np.sum(grid == RE_DATA)) == ledger.data_re
            assert int(np.sum(grid == RE_DMRS)) == ledger.dmrs_re
            assert int(np.sum(grid == RE_CSIRS)) == ledger.csirs_re
            assert int(np.sum(grid == RE_GUARD)) == ledger.guard_re
            assert int(np.sum(grid == RE_UL)) == ledger.ul_re

    def test_csirs_only_on_configured_slot(self):
        grid = re_positions(frame_cfg())
        per_slot = [int(np.sum(grid[i] == RE_CSIRS)) for i in range(5)]
        assert per_slot == [32, 0, 0, 0, 0]

    def test_isac_has_no_csirs_positions(self):
        grid = re_positions(frame_cfg(MODE_ISAC))
        assert np.all(grid != RE_CSIRS)

    def test_dmrs_on_type_a_symbols(self):
        grid = re_positions(frame_cfg())
        dmrs_symbols = {sym for _, sym, _ in np.argwhere(grid == RE_DMRS)}
        assert dmrs_symbols == {2, 11}

    def test_guard_between_dl_and_ul_in_special_slot(self):
        grid = re_positions(frame_cfg())
        s_slot = grid[3]  # DDDSU
        assert np.all(s_slot[10:12] == RE_GUARD)
        assert np.all(s_slot[12:] == RE_UL)
