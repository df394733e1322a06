"""Latency and energy models over command traces."""

import dataclasses

import numpy as np
import pytest

from bitdram.addressing import D
from bitdram.controller import BbopKind, MemController
from bitdram.dram import FIRST_DATA_ROW, Chip
from bitdram.errors import Infeasible
from bitdram.timing import (
    DDR3_1600_888,
    DDR3_1600_TABLE,
    GPU_LIKE,
    HMC_LIKE,
    SKYLAKE_LIKE,
    EnergyConfig,
    aap_latency,
    ap_latency,
    baseline_energy_per_kb,
    baseline_throughput,
    calibrate,
    energy_of,
    energy_per_kb,
    energy_reduction,
    in_dram_throughput,
    latency_of,
    sequence_energy_per_kb,
    sequence_latency,
)

SPLIT = DDR3_1600_888
NAIVE = dataclasses.replace(DDR3_1600_888, mode="naive")


@pytest.fixture
def traced_ops(small_config, rng):
    """One executed trace per op kind."""
    chip = Chip(small_config)
    ctl = MemController(chip)
    w = small_config.row_bits
    chip.write_row(0, 0, FIRST_DATA_ROW, rng.integers(0, 2, w, np.uint8))
    chip.write_row(0, 0, FIRST_DATA_ROW + 1, rng.integers(0, 2, w, np.uint8))
    out = {}
    for kind in BbopKind:
        out[kind] = ctl.exec_bbop(
            kind,
            D(2).at(0, 0),
            D(0).at(0, 0),
            None if kind is BbopKind.NOT else D(1).at(0, 0),
        )
    return out


class TestLatency:
    def test_aap_naive_80ns(self):
        assert aap_latency(NAIVE) == 80.0

    def test_aap_split_49ns(self):
        assert aap_latency(SPLIT) == 49.0

    def test_table_preset_differs_only_in_trcd_trp(self):
        assert DDR3_1600_TABLE.t_ras == 35.0
        assert DDR3_1600_TABLE.t_rp == 15.0
        assert DDR3_1600_TABLE.t_rcd == 15.0
        assert DDR3_1600_TABLE.t_wr == 15.0

    def test_and_trace_is_196ns_split(self, traced_ops):
        assert latency_of(traced_ops[BbopKind.AND], SPLIT) == pytest.approx(196.0)

    def test_latency_is_pure_unit_arithmetic(self, traced_ops):
        for kind, trace in traced_ops.items():
            for cfg in (SPLIT, NAIVE):
                want = trace.n_aap * aap_latency(cfg) + trace.n_ap * ap_latency(cfg)
                assert latency_of(trace, cfg) == pytest.approx(want)
                assert sequence_latency(kind, cfg) == pytest.approx(want)

    def test_split_beats_naive_for_any_aap_trace(self, traced_ops):
        for trace in traced_ops.values():
            assert latency_of(trace, SPLIT) < latency_of(trace, NAIVE)

    def test_psm_fragment_costs_standalone_commands(self, small_config, rng):
        chip = Chip(small_config)
        bits = rng.integers(0, 2, small_config.row_bits, np.uint8)
        chip.write_row(0, 0, FIRST_DATA_ROW, bits)
        trace = chip.transfer_psm(0, 0, FIRST_DATA_ROW, 1, 0, FIRST_DATA_ROW)
        cols = small_config.columns_per_row
        want = 2 * SPLIT.t_ras + cols * SPLIT.col_burst_ns + 2 * SPLIT.t_rp
        assert latency_of(trace, SPLIT) == pytest.approx(want)


class TestEnergy:
    def test_extra_wordlines_scale_by_22_percent(self, traced_ops):
        cfg = EnergyConfig(e_act_base=1.0, e_pre=0.0)
        trace = traced_ops[BbopKind.AND]
        # 7 single-wordline activations plus the triple activation
        assert energy_of(trace, cfg) == pytest.approx(7 + 1.22**2)

    def test_energy_monotone_in_wordlines_and_length(self, traced_ops):
        cfg = EnergyConfig()
        assert energy_of(traced_ops[BbopKind.NAND], cfg) > energy_of(
            traced_ops[BbopKind.AND], cfg
        )
        assert energy_of(traced_ops[BbopKind.XOR], cfg) > energy_of(
            traced_ops[BbopKind.NAND], cfg
        )

    def test_calibration_hits_not_target_exactly(self, traced_ops):
        cfg = calibrate(EnergyConfig(), {"not": 1.6})
        assert sequence_energy_per_kb("not", cfg) == pytest.approx(1.6)
        assert energy_per_kb(traced_ops[BbopKind.NOT], cfg) == pytest.approx(1.6)

    @pytest.mark.parametrize(
        "kind,target",
        [("and", 3.2), ("or", 3.2), ("nand", 4.0), ("nor", 4.0), ("xor", 5.5), ("xnor", 5.5)],
    )
    def test_calibrated_ops_within_20_percent(self, kind, target):
        cfg = calibrate(EnergyConfig(), {"not": 1.6})
        assert sequence_energy_per_kb(kind, cfg) == pytest.approx(target, rel=0.20)

    @pytest.mark.parametrize(
        "kind,factor",
        [("not", 59.5), ("and", 43.9), ("nand", 35.1), ("xor", 25.1)],
    )
    def test_energy_reduction_within_20_percent(self, kind, factor):
        cfg = calibrate(EnergyConfig(), {"not": 1.6})
        assert energy_reduction(kind, cfg) == pytest.approx(factor, rel=0.20)

    def test_not_reduction_within_5_percent(self):
        cfg = calibrate(EnergyConfig(), {"not": 1.6})
        # 93.7 / 1.6 = 58.6X against the published 59.5X
        assert energy_reduction("not", cfg) == pytest.approx(59.5, rel=0.05)

    def test_baseline_energies(self):
        cfg = EnergyConfig()
        assert baseline_energy_per_kb("not", cfg) == pytest.approx(93.7)
        for kind in ("and", "or", "nand", "nor", "xor", "xnor"):
            assert baseline_energy_per_kb(kind, cfg) == pytest.approx(137.9)

    def test_zero_target_infeasible(self):
        with pytest.raises(Infeasible):
            calibrate(EnergyConfig(), {"not": 0.0})
        with pytest.raises(Infeasible):
            calibrate(EnergyConfig(), {})

    def test_inconsistent_secondary_target_infeasible(self):
        with pytest.raises(Infeasible):
            calibrate(EnergyConfig(), {"not": 1.6, "and": 30.0})

    def test_consistent_secondary_targets_accepted(self):
        cfg = calibrate(EnergyConfig(), {"not": 1.6, "and": 3.2, "nand": 4.0})
        assert sequence_energy_per_kb("not", cfg) == pytest.approx(1.6)

    def test_per_kb_requires_output_rows(self, small_config, rng):
        chip = Chip(small_config)
        bits = rng.integers(0, 2, small_config.row_bits, np.uint8)
        chip.write_row(0, 0, FIRST_DATA_ROW, bits)
        trace = chip.transfer_psm(0, 0, FIRST_DATA_ROW, 1, 0, FIRST_DATA_ROW)
        with pytest.raises(ValueError):
            energy_per_kb(trace, EnergyConfig())
        assert energy_per_kb(trace, EnergyConfig(), output_rows=1) > 0


class TestThroughput:
    def test_and_one_bank(self):
        # 8192 bytes per 196 ns
        got = in_dram_throughput("and", 1, SPLIT)
        assert got == pytest.approx(8192 / 196e-9, rel=1e-12)
        assert got / 1e9 == pytest.approx(41.8, rel=0.01)

    def test_scales_with_banks(self):
        one = in_dram_throughput("and", 1, SPLIT)
        assert in_dram_throughput("and", 8, SPLIT) == pytest.approx(8 * one)

    def test_not_is_twice_and(self):
        assert in_dram_throughput("not", 8, SPLIT) == pytest.approx(
            2 * in_dram_throughput("and", 8, SPLIT)
        )

    def test_baseline_streams(self):
        assert baseline_throughput("and", SKYLAKE_LIKE) == pytest.approx(
            SKYLAKE_LIKE.bytes_per_second / 3
        )
        assert baseline_throughput("and", SKYLAKE_LIKE) / 1e9 == pytest.approx(
            11.4, rel=0.01
        )
        assert baseline_throughput("not", SKYLAKE_LIKE) / 1e9 == pytest.approx(
            17.1, rel=0.01
        )

    def test_preset_values(self):
        assert SKYLAKE_LIKE.bytes_per_second == pytest.approx(34.128e9)
        assert GPU_LIKE.bytes_per_second == pytest.approx(28.8e9)
        assert HMC_LIKE.bytes_per_second == pytest.approx(320e9)

    def test_speedup_vs_bandwidth_bound_baseline_in_range(self):
        speedup = in_dram_throughput("and", 8, SPLIT) / baseline_throughput(
            "and", SKYLAKE_LIKE
        )
        assert 20.0 <= speedup <= 60.0
