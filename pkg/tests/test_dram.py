"""Charge-level model: charge sharing, activation, copies, failure handling."""

from fractions import Fraction

import numpy as np
import pytest

from bitdram.dram import (
    C0_ROW,
    C1_ROW,
    DCC0,
    FIRST_DATA_ROW,
    T0,
    T1,
    T2,
    T3,
    Chip,
    ChipConfig,
    Wordline,
    charge_share_deviation,
)
from bitdram.errors import (
    CrossSubarray,
    InvalidActivate,
    SameBank,
    SenseFailure,
    WidthMismatch,
)


class TestChargeShareDeviation:
    def test_two_of_three_charged_is_positive(self):
        # positive for k = 2, 3 regardless of the bitline capacitance
        for c_b in (10e-15, 220e-15, 5e-12):
            assert charge_share_deviation([1, 1, 0], [22e-15] * 3, c_b, 1.5) > 0
            assert charge_share_deviation([1, 1, 1], [22e-15] * 3, c_b, 1.5) > 0

    def test_minority_charged_is_negative(self):
        assert charge_share_deviation([1, 0, 0], [22e-15] * 3, 220e-15, 1.5) < 0
        assert charge_share_deviation([0, 0, 0], [22e-15] * 3, 220e-15, 1.5) < 0

    def test_single_empty_cell_pulls_bitline_down(self):
        assert charge_share_deviation([0], [22e-15], 220e-15, 1.2) < 0

    def test_all_charged_exact_value(self):
        # Independent hand computation with exact rationals:
        # (3*22 + 220/2) / (3*22 + 220) - 1/2 = 66/572 for Vdd = 1.
        expected = (Fraction(3 * 22) + Fraction(220, 2)) / Fraction(3 * 22 + 220)
        expected -= Fraction(1, 2)
        assert expected == Fraction(66, 572)
        got = charge_share_deviation([1, 1, 1], [22.0] * 3, 220.0, 1.0)
        assert got == pytest.approx(float(expected), abs=1e-15)

    def test_reduces_to_three_cell_form(self):
        # (2k - 3) Cc / (6 Cc + 2 Cb) * Vdd for binary charges and equal caps
        cc, cb, vdd = 22e-15, 180e-15, 1.5
        for k in range(4):
            charges = [1] * k + [0] * (3 - k)
            want = (2 * k - 3) * cc / (6 * cc + 2 * cb) * vdd
            got = charge_share_deviation(charges, [cc] * 3, cb, vdd)
            assert got == pytest.approx(want, rel=1e-12)

    def test_vectorizes_over_bitlines(self):
        q = np.array([1.0, 0.0, 1.0])
        out = charge_share_deviation([q, q, 1 - q], [1e-15] * 3, 4e-15, 1.0)
        assert out.shape == (3,)
        assert out[0] > 0 and out[1] < 0  # k=2 vs k=1


class TestActivate:
    def test_tra_fully_charges_all_three_cells(self, chip):
        w = chip.config.row_bits
        chip.write_row(0, 0, T0, np.ones(w, np.uint8))
        chip.write_row(0, 0, T1, np.ones(w, np.uint8))
        chip.write_row(0, 0, T2, np.zeros(w, np.uint8))
        chip.activate(0, 0, [Wordline(T0), Wordline(T1), Wordline(T2)])
        sub = chip.subarray(0, 0)
        assert sub.sense.mode == "stable"
        assert np.all(sub.sense.voltages() == 1.0)
        chip.precharge(0)
        for row in (T0, T1, T2):
            assert chip.read_row(0, 0, row).all()

    def test_majority_truth_table_exhaustive(self, chip):
        w = chip.config.row_bits
        for a in (0, 1):
            for b in (0, 1):
                for c in (0, 1):
                    chip.write_row(0, 0, T0, np.full(w, a, np.uint8))
                    chip.write_row(0, 0, T1, np.full(w, b, np.uint8))
                    chip.write_row(0, 0, T2, np.full(w, c, np.uint8))
                    chip.activate(0, 0, [Wordline(T0), Wordline(T1), Wordline(T2)])
                    chip.precharge(0)
                    want = (a & b) | (b & c) | (c & a)
                    for row in (T0, T1, T2):
                        got = chip.read_row(0, 0, row)
                        assert np.all(got == want), (a, b, c)

    def test_majority_on_random_rows(self, chip, rng):
        w = chip.config.row_bits
        a = rng.integers(0, 2, w, np.uint8)
        b = rng.integers(0, 2, w, np.uint8)
        c = rng.integers(0, 2, w, np.uint8)
        chip.write_row(0, 0, T0, a)
        chip.write_row(0, 0, T1, b)
        chip.write_row(0, 0, T2, c)
        chip.activate(0, 0, [Wordline(T0), Wordline(T1), Wordline(T2)])
        chip.precharge(0)
        want = (a & b) | (b & c) | (c & a)
        assert np.array_equal(chip.read_row(0, 0, T0), want)

    def test_single_row_activate_restores_value(self, chip):
        w = chip.config.row_bits
        chip.write_row(0, 0, FIRST_DATA_ROW, np.zeros(w, np.uint8))
        chip.activate(0, 0, [Wordline(FIRST_DATA_ROW)])
        assert np.all(chip.subarray(0, 0).sense.voltages() == 0.0)
        chip.precharge(0)
        assert not chip.read_row(0, 0, FIRST_DATA_ROW).any()

    def test_exact_and_analog_paths_agree(self, small_config, rng):
        # A tiny positive offset forces the charge-sharing arithmetic; the
        # packed shortcut must produce identical results.
        import dataclasses

        analog = Chip(dataclasses.replace(small_config, sense_offset=1e-9))
        exact = Chip(small_config)
        w = small_config.row_bits
        rows = [rng.integers(0, 2, w, np.uint8) for _ in range(3)]
        for chip_ in (analog, exact):
            for row, bits in zip((T0, T1, T2), rows):
                chip_.write_row(0, 0, row, bits)
            chip_.activate(0, 0, [Wordline(T0), Wordline(T1), Wordline(T2)])
            chip_.precharge(0)
        assert np.array_equal(
            analog.read_row(0, 0, T0), exact.read_row(0, 0, T0)
        )

    def test_second_activate_copies_latched_value(self, chip, rng):
        w = chip.config.row_bits
        bits = rng.integers(0, 2, w, np.uint8)
        chip.write_row(0, 0, FIRST_DATA_ROW, bits)
        chip.activate(0, 0, [Wordline(FIRST_DATA_ROW)])
        chip.activate(0, 0, [Wordline(FIRST_DATA_ROW + 1)])
        chip.precharge(0)
        assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW + 1), bits)
        assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW), bits)

    def test_cross_subarray_back_to_back_rejected(self, chip):
        chip.activate(0, 0, [Wordline(FIRST_DATA_ROW)])
        with pytest.raises(InvalidActivate):
            chip.activate(0, 1, [Wordline(FIRST_DATA_ROW)])
        chip.precharge(0)

    def test_empty_and_oversized_wordline_sets_rejected(self, chip):
        with pytest.raises(InvalidActivate):
            chip.activate(0, 0, [])
        with pytest.raises(InvalidActivate):
            chip.activate(0, 0, [Wordline(r) for r in range(8, 12)])

    def test_n_wordline_only_on_dual_contact_rows(self, chip):
        with pytest.raises(InvalidActivate):
            chip.activate(0, 0, [Wordline(T0, bar=True)])

    def test_double_activation_with_disagreement_fails(self, chip, rng):
        # Two connected cells holding opposite values leave the bitline at
        # exactly half rail; the model refuses to guess.
        w = chip.config.row_bits
        chip.write_row(0, 0, T0, np.ones(w, np.uint8))
        chip.write_row(0, 0, T1, np.zeros(w, np.uint8))
        with pytest.raises(SenseFailure):
            chip.activate(0, 0, [Wordline(T0), Wordline(T1)])
        sub = chip.subarray(0, 0)
        assert sub.sense.mode == "amplifying"
        # frozen mid-operation: no further activates until a precharge
        with pytest.raises(InvalidActivate):
            chip.activate(0, 0, [Wordline(T2)])
        chip.precharge(0)
        chip.activate(0, 0, [Wordline(T2)])  # usable again
        chip.precharge(0)

    def test_double_activation_with_agreement_copies(self, chip, rng):
        w = chip.config.row_bits
        bits = rng.integers(0, 2, w, np.uint8)
        chip.write_row(0, 0, T2, bits)
        chip.write_row(0, 0, T3, bits)
        chip.activate(0, 0, [Wordline(T2), Wordline(T3)])
        chip.precharge(0)
        assert np.array_equal(chip.read_row(0, 0, T2), bits)

    def test_sense_failure_freezes_charges_midway(self, small_config):
        import dataclasses

        cfg = dataclasses.replace(small_config, sense_offset=1.0)  # nothing resolves
        chip = Chip(cfg)
        w = cfg.row_bits
        chip.write_row(0, 0, FIRST_DATA_ROW, np.ones(w, np.uint8))
        with pytest.raises(SenseFailure):
            chip.activate(0, 0, [Wordline(FIRST_DATA_ROW)])
        sub = chip.subarray(0, 0)
        q = sub.charges(FIRST_DATA_ROW)
        assert np.all((0.5 < q) & (q < 1.0))  # partially discharged, not restored

    def test_zero_offset_never_raises_sense_failure(self, chip, rng):
        # single and triple activations over random data always resolve
        w = chip.config.row_bits
        for _ in range(20):
            for row in (T0, T1, T2):
                chip.write_row(0, 0, row, rng.integers(0, 2, w, np.uint8))
            chip.activate(0, 0, [Wordline(T0), Wordline(T1), Wordline(T2)])
            chip.precharge(0)
            chip.activate(0, 0, [Wordline(T0)])
            chip.precharge(0)


class TestPrecharge:
    def test_returns_sense_amps_to_half_rail(self, chip):
        chip.activate(0, 0, [Wordline(C1_ROW)])
        chip.precharge(0)
        sub = chip.subarray(0, 0)
        assert sub.sense.mode == "precharged"
        assert np.all(sub.sense.voltages() == 0.5)

    def test_idle_precharge_is_a_noop(self, chip, rng):
        bits = rng.integers(0, 2, chip.config.row_bits, np.uint8)
        chip.write_row(0, 0, FIRST_DATA_ROW, bits)
        chip.precharge(0)
        chip.precharge(1)
        assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW), bits)

    def test_activate_precharge_round_trip(self, chip, rng):
        for _ in range(10):
            bits = rng.integers(0, 2, chip.config.row_bits, np.uint8)
            chip.write_row(0, 0, FIRST_DATA_ROW + 3, bits)
            chip.activate(0, 0, [Wordline(FIRST_DATA_ROW + 3)])
            chip.precharge(0)
            assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW + 3), bits)


class TestRowAccess:
    def test_write_read_round_trip(self, chip, rng):
        for width_row in range(FIRST_DATA_ROW, FIRST_DATA_ROW + 5):
            bits = rng.integers(0, 2, chip.config.row_bits, np.uint8)
            chip.write_row(1, 1, width_row, bits)
            assert np.array_equal(chip.read_row(1, 1, width_row), bits)

    def test_round_trip_at_various_widths(self, rng):
        for row_bits in (64, 256, 2048):
            cfg = ChipConfig(
                banks=1, subarrays_per_bank=1, rows_per_subarray=32, row_bits=row_bits
            )
            chip = Chip(cfg)
            bits = rng.integers(0, 2, row_bits, np.uint8)
            chip.write_row(0, 0, FIRST_DATA_ROW, bits)
            assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW), bits)

    def test_control_rows_initialized(self, chip):
        assert not chip.read_row(0, 0, C0_ROW).any()
        assert chip.read_row(0, 0, C1_ROW).all()

    def test_width_mismatch(self, chip):
        with pytest.raises(WidthMismatch):
            chip.write_row(0, 0, FIRST_DATA_ROW, [1, 0, 1])


class TestRowClone:
    def test_fpm_copies_and_preserves_source(self, chip, rng):
        w = chip.config.row_bits
        x = rng.integers(0, 2, w, np.uint8)
        y = rng.integers(0, 2, w, np.uint8)
        chip.write_row(0, 0, FIRST_DATA_ROW, x)
        chip.write_row(0, 0, FIRST_DATA_ROW + 1, y)
        chip.rowclone_fpm(0, 0, FIRST_DATA_ROW, 0, FIRST_DATA_ROW + 1)
        assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW + 1), x)
        assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW), x)

    def test_fpm_to_itself_is_identity(self, chip, rng):
        bits = rng.integers(0, 2, chip.config.row_bits, np.uint8)
        chip.write_row(0, 0, FIRST_DATA_ROW, bits)
        chip.rowclone_fpm(0, 0, FIRST_DATA_ROW, 0, FIRST_DATA_ROW)
        assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW), bits)

    def test_fpm_idempotent(self, chip, rng):
        bits = rng.integers(0, 2, chip.config.row_bits, np.uint8)
        chip.write_row(0, 0, FIRST_DATA_ROW, bits)
        for _ in range(2):
            chip.rowclone_fpm(0, 0, FIRST_DATA_ROW, 0, FIRST_DATA_ROW + 1)
            assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW + 1), bits)

    def test_fpm_initializes_from_control_row(self, chip):
        chip.write_row(0, 0, T2, np.zeros(chip.config.row_bits, np.uint8))
        chip.rowclone_fpm(0, 0, C1_ROW, 0, T2)
        assert chip.read_row(0, 0, T2).all()
        assert chip.read_row(0, 0, C1_ROW).all()  # source intact

    def test_fpm_rejects_cross_subarray(self, chip):
        with pytest.raises(CrossSubarray):
            chip.rowclone_fpm(0, 0, FIRST_DATA_ROW, 1, FIRST_DATA_ROW)


class TestTransferPsm:
    def test_copies_between_banks(self, chip, rng):
        bits = rng.integers(0, 2, chip.config.row_bits, np.uint8)
        chip.write_row(0, 0, FIRST_DATA_ROW, bits)
        chip.transfer_psm(0, 0, FIRST_DATA_ROW, 1, 1, FIRST_DATA_ROW + 2)
        assert np.array_equal(chip.read_row(1, 1, FIRST_DATA_ROW + 2), bits)
        assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW), bits)

    def test_transfer_count_for_8kb_row(self):
        cfg = ChipConfig(banks=2, subarrays_per_bank=1, rows_per_subarray=64)
        chip = Chip(cfg)  # default 8 KB rows
        trace = chip.transfer_psm(0, 0, FIRST_DATA_ROW, 1, 0, FIRST_DATA_ROW)
        counts = trace.counts()
        assert counts["TRANSFER"] == 128  # 8192 B / 64 B per column
        assert counts["ACTIVATE"] == 2
        assert counts["PRECHARGE"] == 2

    def test_same_bank_rejected(self, chip):
        with pytest.raises(SameBank):
            chip.transfer_psm(0, 0, FIRST_DATA_ROW, 0, 1, FIRST_DATA_ROW)

    def test_intra_bank_copy_routes_via_temp(self, chip, rng):
        bits = rng.integers(0, 2, chip.config.row_bits, np.uint8)
        chip.write_row(0, 0, FIRST_DATA_ROW, bits)
        temp_row = FIRST_DATA_ROW + 9
        chip.transfer_intra_bank(
            0, 0, FIRST_DATA_ROW, 1, FIRST_DATA_ROW + 4, 1, 0, temp_row
        )
        assert np.array_equal(chip.read_row(0, 1, FIRST_DATA_ROW + 4), bits)
        assert np.array_equal(chip.read_row(1, 0, temp_row), bits)


class TestDccNotCapture:
    def test_all_ones_reads_back_zeros(self, chip):
        chip.write_row(0, 0, FIRST_DATA_ROW, np.ones(chip.config.row_bits, np.uint8))
        chip.dcc_not_capture(0, 0, FIRST_DATA_ROW, 0)
        assert not chip.read_row(0, 0, DCC0).any()

    def test_random_complement_and_source_restored(self, chip, rng):
        bits = rng.integers(0, 2, chip.config.row_bits, np.uint8)
        chip.write_row(0, 0, FIRST_DATA_ROW, bits)
        for dcc_index, dcc_row in ((0, DCC0), (1, DCC0 + 1)):
            chip.dcc_not_capture(0, 0, FIRST_DATA_ROW, dcc_index)
            assert np.array_equal(chip.read_row(0, 0, dcc_row), 1 - bits)
        assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW), bits)
        q = chip.subarray(0, 0).charges(FIRST_DATA_ROW)
        assert set(np.unique(q)) <= {0.0, 1.0}  # fully restored binary charge
