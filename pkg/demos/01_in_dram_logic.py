"""Computing Boolean logic with DRAM charge sharing
==================================================

Walks the functional model bottom-up: the charge-sharing deviation, the
majority function of a triple-row activation, AND/OR selection through the
control rows, NOT through a dual-contact row, and finally a full command
sequence with its trace.

Run: python demos/01_in_dram_logic.py
"""

import numpy as np

from bitdram import Chip, ChipConfig, D, MemController, charge_share_deviation
from bitdram.dram import C1_ROW, DCC0, FIRST_DATA_ROW, T0, T1, T2, Wordline

chip = Chip(ChipConfig(banks=1, subarrays_per_bank=1, rows_per_subarray=64, row_bits=64))
ctl = MemController(chip)

# --- the analog heart: charge sharing over three cells --------------------
print("bitline deviation after charge sharing, three 22 fF cells, 220 fF bitline:")
for k in range(4):
    delta = charge_share_deviation([1.0] * k + [0.0] * (3 - k), [22e-15] * 3, 220e-15, 1.5)
    print(f"  {k} charged cell(s): {delta * 1e3:+7.1f} mV -> latches {int(delta > 0)}")
print("the sign flips between k=1 and k=2: simultaneous activation is a majority vote\n")

# --- majority over whole rows ----------------------------------------------
print("raising three wordlines at once, all 8 input combinations on one bitline:")
for a in (0, 1):
    for b in (0, 1):
        for c in (0, 1):
            chip.write_row(0, 0, T0, np.full(64, a, np.uint8))
            chip.write_row(0, 0, T1, np.full(64, b, np.uint8))
            chip.write_row(0, 0, T2, np.full(64, c, np.uint8))
            chip.activate(0, 0, [Wordline(T0), Wordline(T1), Wordline(T2)])
            chip.precharge(0)
            print(f"  maj({a},{b},{c}) = {chip.read_row(0, 0, T0)[0]}")

# --- AND vs OR via the control rows ----------------------------------------
# maj(A, B, 0) = A and B;  maj(A, B, 1) = A or B
rng = np.random.default_rng(0)
x = rng.integers(0, 2, 64, np.uint8)
y = rng.integers(0, 2, 64, np.uint8)
chip.write_row(0, 0, FIRST_DATA_ROW, x)
chip.write_row(0, 0, FIRST_DATA_ROW + 1, y)

ctl.exec_bbop("and", D(2).at(0, 0), D(0).at(0, 0), D(1).at(0, 0))
assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW + 2), x & y)
ctl.exec_bbop("or", D(3).at(0, 0), D(0).at(0, 0), D(1).at(0, 0))
assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW + 3), x | y)
print("\nAND/OR of two random rows verified against numpy")

# --- NOT via the dual-contact row -------------------------------------------
chip.dcc_not_capture(0, 0, FIRST_DATA_ROW, 0)
assert np.array_equal(chip.read_row(0, 0, DCC0), 1 - x)
print("dual-contact row captured the complement through the negated bitline")

# --- a full sequence and its command trace -----------------------------------
trace = ctl.exec_bbop("nand", D(4).at(0, 0), D(0).at(0, 0), D(1).at(0, 0))
assert np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW + 4), 1 - (x & y))
print(f"\nnand runs as {trace.n_aap} activate-activate-precharge units:")
print(trace.to_csv())

# the all-ones control row survives everything (it is only ever a copy source)
assert chip.read_row(0, 0, C1_ROW).all()
print("control rows are intact after all operations")
