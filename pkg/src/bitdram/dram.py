"""Charge-level functional model of a DRAM chip that computes in its arrays.

Cells store a charge fraction (0 = empty = logical 0, 1 = fully charged =
logical 1).  Activation is modeled in two phases: charge sharing, which
produces a signed bitline deviation, and sense amplification, which snaps
the bitline to full rail according to the *sign* of that deviation and
restores every connected cell.  All functional correctness here reduces to
that sign, so completed operations always leave binary charge and rows are
kept bit-packed.  Rows only spill to explicit fractional charges when a
sense failure freezes them mid-operation.

Each subarray reserves, at fixed physical positions: four designated rows
T0-T3 on which triple-row activations are performed, two dual-contact rows
(DCC0/DCC1, each reachable through a d-wordline onto the bitline or an
n-wordline onto the complementary bitline), and two control rows C0 (all
zeros) and C1 (all ones).  The remaining rows store data.

A Chip instance is single-threaded: it may be handed between threads but
must never be mutated concurrently.  All operations are deterministic given
the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CrossSubarray,
    InvalidActivate,
    SameBank,
    SenseFailure,
    WidthMismatch,
)
from .trace import CD_DECODER, Command, CommandTrace

# Physical capacitor-row indices within a subarray (fixed at design time).
T0, T1, T2, T3 = 0, 1, 2, 3
DCC0, DCC1 = 4, 5
C0_ROW, C1_ROW = 6, 7
FIRST_DATA_ROW = 8

# Reserved row *addresses* per subarray: 16 bitwise-group addresses plus the
# two control rows. A 1024-address subarray therefore exposes 1006 data rows.
RESERVED_ADDRESSES = 18

COLUMN_BYTES = 64  # one serial-mode TRANSFER moves one 64-byte column


@dataclass(frozen=True)
class Wordline:
    """One raisable wordline: a capacitor row plus which side it connects.

    bar=True is the n-wordline of a dual-contact row, putting the capacitor
    on the complementary bitline so it charges/reads negated.
    """

    row: int
    bar: bool = False


WordlineSet = frozenset  # of Wordline


@dataclass
class ChipConfig:
    banks: int = 8
    subarrays_per_bank: int = 4
    rows_per_subarray: int = 1024  # row addresses, including the reserved 18
    row_bits: int = 65536  # 8 KB rows
    cell_cap: float = 22e-15  # farads
    bitline_cap: float = 220e-15  # farads; the deviation sign is ratio-independent
    v_dd: float = 1.5  # volts
    sense_offset: float = 0.0  # volts; smallest resolvable |deviation|

    def __post_init__(self) -> None:
        if self.row_bits < 64 or self.row_bits & (self.row_bits - 1):
            raise ValueError("row_bits must be a power of two >= 64")
        if self.rows_per_subarray <= RESERVED_ADDRESSES:
            raise ValueError("subarray too small for the reserved rows")
        if self.banks < 1 or self.subarrays_per_bank < 1:
            raise ValueError("need at least one bank and subarray")

    @property
    def data_rows_per_subarray(self) -> int:
        return self.rows_per_subarray - RESERVED_ADDRESSES

    @property
    def row_bytes(self) -> int:
        return self.row_bits // 8

    @property
    def columns_per_row(self) -> int:
        return max(1, -(-self.row_bytes // COLUMN_BYTES))


def charge_share_deviation(charges, caps, bitline_cap, v_dd):
    """Bitline voltage deviation (in volts) after the charge-sharing phase.

    `charges` and `caps` are per-connected-cell sequences; entries may be
    scalars or arrays (one value per bitline).  The bitline starts at half
    rail, the connected capacitors dump their charge onto it, and the
    deviation from half rail is returned.  For equal capacitances and k
    fully charged cells out of three this reduces to the familiar
    (2k-3) * Cc / (6 Cc + 2 Cb) * Vdd form, positive iff k >= 2.
    """
    shared = bitline_cap * v_dd / 2.0
    total_cap = bitline_cap
    for q, c in zip(charges, caps):
        shared = shared + np.multiply(q, c) * v_dd
        total_cap = total_cap + c
    return shared / total_cap - v_dd / 2.0


class SenseAmps:
    """The row of sense amplifiers shared by one subarray.

    Modes: "precharged" (both legs held at half rail), "stable" (latched,
    one full-rail value per bitline), or "amplifying" (stuck mid-flight
    after a sense failure).  Voltages are reported as fractions of Vdd.
    """

    def __init__(self, width: int) -> None:
        self.width = width
        self.mode = "precharged"
        self._packed: np.ndarray | None = None  # latched values, bit-packed
        self._volts: np.ndarray | None = None  # stuck voltages, fraction of Vdd

    def latch(self, packed: np.ndarray) -> None:
        self.mode = "stable"
        self._packed = packed
        self._volts = None

    def stick(self, volt_fractions: np.ndarray) -> None:
        self.mode = "amplifying"
        self._volts = volt_fractions
        self._packed = None

    def precharge(self) -> None:
        self.mode = "precharged"
        self._packed = None
        self._volts = None

    @property
    def values(self) -> np.ndarray:
        """Latched bitline values, bit-packed. Only valid when stable."""
        if self.mode != "stable":
            raise InvalidActivate("sense amplifiers are not in a stable state")
        return self._packed

    def voltages(self) -> np.ndarray:
        """Per-bitline voltage as a fraction of Vdd."""
        if self.mode == "precharged":
            return np.full(self.width, 0.5)
        if self.mode == "stable":
            return np.unpackbits(self._packed)[: self.width].astype(float)
        return self._volts.copy()


class Subarray:
    """One subarray: a grid of cells plus its sense amplifier row.

    Row contents are stored bit-packed (uint8, big bit order) because every
    completed activate/precharge cycle fully restores cells to binary
    charge.  Rows frozen mid-operation by a sense failure are kept as
    explicit float charge fractions until a later activation re-binarizes
    them.
    """

    def __init__(self, config: ChipConfig) -> None:
        self.config = config
        self.width = config.row_bits
        self.nbytes = config.row_bits // 8
        self.n_rows = FIRST_DATA_ROW + config.data_rows_per_subarray
        # Unmaterialized rows read as all zeros; C1 starts all ones.
        self._rows: dict[int, np.ndarray] = {
            C1_ROW: np.full(self.nbytes, 0xFF, dtype=np.uint8)
        }
        self._frozen: dict[int, np.ndarray] = {}
        self.sense = SenseAmps(self.width)

    def _check_row(self, row: int) -> None:
        if not 0 <= row < self.n_rows:
            raise InvalidActivate(f"row {row} outside subarray (0..{self.n_rows - 1})")

    def row_packed(self, row: int) -> np.ndarray:
        """Current logical contents of a row, bit-packed."""
        self._check_row(row)
        if row in self._frozen:
            return np.packbits(self._frozen[row] > 0.5)
        stored = self._rows.get(row)
        if stored is None:
            return np.zeros(self.nbytes, dtype=np.uint8)
        return stored

    def set_packed(self, row: int, packed: np.ndarray) -> None:
        self._frozen.pop(row, None)
        self._rows[row] = packed

    def charges(self, row: int) -> np.ndarray:
        """Per-cell charge fractions of a row (floats in [0, 1])."""
        self._check_row(row)
        if row in self._frozen:
            return self._frozen[row].copy()
        return np.unpackbits(self.row_packed(row))[: self.width].astype(float)

    def freeze(self, row: int, charge: np.ndarray) -> None:
        self._rows.pop(row, None)
        self._frozen[row] = charge

    def read_row(self, row: int) -> np.ndarray:
        """Logical row contents as an array of 0/1 bits."""
        return np.unpackbits(self.row_packed(row))[: self.width]

    def write_row(self, row: int, bits: Sequence[int]) -> None:
        """Set the row's cells to binary charge per `bits`."""
        self._check_row(row)
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.shape != (self.width,):
            raise WidthMismatch(f"expected {self.width} bits, got {arr.shape}")
        self.set_packed(row, np.packbits(arr))


class Bank:
    """A set of subarrays; at most one may hold raised wordlines at a time."""

    def __init__(self, config: ChipConfig) -> None:
        self.subarrays = [Subarray(config) for _ in range(config.subarrays_per_bank)]
        self.active_subarray: int | None = None
        self.active_wordlines: WordlineSet | None = None

    @property
    def precharged(self) -> bool:
        return self.active_subarray is None


class Chip:
    """A chip: banks of subarrays plus the activate/precharge machinery."""

    def __init__(self, config: ChipConfig | None = None) -> None:
        self.config = config or ChipConfig()
        self.banks = [Bank(self.config) for _ in range(self.config.banks)]

    def subarray(self, bank: int, subarray: int) -> Subarray:
        return self.banks[bank].subarrays[subarray]

    # -- command layer ----------------------------------------------------

    def activate(self, bank: int, subarray: int, wordlines: Iterable[Wordline]) -> None:
        """Raise a set of wordlines in one subarray.

        On a precharged bank this runs charge sharing over the connected
        cells, snaps the sense amplifiers to the deviation's sign, and fully
        restores every connected cell (n-wordline cells receive the
        complement).  On a back-to-back activate to the already-active
        subarray the sense amplifiers are stable, so the newly connected
        cells are simply overwritten with the latched values.

        Raises SenseFailure when any bitline deviation is smaller than the
        sense offset (a zero deviation always fails); the connected cells
        are then frozen at their post-charge-sharing values and the
        subarray refuses further activates until a precharge.
        """
        wl = frozenset(
            w if isinstance(w, Wordline) else Wordline(*w) for w in wordlines
        )
        if not wl:
            raise InvalidActivate("empty wordline set")
        if len(wl) > 3:
            raise InvalidActivate("at most three wordlines can be raised together")
        rows = [w.row for w in wl]
        if len(set(rows)) != len(rows):
            raise InvalidActivate("both wordlines of one dual-contact row raised")
        bnk = self.banks[bank]
        sub = bnk.subarrays[subarray]
        for w in wl:
            sub._check_row(w.row)
            if w.bar and w.row not in (DCC0, DCC1):
                raise InvalidActivate("n-wordline exists only on dual-contact rows")

        if bnk.active_subarray is None:
            try:
                self._first_activate(bank, subarray, sub, wl)
            except SenseFailure:
                # wordlines stay raised over the stuck amps until a precharge
                bnk.active_subarray = subarray
                bnk.active_wordlines = wl
                raise
        elif bnk.active_subarray == subarray:
            self._second_activate(sub, wl)
        else:
            # Real chips drop back-to-back activates across subarrays; we
            # surface the drop so controller bugs are caught.
            raise InvalidActivate(
                f"subarray {bnk.active_subarray} is already active in bank {bank}"
            )
        bnk.active_subarray = subarray
        bnk.active_wordlines = wl

    def _first_activate(self, bank: int, subarray: int, sub: Subarray, wl) -> None:
        cfg = self.config
        ordered = sorted(wl, key=lambda w: (w.row, w.bar))
        exact = cfg.sense_offset == 0.0 and not any(
            w.row in sub._frozen for w in ordered
        )
        if exact:
            # Binary charges, equal capacitances, zero offset: the deviation
            # sign is majority (3 cells), the common value (1 cell), or
            # undefined on disagreement (2 cells). Computed bit-packed.
            vals = []
            for w in ordered:
                p = sub.row_packed(w.row)
                vals.append(np.bitwise_not(p) if w.bar else p)
            if len(vals) == 1:
                latched = vals[0].copy()
            elif len(vals) == 2:
                disagree = int(np.count_nonzero(np.unpackbits(vals[0] ^ vals[1])))
                if disagree:
                    # opposite charges leave the bitline at exactly half rail
                    self._freeze(sub, ordered, self._deviation(sub, ordered, cfg))
                    raise SenseFailure(
                        f"{disagree} of {sub.width} bitlines stuck at half rail"
                    )
                latched = vals[0].copy()
            else:
                a, b, c = vals
                latched = (a & b) | (b & c) | (c & a)
        else:
            delta = self._deviation(sub, ordered, cfg)
            # No amplifier resolves arbitrarily small deviations; the floor
            # also absorbs rounding noise in the exactly-balanced case.
            threshold = max(cfg.sense_offset, cfg.v_dd * 1e-12)
            failing = np.abs(delta) < threshold
            if np.any(failing):
                self._freeze(sub, ordered, delta)
                raise SenseFailure(
                    f"{int(np.count_nonzero(failing))} of {sub.width} bitlines "
                    f"below the sense offset"
                )
            latched = np.packbits(delta > 0.0)
        sub.sense.latch(latched)
        for w in ordered:
            sub.set_packed(
                w.row, np.bitwise_not(latched) if w.bar else latched.copy()
            )

    def _deviation(self, sub: Subarray, ordered, cfg: ChipConfig) -> np.ndarray:
        charges = []
        for w in ordered:
            q = sub.charges(w.row)
            charges.append(1.0 - q if w.bar else q)
        return charge_share_deviation(
            charges, [cfg.cell_cap] * len(charges), cfg.bitline_cap, cfg.v_dd
        )

    def _freeze(self, sub: Subarray, ordered, delta: np.ndarray) -> None:
        """Abandon amplification: cells keep their post-charge-sharing levels."""
        frac = 0.5 + delta / self.config.v_dd
        for w in ordered:
            sub.freeze(w.row, 1.0 - frac if w.bar else frac.copy())
        sub.sense.stick(frac)

    def _second_activate(self, sub: Subarray, wl) -> None:
        latched = sub.sense.values  # raises if the amps never settled
        for w in sorted(wl, key=lambda w: (w.row, w.bar)):
            sub.set_packed(
                w.row, np.bitwise_not(latched) if w.bar else latched.copy()
            )

    def precharge(self, bank: int) -> None:
        """Lower all wordlines in the bank and re-equalize its sense amps."""
        bnk = self.banks[bank]
        bnk.active_subarray = None
        bnk.active_wordlines = None
        for sub in bnk.subarrays:
            sub.sense.precharge()

    # -- functional access path (no trace, no timing) ----------------------

    def read_row(self, bank: int, subarray: int, row: int) -> np.ndarray:
        return self.subarray(bank, subarray).read_row(row)

    def write_row(self, bank: int, subarray: int, row: int, bits) -> None:
        self.subarray(bank, subarray).write_row(row, bits)

    # -- in-DRAM copy mechanisms -------------------------------------------

    def rowclone_fpm(
        self, bank: int, src_subarray: int, src_row: int, dst_subarray: int, dst_row: int
    ) -> None:
        """Copy src row to dst row via two back-to-back activates.

        Fast parallel mode only works between rows sharing sense
        amplifiers, i.e. within one subarray.
        """
        if src_subarray != dst_subarray:
            raise CrossSubarray("fast parallel mode cannot cross subarrays")
        self.activate(bank, src_subarray, [Wordline(src_row)])
        self.activate(bank, src_subarray, [Wordline(dst_row)])
        self.precharge(bank)

    def transfer_psm(
        self,
        src_bank: int,
        src_subarray: int,
        src_row: int,
        dst_bank: int,
        dst_subarray: int,
        dst_row: int,
        trace: CommandTrace | None = None,
    ) -> CommandTrace:
        """Copy a row between two banks one 64-byte column at a time.

        Both rows are activated, then each column moves over the internal
        bus with a TRANSFER command; the trace records one entry per column
        plus the surrounding activates and precharges.
        """
        if src_bank == dst_bank:
            raise SameBank("serial-mode transfer needs two distinct banks")
        trace = trace if trace is not None else CommandTrace()
        self.activate(src_bank, src_subarray, [Wordline(src_row)])
        self.activate(dst_bank, dst_subarray, [Wordline(dst_row)])
        trace.append(
            Command.ACTIVATE, src_bank, src_subarray, f"r{src_row}", 1, CD_DECODER
        )
        trace.append(
            Command.ACTIVATE, dst_bank, dst_subarray, f"r{dst_row}", 1, CD_DECODER
        )
        src = self.subarray(src_bank, src_subarray)
        dst = self.subarray(dst_bank, dst_subarray)
        data = src.row_packed(src_row).copy()
        dst.set_packed(dst_row, data)
        for col in range(self.config.columns_per_row):
            trace.append(Command.TRANSFER, dst_bank, dst_subarray, f"col{col}")
        self.precharge(src_bank)
        self.precharge(dst_bank)
        trace.append(Command.PRECHARGE, src_bank, src_subarray)
        trace.append(Command.PRECHARGE, dst_bank, dst_subarray)
        return trace

    def transfer_intra_bank(
        self,
        bank: int,
        src_subarray: int,
        src_row: int,
        dst_subarray: int,
        dst_row: int,
        temp_bank: int,
        temp_subarray: int,
        temp_row: int,
        trace: CommandTrace | None = None,
    ) -> CommandTrace:
        """Copy across subarrays of one bank by bouncing off a temporary row.

        Serial mode cannot operate within a bank, so the data is staged
        through `temp_row` in another bank and transferred back.
        """
        if temp_bank == bank:
            raise SameBank("temporary row must live in a different bank")
        trace = trace if trace is not None else CommandTrace()
        self.transfer_psm(
            bank, src_subarray, src_row, temp_bank, temp_subarray, temp_row, trace
        )
        self.transfer_psm(
            temp_bank, temp_subarray, temp_row, bank, dst_subarray, dst_row, trace
        )
        return trace

    def dcc_not_capture(
        self, bank: int, subarray: int, src_row: int, dcc_index: int
    ) -> None:
        """Latch NOT(src row) into a dual-contact row.

        Activating the source drives the bitline to its value; raising the
        DCC's n-wordline then charges the DCC capacitor from the
        complementary bitline. The negated data is afterwards readable
        through the DCC's d-wordline.
        """
        if dcc_index not in (0, 1):
            raise InvalidActivate("dcc_index must be 0 or 1")
        dcc_row = DCC0 if dcc_index == 0 else DCC1
        self.activate(bank, subarray, [Wordline(src_row)])
        self.activate(bank, subarray, [Wordline(dcc_row, bar=True)])
        self.precharge(bank)
