"""Row-address grouping: the B/C/D address space of a subarray.

Each subarray exposes 16 reserved bitwise addresses (B0-B15) that the small
dedicated decoder maps onto one, two, or three wordlines of the designated
and dual-contact rows, two control addresses (C0/C1) for the all-zeros and
all-ones rows, and the remaining data addresses (D0..).  Data addresses
across all subarrays map contiguously onto a linear physical space.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dram import (
    C0_ROW,
    C1_ROW,
    DCC0,
    DCC1,
    FIRST_DATA_ROW,
    T0,
    T1,
    T2,
    T3,
    ChipConfig,
    Wordline,
)
from .errors import OutOfRange, UnknownAddress
from .trace import B_DECODER, CD_DECODER


@dataclass(frozen=True)
class RowAddress:
    """A row address as the controller sees it: group, index, location."""

    group: str  # "B", "C", or "D"
    index: int
    bank: int = 0
    subarray: int = 0

    @property
    def label(self) -> str:
        return f"{self.group}{self.index}"

    def at(self, bank: int, subarray: int) -> "RowAddress":
        return RowAddress(self.group, self.index, bank, subarray)


def B(index: int) -> RowAddress:  # noqa: N802 - matches the address notation
    return RowAddress("B", index)


def C(index: int) -> RowAddress:  # noqa: N802
    return RowAddress("C", index)


def D(index: int) -> RowAddress:  # noqa: N802
    return RowAddress("D", index)


def _wl(*pairs) -> frozenset:
    return frozenset(Wordline(row, bar) for row, bar in pairs)


# The 16-entry map of the dedicated bitwise decoder. B0-B7 raise single
# wordlines, B8-B11 pairs (used to copy a result into two rows at once,
# negating it on the way into a dual-contact row), and B12-B15 the triples
# on which majority activations run.
B_GROUP_WORDLINES: dict[int, frozenset] = {
    0: _wl((T0, False)),
    1: _wl((T1, False)),
    2: _wl((T2, False)),
    3: _wl((T3, False)),
    4: _wl((DCC0, False)),
    5: _wl((DCC0, True)),
    6: _wl((DCC1, False)),
    7: _wl((DCC1, True)),
    8: _wl((DCC0, True), (T0, False)),
    9: _wl((DCC1, True), (T1, False)),
    10: _wl((T2, False), (T3, False)),
    11: _wl((T0, False), (T3, False)),
    12: _wl((T0, False), (T1, False), (T2, False)),
    13: _wl((T1, False), (T2, False), (T3, False)),
    14: _wl((DCC0, False), (T1, False), (T2, False)),
    15: _wl((DCC1, False), (T0, False), (T3, False)),
}


def decode(addr: RowAddress, config: ChipConfig | None = None) -> frozenset:
    """Wordline set a given address activates."""
    if addr.group == "B":
        try:
            return B_GROUP_WORDLINES[addr.index]
        except KeyError:
            raise UnknownAddress(f"no bitwise address B{addr.index}") from None
    if addr.group == "C":
        if addr.index == 0:
            return _wl((C0_ROW, False))
        if addr.index == 1:
            return _wl((C1_ROW, False))
        raise UnknownAddress(f"no control address C{addr.index}")
    if addr.group == "D":
        limit = (config or ChipConfig()).data_rows_per_subarray
        if not 0 <= addr.index < limit:
            raise UnknownAddress(f"data address D{addr.index} outside 0..{limit - 1}")
        return _wl((FIRST_DATA_ROW + addr.index, False))
    raise UnknownAddress(f"unknown address group {addr.group!r}")


def decoder_for(addr: RowAddress) -> str:
    """Which of the two row decoders resolves this address."""
    return B_DECODER if addr.group == "B" else CD_DECODER


def interleave(d_index: int, config: ChipConfig) -> RowAddress:
    """Map a linear data-row number onto (bank, subarray, D-address).

    Consecutive indices fill one subarray's data rows before advancing to
    the next subarray, then the next bank, so software sees a contiguous
    data space while copies stay subarray-local as long as possible.
    """
    per_sub = config.data_rows_per_subarray
    total = config.banks * config.subarrays_per_bank * per_sub
    if not 0 <= d_index < total:
        raise OutOfRange(f"data row {d_index} outside 0..{total - 1}")
    sub_linear, row = divmod(d_index, per_sub)
    bank, subarray = divmod(sub_linear, config.subarrays_per_bank)
    return RowAddress("D", row, bank=bank, subarray=subarray)


def linear_index(addr: RowAddress, config: ChipConfig) -> int:
    """Inverse of interleave()."""
    per_sub = config.data_rows_per_subarray
    sub_linear = addr.bank * config.subarrays_per_bank + addr.subarray
    return sub_linear * per_sub + addr.index
