"""The memory controller: AAP/AP primitives and bulk bitwise command sequences.

Every bulk bitwise operation is a short sequence of two primitives:

  AAP(addr1, addr2) = ACTIVATE addr1; ACTIVATE addr2; PRECHARGE
      copies the result of activating the first address into the row(s)
      mapped to the second address (the second activate finds the sense
      amplifiers already latched and overwrites the newly connected cells);

  AP(addr)          = ACTIVATE addr; PRECHARGE
      used when a majority activation's in-place result is all we need.

Sequences stage source data onto the designated rows, select AND vs OR by
copying the all-zeros or all-ones control row into the third operand of the
majority, and route complements through the dual-contact rows.  The traces
they emit are unoptimized: intermediate copies are not eliminated.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .addressing import B, C, RowAddress, decode, decoder_for, interleave
from .dram import Chip
from .errors import OperandPlacement
from .trace import Command, CommandTrace


class BbopKind(str, Enum):
    NOT = "not"
    AND = "and"
    OR = "or"
    NAND = "nand"
    NOR = "nor"
    XOR = "xor"
    XNOR = "xnor"


TWO_INPUT_KINDS = frozenset(
    k for k in BbopKind if k is not BbopKind.NOT
)

# Operand placeholders in sequence templates.
SRC1, SRC2, DST = "src1", "src2", "dst"


@dataclass(frozen=True)
class SeqStep:
    primitive: str  # "aap" or "ap"
    addr1: RowAddress | str
    addr2: RowAddress | str | None = None


def _aap(a1, a2) -> SeqStep:
    return SeqStep("aap", a1, a2)


def _ap(a1) -> SeqStep:
    return SeqStep("ap", a1)


# src row i, optional src row j, destination row k.
#
# not:  capture NOT(i) in DCC0 through its n-wordline, then copy it out.
# and:  i -> T0, j -> T1, zeros -> T2, majority over B12, result -> k.
# or:   same with the all-ones control row as the third operand.
# nand/nor: as and/or, but the majority result is negated into DCC0 before
#       the copy-out; that AAP is the one step with both addresses in the
#       bitwise group.
# xor:  the pair addresses B8/B9 copy each source while negating it into a
#       DCC row, B10 zeroes T2/T3, the two partial majorities over B14/B15
#       leave (NOT i AND j) and (i AND NOT j) in T1 and T0, and a final OR
#       (ones -> T2, majority over B12) combines them into k.
# xnor: the same skeleton with the control rows swapped, producing
#       (NOT i OR j) AND (i OR NOT j).
_SEQUENCES: dict[BbopKind, tuple[SeqStep, ...]] = {
    BbopKind.NOT: (
        _aap(SRC1, B(5)),
        _aap(B(4), DST),
    ),
    BbopKind.AND: (
        _aap(SRC1, B(0)),
        _aap(SRC2, B(1)),
        _aap(C(0), B(2)),
        _aap(B(12), DST),
    ),
    BbopKind.OR: (
        _aap(SRC1, B(0)),
        _aap(SRC2, B(1)),
        _aap(C(1), B(2)),
        _aap(B(12), DST),
    ),
    BbopKind.NAND: (
        _aap(SRC1, B(0)),
        _aap(SRC2, B(1)),
        _aap(C(0), B(2)),
        _aap(B(12), B(5)),
        _aap(B(4), DST),
    ),
    BbopKind.NOR: (
        _aap(SRC1, B(0)),
        _aap(SRC2, B(1)),
        _aap(C(1), B(2)),
        _aap(B(12), B(5)),
        _aap(B(4), DST),
    ),
    BbopKind.XOR: (
        _aap(SRC1, B(8)),
        _aap(SRC2, B(9)),
        _aap(C(0), B(10)),
        _ap(B(14)),
        _ap(B(15)),
        _aap(C(1), B(2)),
        _aap(B(12), DST),
    ),
    BbopKind.XNOR: (
        _aap(SRC1, B(8)),
        _aap(SRC2, B(9)),
        _aap(C(1), B(10)),
        _ap(B(14)),
        _ap(B(15)),
        _aap(C(0), B(2)),
        _aap(B(12), DST),
    ),
}


def sequence_for(kind: BbopKind | str) -> tuple[SeqStep, ...]:
    """Symbolic AAP/AP step list realizing one bulk bitwise operation."""
    return _SEQUENCES[BbopKind(kind)]


class MemController:
    """Issues command sequences against a Chip and records their traces."""

    def __init__(self, chip: Chip) -> None:
        self.chip = chip

    def decode(self, addr: RowAddress) -> frozenset:
        return decode(addr, self.chip.config)

    def interleave(self, d_index: int) -> RowAddress:
        return interleave(d_index, self.chip.config)

    def _activate(self, addr: RowAddress, trace: CommandTrace, primitive: str) -> None:
        wl = self.decode(addr)
        self.chip.activate(addr.bank, addr.subarray, wl)
        trace.append(
            Command.ACTIVATE,
            addr.bank,
            addr.subarray,
            addr.label,
            wordlines_raised=len(wl),
            decoder=decoder_for(addr),
            primitive=primitive,
        )

    def aap(
        self, addr1: RowAddress, addr2: RowAddress, trace: CommandTrace | None = None
    ) -> CommandTrace:
        """ACTIVATE addr1; ACTIVATE addr2; PRECHARGE."""
        trace = trace if trace is not None else CommandTrace()
        self._activate(addr1, trace, "aap")
        self._activate(addr2, trace, "aap")
        self.chip.precharge(addr1.bank)
        trace.append(
            Command.PRECHARGE,
            addr1.bank,
            addr1.subarray,
            aap_boundary=True,
            primitive="aap",
        )
        return trace

    def ap(self, addr: RowAddress, trace: CommandTrace | None = None) -> CommandTrace:
        """ACTIVATE addr; PRECHARGE."""
        trace = trace if trace is not None else CommandTrace()
        self._activate(addr, trace, "ap")
        self.chip.precharge(addr.bank)
        trace.append(
            Command.PRECHARGE,
            addr.bank,
            addr.subarray,
            aap_boundary=True,
            primitive="ap",
        )
        return trace

    def exec_bbop(
        self,
        kind: BbopKind | str,
        dst: RowAddress | int,
        src1: RowAddress | int,
        src2: RowAddress | int | None = None,
        trace: CommandTrace | None = None,
    ) -> CommandTrace:
        """Run one bulk bitwise operation over whole rows.

        Operands may be given as data addresses or linear data-row numbers.
        All of them must live in the same subarray (the host runtime stages
        remote operands before calling this); source rows come back
        bit-identical to their pre-call contents.
        """
        kind = BbopKind(kind)
        dst = self._data_addr(dst)
        src1 = self._data_addr(src1)
        operands = {SRC1: src1, DST: dst}
        if kind in TWO_INPUT_KINDS:
            if src2 is None:
                raise ValueError(f"{kind.value} needs a second source row")
            operands[SRC2] = self._data_addr(src2)
        home = (dst.bank, dst.subarray)
        for addr in operands.values():
            if (addr.bank, addr.subarray) != home:
                raise OperandPlacement(
                    f"{addr.label} in bank/subarray {(addr.bank, addr.subarray)} "
                    f"but destination lives in {home}"
                )
        trace = trace if trace is not None else CommandTrace()
        for step in sequence_for(kind):
            a1 = self._bind(step.addr1, operands, home)
            if step.primitive == "aap":
                self.aap(a1, self._bind(step.addr2, operands, home), trace)
            else:
                self.ap(a1, trace)
        return trace

    def _data_addr(self, ref: RowAddress | int) -> RowAddress:
        if isinstance(ref, int):
            return self.interleave(ref)
        if ref.group != "D":
            raise ValueError("bbop operands must be data-group rows")
        return ref

    @staticmethod
    def _bind(slot, operands, home) -> RowAddress:
        if isinstance(slot, str):
            return operands[slot]
        return slot.at(*home)
