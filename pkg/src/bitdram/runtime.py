"""System-integration layer: bbop instructions, allocation, coherence, ECC.

The host sees a linear byte space over the chip's data rows.  A `bbop`
instruction names its destination and source(s) by byte address plus a size;
row-aligned instructions whose operands sit in one subarray run as in-DRAM
command sequences, operands in other subarrays are first staged into free
data rows of the destination's subarray with serial-mode copies, and
anything misaligned falls back to the host, which computes the same result
at channel-bandwidth cost.

The allocator hands out whole rows.  Bitvectors allocated into the same
affinity group are interleaved so that segment i of every member lives in
the same subarray, which keeps all copies of a group-local operation in
fast parallel mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .addressing import RowAddress, interleave, linear_index
from .controller import BbopKind, MemController, TWO_INPUT_KINDS
from .dram import FIRST_DATA_ROW, Chip
from .errors import CapacityExhausted, CorruptInput, OutOfRange
from .timing import SKYLAKE_LIKE, BandwidthPreset
from .trace import CommandTrace


@dataclass
class RuntimeConfig:
    line_bytes: int = 64
    flush_ns_per_line: float = 2.0  # writeback of one dirty line
    host_bandwidth: BandwidthPreset = SKYLAKE_LIKE  # costs host-fallback work


@dataclass
class CoherenceCost:
    """Cache work required before an in-memory operation may touch the rows."""

    dirty_lines_flushed: int = 0
    lines_invalidated: int = 0
    added_ns: float = 0.0  # flushes only; invalidations overlap the operation

    def merge(self, other: "CoherenceCost") -> "CoherenceCost":
        return CoherenceCost(
            self.dirty_lines_flushed + other.dirty_lines_flushed,
            self.lines_invalidated + other.lines_invalidated,
            self.added_ns + other.added_ns,
        )


@dataclass(frozen=True)
class BbopInstruction:
    """bbop op, dst, src1, [src2], size - addresses are bytes, size in bytes."""

    op: BbopKind
    dst: int
    src1: int
    src2: int | None
    size: int

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise ValueError("size must be positive")


@dataclass
class BitvectorHandle:
    handle_id: int
    length_bits: int
    placement: list[RowAddress]  # one data address per whole-row segment
    group: int

    @property
    def rows(self) -> int:
        return len(self.placement)


@dataclass
class BbopResult:
    path: str  # "in_dram" or "host"
    trace: CommandTrace | None = None
    coherence: CoherenceCost | None = None
    staged_rows: int = 0
    host_ns: float = 0.0


class HostFallback(BbopResult):
    """Result of an instruction the CPU had to execute itself."""

    def __init__(self, host_ns: float) -> None:
        super().__init__(path="host", host_ns=host_ns)


class Allocator:
    """Row allocator with subarray affinity groups.

    Rows within each subarray are handed out in index order, so placement
    is deterministic given the allocation order.  A group fixes, per
    segment index, the subarray that must host that segment for every
    member; a full subarray is a hard error rather than a silent spill.
    """

    def __init__(self, chip: Chip) -> None:
        self.config = chip.config
        self._used: dict[tuple[int, int], int] = {}
        self._group_homes: dict[int, list[tuple[int, int]]] = {}
        self._next_handle = 0
        self._next_group = 0
        self._next_sub_linear = 0
        self._n_subs = self.config.banks * self.config.subarrays_per_bank

    def new_group(self) -> int:
        g = self._next_group
        self._next_group += 1
        self._group_homes[g] = []
        return g

    def _sub_at(self, linear: int) -> tuple[int, int]:
        linear %= self._n_subs
        return divmod(linear, self.config.subarrays_per_bank)

    def used_rows(self, bank: int, subarray: int) -> int:
        return self._used.get((bank, subarray), 0)

    def free_rows(self, bank: int, subarray: int) -> int:
        return self.config.data_rows_per_subarray - self.used_rows(bank, subarray)

    def alloc(self, nbits: int, group: int | None = None) -> BitvectorHandle:
        """Reserve whole rows for `nbits`, honoring the group's placement."""
        if nbits <= 0:
            raise ValueError("nbits must be positive")
        if group is None:
            group = self.new_group()
        elif group not in self._group_homes:
            raise ValueError(f"unknown affinity group {group}")
        homes = self._group_homes[group]
        segments = -(-nbits // self.config.row_bits)
        while len(homes) < segments:
            homes.append(self._sub_at(self._next_sub_linear))
            self._next_sub_linear += 1
        placement = []
        for seg in range(segments):
            bank, sub = homes[seg]
            used = self._used.get((bank, sub), 0)
            if used >= self.config.data_rows_per_subarray:
                raise CapacityExhausted(
                    f"subarray (bank {bank}, subarray {sub}) hosting segment "
                    f"{seg} of group {group} has no free data row"
                )
            self._used[(bank, sub)] = used + 1
            placement.append(RowAddress("D", used, bank=bank, subarray=sub))
        handle = BitvectorHandle(self._next_handle, nbits, placement, group)
        self._next_handle += 1
        return handle

    def staging_rows(self, bank: int, subarray: int, count: int) -> list[RowAddress]:
        """Free data rows usable for staging remote operands, top of the space
        downwards so they stay clear of allocated rows."""
        free = self.free_rows(bank, subarray)
        if free < count:
            raise CapacityExhausted(
                f"need {count} staging rows in (bank {bank}, subarray {subarray}), "
                f"only {free} free"
            )
        top = self.config.data_rows_per_subarray
        return [
            RowAddress("D", top - 1 - i, bank=bank, subarray=subarray)
            for i in range(count)
        ]


def host_bitwise(kind: BbopKind, a: np.ndarray, b: np.ndarray | None) -> np.ndarray:
    """The plain bitwise semantics of each op, on packed byte arrays.

    This is the CPU-side reference the host fallback executes; it is also
    the independent route the `verify` subcommand checks the in-memory
    engine against."""
    if kind is BbopKind.NOT:
        return np.bitwise_not(a)
    if kind is BbopKind.AND:
        return a & b
    if kind is BbopKind.OR:
        return a | b
    if kind is BbopKind.NAND:
        return np.bitwise_not(a & b)
    if kind is BbopKind.NOR:
        return np.bitwise_not(a | b)
    if kind is BbopKind.XOR:
        return a ^ b
    return np.bitwise_not(a ^ b)  # xnor


class HostRuntime:
    """Driver + runtime for one chip: allocation, bbop dispatch, coherence."""

    def __init__(self, chip: Chip, config: RuntimeConfig | None = None) -> None:
        self.chip = chip
        self.config = config or RuntimeConfig()
        self.controller = MemController(chip)
        self.allocator = Allocator(chip)
        cc = chip.config
        self.total_data_rows = cc.banks * cc.subarrays_per_bank * cc.data_rows_per_subarray
        self.space_bytes = self.total_data_rows * cc.row_bytes

    # -- allocation and host-visible data access ---------------------------

    def new_group(self) -> int:
        return self.allocator.new_group()

    def alloc(self, nbits: int, group: int | None = None) -> BitvectorHandle:
        return self.allocator.alloc(nbits, group)

    def write(self, handle: BitvectorHandle, bits) -> None:
        """Store a bit vector into its rows; the last row is zero-padded."""
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.shape != (handle.length_bits,):
            raise ValueError(f"expected {handle.length_bits} bits")
        width = self.chip.config.row_bits
        padded = np.zeros(handle.rows * width, dtype=np.uint8)
        padded[: handle.length_bits] = arr
        for seg, addr in enumerate(handle.placement):
            row = FIRST_DATA_ROW + addr.index
            self.chip.write_row(
                addr.bank, addr.subarray, row, padded[seg * width : (seg + 1) * width]
            )

    def read(self, handle: BitvectorHandle) -> np.ndarray:
        width = self.chip.config.row_bits
        out = np.empty(handle.rows * width, dtype=np.uint8)
        for seg, addr in enumerate(handle.placement):
            row = FIRST_DATA_ROW + addr.index
            out[seg * width : (seg + 1) * width] = self.chip.read_row(
                addr.bank, addr.subarray, row
            )
        return out[: handle.length_bits]

    def fill(self, handle: BitvectorHandle, bit: int) -> CommandTrace:
        """Initialize every row of the handle from a control row (one AAP each)."""
        trace = CommandTrace()
        src = RowAddress("C", 1 if bit else 0)
        for addr in handle.placement:
            self.controller.aap(src.at(addr.bank, addr.subarray), addr, trace)
        return trace

    def address_of(self, handle: BitvectorHandle, segment: int = 0) -> int:
        """Byte address of one segment in the linear data space."""
        return linear_index(handle.placement[segment], self.chip.config) * self.chip.config.row_bytes

    def read_bytes(self, addr: int, n: int) -> np.ndarray:
        """Raw bytes from the linear data space."""
        self._check_range(addr, n)
        cc = self.chip.config
        out = np.empty(n, dtype=np.uint8)
        got = 0
        while got < n:
            row_idx, offset = divmod(addr + got, cc.row_bytes)
            take = min(n - got, cc.row_bytes - offset)
            ra = interleave(row_idx, cc)
            sub = self.chip.subarray(ra.bank, ra.subarray)
            packed = sub.row_packed(FIRST_DATA_ROW + ra.index)
            out[got : got + take] = packed[offset : offset + take]
            got += take
        return out

    def write_bytes(self, addr: int, data: np.ndarray) -> None:
        self._check_range(addr, len(data))
        cc = self.chip.config
        data = np.asarray(data, dtype=np.uint8)
        put = 0
        while put < len(data):
            row_idx, offset = divmod(addr + put, cc.row_bytes)
            take = min(len(data) - put, cc.row_bytes - offset)
            ra = interleave(row_idx, cc)
            sub = self.chip.subarray(ra.bank, ra.subarray)
            packed = sub.row_packed(FIRST_DATA_ROW + ra.index).copy()
            packed[offset : offset + take] = data[put : put + take]
            sub.set_packed(FIRST_DATA_ROW + ra.index, packed)
            put += take
        return None

    def _check_range(self, addr: int, n: int) -> None:
        if addr < 0 or addr + n > self.space_bytes:
            raise OutOfRange(
                f"byte range [{addr}, {addr + n}) outside the {self.space_bytes}-byte space"
            )

    # -- coherence ----------------------------------------------------------

    def coherence_prepare(
        self,
        src_rows: list[int],
        dst_rows: list[int],
        dirty_map: set[int] | None = None,
    ) -> CoherenceCost:
        """Flush dirty source lines, invalidate destination lines.

        `dirty_map` holds dirty line numbers (byte address // line size) of
        the simulated cache; there is no cache model beyond it.  Only the
        flushes cost time: invalidations proceed in parallel with the
        in-memory operation.
        """
        lines_per_row = max(1, self.chip.config.row_bytes // self.config.line_bytes)
        flushed = 0
        if dirty_map:
            for row in src_rows:
                base = row * lines_per_row
                flushed += sum(1 for ln in range(base, base + lines_per_row) if ln in dirty_map)
                if dirty_map is not None:
                    for ln in range(base, base + lines_per_row):
                        dirty_map.discard(ln)
        invalidated = len(dst_rows) * lines_per_row
        return CoherenceCost(
            dirty_lines_flushed=flushed,
            lines_invalidated=invalidated,
            added_ns=flushed * self.config.flush_ns_per_line,
        )

    # -- bbop dispatch -------------------------------------------------------

    def bbop_execute(
        self, instr: BbopInstruction, dirty_map: set[int] | None = None
    ) -> BbopResult:
        """Execute one bbop instruction; the result in memory is always correct.

        Row-aligned instructions run in memory (staging remote operands into
        the destination's subarray first); everything else is a host
        fallback, not an error.
        """
        kind = BbopKind(instr.op)
        srcs = [instr.src1] + ([instr.src2] if kind in TWO_INPUT_KINDS else [])
        if kind in TWO_INPUT_KINDS and instr.src2 is None:
            raise ValueError(f"{kind.value} needs src2")
        for a in srcs + [instr.dst]:
            self._check_range(a, instr.size)
        row_bytes = self.chip.config.row_bytes
        aligned = instr.size % row_bytes == 0 and all(
            a % row_bytes == 0 for a in srcs + [instr.dst]
        )
        if not aligned:
            return self._host_fallback(kind, instr, srcs)

        rows = instr.size // row_bytes
        src_rows = [a // row_bytes + r for a in srcs for r in range(rows)]
        dst_rows = [instr.dst // row_bytes + r for r in range(rows)]
        coherence = self.coherence_prepare(src_rows, dst_rows, dirty_map)
        trace = CommandTrace()
        staged = 0
        for r in range(rows):
            dst = interleave(instr.dst // row_bytes + r, self.chip.config)
            ops = [interleave(a // row_bytes + r, self.chip.config) for a in srcs]
            ops, n = self._stage_operands(dst, ops, trace)
            staged += n
            self.controller.exec_bbop(
                kind, dst, ops[0], ops[1] if len(ops) > 1 else None, trace
            )
        return BbopResult(
            path="in_dram", trace=trace, coherence=coherence, staged_rows=staged
        )

    def _stage_operands(
        self, dst: RowAddress, ops: list[RowAddress], trace: CommandTrace
    ) -> tuple[list[RowAddress], int]:
        """Copy any operand living outside dst's subarray into a free row there."""
        home = (dst.bank, dst.subarray)
        remote = [op for op in ops if (op.bank, op.subarray) != home]
        if not remote:
            return ops, 0
        slots = self.allocator.staging_rows(dst.bank, dst.subarray, len(remote))
        staged = dict(zip((id(op) for op in remote), slots))
        out = []
        for op in ops:
            if (op.bank, op.subarray) == home:
                out.append(op)
                continue
            slot = staged[id(op)]
            self._psm_copy(op, slot, trace)
            out.append(slot)
        return out, len(remote)

    def _psm_copy(self, src: RowAddress, dst: RowAddress, trace: CommandTrace) -> None:
        src_row = FIRST_DATA_ROW + src.index
        dst_row = FIRST_DATA_ROW + dst.index
        if src.bank != dst.bank:
            self.chip.transfer_psm(
                src.bank, src.subarray, src_row, dst.bank, dst.subarray, dst_row, trace
            )
            return
        # Same bank: bounce off a free row of a neighboring bank.
        temp_bank = (src.bank + 1) % self.chip.config.banks
        temp = self.allocator.staging_rows(temp_bank, dst.subarray, 1)[0]
        self.chip.transfer_intra_bank(
            src.bank,
            src.subarray,
            src_row,
            dst.subarray,
            dst_row,
            temp_bank,
            temp.subarray,
            FIRST_DATA_ROW + temp.index,
            trace,
        )

    def _host_fallback(
        self, kind: BbopKind, instr: BbopInstruction, srcs: list[int]
    ) -> HostFallback:
        a = self.read_bytes(srcs[0], instr.size)
        b = self.read_bytes(srcs[1], instr.size) if len(srcs) > 1 else None
        self.write_bytes(instr.dst, host_bitwise(kind, a, b))
        touched = instr.size * (len(srcs) + 1)
        ns = touched / self.config.host_bandwidth.bytes_per_second * 1e9
        return HostFallback(host_ns=ns)

    def bbop_handles(
        self,
        kind: BbopKind | str,
        dst: BitvectorHandle,
        src1: BitvectorHandle,
        src2: BitvectorHandle | None = None,
        dirty_map: set[int] | None = None,
    ) -> BbopResult:
        """Apply one op across all segments of row-aligned handles."""
        kind = BbopKind(kind)
        if not (dst.rows == src1.rows and (src2 is None or src2.rows == dst.rows)):
            raise ValueError("handles must span the same number of rows")
        trace = CommandTrace()
        coherence = CoherenceCost()
        staged = 0
        for seg in range(dst.rows):
            res = self.bbop_execute(
                BbopInstruction(
                    kind,
                    self.address_of(dst, seg),
                    self.address_of(src1, seg),
                    self.address_of(src2, seg) if src2 is not None else None,
                    self.chip.config.row_bytes,
                ),
                dirty_map,
            )
            for e in res.trace:
                trace.entries.append(e)
                e.seq_no = len(trace.entries) - 1
            coherence = coherence.merge(res.coherence)
            staged += res.staged_rows
        return BbopResult(
            path="in_dram", trace=trace, coherence=coherence, staged_rows=staged
        )

    # -- host-side helpers ----------------------------------------------------

    def host_bitcount(self, source) -> int:
        """Population count, performed by the CPU (charged to the baseline)."""
        if isinstance(source, BitvectorHandle):
            bits = self.read(source)
        else:
            bits = np.asarray(source, dtype=np.uint8)
        return int(bits.sum())


# -- redundant-copy ECC -------------------------------------------------------
#
# The code ECC(A) = AA survives in-memory bitwise operations because applying
# the op to payload and replica independently is the same as applying it to
# the codeword.


@dataclass
class TmrCodeword:
    payload: np.ndarray  # uint8 bits
    replica: np.ndarray


def tmr_encode(bits) -> TmrCodeword:
    arr = np.asarray(bits, dtype=np.uint8)
    return TmrCodeword(payload=arr.copy(), replica=arr.copy())


def tmr_check(cw: TmrCodeword) -> bool:
    """True when the replica still matches the payload."""
    return bool(np.array_equal(cw.payload, cw.replica))


def tmr_decode(cw: TmrCodeword) -> np.ndarray:
    if not tmr_check(cw):
        raise CorruptInput("replica does not match payload")
    return cw.payload.copy()


def tmr_op(
    kind: BbopKind | str, cw1: TmrCodeword, cw2: TmrCodeword | None = None
) -> TmrCodeword:
    """Apply a bitwise op to payloads and replicas independently."""
    kind = BbopKind(kind)
    if kind in TWO_INPUT_KINDS:
        if cw2 is None:
            raise ValueError(f"{kind.value} needs two codewords")
        if len(cw1.payload) != len(cw2.payload):
            raise ValueError("codeword lengths differ")
    pay1 = np.packbits(cw1.payload)
    rep1 = np.packbits(cw1.replica)
    pay2 = np.packbits(cw2.payload) if cw2 is not None else None
    rep2 = np.packbits(cw2.replica) if cw2 is not None else None
    n = len(cw1.payload)
    return TmrCodeword(
        payload=np.unpackbits(host_bitwise(kind, pay1, pay2))[:n],
        replica=np.unpackbits(host_bitwise(kind, rep1, rep2))[:n],
    )
