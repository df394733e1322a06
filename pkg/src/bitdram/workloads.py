"""Application workloads built on bulk bitwise operations, with scalar oracles.

Three workloads exercise the full stack:

  * a bitmap-index query over per-day user activity bitmaps ("how many
    users were active every week; how many male users each week"),
  * a bit-sliced columnar scan evaluating c1 <= val <= c2 over a vertically
    decomposed integer column,
  * bitvector set union/intersection/difference.

Each returns its functional answer (always checked against plain scalar
recomputation in the tests), the simulated in-memory time, and the time a
bandwidth-bound conventional system would need for the same operations.
Bitcounts run on the CPU in both models and are charged at channel
bandwidth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controller import BbopKind
from .errors import ConstantOutOfRange
from .runtime import BbopResult, BitvectorHandle, HostRuntime
from .timing import (
    DDR3_1600_888,
    SKYLAKE_LIKE,
    BandwidthPreset,
    TimingConfig,
    latency_of,
    streams,
)


class _Meter:
    """Accumulates simulated and baseline time over a run of bbops.

    Both engines operate on the same row-aligned bitvectors, so the
    bandwidth-bound baseline is charged for the rows each operand stream
    touches (a short vector still occupies a whole row).
    """

    def __init__(self, runtime: HostRuntime, timing: TimingConfig, bandwidth: BandwidthPreset):
        self.runtime = runtime
        self.timing = timing
        self.bandwidth = bandwidth
        self.sim_ns = 0.0
        self.baseline_ns = 0.0
        self.tally: dict[str, int] = {}

    def _count(self, name: str) -> None:
        self.tally[name] = self.tally.get(name, 0) + 1

    def _stream_ns(self, handle: BitvectorHandle, n_streams: int) -> float:
        nbytes = handle.rows * self.runtime.chip.config.row_bytes
        return n_streams * nbytes / self.bandwidth.bytes_per_second * 1e9

    def bbop(
        self,
        kind: BbopKind | str,
        dst: BitvectorHandle,
        src1: BitvectorHandle,
        src2: BitvectorHandle | None = None,
    ) -> BbopResult:
        kind = BbopKind(kind)
        res = self.runtime.bbop_handles(kind, dst, src1, src2)
        self.sim_ns += latency_of(res.trace, self.timing) + res.coherence.added_ns
        self.baseline_ns += self._stream_ns(dst, streams(kind))
        self._count(kind.value)
        return res

    def fill(self, handle: BitvectorHandle, bit: int) -> None:
        trace = self.runtime.fill(handle, bit)
        self.sim_ns += latency_of(trace, self.timing)
        self.baseline_ns += self._stream_ns(handle, 1)
        self._count("fill")

    def bitcount(self, handle: BitvectorHandle) -> int:
        count = self.runtime.host_bitcount(handle)
        # The CPU reads the vector over the channel in both models.
        ns = self._stream_ns(handle, 1)
        self.sim_ns += ns
        self.baseline_ns += ns
        self._count("bitcount")
        return count


# -- bitmap index --------------------------------------------------------------


@dataclass
class BitmapWorkload:
    """Per-day activity bitmaps plus a gender bitmap for u users over w weeks."""

    u: int
    w: int
    daily: list[np.ndarray]  # 7*w arrays of u bits
    gender: np.ndarray  # u bits, 1 = male

    @classmethod
    def random(cls, u: int, w: int, seed: int = 0, activity: float = 0.5) -> "BitmapWorkload":
        rng = np.random.default_rng(seed)
        daily = [
            (rng.random(u) < activity).astype(np.uint8) for _ in range(7 * w)
        ]
        gender = rng.integers(0, 2, u, dtype=np.uint8)
        return cls(u=u, w=w, daily=daily, gender=gender)


def bitmap_query(
    runtime: HostRuntime,
    workload: BitmapWorkload,
    timing: TimingConfig = DDR3_1600_888,
    bandwidth: BandwidthPreset = SKYLAKE_LIKE,
) -> dict:
    """How many users were active every week, and how many male users per week.

    Per week the seven daily bitmaps are OR-folded (6 ORs each); the weekly
    vectors are AND-folded into the every-week vector (w-1 ANDs, one
    bitcount); the male counts AND each weekly vector with the gender bitmap
    (w ANDs, w bitcounts).  Totals: 6w ORs, 2w-1 ANDs, w+1 bitcounts.
    """
    u, w = workload.u, workload.w
    meter = _Meter(runtime, timing, bandwidth)
    group = runtime.new_group()
    days = []
    for bits in workload.daily:
        h = runtime.alloc(u, group)
        runtime.write(h, bits)
        days.append(h)
    gender = runtime.alloc(u, group)
    runtime.write(gender, workload.gender)
    weekly = [runtime.alloc(u, group) for _ in range(w)]
    every = runtime.alloc(u, group)
    male_tmp = runtime.alloc(u, group)

    for wk in range(w):
        base = 7 * wk
        meter.bbop("or", weekly[wk], days[base], days[base + 1])
        for d in range(2, 7):
            meter.bbop("or", weekly[wk], weekly[wk], days[base + d])
    if w == 1:
        every = weekly[0]
    else:
        meter.bbop("and", every, weekly[0], weekly[1])
        for wk in range(2, w):
            meter.bbop("and", every, every, weekly[wk])
    weekly_active_count = meter.bitcount(every)
    male_weekly_counts = []
    for wk in range(w):
        meter.bbop("and", male_tmp, gender, weekly[wk])
        male_weekly_counts.append(meter.bitcount(male_tmp))

    return {
        "u": u,
        "w": w,
        "weekly_active_count": weekly_active_count,
        "male_weekly_counts": male_weekly_counts,
        "op_tally": {
            "or": meter.tally.get("or", 0),
            "and": meter.tally.get("and", 0),
            "bitcount": meter.tally.get("bitcount", 0),
        },
        "sim_ns": meter.sim_ns,
        "baseline_ns": meter.baseline_ns,
    }


def bitmap_oracle(workload: BitmapWorkload) -> tuple[int, list[int]]:
    """Scalar recomputation of the bitmap query."""
    weekly = []
    for wk in range(workload.w):
        acc = np.zeros(workload.u, dtype=np.uint8)
        for d in range(7):
            acc |= workload.daily[7 * wk + d]
        weekly.append(acc)
    every = weekly[0].copy()
    for v in weekly[1:]:
        every &= v
    males = [int((workload.gender & v).sum()) for v in weekly]
    return int(every.sum()), males


# -- bit-sliced columnar scan ---------------------------------------------------


@dataclass
class BitWeavingTable:
    """A column of r b-bit values stored as b vertical bit slices (MSB first)."""

    r: int
    b: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if not 4 <= self.b <= 32:
            raise ValueError("b must be in 4..32")
        if np.any(self.values < 0) or np.any(self.values >= (1 << self.b)):
            raise ValueError("values wider than b bits")

    @classmethod
    def random(cls, r: int, b: int, seed: int = 0) -> "BitWeavingTable":
        rng = np.random.default_rng(seed)
        return cls(r=r, b=b, values=rng.integers(0, 1 << b, r, dtype=np.int64))

    def slices(self) -> list[np.ndarray]:
        """Slice j holds bit (b-1-j) of every value: slice 0 is the MSB."""
        return [
            ((self.values >> (self.b - 1 - j)) & 1).astype(np.uint8)
            for j in range(self.b)
        ]

    @staticmethod
    def reassemble(slices: list[np.ndarray]) -> np.ndarray:
        vals = np.zeros(len(slices[0]), dtype=np.int64)
        for s in slices:
            vals = (vals << 1) | s
        return vals


def bitweaving_scan(
    runtime: HostRuntime,
    table: BitWeavingTable,
    c1: int,
    c2: int,
    timing: TimingConfig = DDR3_1600_888,
    bandwidth: BandwidthPreset = SKYLAKE_LIKE,
) -> dict:
    """Count rows with c1 <= val <= c2 using only bulk bitwise ops + bitcount.

    The standard bit-serial comparator walks the slices MSB to LSB keeping
    an "equal so far" mask per bound: for val <= c2, rows become known-less
    wherever they show a 0 against a 1 constant bit; for val >= c1,
    known-greater on a 1 against a 0.  Every mask update is issued as a
    bbop; the final mask is (lt | eq) & (gt | eq').
    """
    b = table.b
    if not 0 <= c1 <= c2 < (1 << b):
        raise ConstantOutOfRange(f"need 0 <= c1 <= c2 < 2^{b}")
    meter = _Meter(runtime, timing, bandwidth)
    group = runtime.new_group()
    slices = []
    for bits in table.slices():
        h = runtime.alloc(table.r, group)
        runtime.write(h, bits)
        slices.append(h)
    lt, gt, eq_le, eq_ge, not_s, term, m_le = (
        runtime.alloc(table.r, group) for _ in range(7)
    )
    meter.fill(lt, 0)
    meter.fill(gt, 0)
    meter.fill(eq_le, 1)
    meter.fill(eq_ge, 1)

    for j in range(b):
        s = slices[j]
        c2_bit = (c2 >> (b - 1 - j)) & 1
        c1_bit = (c1 >> (b - 1 - j)) & 1
        meter.bbop("not", not_s, s)
        if c2_bit:
            meter.bbop("and", term, eq_le, not_s)
            meter.bbop("or", lt, lt, term)
            meter.bbop("and", eq_le, eq_le, s)
        else:
            meter.bbop("and", eq_le, eq_le, not_s)
        if c1_bit:
            meter.bbop("and", eq_ge, eq_ge, s)
        else:
            meter.bbop("and", term, eq_ge, s)
            meter.bbop("or", gt, gt, term)
            meter.bbop("and", eq_ge, eq_ge, not_s)

    meter.bbop("or", m_le, lt, eq_le)
    meter.bbop("or", gt, gt, eq_ge)  # gt now holds the >= mask
    meter.bbop("and", m_le, m_le, gt)
    count = meter.bitcount(m_le)
    return {
        "r": table.r,
        "b": b,
        "c1": c1,
        "c2": c2,
        "count": count,
        "bbops": sum(v for k, v in meter.tally.items() if k not in ("bitcount",)),
        "sim_ns": meter.sim_ns,
        "baseline_ns": meter.baseline_ns,
    }


def scan_oracle(table: BitWeavingTable, c1: int, c2: int) -> int:
    return int(np.count_nonzero((table.values >= c1) & (table.values <= c2)))


# -- bitvector sets --------------------------------------------------------------


@dataclass
class SetInstance:
    """m sets over the domain 1..N, stored as element lists."""

    domain: int
    sets: list[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.sets) < 2:
            raise ValueError("need at least two input sets")
        for s in self.sets:
            if len(s) and (s.min() < 1 or s.max() > self.domain):
                raise ValueError("elements must lie in 1..N")

    @classmethod
    def random(cls, domain: int, m: int, elements: int, seed: int = 0) -> "SetInstance":
        rng = np.random.default_rng(seed)
        sets = [
            rng.choice(domain, size=min(elements, domain), replace=False) + 1
            for _ in range(m)
        ]
        return cls(domain=domain, sets=sets)

    def bitvectors(self) -> list[np.ndarray]:
        out = []
        for s in self.sets:
            bits = np.zeros(self.domain, dtype=np.uint8)
            bits[s - 1] = 1
            out.append(bits)
        return out


SET_OPS = ("union", "intersection", "difference")

# Cost constant for the balanced-tree comparison: ns per element visited,
# times log2 of the set size. A trend estimate, not a measured competitor.
RBTREE_NS_PER_ELEMENT_LOG = 20.0


def set_op(
    runtime: HostRuntime,
    kind: str,
    instance: SetInstance,
    timing: TimingConfig = DDR3_1600_888,
    bandwidth: BandwidthPreset = SKYLAKE_LIKE,
) -> dict:
    """Fold m bitvector sets with OR / AND / AND-NOT chains."""
    if kind not in SET_OPS:
        raise ValueError(f"kind must be one of {SET_OPS}")
    meter = _Meter(runtime, timing, bandwidth)
    group = runtime.new_group()
    vecs = []
    for bits in instance.bitvectors():
        h = runtime.alloc(instance.domain, group)
        runtime.write(h, bits)
        vecs.append(h)
    acc = runtime.alloc(instance.domain, group)
    tmp = runtime.alloc(instance.domain, group)

    if kind == "union":
        meter.bbop("or", acc, vecs[0], vecs[1])
        for v in vecs[2:]:
            meter.bbop("or", acc, acc, v)
    elif kind == "intersection":
        meter.bbop("and", acc, vecs[0], vecs[1])
        for v in vecs[2:]:
            meter.bbop("and", acc, acc, v)
    else:
        meter.bbop("not", tmp, vecs[1])
        meter.bbop("and", acc, vecs[0], tmp)
        for v in vecs[2:]:
            meter.bbop("not", tmp, v)
            meter.bbop("and", acc, acc, tmp)

    result_bits = runtime.read(acc)
    sizes = sum(len(s) for s in instance.sets)
    max_size = max(max(len(s) for s in instance.sets), 2)
    return {
        "op": kind,
        "m": len(instance.sets),
        "domain": instance.domain,
        "result_set_bits": result_bits,
        "result_size": int(result_bits.sum()),
        "sim_ns": meter.sim_ns,
        "baseline_ns": meter.baseline_ns,
        "rbtree_oracle_ns_estimate": RBTREE_NS_PER_ELEMENT_LOG
        * sizes
        * float(np.log2(max_size)),
    }


def set_oracle(kind: str, instance: SetInstance) -> set:
    """Sorted-set semantics of the same operation."""
    sets = [set(map(int, s)) for s in instance.sets]
    if kind == "union":
        return set().union(*sets)
    if kind == "intersection":
        acc = sets[0]
        for s in sets[1:]:
            acc = acc & s
        return acc
    acc = sets[0]
    for s in sets[1:]:
        acc = acc - s
    return acc
