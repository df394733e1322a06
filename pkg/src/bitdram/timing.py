"""Latency and energy attached to command traces, plus throughput models.

Latency is unit-based: an AAP costs 2*tRAS + tRP when its three commands run
serially, or tRAS + delta + tRP when the second activation overlaps the
first through the split row decoder (the back-to-back activate needs no full
sense amplification, only `delta` more than tRAS).  An AP costs tRAS + tRP.
Serial-mode TRANSFER entries are pipelined and cost one column burst each.

Energy is per-command: each ACTIVATE costs a base energy scaled by 22% for
every wordline raised beyond the first, each PRECHARGE a fixed amount.  The
absolute base comes from calibrating the NOT sequence against a reference
per-KB figure; the DDR3 channel baseline charges every operand stream read
and the result write per KB moved.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .addressing import decode
from .controller import BbopKind, sequence_for
from .errors import Infeasible
from .trace import Command, CommandTrace


@dataclass(frozen=True)
class TimingConfig:
    t_ras: float = 35.0  # ns, ACTIVATE -> PRECHARGE
    t_rcd: float = 10.0  # ns, ACTIVATE -> READ/WRITE
    t_rp: float = 10.0  # ns, PRECHARGE -> ACTIVATE
    t_wr: float = 15.0  # ns, write recovery
    aap_overlap_delta: float = 4.0  # ns the overlapped second activate adds to tRAS
    col_burst_ns: float = 5.0  # one 64-byte column on an 8-byte DDR3-1600 bus
    mode: str = "split"  # "split" (overlapped decoder) or "naive" (serial)


# DDR3-1600 with 8-8-8 latencies (tRCD = tRP = 10 ns): the preset under
# which an AAP costs 80 ns serial and 49 ns overlapped.
DDR3_1600_888 = TimingConfig()
# DDR3-1600 with the commonly tabulated 15 ns tRCD/tRP.
DDR3_1600_TABLE = TimingConfig(t_rcd=15.0, t_rp=15.0)


def aap_latency(cfg: TimingConfig) -> float:
    if cfg.mode == "split":
        return cfg.t_ras + cfg.aap_overlap_delta + cfg.t_rp
    return 2.0 * cfg.t_ras + cfg.t_rp


def ap_latency(cfg: TimingConfig) -> float:
    return cfg.t_ras + cfg.t_rp


def latency_of(trace: CommandTrace, cfg: TimingConfig) -> float:
    """Total latency of a trace in nanoseconds.

    Exactly (#AAP units) * L_AAP + (#AP units) * L_AP plus the standalone
    commands of serial-mode copies; there are no hidden costs.
    """
    ns = trace.n_aap * aap_latency(cfg) + trace.n_ap * ap_latency(cfg)
    for e in trace:
        if e.primitive is not None:
            continue
        if e.command is Command.ACTIVATE:
            ns += cfg.t_ras
        elif e.command is Command.PRECHARGE:
            ns += cfg.t_rp
        else:  # TRANSFER / READ / WRITE move one column burst
            ns += cfg.col_burst_ns
    return ns


@dataclass(frozen=True)
class EnergyConfig:
    e_act_base: float = 2.0  # nJ per single-wordline activation (see calibrate)
    e_pre: float = 0.6  # nJ per precharge
    extra_wordline_factor: float = 1.22  # per additional wordline raised
    e_ddr3_read_kb: float = 44.2  # nJ/KB per operand stream over the channel
    e_ddr3_write_kb: float = 49.5  # nJ/KB for the result stream
    row_kb: float = 8.0  # KB per row


def energy_of(trace: CommandTrace, cfg: EnergyConfig) -> float:
    """Energy of a trace in nJ: activations (scaled per wordline) + precharges."""
    nj = 0.0
    for e in trace:
        if e.command is Command.ACTIVATE:
            nj += cfg.e_act_base * cfg.extra_wordline_factor ** (e.wordlines_raised - 1)
        elif e.command is Command.PRECHARGE:
            nj += cfg.e_pre
    return nj


def energy_per_kb(
    trace: CommandTrace, cfg: EnergyConfig, output_rows: int | None = None
) -> float:
    """Trace energy normalized by the rows of output it produced."""
    rows = trace.output_rows() if output_rows is None else output_rows
    if rows <= 0:
        raise ValueError("trace produced no output rows; pass output_rows explicitly")
    return energy_of(trace, cfg) / (rows * cfg.row_kb)


def _sequence_profile(kind: BbopKind | str) -> tuple[list[int], int]:
    """(wordline counts of every ACTIVATE, number of PRECHARGEs) for one op."""
    wl_counts: list[int] = []
    n_pre = 0
    for step in sequence_for(kind):
        addrs = [step.addr1] if step.primitive == "ap" else [step.addr1, step.addr2]
        for a in addrs:
            wl_counts.append(1 if isinstance(a, str) else len(decode(a)))
        n_pre += 1
    return wl_counts, n_pre


def sequence_latency(kind: BbopKind | str, cfg: TimingConfig) -> float:
    """Latency of one op's sequence without executing it."""
    steps = sequence_for(kind)
    n_aap = sum(1 for s in steps if s.primitive == "aap")
    n_ap = len(steps) - n_aap
    return n_aap * aap_latency(cfg) + n_ap * ap_latency(cfg)


def sequence_energy_per_kb(kind: BbopKind | str, cfg: EnergyConfig) -> float:
    """Per-KB energy of one op's sequence (one row of output)."""
    wl_counts, n_pre = _sequence_profile(kind)
    nj = sum(cfg.e_act_base * cfg.extra_wordline_factor ** (w - 1) for w in wl_counts)
    nj += cfg.e_pre * n_pre
    return nj / cfg.row_kb


def calibrate(
    cfg: EnergyConfig,
    targets: dict[str, float],
    pre_ratio: float = 0.3,
    rel_tol: float = 0.2,
) -> EnergyConfig:
    """Solve the activation base energy from a NOT-sequence anchor.

    `targets` must contain a positive per-KB figure for "not"; e_act_base
    and e_pre (at the given precharge/activate ratio) are set so the NOT
    sequence hits it exactly.  Any other ops named in `targets` are checked
    against their implied energies and must agree within `rel_tol`,
    otherwise the target set is inconsistent with the command structure.
    """
    anchor = targets.get("not")
    if anchor is None or anchor <= 0:
        raise Infeasible("calibration needs a positive per-KB target for 'not'")
    wl_counts, n_pre = _sequence_profile(BbopKind.NOT)
    act_units = sum(cfg.extra_wordline_factor ** (w - 1) for w in wl_counts)
    e_act = anchor * cfg.row_kb / (act_units + pre_ratio * n_pre)
    out = replace(cfg, e_act_base=e_act, e_pre=pre_ratio * e_act)
    for name, target in targets.items():
        if name == "not":
            continue
        if target <= 0:
            raise Infeasible(f"target for {name!r} must be positive")
        implied = sequence_energy_per_kb(name, out)
        if abs(implied - target) > rel_tol * target:
            raise Infeasible(
                f"target {name}={target} nJ/KB is inconsistent with the "
                f"command structure (implied {implied:.3f})"
            )
    return out


@dataclass(frozen=True)
class BandwidthPreset:
    name: str
    bytes_per_second: float


# Channel bandwidths the bandwidth-bound baseline runs against.
SKYLAKE_LIKE = BandwidthPreset("skylake_like", 2 * 2133e6 * 8)  # two 64-bit DDR3-2133
GPU_LIKE = BandwidthPreset("gpu_like", 1800e6 * 16)  # one 128-bit DDR3-1800
HMC_LIKE = BandwidthPreset("hmc_like", 320e9)  # 32 vaults x 10 GB/s

BANDWIDTH_PRESETS = {p.name: p for p in (SKYLAKE_LIKE, GPU_LIKE, HMC_LIKE)}


def streams(kind: BbopKind | str) -> int:
    """Memory streams a conventional system moves per op: operand reads + result."""
    return 2 if BbopKind(kind) is BbopKind.NOT else 3


def in_dram_throughput(
    kind: BbopKind | str,
    banks: int,
    cfg: TimingConfig = DDR3_1600_888,
    row_bytes: int = 8192,
) -> float:
    """Aggregate bytes/second of result produced with all banks computing."""
    return banks * row_bytes / (sequence_latency(kind, cfg) * 1e-9)


def baseline_throughput(kind: BbopKind | str, preset: BandwidthPreset) -> float:
    """Bytes/second of result for a system limited by channel bandwidth."""
    return preset.bytes_per_second / streams(kind)


def baseline_energy_per_kb(kind: BbopKind | str, cfg: EnergyConfig) -> float:
    """nJ/KB for the op over the DDR3 channel: operand reads plus the write."""
    return (streams(kind) - 1) * cfg.e_ddr3_read_kb + cfg.e_ddr3_write_kb


def energy_reduction(kind: BbopKind | str, cfg: EnergyConfig) -> float:
    """Factor by which in-DRAM execution cuts energy vs the channel baseline."""
    return baseline_energy_per_kb(kind, cfg) / sequence_energy_per_kb(kind, cfg)
