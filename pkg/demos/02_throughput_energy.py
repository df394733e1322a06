"""Latency, energy, and throughput of in-memory bitwise operations
==================================================================

Prices each operation's command sequence under DDR3-1600 timing, calibrates
the energy model, and compares aggregate throughput against bandwidth-bound
conventional systems.

Run: python demos/02_throughput_energy.py
"""

import dataclasses

from bitdram import (
    BANDWIDTH_PRESETS,
    DDR3_1600_888,
    EnergyConfig,
    baseline_energy_per_kb,
    baseline_throughput,
    calibrate,
    energy_reduction,
    in_dram_throughput,
    sequence_energy_per_kb,
    sequence_latency,
)
from bitdram.controller import BbopKind

split = DDR3_1600_888
naive = dataclasses.replace(split, mode="naive")

print("an ACTIVATE-ACTIVATE-PRECHARGE unit under DDR3-1600 (8-8-8):")
print(f"  serial commands:       2*tRAS + tRP = {2 * split.t_ras + split.t_rp:.0f} ns")
print(
    f"  overlapped decoders:    tRAS + {split.aap_overlap_delta:.0f} + tRP = "
    f"{split.t_ras + split.aap_overlap_delta + split.t_rp:.0f} ns"
)
print("the second activation needs no full sense amplification, so the dedicated")
print("decoder for the reserved addresses lets the two activations overlap\n")

energy = calibrate(EnergyConfig(), {"not": 1.6})
print(f"energy model calibrated: base activation {energy.e_act_base:.3f} nJ, "
      f"each extra wordline x{energy.extra_wordline_factor}\n")

print(f"{'op':6s} {'naive ns':>9s} {'split ns':>9s} {'nJ/KB':>7s} {'DDR3 nJ/KB':>11s} {'saving':>7s}")
for kind in BbopKind:
    print(
        f"{kind.value:6s} {sequence_latency(kind, naive):9.0f} "
        f"{sequence_latency(kind, split):9.0f} "
        f"{sequence_energy_per_kb(kind, energy):7.2f} "
        f"{baseline_energy_per_kb(kind, energy):11.1f} "
        f"{energy_reduction(kind, energy):6.1f}X"
    )

print("\naggregate AND throughput (every bank computes a row in parallel):")
for banks, label in ((1, "one bank"), (8, "standard module"), (256, "3D-stacked")):
    gbps = in_dram_throughput("and", banks, split) / 1e9
    print(f"  {label:16s} {banks:4d} banks  {gbps:8.1f} GB/s")

print("\nbandwidth-bound baselines (two operand reads + one result write):")
for preset in BANDWIDTH_PRESETS.values():
    print(
        f"  {preset.name:13s} {preset.bytes_per_second / 1e9:6.1f} GB/s channel -> "
        f"{baseline_throughput('and', preset) / 1e9:6.1f} GB/s of AND"
    )

skylake = BANDWIDTH_PRESETS["skylake_like"]
speedup = in_dram_throughput("and", 8, split) / baseline_throughput("and", skylake)
print(f"\n8-bank module vs the two-channel desktop baseline: {speedup:.1f}X")
