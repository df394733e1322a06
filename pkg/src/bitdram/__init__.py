"""bitdram: a functional + timing + energy simulator of a DRAM subsystem
that executes bulk bitwise operations inside the memory arrays.

The layers, bottom to top:

  dram        charge-level chip model: cells, sense amplifiers, single /
              double / triple row activation, dual-contact rows, in-DRAM copy
  addressing  the B/C/D row-address groups and the data-row interleaving
  controller  AAP/AP primitives and per-op command sequences
  trace       command traces, the single source for timing and energy
  timing      latency/energy models, throughput vs bandwidth-bound baselines
  reliability Monte-Carlo study of majority activation under variation
  runtime     bbop instructions, subarray-aware allocator, coherence, ECC
  workloads   bitmap index, bit-sliced scans, bitvector set operations
  cli         `bitdram` command-line front end
"""

from .addressing import B, C, D, RowAddress, decode, interleave, linear_index
from .controller import BbopKind, MemController, sequence_for
from .dram import (
    Chip,
    ChipConfig,
    SenseAmps,
    Subarray,
    Wordline,
    charge_share_deviation,
)
from .errors import (
    BitDramError,
    CapacityExhausted,
    ConstantOutOfRange,
    CorruptInput,
    CrossSubarray,
    Infeasible,
    InvalidActivate,
    OperandPlacement,
    OutOfRange,
    SameBank,
    SenseFailure,
    UnknownAddress,
    WidthMismatch,
)
from .reliability import MCResult, VariationModel, monte_carlo, worst_case_threshold
from .runtime import (
    BbopInstruction,
    BbopResult,
    BitvectorHandle,
    CoherenceCost,
    HostRuntime,
    RuntimeConfig,
    TmrCodeword,
    tmr_check,
    tmr_decode,
    tmr_encode,
    tmr_op,
)
from .timing import (
    BANDWIDTH_PRESETS,
    DDR3_1600_888,
    DDR3_1600_TABLE,
    GPU_LIKE,
    HMC_LIKE,
    SKYLAKE_LIKE,
    BandwidthPreset,
    EnergyConfig,
    TimingConfig,
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
from .trace import Command, CommandTrace, TraceEntry
from .workloads import (
    BitmapWorkload,
    BitWeavingTable,
    SetInstance,
    bitmap_oracle,
    bitmap_query,
    bitweaving_scan,
    scan_oracle,
    set_op,
    set_oracle,
)

__version__ = "0.1.0"
