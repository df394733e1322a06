"""Command-line entry point: verification, benchmarks, traces, and sweeps.

Subcommands:

  verify     run the functional oracle suite (exit 1 on any mismatch)
  bench X    emit a timing/energy JSON report for an op or a workload
  trace X    emit the command trace of one op as CSV
  mc         Monte-Carlo variation sweep as CSV
  table7     per-op summary table: latency, energy, throughput

Exit codes: 0 ok, 1 verification failure, 2 usage or configuration error.
Reports are reproducible: the same config and seed give byte-identical
output (no timestamps).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .addressing import D
from .controller import BbopKind, MemController, sequence_for
from .dram import C0_ROW, C1_ROW, FIRST_DATA_ROW, T0, T1, T2, Chip, ChipConfig, Wordline
from .errors import BitDramError
from .reliability import REFERENCE_FAILURE_RATES, VariationModel, monte_carlo, results_csv
from .runtime import HostRuntime, host_bitwise, tmr_encode, tmr_op
from .timing import (
    BANDWIDTH_PRESETS,
    DDR3_1600_888,
    SKYLAKE_LIKE,
    BandwidthPreset,
    EnergyConfig,
    TimingConfig,
    baseline_energy_per_kb,
    baseline_throughput,
    calibrate,
    energy_reduction,
    in_dram_throughput,
    sequence_energy_per_kb,
    sequence_latency,
)
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

OPS = [k.value for k in BbopKind]
WORKLOADS = ("bitmap", "scan", "sets")


class ConfigError(Exception):
    pass


@dataclasses.dataclass
class Env:
    chip_config: ChipConfig
    timing: TimingConfig
    energy: EnergyConfig
    bandwidth: BandwidthPreset
    banks: int
    seed: int


def _replace_from(obj, overrides: dict, what: str):
    fields = {f.name for f in dataclasses.fields(obj)}
    unknown = set(overrides) - fields
    if unknown:
        raise ConfigError(f"unknown {what} option(s): {', '.join(sorted(unknown))}")
    return dataclasses.replace(obj, **overrides)


def build_env(args) -> Env:
    raw = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
    unknown = set(raw) - {"chip", "timing", "energy", "bandwidth"}
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")

    chip = _replace_from(ChipConfig(), raw.get("chip", {}), "chip")
    if args.banks is not None:
        chip = dataclasses.replace(chip, banks=args.banks)
    if args.row_bits is not None:
        chip = dataclasses.replace(chip, row_bits=args.row_bits)
    timing = _replace_from(DDR3_1600_888, raw.get("timing", {}), "timing")
    energy = calibrate(
        _replace_from(EnergyConfig(), raw.get("energy", {}), "energy"), {"not": 1.6}
    )
    bw = raw.get("bandwidth", SKYLAKE_LIKE.name)
    if isinstance(bw, str):
        if bw not in BANDWIDTH_PRESETS:
            raise ConfigError(
                f"unknown bandwidth preset {bw!r}; have {sorted(BANDWIDTH_PRESETS)}"
            )
        bandwidth = BANDWIDTH_PRESETS[bw]
    elif isinstance(bw, dict):
        try:
            bandwidth = BandwidthPreset(**bw)
        except TypeError as exc:
            raise ConfigError(f"bad bandwidth spec: {exc}") from exc
    else:
        raise ConfigError("bandwidth must be a preset name or an object")
    return Env(
        chip_config=chip,
        timing=timing,
        energy=energy,
        bandwidth=bandwidth,
        banks=chip.banks,
        seed=args.seed,
    )


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# -- verify ---------------------------------------------------------------------


def _verify_checks(env: Env):
    rng = np.random.default_rng(env.seed)
    width = 4096
    cfg = dataclasses.replace(env.chip_config, row_bits=width, banks=max(2, min(env.banks, 4)))
    chip = Chip(cfg)
    ctl = MemController(chip)

    def check_bbops():
        for kind in BbopKind:
            for _ in range(50):
                x = rng.integers(0, 2, width, dtype=np.uint8)
                y = rng.integers(0, 2, width, dtype=np.uint8)
                chip.write_row(0, 0, FIRST_DATA_ROW + 0, x)
                chip.write_row(0, 0, FIRST_DATA_ROW + 1, y)
                ctl.exec_bbop(
                    kind,
                    D(2).at(0, 0),
                    D(0).at(0, 0),
                    None if kind is BbopKind.NOT else D(1).at(0, 0),
                )
                got = np.packbits(chip.read_row(0, 0, FIRST_DATA_ROW + 2))
                px, py = np.packbits(x), np.packbits(y)
                want = host_bitwise(kind, px, None if kind is BbopKind.NOT else py)
                if not np.array_equal(got, want):
                    return f"{kind.value} output differs from the bitwise oracle"
                if not np.array_equal(chip.read_row(0, 0, FIRST_DATA_ROW), x):
                    return f"{kind.value} clobbered its first source row"
                if kind is not BbopKind.NOT and not np.array_equal(
                    chip.read_row(0, 0, FIRST_DATA_ROW + 1), y
                ):
                    return f"{kind.value} clobbered its second source row"
        return None

    def check_majority():
        for a in (0, 1):
            for b in (0, 1):
                for c in (0, 1):
                    for row, v in zip((T0, T1, T2), (a, b, c)):
                        chip.write_row(0, 0, row, np.full(width, v, np.uint8))
                    chip.activate(0, 0, [Wordline(T0), Wordline(T1), Wordline(T2)])
                    chip.precharge(0)
                    got = int(chip.read_row(0, 0, T0)[0])
                    if got != (a & b) | (b & c) | (c & a):
                        return f"majority({a},{b},{c}) read back {got}"
        return None

    def check_control_rows():
        if chip.read_row(0, 0, C0_ROW).any():
            return "all-zeros control row is dirty"
        if not chip.read_row(0, 0, C1_ROW).all():
            return "all-ones control row is dirty"
        return None

    def check_tmr():
        for kind in BbopKind:
            for _ in range(20):
                x = rng.integers(0, 2, 512, dtype=np.uint8)
                y = rng.integers(0, 2, 512, dtype=np.uint8)
                lhs = tmr_op(
                    kind,
                    tmr_encode(x),
                    None if kind is BbopKind.NOT else tmr_encode(y),
                )
                want = np.unpackbits(
                    host_bitwise(
                        kind,
                        np.packbits(x),
                        None if kind is BbopKind.NOT else np.packbits(y),
                    )
                )[:512]
                if not (
                    np.array_equal(lhs.payload, want)
                    and np.array_equal(lhs.replica, want)
                ):
                    return f"redundant-copy code is not homomorphic over {kind.value}"
        return None

    def check_bitmap():
        rt = HostRuntime(Chip(cfg))
        wl = BitmapWorkload.random(u=2000, w=4, seed=env.seed)
        rep = bitmap_query(rt, wl, env.timing, env.bandwidth)
        want_every, want_males = bitmap_oracle(wl)
        if rep["op_tally"] != {"or": 24, "and": 7, "bitcount": 5}:
            return f"bitmap op tally {rep['op_tally']} != (24, 7, 5)"
        if rep["weekly_active_count"] != want_every:
            return "bitmap every-week count differs from scalar recomputation"
        if rep["male_weekly_counts"] != want_males:
            return "bitmap male counts differ from scalar recomputation"
        return None

    def check_scan():
        rt = HostRuntime(Chip(cfg))
        table = BitWeavingTable.random(r=4096, b=8, seed=env.seed)
        lo, hi = sorted(rng.integers(0, 256, 2).tolist())
        rep = bitweaving_scan(rt, table, lo, hi, env.timing, env.bandwidth)
        if rep["count"] != scan_oracle(table, lo, hi):
            return "scan count differs from the scalar filter"
        return None

    def check_sets():
        inst = SetInstance.random(domain=8192, m=5, elements=300, seed=env.seed)
        for kind in ("union", "intersection", "difference"):
            rep = set_op(HostRuntime(Chip(cfg)), kind, inst, env.timing, env.bandwidth)
            got = {int(i) + 1 for i in np.flatnonzero(rep["result_set_bits"])}
            if got != set_oracle(kind, inst):
                return f"set {kind} differs from the sorted-set oracle"
        return None

    return [
        ("bbop oracle equivalence", check_bbops),
        ("majority truth table", check_majority),
        ("control rows intact", check_control_rows),
        ("redundant-copy homomorphism", check_tmr),
        ("bitmap query", check_bitmap),
        ("columnar scan", check_scan),
        ("set operations", check_sets),
    ]


def cmd_verify(env: Env, args) -> int:
    failures = 0
    for name, check in _verify_checks(env):
        problem = check()
        if problem:
            print(f"FAIL {name}: {problem}")
            failures += 1
        else:
            print(f"ok   {name}")
    if failures:
        print(f"{failures} check(s) failed")
        return 1
    print("all checks passed")
    return 0


# -- bench ----------------------------------------------------------------------


def op_report(kind: str, env: Env) -> dict:
    lat = sequence_latency(kind, env.timing)
    perkb = sequence_energy_per_kb(kind, env.energy)
    row_bytes = env.chip_config.row_bytes
    engine = in_dram_throughput(kind, env.banks, env.timing, row_bytes)
    base = baseline_throughput(kind, env.bandwidth)
    return {
        "op": kind,
        "latency_ns": lat,
        "energy_nj_per_kb": round(perkb, 4),
        "ambit_gbps": round(engine / 1e9, 4),
        "baseline_gbps": round(base / 1e9, 4),
        "speedup": round(engine / base, 4),
        "energy_reduction": round(energy_reduction(kind, env.energy), 4),
    }


def _workload_report(env: Env, args) -> dict:
    chip = Chip(env.chip_config)
    rt = HostRuntime(chip)
    if args.target == "bitmap":
        u = args.users or 4 * env.chip_config.row_bits
        wl = BitmapWorkload.random(u=u, w=args.weeks, seed=env.seed)
        rep = bitmap_query(rt, wl, env.timing, env.bandwidth)
        rep["workload"] = "bitmap"
    elif args.target == "scan":
        table = BitWeavingTable.random(r=args.rows, b=args.bits, seed=env.seed)
        rng = np.random.default_rng(env.seed + 1)
        lo, hi = sorted(rng.integers(0, 1 << args.bits, 2).tolist())
        rep = bitweaving_scan(rt, table, lo, hi, env.timing, env.bandwidth)
        rep["oracle_count"] = scan_oracle(table, lo, hi)
        rep["workload"] = "scan"
    else:
        inst = SetInstance.random(
            domain=args.domain, m=args.sets, elements=args.elements, seed=env.seed
        )
        rep = set_op(rt, args.set_op, inst, env.timing, env.bandwidth)
        rep.pop("result_set_bits")
        rep["workload"] = "sets"
    rep["speedup"] = round(rep["baseline_ns"] / rep["sim_ns"], 4)
    rep["sim_ns"] = round(rep["sim_ns"], 3)
    rep["baseline_ns"] = round(rep["baseline_ns"], 3)
    return rep


def cmd_bench(env: Env, args) -> int:
    if args.target in OPS:
        payload = op_report(args.target, env)
    else:
        payload = _workload_report(env, args)
    _emit(_json(payload), args.out)
    return 0


# -- trace / mc / table ------------------------------------------------------------


def cmd_trace(env: Env, args) -> int:
    chip = Chip(env.chip_config)
    ctl = MemController(chip)
    kind = BbopKind(args.target)
    trace = ctl.exec_bbop(
        kind, D(2).at(0, 0), D(0).at(0, 0), None if kind is BbopKind.NOT else D(1).at(0, 0)
    )
    _emit(trace.to_csv(), args.out)
    return 0


def cmd_mc(env: Env, args) -> int:
    if args.variation is None:
        variations = sorted(REFERENCE_FAILURE_RATES)
    else:
        variations = [float(v) for v in args.variation.split(",")]
    results = [
        monte_carlo(VariationModel(variation=v, seed=env.seed), args.trials)
        for v in variations
    ]
    _emit(results_csv(results), args.out)
    return 0


def cmd_table(env: Env, args) -> int:
    rows = [op_report(k, env) for k in OPS]
    if args.out:
        _emit(_json(rows), args.out)
        return 0
    naive = dataclasses.replace(env.timing, mode="naive")
    print(
        f"{'op':6s} {'AAP/AP':>7s} {'naive ns':>9s} {'split ns':>9s} "
        f"{'nJ/KB':>7s} {'reduction':>9s} {'GB/s (x{:d})'.format(env.banks):>11s} "
        f"{'base GB/s':>9s} {'speedup':>8s}"
    )
    for rep in rows:
        steps = sequence_for(rep["op"])
        n_aap = sum(1 for s in steps if s.primitive == "aap")
        n_ap = len(steps) - n_aap
        print(
            f"{rep['op']:6s} {f'{n_aap}+{n_ap}':>7s} "
            f"{sequence_latency(rep['op'], naive):9.0f} {rep['latency_ns']:9.0f} "
            f"{rep['energy_nj_per_kb']:7.2f} {rep['energy_reduction']:8.1f}X "
            f"{rep['ambit_gbps']:11.1f} {rep['baseline_gbps']:9.1f} "
            f"{rep['speedup']:7.1f}X"
        )
    print(
        f"baseline channel: {env.bandwidth.name} "
        f"({env.bandwidth.bytes_per_second / 1e9:.1f} GB/s); "
        f"DDR3 energy {baseline_energy_per_kb('not', env.energy):.1f} nJ/KB (not) / "
        f"{baseline_energy_per_kb('and', env.energy):.1f} nJ/KB (two-input)"
    )
    return 0


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bitdram",
        description="Simulator for bulk bitwise operations executed inside DRAM",
    )
    parser.add_argument("--config", help="JSON file overriding chip/timing/energy/bandwidth")
    parser.add_argument("--banks", type=int, help="number of banks")
    parser.add_argument("--row-bits", type=int, dest="row_bits", help="bits per row")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="write output to this path instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("verify", help="run the functional oracle suite")

    bench = sub.add_parser("bench", help="timing/energy report for an op or workload")
    bench.add_argument("target", choices=OPS + list(WORKLOADS))
    bench.add_argument("--users", type=int, help="bitmap: number of users")
    bench.add_argument("--weeks", type=int, default=4, help="bitmap: number of weeks")
    bench.add_argument("--rows", type=int, default=1 << 14, help="scan: table rows")
    bench.add_argument("--bits", type=int, default=8, help="scan: bits per value")
    bench.add_argument("--sets", type=int, default=15, help="sets: number of input sets")
    bench.add_argument("--domain", type=int, default=1 << 19, help="sets: element domain")
    bench.add_argument("--elements", type=int, default=4096, help="sets: elements per set")
    bench.add_argument(
        "--set-op", choices=("union", "intersection", "difference"), default="union"
    )

    trace = sub.add_parser("trace", help="CSV command trace of one op")
    trace.add_argument("target", choices=OPS)

    mc = sub.add_parser("mc", help="Monte-Carlo process-variation sweep (CSV)")
    mc.add_argument(
        "--variation", help="comma-separated levels, e.g. 0.05,0.1 (default: sweep)"
    )
    mc.add_argument("--trials", type=int, default=20000)

    sub.add_parser("table7", help="summary table: latency, energy, throughput per op")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        env = build_env(args)
        handler = {
            "verify": cmd_verify,
            "bench": cmd_bench,
            "trace": cmd_trace,
            "mc": cmd_mc,
            "table7": cmd_table,
        }[args.command]
        return handler(env, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BitDramError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
