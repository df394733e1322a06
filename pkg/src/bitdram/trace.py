"""Command traces: the single source for timing and energy accounting.

Every operation the simulator performs is recorded as an ordered list of
DRAM commands.  Latency and energy models consume these traces; they never
peek at simulator internals.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum


class Command(str, Enum):
    ACTIVATE = "ACTIVATE"
    PRECHARGE = "PRECHARGE"
    READ = "READ"
    WRITE = "WRITE"
    TRANSFER = "TRANSFER"


# Decoder paths for ACTIVATE entries. Reserved bitwise addresses go through a
# small dedicated decoder; control/data addresses through the regular one.
B_DECODER = "b_group"
CD_DECODER = "cd_group"

CSV_COLUMNS = (
    "seq_no",
    "command",
    "bank",
    "subarray",
    "address_label",
    "wordlines_raised",
    "decoder",
    "aap_boundary",
)


@dataclass
class TraceEntry:
    seq_no: int
    command: Command
    bank: int
    subarray: int
    address_label: str
    wordlines_raised: int
    decoder: str
    aap_boundary: bool
    # Unit tag for the timing model: "aap", "ap", or None for standalone
    # commands (e.g. serial-mode transfers). Not exported to CSV.
    primitive: str | None = None


class CommandTrace:
    """Ordered list of issued DRAM commands."""

    def __init__(self) -> None:
        self.entries: list[TraceEntry] = []

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def append(
        self,
        command: Command,
        bank: int,
        subarray: int,
        address_label: str = "",
        wordlines_raised: int = 0,
        decoder: str = "",
        aap_boundary: bool = False,
        primitive: str | None = None,
    ) -> TraceEntry:
        entry = TraceEntry(
            seq_no=len(self.entries),
            command=command,
            bank=bank,
            subarray=subarray,
            address_label=address_label,
            wordlines_raised=wordlines_raised,
            decoder=decoder,
            aap_boundary=aap_boundary,
            primitive=primitive,
        )
        self.entries.append(entry)
        return entry

    def counts(self) -> dict[str, int]:
        """Tally of entries by command name."""
        out: dict[str, int] = {}
        for e in self.entries:
            out[e.command.value] = out.get(e.command.value, 0) + 1
        return out

    @property
    def n_aap(self) -> int:
        """Number of complete ACTIVATE-ACTIVATE-PRECHARGE units."""
        return sum(
            1
            for e in self.entries
            if e.primitive == "aap" and e.command is Command.PRECHARGE
        )

    @property
    def n_ap(self) -> int:
        """Number of complete ACTIVATE-PRECHARGE units."""
        return sum(
            1
            for e in self.entries
            if e.primitive == "ap" and e.command is Command.PRECHARGE
        )

    def standalone(self, command: Command) -> int:
        """Entries of `command` outside any AAP/AP unit."""
        return sum(
            1 for e in self.entries if e.primitive is None and e.command is command
        )

    def output_rows(self) -> int:
        """AAP units whose copy target is a data-group row.

        Each such unit deposits one row of results, which is what per-KB
        energy normalization divides by.
        """
        n = 0
        for i, e in enumerate(self.entries):
            if (
                e.primitive == "aap"
                and e.command is Command.ACTIVATE
                and e.address_label.startswith("D")
                and i > 0
                and self.entries[i - 1].command is Command.ACTIVATE
            ):
                n += 1
        return n

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for e in self.entries:
            buf.write(
                f"{e.seq_no},{e.command.value},{e.bank},{e.subarray},"
                f"{e.address_label},{e.wordlines_raised},{e.decoder},"
                f"{int(e.aap_boundary)}\n"
            )
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())
