"""Exception types shared across the simulator."""


class BitDramError(Exception):
    """Base class for all simulator errors."""


class SenseFailure(BitDramError):
    """Charge-sharing deviation too small for the sense amplifiers to resolve."""


class InvalidActivate(BitDramError):
    """ACTIVATE issued against the command protocol (wrong bank/subarray state)."""


class WidthMismatch(BitDramError):
    """Bit vector length does not match the row width."""


class CrossSubarray(BitDramError):
    """In-subarray copy requested across subarray boundaries."""


class SameBank(BitDramError):
    """Pipelined serial-mode transfer requires two distinct banks."""


class UnknownAddress(BitDramError):
    """Row address outside the B/C/D groups of the subarray."""


class OutOfRange(BitDramError):
    """Linear data-row index beyond the chip's capacity."""


class OperandPlacement(BitDramError):
    """bbop operands are not co-located in one subarray and staging is disabled."""


class CapacityExhausted(BitDramError):
    """No free data row left in the subarray required by the affinity group."""


class CorruptInput(BitDramError):
    """Redundant codeword failed its replica check."""


class Infeasible(BitDramError):
    """Energy calibration targets are inconsistent with the command structure."""


class ConstantOutOfRange(BitDramError):
    """Scan predicate constants outside the value domain of the column."""
