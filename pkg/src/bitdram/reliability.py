"""Analytical Monte-Carlo study of triple-row activation under process variation.

Each trial samples one "chip instance": the three cell capacitances, the
bitline capacitance, the supply voltage, the sense offset, and a charge
retention fraction per cell, every one an independent uniform multiplier in
[1-v, 1+v].  All eight input combinations are then evaluated through the
charge-sharing formula; the trial fails if any combination deviates with the
wrong sign or below the sense offset.

This is a closed-form circuit abstraction, not a transistor-level
simulation: it reproduces the qualitative failure onset and monotonicity in
v, but makes no claim about absolute failure percentages of any specific
process, which depend on amplifier dynamics and resistances outside this
model.  Reference failure rates from a published 55nm study are carried
alongside for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dram import charge_share_deviation

# Published Monte-Carlo failure percentages for a 55nm design, keyed by the
# per-component variation level. Reference only; see the module docstring.
REFERENCE_FAILURE_RATES = {
    0.00: 0.0000,
    0.05: 0.0000,
    0.10: 0.0029,
    0.15: 0.0601,
    0.20: 0.1636,
    0.25: 0.2619,
}

_COMBOS = np.array(
    [[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)], dtype=float
)
_K_OF_COMBO = _COMBOS.sum(axis=1).astype(int)
_MAJORITY = (_K_OF_COMBO >= 2)

_CHUNK = 16384  # trials evaluated per vectorized batch


@dataclass
class VariationModel:
    """Uniform +-v multipliers on every analog component of a majority activation.

    The default bitline-to-cell capacitance ratio of 2 is deliberately low:
    it gives the balanced cases a nominal deviation margin of Vdd/10, twice
    the default sense offset of 0.05 Vdd, which places the failure onset
    qualitatively near the published sweep (zero failures through +-5%,
    well under a percent at +-10%).  Real bitlines are longer; the lumped
    ratio absorbs the amplifier margins this abstraction does not model.
    The offset fraction is the main knob for matching a particular onset.
    """

    variation: float
    seed: int = 0
    cell_cap: float = 22e-15  # farads
    bitline_cap: float = 44e-15  # farads
    v_dd: float = 1.5  # volts
    offset_fraction: float = 0.05  # sense offset as a fraction of nominal Vdd

    def __post_init__(self) -> None:
        if not 0.0 <= self.variation <= 0.5:
            raise ValueError("variation must be in [0, 0.5]")


@dataclass
class MCResult:
    variation: float
    trials: int
    failures: int
    per_k_failures: dict[int, int] = field(default_factory=dict)
    seed: int = 0

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials


def monte_carlo(model: VariationModel, trials: int) -> MCResult:
    """Run `trials` sampled chip instances; deterministic for a given seed."""
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(model.seed)
    v = model.variation
    failures = 0
    per_k = {k: 0 for k in range(4)}
    done = 0
    while done < trials:
        n = min(_CHUNK, trials - done)
        mult = rng.uniform(1.0 - v, 1.0 + v, size=(n, 9))
        caps = mult[:, 0:3] * model.cell_cap  # (n, 3)
        c_bit = mult[:, 3] * model.bitline_cap  # (n,)
        v_dd = mult[:, 4] * model.v_dd  # (n,)
        offset = mult[:, 5] * (model.offset_fraction * model.v_dd)  # (n,)
        retention = np.minimum(mult[:, 6:9], 1.0)  # a cell cannot overcharge

        # charges per (trial, combo, cell): charged cells hold their
        # retained fraction, empty cells hold zero.
        q = _COMBOS[None, :, :] * retention[:, None, :]
        delta = charge_share_deviation(
            [q[:, :, i] for i in range(3)],
            [caps[:, i : i + 1] for i in range(3)],
            c_bit[:, None],
            v_dd[:, None],
        )  # (n, 8) volts
        wrong_sign = np.where(_MAJORITY[None, :], delta <= 0.0, delta >= 0.0)
        fail = wrong_sign | (np.abs(delta) < offset[:, None])

        failures += int(np.count_nonzero(fail.any(axis=1)))
        for k in range(4):
            cols = _K_OF_COMBO == k
            per_k[k] += int(np.count_nonzero(fail[:, cols].any(axis=1)))
        done += n
    return MCResult(
        variation=v,
        trials=trials,
        failures=failures,
        per_k_failures=per_k,
        seed=model.seed,
    )


def sweep(
    variations,
    trials: int,
    seed: int = 0,
    **model_kwargs,
) -> list[MCResult]:
    """Monte-Carlo results across variation levels, one independent run each."""
    return [
        monte_carlo(VariationModel(variation=v, seed=seed, **model_kwargs), trials)
        for v in variations
    ]


def worst_case_threshold(retention_floor: float = 1.0) -> float:
    """Largest capacitance variation the majority sign survives adversarially.

    With only the three cell capacitances varying in [1-v, 1+v], the binding
    case puts two charged cells (holding at least `retention_floor` of full
    charge) at minimum capacitance against one empty cell at maximum.  The
    sign stays correct while the charged capacitance exceeds half the total:
    2*f*(1-v) > (3-v)/2, i.e. v < (4f-3)/(4f-1).  A fully retained charge
    gives exactly 1/3; the wrong-direction case (one charged cell at maximum
    capacitance) binds at 1/3 as well, so the result never exceeds it.
    """
    if not 0.0 < retention_floor <= 1.0:
        raise ValueError("retention_floor must be in (0, 1]")
    f = retention_floor
    v_k2 = (4.0 * f - 3.0) / (4.0 * f - 1.0)
    return max(0.0, min(v_k2, 1.0 / 3.0))


def results_csv(results: list[MCResult]) -> str:
    """CSV with the sampled rates next to the published reference rates."""
    lines = ["variation,trials,failures,rate,reference_rate"]
    for r in results:
        ref = REFERENCE_FAILURE_RATES.get(round(r.variation, 2))
        ref_s = f"{ref:.4f}" if ref is not None else ""
        lines.append(
            f"{r.variation:.2f},{r.trials},{r.failures},{r.failure_rate:.6f},{ref_s}"
        )
    return "\n".join(lines) + "\n"
