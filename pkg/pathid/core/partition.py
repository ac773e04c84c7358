"""
Effective sources, visibility/distinguishability duality and which-path attribution
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from pathid.core.errors import (
    SpecValidationError,
    UndefinedAttributionError,
    UndefinedVisibilityError,
)
from pathid.core.model import (
    InterferometerSpec,
    pair_rate,
    require_coherent,
    source_amplitudes,
    with_yields,
)

DUALITY_TOLERANCE = 1e-12
DEFAULT_PHASE_TOLERANCE = 1e-9


class Grouping(BaseModel):
    """Partition of source indices into named blocks"""
    model_config = ConfigDict(frozen=True)

    blocks: Tuple[Tuple[int, ...], ...] = Field(min_length=1)
    block_labels: Tuple[str, ...]

    @model_validator(mode="after")
    def _disjoint_blocks(self):
        if len(self.block_labels) != len(self.blocks):
            raise ValueError("one label is needed per block")
        seen = set()
        for block in self.blocks:
            if not block:
                raise ValueError("blocks must be non-empty")
            overlap = seen.intersection(block)
            if overlap or len(set(block)) != len(block):
                raise ValueError(f"blocks overlap on indices {sorted(overlap) or list(block)}")
            seen.update(block)
        return self

    @classmethod
    def from_labels(cls, spec: InterferometerSpec, blocks: Sequence[Sequence[str]],
                    block_labels: Optional[Sequence[str]] = None) -> "Grouping":
        """Build a grouping from source labels and check it covers ``spec``"""
        indices = tuple(tuple(spec.index_of(label) for label in block) for block in blocks)
        labels = tuple(block_labels) if block_labels else tuple(f"S{k + 1}" for k in range(len(blocks)))
        grouping = cls(blocks=indices, block_labels=labels)
        grouping.check_covers(spec)
        return grouping

    def check_covers(self, spec: InterferometerSpec) -> None:
        covered = sorted(i for block in self.blocks for i in block)
        if covered != list(range(spec.n_sources)):
            raise SpecValidationError(
                f"blocks cover {covered}, expected every index 0..{spec.n_sources - 1} exactly once",
                field="grouping.blocks",
            )


@dataclass(frozen=True)
class EffectiveSource:
    """A block of sources carrying one summed amplitude"""
    label: str
    amplitude: complex
    members: Tuple[int, ...] = ()


@dataclass(frozen=True)
class DualityRecord:
    """Visibility, distinguishability and the duality sum"""
    visibility: float
    distinguishability: float

    def __post_init__(self):
        for name, value in (("V", self.visibility), ("D", self.distinguishability)):
            if not 0.0 <= value <= 1.0 + DUALITY_TOLERANCE:
                raise SpecValidationError(f"must lie in [0, 1], got {value}", field=name)

    @classmethod
    def from_values(cls, visibility: float, distinguishability: float) -> "DualityRecord":
        return cls(float(visibility), float(distinguishability))

    @property
    def v_squared(self) -> float:
        return self.visibility ** 2

    @property
    def d_squared(self) -> float:
        return self.distinguishability ** 2

    @property
    def total(self) -> float:
        return self.v_squared + self.d_squared

    def to_dict(self) -> Dict[str, float]:
        return {
            "V": self.visibility,
            "D": self.distinguishability,
            "V2": self.v_squared,
            "D2": self.d_squared,
            "sum": self.total,
        }


@dataclass(frozen=True)
class AttributionResult:
    """Which-source probabilities from blocking measurements"""
    p_first: float
    p_last: float
    p_first_raw: float
    p_last_raw: float
    clamped: bool
    inputs: Tuple[float, float, float]

    @property
    def contradiction(self) -> bool:
        return self.p_first + self.p_last > 1.0

    def to_dict(self) -> dict:
        cc_tot, cc_last, cc_first = self.inputs
        return {
            "p_first": self.p_first,
            "p_last": self.p_last,
            "p_first_raw": self.p_first_raw,
            "p_last_raw": self.p_last_raw,
            "sum": self.p_first + self.p_last,
            "clamped": self.clamped,
            "contradiction": self.contradiction,
            "cc_tot": cc_tot,
            "cc_when_last_blocked": cc_last,
            "cc_when_first_blocked": cc_first,
        }


def effective_amplitude(spec: InterferometerSpec, block: Sequence[int]) -> complex:
    """Summed amplitude of the sources in ``block``"""
    block = list(block)
    require_coherent(spec, block)
    amplitudes = source_amplitudes(spec)
    return complex(np.sum(amplitudes[block])) if block else 0j


def effective_sources(spec: InterferometerSpec, grouping: Grouping) -> List[EffectiveSource]:
    grouping.check_covers(spec)
    return [
        EffectiveSource(label=label, amplitude=effective_amplitude(spec, block), members=tuple(block))
        for label, block in zip(grouping.block_labels, grouping.blocks)
    ]


def _intensities(a1: complex, a2: complex) -> Tuple[float, float]:
    i1, i2 = abs(a1) ** 2, abs(a2) ** 2
    if i1 + i2 == 0:
        raise UndefinedVisibilityError("both amplitudes are zero")
    return i1, i2


def two_source_visibility(a1: complex, a2: complex) -> float:
    """2|a1||a2| / (|a1|^2 + |a2|^2)"""
    i1, i2 = _intensities(a1, a2)
    return min(1.0, 2.0 * abs(a1) * abs(a2) / (i1 + i2))


def distinguishability(a1: complex, a2: complex) -> float:
    """| |a1|^2 - |a2|^2 | / (|a1|^2 + |a2|^2), order independent"""
    i1, i2 = _intensities(a1, a2)
    return abs(i1 - i2) / (i1 + i2)


def duality_record(a1: complex, a2: complex) -> DualityRecord:
    return DualityRecord(two_source_visibility(a1, a2), distinguishability(a1, a2))


def grouping_duality(spec: InterferometerSpec, grouping: Grouping) -> DualityRecord:
    """Duality record of a two-block coherent grouping"""
    if len(grouping.blocks) != 2:
        raise SpecValidationError(
            f"duality analysis needs exactly 2 blocks, got {len(grouping.blocks)}", field="grouping.blocks"
        )
    first, second = effective_sources(spec, grouping)
    record = duality_record(first.amplitude, second.amplitude)
    logger.debug(f"Duality {first.label}|{second.label}: V={record.visibility:.6g} D={record.distinguishability:.6g}")
    return record


def block_experiment(spec: InterferometerSpec, blocked: Sequence[int]) -> float:
    """Pair rate with the ``blocked`` sources switched off"""
    for index in blocked:
        if not 0 <= index < spec.n_sources:
            raise SpecValidationError(f"index {index} out of range", field="blocked")
    if not blocked:
        return pair_rate(spec)
    return pair_rate(with_yields(spec, {index: 0.0 for index in blocked}))


def attribution(cc_tot: float, cc_when_last_blocked: float, cc_when_first_blocked: float) -> AttributionResult:
    """
    Which-source probabilities of the first and last source

    The first source is credited with what disappears when it is blocked,
    the last one likewise: p_first = (CC_tot - CC_first_blocked) / CC_tot.
    Noisy counts can push a probability outside [0, 1]; those are clamped and
    the raw values kept.
    """
    counts = (float(cc_tot), float(cc_when_last_blocked), float(cc_when_first_blocked))
    if any(value < 0 for value in counts):
        raise SpecValidationError("counts must be non-negative", field="counts")
    if cc_tot == 0:
        raise UndefinedAttributionError("total counts are zero, attribution is undefined")

    p_first_raw = (cc_tot - cc_when_first_blocked) / cc_tot
    p_last_raw = (cc_tot - cc_when_last_blocked) / cc_tot
    p_first = float(np.clip(p_first_raw, 0.0, 1.0))
    p_last = float(np.clip(p_last_raw, 0.0, 1.0))
    clamped = p_first != p_first_raw or p_last != p_last_raw
    if clamped:
        logger.warning(f"Attribution clamped: raw p_first={p_first_raw:.6g}, p_last={p_last_raw:.6g}")
    return AttributionResult(p_first, p_last, float(p_first_raw), float(p_last_raw), clamped, counts)


def standard_groupings(spec: InterferometerSpec) -> Tuple[Grouping, Grouping]:
    """The two ways of pairing three sources: (12)(3) and (1)(23)"""
    if spec.n_sources != 3:
        raise SpecValidationError(f"needs exactly 3 sources, got {spec.n_sources}", field="interferometer.sources")
    return (
        Grouping(blocks=((0, 1), (2,)), block_labels=("S1", "S2")),
        Grouping(blocks=((0,), (1, 2)), block_labels=("S1'", "S2'")),
    )


def measured_attribution(spec: InterferometerSpec) -> AttributionResult:
    """Noiseless blocking counts of a three-source spec fed through ``attribution``"""
    if spec.n_sources != 3:
        raise SpecValidationError(f"needs exactly 3 sources, got {spec.n_sources}", field="interferometer.sources")
    return attribution(pair_rate(spec), block_experiment(spec, [2]), block_experiment(spec, [0]))


@dataclass
class PerspectiveReport:
    """One grouping's account of where the pairs come from"""
    grouping: Grouping
    sources: List[EffectiveSource]
    blocked_rates: List[float]
    zero_block: Optional[str] = None
    attributed_to: List[str] = field(default_factory=list)

    def to_dict(self, labels: Sequence[str]) -> dict:
        return {
            "blocks": {
                s.label: {
                    "members": [labels[i] for i in s.members],
                    "amplitude_re": s.amplitude.real,
                    "amplitude_im": s.amplitude.imag,
                    "amplitude_abs": abs(s.amplitude),
                    "rate_when_blocked": rate,
                }
                for s, rate in zip(self.sources, self.blocked_rates)
            },
            "zero_block": self.zero_block,
            "attributed_to": list(self.attributed_to),
        }


@dataclass
class GedankenReport:
    """Both black-box perspectives on one three-source configuration"""
    labels: List[str]
    total_rate: float
    perspectives: List[PerspectiveReport]
    attribution: Optional[AttributionResult]
    contradiction: bool

    def summary(self) -> List[str]:
        lines = [f"total pair rate: {self.total_rate:.12g} Hz"]
        for perspective in self.perspectives:
            names = "/".join(perspective.grouping.block_labels)
            if perspective.attributed_to:
                lines.append(
                    f"perspective {names}: block {perspective.zero_block} emits nothing, "
                    f"pairs attributed to {', '.join(perspective.attributed_to)}"
                )
            else:
                lines.append(f"perspective {names}: no block is dark, no full attribution")
        if self.contradiction:
            claims = " vs ".join(", ".join(p.attributed_to) for p in self.perspectives)
            lines.append(f"contradiction: incompatible attributions ({claims})")
        else:
            lines.append("no contradiction")
        return lines

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "total_rate": self.total_rate,
            "perspectives": [p.to_dict(self.labels) for p in self.perspectives],
            "attribution": self.attribution.to_dict() if self.attribution else None,
            "contradiction": self.contradiction,
            "summary": self.summary(),
        }


def _is_dark(spec: InterferometerSpec, block: Sequence[int], amplitude: complex, tolerance: float) -> bool:
    scale = float(np.sum(np.sqrt(spec.yields[list(block)])))
    if scale == 0:
        return True
    # balanced pairs leave |amplitude| ~ scale * phase error / 2 near cancellation
    return abs(amplitude) <= tolerance * scale


def gedanken_report(spec: InterferometerSpec, phase_tolerance: float = DEFAULT_PHASE_TOLERANCE) -> GedankenReport:
    """
    Evaluate the two black-box perspectives on a three-source interferometer

    Each grouping is asked which block is dark; if one is, the pairs are
    attributed to the sources of the other block. Two perspectives that
    attribute the pairs to disjoint sets of sources contradict each other.
    """
    require_coherent(spec)
    groupings = standard_groupings(spec)
    labels = spec.labels
    total = pair_rate(spec)

    perspectives = []
    for grouping in groupings:
        sources = effective_sources(spec, grouping)
        blocked_rates = [block_experiment(spec, s.members) for s in sources]
        report = PerspectiveReport(grouping=grouping, sources=sources, blocked_rates=blocked_rates)
        dark = [s for s in sources if _is_dark(spec, s.members, s.amplitude, phase_tolerance)]
        if total > 0 and len(dark) == 1:
            bright = [s for s in sources if s is not dark[0]][0]
            report.zero_block = dark[0].label
            report.attributed_to = [labels[i] for i in bright.members]
        perspectives.append(report)

    claims = [set(p.attributed_to) for p in perspectives]
    contradiction = all(claims) and not set.intersection(*claims)

    measured = measured_attribution(spec) if total > 0 else None
    report = GedankenReport(labels=labels, total_rate=total, perspectives=perspectives,
                            attribution=measured, contradiction=bool(contradiction))
    for line in report.summary():
        logger.debug(line)
    return report
