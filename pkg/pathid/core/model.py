"""
Photon-pair sources, emission amplitudes and pair rates

Sources are described by intensity yields (Hz); amplitudes are their square
roots. A source with a non-zero leak angle sends a fraction sin^2(e) of its
emission into a private mode that does not interfere with anything, the
remaining cos^2(e) goes into the common mode shared by all sources.
"""
from dataclasses import dataclass
from enum import Enum
from math import pi
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from pathid.core.errors import CoherenceError, SpecValidationError


class PhaseConvention(str, Enum):
    """How the per-source phase fields are read"""
    ABSOLUTE = "absolute_per_source"
    CUMULATIVE = "cumulative"


class SourceSpec(BaseModel):
    """One photon-pair source"""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    label: str = Field(min_length=1, description="Short identifier, unique per interferometer")
    yield_rate: float = Field(ge=0.0, description="Coincidence rate in Hz with only this source active")
    phase: float = Field(default=0.0, description="Phase in radians")
    leak_angle: float = Field(default=0.0, ge=0.0, le=pi / 2, description="Partial-coherence angle in radians")

    @property
    def common_fraction(self) -> float:
        return float(np.cos(self.leak_angle))


class InterferometerSpec(BaseModel):
    """Ordered sources emitting into identical modes"""
    model_config = ConfigDict(frozen=True)

    sources: Tuple[SourceSpec, ...] = Field(min_length=1)
    phase_convention: PhaseConvention = PhaseConvention.ABSOLUTE

    @model_validator(mode="after")
    def _unique_labels(self):
        labels = [s.label for s in self.sources]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"duplicate source labels: {', '.join(duplicates)}")
        return self

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    @property
    def labels(self) -> List[str]:
        return [s.label for s in self.sources]

    @property
    def yields(self) -> np.ndarray:
        return np.array([s.yield_rate for s in self.sources], dtype=float)

    @property
    def phases(self) -> np.ndarray:
        """Phase fields as stored, in the spec's own convention"""
        return np.array([s.phase for s in self.sources], dtype=float)

    @property
    def leak_angles(self) -> np.ndarray:
        return np.array([s.leak_angle for s in self.sources], dtype=float)

    @property
    def is_coherent(self) -> bool:
        return bool(np.all(self.leak_angles == 0.0))

    def index_of(self, label: str) -> int:
        """Index of the source with ``label``"""
        for index, source in enumerate(self.sources):
            if source.label == label:
                return index
        raise SpecValidationError(f"unknown source label '{label}'", field="label")

    def accumulated_phases(self) -> np.ndarray:
        """Phase actually carried by each source's amplitude"""
        return _accumulate(self.phases, self.phase_convention)


@dataclass(frozen=True)
class FockVector:
    """Single-pair state over modes (common, leak_1, ..., leak_N)"""
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.ndim != 1 or self.amplitudes.size < 2:
            raise SpecValidationError("a Fock vector needs a common mode and at least one leak mode",
                                      field="amplitudes")

    @property
    def common(self) -> complex:
        return complex(self.amplitudes[0])

    @property
    def leaks(self) -> np.ndarray:
        return self.amplitudes[1:]

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def _accumulate(phases: np.ndarray, convention: PhaseConvention, axis: int = 0) -> np.ndarray:
    if convention == PhaseConvention.CUMULATIVE:
        return np.cumsum(phases, axis=axis)
    return phases


def modulus_and_argument(value: complex) -> Tuple[float, float]:
    """Polar form; the argument of an exact zero is 0"""
    if value == 0:
        return 0.0, 0.0
    return abs(value), float(np.angle(value))


def source_amplitude(source: SourceSpec) -> complex:
    """sqrt(yield) * exp(i*phase) for a source taken on its own"""
    return complex(np.sqrt(source.yield_rate) * np.exp(1j * source.phase))


def source_amplitudes(spec: InterferometerSpec) -> np.ndarray:
    """Full amplitudes of every source with the spec's phase convention applied"""
    return np.sqrt(spec.yields) * np.exp(1j * spec.accumulated_phases())


def require_coherent(spec: InterferometerSpec, indices: Optional[Iterable[int]] = None) -> None:
    """Raise CoherenceError if any selected source has a non-zero leak angle"""
    selected = range(spec.n_sources) if indices is None else indices
    leaky = [spec.sources[i].label for i in selected if spec.sources[i].leak_angle != 0.0]
    if leaky:
        raise CoherenceError(
            f"sources {', '.join(leaky)} are partially coherent; a single complex amplitude is undefined"
        )


def total_amplitude(spec: InterferometerSpec) -> complex:
    """Sum of all source amplitudes (fully coherent specs only)"""
    require_coherent(spec)
    return complex(np.sum(source_amplitudes(spec)))


def fock_state(spec: InterferometerSpec) -> FockVector:
    """Common-mode plus per-source leak-mode amplitudes"""
    amplitudes = source_amplitudes(spec)
    leak = spec.leak_angles
    vector = np.zeros(spec.n_sources + 1, dtype=complex)
    vector[0] = np.sum(amplitudes * np.cos(leak))
    vector[1:] = amplitudes * np.sin(leak)
    return FockVector(vector)


def pair_rate(spec: InterferometerSpec) -> float:
    """Emitted pair rate in Hz; a lone source gives exactly its yield"""
    amplitudes = source_amplitudes(spec)
    leak = spec.leak_angles
    common = np.sum(amplitudes * np.cos(leak))
    return float(abs(common) ** 2 + np.sum(spec.yields * np.sin(leak) ** 2))


def pair_rate_grid(spec: InterferometerSpec, slots: Sequence[int],
                   phase_grids: Sequence[np.ndarray]) -> np.ndarray:
    """
    Vectorised pair rate with some phase fields replaced by arrays

    Args:
        spec: interferometer; phase fields are read in its own convention
        slots: source indices whose phase field is varied
        phase_grids: one array per slot, broadcast against each other

    Returns:
        Rates with the broadcast shape of ``phase_grids``
    """
    if len(slots) != len(phase_grids):
        raise SpecValidationError("one phase grid is needed per varied slot", field="slots")
    if not slots:
        return np.asarray(pair_rate(spec))
    grids = np.broadcast_arrays(*[np.asarray(g, dtype=float) for g in phase_grids])
    shape = grids[0].shape
    phases = np.empty((spec.n_sources,) + shape, dtype=float)
    for index, value in enumerate(spec.phases):
        phases[index] = value
    for slot, grid in zip(slots, grids):
        if not 0 <= slot < spec.n_sources:
            raise SpecValidationError(f"slot {slot} out of range", field="slots")
        phases[slot] = grid
    accumulated = _accumulate(phases, spec.phase_convention, axis=0)

    expand = (slice(None),) + (np.newaxis,) * len(shape)
    leak = spec.leak_angles[expand]
    weights = (np.sqrt(spec.yields)[expand]) * np.cos(leak)
    common = np.sum(weights * np.exp(1j * accumulated), axis=0)
    incoherent = float(np.sum(spec.yields * np.sin(spec.leak_angles) ** 2))
    return np.abs(common) ** 2 + incoherent


def pairwise_rate(spec: InterferometerSpec, i: int, j: int, phi: float) -> float:
    """Rate of the two-source subsystem (i, j) at relative phase ``phi``"""
    _check_pair(spec, i, j)
    yi, yj = spec.sources[i].yield_rate, spec.sources[j].yield_rate
    coherence = np.cos(spec.sources[i].leak_angle) * np.cos(spec.sources[j].leak_angle)
    return float(yi + yj + 2.0 * np.sqrt(yi * yj) * coherence * np.cos(phi))


def pairwise_visibility(spec: InterferometerSpec, i: int, j: int) -> float:
    """Fringe visibility of the two-source subsystem (i, j)"""
    _check_pair(spec, i, j)
    yi, yj = spec.sources[i].yield_rate, spec.sources[j].yield_rate
    if yi + yj == 0:
        return 0.0
    coherence = np.cos(spec.sources[i].leak_angle) * np.cos(spec.sources[j].leak_angle)
    return float(2.0 * np.sqrt(yi * yj) * coherence / (yi + yj))


def _check_pair(spec: InterferometerSpec, i: int, j: int) -> None:
    for name, index in (("i", i), ("j", j)):
        if not 0 <= index < spec.n_sources:
            raise SpecValidationError(f"index {index} out of range for {spec.n_sources} sources", field=name)
    if i == j:
        raise SpecValidationError("pairwise quantities need two distinct sources", field="j")


def source_probabilities(spec: InterferometerSpec) -> np.ndarray:
    """Share of each source in the summed single-source yields"""
    yields = spec.yields
    total = yields.sum()
    if total == 0:
        return np.zeros_like(yields)
    return yields / total


def convert_phases(spec: InterferometerSpec, target: PhaseConvention) -> InterferometerSpec:
    """Rewrite the phase fields in ``target`` convention, same physics"""
    target = PhaseConvention(target)
    if target == spec.phase_convention:
        return spec
    accumulated = spec.accumulated_phases()
    if target == PhaseConvention.ABSOLUTE:
        new_phases = accumulated
    else:
        new_phases = np.diff(accumulated, prepend=0.0)
    sources = tuple(s.model_copy(update={"phase": float(p)}) for s, p in zip(spec.sources, new_phases))
    return InterferometerSpec(sources=sources, phase_convention=target)


def with_phases(spec: InterferometerSpec, phases: Mapping[int, float]) -> InterferometerSpec:
    """Copy of ``spec`` with some phase fields replaced"""
    return _replace(spec, "phase", phases)


def with_yields(spec: InterferometerSpec, yields: Mapping[int, float]) -> InterferometerSpec:
    """Copy of ``spec`` with some yields replaced"""
    return _replace(spec, "yield_rate", yields)


def _replace(spec: InterferometerSpec, field: str, values: Mapping[int, float]) -> InterferometerSpec:
    sources = list(spec.sources)
    for index, value in values.items():
        if not 0 <= index < spec.n_sources:
            raise SpecValidationError(f"index {index} out of range", field=field)
        sources[index] = SourceSpec(**{**sources[index].model_dump(), field: float(value)})
    return spec.model_copy(update={"sources": tuple(sources)})


def balanced_spec(phases: Sequence[float], yield_rate: float = 1.0,
                  labels: Optional[Sequence[str]] = None) -> InterferometerSpec:
    """Equal-yield, fully coherent spec with absolute phases"""
    labels = list(labels) if labels is not None else [f"NL{k + 1}" for k in range(len(phases))]
    return InterferometerSpec(sources=tuple(
        SourceSpec(label=label, yield_rate=yield_rate, phase=float(phase))
        for label, phase in zip(labels, phases)
    ))
