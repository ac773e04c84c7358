"""
Visibility loss from misalignment, yield imbalance and path-length mismatch

Overlaps are field overlaps of two fundamental Gaussian modes; a mode overlap
O becomes a visibility V = O with the remaining D = sqrt(1 - O^2) counted as
distinguishability.
"""
from dataclasses import dataclass
from itertools import combinations
from math import pi
from typing import List, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from pathid.core.errors import InconsistentInputsError, SpecValidationError
from pathid.core.model import InterferometerSpec, SourceSpec, fock_state, with_phases
from pathid.core.partition import DualityRecord

COSINE_SLACK = 1e-12


class BeamParams(BaseModel):
    """Fundamental Gaussian mode at its focus"""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    waist: float = Field(default=50e-6, gt=0.0, description="1/e^2 intensity radius at focus (m)")
    wavelength: float = Field(default=810e-9, gt=0.0, description="Wavelength (m)")
    propagation_distance: float = Field(default=0.4, gt=0.0, description="Distance to the overlap plane (m)")

    @property
    def rayleigh_range(self) -> float:
        return pi * self.waist ** 2 / self.wavelength

    @property
    def divergence(self) -> float:
        """Far-field half angle in radians"""
        return self.wavelength / (pi * self.waist)


class AlignmentError(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    longitudinal: float = Field(default=0.0, description="Focus displacement along the beam (m)")
    transverse: float = Field(default=0.0, description="Lateral displacement (m)")
    tilt: float = Field(default=0.0, ge=0.0, lt=pi / 2, description="Angle between the modes (rad)")


class OPLDPath(BaseModel):
    """Optical path lengths belonging to one source"""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    label: str = ""
    pump: float = Field(ge=0.0, description="Pump laser to crystal (m)")
    spdc: float = Field(ge=0.0, description="Crystal to detector, down-converted photons (m)")
    signal: float = Field(ge=0.0, description="Crystal to detector, signal (m)")
    idler: float = Field(ge=0.0, description="Crystal to detector, idler (m)")


class OPLDSpec(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    paths: Tuple[OPLDPath, ...] = Field(min_length=2)
    pump_coherence_length: float = Field(gt=0.0)
    spdc_coherence_length: float = Field(gt=0.0)


@dataclass(frozen=True)
class PairCoherence:
    """Both path-length conditions for one pair of sources"""
    i: int
    j: int
    pump_ok: bool
    spdc_ok: bool
    pump_margin: float
    spdc_margin: float

    def to_dict(self, labels: Sequence[str]) -> dict:
        return {
            "pair": [labels[self.i], labels[self.j]],
            "pump_ok": self.pump_ok,
            "spdc_ok": self.spdc_ok,
            "pump_margin": self.pump_margin,
            "spdc_margin": self.spdc_margin,
        }


@dataclass(frozen=True)
class OPLDReport:
    labels: List[str]
    pairs: List[PairCoherence]

    @property
    def feasible(self) -> bool:
        return all(p.pump_ok and p.spdc_ok for p in self.pairs)

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "pairs": [p.to_dict(self.labels) for p in self.pairs]}


def _non_negative(value: float, name: str) -> float:
    if value < 0:
        raise SpecValidationError(f"must be non-negative, got {value}", field=name)
    return value


def overlap_transverse(dx: float, beam: BeamParams) -> float:
    """Overlap of two identical modes displaced sideways by ``dx``"""
    dx = _non_negative(dx, "transverse")
    return float(np.exp(-dx ** 2 / (2.0 * beam.waist ** 2)))


def overlap_longitudinal(dz: float, beam: BeamParams) -> float:
    """Overlap of two identical modes whose foci are ``dz`` apart"""
    dz = _non_negative(dz, "longitudinal")
    return float((1.0 + (dz / (2.0 * beam.rayleigh_range)) ** 2) ** -0.25)


def calibrate_tilt(anchor_angle: float, anchor_overlap: float, beam: BeamParams) -> float:
    """Constant k with exp(-k (anchor_angle / divergence)^2) == anchor_overlap"""
    if anchor_angle <= 0:
        raise SpecValidationError("anchor angle must be positive", field="anchor_angle")
    if not 0.0 < anchor_overlap < 1.0:
        raise SpecValidationError("anchor overlap must lie in (0, 1)", field="anchor_overlap")
    calibration = -np.log(anchor_overlap) / (anchor_angle / beam.divergence) ** 2
    logger.debug(f"Tilt calibration {calibration:.6g} for waist {beam.waist:g} m, wavelength {beam.wavelength:g} m")
    return float(calibration)


def overlap_tilt(theta: float, beam: BeamParams, calibration: float) -> float:
    """Overlap of two modes crossing at angle ``theta``"""
    theta = _non_negative(theta, "tilt")
    if calibration <= 0:
        raise SpecValidationError("calibration must be positive", field="calibration")
    return float(np.exp(-calibration * (theta / beam.divergence) ** 2))


def overlap_tilt_propagated(theta: float, beam: BeamParams) -> float:
    """Tilt seen as the lateral walk-off L*tan(theta) after the propagation distance"""
    theta = _non_negative(theta, "tilt")
    return overlap_transverse(beam.propagation_distance * np.tan(theta), beam)


def visibility_from_overlap(overlap: float) -> float:
    if not 0.0 <= overlap <= 1.0:
        raise SpecValidationError(f"overlap must lie in [0, 1], got {overlap}", field="overlap")
    return float(overlap)


def overlap_duality(overlap: float) -> DualityRecord:
    """V = O and D = sqrt(1 - O^2)"""
    visibility = visibility_from_overlap(overlap)
    return DualityRecord(visibility, float(np.sqrt(max(0.0, 1.0 - visibility ** 2))))


def alignment_visibility(error: AlignmentError, beam: BeamParams, calibration: float) -> DualityRecord:
    """Combined effect of the three alignment errors"""
    overlap = (
        overlap_longitudinal(abs(error.longitudinal), beam)
        * overlap_transverse(abs(error.transverse), beam)
        * overlap_tilt(error.tilt, beam, calibration)
    )
    return overlap_duality(overlap)


def _check_ratios(ratios: Sequence[float]) -> Tuple[float, float]:
    if len(ratios) != 2:
        raise SpecValidationError("expected (B/A, C/A)", field="yield_ratios")
    b_ratio, c_ratio = (float(r) for r in ratios)
    if b_ratio <= 0 or c_ratio <= 0:
        raise SpecValidationError("yield ratios must be positive", field="yield_ratios")
    return b_ratio, c_ratio


def imbalance_visibility_curve(ratios: Sequence[float], phases: Sequence[float]) -> np.ndarray:
    """Visibility of the third-source fringe versus the held first-pair phase"""
    b_ratio, c_ratio = _check_ratios(ratios)
    alpha = np.abs(np.exp(1j * np.asarray(phases, dtype=float)) + np.sqrt(b_ratio))
    c = np.sqrt(c_ratio)
    return 2.0 * alpha * c / (alpha ** 2 + c ** 2)


def imbalance_visibility(ratios: Sequence[float], phi_fixed: float) -> float:
    """
    Fringe visibility for unequal yields A, B, C

    Args:
        ratios: intensity ratios (B/A, C/A)
        phi_fixed: phase held between the first two sources
    """
    return float(imbalance_visibility_curve(ratios, [phi_fixed])[0])


def opld_feasible(spec: OPLDSpec) -> OPLDReport:
    """Check the pump and down-converted path-length conditions for every pair"""
    pairs = []
    for i, j in combinations(range(len(spec.paths)), 2):
        pi_, pj = spec.paths[i], spec.paths[j]
        pump_lhs = abs((pi_.pump + pi_.spdc) - (pj.pump + pj.spdc))
        spdc_lhs = abs((pj.signal - pj.idler) - (pi_.signal - pi_.idler))
        pump_margin = spec.pump_coherence_length - pump_lhs
        spdc_margin = spec.spdc_coherence_length - spdc_lhs
        pairs.append(PairCoherence(
            i=i, j=j,
            pump_ok=_within(pump_lhs, spec.pump_coherence_length),
            spdc_ok=_within(spdc_lhs, spec.spdc_coherence_length),
            pump_margin=float(pump_margin),
            spdc_margin=float(spdc_margin),
        ))
    labels = [p.label or f"source{k + 1}" for k, p in enumerate(spec.paths)]
    report = OPLDReport(labels=labels, pairs=pairs)
    for pair in pairs:
        if not (pair.pump_ok and pair.spdc_ok):
            logger.warning(f"Pair {labels[pair.i]}/{labels[pair.j]} outside coherence length "
                           f"(pump margin {pair.pump_margin:.3g} m, spdc margin {pair.spdc_margin:.3g} m)")
    return report


def _within(lhs: float, rhs: float) -> bool:
    # boundary is inclusive; absorb rounding from summing path lengths
    return lhs <= rhs or bool(np.isclose(lhs, rhs, rtol=1e-12, atol=0.0))


def _coherence_cosine(visibility: float, y_a: float, y_b: float, name: str) -> float:
    cosine = visibility * (y_a + y_b) / (2.0 * np.sqrt(y_a * y_b))
    if cosine > 1.0 + COSINE_SLACK:
        raise InconsistentInputsError(
            f"{name}={visibility} exceeds the balanced-yield limit {2 * np.sqrt(y_a * y_b) / (y_a + y_b):.6g}"
        )
    return float(min(cosine, 1.0))


def _check_estimate_inputs(v12: float, v23: float, yields: Sequence[float]) -> Tuple[float, float, float]:
    for name, value in (("v12", v12), ("v23", v23)):
        if not 0.0 < value <= 1.0:
            raise SpecValidationError(f"must lie in (0, 1], got {value}", field=name)
    if len(yields) != 3 or any(y <= 0 for y in yields):
        raise SpecValidationError("three positive yields are required", field="yields")
    return tuple(float(y) for y in yields)


def estimate_unmeasured_visibility(v12: float, v23: float, yields: Sequence[float]) -> float:
    """
    Visibility between the outer sources predicted from the two measured pairs

    The middle source is the coherence reference; each measured visibility
    fixes the coherence cosine of one outer source.
    """
    y1, y2, y3 = _check_estimate_inputs(v12, v23, yields)
    cos_e1 = _coherence_cosine(v12, y1, y2, "v12")
    cos_e3 = _coherence_cosine(v23, y2, y3, "v23")
    return float(2.0 * np.sqrt(y1 * y3) * cos_e1 * cos_e3 / (y1 + y3))


def estimate_unmeasured_visibility_fock(v12: float, v23: float, yields: Sequence[float]) -> float:
    """Same estimate, evaluated on the Fock state with the middle source removed"""
    y1, y2, y3 = _check_estimate_inputs(v12, v23, yields)
    e1 = float(np.arccos(_coherence_cosine(v12, y1, y2, "v12")))
    e3 = float(np.arccos(_coherence_cosine(v23, y2, y3, "v23")))
    spec = InterferometerSpec(sources=(
        SourceSpec(label="NL1", yield_rate=y1, leak_angle=e1),
        SourceSpec(label="NL2", yield_rate=0.0),
        SourceSpec(label="NL3", yield_rate=y3, leak_angle=e3),
    ))
    # both amplitudes are real, so the fringe extrema sit at 0 and pi
    rates = [fock_state(with_phases(spec, {2: phi})).norm_squared for phi in (0.0, pi)]
    return float((max(rates) - min(rates)) / (max(rates) + min(rates)))
