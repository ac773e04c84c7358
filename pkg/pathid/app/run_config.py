"""
Run configuration: schema, parsing and conversion into domain objects
"""
import json
from enum import Enum
from math import pi, radians
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import yaml
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from pathid.app.config import settings
from pathid.core.errors import ConfigError, SpecValidationError
from pathid.core.imperfections import AlignmentError, BeamParams, OPLDPath, OPLDSpec
from pathid.core.model import InterferometerSpec, PhaseConvention, SourceSpec
from pathid.core.partition import Grouping
from pathid.core.scan import GridAxis, ScanSpec


class Units(str, Enum):
    RADIANS = "radians"
    DEGREES = "degrees"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class SourceConfig(_Block):
    label: str
    yield_rate: float = Field(ge=0.0, description="Hz with only this source active")
    phase: float = 0.0
    leak_angle: float = Field(default=0.0, ge=0.0)


class InterferometerConfig(_Block):
    sources: List[SourceConfig] = Field(min_length=1)
    phase_convention: PhaseConvention = PhaseConvention.ABSOLUTE

    @model_validator(mode="after")
    def _unique_labels(self):
        labels = [s.label for s in self.sources]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"duplicate source labels: {', '.join(duplicates)}")
        return self


class GroupingConfig(_Block):
    blocks: List[List[str]] = Field(min_length=1)
    labels: Optional[List[str]] = None


class GridConfig(_Block):
    start: float = 0.0
    stop: Optional[float] = Field(default=None, description="Defaults to one full period")
    steps: Optional[int] = Field(default=None, ge=2, description="Defaults to SCAN_GRID_POINTS")


class ScanConfig(_Block):
    varying: List[str] = Field(min_length=1, max_length=2)
    axes: List[GridConfig] = Field(default_factory=lambda: [GridConfig()], min_length=1, max_length=2)
    fixed_phases: Dict[str, float] = Field(default_factory=dict)
    integration_time: Optional[float] = Field(default=None, gt=0.0)
    rng_seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)
    estimator: str = Field(default="minmax", pattern="^(minmax|fit)$")


class BeamConfig(_Block):
    waist: Optional[float] = Field(default=None, gt=0.0)
    wavelength: Optional[float] = Field(default=None, gt=0.0)
    propagation_distance: Optional[float] = Field(default=None, gt=0.0)


class AlignmentConfig(_Block):
    longitudinal: float = 0.0
    transverse: float = 0.0
    tilt: float = Field(default=0.0, ge=0.0)


class ImperfectionsConfig(_Block):
    beam: BeamConfig = Field(default_factory=BeamConfig)
    alignment: AlignmentConfig = Field(default_factory=AlignmentConfig)
    tilt_anchor_angle: Optional[float] = Field(default=None, gt=0.0, description="Defaults to TILT_ANCHOR_ANGLE_DEG")
    tilt_anchor_overlap: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    yield_ratios: Optional[Tuple[float, float]] = None
    phase_fixed: Optional[float] = Field(default=None, description="Held first-pair phase, defaults to half a period")
    curve_steps: int = Field(default=0, ge=0, description="Points of a visibility-versus-phase curve, 0 for none")


class OPLDConfig(_Block):
    paths: List[OPLDPath] = Field(min_length=2)
    pump_coherence_length: float = Field(gt=0.0)
    spdc_coherence_length: float = Field(gt=0.0)


class EstimateConfig(_Block):
    v12: float
    v23: float
    yields: Optional[Tuple[float, float, float]] = Field(default=None, description="Defaults to the interferometer yields")


class CountsConfig(_Block):
    cc_tot: float = Field(ge=0.0)
    cc_when_last_blocked: float = Field(ge=0.0)
    cc_when_first_blocked: float = Field(ge=0.0)


class OutputConfig(_Block):
    path: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV


class RunConfig(_Block):
    """Everything one CLI invocation needs"""

    units: Units = Units.RADIANS
    interferometer: Optional[InterferometerConfig] = None
    grouping: Optional[GroupingConfig] = None
    blocked: List[str] = Field(default_factory=list)
    counts: Optional[CountsConfig] = None
    scan: Optional[ScanConfig] = None
    imperfections: Optional[ImperfectionsConfig] = None
    opld: Optional[OPLDConfig] = None
    estimate: Optional[EstimateConfig] = None
    phase_tolerance: Optional[float] = Field(default=None, gt=0.0)
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)

    @model_validator(mode="after")
    def _references_exist(self):
        known = {s.label for s in self.interferometer.sources} if self.interferometer else set()
        references = []
        if self.grouping:
            references += [("grouping.blocks", label) for block in self.grouping.blocks for label in block]
        references += [("blocked", label) for label in self.blocked]
        if self.scan:
            references += [("scan.varying", label) for label in self.scan.varying]
            references += [("scan.fixed_phases", label) for label in self.scan.fixed_phases]
        for field_name, label in references:
            if label not in known:
                raise ValueError(f"{field_name} refers to unknown source '{label}'")
        return self

    def angle(self, value: float) -> float:
        """Config angle in radians"""
        return radians(value) if self.units == Units.DEGREES else float(value)

    @property
    def full_period(self) -> float:
        return 360.0 if self.units == Units.DEGREES else 2 * pi

    def require(self, block: str, command: str):
        value = getattr(self, block)
        if value is None:
            raise SpecValidationError(f"'{command}' needs a '{block}' block", field=block)
        return value

    def to_spec(self) -> InterferometerSpec:
        interferometer = self.require("interferometer", "this command")
        try:
            return InterferometerSpec(
                sources=tuple(
                    SourceSpec(label=s.label, yield_rate=s.yield_rate, phase=self.angle(s.phase),
                               leak_angle=self.angle(s.leak_angle))
                    for s in interferometer.sources
                ),
                phase_convention=interferometer.phase_convention,
            )
        except ValidationError as e:
            raise as_validation_error(e, prefix="interferometer") from e

    def to_grouping(self, spec: InterferometerSpec) -> Grouping:
        grouping = self.require("grouping", "this command")
        return Grouping.from_labels(spec, grouping.blocks, grouping.labels)

    def blocked_indices(self, spec: InterferometerSpec) -> List[int]:
        return [spec.index_of(label) for label in self.blocked]

    def to_scanspec(self) -> ScanSpec:
        scan = self.require("scan", "scan")
        axes = tuple(
            GridAxis(
                start=self.angle(axis.start),
                stop=self.angle(axis.stop if axis.stop is not None else axis.start + self.full_period),
                steps=axis.steps or settings.SCAN_GRID_POINTS,
            )
            for axis in scan.axes
        )
        try:
            return ScanSpec(
                varying=tuple(scan.varying),
                axes=axes,
                fixed_phases={label: self.angle(value) for label, value in scan.fixed_phases.items()},
                integration_time=scan.integration_time,
                rng_seed=scan.rng_seed if scan.rng_seed is not None else self.seed,
            )
        except ValidationError as e:
            raise as_validation_error(e, prefix="scan") from e

    def to_beam(self) -> BeamParams:
        beam = self.require("imperfections", "imperfect").beam
        return BeamParams(
            waist=beam.waist or settings.BEAM_WAIST,
            wavelength=beam.wavelength or settings.BEAM_WAVELENGTH,
            propagation_distance=beam.propagation_distance or settings.PROPAGATION_DISTANCE,
        )

    def to_alignment(self) -> AlignmentError:
        alignment = self.require("imperfections", "imperfect").alignment
        try:
            return AlignmentError(longitudinal=alignment.longitudinal, transverse=alignment.transverse,
                                  tilt=self.angle(alignment.tilt))
        except ValidationError as e:
            raise as_validation_error(e, prefix="imperfections.alignment") from e

    def tilt_anchor(self) -> Tuple[float, float]:
        """(angle in radians, overlap) of the tilt calibration anchor"""
        imperfections = self.require("imperfections", "imperfect")
        if imperfections.tilt_anchor_angle is not None:
            angle = self.angle(imperfections.tilt_anchor_angle)
        else:
            angle = radians(settings.TILT_ANCHOR_ANGLE_DEG)
        return angle, imperfections.tilt_anchor_overlap or settings.TILT_ANCHOR_OVERLAP

    def to_opld(self) -> OPLDSpec:
        opld = self.require("opld", "opld")
        return OPLDSpec(paths=tuple(opld.paths), pump_coherence_length=opld.pump_coherence_length,
                        spdc_coherence_length=opld.spdc_coherence_length)

    def resolved_phase_tolerance(self) -> float:
        if self.phase_tolerance is None:
            return settings.PHASE_TOLERANCE
        return self.angle(self.phase_tolerance)


def as_validation_error(error: ValidationError, prefix: str = "") -> SpecValidationError:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ()))
    field = ".".join(part for part in (prefix, location) if part)
    return SpecValidationError(first.get("msg", str(error)), field=field or None)


def _load_document(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError("file not found", path=str(path))
    except OSError as e:
        raise ConfigError(str(e), path=str(path))

    if path.suffix.lower() in (".yaml", ".yml"):
        try:
            document = yaml.safe_load(text)
        except yaml.MarkedYAMLError as e:
            line = e.problem_mark.line + 1 if e.problem_mark else None
            raise ConfigError(e.problem or str(e), path=str(path), line=line)
    else:
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(e.msg, path=str(path), line=e.lineno)

    if not isinstance(document, dict):
        raise ConfigError("top level must be an object", path=str(path), line=1)
    return document


def parse_config(path) -> RunConfig:
    """
    Read and validate a run configuration

    Args:
        path: JSON file (YAML accepted for .yaml/.yml)

    Returns:
        Validated RunConfig with defaults applied

    Raises:
        ConfigError: unreadable or malformed file
        SpecValidationError: well-formed file violating the schema
    """
    path = Path(path)
    document = _load_document(path)
    try:
        config = RunConfig.model_validate(document)
    except ValidationError as e:
        raise as_validation_error(e) from e
    logger.debug(f"Loaded run config {path}")
    return config


def config_schema() -> dict:
    """Published JSON schema of run configurations"""
    return RunConfig.model_json_schema()
