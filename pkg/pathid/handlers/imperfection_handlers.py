"""
Imperfection, coherence-estimate and path-length commands
"""
import numpy as np

from pathid.core.imperfections import (
    alignment_visibility,
    calibrate_tilt,
    estimate_unmeasured_visibility,
    estimate_unmeasured_visibility_fock,
    imbalance_visibility,
    imbalance_visibility_curve,
    opld_feasible,
    overlap_longitudinal,
    overlap_tilt,
    overlap_tilt_propagated,
    overlap_transverse,
)
from pathid.core.errors import SpecValidationError
from pathid.handlers.base import BaseHandler, CommandResult


class ImperfectHandler(BaseHandler):
    """Visibility loss from alignment errors and yield imbalance"""

    name = "imperfect"
    required_blocks = ("imperfections",)

    def _setup(self):
        self.beam = self.config.to_beam()
        self.alignment = self.config.to_alignment()
        anchor_angle, anchor_overlap = self.config.tilt_anchor()
        self.calibration = calibrate_tilt(anchor_angle, anchor_overlap, self.beam)
        self.imperfections = self.config.imperfections

    def process(self) -> CommandResult:
        beam, alignment = self.beam, self.alignment
        record = {
            "beam": {
                "waist": beam.waist,
                "wavelength": beam.wavelength,
                "propagation_distance": beam.propagation_distance,
                "rayleigh_range": beam.rayleigh_range,
                "divergence": beam.divergence,
            },
            "tilt_calibration": self.calibration,
            "overlap": {
                "longitudinal": overlap_longitudinal(abs(alignment.longitudinal), beam),
                "transverse": overlap_transverse(abs(alignment.transverse), beam),
                "tilt": overlap_tilt(alignment.tilt, beam, self.calibration),
                "tilt_propagated": overlap_tilt_propagated(alignment.tilt, beam),
            },
            "combined": alignment_visibility(alignment, beam, self.calibration).to_dict(),
        }
        ratios = self.imperfections.yield_ratios
        if ratios is not None:
            held = self.imperfections.phase_fixed
            phase = np.pi if held is None else self.config.angle(held)
            imbalance = {"ratios": list(ratios), "phase_fixed": phase,
                         "visibility": imbalance_visibility(ratios, phase)}
            if self.imperfections.curve_steps >= 2:
                phases = np.linspace(0.0, 2 * np.pi, self.imperfections.curve_steps)
                imbalance["curve"] = {"phase": phases, "visibility": imbalance_visibility_curve(ratios, phases)}
            record["imbalance"] = imbalance
        return CommandResult(self.name, record)


class EstimateV13Handler(BaseHandler):
    """Outer-pair visibility predicted from the two measured neighbour pairs"""

    name = "estimate-v13"
    required_blocks = ("estimate",)

    def _setup(self):
        estimate = self.config.estimate
        self.v12, self.v23 = estimate.v12, estimate.v23
        if estimate.yields is not None:
            self.yields = tuple(estimate.yields)
        elif self.config.interferometer is not None:
            self.yields = tuple(float(y) for y in self.config.to_spec().yields)
        else:
            raise SpecValidationError("give estimate.yields or an interferometer block", field="estimate.yields")

    def process(self) -> CommandResult:
        closed = estimate_unmeasured_visibility(self.v12, self.v23, self.yields)
        record = {
            "v12": self.v12,
            "v23": self.v23,
            "yields": list(self.yields),
            "v13": closed,
            "v13_fock": estimate_unmeasured_visibility_fock(self.v12, self.v23, self.yields),
        }
        return CommandResult(self.name, record)


class OPLDHandler(BaseHandler):
    """Pump and down-converted path-length conditions per source pair"""

    name = "opld"
    required_blocks = ("opld",)

    def _setup(self):
        self.opld = self.config.to_opld()

    def process(self) -> CommandResult:
        return CommandResult(self.name, opld_feasible(self.opld).to_dict())
