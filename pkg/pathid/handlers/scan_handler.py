"""
Phase scans with visibility extraction
"""
from loguru import logger

from pathid.app.config import settings
from pathid.core.errors import DomainError
from pathid.core.scan import (
    fit_sinusoid,
    run_scan,
    visibility_minmax,
    visibility_profile,
    visibility_with_errors,
)
from pathid.handlers.base import BaseHandler, CommandResult


class ScanHandler(BaseHandler):
    """1D or 2D phase sweep; 1D sweeps also report their visibility"""

    name = "scan"
    required_blocks = ("interferometer", "scan")

    def _setup(self):
        self.spec = self.config.to_spec()
        self.scanspec = self.config.to_scanspec()
        self.estimator = self.config.scan.estimator

    def process(self) -> CommandResult:
        result = run_scan(self.spec, self.scanspec)
        record = {
            "varying": result.labels,
            "points": int(result.rates.size),
            "integration_time": result.integration_time,
            "seed": result.seed_entropy,
        }
        if result.ndim == 1:
            record.update(self._fringe_summary(result))
        else:
            for axis, label in enumerate(result.labels):
                held, visibilities = visibility_profile(result, axis=axis)
                record[f"visibility_vs_{label}"] = {"phase": held, "visibility": visibilities}
        return CommandResult(self.name, record, table=result)

    def _fringe_summary(self, result) -> dict:
        phases = result.axes[0]
        summary = {"visibility_minmax": visibility_minmax(result)}
        if self.estimator == "fit":
            fit = fit_sinusoid(phases, result.rates, max_iterations=settings.FIT_MAX_ITERATIONS)
            summary["fit"] = fit.to_dict()
        if result.counts is not None:
            try:
                estimate = visibility_with_errors(phases, result.counts, estimator=self.estimator,
                                                  max_iterations=settings.FIT_MAX_ITERATIONS)
                summary["measured"] = estimate.to_dict()
            except DomainError as e:
                logger.warning(f"No visibility from counts: {e}")
                summary["measured"] = None
        return summary
