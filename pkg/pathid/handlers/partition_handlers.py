"""
Grouping, blocking and attribution commands
"""
from pathid.core.partition import (
    attribution,
    block_experiment,
    effective_sources,
    gedanken_report,
    grouping_duality,
    measured_attribution,
)
from pathid.core.model import pair_rate
from pathid.handlers.base import BaseHandler, CommandResult


class DualityHandler(BaseHandler):
    """V, D and V^2 + D^2 for a two-block grouping"""

    name = "duality"
    required_blocks = ("interferometer", "grouping")

    def _setup(self):
        self.spec = self.config.to_spec()
        self.grouping = self.config.to_grouping(self.spec)

    def process(self) -> CommandResult:
        record = grouping_duality(self.spec, self.grouping).to_dict()
        record["effective_sources"] = {
            s.label: {"members": [self.spec.labels[i] for i in s.members], "amplitude": s.amplitude}
            for s in effective_sources(self.spec, self.grouping)
        }
        return CommandResult(self.name, record)


class BlockHandler(BaseHandler):
    """Rate with some sources switched off, plus attribution when it applies"""

    name = "block"
    required_blocks = ("interferometer",)

    def _setup(self):
        self.spec = self.config.to_spec()
        self.blocked = self.config.blocked_indices(self.spec)

    def process(self) -> CommandResult:
        record = {
            "blocked": [self.spec.labels[i] for i in self.blocked],
            "rate_hz": block_experiment(self.spec, self.blocked),
            "unblocked_rate_hz": pair_rate(self.spec),
        }
        counts = self.config.counts
        if counts is not None:
            record["attribution"] = attribution(
                counts.cc_tot, counts.cc_when_last_blocked, counts.cc_when_first_blocked
            ).to_dict()
        elif self.spec.n_sources == 3 and pair_rate(self.spec) > 0:
            record["attribution"] = measured_attribution(self.spec).to_dict()
        return CommandResult(self.name, record)


class GedankenHandler(BaseHandler):
    """Both black-box perspectives and whether they contradict"""

    name = "gedanken"
    required_blocks = ("interferometer",)

    def _setup(self):
        self.spec = self.config.to_spec()
        self.tolerance = self.config.resolved_phase_tolerance()

    def process(self) -> CommandResult:
        return CommandResult(self.name, gedanken_report(self.spec, self.tolerance).to_dict())
