"""
Pair rate of a configured interferometer
"""
from itertools import combinations

from pathid.core.model import (
    fock_state,
    pair_rate,
    pairwise_visibility,
    source_probabilities,
    total_amplitude,
)
from pathid.handlers.base import BaseHandler, CommandResult


class RateHandler(BaseHandler):
    """Pair rate, Fock amplitudes and pairwise visibilities"""

    name = "rate"
    required_blocks = ("interferometer",)

    def _setup(self):
        self.spec = self.config.to_spec()

    def process(self) -> CommandResult:
        spec = self.spec
        state = fock_state(spec)
        record = {
            "rate_hz": pair_rate(spec),
            "fock_norm_squared": state.norm_squared,
            "coherent": spec.is_coherent,
            "total_amplitude": total_amplitude(spec) if spec.is_coherent else None,
            "fock_amplitudes": {
                mode: amplitude
                for mode, amplitude in zip(["common"] + [f"leak_{label}" for label in spec.labels],
                                           state.amplitudes.tolist())
            },
            "source_shares": dict(zip(spec.labels, source_probabilities(spec).tolist())),
            "pairwise_visibility": {
                f"{spec.labels[i]}-{spec.labels[j]}": pairwise_visibility(spec, i, j)
                for i, j in combinations(range(spec.n_sources), 2)
            },
        }
        return CommandResult(self.name, record)
