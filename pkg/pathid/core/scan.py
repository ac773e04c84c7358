"""
Phase scans, visibility estimators, fringe fitting and Poissonian counting
"""
import warnings
from dataclasses import dataclass, field, replace
from math import pi
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import OptimizeWarning, curve_fit

from pathid.core.errors import SpecValidationError, UndefinedVisibilityError
from pathid.core.model import InterferometerSpec, pair_rate_grid, with_phases
from pathid.utils.timing import timer

DEFAULT_GRID_POINTS = 73
DEFAULT_FIT_ITERATIONS = 2000
SEED_LIMIT = 2 ** 64


class GridAxis(BaseModel):
    """Inclusive, evenly spaced phase grid"""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    start: float = 0.0
    stop: float = 2 * pi
    steps: int = Field(default=DEFAULT_GRID_POINTS, ge=2)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


class ScanSpec(BaseModel):
    """Which phase slots to sweep and how"""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    varying: Tuple[str, ...] = Field(min_length=1, max_length=2, description="Labels of the swept sources")
    axes: Tuple[GridAxis, ...] = Field(default=(GridAxis(),), min_length=1, max_length=2)
    fixed_phases: Dict[str, float] = Field(default_factory=dict)
    integration_time: Optional[float] = Field(default=None, gt=0.0, description="Seconds per point")
    rng_seed: Optional[int] = Field(default=None, ge=0, lt=SEED_LIMIT)

    @model_validator(mode="after")
    def _axes_match(self):
        if len(set(self.varying)) != len(self.varying):
            raise ValueError("varying phases must be distinct")
        if len(self.axes) not in (1, len(self.varying)):
            raise ValueError(f"{len(self.varying)} varying phases but {len(self.axes)} axes")
        clash = set(self.varying).intersection(self.fixed_phases)
        if clash:
            raise ValueError(f"phases {sorted(clash)} are both varied and fixed")
        return self

    def grid_axes(self) -> List[GridAxis]:
        if len(self.axes) == len(self.varying):
            return list(self.axes)
        return [self.axes[0]] * len(self.varying)


@dataclass
class ScanResult:
    """Sampled rates (and optionally counts) on a 1D or 2D phase grid"""
    labels: List[str]
    axes: List[np.ndarray]
    rates: np.ndarray
    counts: Optional[np.ndarray] = None
    sigma: Optional[np.ndarray] = None
    integration_time: Optional[float] = None
    seed_entropy: Optional[int] = None

    def __post_init__(self):
        expected = tuple(len(axis) for axis in self.axes)
        if self.rates.shape != expected:
            raise SpecValidationError(f"rates shape {self.rates.shape} does not match grid {expected}",
                                      field="rates")

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def series(self, use_counts: bool = False) -> np.ndarray:
        if use_counts:
            if self.counts is None:
                raise SpecValidationError("scan was run without counting", field="counts")
            return self.counts
        return self.rates

    def cross_section(self, axis: int, index: int) -> "ScanResult":
        """1D slice of a 2D scan with ``axis`` held at grid point ``index``"""
        if self.ndim != 2:
            raise SpecValidationError("cross sections need a 2D scan", field="axes")
        keep = 1 - axis
        take = (lambda a: a[index, :]) if axis == 0 else (lambda a: a[:, index])
        return ScanResult(
            labels=[self.labels[keep]],
            axes=[self.axes[keep]],
            rates=take(self.rates),
            counts=None if self.counts is None else take(self.counts),
            sigma=None if self.sigma is None else take(self.sigma),
            integration_time=self.integration_time,
        )

    def rows(self) -> Iterator[Tuple[float, Optional[float], float, Optional[int], Optional[float]]]:
        """(phase_a, phase_c, rate, counts, sigma) per grid point in C order"""
        grids = np.meshgrid(*self.axes, indexing="ij")
        flat_a = grids[0].ravel()
        flat_c = grids[1].ravel() if self.ndim == 2 else [None] * flat_a.size
        rates = self.rates.ravel()
        counts = self.counts.ravel() if self.counts is not None else [None] * rates.size
        sigma = self.sigma.ravel() if self.sigma is not None else [None] * rates.size
        for a, c, r, n, s in zip(flat_a, flat_c, rates, counts, sigma):
            yield (float(a), None if c is None else float(c), float(r),
                   None if n is None else int(n), None if s is None else float(s))


@dataclass
class FringeFit:
    """Result of fitting offset * (1 + V cos(phi - phase0))"""
    offset: float
    amplitude: float
    phase0: float
    visibility: float
    residual_rms: float
    converged: bool
    degenerate: bool = False
    visibility_sigma: float = float("nan")
    max_iterations: int = DEFAULT_FIT_ITERATIONS

    def to_dict(self) -> dict:
        return {
            "offset": self.offset,
            "amplitude": self.amplitude,
            "phase0": self.phase0,
            "visibility": self.visibility,
            "visibility_sigma": self.visibility_sigma,
            "residual_rms": self.residual_rms,
            "converged": self.converged,
            "degenerate": self.degenerate,
        }


@dataclass
class VisibilityEstimate:
    """Visibility with first-order Poissonian uncertainty"""
    visibility: float
    sigma: float
    estimator: str
    one_sided: bool = False
    sigma_lower: Optional[float] = None
    fit: Optional[FringeFit] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        data = {
            "visibility": self.visibility,
            "sigma": self.sigma,
            "estimator": self.estimator,
            "one_sided": self.one_sided,
            "sigma_lower": self.sigma_lower,
        }
        if self.fit is not None:
            data["fit"] = self.fit.to_dict()
        return data


def _prepare(spec: InterferometerSpec, scanspec: ScanSpec) -> Tuple[InterferometerSpec, List[int]]:
    fixed = {spec.index_of(label): value for label, value in scanspec.fixed_phases.items()}
    slots = [spec.index_of(label) for label in scanspec.varying]
    return with_phases(spec, fixed), slots


def scan_1d(spec: InterferometerSpec, scanspec: ScanSpec) -> ScanResult:
    """Sweep one phase slot"""
    if len(scanspec.varying) != 1:
        raise SpecValidationError(f"1D scan needs one varying phase, got {len(scanspec.varying)}",
                                  field="scan.varying")
    base, slots = _prepare(spec, scanspec)
    grid = scanspec.grid_axes()[0].values()
    result = ScanResult(labels=list(scanspec.varying), axes=[grid],
                        rates=pair_rate_grid(base, slots, [grid]))
    logger.debug(f"1D scan over {scanspec.varying[0]}: {grid.size} points")
    return _maybe_count(result, scanspec)


def scan_2d(spec: InterferometerSpec, scanspec: ScanSpec) -> ScanResult:
    """Sweep two phase slots on the full product grid"""
    if len(scanspec.varying) != 2:
        raise SpecValidationError(f"2D scan needs two varying phases, got {len(scanspec.varying)}",
                                  field="scan.varying")
    base, slots = _prepare(spec, scanspec)
    first, second = (axis.values() for axis in scanspec.grid_axes())
    with timer(f"2D scan {first.size}x{second.size}"):
        grid_a, grid_c = np.meshgrid(first, second, indexing="ij")
        rates = pair_rate_grid(base, slots, [grid_a, grid_c])
    result = ScanResult(labels=list(scanspec.varying), axes=[first, second], rates=rates)
    return _maybe_count(result, scanspec)


def run_scan(spec: InterferometerSpec, scanspec: ScanSpec) -> ScanResult:
    return scan_1d(spec, scanspec) if len(scanspec.varying) == 1 else scan_2d(spec, scanspec)


def _maybe_count(result: ScanResult, scanspec: ScanSpec) -> ScanResult:
    if scanspec.integration_time is None:
        return result
    return count_scan(result, scanspec.integration_time, scanspec.rng_seed)


def _point_rng(seed: int, point_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point_index,)))


def monte_carlo_counts(rate: float, integration_time: float, seed: int,
                       point_index: int = 0, size: Optional[int] = None) -> Union[int, np.ndarray]:
    """
    Poissonian coincidence counts with mean rate * integration_time

    The generator is derived from (seed, point_index) alone, so a grid point
    draws the same counts whatever order the grid is evaluated in.
    """
    if rate < 0:
        raise SpecValidationError(f"rate must be non-negative, got {rate}", field="rate")
    if integration_time <= 0:
        raise SpecValidationError(f"integration time must be positive, got {integration_time}",
                                  field="integration_time")
    draws = _point_rng(seed, point_index).poisson(rate * integration_time, size=size)
    return int(draws) if size is None else draws.astype(np.int64)


def count_scan(result: ScanResult, integration_time: float, seed: Optional[int] = None) -> ScanResult:
    """Attach Poissonian counts and sigma = sqrt(counts) to a rate scan"""
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
        logger.info(f"No rng seed given, drew seed {seed}")
    flat = result.rates.ravel()
    counts = np.array([
        monte_carlo_counts(rate, integration_time, seed, point_index=index)
        for index, rate in enumerate(flat)
    ], dtype=np.int64).reshape(result.rates.shape)
    return replace(result, counts=counts, sigma=np.sqrt(counts.astype(float)),
                   integration_time=integration_time, seed_entropy=int(seed))


def analytic_visibility(phi_fixed: float) -> float:
    """Balanced three-source fringe visibility with one phase held at ``phi_fixed``"""
    alpha = 2.0 * abs(np.cos(phi_fixed / 2.0))
    return float(2.0 * alpha / (alpha ** 2 + 1.0))


def _minmax(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise SpecValidationError("visibility needs at least 2 samples", field="series")
    high, low = float(values.max()), float(values.min())
    if high + low <= 0:
        raise UndefinedVisibilityError("series is identically zero")
    return (high - low) / (high + low)


def visibility_minmax(result: Union[ScanResult, Sequence[float], np.ndarray], use_counts: bool = False) -> float:
    """(max - min) / (max + min) over the sampled points"""
    values = result.series(use_counts) if isinstance(result, ScanResult) else result
    return _minmax(values)


def visibility_profile(result: ScanResult, axis: int = 0,
                       use_counts: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """
    Visibility versus a held phase

    For each grid value along ``axis`` the other phase is treated as the
    scanned one and its min/max visibility is taken.

    Returns:
        (held phase values, visibilities)
    """
    if result.ndim != 2:
        raise SpecValidationError("visibility profiles need a 2D scan", field="axes")
    values = np.moveaxis(result.series(use_counts), axis, 0)
    return result.axes[axis], np.array([_minmax(row) for row in values])


def _fringe(phi, offset, visibility, phase0):
    return offset * (1.0 + visibility * np.cos(phi - phase0))


def _wrap(angle: float) -> float:
    return float(np.angle(np.exp(1j * angle))) + 0.0


def fit_sinusoid(phases: Sequence[float], values: Sequence[float], sigma: Optional[Sequence[float]] = None,
                 max_iterations: int = DEFAULT_FIT_ITERATIONS) -> FringeFit:
    """
    Weighted least-squares fringe fit

    Args:
        phases: sample phases in radians, at least 4 spanning half a period
        values: counts or rates
        sigma: per-point uncertainties; zero entries are floored at 1
        max_iterations: function evaluation budget for the optimiser

    Returns:
        FringeFit; ``converged`` is False when the budget ran out, in which
        case the initial estimates are returned
    """
    phi = np.asarray(phases, dtype=float)
    y = np.asarray(values, dtype=float)
    if phi.size != y.size:
        raise SpecValidationError("phases and values differ in length", field="values")
    if phi.size < 4:
        raise SpecValidationError(f"need at least 4 points, got {phi.size}", field="values")
    if np.ptp(phi) < pi:
        raise SpecValidationError("samples must span at least half a period", field="phases")
    weights = None
    if sigma is not None:
        weights = np.maximum(np.asarray(sigma, dtype=float), 1.0)

    offset0 = float(np.mean(y))
    amplitude0 = float(np.ptp(y)) / 2.0
    if amplitude0 <= 1e-12 * max(abs(offset0), 1.0):
        logger.debug("Flat series, reporting a degenerate fit")
        return FringeFit(offset=offset0, amplitude=0.0, phase0=0.0, visibility=0.0,
                         residual_rms=float(np.sqrt(np.mean((y - offset0) ** 2))),
                         converged=True, degenerate=True, visibility_sigma=0.0)
    # first Fourier component fixes the fringe position
    phase0 = float(np.angle(np.sum(y * np.exp(1j * phi))))
    p0 = [offset0, amplitude0 / offset0 if offset0 else 0.0, phase0]

    converged = True
    params, covariance = np.array(p0), np.full((3, 3), np.inf)
    with timer("fringe fit"), warnings.catch_warnings():
        warnings.simplefilter("ignore", OptimizeWarning)
        try:
            params, covariance = curve_fit(_fringe, phi, y, p0=p0, sigma=weights,
                                           absolute_sigma=weights is not None, maxfev=max_iterations)
        except RuntimeError as e:
            logger.warning(f"Fringe fit did not converge: {e}")
            converged = False

    offset, visibility, phase0 = (float(v) for v in params)
    if visibility < 0:
        visibility, phase0 = -visibility, phase0 + pi
    residual = y - _fringe(phi, offset, visibility, phase0)
    variance = covariance[1, 1] if converged else np.inf
    return FringeFit(
        offset=offset,
        amplitude=offset * visibility,
        phase0=_wrap(phase0),
        visibility=visibility,
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
        converged=converged,
        visibility_sigma=float(np.sqrt(variance)) if np.isfinite(variance) else float("nan"),
        max_iterations=max_iterations,
    )


def visibility_with_errors(phases: Sequence[float], counts: Sequence[float], estimator: str = "minmax",
                           poisson: bool = True,
                           max_iterations: int = DEFAULT_FIT_ITERATIONS) -> VisibilityEstimate:
    """
    Visibility of a measured fringe with its 1-sigma uncertainty

    With ``poisson`` the points carry sigma = sqrt(counts); otherwise they are
    treated as exact rates and the uncertainty is zero. ``max_iterations``
    bounds the optimiser when ``estimator`` is "fit". A zero minimum makes
    the min/max error one-sided: the propagated sigma vanishes and
    ``sigma_lower`` gives the spread implied by a one-count floor.
    """
    counts = np.asarray(counts, dtype=float)
    if estimator == "fit":
        sigma = np.sqrt(counts) if poisson else None
        result = fit_sinusoid(phases, counts, sigma=sigma, max_iterations=max_iterations)
        error = result.visibility_sigma if poisson else 0.0
        return VisibilityEstimate(result.visibility, error, "fit", fit=result)
    if estimator != "minmax":
        raise SpecValidationError(f"unknown estimator '{estimator}'", field="estimator")

    visibility = _minmax(counts)
    if not poisson:
        return VisibilityEstimate(visibility, 0.0, "minmax")
    high, low = float(counts.max()), float(counts.min())
    if high <= 0:
        raise UndefinedVisibilityError("maximum count is zero")
    total = high + low
    # dV/dmax = 2 min / total^2, dV/dmin = -2 max / total^2, var = counts
    sigma = 2.0 / total ** 2 * np.sqrt(low ** 2 * high + high ** 2 * low)
    if low == 0:
        return VisibilityEstimate(visibility, float(sigma), "minmax", one_sided=True, sigma_lower=2.0 / high)
    return VisibilityEstimate(visibility, float(sigma), "minmax")
