"""Radial minimizer of the noncoercive p-growth functional.

On the ball of radius R in n dimensions, the functional

    E(u) = int [ a(u) ((eps^2 + |u'|^2)^{p/2} - eps^p) - f u ] dx,
    a(s) = beta1 / (b + |s|)^{alpha p},

is discretized on a uniform radial grid: u is continuous piecewise
linear in the radius with zero boundary trace, the coefficient and the
source act through cell midpoint values, and every cell carries the
exact measure of its spherical shell.  The coefficient decays in u, so
the functional is noncoercive; minimizers are found by steepest descent
in the discrete L^2(mu) metric with an Armijo backtracking line search.

``experiment_regularity`` runs the minimizer over a ladder of grids with
warm starts and summarizes the level-set geometry of the solution: a
power-law tail of mu(k) below the critical integrability of the source,
a stretched-exponential tail at the critical exponent, and a bounded,
grid-stable solution above it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exponents import ProblemParams, Regime, classify_regime, compute_exponents
from .marcinkiewicz import (
    DistributionProfile,
    FitResult,
    InsufficientPointsError,
    distribution_function,
    exp_integrability_fit,
    power_source,
    tail_exponent_fit,
    unit_ball_volume,
)

__all__ = [
    "DiscreteField",
    "ExperimentReport",
    "FunctionalSpec",
    "LevelsetReport",
    "MinimizeReport",
    "NonFiniteEnergyError",
    "RadialGrid",
    "SolverTolerances",
    "assemble_energy",
    "energy_gradient",
    "excess",
    "experiment_regularity",
    "level_profile",
    "levelset_inequality_check",
    "minimize",
    "truncate",
]

#: Armijo sufficient-decrease parameter of the line search.
_ARMIJO = 1e-4

#: Smallest trial step of the line search; below it the solver stagnates.
_STEP_FLOOR = 1e-14

#: Number of levels in the profiles recorded by the experiments.
_PROFILE_LEVELS = 97

#: Dynamic range of the tail-branch profiles (levels down to max|u|/1e3).
_TAIL_SPAN = 1e3

#: Dynamic range of the exponential-branch profiles (down to max|u|/50).
_EXP_SPAN = 50.0


class NonFiniteEnergyError(ArithmeticError):
    """Raised when the energy of the starting field is not finite."""


# --------------------------------------------------------------------------
# grid and fields
# --------------------------------------------------------------------------
class RadialGrid:
    """Uniform radial grid on the ball of the given radius in n dimensions.

    ``nodes`` are the cells + 1 radii, ``cell_measures[i]`` is the exact
    volume of the shell between ``nodes[i]`` and ``nodes[i+1]``, and
    ``spacing`` is the uniform radial step.
    """

    __slots__ = ("n", "radius", "cells", "nodes", "cell_measures", "spacing")

    def __init__(self, n: int, radius: float, cells: int):
        if n != int(n) or n < 1:
            raise ValueError("dimension must be a positive integer")
        radius = float(radius)
        if not math.isfinite(radius) or radius <= 0.0:
            raise ValueError("radius must be positive and finite")
        if cells != int(cells) or cells < 1:
            raise ValueError("cells must be a positive integer")
        self.n = int(n)
        self.radius = radius
        self.cells = int(cells)
        nodes = np.linspace(0.0, radius, self.cells + 1)
        measures = unit_ball_volume(self.n) * (nodes[1:] ** self.n - nodes[:-1] ** self.n)
        nodes.setflags(write=False)
        measures.setflags(write=False)
        self.nodes = nodes
        self.cell_measures = measures
        self.spacing = radius / self.cells

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"RadialGrid(n={self.n}, radius={self.radius}, cells={self.cells})"


class DiscreteField:
    """Continuous piecewise-linear radial field with zero boundary trace."""

    __slots__ = ("nodal_values",)

    def __init__(self, nodal_values):
        vals = np.array(nodal_values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("a field needs at least two nodal values")
        if not np.all(np.isfinite(vals)):
            raise ValueError("nodal values must be finite")
        if vals[-1] != 0.0:
            raise ValueError("the boundary trace must vanish")
        vals.setflags(write=False)
        self.nodal_values = vals


@dataclass(frozen=True)
class FunctionalSpec:
    """Problem parameters, cell-averaged source and gradient regularization."""

    params: ProblemParams
    source: np.ndarray
    epsilon: float

    def __post_init__(self) -> None:
        source = np.array(self.source, dtype=float)
        if source.ndim != 1:
            raise ValueError("source must be one-dimensional")
        if not np.all(np.isfinite(source)):
            raise ValueError("source must be finite")
        source.setflags(write=False)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if not math.isfinite(self.epsilon) or self.epsilon < 0.0:
            raise ValueError("epsilon must be finite and nonnegative")


def _check_compatible(u: np.ndarray, grid: RadialGrid, spec: FunctionalSpec) -> None:
    if u.size != grid.cells + 1:
        raise ValueError(
            f"field has {u.size} nodes but the grid has {grid.cells + 1}"
        )
    if spec.source.size != grid.cells:
        raise ValueError(
            f"source has {spec.source.size} cells but the grid has {grid.cells}"
        )


# --------------------------------------------------------------------------
# energy and gradient
# --------------------------------------------------------------------------
def _energy(u, h, meas, fbar, beta1, b, ap, p, eps) -> float:
    ubar = 0.5 * (u[:-1] + u[1:])
    du = (u[1:] - u[:-1]) / h
    a = beta1 / (b + np.abs(ubar)) ** ap
    je = (eps * eps + du * du) ** (p / 2) - eps**p
    return float(np.sum(meas * (a * je - fbar * ubar)))


def _gradient(u, h, meas, fbar, beta1, b, ap, p, eps) -> np.ndarray:
    ubar = 0.5 * (u[:-1] + u[1:])
    du = (u[1:] - u[:-1]) / h
    absu = np.abs(ubar)
    a = beta1 / (b + absu) ** ap
    da = -ap * beta1 * np.sign(ubar) / (b + absu) ** (ap + 1)
    je = (eps * eps + du * du) ** (p / 2) - eps**p
    jp = p * du * (eps * eps + du * du) ** (p / 2 - 1)
    half = 0.5 * meas * (da * je - fbar)
    flux = meas * a * jp / h
    g = np.zeros(u.size - 1)
    g += half - flux
    g[1:] += half[:-1] + flux[:-1]
    return g


def _coefficients(spec: FunctionalSpec) -> Tuple[float, float, float, float, float]:
    params = spec.params
    return (
        params.beta1,
        params.b_const,
        params.alpha * params.p,
        params.p,
        spec.epsilon,
    )


def assemble_energy(field: DiscreteField, grid: RadialGrid, spec: FunctionalSpec) -> float:
    """Discrete energy of the field; exact for piecewise-linear test fields."""
    u = field.nodal_values
    _check_compatible(u, grid, spec)
    beta1, b, ap, p, eps = _coefficients(spec)
    with np.errstate(over="ignore", invalid="ignore"):
        return _energy(u, grid.spacing, grid.cell_measures, spec.source, beta1, b, ap, p, eps)


def energy_gradient(field: DiscreteField, grid: RadialGrid, spec: FunctionalSpec) -> np.ndarray:
    """Euclidean gradient of the energy over the free (non-boundary) nodes.

    With epsilon = 0 and p < 2 the p-energy density is not differentiable
    at vanishing slope, so that combination is rejected.
    """
    u = field.nodal_values
    _check_compatible(u, grid, spec)
    beta1, b, ap, p, eps = _coefficients(spec)
    if eps == 0.0 and p < 2.0:
        raise ValueError("epsilon must be positive when p < 2 (nonsmooth density)")
    with np.errstate(over="ignore", invalid="ignore"):
        return _gradient(u, grid.spacing, grid.cell_measures, spec.source, beta1, b, ap, p, eps)


# --------------------------------------------------------------------------
# minimization
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class SolverTolerances:
    """Stopping parameters of the descent: gradient norm and iteration cap."""

    grad_tol: float = 1e-6
    max_iters: int = 100_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "grad_tol", float(self.grad_tol))
        object.__setattr__(self, "max_iters", int(self.max_iters))
        if not math.isfinite(self.grad_tol) or self.grad_tol < 0.0:
            raise ValueError("grad_tol must be finite and nonnegative")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")


@dataclass(frozen=True)
class MinimizeReport:
    """Result of one descent run.

    ``status`` is "converged" (gradient norm reached grad_tol),
    "stagnated" (no descent step above the step floor) or "max_iters".
    ``energy_trace`` holds the energy at the start and after every
    accepted iteration, so its length is iterations + 1.
    """

    final_field: DiscreteField
    status: str
    iterations: int
    final_gradient_norm: float
    energy_trace: List[float]

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def minimize(
    grid: RadialGrid,
    spec: FunctionalSpec,
    initial: DiscreteField,
    tolerances: SolverTolerances,
) -> MinimizeReport:
    """Steepest descent in the discrete L^2(mu) metric with Armijo search.

    The Euclidean gradient is preconditioned by the nodal measures (the
    Riesz map of the L^2(mu) inner product), which makes the iteration
    equivariant under source rescaling in the linear regime.  The step is
    doubled after every accepted move and halved on rejection; the run
    stagnates when no step above the floor decreases the energy.
    """
    u = initial.nodal_values.copy()
    _check_compatible(u, grid, spec)
    beta1, b, ap, p, eps = _coefficients(spec)
    if eps == 0.0 and p < 2.0:
        raise ValueError("epsilon must be positive when p < 2 (nonsmooth density)")
    h = grid.spacing
    meas = grid.cell_measures
    fbar = spec.source

    # nodal measures: Riesz weights of the discrete L^2(mu) inner product
    metric = np.zeros(grid.cells)
    metric += 0.5 * meas
    metric[1:] += 0.5 * meas[:-1]

    with np.errstate(over="ignore", invalid="ignore"):
        energy = _energy(u, h, meas, fbar, beta1, b, ap, p, eps)
        if not math.isfinite(energy):
            raise NonFiniteEnergyError(f"initial energy is {energy}")
        trace = [energy]
        step = h * h
        iterations = 0
        status = "max_iters"
        grad_norm = math.nan
        while iterations < tolerances.max_iters:
            g = _gradient(u, h, meas, fbar, beta1, b, ap, p, eps)
            direction = g / metric
            gn2 = float(g @ direction)
            grad_norm = math.sqrt(gn2)
            if grad_norm <= tolerances.grad_tol:
                status = "converged"
                break
            accepted = False
            while step >= _STEP_FLOOR:
                trial = u.copy()
                trial[:-1] -= step * direction
                trial_energy = _energy(trial, h, meas, fbar, beta1, b, ap, p, eps)
                if math.isfinite(trial_energy) and energy - trial_energy >= _ARMIJO * step * gn2:
                    u, energy = trial, trial_energy
                    step *= 2.0
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                status = "stagnated"
                break
            trace.append(energy)
            iterations += 1
        else:
            # ran out of iterations with the last gradient still above tolerance
            pass

    return MinimizeReport(
        final_field=DiscreteField(u),
        status=status,
        iterations=iterations,
        final_gradient_norm=grad_norm,
        energy_trace=trace,
    )


# --------------------------------------------------------------------------
# truncation
# --------------------------------------------------------------------------
def truncate(field: DiscreteField, level: float) -> DiscreteField:
    """Two-sided truncation T_k(u) = clamp(u, -k, k)."""
    level = float(level)
    if not math.isfinite(level) or level < 0.0:
        raise ValueError("truncation level must be finite and nonnegative")
    return DiscreteField(np.clip(field.nodal_values, -level, level))


def excess(field: DiscreteField, level: float) -> DiscreteField:
    """Excess G_k(u) = u - T_k(u), supported on {|u| >= k}."""
    truncated = truncate(field, level)
    return DiscreteField(field.nodal_values - truncated.nodal_values)


# --------------------------------------------------------------------------
# level-set geometry
# --------------------------------------------------------------------------
def level_profile(field: DiscreteField, grid: RadialGrid, levels) -> DistributionProfile:
    """Distribution function of |u| at the given levels.

    The field acts through its cell midpoint values, each weighted with
    the exact shell measure, consistent with the rest of the module.
    """
    u = field.nodal_values
    if u.size != grid.cells + 1:
        raise ValueError(
            f"field has {u.size} nodes but the grid has {grid.cells + 1}"
        )
    midvalues = np.abs(0.5 * (u[:-1] + u[1:]))
    return distribution_function(midvalues, grid.cell_measures, levels)


@dataclass(frozen=True)
class LevelsetReport:
    """Residuals of the level-set inequality |A_h| <= (h^A |A_k|^B + |A_k|^C)/(h-k)^D.

    ``residuals`` holds (h, k, ratio) for every pair with |A_k| > 0;
    pairs whose lower level already empties the superlevel set are listed
    in ``skipped``.  ``constant`` is the smallest c making the inequality
    hold on the sampled pairs (the largest ratio), or 0.0 if none remain.
    """

    residuals: List[Tuple[float, float, float]]
    skipped: List[Tuple[float, float]]
    constant: float


def levelset_inequality_check(
    field: DiscreteField,
    grid: RadialGrid,
    spec: FunctionalSpec,
    pairs: Sequence[Tuple[float, float]],
) -> LevelsetReport:
    """Evaluate the level-set decay inequality on the given (h, k) pairs.

    The exponents (A, B, C, D) come from the problem parameters; the
    superlevel sets use the same cell midpoint convention as
    ``level_profile``.  Every pair must satisfy h > k > 0.
    """
    u = field.nodal_values
    _check_compatible(u, grid, spec)
    exps = compute_exponents(spec.params)
    a_exp, b_exp, c_exp, d_exp = exps.hyp.A, exps.hyp.B, exps.hyp.C, exps.hyp.D
    midvalues = np.abs(0.5 * (u[:-1] + u[1:]))
    meas = grid.cell_measures
    residuals: List[Tuple[float, float, float]] = []
    skipped: List[Tuple[float, float]] = []
    for h, k in pairs:
        h = float(h)
        k = float(k)
        if not h > k > 0.0:
            raise ValueError(f"pairs must satisfy h > k > 0, got ({h}, {k})")
        measure_k = float(np.sum(meas[midvalues >= k]))
        if measure_k == 0.0:
            skipped.append((h, k))
            continue
        measure_h = float(np.sum(meas[midvalues >= h]))
        rhs = (h**a_exp * measure_k**b_exp + measure_k**c_exp) / (h - k) ** d_exp
        residuals.append((h, k, measure_h / rhs))
    constant = max((ratio for _, _, ratio in residuals), default=0.0)
    return LevelsetReport(residuals=residuals, skipped=skipped, constant=constant)


# --------------------------------------------------------------------------
# regularity experiment
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class ExperimentReport:
    """Summary of a warm-started grid ladder of minimizations.

    Exactly one of the trichotomy summaries is populated, according to
    the regime of the parameters: ``tail_fit`` (power-law tail of the
    distribution function, with ``predicted_slope`` = -s), ``exp_fit``
    (stretched-exponential tail with exponent ``theta``), or
    ``stabilization_ratio`` (relative change of max|u| on the last
    refinement).  Per-grid artifacts are kept for downstream checks.
    """

    grid_cells: Tuple[int, ...]
    regime: Regime
    grids: List[RadialGrid]
    specs: List[FunctionalSpec]
    final_fields: List[DiscreteField]
    reports: List[MinimizeReport]
    profiles: List[DistributionProfile]
    max_u: List[float]
    predicted_slope: Optional[float]
    theta: Optional[float]
    tail_fit: Optional[FitResult]
    exp_fit: Optional[FitResult]
    stabilization_ratio: Optional[float]

    @property
    def statuses(self) -> List[str]:
        return [report.status for report in self.reports]


def _profile_levels(regime: Regime, peak: float) -> np.ndarray:
    if peak <= 0.0:
        return np.empty(0)
    span = _EXP_SPAN if regime is Regime.EXPONENTIAL_INTEGRABILITY else _TAIL_SPAN
    return np.geomspace(peak / span, peak, _PROFILE_LEVELS)


def tail_fit_of(profile: DistributionProfile) -> Optional[FitResult]:
    """Power-law fit over the top decade of positive-measure levels.

    Returns None when the profile is empty or has too few points.
    """
    positive = profile.levels[profile.measures > 0.0]
    if positive.size == 0:
        return None
    k_top = float(positive[-1])
    try:
        return tail_exponent_fit(profile, k_top / 10.0, k_top)
    except InsufficientPointsError:
        return None


def exp_fit_of(profile: DistributionProfile, theta: float) -> Optional[FitResult]:
    """Stretched-exponential fit ln mu vs k**theta over the whole profile.

    Returns None when the profile is empty or has too few points.
    """
    if profile.levels.size == 0:
        return None
    try:
        return exp_integrability_fit(profile, theta, float(profile.levels[0]))
    except InsufficientPointsError:
        return None


def experiment_regularity(
    params: ProblemParams,
    grid_cells: Sequence[int],
    tolerances: SolverTolerances,
    *,
    radius: float = 1.0,
    source_scale: float = 1.0,
    epsilon: float = 1e-6,
) -> ExperimentReport:
    """Minimize over a ladder of grids and summarize the level-set geometry.

    Each grid is warm-started by linear interpolation of the previous
    minimizer.  The source is the radial power field of the parameters'
    integrability exponent r, scaled by ``source_scale``.  The summary
    branch is selected by the regime of the parameters; see
    ``ExperimentReport``.
    """
    cells_tuple = tuple(int(c) for c in grid_cells)
    if not cells_tuple:
        raise ValueError("need at least one grid")
    regime = classify_regime(params)

    grids: List[RadialGrid] = []
    specs: List[FunctionalSpec] = []
    fields: List[DiscreteField] = []
    reports: List[MinimizeReport] = []
    profiles: List[DistributionProfile] = []
    max_u: List[float] = []

    previous: Optional[Tuple[np.ndarray, np.ndarray]] = None
    for cells in cells_tuple:
        grid = RadialGrid(n=params.n, radius=radius, cells=cells)
        source = power_source(grid.nodes, n=params.n, r=params.r, scale=source_scale)
        spec = FunctionalSpec(params=params, source=source.cell_values, epsilon=epsilon)
        if previous is None:
            start = np.zeros(cells + 1)
        else:
            start = np.interp(grid.nodes, previous[0], previous[1])
            start[-1] = 0.0
        report = minimize(grid, spec, DiscreteField(start), tolerances)
        solution = report.final_field
        peak = float(np.max(np.abs(solution.nodal_values)))
        profile = level_profile(solution, grid, _profile_levels(regime, peak))

        grids.append(grid)
        specs.append(spec)
        fields.append(solution)
        reports.append(report)
        profiles.append(profile)
        max_u.append(peak)
        previous = (grid.nodes, solution.nodal_values)

    predicted_slope: Optional[float] = None
    theta: Optional[float] = None
    tail_fit: Optional[FitResult] = None
    exp_fit: Optional[FitResult] = None
    stabilization_ratio: Optional[float] = None

    if regime in (Regime.GRADIENT_MARCINKIEWICZ, Regime.SOBOLEV_W1P):
        exps = compute_exponents(params)
        if exps.s is not None:
            predicted_slope = -exps.s
        tail_fit = tail_fit_of(profiles[-1])
    elif regime is Regime.EXPONENTIAL_INTEGRABILITY:
        theta = (params.p * (1.0 - params.alpha) - 1.0) / (params.p - 1.0)
        exp_fit = exp_fit_of(profiles[-1], theta)
    elif regime is Regime.BOUNDED:
        if len(max_u) >= 2 and max_u[-2] > 0.0:
            stabilization_ratio = abs(max_u[-1] - max_u[-2]) / max_u[-2]

    return ExperimentReport(
        grid_cells=cells_tuple,
        regime=regime,
        grids=grids,
        specs=specs,
        final_fields=fields,
        reports=reports,
        profiles=profiles,
        max_u=max_u,
        predicted_slope=predicted_slope,
        theta=theta,
        tail_fit=tail_fit,
        exp_fit=exp_fit,
        stabilization_ratio=stabilization_ratio,
    )
