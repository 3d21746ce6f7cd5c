"""The n -> infinity laboratory.

Sweeps the window control problem over shrinking windows [xi, xi + 1/n],
solves the pointwise problem once, and measures everything the limit passage
promises: effective traces approaching the point amplitude v, controlled
trajectories approaching the point-controlled one, duality pairings K_n
approaching K, and the growth rates of the scaled adjoint data.

Weak* convergence itself is not computable; its finite shadow here is (i)
L^2 and antiderivative (H^-1 surrogate) distances of traces against the
fixed limit signal and (ii) pairings against a fixed battery of 8 driven
test fields.

All per-n quantities are closed form; nothing in a sweep depends on grid
resolution except the explicitly discrete H^-1 surrogate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .dynamics import (
    ControlField,
    TraceSignal,
    forced_signals,
    homogeneous_signals,
    spatial_overlap_matrix,
    trace,
    trace_dx,
)
from .hum import (
    ControlProblem,
    control_energy,
    solve_hum,
    synthesize_control,
    verify_null_control,
)
from .modal import L2_VDUAL, ModalState, f_tag, frequencies, norm
from .observability import StrategicReport, strategic_check
from .regions import ControlRegion, Internal, Pointwise, region_scale
from .trig import TrigSignal

__all__ = [
    "TestField",
    "SweepRecord",
    "SweepResult",
    "ScalingFit",
    "ScalingReport",
    "DualityCheck",
    "effective_trace",
    "pairing_functional",
    "duality_identity",
    "field_battery",
    "sweep",
    "fit_exponent",
    "scaling_report",
    "signal_distance_l2",
    "signal_distance_hneg",
    "state_distance",
    "DEFAULT_BATTERY_SEED",
    "CHECKPOINT_FRACTIONS",
]

DEFAULT_BATTERY_SEED = 20250
BATTERY_SIZE = 8
CHECKPOINT_FRACTIONS = (0.25, 0.5, 0.75, 1.0)

# Fitted exponents operationalize the sub-polynomial growth claims; the
# margin tightens each bound so a clean integer-power counterexample fails.
EXPONENT_MARGIN = 0.2
_GENERAL_BOUND = 3.0
_STRATEGIC_BOUND = 1.0


@dataclass(frozen=True)
class TestField:
    """A driven test trajectory: initial data plus distributed forcing."""

    data: ModalState
    forcing: ControlField | None


@dataclass(frozen=True)
class SweepRecord:
    """Everything measured at one window size n.

    Norms are of the scaled adjoint data n * p_n (the window control's
    generator); control_energy is the L^2 energy of the control itself.
    Distances compare against the pointwise limit problem and are NaN when
    the point is non-strategic (no limit to compare against).  wall_clock is
    informational and excluded from serialized artifacts.
    """

    n: int
    adjoint_norm_f: float
    adjoint_norm_l2vdual: float
    control_energy: float
    final_residual: float
    trace_distance_l2: float
    trace_distance_hneg: float
    state_distances: tuple[float, ...]
    pairing_values: tuple[float, ...]
    pairing_gaps: tuple[float, ...]
    effective_trace: TraceSignal
    condition_estimate: float
    wall_clock: float

    @property
    def pairing_value(self) -> float:
        """K_n against the designated first battery field."""
        return self.pairing_values[0] if self.pairing_values else math.nan

    @property
    def pairing_gap_max(self) -> float:
        finite = [g for g in self.pairing_gaps if not math.isnan(g)]
        return max(finite) if finite else math.nan


@dataclass(frozen=True)
class SweepResult:
    xi_num: int
    xi_den: int
    T: float
    m_modes: int
    records: tuple[SweepRecord, ...]
    strategic: StrategicReport
    divergent_modes: tuple[int, ...]
    pointwise_adjoint: ModalState | None
    pointwise_signal: TraceSignal | None
    pointwise_residual: float
    pointwise_energy: float
    pairing_limits: tuple[float, ...]

    @property
    def xi(self) -> float:
        return self.xi_num / self.xi_den


@dataclass(frozen=True)
class ScalingFit:
    quantity: str
    exponent: float
    intercept: float
    bound: float | None
    passed: bool | None


@dataclass(frozen=True)
class ScalingReport:
    mode: str
    fits: tuple[ScalingFit, ...]

    @property
    def all_passed(self) -> bool:
        return all(f.passed for f in self.fits if f.passed is not None)


@dataclass(frozen=True)
class DualityCheck:
    lhs: float
    rhs: float
    rel_gap: float


def effective_trace(
    adjoint0: ModalState, xi: float, n: int, T: float, grid: int = 2048
) -> TraceSignal:
    """phi(xi, .) + (1/2n) phi_x(xi, .) of the free evolution of adjoint0.

    The window observation of n * phi differs from this by O(1/n^2); it is
    the quantity that converges to the pointwise amplitude v.
    """
    if not (isinstance(n, int) and not isinstance(n, bool)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    point = trace(adjoint0, xi, T, grid).closed_form
    slope = trace_dx(adjoint0, xi, T, grid).closed_form
    closed = point + slope.scaled(0.5 / n)
    times = np.linspace(0.0, T, grid)
    return TraceSignal(T, times, closed(times), closed)


def _pad(state: ModalState, M: int) -> ModalState:
    if state.m_modes == M:
        return state
    if state.m_modes > M:
        raise ValueError(f"state holds {state.m_modes} modes, expected at most {M}")
    return ModalState(
        np.pad(state.a, (0, M - state.m_modes)),
        np.pad(state.beta, (0, M - state.m_modes)),
    )


def pairing_functional(
    u_data: ModalState,
    forcing: ControlField | None,
    adjoint0: ModalState,
    region: ControlRegion,
    T: float,
) -> float:
    """K_n(u) = n int_0^T int_window phi u dx dt (window region) or
    K(u) = int_0^T v(t) u(xi, t) dt (point region), in closed form.

    u is the trajectory with data u_data and the given forcing; phi is the
    free evolution of adjoint0.
    """
    M = adjoint0.m_modes
    u_sigs = forced_signals(_pad(u_data, M), forcing, M)
    phi_sigs = homogeneous_signals(adjoint0)
    S = spatial_overlap_matrix(frequencies(M), region)
    total = 0.0
    for m in range(M):
        for k in range(M):
            if S[m, k] == 0.0:
                continue
            total += S[m, k] * u_sigs[m].integral_product(phi_sigs[k], T)
    return region_scale(region) * total


def _l2_coeff_pairing(f_coeffs: np.ndarray, g_coeffs: np.ndarray) -> float:
    # <f, g>_{L^2(0,1)} for sine-basis coefficient arrays
    return 0.5 * float(np.dot(f_coeffs, g_coeffs))


def duality_identity(
    problem: ControlProblem,
    adjoint0: ModalState,
    control: ControlField,
    test: TestField,
) -> DualityCheck:
    """Check int int h psi_n = K_n(u) - <y0, u1> + <y1, u0> at truncation.

    h is the test field's forcing, psi_n the controlled trajectory, u the
    test trajectory.  The identity is integration by parts in time and
    space; at truncation level it is exact, so the relative gap measures
    only accumulated rounding.
    """
    M = problem.m_modes
    omega = frequencies(M).omega
    y = _pad(problem.initial_data, M)
    u = _pad(test.data, M)
    psi_sigs = forced_signals(y, control, M)
    lhs = 0.0
    if test.forcing is not None:
        for m in range(M):
            h_m = test.forcing.modal_signal(m)
            if h_m.terms:
                lhs += 0.5 * h_m.integral_product(psi_sigs[m], problem.T)
    k_n = pairing_functional(test.data, test.forcing, adjoint0, problem.region, problem.T)
    pair_y0_u1 = _l2_coeff_pairing(y.a, u.beta * omega)
    pair_y1_u0 = _l2_coeff_pairing(y.beta * omega, u.a)
    rhs = k_n - pair_y0_u1 + pair_y1_u0
    scale = max(abs(lhs), abs(rhs), 1e-30)
    return DualityCheck(lhs, rhs, abs(lhs - rhs) / scale)


def field_battery(
    m_modes: int, T: float, seed: int = DEFAULT_BATTERY_SEED, count: int = BATTERY_SIZE
) -> list[TestField]:
    """Fixed battery of driven smooth test fields.

    Coefficients decay cubically so every field is smooth at the truncation
    scale; each forcing holds two generic frequencies below the second beam
    frequency band.  Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    fields = []
    decay = 1.0 / (np.arange(m_modes) + 1.0) ** 3
    for _ in range(count):
        data = ModalState(rng.standard_normal(m_modes) * decay,
                          rng.standard_normal(m_modes) * decay)
        nu = rng.uniform(0.5, 20.0, size=2)
        cos_amp = rng.standard_normal((m_modes, 2)) * decay[:, None]
        sin_amp = rng.standard_normal((m_modes, 2)) * decay[:, None]
        forcing = ControlField(None, freqs=nu, cos_amp=cos_amp, sin_amp=sin_amp)
        fields.append(TestField(data, forcing))
    return fields


def signal_distance_l2(a: TrigSignal, b: TrigSignal, T: float) -> float:
    """Exact L^2(0, T) distance between two closed-form signals."""
    diff = a + b.scaled(-1.0)
    return math.sqrt(max(diff.integral_product(diff, T), 0.0))


def signal_distance_hneg(a: TraceSignal, b: TraceSignal) -> float:
    """Discrete H^-1(0, T) surrogate: L^2 distance of de-meaned antiderivatives."""
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times):
        raise ValueError("H^-1 surrogate needs signals sampled on the same grid")
    t = a.times
    T = a.T
    prim_a = np.concatenate(([0.0], cumulative_trapezoid(a.values, t)))
    prim_b = np.concatenate(([0.0], cumulative_trapezoid(b.values, t)))
    prim_a -= trapezoid(prim_a, t) / T
    prim_b -= trapezoid(prim_b, t) / T
    return math.sqrt(max(trapezoid((prim_a - prim_b) ** 2, t), 0.0))


def state_distance(sigs_a: list[TrigSignal], sigs_b: list[TrigSignal], t: float) -> float:
    """L^2(0, 1) distance of two modal trajectories at time t."""
    if len(sigs_a) != len(sigs_b):
        raise ValueError("trajectories disagree in truncation")
    acc = 0.0
    for sa, sb in zip(sigs_a, sigs_b):
        acc += (float(sa(t)) - float(sb(t))) ** 2
    return math.sqrt(0.5 * acc)


def sweep(
    xi_num: int,
    xi_den: int,
    n_list,
    data: ModalState,
    T: float = 2.0,
    m_modes: int = 16,
    regularization: float | None = None,
    battery: list[TestField] | None = None,
    grid: int = 2048,
) -> SweepResult:
    """Solve the window problem at every n and compare against the point limit.

    The point problem is solved once (when xi is strategic); each record
    then carries trace and state distances to that limit plus the battery
    pairings.  A non-strategic xi still sweeps the window problems, but the
    limit comparisons are NaN and the invisible modes are reported.
    """
    xi = xi_num / xi_den
    ns = [int(n) for n in n_list]
    if any(n < 1 for n in ns):
        raise ValueError("window sizes must be positive integers")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_list must be strictly increasing")
    strategic = strategic_check(xi_num, xi_den)
    if battery is None:
        battery = field_battery(m_modes, T)
    divergent = tuple(
        m for m in range(m_modes) if ((2 * m + 1) * xi_num) % (2 * xi_den) == 0
    )
    nan_battery = tuple(math.nan for _ in battery)

    point_adjoint = None
    point_signal = None
    point_sigs = None
    point_residual = math.nan
    point_energy = math.nan
    pairing_limits = nan_battery
    if strategic.strategic:
        point_problem = ControlProblem(
            Pointwise(xi), T, data, m_modes=m_modes, regularization=regularization
        )
        point_adjoint, _ = solve_hum(point_problem)
        point_control = synthesize_control(point_adjoint, Pointwise(xi), T)
        point_report = verify_null_control(point_problem, point_control, point_adjoint)
        point_residual = point_report.relative_residual
        point_energy = control_energy(point_adjoint, Pointwise(xi), T)
        point_signal = trace(point_adjoint, xi, T, grid)
        point_sigs = forced_signals(_pad(data, m_modes), point_control, m_modes)
        pairing_limits = tuple(
            pairing_functional(f.data, f.forcing, point_adjoint, Pointwise(xi), T)
            for f in battery
        )

    records = []
    for n in ns:
        started = time.perf_counter()
        region = Internal(xi, n)
        problem = ControlProblem(
            region, T, data, m_modes=m_modes, regularization=regularization
        )
        adjoint, diag = solve_hum(problem)
        control = synthesize_control(adjoint, region, T)
        report = verify_null_control(problem, control, adjoint)
        scaled = ModalState(n * adjoint.a, n * adjoint.beta)
        eff = effective_trace(adjoint, xi, n, T, grid)
        pairings = tuple(
            pairing_functional(f.data, f.forcing, adjoint, region, T) for f in battery
        )
        if strategic.strategic:
            d_l2 = signal_distance_l2(eff.closed_form, point_signal.closed_form, T)
            d_hneg = signal_distance_hneg(eff, point_signal)
            window_sigs = forced_signals(_pad(data, m_modes), control, m_modes)
            dists = tuple(
                state_distance(window_sigs, point_sigs, frac * T)
                for frac in CHECKPOINT_FRACTIONS
            )
            gaps = tuple(abs(k - kl) for k, kl in zip(pairings, pairing_limits))
        else:
            d_l2 = math.nan
            d_hneg = math.nan
            dists = tuple(math.nan for _ in CHECKPOINT_FRACTIONS)
            gaps = nan_battery
        records.append(
            SweepRecord(
                n=n,
                adjoint_norm_f=norm(scaled, f_tag(xi)),
                adjoint_norm_l2vdual=norm(scaled, L2_VDUAL),
                control_energy=control_energy(adjoint, region, T),
                final_residual=report.relative_residual,
                trace_distance_l2=d_l2,
                trace_distance_hneg=d_hneg,
                state_distances=dists,
                pairing_values=pairings,
                pairing_gaps=gaps,
                effective_trace=eff,
                condition_estimate=diag.condition_estimate,
                wall_clock=time.perf_counter() - started,
            )
        )
    return SweepResult(
        xi_num=xi_num,
        xi_den=xi_den,
        T=float(T),
        m_modes=m_modes,
        records=tuple(records),
        strategic=strategic,
        divergent_modes=divergent,
        pointwise_adjoint=point_adjoint,
        pointwise_signal=point_signal,
        pointwise_residual=point_residual,
        pointwise_energy=point_energy,
        pairing_limits=pairing_limits,
    )


def fit_exponent(ns, values) -> tuple[float, float]:
    """Least-squares slope and intercept of log(value) against log(n)."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if ns.size < 3:
        raise ValueError("exponent fit needs at least 3 records")
    if np.any(values <= 0):
        raise ValueError("exponent fit needs positive quantities")
    slope, intercept = np.polyfit(np.log(ns), np.log(values), 1)
    return float(slope), float(intercept)


def scaling_report(records, mode: str = "strategic") -> ScalingReport:
    """Fit growth exponents of the scaled adjoint norms and control energy.

    general mode asserts the cubic bounds (data merely of finite energy);
    strategic mode additionally asserts the linear bounds available at
    strategic points.  Each asserted bound is tightened by EXPONENT_MARGIN
    so an exact power at the bound fails cleanly; quantities without an
    asserted bound in the given mode are reported with passed = None.
    Fitted exponents over a pre-asymptotic n range can sit above 1: the
    scaled data approach n times the fixed pointwise solution, so the
    linear-bound flags report how far the range is from the limit regime.
    """
    if mode not in ("general", "strategic"):
        raise ValueError(f"mode must be 'general' or 'strategic', got {mode!r}")
    recs = list(records)
    if len(recs) < 3:
        raise ValueError("scaling report needs at least 3 records")
    ns = [r.n for r in recs]
    quantities = (
        ("adjoint_norm_f", _STRATEGIC_BOUND if mode == "strategic" else None),
        ("adjoint_norm_l2vdual", _GENERAL_BOUND),
        ("control_energy", _STRATEGIC_BOUND if mode == "strategic" else _GENERAL_BOUND),
    )
    fits = []
    for name, bound in quantities:
        expo, intercept = fit_exponent(ns, [getattr(r, name) for r in recs])
        passed = None if bound is None else expo < bound - EXPONENT_MARGIN
        fits.append(ScalingFit(name, expo, intercept, bound, passed))
    return ScalingReport(mode, tuple(fits))
