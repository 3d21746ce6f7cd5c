"""Beam evolution in modal coordinates, exact in time.

The homogeneous flow is a mode-wise rotation at frequency omega_m.  Forced
solutions are built by variation of constants: for a forcing whose modal
coefficients are trigonometric polynomials in t (the only kind the control
synthesis produces), each mode's particular response is again a combination
of cos/sin/t*cos/t*sin terms, so the full solution, its traces, and every
quadratic functional of it integrate in closed form via trig.TrigSignal.

A uniform-grid sampled forcing is accepted as a fallback and integrated by
Simpson quadrature with an explicit density guard.

Mode reductions are numpy sums in ascending mode order (bitwise reproducible
at a fixed thread count).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import ForcingGridError
from .modal import L2_VDUAL, FrequencyTable, ModalState, frequencies, norm
from .regions import ControlRegion, Internal, Pointwise, region_scale
from .trig import TrigSignal, int_cos, int_sin, nearly_equal

__all__ = [
    "ControlField",
    "TraceSignal",
    "homogeneous_signals",
    "forced_signals",
    "homogeneous_eval",
    "duhamel_solve",
    "evolve_to_final",
    "trace",
    "trace_dx",
    "window_product_integral",
    "spatial_overlap",
    "spatial_overlap_matrix",
    "time_overlap",
    "time_overlap_matrices",
    "window_energy",
    "DEFAULT_TRACE_GRID",
]

# Default horizon everywhere is T = 2, the minimal observability horizon;
# 2048 samples resolve the default 16-mode band comfortably.
DEFAULT_TRACE_GRID = 2048

# Minimum Simpson samples per period of the fastest retained mode.
_MIN_SAMPLES_PER_PERIOD = 10


@dataclass(frozen=True)
class TraceSignal:
    """A time signal on [0, T]: uniform samples plus optional closed form."""

    T: float
    times: np.ndarray
    values: np.ndarray
    closed_form: TrigSignal | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.size < 2:
            raise ValueError("trace grid needs at least 2 samples")
        if times.shape != values.shape:
            raise ValueError("trace times and values disagree in shape")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("trace samples must be finite")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "T", float(self.T))

    @property
    def grid_size(self) -> int:
        return int(self.times.size)


def _readonly(arr) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    if not np.all(np.isfinite(out)):
        raise ValueError("array entries must be finite")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ControlField:
    """Forcing applied to the beam, described by its modal coefficients.

    The modal coefficient of mode m is the trigonometric polynomial

        g_m(t) = sum_j cos_amp[m, j] cos(freqs[j] t) + sin_amp[m, j] sin(freqs[j] t)

    which is exactly the shape HUM controls take.  `samples` holds an
    optional uniform-grid fallback (rows are modes) on [0, sample_T] for
    forcings supplied from outside; when both representations are present
    they are cross-checked at construction.

    For a window region the physical field is amplitude * indicator * adjoint
    trace; `source_adjoint` retains the adjoint state so the field can be
    evaluated pointwise (exactly zero outside the window).  region may be
    None for a plain distributed forcing given directly by its modal
    coefficients (test fields); such a forcing cannot be evaluated in space.
    """

    region: ControlRegion | None
    freqs: np.ndarray | None = None
    cos_amp: np.ndarray | None = None
    sin_amp: np.ndarray | None = None
    samples: np.ndarray | None = None
    sample_T: float | None = None
    source_adjoint: ModalState | None = None

    def __post_init__(self):
        if self.freqs is None and self.samples is None:
            raise ValueError("control field needs a trigonometric or sampled representation")
        if self.freqs is not None:
            freqs = _readonly(np.atleast_1d(self.freqs))
            cos_amp = _readonly(np.atleast_2d(self.cos_amp))
            sin_amp = _readonly(np.atleast_2d(self.sin_amp))
            if cos_amp.shape != sin_amp.shape or cos_amp.shape[1] != freqs.size:
                raise ValueError("amplitude arrays must both be (m_modes, len(freqs))")
            object.__setattr__(self, "freqs", freqs)
            object.__setattr__(self, "cos_amp", cos_amp)
            object.__setattr__(self, "sin_amp", sin_amp)
        if self.samples is not None:
            samples = _readonly(np.atleast_2d(self.samples))
            if self.sample_T is None or not self.sample_T > 0:
                raise ValueError("sampled forcing needs a positive sample_T")
            object.__setattr__(self, "samples", samples)
            object.__setattr__(self, "sample_T", float(self.sample_T))
            if self.freqs is not None:
                if self.samples.shape[0] != self.cos_amp.shape[0]:
                    raise ValueError("sampled rows disagree with modal rows")
                grid = np.linspace(0.0, self.sample_T, self.samples.shape[1])
                exact = self.eval_modal(grid)
                scale = np.max(np.abs(exact)) + 1e-30
                if np.max(np.abs(exact - self.samples)) > 1e-9 * scale:
                    raise ValueError("sampled fallback disagrees with closed form beyond 1e-9")

    @property
    def m_modes(self) -> int:
        if self.cos_amp is not None:
            return int(self.cos_amp.shape[0])
        return int(self.samples.shape[0])

    @property
    def has_closed_form(self) -> bool:
        return self.freqs is not None

    @classmethod
    def zero(cls, region: ControlRegion, m_modes: int) -> "ControlField":
        return cls(
            region,
            freqs=np.zeros(0),
            cos_amp=np.zeros((m_modes, 0)),
            sin_amp=np.zeros((m_modes, 0)),
        )

    @classmethod
    def from_samples(cls, region: ControlRegion, samples, T: float) -> "ControlField":
        return cls(region, samples=samples, sample_T=T)

    def modal_signal(self, m: int) -> TrigSignal:
        """Closed-form g_m as a TrigSignal."""
        if not self.has_closed_form:
            raise ValueError("control field has no closed-form representation")
        sig = TrigSignal()
        for j, nu in enumerate(self.freqs):
            sig.add(float(nu), "cos", float(self.cos_amp[m, j]))
            sig.add(float(nu), "sin", float(self.sin_amp[m, j]))
        return sig

    def eval_modal(self, t) -> np.ndarray:
        """Evaluate every g_m on a time grid; shape (m_modes, len(t))."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if not self.has_closed_form:
            raise ValueError("control field has no closed-form representation")
        ct = np.cos(self.freqs[:, None] * t[None, :])
        st = np.sin(self.freqs[:, None] * t[None, :])
        return self.cos_amp @ ct + self.sin_amp @ st

    def field_at(self, x, t):
        """Physical field value; exact zero outside a window region."""
        if self.source_adjoint is None or self.region is None:
            raise ValueError("field evaluation needs the synthesizing adjoint state")
        if isinstance(self.region, Pointwise):
            raise ValueError("a point control is a measure, not a field; use point_signal")
        x = np.asarray(x, dtype=float)
        inside = (x >= self.region.xi) & (x <= self.region.xi + self.region.width)
        vals = homogeneous_eval(self.source_adjoint, x, t)
        return region_scale(self.region) * np.where(inside, vals, 0.0)

    def point_signal(self, t):
        """Amplitude v(t) of a point control v(t) delta_xi."""
        if self.source_adjoint is None:
            raise ValueError("point signal needs the synthesizing adjoint state")
        if not isinstance(self.region, Pointwise):
            raise ValueError("point_signal is defined for point regions only")
        return homogeneous_eval(self.source_adjoint, self.region.xi, t)


def homogeneous_signals(state: ModalState, freq: FrequencyTable | None = None) -> list[TrigSignal]:
    """Per-mode displacement coefficients of the free evolution."""
    freq = freq or frequencies(state.m_modes)
    out = []
    for m in range(state.m_modes):
        sig = TrigSignal()
        sig.add(float(freq.omega[m]), "cos", float(state.a[m]))
        sig.add(float(freq.omega[m]), "sin", float(state.beta[m]))
        out.append(sig)
    return out


def homogeneous_eval(state: ModalState, x, t):
    """Free solution sum_m [a_m cos(w_m t) + beta_m sin(w_m t)] sin(mu_m x).

    x and t broadcast together; scalars in, scalar out.
    """
    freq = frequencies(state.m_modes)
    x_arr = np.asarray(x, dtype=float)[..., None]
    t_arr = np.asarray(t, dtype=float)[..., None]
    envelope = state.a * np.cos(freq.omega * t_arr) + state.beta * np.sin(freq.omega * t_arr)
    out = np.sum(envelope * np.sin(freq.mu * x_arr), axis=-1)
    return float(out) if out.ndim == 0 else out


def forced_signals(
    state: ModalState, forcing: ControlField | None, m_modes: int | None = None
) -> list[TrigSignal]:
    """Closed-form modal displacement signals of the forced solution.

    Mode m obeys u_m'' + omega_m^2 u_m = g_m(t).  Each forcing term at
    frequency nu contributes the textbook particular solution; within the
    resonance threshold of omega_m it contributes the secular branch with
    t cos / t sin terms instead.
    """
    M = m_modes if m_modes is not None else state.m_modes
    if M > state.m_modes:
        raise ValueError(f"state holds {state.m_modes} modes, requested {M}")
    freq = frequencies(M)
    signals = homogeneous_signals(
        state if M == state.m_modes else ModalState(state.a[:M], state.beta[:M]), freq
    )
    if forcing is None:
        return signals
    if not forcing.has_closed_form:
        raise ValueError("closed-form Duhamel needs a trigonometric forcing; use duhamel_solve")
    if forcing.m_modes < M:
        raise ValueError(f"forcing holds {forcing.m_modes} modes, solver needs {M}")
    for m in range(M):
        w = float(freq.omega[m])
        sig = signals[m]
        for j, nu in enumerate(forcing.freqs):
            nu = float(nu)
            C = float(forcing.cos_amp[m, j])
            S = float(forcing.sin_amp[m, j])
            if C == 0.0 and S == 0.0:
                continue
            if nearly_equal(nu, w):
                # resonant: response to cos is t sin/(2w), to sin is
                # sin/(2w^2) - t cos/(2w)
                sig.add(w, "tsin", C / (2.0 * w))
                sig.add(w, "sin", S / (2.0 * w * w))
                sig.add(w, "tcos", -S / (2.0 * w))
            else:
                D = w * w - nu * nu
                sig.add(nu, "cos", C / D)
                sig.add(w, "cos", -C / D)
                sig.add(nu, "sin", S / D)
                sig.add(w, "sin", -S * nu / (w * D))
    return signals


def _sampled_duhamel(state: ModalState, forcing: ControlField, T: float, M: int) -> ModalState:
    """Simpson quadrature fallback for sampled-only forcings."""
    samples = forcing.samples
    if not math.isclose(forcing.sample_T, T, rel_tol=1e-9):
        raise ValueError(f"sampled forcing covers [0, {forcing.sample_T}], solver needs [0, {T}]")
    if samples.shape[0] < M:
        raise ValueError(f"forcing holds {samples.shape[0]} modes, solver needs {M}")
    freq = frequencies(M)
    grid = np.linspace(0.0, T, samples.shape[1])
    step = grid[1] - grid[0]
    fastest_period = 2.0 * np.pi / float(freq.omega[M - 1])
    if fastest_period / step < _MIN_SAMPLES_PER_PERIOD:
        raise ForcingGridError(
            f"forcing grid has {fastest_period / step:.2f} samples per period of mode "
            f"{M - 1}; need at least {_MIN_SAMPLES_PER_PERIOD}"
        )
    a = np.empty(M)
    beta = np.empty(M)
    for m in range(M):
        w = float(freq.omega[m])
        c, s = math.cos(w * T), math.sin(w * T)
        a_h = state.a[m] * c + state.beta[m] * s
        b_h = -state.a[m] * s + state.beta[m] * c
        g = samples[m]
        kern_s = np.sin(w * (T - grid))
        kern_c = np.cos(w * (T - grid))
        a[m] = a_h + simpson(kern_s * g, x=grid) / w
        beta[m] = b_h + simpson(kern_c * g, x=grid) / w
    return ModalState(a, beta)


def duhamel_solve(
    state0: ModalState,
    forcing: ControlField | None,
    T: float,
    m_modes: int | None = None,
) -> ModalState:
    """State at time T under the given forcing.

    Closed form for trigonometric forcings (exact up to rounding, including
    resonance); Simpson quadrature for sampled-only forcings.
    """
    if not T > 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    M = m_modes if m_modes is not None else state0.m_modes
    if forcing is not None and not forcing.has_closed_form:
        return _sampled_duhamel(state0, forcing, T, M)
    signals = forced_signals(state0, forcing, M)
    omega = frequencies(M).omega
    a = np.empty(M)
    beta = np.empty(M)
    for m, sig in enumerate(signals):
        a[m] = sig(T)
        beta[m] = sig.deriv()(T) / float(omega[m])
    return ModalState(a, beta)


def evolve_to_final(
    state0: ModalState, control: ControlField | None, T: float
) -> tuple[ModalState, float]:
    """Final state at T and its natural data norm, the null-control residual."""
    final = duhamel_solve(state0, control, T)
    return final, norm(final, L2_VDUAL)


def _trace_signal(state: ModalState, factors: np.ndarray, T: float, grid: int) -> TraceSignal:
    if grid < 2:
        raise ValueError(f"trace grid must have at least 2 samples, got {grid}")
    if not T > 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    freq = frequencies(state.m_modes)
    closed = TrigSignal()
    for m in range(state.m_modes):
        closed.add(float(freq.omega[m]), "cos", float(state.a[m] * factors[m]))
        closed.add(float(freq.omega[m]), "sin", float(state.beta[m] * factors[m]))
    times = np.linspace(0.0, T, grid)
    return TraceSignal(T, times, closed(times), closed)


def trace(state: ModalState, xi: float, T: float, grid: int = DEFAULT_TRACE_GRID) -> TraceSignal:
    """Point displacement history u(xi, .) of the free evolution of state."""
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"trace point must lie in [0,1], got {xi}")
    mu = frequencies(state.m_modes).mu
    return _trace_signal(state, np.sin(mu * xi), T, grid)


def trace_dx(state: ModalState, xi: float, T: float, grid: int = DEFAULT_TRACE_GRID) -> TraceSignal:
    """Point slope history u_x(xi, .) of the free evolution of state."""
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"trace point must lie in [0,1], got {xi}")
    mu = frequencies(state.m_modes).mu
    return _trace_signal(state, mu * np.cos(mu * xi), T, grid)


def window_product_integral(mu1, mu2, xi: float, h: float):
    """int_{xi}^{xi+h} sin(mu1 x) sin(mu2 x) dx in closed form.

    Product-to-sum with the stable midpoint form
    int cos(d x) dx = 2 cos(d (xi + h/2)) sin(d h / 2) / d, limit h at d = 0.
    Accepts scalar or array mu1, mu2; h = 0 gives exactly 0.
    """
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)

    def cos_int(d):
        d = np.asarray(d, dtype=float)
        zero = d == 0.0
        ds = np.where(zero, 1.0, d)
        vals = 2.0 * np.cos(ds * (xi + h / 2.0)) * np.sin(ds * h / 2.0) / ds
        return np.where(zero, h, vals)

    out = 0.5 * (cos_int(mu1 - mu2) - cos_int(mu1 + mu2))
    return float(out) if out.ndim == 0 else out


def spatial_overlap(m: int, m2: int, region: ControlRegion) -> float:
    """int over the region of sin(mu_m x) sin(mu_m2 x); point regions return
    the product of point values."""
    if m < 0 or m2 < 0:
        raise ValueError("mode indices must be nonnegative")
    top = max(m, m2) + 1
    mu = frequencies(top).mu
    if isinstance(region, Pointwise):
        return float(np.sin(mu[m] * region.xi) * np.sin(mu[m2] * region.xi))
    return float(window_product_integral(mu[m], mu[m2], region.xi, region.width))


def spatial_overlap_matrix(freq: FrequencyTable, region: ControlRegion) -> np.ndarray:
    """All pairwise spatial overlaps for modes m < m_modes; symmetric."""
    if isinstance(region, Pointwise):
        s = np.sin(freq.mu * region.xi)
        return np.outer(s, s)
    return window_product_integral(
        freq.mu[:, None], freq.mu[None, :], region.xi, region.width
    )


_TIME_KINDS = ("cc", "cs", "ss")


def time_overlap(kind: str, w: float, w2: float, T: float) -> float:
    """Exact int_0^T of cos(w t)cos(w2 t), cos(w t)sin(w2 t) or sin(w t)sin(w2 t)."""
    if kind not in _TIME_KINDS:
        raise ValueError(f"kind must be one of {_TIME_KINDS}, got {kind!r}")
    if not T > 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    if w < 0 or w2 < 0:
        raise ValueError("frequencies must be nonnegative")
    if kind == "cc":
        return 0.5 * (int_cos(w - w2, T) + int_cos(w + w2, T))
    if kind == "ss":
        return 0.5 * (int_cos(w - w2, T) - int_cos(w + w2, T))
    # cs: cos(w t) sin(w2 t) = (sin((w+w2)t) + sin((w2-w)t)) / 2
    return 0.5 * (int_sin(w + w2, T) + int_sin(w2 - w, T))


def time_overlap_matrices(omega: np.ndarray, T: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(CC, CS, SS) with CC[i,j] = int cos(w_i t) cos(w_j t) dt and so on;
    CS[i, j] pairs cos at w_i with sin at w_j."""
    w = np.asarray(omega, dtype=float)
    diff = w[:, None] - w[None, :]
    summ = w[:, None] + w[None, :]
    cc = 0.5 * (int_cos(diff, T) + int_cos(summ, T))
    ss = 0.5 * (int_cos(diff, T) - int_cos(summ, T))
    cs = 0.5 * (int_sin(summ, T) - int_sin(diff, T))
    return cc, cs, ss


def window_energy(signals: list[TrigSignal], region: ControlRegion, T: float) -> float:
    """int_0^T int_region (sum_m sig_m(t) sin(mu_m x))^2 dx dt, exactly.

    For a point region the spatial integral degenerates to the squared point
    value, i.e. int_0^T u(xi, t)^2 dt.
    """
    M = len(signals)
    S = spatial_overlap_matrix(frequencies(M), region)
    total = 0.0
    for m in range(M):
        for k in range(m, M):
            overlap = signals[m].integral_product(signals[k], T)
            total += (1.0 if k == m else 2.0) * S[m, k] * overlap
    return total
