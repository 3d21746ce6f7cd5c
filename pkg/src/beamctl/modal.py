"""Modal coordinates for the pinned-guided beam eigenbasis sin(mu_m x).

The beam on (0, 1) with boundary conditions u(0) = u_xx(0) = 0 (pinned left
end) and u_x(1) = u_xxx(1) = 0 (guided right end) diagonalizes on the basis
sin(mu_m x) with mu_m = (2m + 1) pi / 2 and natural frequency
omega_m = mu_m^2.  A state is stored as the pair of coefficient arrays

    displacement  u0 = sum_m a[m] sin(mu_m x)
    velocity      u1 = sum_m beta[m] * omega_m * sin(mu_m x)

so that the free evolution is the mode-wise rotation
(a, beta) -> (a cos(omega t) + beta sin(omega t),
              -a sin(omega t) + beta cos(omega t)) and the squared natural
data norm (displacement in L2, velocity in the dual of the stiffness form
domain) is (1/2) sum (a^2 + beta^2).

All reductions over modes are plain numpy sums in ascending mode order,
which keeps results bitwise reproducible for a fixed build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeightError

__all__ = [
    "FrequencyTable",
    "ModalState",
    "SpaceTag",
    "L2_VDUAL",
    "V_L2",
    "D4_V",
    "f_tag",
    "f_dual_tag",
    "frequencies",
    "project",
    "reconstruct",
    "mode_weights",
    "norm_sq",
    "norm",
    "function_norm_sq",
    "smooth",
    "apply_bilaplacian",
    "DEGENERATE_WEIGHT_TOL",
]

# |sin(mu_m xi)| at or below this is treated as an exact zero weight.
DEGENERATE_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class FrequencyTable:
    """Mode frequencies mu_m = (2m+1) pi/2 and omega_m = mu_m^2 for m < m_modes."""

    m_modes: int
    mu: np.ndarray
    omega: np.ndarray


def frequencies(m_modes: int) -> FrequencyTable:
    """Frequency table for the first m_modes beam modes."""
    if not isinstance(m_modes, (int, np.integer)) or m_modes < 1:
        raise ValueError(f"m_modes must be a positive integer, got {m_modes!r}")
    m = np.arange(m_modes)
    mu = (2 * m + 1) * (np.pi / 2)
    omega = mu * mu
    mu.setflags(write=False)
    omega.setflags(write=False)
    return FrequencyTable(int(m_modes), mu, omega)


def _as_readonly_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    if arr.size < 1:
        raise ValueError(f"{name} must hold at least one mode")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModalState:
    """Beam state (displacement, velocity) in modal energy coordinates.

    a[m] is the displacement coefficient on sin(mu_m x); beta[m] is the
    velocity coefficient divided by omega_m.  Both arrays share one length,
    the truncation level.
    """

    a: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _as_readonly_vector(self.a, "a"))
        object.__setattr__(self, "beta", _as_readonly_vector(self.beta, "beta"))
        if self.a.shape != self.beta.shape:
            raise ValueError(
                f"coefficient arrays disagree: {self.a.shape} vs {self.beta.shape}"
            )

    @property
    def m_modes(self) -> int:
        return int(self.a.size)

    @classmethod
    def zeros(cls, m_modes: int) -> "ModalState":
        return cls(np.zeros(m_modes), np.zeros(m_modes))

    @classmethod
    def single_mode(cls, m_modes: int, mode: int, a: float = 1.0, beta: float = 0.0) -> "ModalState":
        if not 0 <= mode < m_modes:
            raise ValueError(f"mode {mode} outside range 0..{m_modes - 1}")
        av = np.zeros(m_modes)
        bv = np.zeros(m_modes)
        av[mode] = a
        bv[mode] = beta
        return cls(av, bv)


_PAIR_KINDS = ("l2_vdual", "v_l2", "d4_v", "f", "f_dual")


@dataclass(frozen=True)
class SpaceTag:
    """Which product norm a number refers to; weighted variants carry xi."""

    kind: str
    xi: float | None = None

    def __post_init__(self):
        if self.kind not in _PAIR_KINDS:
            raise ValueError(f"unknown space tag {self.kind!r}")
        if self.kind in ("f", "f_dual"):
            if self.xi is None or not 0.0 < float(self.xi) < 1.0:
                raise ValueError(f"tag {self.kind!r} needs a point xi in (0,1), got {self.xi!r}")
        elif self.xi is not None:
            raise ValueError(f"tag {self.kind!r} does not take a point")


L2_VDUAL = SpaceTag("l2_vdual")
V_L2 = SpaceTag("v_l2")
D4_V = SpaceTag("d4_v")


def f_tag(xi: float) -> SpaceTag:
    """Trace-weighted data norm with per-mode weight sin^2(mu_m xi)."""
    return SpaceTag("f", float(xi))


def f_dual_tag(xi: float) -> SpaceTag:
    """Dual of f_tag; weights 1/sin^2(mu_m xi), degenerate at unobservable modes."""
    return SpaceTag("f_dual", float(xi))


def mode_weights(tag: SpaceTag, freq: FrequencyTable) -> np.ndarray:
    """Per-mode weight w_m such that norm_sq = (1/2) sum w_m (a_m^2 + beta_m^2)."""
    if tag.kind == "l2_vdual":
        return np.ones(freq.m_modes)
    if tag.kind == "v_l2":
        return freq.mu ** 4
    if tag.kind == "d4_v":
        return freq.mu ** 8
    s2 = np.sin(freq.mu * tag.xi) ** 2
    if tag.kind == "f":
        return s2
    # f_dual: every weight must be bounded away from zero
    dead = np.flatnonzero(s2 <= DEGENERATE_WEIGHT_TOL ** 2)
    if dead.size:
        m = int(dead[0])
        raise DegenerateWeightError(
            m, f"sin(mu_m xi) vanishes at mode m={m} for xi={tag.xi}; dual weight undefined"
        )
    return 1.0 / s2


def norm_sq(state: ModalState, tag: SpaceTag) -> float:
    """Squared data norm (1/2) sum w_m (a_m^2 + beta_m^2) for the tagged space."""
    freq = frequencies(state.m_modes)
    w = mode_weights(tag, freq)
    return 0.5 * float(np.sum(w * (state.a ** 2 + state.beta ** 2)))


def norm(state: ModalState, tag: SpaceTag) -> float:
    """Data norm, the square root of norm_sq."""
    return math.sqrt(norm_sq(state, tag))


_FUNCTION_SPACES = {"l2": 0, "v": 4, "vdual": -4, "d4": 8}


def function_norm_sq(coeffs, space: str) -> float:
    """Squared norm (1/2) sum c_m^2 mu_m^p of a single modal function.

    space selects the weight exponent p: l2 -> 0, v -> 4, vdual -> -4, d4 -> 8.
    """
    if space not in _FUNCTION_SPACES:
        raise ValueError(f"unknown function space {space!r}")
    c = np.asarray(coeffs, dtype=float).reshape(-1)
    mu = frequencies(c.size).mu
    p = _FUNCTION_SPACES[space]
    w = mu ** p if p else np.ones(c.size)
    return 0.5 * float(np.sum(w * c * c))


_GL_ORDER = 10
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


def _gl_grid(panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, 1]."""
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 / panels
    centers = (edges[:-1] + edges[1:]) / 2.0
    nodes = (centers[:, None] + half * _GL_NODES[None, :]).reshape(-1)
    weights = np.tile(half * _GL_WEIGHTS, panels)
    return nodes, weights


def project(f, m_modes: int, quadrature_points: int | None = None) -> np.ndarray:
    """Expansion coefficients c_m = 2 int_0^1 f(x) sin(mu_m x) dx.

    Composite Gauss-Legendre quadrature; the default panel count gives at
    least four nodes per half-wavelength of the highest retained mode, which
    is exact to rounding for band-limited f.
    """
    freq = frequencies(m_modes)
    if quadrature_points is None:
        panels = max(2, math.ceil((2 * m_modes - 1) / 4))
    else:
        if quadrature_points < 2 * m_modes + 2:
            raise ValueError(
                f"quadrature_points must be at least {2 * m_modes + 2}, got {quadrature_points}"
            )
        panels = max(1, math.ceil(quadrature_points / _GL_ORDER))
    nodes, weights = _gl_grid(panels)
    values = np.asarray([float(f(x)) for x in nodes])
    basis = np.sin(freq.mu[:, None] * nodes[None, :])
    return 2.0 * basis @ (weights * values)


def reconstruct(coeffs, x):
    """Evaluate sum_m c_m sin(mu_m x) at scalar or array x."""
    c = np.asarray(coeffs, dtype=float).reshape(-1)
    mu = frequencies(c.size).mu
    x_arr = np.asarray(x, dtype=float)
    out = np.sin(x_arr[..., None] * mu) @ c
    return float(out) if out.ndim == 0 else out


def smooth(state: ModalState) -> ModalState:
    """Apply the inverse stiffness operator modally: divide both coefficient
    arrays by mu_m^4.  apply_bilaplacian undoes it exactly."""
    mu4 = frequencies(state.m_modes).mu ** 4
    return ModalState(state.a / mu4, state.beta / mu4)


def apply_bilaplacian(state: ModalState) -> ModalState:
    """Apply the stiffness operator d^4/dx^4 modally: multiply by mu_m^4."""
    mu4 = frequencies(state.m_modes).mu ** 4
    return ModalState(state.a * mu4, state.beta * mu4)
