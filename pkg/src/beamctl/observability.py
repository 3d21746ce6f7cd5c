"""Observability quantities for the windowed and pointwise observations.

Everything here is closed form.  The central object is the window mass
int_{xi}^{xi+1/n} sin^2(mu_m x) dx, the per-mode visibility from the control
window, and its rescaled version I(b, t), whose uniform lower bound
c sin^2(pi b) is the inverse inequality making pointwise observation work at
strategic points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .modal import frequencies
from .regions import ControlRegion, Internal

__all__ = [
    "INVERSE_BOUND_CONSTANT",
    "StrategicReport",
    "WindowMassRow",
    "window_mass",
    "window_mass_lower_bound",
    "window_mass_table",
    "overlap_kernel",
    "inverse_bound_check",
    "strategic_check",
    "strategic_floor_check",
    "rescaled_window_mass",
    "observability_constant",
]

# Smallest of the three case constants in the kernel bound proof:
# 1/2 (1 - 2/pi) < 7/24 < 1/3.  One uniform constant keeps the checker simple.
INVERSE_BOUND_CONSTANT = 0.5 * (1.0 - 2.0 / math.pi)

_SINC_CUT = 1e-8


@dataclass(frozen=True)
class StrategicReport:
    """Outcome of the exact strategic-point test for rational xi = p/q.

    Non-strategic points come with a witness mode whose basis function
    vanishes at xi; strategic points come with a uniform positive lower
    bound on |sin(mu_m xi)| valid for every mode.
    """

    xi_num: int
    xi_den: int
    strategic: bool
    witness_m: int | None = None
    lower_bound: float | None = None

    @property
    def xi(self) -> float:
        return self.xi_num / self.xi_den


@dataclass(frozen=True)
class WindowMassRow:
    m: int
    xi: float
    n: int
    mass: float
    bound: float
    ok: bool


def window_mass(m: int, xi: float, n: int) -> float:
    """Exact int_{xi}^{xi+1/n} sin^2(mu_m x) dx.

    Shares its arithmetic with dynamics.spatial_overlap so the diagonal
    overlap equality is bitwise.
    """
    from .dynamics import window_product_integral

    if m < 0 or m != int(m):
        raise ValueError(f"mode index must be a nonnegative integer, got {m}")
    region = Internal(xi, n)
    mu = float(frequencies(m + 1).mu[m])
    return float(window_product_integral(mu, mu, region.xi, region.width))


def window_mass_lower_bound(n: int) -> float:
    """1/(2n) - sin(pi/(2n))/pi, the claimed uniform window-mass floor.

    Positive and of order 1/n^3.  For theta = pi/(2n) < 1/2 the direct form
    loses most of its digits to cancellation, so the alternating series of
    theta - sin(theta) is summed instead.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    theta = math.pi / (2 * n)
    if theta >= 0.5:
        return 0.5 / n - math.sin(theta) / math.pi
    # theta - sin(theta) = theta^3/3! - theta^5/5! + ...
    term = theta**3 / 6.0
    acc = 0.0
    k = 1
    while abs(term) > 1e-18 * abs(acc) + 1e-300:
        acc += term
        term *= -theta * theta / ((2 * k + 2) * (2 * k + 3))
        k += 1
    return acc / math.pi


def window_mass_table(m_max: int, xi: float, n: int) -> list[WindowMassRow]:
    """Window masses for modes 0..m_max-1 against the claimed floor.

    The floor's derivation drops a cosine factor whose sign varies, so
    violations are recorded per row instead of asserted.
    """
    if m_max < 1:
        raise ValueError(f"m_max must be at least 1, got {m_max}")
    bound = window_mass_lower_bound(n)
    rows = []
    for m in range(m_max):
        mass = window_mass(m, xi, n)
        rows.append(WindowMassRow(m, xi, n, mass, bound, mass >= bound - 1e-15))
    return rows


def overlap_kernel(b, t):
    """I(b, t) = int_0^1 sin^2(pi (b + t z)) dz in closed form.

    Equals (1 - sinc(pi t) cos(pi (2b + t))) / 2; the t -> 0 limit sin^2(pi b)
    is substituted below 1e-8.  Values lie in [0, 1] and n * window_mass
    rescales onto this kernel.  Scalars or arrays.
    """
    b_arr = np.asarray(b, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(b_arr < 0) or np.any(t_arr < 0):
        raise ValueError("overlap_kernel needs b >= 0 and t >= 0")
    small = t_arr < _SINC_CUT
    t_safe = np.where(small, 1.0, t_arr)
    sinc = np.sin(np.pi * t_safe) / (np.pi * t_safe)
    closed = 0.5 * (1.0 - sinc * np.cos(np.pi * (2.0 * b_arr + t_arr)))
    limit = np.sin(np.pi * b_arr) ** 2
    out = np.clip(np.where(small, limit, closed), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def inverse_bound_check(b, t):
    """Evaluate I(b, t) >= c sin^2(pi b) with c = (1 - 2/pi)/2.

    Returns (lhs, rhs, ok); ok allows 1e-12 slack.  Arrays broadcast, in
    which case ok is True only if every point passes.
    """
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr < 0) or np.any(b_arr > 1):
        raise ValueError("inverse_bound_check needs b in [0, 1]")
    lhs = overlap_kernel(b, t)
    rhs = INVERSE_BOUND_CONSTANT * np.sin(np.pi * b_arr) ** 2
    ok = bool(np.all(np.asarray(lhs) >= np.asarray(rhs) - 1e-12))
    return lhs, rhs, ok


def strategic_check(p: int, q: int) -> StrategicReport:
    """Decide whether xi = p/q is strategic, exactly.

    sin(mu_m p/q) = sin((2m+1) pi p / (2q)) vanishes iff (2m+1) p is a
    multiple of 2q.  The sequence (2m+1) p mod 4q is periodic with period
    dividing 2q, so scanning one period is exhaustive: it either produces a
    witness mode or a true uniform lower bound on |sin(mu_m p/q)|.
    """
    if not (isinstance(p, int) and isinstance(q, int)) or isinstance(p, bool) or isinstance(q, bool):
        raise ValueError("p and q must be integers")
    if not 0 < p < q:
        raise ValueError(f"xi = {p}/{q} must lie in (0, 1)")
    if math.gcd(p, q) != 1:
        raise ValueError(f"xi = {p}/{q} must be in lowest terms")
    residues = []
    for m in range(2 * q + 1):
        k = ((2 * m + 1) * p) % (4 * q)
        if k % (2 * q) == 0:
            return StrategicReport(p, q, strategic=False, witness_m=m)
        residues.append(k)
    lower = min(abs(math.sin(math.pi * k / (2 * q))) for k in residues)
    return StrategicReport(p, q, strategic=True, lower_bound=lower)


def observability_constant(region: ControlRegion, T: float, M: int) -> float:
    """Smallest eigenvalue of the observability Gramian at truncation M.

    This is the best constant lambda with p' G p >= lambda |p|^2 in the
    (a, beta) coordinates; against the half-sum energy norm the sharp
    observability constant is twice this value.  Non-increasing in M, and
    exactly zero whenever some retained mode is invisible from the region.
    """
    from .hum import assemble_gramian

    gram = assemble_gramian(region, T, M)
    vals = eigh(gram.entries, eigvals_only=True)
    return float(vals[0])


def rescaled_window_mass(m: int, xi: float, n: int) -> float:
    """n * window_mass as the kernel: I((2m+1) xi / 2, (2m+1)/(2n))."""
    if m < 0:
        raise ValueError("mode index must be nonnegative")
    return float(overlap_kernel((2 * m + 1) * xi / 2.0, (2 * m + 1) / (2.0 * n)))


def strategic_floor_check(report: StrategicReport, m_max: int = 10_000) -> bool:
    """Verify the reported uniform bound directly for modes up to m_max."""
    if not report.strategic:
        raise ValueError("floor check applies to strategic points only")
    mu_xi = (
        (2 * np.arange(m_max, dtype=float) + 1.0)
        * (np.pi / 2.0)
        * (report.xi_num / report.xi_den)
    )
    # mu_xi carries a few ulp of rounding that |sin| passes through with unit
    # Lipschitz constant, so the permitted slack must grow with the argument
    slack = 1e-12 + 4.0 * np.finfo(float).eps * mu_xi
    return bool(np.all(np.abs(np.sin(mu_xi)) >= report.lower_bound - slack))
