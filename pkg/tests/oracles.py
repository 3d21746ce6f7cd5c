"""Independent numerical oracles backing the test suite.

Everything the library computes in closed form is re-derived here by generic
numerical methods sharing no code with the package: batched Gauss-Legendre
quadrature refined by panel doubling until two successive resolutions agree,
scipy's QUADPACK for scalar spot checks, and a classical RK4 stepper for the
modal ODEs.  Batching keeps the 10^4-input acceptance sweeps inside their
time budgets; the doubling check is what makes the quadrature adaptive.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


# cap on rows*panels*nodes per quadrature pass; keeps peak memory modest
_CELL_BUDGET = 4_000_000


def gl_batch(f, lo, hi, panels: int) -> np.ndarray:
    """Composite Gauss-Legendre integral of f over per-row intervals.

    f maps an abscissa array of shape (rows, points) to integrand values of
    the same shape; lo and hi are per-row interval endpoints.  Rows are
    processed in slices sized to _CELL_BUDGET.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    out = np.empty(lo.shape[0])
    step = max(1, _CELL_BUDGET // (panels * _GL_NODES.size))
    frac = np.linspace(0.0, 1.0, panels + 1)
    for start in range(0, lo.shape[0], step):
        sl = slice(start, min(start + step, lo.shape[0]))
        edges = lo[sl, None] + (hi - lo)[sl, None] * frac[None, :]
        centers = 0.5 * (edges[:, :-1] + edges[:, 1:])
        half = 0.5 * (hi[sl] - lo[sl]) / panels
        x = centers[:, :, None] + half[:, None, None] * _GL_NODES
        vals = f(x.reshape(x.shape[0], -1), sl).reshape(x.shape)
        out[sl] = (vals @ _GL_WEIGHTS).sum(axis=1) * half
    return out


def refine_batch(f, lo, hi, base_panels: int, rtol: float = 1e-14,
                 abs_floor=None, max_doublings: int = 6) -> np.ndarray:
    """Panel-doubling refinement of gl_batch until successive passes agree.

    Agreement per row is relative to the integral's own magnitude, with an
    absolute floor (default: rounding scale of a unit-amplitude integrand)
    so integrals that cancel to zero do not spin the loop.  The floor sits
    just above the summation rounding plateau; integrals that cancel by many
    orders are then resolved down to a few ulps of the operand scale.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if abs_floor is None:
        abs_floor = 1e-15 * (hi - lo)
    abs_floor = np.broadcast_to(np.asarray(abs_floor, dtype=float), lo.shape)
    panels = max(int(base_panels), 1)
    out = gl_batch(f, lo, hi, panels)
    # converged rows drop out so one hard row doesn't re-run the whole batch;
    # a row must agree across two consecutive doublings and keeps the finer
    # value, guarding against a single lucky cancellation in the diff
    active = np.arange(lo.shape[0])
    streak = np.zeros(lo.shape[0], dtype=int)
    for _ in range(max_doublings):
        panels *= 2
        sub = lambda x, s, act=active: f(x, act[s])
        cur = gl_batch(sub, lo[active], hi[active], panels)
        agree = np.abs(cur - out[active]) <= np.maximum(
            rtol * np.abs(cur), abs_floor[active]
        )
        out[active] = cur
        streak[active] = np.where(agree, streak[active] + 1, 0)
        active = active[streak[active] < 2]
        if active.size == 0:
            break
    return out


def _banded(phase, lo, hi, make_f, amp=None, bands: int = 6) -> np.ndarray:
    # group rows by total phase so slow integrands don't pay for fast ones
    phase = np.asarray(phase, dtype=float)
    out = np.empty(phase.shape[0])
    order = np.argsort(phase)
    for chunk in np.array_split(order, bands):
        if chunk.size == 0:
            continue
        base = int(np.ceil(phase[chunk].max() / np.pi)) + 4
        floor = None if amp is None else 1e-15 * (hi - lo)[chunk] * amp[chunk]
        out[chunk] = refine_batch(make_f(chunk), lo[chunk], hi[chunk], base,
                                  abs_floor=floor)
    return out


def sine_product_integrals(mu1, mu2, lo, hi) -> np.ndarray:
    """int_lo^hi sin(mu1 x) sin(mu2 x) dx, one value per row."""
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    phase = (np.abs(mu1) + np.abs(mu2)) * (hi - lo)

    def make_f(chunk):
        m1 = mu1[chunk]
        m2 = mu2[chunk]
        return lambda x, sl: np.sin(m1[sl, None] * x) * np.sin(m2[sl, None] * x)

    return _banded(phase, lo, hi, make_f)


_TERMS = {
    "cos": lambda w, t: np.cos(w * t),
    "sin": lambda w, t: np.sin(w * t),
    "tcos": lambda w, t: t * np.cos(w * t),
    "tsin": lambda w, t: t * np.sin(w * t),
}


def trig_pair_integrals(kind1, w1, kind2, w2, T) -> np.ndarray:
    """int_0^T term1(t) term2(t) dt for per-row kinds and frequencies."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    T = np.asarray(T, dtype=float)
    kind1 = np.asarray(kind1)
    kind2 = np.asarray(kind2)
    lo = np.zeros(w1.shape)
    phase = (np.abs(w1) + np.abs(w2)) * T
    # t and t^2 weighted products have amplitude up to T and T^2
    power = {"cos": 0, "sin": 0, "tcos": 1, "tsin": 1}
    out = np.empty(w1.shape[0])
    for k1 in _TERMS:
        for k2 in _TERMS:
            rows = np.flatnonzero((kind1 == k1) & (kind2 == k2))
            if rows.size == 0:
                continue
            f1, f2 = _TERMS[k1], _TERMS[k2]
            amp = np.maximum(T[rows], 1.0) ** (power[k1] + power[k2])

            def make_f(chunk, rows=rows, f1=f1, f2=f2):
                a = w1[rows][chunk]
                b = w2[rows][chunk]
                return lambda x, sl: f1(a[sl, None], x) * f2(b[sl, None], x)

            out[rows] = _banded(phase[rows], lo[rows], T[rows], make_f, amp=amp)
    return out


def kernel_integrals(b, t) -> np.ndarray:
    """int_0^1 sin^2(pi (b + t y)) dy, one value per row."""
    b = np.asarray(b, dtype=float)
    t = np.asarray(t, dtype=float)
    lo = np.zeros(b.shape)
    hi = np.ones(b.shape)
    phase = 2.0 * np.pi * np.abs(t)

    def make_f(chunk):
        bb = b[chunk]
        tt = t[chunk]
        return lambda y, sl: np.sin(np.pi * (bb[sl, None] + tt[sl, None] * y)) ** 2

    return _banded(phase, lo, hi, make_f)


def quad_integral(f, a: float, b: float) -> float:
    """Scalar QUADPACK integral for spot checks against the batched oracle."""
    val, _ = quad(f, a, b, epsabs=1e-13, epsrel=1e-13, limit=400)
    return val


def space_time_energy(a, beta, xi: float, width: float, T: float) -> float:
    """int_0^T int_xi^{xi+width} phi(x,t)^2 dx dt by 2D refined quadrature.

    phi is the free beam evolution of the modal data (a, beta).
    """
    return space_time_product(a, beta, a, beta, xi, width, T)


def space_time_product(a1, b1, a2, b2, xi: float, width: float, T: float,
                       forcing_eval=None) -> float:
    """int_0^T int_window phi(x,t) u(x,t) dx dt for two free evolutions.

    phi has data (a1, b1); u has data (a2, b2) unless forcing_eval is given,
    in which case u's modal time signals are taken from forcing_eval(times)
    (shape (modes, len(times))), allowing forced trajectories.
    """
    a1 = np.asarray(a1, dtype=float)
    b1 = np.asarray(b1, dtype=float)
    M = a1.size
    m = np.arange(M)
    mu = (2 * m + 1) * (np.pi / 2)
    omega = mu * mu

    def field_on(tx, xx, ac, bc, ev):
        # tx: (nt,), xx: (nx,) -> (nx, nt)
        if ev is None:
            sig = ac[:, None] * np.cos(omega[:, None] * tx) + bc[:, None] * np.sin(
                omega[:, None] * tx
            )
        else:
            sig = ev(tx)
        return np.sin(xx[:, None] * mu[None, :]) @ sig

    def integrate(nx_panels, nt_panels):
        xe = np.linspace(xi, xi + width, nx_panels + 1)
        te = np.linspace(0.0, T, nt_panels + 1)
        xc, xh = 0.5 * (xe[:-1] + xe[1:]), 0.5 * (xe[1] - xe[0])
        tc, th = 0.5 * (te[:-1] + te[1:]), 0.5 * (te[1] - te[0])
        xx = (xc[:, None] + xh * _GL_NODES[None, :]).reshape(-1)
        tx = (tc[:, None] + th * _GL_NODES[None, :]).reshape(-1)
        wx = np.tile(xh * _GL_WEIGHTS, nx_panels)
        wt = np.tile(th * _GL_WEIGHTS, nt_panels)
        f1 = field_on(tx, xx, a1, b1, None)
        f2 = field_on(tx, xx, np.asarray(a2, float), np.asarray(b2, float), forcing_eval)
        return float(wx @ (f1 * f2) @ wt)

    nx = max(4, int(np.ceil(mu[-1] * width / np.pi)) + 2)
    nt = max(4, int(np.ceil(2 * omega[-1] * T / np.pi)) + 2)
    prev = integrate(nx, nt)
    for _ in range(4):
        nx *= 2
        nt *= 2
        cur = integrate(nx, nt)
        if abs(cur - prev) <= 1e-11 * max(abs(cur), 1e-30):
            return cur
        prev = cur
    return cur


def rk4_batch(a0, beta0, freqs, cos_amp, sin_amp, T: float, dt: float):
    """Classical RK4 on a_m'' = -omega_m^2 a_m + g_m(t) for a problem batch.

    a0, beta0: (P, M) initial data in the library's energy coordinates.
    freqs: (P, J) forcing frequencies; cos_amp/sin_amp: (P, M, J).
    Returns (a(T), beta(T)) as (P, M) arrays with beta = velocity / omega.
    """
    a0 = np.asarray(a0, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)
    P, M = a0.shape
    m = np.arange(M)
    omega = ((2 * m + 1) * (np.pi / 2)) ** 2
    freqs = np.asarray(freqs, dtype=float)
    cos_amp = np.asarray(cos_amp, dtype=float)
    sin_amp = np.asarray(sin_amp, dtype=float)

    def g(t):
        ph = freqs * t
        return np.einsum("pmj,pj->pm", cos_amp, np.cos(ph)) + np.einsum(
            "pmj,pj->pm", sin_amp, np.sin(ph)
        )

    steps = int(round(T / dt))
    h = T / steps
    a = a0.copy()
    v = beta0 * omega
    w2 = omega * omega
    for i in range(steps):
        t = i * h
        g0 = g(t)
        gh = g(t + 0.5 * h)
        g1 = g(t + h)
        k1a = v
        k1v = -w2 * a + g0
        k2a = v + 0.5 * h * k1v
        k2v = -w2 * (a + 0.5 * h * k1a) + gh
        k3a = v + 0.5 * h * k2v
        k3v = -w2 * (a + 0.5 * h * k2a) + gh
        k4a = v + h * k3v
        k4v = -w2 * (a + h * k3a) + g1
        a = a + (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return a, v / omega
