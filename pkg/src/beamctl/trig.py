"""Exact time integrals of trigonometric envelopes.

Every time signal handled by the solvers is a finite combination of
cos(w t), sin(w t), t cos(w t) and t sin(w t).  Products of two such terms
reduce by product-to-sum identities to the primitive integrals

    int_0^T t^p cos(x t) dt,   int_0^T t^p sin(x t) dt,   p = 0, 1, 2,

which are evaluated in closed form with power-series branches guarding the
small |x T| regime where the closed forms cancel catastrophically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "int_cos",
    "int_sin",
    "int_tcos",
    "int_tsin",
    "int_t2cos",
    "int_t2sin",
    "nearly_equal",
    "TrigSignal",
]

# Below this value of |x|*T the t-weighted primitives switch to power series;
# at the seam the two branches agree to ~1e-14 relative.
_SERIES_CUT = 0.5

# Resonance classification threshold for Duhamel branches.
_RESONANCE_RTOL = 1e-9


def nearly_equal(w: float, v: float, rtol: float = _RESONANCE_RTOL) -> bool:
    """True when two frequencies are indistinguishable at solver tolerance."""
    return abs(w - v) < rtol * max(abs(w), abs(v), 1.0)


def _branch(x, T, closed, series):
    """Select closed form away from the origin and series inside it."""
    x = np.asarray(x, dtype=float)
    T = np.asarray(T, dtype=float)
    small = np.abs(x) * T < _SERIES_CUT
    if np.ndim(x) == 0 and np.ndim(T) == 0:
        return float(series(x, T)) if small else float(closed(x, T))
    # mask each branch's input so the discarded lane cannot overflow
    x_closed = np.where(small, 1.0, x)
    x_series = np.where(small, x, 0.0)
    return np.where(small, series(x_series, T), closed(x_closed, T))


def int_cos(x, T):
    """int_0^T cos(x t) dt = sin(x T) / x, with limit T at x = 0."""
    x = np.asarray(x, dtype=float)
    T = np.asarray(T, dtype=float)
    zero = x == 0.0
    if np.ndim(x) == 0 and np.ndim(T) == 0:
        return float(T) if zero else float(np.sin(x * T) / x)
    xs = np.where(zero, 1.0, x)
    return np.where(zero, T, np.sin(xs * T) / xs)


def int_sin(x, T):
    """int_0^T sin(x t) dt = 2 sin^2(x T / 2) / x, with limit 0 at x = 0.

    The half-angle form avoids the 1 - cos cancellation.
    """
    x = np.asarray(x, dtype=float)
    T = np.asarray(T, dtype=float)
    zero = x == 0.0
    if np.ndim(x) == 0 and np.ndim(T) == 0:
        return 0.0 if zero else float(2.0 * np.sin(x * T / 2) ** 2 / x)
    xs = np.where(zero, 1.0, x)
    return np.where(zero, 0.0, 2.0 * np.sin(xs * T / 2) ** 2 / xs)


def int_tcos(x, T):
    """int_0^T t cos(x t) dt."""
    return _branch(
        x,
        T,
        lambda x, T: -2.0 * np.sin(x * T / 2) ** 2 / (x * x) + T * np.sin(x * T) / x,
        _tcos_series,
    )


def _tcos_series(x, T):
    # int t cos(xt) dt = sum_k (-1)^k x^(2k) T^(2k+2) / ((2k)! (2k+2))
    x = np.asarray(x, dtype=float)
    T = np.asarray(T, dtype=float)
    acc = np.zeros(np.broadcast(x, T).shape)
    term = np.broadcast_to(T * T / 2.0, acc.shape).copy()
    for k in range(1, 24):
        acc = acc + term
        term = term * (-(x * x) * (T * T)) * (2 * k) / ((2 * k - 1) * (2 * k) * (2 * k + 2))
        if np.all(np.abs(term) <= 1e-18 * (np.abs(acc) + 1e-300)):
            break
    return acc + term


def _tsin_series(x, T):
    # int t sin(xt) dt = sum_k (-1)^k x^(2k+1) T^(2k+3) / ((2k+1)! (2k+3))
    x = np.asarray(x, dtype=float)
    T = np.asarray(T, dtype=float)
    acc = np.zeros(np.broadcast(x, T).shape)
    term = np.broadcast_to(x * T ** 3 / 3.0, acc.shape).copy()
    for k in range(1, 24):
        acc = acc + term
        term = term * (-(x * x) * (T * T)) * (2 * k + 1) / ((2 * k) * (2 * k + 1) * (2 * k + 3))
        if np.all(np.abs(term) <= 1e-18 * (np.abs(acc) + 1e-300)):
            break
    return acc + term


def _t2cos_series(x, T):
    # int t^2 cos(xt) dt = sum_k (-1)^k x^(2k) T^(2k+3) / ((2k)! (2k+3))
    x = np.asarray(x, dtype=float)
    T = np.asarray(T, dtype=float)
    acc = np.zeros(np.broadcast(x, T).shape)
    term = np.broadcast_to(T ** 3 / 3.0, acc.shape).copy()
    for k in range(1, 24):
        acc = acc + term
        term = term * (-(x * x) * (T * T)) * (2 * k + 1) / ((2 * k - 1) * (2 * k) * (2 * k + 3))
        if np.all(np.abs(term) <= 1e-18 * (np.abs(acc) + 1e-300)):
            break
    return acc + term


def _t2sin_series(x, T):
    # int t^2 sin(xt) dt = sum_k (-1)^k x^(2k+1) T^(2k+4) / ((2k+1)! (2k+4))
    x = np.asarray(x, dtype=float)
    T = np.asarray(T, dtype=float)
    acc = np.zeros(np.broadcast(x, T).shape)
    term = np.broadcast_to(x * T ** 4 / 4.0, acc.shape).copy()
    for k in range(1, 24):
        acc = acc + term
        term = term * (-(x * x) * (T * T)) * (2 * k + 2) / ((2 * k) * (2 * k + 1) * (2 * k + 4))
        if np.all(np.abs(term) <= 1e-18 * (np.abs(acc) + 1e-300)):
            break
    return acc + term


def int_tsin(x, T):
    """int_0^T t sin(x t) dt."""
    return _branch(
        x,
        T,
        lambda x, T: np.sin(x * T) / (x * x) - T * np.cos(x * T) / x,
        _tsin_series,
    )


def int_t2cos(x, T):
    """int_0^T t^2 cos(x t) dt."""
    return _branch(
        x,
        T,
        lambda x, T: (T * T - 2.0 / (x * x)) * np.sin(x * T) / x
        + 2.0 * T * np.cos(x * T) / (x * x),
        _t2cos_series,
    )


def int_t2sin(x, T):
    """int_0^T t^2 sin(x t) dt."""
    return _branch(
        x,
        T,
        lambda x, T: (2.0 - (x * T) ** 2) * np.cos(x * T) / x ** 3
        + 2.0 * T * np.sin(x * T) / (x * x)
        - 2.0 / x ** 3,
        _t2sin_series,
    )


# kind -> (t power, base trig); base trig is "c" for cosine, "s" for sine
_KINDS = {"cos": (0, "c"), "sin": (0, "s"), "tcos": (1, "c"), "tsin": (1, "s")}

_COS_PRIMS = (int_cos, int_tcos, int_t2cos)
_SIN_PRIMS = (int_sin, int_tsin, int_t2sin)


def _pair_integral(kind1: str, w1: float, kind2: str, w2: float, T: float) -> float:
    """int_0^T term1(t) term2(t) dt for two basis terms."""
    p1, t1 = _KINDS[kind1]
    p2, t2 = _KINDS[kind2]
    p = p1 + p2
    C = _COS_PRIMS[p]
    S = _SIN_PRIMS[p]
    if t1 == "c" and t2 == "c":
        # cos a cos b = (cos(a-b) + cos(a+b)) / 2
        return 0.5 * (C(w1 - w2, T) + C(w1 + w2, T))
    if t1 == "s" and t2 == "s":
        # sin a sin b = (cos(a-b) - cos(a+b)) / 2
        return 0.5 * (C(w1 - w2, T) - C(w1 + w2, T))
    if t1 == "c":
        # cos a sin b = (sin(a+b) - sin(a-b)) / 2; S is odd in its frequency
        return 0.5 * (S(w1 + w2, T) + S(w2 - w1, T))
    # sin a cos b: swap roles
    return 0.5 * (S(w1 + w2, T) + S(w1 - w2, T))


@dataclass
class TrigSignal:
    """Finite combination of cos/sin/t*cos/t*sin terms with fixed frequencies.

    Terms are keyed by (frequency, kind).  Supports pointwise evaluation,
    differentiation and exact integration of products over [0, T], which is
    all the forced beam solver needs.
    """

    terms: dict[tuple[float, str], float] = field(default_factory=dict)

    def add(self, omega: float, kind: str, coef: float) -> "TrigSignal":
        """Accumulate coef * kind(omega t); drops structural zero terms."""
        if kind not in _KINDS:
            raise ValueError(f"unknown term kind {kind!r}")
        if coef == 0.0:
            return self
        # sin(0 t) and t sin(0 t) vanish identically
        if omega == 0.0 and kind in ("sin", "tsin"):
            return self
        key = (float(omega), kind)
        self.terms[key] = self.terms.get(key, 0.0) + float(coef)
        return self

    def scaled(self, factor: float) -> "TrigSignal":
        out = TrigSignal()
        for key, coef in self.terms.items():
            out.terms[key] = coef * factor
        return out

    def __add__(self, other: "TrigSignal") -> "TrigSignal":
        out = TrigSignal(dict(self.terms))
        for (w, kind), coef in other.terms.items():
            out.add(w, kind, coef)
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for (w, kind), coef in self.terms.items():
            p, trig = _KINDS[kind]
            base = np.cos(w * t) if trig == "c" else np.sin(w * t)
            if p:
                base = t * base
            out = out + coef * base
        return float(out) if out.ndim == 0 else out

    def deriv(self) -> "TrigSignal":
        """Time derivative; closed under the term basis."""
        out = TrigSignal()
        for (w, kind), coef in self.terms.items():
            if kind == "cos":
                out.add(w, "sin", -w * coef)
            elif kind == "sin":
                out.add(w, "cos", w * coef)
            elif kind == "tcos":
                out.add(w, "cos", coef)
                out.add(w, "tsin", -w * coef)
            else:  # tsin
                out.add(w, "sin", coef)
                out.add(w, "tcos", w * coef)
        return out

    def integral_product(self, other: "TrigSignal", T: float) -> float:
        """int_0^T self(t) * other(t) dt, exactly."""
        total = 0.0
        for (w1, k1), c1 in self.terms.items():
            for (w2, k2), c2 in other.terms.items():
                total += c1 * c2 * _pair_integral(k1, w1, k2, w2, T)
        return total

    def integral(self, T: float) -> float:
        """int_0^T self(t) dt, exactly."""
        total = 0.0
        for (w, kind), coef in self.terms.items():
            p, trig = _KINDS[kind]
            prim = _COS_PRIMS[p] if trig == "c" else _SIN_PRIMS[p]
            total += coef * prim(w, T)
        return total
