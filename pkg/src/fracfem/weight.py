"""Regularized distance functions and the exterior (killing) potential.

The weight delta is comparable to the distance to the complement of the
interval, vanishes on the boundary and is smooth inside. Its closed-form
factorizations delta = (x-a)*q_left = (b-x)*q_right are what the singular
quadrature uses to strip endpoint powers exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import FracParams

__all__ = [
    "WeightFn",
    "make_weight",
    "delta_eval",
    "delta_pow_s",
    "delta_quotient",
    "delta_deriv",
    "killing_potential",
    "check_weight_assumption",
    "WeightCheckReport",
    "WEIGHT_KINDS",
]

WEIGHT_KINDS = ("poly2", "poly4", "dist")

# Integer codes shared with the jit kernels.
KIND_CODES = {"poly2": 0, "poly4": 1, "dist": 2, "unit": 3}


@dataclass(frozen=True)
class WeightFn:
    """Weight selector: kind, ball radius R, center x0 and smoothness order sigma.

    kind "unit" (delta identically 1 on the closed interval) is a testing hook
    for degenerate-weight consistency checks; it is rejected by make_weight and
    by the assembly routines.
    """

    kind: str
    R: float
    x0: float
    sigma: float

    @property
    def a(self) -> float:
        return self.x0 - self.R

    @property
    def b(self) -> float:
        return self.x0 + self.R


def make_weight(kind: str, a: float, b: float) -> WeightFn:
    """Weight anchored to the interval (a, b): R = (b-a)/2, x0 = midpoint."""
    if kind not in WEIGHT_KINDS:
        raise ValueError(f"unknown weight kind {kind!r}; expected one of {WEIGHT_KINDS}")
    sigma = 1.0 if kind == "dist" else math.inf
    return WeightFn(kind=kind, R=(b - a) / 2.0, x0=(a + b) / 2.0, sigma=sigma)


def delta_eval(w: WeightFn, x):
    """delta(x), clamped to zero outside the closed interval."""
    xs = np.asarray(x, dtype=float)
    r = xs - w.x0
    if w.kind == "poly2":
        val = w.R**2 - r**2
    elif w.kind == "poly4":
        val = w.R**4 - r**4
    elif w.kind == "dist":
        val = np.minimum(xs - w.a, w.b - xs)
    elif w.kind == "unit":
        val = np.where((xs >= w.a) & (xs <= w.b), 1.0, 0.0)
    else:
        raise ValueError(f"unknown weight kind {w.kind!r}")
    out = np.maximum(val, 0.0)
    if np.isscalar(x) or getattr(x, "ndim", 0) == 0:
        return float(out)
    return out


def delta_pow_s(w: WeightFn, s: float, x):
    """delta(x)^s; continuous, zero outside the interval."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"order s must lie in (0,1), got {s!r}")
    d = delta_eval(w, x)
    return d**s


def delta_quotient(w: WeightFn, x, side: str):
    """Closed-form quotient delta(x)/(x-a) (side "left") or delta(x)/(b-x) ("right").

    Analytic and strictly positive on the closure of the respective half of
    the interval; this is the smooth factor left over once the boundary power
    is handed to a Gauss-Jacobi rule.
    """
    xs = np.asarray(x, dtype=float)
    r = xs - w.x0
    if w.kind == "poly2":
        val = (w.b - xs) if side == "left" else (xs - w.a)
    elif w.kind == "poly4":
        other = (w.b - xs) if side == "left" else (xs - w.a)
        val = other * (w.R**2 + r**2)
    elif w.kind == "dist":
        if side == "left":
            val = np.where(xs <= w.x0, 1.0, (w.b - xs) / np.maximum(xs - w.a, 1e-300))
        else:
            val = np.where(xs >= w.x0, 1.0, (xs - w.a) / np.maximum(w.b - xs, 1e-300))
    else:
        raise ValueError(f"no boundary factorization for weight kind {w.kind!r}")
    if np.isscalar(x) or getattr(x, "ndim", 0) == 0:
        return float(val)
    return val


def delta_deriv(w: WeightFn, x, order: int = 1):
    """Closed-form derivative of delta inside the interval (a.e. for "dist")."""
    xs = np.asarray(x, dtype=float)
    r = xs - w.x0
    if w.kind == "poly2":
        val = -2.0 * r if order == 1 else np.full_like(xs, -2.0)
    elif w.kind == "poly4":
        val = -4.0 * r**3 if order == 1 else -12.0 * r**2
    elif w.kind == "dist":
        val = np.where(xs < w.x0, 1.0, -1.0) if order == 1 else np.zeros_like(xs)
    elif w.kind == "unit":
        val = np.zeros_like(xs)
    else:
        raise ValueError(f"unknown weight kind {w.kind!r}")
    if order not in (1, 2):
        raise ValueError("only first and second derivatives are provided")
    if np.isscalar(x) or getattr(x, "ndim", 0) == 0:
        return float(val)
    return val


def killing_potential(x, params: FracParams, a: float, b: float):
    """Exterior potential kappa(x) = C/(2s) * ((x-a)^{-2s} + (b-x)^{-2s}) on (a, b)."""
    xs = np.asarray(x, dtype=float)
    if np.any((xs <= a) | (xs >= b)):
        raise ValueError(f"killing potential only defined inside ({a}, {b})")
    s = params.s
    fac = params.c_norm / (2.0 * s)
    out = fac * ((xs - a) ** (-2.0 * s) + (b - xs) ** (-2.0 * s))
    if np.isscalar(x) or getattr(x, "ndim", 0) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class WeightCheckReport:
    """Empirical constants from the weight-assumption diagnostic."""

    c_comparability: float
    deriv_ratios: tuple[tuple[float, float], ...]  # (c1, c2) per refinement round
    flagged: bool
    flagged_orders: tuple[int, ...]


def _diag_grid(a: float, b: float, n: int) -> np.ndarray:
    """Uniform interior samples plus geometric refinement toward both endpoints."""
    base = np.linspace(a, b, n + 2)[1:-1]
    scale = b - a
    tail = scale * 0.25 * 2.0 ** (-np.arange(1, 26, dtype=float))
    pts = np.concatenate([base, a + tail, b - tail])
    return np.unique(pts)


def check_weight_assumption(w: WeightFn, sigma: float, n_samples: int) -> WeightCheckReport:
    """Grid diagnostic for the comparability and derivative-growth conditions.

    Derivatives are estimated with central finite differences (so kinks show
    up as blow-ups that closed forms would hide). The blow-up heuristic flags
    an order j when the empirical constant grows monotonically by more than a
    fixed factor under three grid refinements. Diagnostic only; a full proof
    of the assumption is symbolic, not numeric.
    """
    if n_samples < 10:
        raise ValueError(f"need n_samples >= 10, got {n_samples!r}")
    a, b = w.a, w.b
    grid = _diag_grid(a, b, n_samples)
    d_omega = np.minimum(grid - a, b - grid)
    delta = delta_eval(w, grid)
    ratios = np.concatenate([delta / d_omega, d_omega / delta])
    c_comp = float(np.max(ratios))

    rounds = []
    for level in range(3):
        n = n_samples * 2**level
        step = (b - a) / (8.0 * n)
        # Cluster around the center so an interior kink always straddles a stencil.
        g = np.concatenate([_diag_grid(a, b, n), w.x0 + step * np.array([-0.5, -0.25, 0.25, 0.5])])
        g = g[(g - step > a) & (g + step < b)]
        dl = delta_eval(w, g - step)
        dc = delta_eval(w, g)
        dr = delta_eval(w, g + step)
        d1 = np.abs((dr - dl) / (2.0 * step))
        d2 = np.abs((dr - 2.0 * dc + dl) / step**2)
        cs = []
        for j, dj in ((1, d1), (2, d2)):
            # The growth condition only binds for orders beyond sigma; below
            # that, plain boundedness (smoothness inside the interval) is
            # what the assumption's C-infinity clause requires.
            if math.isfinite(sigma) and j > sigma:
                cs.append(float(np.max(dj * dc ** (j - sigma))))
            else:
                cs.append(float(np.max(dj)))
        rounds.append((cs[0], cs[1]))

    flagged_orders = []
    for j in range(2):
        vals = [r[j] for r in rounds]
        growing = all(vals[i + 1] > 1.2 * vals[i] for i in range(len(vals) - 1))
        if growing and vals[-1] > 3.0 * vals[0]:
            flagged_orders.append(j + 1)
    return WeightCheckReport(
        c_comparability=c_comp,
        deriv_ratios=tuple(rounds),
        flagged=bool(flagged_orders),
        flagged_orders=tuple(flagged_orders),
    )
