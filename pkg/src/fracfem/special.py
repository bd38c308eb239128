"""Gamma-family special functions and closed-form data for the interval problem.

Everything here is scalar double-precision math; the heavy numerics live in
the quadrature/assembly modules. The hypergeometric evaluation is restricted
to real parameters and argument z in [0, 1), which is all the solver needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "FracParams",
    "frac_params",
    "gamma",
    "digamma",
    "frac_lap_constant",
    "ball_solution_constant",
    "ball_solution",
    "gauss_2f1",
    "bonito_rhs",
]

# Lanczos rational approximation, g = 7, 9 terms. Relative error is below
# 1e-13 on |x| <= 20 away from the poles (checked against a 40-digit oracle).
_LANCZOS_G = 7.5
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _gamma_right(x: float) -> float:
    # Core Lanczos evaluation, valid for x >= 0.5.
    z = x - 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def gamma(x: float) -> float:
    """Gamma function for real x, poles at the non-positive integers rejected."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"gamma pole at x={x!r}")
    if x < 0.5:
        # Reflection keeps the Lanczos core on the well-conditioned half line.
        return math.pi / (math.sin(math.pi * x) * _gamma_right(1.0 - x))
    return _gamma_right(x)


# Asymptotic (Bernoulli) coefficients for digamma, used for x >= 6.
_DIGAMMA_TAIL = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)


def digamma(x: float) -> float:
    """Digamma function for real x off the non-positive integers."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"digamma pole at x={x!r}")
    if x < 0.0:
        # Reflection: psi(x) = psi(1-x) - pi*cot(pi*x)
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    p = inv2
    for c in _DIGAMMA_TAIL:
        tail += c * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x + tail


@dataclass(frozen=True)
class FracParams:
    """Order s, dimension d and the normalization constant of the operator."""

    s: float
    d: int
    c_norm: float


def frac_params(s: float, d: int = 1) -> FracParams:
    """Build FracParams, validating the order and precomputing C_{d,s}."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"order s must lie in (0,1), got {s!r}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d!r}")
    return FracParams(s=float(s), d=int(d), c_norm=frac_lap_constant(d, s))


def frac_lap_constant(d: int, s: float) -> float:
    """Normalization constant 4^s Gamma(d/2+s) / (pi^{d/2} |Gamma(-s)|)."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"order s must lie in (0,1), got {s!r}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d!r}")
    return 4.0**s * gamma(d / 2.0 + s) / (math.pi ** (d / 2.0) * abs(gamma(-s)))


def ball_solution_constant(d: int, s: float) -> float:
    """Constant in the explicit ball solution, Gamma(d/2)/(2^{2s} Gamma((d+2s)/2) Gamma(1+s))."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"order s must lie in (0,1), got {s!r}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d!r}")
    return gamma(d / 2.0) / (2.0 ** (2.0 * s) * gamma((d + 2.0 * s) / 2.0) * gamma(1.0 + s))


def ball_solution(x, params: FracParams, R: float = 1.0, x0: float = 0.0):
    """Explicit solution c_{d,s} (R^2 - |x-x0|^2)_+^s of the unit right-hand side on a ball.

    Accepts scalars or numpy arrays.
    """
    import numpy as np

    c = ball_solution_constant(params.d, params.s)
    r2 = R * R - (np.asarray(x, dtype=float) - x0) ** 2
    out = c * np.maximum(r2, 0.0) ** params.s
    if np.isscalar(x) or getattr(x, "ndim", 0) == 0:
        return float(out)
    return out


# --- Gauss hypergeometric function on [0, 1) ---------------------------------

_SERIES_MAX_TERMS = 100_000
_EULER_MAX_TERMS = 1_000_000


def _is_nonpos_int(x: float, tol: float = 1e-12) -> bool:
    return x <= tol and abs(x - round(x)) < tol


def _2f1_series(a: float, b: float, c: float, z: float, max_terms: int = _SERIES_MAX_TERMS) -> float:
    """Plain power series; geometric convergence for |z| <= 1/2, terminating
    automatically when a or b is a non-positive integer."""
    total = 1.0
    term = 1.0
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
        if term == 0.0:
            return total
        if abs(term) < 1e-17 * abs(total) and z < 0.9:
            return total
        if abs(term) < 1e-18 * max(abs(total), 1e-300):
            return total
    raise RuntimeError(
        f"2F1 series did not converge: a={a}, b={b}, c={c}, z={z} after {max_terms} terms"
    )


def _2f1_log_case(a: float, b: float, c: float, z: float) -> float:
    """Connection formula for c = a + b (the log case), z in (1/2, 1)."""
    w = 1.0 - z
    lw = math.log(w)
    pref = gamma(c) / (gamma(a) * gamma(b))
    psi_a = digamma(a)
    psi_b = digamma(b)
    psi_n1 = digamma(1.0)
    coeff = 1.0
    total = 0.0
    for n in range(_SERIES_MAX_TERMS):
        bracket = 2.0 * psi_n1 - psi_a - psi_b - lw
        term = coeff * bracket
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300) and n > 2:
            return pref * total
        coeff *= (a + n) * (b + n) / ((n + 1.0) ** 2) * w
        psi_n1 += 1.0 / (n + 1.0)
        psi_a += 1.0 / (a + n)
        psi_b += 1.0 / (b + n)
    raise RuntimeError(f"2F1 log-case series did not converge: a={a}, b={b}, z={z}")


def _2f1_near_one(a: float, b: float, c: float, z: float) -> float:
    """Evaluation for z in (1/2, 1) via the 1-z connection formula.

    Degenerate c-a-b: an exact integer 0 goes through the log-case formula;
    other near-integer gaps fall back to the Euler-transformed series, which
    converges (slowly) for any z < 1.
    """
    eta = c - a - b
    if abs(eta) < 1e-12:
        return _2f1_log_case(a, b, c, z)
    if abs(eta - round(eta)) < 0.05:
        # Gamma prefactors of the connection formula lose accuracy here;
        # the Euler transform is slow but stable.
        t = _2f1_series(c - a, c - b, c, z, max_terms=_EULER_MAX_TERMS)
        return (1.0 - z) ** eta * t
    w = 1.0 - z
    t1 = gamma(c) * gamma(eta) / (gamma(c - a) * gamma(c - b)) * _2f1_series(a, b, 1.0 - eta, w)
    t2 = gamma(c) * gamma(-eta) / (gamma(a) * gamma(b)) * w**eta * _2f1_series(c - a, c - b, 1.0 + eta, w)
    return t1 + t2


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real parameters, 0 <= z < 1.

    Power series below z = 1/2, connection formula above; relative accuracy
    around 1e-10 or better throughout.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpos_int(c):
        raise ValueError(f"2F1 parameter c={c!r} is a non-positive integer")
    if not 0.0 <= z < 1.0:
        raise ValueError(f"2F1 argument z={z!r} outside [0, 1)")
    if z == 0.0:
        return 1.0
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return _2f1_series(a, b, c, z)  # terminating polynomial
    if z <= 0.5:
        return _2f1_series(a, b, c, z)
    return _2f1_near_one(a, b, c, z)


def bonito_rhs(x, params: FracParams):
    """Right-hand side whose exact solution is (1-|x|^2)_+ on the unit ball.

    Only defined for |x| < 1; unbounded near |x| = 1 once s >= 1/2.
    Accepts scalars or numpy arrays.
    """
    import numpy as np

    d, s = params.d, params.s
    pref = 4.0**s * gamma(d / 2.0 + s) / (gamma(d / 2.0) * gamma(2.0 - s))
    xs = np.asarray(x, dtype=float)
    if np.any(np.abs(xs) >= 1.0):
        raise ValueError("bonito_rhs only defined for |x| < 1")
    flat = np.atleast_1d(xs)
    out = np.empty(flat.shape, dtype=float)
    for idx, xi in enumerate(flat):
        out[idx] = pref * gauss_2f1(d / 2.0 + s, s - 1.0, d / 2.0, xi * xi)
    out = out.reshape(xs.shape)
    if np.isscalar(x) or getattr(x, "ndim", 0) == 0:
        return float(out)
    return out
