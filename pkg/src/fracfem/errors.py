"""Error norms and observed convergence rates.

The energy seminorm error uses the Galerkin identity
[u - u_h]^2 = int f u - int f u_h, which is exact under Galerkin
orthogonality and costs O(N) once the system is assembled. The direct
double-integral seminorm stays available as a small-mesh oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .assembly import GRADE_PANELS, GRADE_RATIO, LoadVector, assemble_load
from .basis import DiscreteSolution, WfemSpace, _call_on_array, eval_solution
from .quadrature import adaptive_oracle_integral, gauss_jacobi, _leggauss
from .special import frac_lap_constant
from .weight import killing_potential

__all__ = [
    "ErrorReport",
    "make_report",
    "l2_error",
    "hs_error_energy",
    "hs_seminorm_direct",
    "observed_rates",
    "EnergyIdentityError",
]


class EnergyIdentityError(RuntimeError):
    pass


@dataclass(frozen=True)
class ErrorReport:
    """Per-level errors and incremental-ratio rates for one fractional order."""

    s: float
    levels: tuple[int, ...]
    hs: tuple[float, ...]
    n_dofs: tuple[int, ...]
    err_hs: tuple[float, ...]
    err_l2: tuple[float, ...]
    rates_hs: tuple[float, ...] = field(default=())
    rates_l2: tuple[float, ...] = field(default=())


def make_report(s, levels, hs, n_dofs, err_hs, err_l2) -> ErrorReport:
    hs = tuple(float(h) for h in hs)
    if any(hs[i + 1] >= hs[i] for i in range(len(hs) - 1)):
        raise ValueError("mesh sizes must be strictly decreasing across levels")
    if any(e < 0 for e in err_hs) or any(e < 0 for e in err_l2):
        raise ValueError("errors must be nonnegative")
    return ErrorReport(
        s=float(s),
        levels=tuple(int(k) for k in levels),
        hs=hs,
        n_dofs=tuple(int(n) for n in n_dofs),
        err_hs=tuple(float(e) for e in err_hs),
        err_l2=tuple(float(e) for e in err_l2),
        rates_hs=tuple(float(r) for r in observed_rates(err_hs, hs)) if len(hs) > 1 else (),
        rates_l2=tuple(float(r) for r in observed_rates(err_l2, hs)) if len(hs) > 1 else (),
    )


def observed_rates(errors: Sequence[float], hs: Sequence[float]) -> np.ndarray:
    """Incremental ratios (log e_{k+1} - log e_k)/(log h_{k+1} - log h_k)."""
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if errors.shape != hs.shape or errors.size < 2:
        raise ValueError("need equally many errors and mesh sizes, at least two")
    if np.any(errors <= 0):
        raise ValueError("rates require strictly positive errors")
    if np.any(np.diff(hs) >= 0):
        raise ValueError("mesh sizes must be strictly decreasing")
    return np.diff(np.log(errors)) / np.diff(np.log(hs))


def _element_error_nodes(space: WfemSpace, e: int, n: int):
    """Quadrature for integrating a squared error over element e.

    Boundary elements use geometric panels toward the endpoint with a
    Gauss-Jacobi(2s) tip panel absorbing the delta^{2s} leading power of the
    squared error; interior elements use plain Legendre.
    """
    mesh = space.mesh
    p, q = mesh.element(e)
    glx, glw = _leggauss(n)
    side = "left" if e == 0 else ("right" if e == mesh.n_elems - 1 else None)
    if side is None:
        cuts = [p, q]
        if space.weight.kind == "dist" and p < space.weight.x0 < q:
            cuts = [p, space.weight.x0, q]
        xs_all, ws_all = [], []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            half = 0.5 * (hi - lo)
            xs_all.append(0.5 * (lo + hi) + half * glx)
            ws_all.append(half * glw)
        return np.concatenate(xs_all), np.concatenate(ws_all), None
    gj = gauss_jacobi(n, 0.0, 2.0 * space.s)
    he = q - p
    edges = [0.0] + [GRADE_RATIO**j for j in range(GRADE_PANELS - 1, -1, -1)]
    xs_all, ws_all, pow_all = [], [], []
    for j in range(len(edges) - 1):
        lo_t, hi_t = edges[j] * he, edges[j + 1] * he
        half = 0.5 * (hi_t - lo_t)
        if j == 0:
            ts = half * (1.0 + gj.nodes)
            ws = gj.weights * half ** (2.0 * space.s + 1.0)
            strip = 2.0 * space.s
        else:
            ts = 0.5 * (lo_t + hi_t) + half * glx
            ws = half * glw
            strip = 0.0
        xs = p + ts if side == "left" else q - ts
        xs_all.append(xs)
        ws_all.append(ws)
        pow_all.append(np.full(xs.shape, strip))
    dist = np.abs((np.concatenate(xs_all) - p) if side == "left" else (q - np.concatenate(xs_all)))
    return np.concatenate(xs_all), np.concatenate(ws_all), (np.concatenate(pow_all), dist)


def l2_error(sol: DiscreteSolution, u_exact: Callable, n_quad: int = 16) -> float:
    """L2 norm of u_h - u_exact over the interval."""
    space = sol.space
    total = 0.0
    for e in range(space.mesh.n_elems):
        xs, ws, strip = _element_error_nodes(space, e, n_quad)
        diff = eval_solution(sol, xs) - _call_on_array(u_exact, xs)
        sq = diff * diff
        if strip is not None:
            powv, dist = strip
            # On the Jacobi tip panel the rule provides dist^{2s}; divide it
            # out of the sampled integrand.
            mask = powv > 0
            sq = np.where(mask, sq / np.where(mask, dist**powv, 1.0), sq)
        total += float(np.sum(ws * sq))
    return math.sqrt(max(total, 0.0))


def hs_error_energy(
    space: WfemSpace,
    sol: DiscreteSolution,
    f: Callable,
    lin_f_ustar: float,
    load: LoadVector | None = None,
    n_quad: int = 16,
) -> float:
    """Energy-seminorm error sqrt(int f u* - int f u_h) via Galerkin orthogonality.

    lin_f_ustar must hold int_Omega f u* to high absolute accuracy; the
    discrete term is b . c with the same load quadrature used in assembly.
    """
    if load is None:
        load = assemble_load(space, f, n_quad=n_quad)
    discrete = float(load.values @ sol.coeffs)
    diff = lin_f_ustar - discrete
    if diff < -1e-10 * max(abs(lin_f_ustar), 1.0):
        raise EnergyIdentityError(
            f"energy identity produced {diff!r} < 0: quadrature inconsistency"
        )
    if diff < 0.0:
        if diff < -1e-12:
            warnings.warn(f"energy identity slightly negative ({diff:.3e}); clamping to zero")
        diff = 0.0
    return math.sqrt(diff)


def hs_seminorm_direct(
    v: Callable,
    s: float,
    a: float,
    b: float,
    tol: float = 1e-8,
    singular_points: Sequence[float] = (),
) -> float:
    """Brute-force Sobolev-Slobodeckij seminorm of a function supported in [a, b].

    Evaluates C/2 * iint (v(x)-v(y))^2 |x-y|^{-1-2s} over the square plus the
    killing-potential tail term, both with the adaptive oracle. Slow; meant
    for small cross-checks of the energy identity.
    """
    C = frac_lap_constant(1, s)
    from .special import frac_params

    params = frac_params(s)

    def f2(x: float, ys: np.ndarray) -> np.ndarray:
        dv = _call_on_array(v, np.asarray([x]))[0] - _call_on_array(v, ys)
        return dv * dv * np.abs(x - ys) ** (-1.0 - 2.0 * s)

    i2 = adaptive_oracle_integral(
        f2,
        ((a, b), (a, b)),
        tol / max(C, 1.0),
        singular_points=singular_points,
        diagonal=True,
        y_singular_points=list(singular_points),
    )

    def tail(xs: np.ndarray) -> np.ndarray:
        vv = _call_on_array(v, xs)
        return vv * vv * killing_potential(xs, params, a, b)

    ik = adaptive_oracle_integral(tail, (a, b), tol / 2.0, singular_points=singular_points)
    total = 0.5 * C * i2 + ik
    return math.sqrt(max(total, 0.0))
