"""Weighted finite element space, basis evaluation and the two interpolators.

The discrete space is span{delta^s * psi_i} over all mesh nodes, boundary
nodes included: the quotient u/delta^s generally does not vanish on the
boundary, so those degrees of freedom carry information.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import Mesh1D
from .special import FracParams, frac_params
from .weight import WeightFn, delta_pow_s

__all__ = [
    "WfemSpace",
    "DiscreteSolution",
    "make_space",
    "hat_eval",
    "weighted_basis_eval",
    "interp_pl",
    "interp_weighted",
    "interp_weighted_from_values",
    "eval_pl",
    "eval_solution",
]


@dataclass(frozen=True)
class WfemSpace:
    """Mesh + weight + order: the weighted discrete space with nodal basis."""

    mesh: Mesh1D
    weight: WeightFn
    s: float
    params: FracParams

    @property
    def n_dofs(self) -> int:
        return self.mesh.n_elems + 1


def make_space(mesh: Mesh1D, weight: WeightFn, s: float) -> WfemSpace:
    return WfemSpace(mesh=mesh, weight=weight, s=float(s), params=frac_params(s, d=1))


@dataclass(frozen=True)
class DiscreteSolution:
    """Coefficients of u_h/delta^s in the hat basis."""

    space: WfemSpace
    coeffs: np.ndarray

    def __post_init__(self):
        if len(self.coeffs) != self.space.n_dofs:
            raise ValueError(
                f"coefficient vector has length {len(self.coeffs)}, expected {self.space.n_dofs}"
            )


def _call_on_array(g: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate a scalar-or-vectorized callable on an array."""
    try:
        vals = np.asarray(g(x), dtype=float)
        if vals.shape == x.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([float(g(float(xi))) for xi in x])


def hat_eval(mesh: Mesh1D, i: int, x):
    """Piecewise-linear hat of node i, clipped to the interval."""
    if not 0 <= i < mesh.n_elems + 1:
        raise IndexError(f"dof index {i} out of range")
    xs = np.asarray(x, dtype=float)
    val = np.maximum(0.0, 1.0 - np.abs(xs - mesh.nodes[i]) / mesh.h)
    val = np.where((xs >= mesh.a) & (xs <= mesh.b), val, 0.0)
    if np.isscalar(x) or getattr(x, "ndim", 0) == 0:
        return float(val)
    return val


def weighted_basis_eval(space: WfemSpace, i: int, x):
    """Weighted basis function delta(x)^s * psi_i(x)."""
    return delta_pow_s(space.weight, space.s, x) * hat_eval(space.mesh, i, x)


def interp_pl(g: Callable, mesh: Mesh1D) -> np.ndarray:
    """Nodal piecewise-linear interpolation: coefficients are g at the nodes."""
    vals = _call_on_array(g, np.asarray(mesh.nodes))
    if not np.all(np.isfinite(vals)):
        raise ValueError("interpoland is not finite at every mesh node")
    return vals


def interp_weighted(g_quotient: Callable, space: WfemSpace) -> DiscreteSolution:
    """Weighted interpolant delta^s * I_h(v/delta^s), from the quotient function.

    The caller supplies v/delta^s directly: at boundary nodes the quotient is
    a removable limit and evaluating v/delta^s numerically would be 0/0. All
    reference problems here have the quotient in closed form.
    """
    coeffs = interp_pl(g_quotient, space.mesh)
    return DiscreteSolution(space=space, coeffs=coeffs)


def interp_weighted_from_values(v: Callable, space: WfemSpace) -> DiscreteSolution:
    """Weighted interpolant from v itself, with extrapolated boundary quotients.

    Interior quotients are v/delta^s at the nodes; at the two boundary nodes
    the quotient is recovered by Richardson extrapolation from points at
    distances h/4 and h/8, so the result is approximate there (O(h^2) for a
    C^2 quotient).
    """
    mesh = space.mesh
    nodes = np.asarray(mesh.nodes)
    vals = _call_on_array(v, nodes)
    dpow = delta_pow_s(space.weight, space.s, nodes)
    coeffs = np.empty_like(vals)
    coeffs[1:-1] = vals[1:-1] / dpow[1:-1]

    def _edge_quotient(x_off: np.ndarray) -> float:
        q = _call_on_array(v, x_off) / delta_pow_s(space.weight, space.s, x_off)
        return float(2.0 * q[1] - q[0])  # Richardson from h/4, h/8

    h = mesh.h
    coeffs[0] = _edge_quotient(np.array([mesh.a + h / 4.0, mesh.a + h / 8.0]))
    coeffs[-1] = _edge_quotient(np.array([mesh.b - h / 4.0, mesh.b - h / 8.0]))
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("weighted interpolation produced non-finite coefficients")
    return DiscreteSolution(space=space, coeffs=coeffs)


def eval_pl(coeffs: np.ndarray, mesh: Mesh1D, x):
    """Evaluate the piecewise-linear function with given nodal values; zero outside."""
    xs = np.asarray(x, dtype=float)
    val = np.interp(xs, mesh.nodes, coeffs)
    val = np.where((xs >= mesh.a) & (xs <= mesh.b), val, 0.0)
    if np.isscalar(x) or getattr(x, "ndim", 0) == 0:
        return float(val)
    return val


def eval_solution(sol: DiscreteSolution, x):
    """Evaluate u_h(x) = delta(x)^s * sum_i c_i psi_i(x); zero outside the interval."""
    space = sol.space
    xs = np.asarray(x, dtype=float)
    lin = np.interp(xs, space.mesh.nodes, sol.coeffs)
    out = delta_pow_s(space.weight, space.s, xs) * lin
    if np.isscalar(x) or getattr(x, "ndim", 0) == 0:
        return float(out)
    return out
