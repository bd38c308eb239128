"""Gauss rules, singular element-pair integration and the adaptive oracle.

The production path integrates element pairs with fixed-order tensor rules
after exact desingularization (see _kernels). The adaptive oracle is an
independent cross-check: nested 1D adaptive bisection with fixed-order
Legendre panels, dyadically refining toward flagged singular points and the
diagonal. The two share nothing beyond Legendre nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .basis import WfemSpace
from .mesh import DISJOINT, element_pair_class
from .weight import KIND_CODES

__all__ = [
    "QuadRule",
    "gauss_legendre",
    "gauss_jacobi",
    "singular_pair_integral",
    "adaptive_oracle_integral",
    "QuadratureConvergenceError",
    "SELF_CHECK_TOL",
]

SELF_CHECK_TOL = 1e-7
_MAX_GAUSS = 64


class QuadratureConvergenceError(RuntimeError):
    """Adaptive integration ran out of panel budget; carries the best estimate."""

    def __init__(self, message: str, best: float, err_bound: float):
        super().__init__(f"{message} (best estimate {best!r}, error bound {err_bound!r})")
        self.best = best
        self.err_bound = err_bound


@dataclass(frozen=True)
class QuadRule:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    order: int


@lru_cache(maxsize=None)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int) -> QuadRule:
    """n-point Gauss-Legendre rule on [-1, 1]."""
    n = int(n)
    if not 1 <= n <= _MAX_GAUSS:
        raise ValueError(f"Legendre order must be in [1, {_MAX_GAUSS}], got {n!r}")
    x, w = _leggauss(n)
    return QuadRule(nodes=x, weights=w, kind="legendre", order=n)


@lru_cache(maxsize=None)
def _jacobi_nodes_weights(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    # Golub-Welsch: eigen-decomposition of the Jacobi recurrence matrix.
    ab = alpha + beta
    k = np.arange(n, dtype=float)
    diag = np.empty(n)
    diag[0] = (beta - alpha) / (ab + 2.0)
    if n > 1:
        kk = k[1:]
        diag[1:] = (beta**2 - alpha**2) / ((2.0 * kk + ab) * (2.0 * kk + ab + 2.0))
    off = np.empty(max(n - 1, 0))
    if n > 1:
        off[0] = math.sqrt(4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) ** 2 * (3.0 + ab)))
        if n > 2:
            kk = k[2:]
            off[1:] = np.sqrt(
                4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab)
                / ((2.0 * kk + ab) ** 2 * ((2.0 * kk + ab) ** 2 - 1.0))
            )
    T = np.diag(diag)
    if n > 1:
        T += np.diag(off, 1) + np.diag(off, -1)
    vals, vecs = np.linalg.eigh(T)
    mu0 = math.exp(
        (ab + 1.0) * math.log(2.0)
        + math.lgamma(alpha + 1.0)
        + math.lgamma(beta + 1.0)
        - math.lgamma(ab + 2.0)
    )
    w = mu0 * vecs[0, :] ** 2
    vals.setflags(write=False)
    w.setflags(write=False)
    return vals, w


def gauss_jacobi(n: int, alpha: float, beta: float) -> QuadRule:
    """n-point Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1]."""
    n = int(n)
    if n < 1:
        raise ValueError(f"Jacobi order must be >= 1, got {n!r}")
    if alpha <= -1.0 or beta <= -1.0:
        raise ValueError(f"Jacobi exponents must exceed -1, got alpha={alpha!r}, beta={beta!r}")
    x, w = _jacobi_nodes_weights(n, float(alpha), float(beta))
    return QuadRule(nodes=x, weights=w, kind=f"jacobi({alpha},{beta})", order=n)


@lru_cache(maxsize=None)
def _rule_pack(s: float, n: int):
    """Packed reference rules consumed by the jit kernels.

    All Jacobi rules carry their singular weight at the +1... left end in the
    (1+x)^beta convention; kernels mirror node mappings where the singular
    end is on the right.
    """
    glx, glw = _leggauss(n)
    packs = [glx, glw]
    for beta in (s, 2.0 * s, 1.0 - 2.0 * s, 2.0 - 2.0 * s):
        jx, jw = _jacobi_nodes_weights(n, 0.0, beta)
        packs.extend([jx, jw])
    return tuple(np.ascontiguousarray(p) for p in packs)


def _order_chain(n: int) -> tuple[int, int, int]:
    n1 = max(2, min(int(n), _MAX_GAUSS))
    n2 = min(2 * n1, _MAX_GAUSS)
    n3 = min(4 * n1, _MAX_GAUSS)
    return n1, n2, n3


def _space_scalars(space: WfemSpace):
    mesh = space.mesh
    w = space.weight
    if w.kind not in KIND_CODES or w.kind == "unit":
        raise ValueError(f"weight kind {w.kind!r} is not assemblable")
    return mesh.n_elems, mesh.a, mesh.b, mesh.h, space.s, KIND_CODES[w.kind], w.R, w.x0


def singular_pair_integral(space: WfemSpace, i: int, j: int, k: int, l: int, n: int = 16) -> float:
    """Pair contribution iint_{K_k x K_l} (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) |x-y|^{-1-2s}.

    Computed at two quadrature orders with an embedded agreement check,
    escalating once through a doubled order and finally to the adaptive
    oracle if the check keeps failing.
    """
    nel, a, b, h, s, kind, R, x0 = _space_scalars(space)
    if not (0 <= k < nel and 0 <= l < nel):
        raise IndexError(f"element indices ({k}, {l}) out of range")
    if not (0 <= i <= nel and 0 <= j <= nel):
        raise IndexError(f"dof indices ({i}, {j}) out of range")
    n1, n2, n3 = _order_chain(n)
    B1, dofs, nd = _kernels._pair_block(k, l, nel, a, b, h, s, kind, R, x0, *_rule_pack(s, n1))
    B2, _, _ = _kernels._pair_block(k, l, nel, a, b, h, s, kind, R, x0, *_rule_pack(s, n2))
    dofs = [int(d) for d in dofs[:nd]]
    if i not in dofs or j not in dofs:
        return 0.0
    ii, jj = dofs.index(i), dofs.index(j)
    d, m = _kernels._block_diff(B1, B2, nd)
    if d <= SELF_CHECK_TOL * max(m, 1e-300) or d <= 1e-300:
        return float(B2[ii, jj])
    B3, _, _ = _kernels._pair_block(k, l, nel, a, b, h, s, kind, R, x0, *_rule_pack(s, n3))
    d2, m3 = _kernels._block_diff(B2, B3, nd)
    if d2 <= SELF_CHECK_TOL * max(m3, 1e-300) or d2 <= 1e-300:
        return float(B3[ii, jj])
    scale = max(m3, 1e-12)
    return oracle_pair_entry(space, i, j, k, l, tol=1e-9 * scale)


def oracle_pair_entry(space: WfemSpace, i: int, j: int, k: int, l: int, tol: float = 1e-10) -> float:
    """Adaptive-oracle evaluation of one pair entry (slow path and cross-check)."""
    from .basis import weighted_basis_eval

    mesh = space.mesh
    s = space.s
    kx0, kx1 = mesh.element(k)
    lx0, lx1 = mesh.element(l)
    diag = element_pair_class(mesh, k, l) != DISJOINT

    def f2(x: float, ys: np.ndarray) -> np.ndarray:
        fi = weighted_basis_eval(space, i, x) - weighted_basis_eval(space, i, ys)
        fj = weighted_basis_eval(space, j, x) - weighted_basis_eval(space, j, ys)
        return fi * fj * np.abs(x - ys) ** (-1.0 - 2.0 * s)

    return adaptive_oracle_integral(f2, ((kx0, kx1), (lx0, lx1)), tol, diagonal=diag)


# --- adaptive oracle ----------------------------------------------------------

_ORACLE_N = 16


def _initial_panels(lo: float, hi: float, splits: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    pts = [lo, hi]
    for p in splits:
        if lo < p < hi:
            pts.append(float(p))
    pts = np.unique(np.asarray(pts, dtype=float))
    return pts[:-1], pts[1:]


def _batch_gauss(f: Callable, los: np.ndarray, his: np.ndarray, gx: np.ndarray, gw: np.ndarray) -> np.ndarray:
    half = 0.5 * (his - los)
    mid = 0.5 * (his + los)
    xs = mid[:, None] + half[:, None] * gx[None, :]
    if getattr(f, "wants_lens", False):
        lens = np.broadcast_to((his - los)[:, None], xs.shape)
        vals = np.asarray(f(xs.ravel(), lens.ravel()), dtype=float).reshape(xs.shape)
    else:
        vals = np.asarray(f(xs.ravel()), dtype=float).reshape(xs.shape)
    return half * (vals @ gw)


def _adaptive_1d(
    f: Callable,
    lo: float,
    hi: float,
    tol: float,
    splits: Sequence[float],
    budget: list,
    noise: float = 0.0,
) -> float:
    """Adaptive bisection with (n, 2n) Legendre panels.

    Panels whose error exceeds their share of the global budget are bisected;
    refinement toward integrable endpoint singularities emerges as dyadic
    grading. `noise` is an absolute per-panel floor below which disagreement
    is not chased (used when f itself is computed adaptively).
    """
    g1x, g1w = _leggauss(_ORACLE_N)
    g2x, g2w = _leggauss(2 * _ORACLE_N)
    los, his = _initial_panels(lo, hi, splits)
    span = hi - lo
    i1 = _batch_gauss(f, los, his, g1x, g1w)
    i2 = _batch_gauss(f, los, his, g2x, g2w)
    errs = np.abs(i2 - i1)
    budget[0] += len(los)
    for _ in range(500):
        total = float(np.sum(i2))
        toterr = float(np.sum(errs))
        if toterr <= tol:
            return total
        lens = his - los
        # Global budget split evenly across current panels; panels at the noise
        # floor or already at the local floating-point resolution are left alone.
        thresh = max(tol / (4.0 * len(los)), noise)
        # Width floor: keep Gauss nodes of a panel distinct from its endpoints
        # (a singular point sits on a panel boundary, never on a node). Panels
        # against a singularity at a nonzero position cannot shrink below
        # ~1e3 ulps without the extreme nodes rounding onto the endpoint.
        eps_w = 1e-12 * np.maximum(np.abs(los), np.abs(his))
        bad = (errs > thresh) & (lens > eps_w)
        if not np.any(bad):
            if toterr <= tol + noise * len(los):
                return total
            raise QuadratureConvergenceError("1d panels cannot be refined further", total, toterr)
        if budget[0] + 2 * int(np.sum(bad)) > 10**6:
            raise QuadratureConvergenceError("panel budget exhausted", total, toterr)
        mids = 0.5 * (los[bad] + his[bad])
        new_los = np.concatenate([los[bad], mids])
        new_his = np.concatenate([mids, his[bad]])
        n1 = _batch_gauss(f, new_los, new_his, g1x, g1w)
        n2 = _batch_gauss(f, new_los, new_his, g2x, g2w)
        budget[0] += len(new_los)
        los = np.concatenate([los[~bad], new_los])
        his = np.concatenate([his[~bad], new_his])
        i2 = np.concatenate([i2[~bad], n2])
        errs = np.concatenate([errs[~bad], np.abs(n2 - n1)])
    raise QuadratureConvergenceError(
        "1d refinement loop did not converge", float(np.sum(i2)), float(np.sum(errs))
    )


def adaptive_oracle_integral(
    f: Callable,
    domain,
    tol: float,
    singular_points: Sequence[float] = (),
    diagonal: bool = False,
    y_singular_points: Sequence[float] = (),
) -> float:
    """Independent adaptive integration over an interval or a rectangle.

    1D: ``domain = (lo, hi)`` and ``f`` maps an array of points to values.
    2D: ``domain = ((x0, x1), (y0, y1))`` and ``f(x, ys)`` maps a scalar x and
    an array of y to values; the rectangle is integrated in iterated form,
    with the inner integral split on the diagonal y = x when ``diagonal``.
    Singularities must lie on the domain boundary, at the listed split points
    or on the diagonal. Raises QuadratureConvergenceError on budget
    exhaustion, carrying the best estimate and an error bound.
    """
    budget = [0]
    if np.ndim(domain[0]) == 0:
        lo, hi = float(domain[0]), float(domain[1])
        return _adaptive_1d(f, lo, hi, tol, singular_points, budget)

    (x0, x1), (y0, y1) = domain
    x0, x1, y0, y1 = float(x0), float(x1), float(y0), float(y1)
    span_x = x1 - x0
    inner_base = tol / (4.0 * span_x)
    ysplits = list(y_singular_points)
    # Inner tolerance per outer node scales with the node's panel length: a
    # node whose outer weight is tiny (deep corner grading) may be computed
    # loosely without moving the outer integral. K bounds the panel count in
    # the error budget.
    K = 64.0

    def outer(xs: np.ndarray, lens: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).ravel()
        lens = np.asarray(lens, dtype=float).ravel()
        out = np.empty(xs.shape, dtype=float)
        for idx in range(xs.shape[0]):
            x = float(xs[idx])
            tol_x = max(inner_base, tol / (4.0 * K * max(lens[idx], 1e-300)))
            sp = ysplits + ([x] if diagonal and y0 < x < y1 else [])
            out[idx] = _adaptive_1d(lambda ys: f(x, ys), y0, y1, tol_x, sp, budget)
        return out

    outer.wants_lens = True
    return _adaptive_1d(outer, x0, x1, tol / 2.0, singular_points, budget, noise=tol / (4.0 * K))
