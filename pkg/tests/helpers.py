"""Shared test oracles, independent of the library's production paths."""

from __future__ import annotations

import numpy as np

from fracfem.quadrature import adaptive_oracle_integral
from fracfem.special import frac_lap_constant


def frac_laplacian_pointwise(u, x: float, s: float, support: tuple[float, float], tol: float = 1e-8) -> float:
    """Principal-value evaluation of the operator at a point, by quadrature.

    Uses the symmetric second-difference form
        C int_0^inf (2u(x) - u(x+t) - u(x-t)) t^{-1-2s} dt,
    absolutely convergent for C^2 functions; the tail beyond the support is a
    closed form. Independent oracle for right-hand-side formulas.
    """
    a, b = support
    T = max(x - a, b - x)
    ux = float(u(np.asarray([x]))[0])

    def integrand(ts: np.ndarray) -> np.ndarray:
        return 2.0 * ux - u(x + ts) - u(x - ts)

    # kinks of (1-x^2)_+-type data sit where x +- t crosses the support edges
    splits = [t for t in (abs(b - x), abs(x - a)) if 0.0 < t < T]

    def weighted(ts: np.ndarray) -> np.ndarray:
        return integrand(ts) * ts ** (-1.0 - 2.0 * s)

    C = frac_lap_constant(1, s)
    core = adaptive_oracle_integral(weighted, (0.0, T), tol / max(C, 1.0), singular_points=splits)
    tail = 2.0 * ux * T ** (-2.0 * s) / (2.0 * s)  # u vanishes beyond the support
    return C * (core + tail)


def solve_pivoted(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting; independent solve oracle."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    n = len(b)
    for col in range(n):
        p = col + int(np.argmax(np.abs(A[col:, col])))
        if p != col:
            A[[col, p]] = A[[p, col]]
            b[[col, p]] = b[[p, col]]
        for row in range(col + 1, n):
            m = A[row, col] / A[col, col]
            A[row, col:] -= m * A[col, col:]
            b[row] -= m * b[col]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - A[row, row + 1 :] @ x[row + 1 :]) / A[row, row]
    return x


def oracle_full_entry(space, i: int, j: int, tol: float = 1e-9) -> float:
    """Brute-force a(phi_j, phi_i): double integral over the square plus tail term.

    Splits the inner and outer integrals at every mesh node (basis kinks) and
    on the diagonal; completely bypasses the element-pair decomposition.
    """
    from fracfem.basis import weighted_basis_eval
    from fracfem.weight import killing_potential

    mesh = space.mesh
    a, b = mesh.a, mesh.b
    s = space.s
    C = space.params.c_norm
    nodes = [float(t) for t in mesh.nodes[1:-1]]

    def f2(x: float, ys: np.ndarray) -> np.ndarray:
        fi = weighted_basis_eval(space, i, x) - weighted_basis_eval(space, i, ys)
        fj = weighted_basis_eval(space, j, x) - weighted_basis_eval(space, j, ys)
        return fi * fj * np.abs(x - ys) ** (-1.0 - 2.0 * s)

    dbl = adaptive_oracle_integral(
        f2, ((a, b), (a, b)), tol / max(C, 1.0),
        singular_points=nodes, diagonal=True, y_singular_points=nodes,
    )

    def tail(xs: np.ndarray) -> np.ndarray:
        return (
            weighted_basis_eval(space, i, xs)
            * weighted_basis_eval(space, j, xs)
            * killing_potential(xs, space.params, a, b)
        )

    kap = adaptive_oracle_integral(tail, (a, b), tol, singular_points=nodes)
    return 0.5 * C * dbl + kap
