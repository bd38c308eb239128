"""Uniform one-dimensional meshes of an interval.

In one dimension the computational domain is meshed exactly, so the mesh
interval and the problem domain coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Mesh1D",
    "build_uniform_mesh",
    "element_pair_class",
    "IDENTICAL",
    "ADJACENT",
    "DISJOINT",
]

IDENTICAL = "identical"
ADJACENT = "adjacent"
DISJOINT = "disjoint"


@dataclass(frozen=True)
class Mesh1D:
    """Uniform partition of [a, b] into n_elems intervals."""

    a: float
    b: float
    n_elems: int
    h: float
    nodes: np.ndarray

    def element(self, k: int) -> tuple[float, float]:
        """Endpoints of element k = [nodes[k], nodes[k+1]]."""
        return float(self.nodes[k]), float(self.nodes[k + 1])


def build_uniform_mesh(a: float, b: float, n_elems: int) -> Mesh1D:
    """Uniform mesh with n_elems >= 2 elements on (a, b)."""
    a, b = float(a), float(b)
    n_elems = int(n_elems)
    if not a < b:
        raise ValueError(f"need a < b, got a={a!r}, b={b!r}")
    if n_elems < 2:
        raise ValueError(f"need at least 2 elements, got {n_elems!r}")
    nodes = np.linspace(a, b, n_elems + 1)
    nodes.setflags(write=False)
    return Mesh1D(a=a, b=b, n_elems=n_elems, h=(b - a) / n_elems, nodes=nodes)


def element_pair_class(mesh: Mesh1D, k: int, l: int) -> str:
    """Classify an element pair for quadrature dispatch."""
    if not (0 <= k < mesh.n_elems and 0 <= l < mesh.n_elems):
        raise IndexError(f"element indices ({k}, {l}) out of range for {mesh.n_elems} elements")
    if k == l:
        return IDENTICAL
    if abs(k - l) == 1:
        return ADJACENT
    return DISJOINT
