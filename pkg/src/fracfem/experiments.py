"""End-to-end reproduction of the convergence experiments, with CSV output.

Four experiments:

* exact: unit right-hand side with the quadratic weight, where the discrete
  solution coincides with the closed-form solution and the coefficient vector
  is constant; any deviation beyond quadrature tolerance indicates a bug.
* convergence_f1: unit right-hand side with the quartic weight; energy and L2
  errors against the closed-form solution across mesh levels.
* bonito: the smooth-solution benchmark u(x) = (1-x^2)_+ with hypergeometric
  right-hand side, run on an epsilon-shrunk interval so the right-hand side
  stays evaluable.
* interp_demo: pointwise comparison of plain and weighted interpolation of
  the closed-form solution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .assembly import (
    StiffnessMatrix,
    LoadVector,
    assemble_load,
    assemble_stiffness,
    dump_matrix,
    solve_system,
)
from .basis import (
    DiscreteSolution,
    eval_pl,
    eval_solution,
    interp_pl,
    interp_weighted,
    make_space,
)
from .errors import ErrorReport, hs_error_energy, l2_error, make_report
from .mesh import build_uniform_mesh
from .quadrature import adaptive_oracle_integral
from .special import ball_solution_constant, bonito_rhs, frac_params, gamma
from .weight import WEIGHT_KINDS, make_weight

__all__ = [
    "ExperimentConfig",
    "LevelResult",
    "run_exact_case",
    "run_convergence_f1",
    "run_bonito",
    "run_interp_demo",
    "emit_report",
    "study_f1",
    "study_bonito",
    "f1_exact_solution",
    "f1_quotient",
    "f1_linear_functional",
    "bonito_linear_functional",
]

EXPERIMENTS = ("exact", "convergence_f1", "bonito", "interp_demo")

_DELTA_ALIASES = {"poly2": "poly2", "poly4": "poly4", "dist": "dist"}

_DEFAULT_S = {
    "exact": (0.1, 0.25, 0.5, 0.75),
    "convergence_f1": (0.1, 0.2, 0.4, 0.6),
    "bonito": (0.1, 0.2, 0.4, 0.6),
    "interp_demo": (0.1, 0.4, 0.6),
}
_DEFAULT_LEVELS = {
    "exact": (4,),
    "convergence_f1": (2, 3, 4, 5, 6),
    "bonito": (2, 3, 4, 5, 6),
    "interp_demo": (4,),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    s_values: tuple[float, ...] = ()
    levels: tuple[int, ...] = ()
    delta_kind: str = "poly4"
    epsilon: float = 0.0
    quad_order: int = 16
    out_path: str | None = None
    dump_matrix: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.delta_kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.delta_kind!r}")
        if not self.s_values:
            object.__setattr__(self, "s_values", _DEFAULT_S[self.experiment])
        if not self.levels:
            object.__setattr__(self, "levels", _DEFAULT_LEVELS[self.experiment])
        if any(not 0.05 <= s <= 0.95 for s in self.s_values):
            raise ValueError(f"s values must lie in [0.05, 0.95], got {self.s_values!r}")
        if any(self.levels[i + 1] <= self.levels[i] for i in range(len(self.levels) - 1)):
            raise ValueError("levels must be strictly increasing")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        raw = json.loads(Path(path).read_text())
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        for key in ("s_values", "levels"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass(frozen=True)
class LevelResult:
    """One (s, level) cell of a study, keeping the assembled system around."""

    s: float
    level: int
    h: float
    n_dofs: int
    err_hs: float
    err_l2: float
    system: tuple[StiffnessMatrix, LoadVector, DiscreteSolution]
    extra: dict = field(default_factory=dict)


# --- closed-form data for the f = 1 problem -----------------------------------


def f1_exact_solution(s: float, R: float = 1.0, x0: float = 0.0):
    c = ball_solution_constant(1, s)

    def u_star(x):
        r2 = R * R - (np.asarray(x, dtype=float) - x0) ** 2
        return c * np.maximum(r2, 0.0) ** s

    return u_star


def f1_quotient(s: float, delta_kind: str, R: float = 1.0, x0: float = 0.0):
    """Closed-form u*/delta^s for each weight kind (smooth up to the boundary)."""
    c = ball_solution_constant(1, s)
    if delta_kind == "poly2":
        return lambda x: c * np.ones_like(np.asarray(x, dtype=float))
    if delta_kind == "poly4":
        return lambda x: c / (R * R + (np.asarray(x, dtype=float) - x0) ** 2) ** s
    if delta_kind == "dist":
        return lambda x: c * (R + np.abs(np.asarray(x, dtype=float) - x0)) ** s
    raise ValueError(f"no closed-form quotient for weight kind {delta_kind!r}")


def f1_linear_functional(s: float) -> float:
    """int_{-1}^{1} u* dx = c_{1,s} sqrt(pi) Gamma(s+1)/Gamma(s+3/2)."""
    return ball_solution_constant(1, s) * math.sqrt(math.pi) * gamma(s + 1.0) / gamma(s + 1.5)


@lru_cache(maxsize=None)
def bonito_linear_functional(s: float, epsilon: float) -> float:
    """int f u* over the shrunk interval, via the adaptive oracle at 1e-12.

    The truncated tails contribute O(eps^{3-2s}), far below the tolerance.
    """
    params = frac_params(s)
    lo, hi = -1.0 + epsilon, 1.0 - epsilon

    def fu(xs: np.ndarray) -> np.ndarray:
        return bonito_rhs(xs, params) * np.maximum(1.0 - xs * xs, 0.0)

    return adaptive_oracle_integral(fu, (lo, hi), 1e-12)


# --- studies -------------------------------------------------------------------


def _solve_level(space, f, lin_f_ustar, u_star, quad_order):
    A = assemble_stiffness(space, n_quad=quad_order)
    b = assemble_load(space, f, n_quad=quad_order)
    sol = solve_system(A, b)
    e_hs = hs_error_energy(space, sol, f, lin_f_ustar, load=b)
    e_l2 = l2_error(sol, u_star, n_quad=quad_order)
    return A, b, sol, e_hs, e_l2


def study_f1(s: float, levels, delta_kind: str = "poly4", quad_order: int = 16) -> list[LevelResult]:
    """Unit right-hand side on (-1, 1); errors against the closed-form solution."""
    u_star = f1_exact_solution(s)
    lin = f1_linear_functional(s)
    out = []
    for k in levels:
        mesh = build_uniform_mesh(-1.0, 1.0, 2**k)
        space = make_space(mesh, make_weight(delta_kind, -1.0, 1.0), s)
        A, b, sol, e_hs, e_l2 = _solve_level(space, lambda x: np.ones_like(x), lin, u_star, quad_order)
        out.append(
            LevelResult(s=s, level=k, h=mesh.h, n_dofs=space.n_dofs, err_hs=e_hs, err_l2=e_l2, system=(A, b, sol))
        )
    return out


def study_bonito(s: float, levels, epsilon: float = 1e-10, quad_order: int = 16) -> list[LevelResult]:
    """Smooth-solution benchmark on the shrunk interval with the quartic weight."""
    params = frac_params(s)
    lin = bonito_linear_functional(s, epsilon)

    def u_star(x):
        xs = np.asarray(x, dtype=float)
        return np.maximum(1.0 - xs * xs, 0.0)

    def f(x):
        return bonito_rhs(x, params)

    lo, hi = -1.0 + epsilon, 1.0 - epsilon
    out = []
    for k in levels:
        mesh = build_uniform_mesh(lo, hi, 2**k)
        space = make_space(mesh, make_weight("poly4", lo, hi), s)
        A, b, sol, e_hs, e_l2 = _solve_level(space, f, lin, u_star, quad_order)
        out.append(
            LevelResult(s=s, level=k, h=mesh.h, n_dofs=space.n_dofs, err_hs=e_hs, err_l2=e_l2, system=(A, b, sol))
        )
    return out


def _results_to_report(s: float, results: list[LevelResult]) -> ErrorReport:
    return make_report(
        s,
        [r.level for r in results],
        [r.h for r in results],
        [r.n_dofs for r in results],
        [r.err_hs for r in results],
        [r.err_l2 for r in results],
    )


def _maybe_dump(cfg: ExperimentConfig, results: list[LevelResult], s: float):
    if cfg.dump_matrix is None:
        return
    base = Path(cfg.dump_matrix)
    for r in results:
        path = base.with_name(f"{base.stem}_s{s}_L{r.level}{base.suffix or '.txt'}")
        dump_matrix(r.system[0], path)


def run_exact_case(cfg: ExperimentConfig):
    """Exactness check: f = 1 with the quadratic weight reproduces u* exactly.

    Returns (reports, deviations) where deviations maps (s, level) to the
    maximum relative coefficient deviation from the constant c_{1,s}.
    """
    if cfg.delta_kind != "poly2":
        cfg = replace(cfg, delta_kind="poly2")
    reports, devs = [], {}
    for s in cfg.s_values:
        results = study_f1(s, cfg.levels, delta_kind="poly2", quad_order=cfg.quad_order)
        c_exact = ball_solution_constant(1, s)
        for r in results:
            sol = r.system[2]
            devs[(s, r.level)] = float(np.max(np.abs(sol.coeffs - c_exact)) / c_exact)
        reports.append(_results_to_report(s, results))
        _maybe_dump(cfg, results, s)
    return reports, devs


def run_convergence_f1(cfg: ExperimentConfig) -> list[ErrorReport]:
    reports = []
    for s in cfg.s_values:
        results = study_f1(s, cfg.levels, delta_kind=cfg.delta_kind, quad_order=cfg.quad_order)
        reports.append(_results_to_report(s, results))
        _maybe_dump(cfg, results, s)
    return reports


def run_bonito(cfg: ExperimentConfig) -> list[ErrorReport]:
    eps = cfg.epsilon if cfg.epsilon > 0 else 1e-10
    reports = []
    for s in cfg.s_values:
        results = study_bonito(s, cfg.levels, epsilon=eps, quad_order=cfg.quad_order)
        reports.append(_results_to_report(s, results))
        _maybe_dump(cfg, results, s)
    return reports


def run_interp_demo(cfg: ExperimentConfig) -> list[Path]:
    """Pointwise interpolation profiles on a 2001-point grid, one CSV per s."""
    if cfg.out_path is None:
        raise ValueError("interp_demo requires an output path")
    level = cfg.levels[-1]
    n_elems = 2**level
    mesh = build_uniform_mesh(-1.0, 1.0, n_elems)
    grid = np.linspace(-1.0, 1.0, 2001)
    paths = []
    base = Path(cfg.out_path)
    for s in cfg.s_values:
        u_star = f1_exact_solution(s)
        ih_coeffs = interp_pl(u_star, mesh)
        space2 = make_space(mesh, make_weight("poly2", -1.0, 1.0), s)
        space4 = make_space(mesh, make_weight("poly4", -1.0, 1.0), s)
        jh2 = interp_weighted(f1_quotient(s, "poly2"), space2)
        jh4 = interp_weighted(f1_quotient(s, "poly4"), space4)
        cols = {
            "x": grid,
            "u_star": u_star(grid),
            "ih_ustar": eval_pl(ih_coeffs, mesh, grid),
            "jh_poly2": eval_solution(jh2, grid),
            "jh_poly4": eval_solution(jh4, grid),
            "ih_quotient_poly4": eval_pl(jh4.coeffs, mesh, grid),
        }
        path = base if len(cfg.s_values) == 1 else base.with_name(f"{base.stem}_s{s}{base.suffix or '.csv'}")
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for row in zip(*cols.values()):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        paths.append(path)
    return paths


def emit_report(reports, path) -> Path:
    """Combined CSV: header s,level,h,n_dofs,err_hs,err_l2,rate_hs,rate_l2.

    Rates are blank on each s-group's first level. Floats are written as
    shortest round-trip decimals, so parsing the file reproduces the report
    bit-exactly.
    """
    if isinstance(reports, ErrorReport):
        reports = [reports]
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("s,level,h,n_dofs,err_hs,err_l2,rate_hs,rate_l2\n")
        for rep in reports:
            for i, level in enumerate(rep.levels):
                r_hs = repr(rep.rates_hs[i - 1]) if i > 0 else ""
                r_l2 = repr(rep.rates_l2[i - 1]) if i > 0 else ""
                fh.write(
                    f"{rep.s!r},{level},{rep.hs[i]!r},{rep.n_dofs[i]},"
                    f"{rep.err_hs[i]!r},{rep.err_l2[i]!r},{r_hs},{r_l2}\n"
                )
    return path


def parse_report_csv(path) -> list[ErrorReport]:
    """Round-trip parser for emit_report output."""
    rows = Path(path).read_text().strip().splitlines()
    if rows[0] != "s,level,h,n_dofs,err_hs,err_l2,rate_hs,rate_l2":
        raise ValueError("unexpected CSV header")
    groups: dict[float, list] = {}
    for line in rows[1:]:
        parts = line.split(",")
        s = float(parts[0])
        groups.setdefault(s, []).append(parts)
    reports = []
    for s, lines in groups.items():
        reports.append(
            make_report(
                s,
                [int(p[1]) for p in lines],
                [float(p[2]) for p in lines],
                [int(p[3]) for p in lines],
                [float(p[4]) for p in lines],
                [float(p[5]) for p in lines],
            )
        )
    return reports
