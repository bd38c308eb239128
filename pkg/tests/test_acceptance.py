"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``. The convergence studies
are shared session fixtures so the whole suite stays fast; tolerances are the
contract, fixed here and nowhere else.
"""

import math
import time

import numpy as np
import pytest

from fracfem.assembly import assemble_stiffness
from fracfem.basis import eval_pl, eval_solution, interp_pl, interp_weighted, make_space
from fracfem.errors import hs_seminorm_direct, observed_rates
from fracfem.experiments import (
    bonito_linear_functional,
    f1_exact_solution,
    f1_linear_functional,
    f1_quotient,
    study_bonito,
    study_f1,
)
from fracfem.mesh import build_uniform_mesh
from fracfem.special import (
    ball_solution_constant,
    bonito_rhs,
    frac_lap_constant,
    frac_params,
    gamma,
    gauss_2f1,
)
from fracfem.weight import make_weight

from helpers import oracle_full_entry

S_SET = (0.1, 0.2, 0.4, 0.6)
EPS = 1e-10

REF_RATES_F1 = {  # reference observed H^s rates at h = 2^-2, 2^-3, 2^-4
    0.1: (1.9914, 1.86733, 1.83477),
    0.2: (1.87737, 1.73141, 1.73966),
    0.4: (1.65643, 1.62081, 1.52709),
    0.6: (1.42484, 1.430124, 1.38995),
}
REF_RATES_BONITO = {  # reference observed H^s rates at h = (1-eps) 2^-2..2^-4
    0.1: (1.7669, 1.72902, 1.67254),
    0.2: (1.54577, 1.48647, 1.42748),
    0.4: (1.20472, 1.14931, 1.11971),
    0.6: (0.985209, 0.919176, 0.892579),
}
BONITO_PREDICTED = {0.1: 1.4, 0.2: 1.3, 0.4: 1.1, 0.6: 0.9}

# Bonito levels: the acceptance criterion pins no level range; 2..8 lets the
# pre-asymptotic rates for small s settle into the predicted band while
# keeping levels 3..5 for the reference observed-value comparison.
BONITO_LEVELS = (2, 3, 4, 5, 6, 7, 8)
F1_LEVELS = (2, 3, 4, 5, 6)


@pytest.fixture(scope="session")
def f1_study():
    t0 = time.perf_counter()
    study = {s: study_f1(s, F1_LEVELS, delta_kind="poly4") for s in S_SET}
    return study, time.perf_counter() - t0


@pytest.fixture(scope="session")
def bonito_study():
    study = {s: study_bonito(s, BONITO_LEVELS, epsilon=EPS) for s in S_SET}
    return study


@pytest.fixture(scope="session")
def exact_study():
    # criterion 1 setting: N = 16 elements (level 4), quadratic weight
    out = {}
    for s in (0.1, 0.25, 0.5, 0.75):
        t0 = time.perf_counter()
        (res,) = study_f1(s, (4,), delta_kind="poly2")
        out[s] = (res, time.perf_counter() - t0)
    return out


def test_criterion_1_exactness(exact_study):
    for s, (res, elapsed) in exact_study.items():
        sol = res.system[2]
        c = ball_solution_constant(1, s)
        dev = float(np.max(np.abs(sol.coeffs - c)) / c)
        print(f"[criterion 1] s={s}: max rel coeff deviation {dev:.3e} (runtime {elapsed:.2f}s)")
        assert dev <= 1e-4, f"s={s}: deviation {dev:.3e} above 1e-4"
        assert dev <= 1e-6, f"s={s}: deviation {dev:.3e} above the 1e-6 target"
        assert elapsed < 5.0, f"s={s}: exact case took {elapsed:.1f}s (budget 5s)"
    print("[criterion 1] PASS: exact reproduction at N=16 for s in {0.1, 0.25, 0.5, 0.75}")


def test_criterion_2_hs_rates(f1_study):
    study, elapsed = f1_study
    assert elapsed < 600.0, f"study took {elapsed:.0f}s (budget 10 min)"
    for s in S_SET:
        res = study[s]
        rates = observed_rates([r.err_hs for r in res], [r.h for r in res])
        for idx, ref in enumerate(REF_RATES_F1[s]):
            assert abs(rates[idx] - ref) <= 0.10, (
                f"s={s}, h=2^-{idx + 2}: rate {rates[idx]:.5f} vs reference {ref}"
            )
        for r in rates[-2:]:
            assert abs(r - (2.0 - s)) <= 0.10, f"s={s}: finest rates {rates[-2:]} vs {2 - s}"
        print(f"[criterion 2] s={s}: rates {[f'{r:.4f}' for r in rates]} ~ ref {REF_RATES_F1[s]}")
    print(f"[criterion 2] PASS: H^s rates reproduce the reference values (study {elapsed:.1f}s)")


def test_criterion_3_l2_rates(f1_study):
    study, _ = f1_study
    for s in S_SET:
        res = study[s]
        rates = observed_rates([r.err_l2 for r in res], [r.h for r in res])
        finest = float(rates[-1])
        print(f"[criterion 3] s={s}: finest L2 rate {finest:.4f}")
        assert 1.85 <= finest <= 2.15, f"s={s}: finest L2 rate {finest:.4f} outside [1.85, 2.15]"
    print("[criterion 3] PASS: L2 rates approximately quadratic")


def test_criterion_4_bonito_rates(bonito_study):
    for s in S_SET:
        res = bonito_study[s]
        rates = observed_rates([r.err_hs for r in res], [r.h for r in res])
        for idx, ref in enumerate(REF_RATES_BONITO[s]):
            assert abs(rates[idx] - ref) <= 0.15, (
                f"s={s}, h=(1-eps)2^-{idx + 2}: rate {rates[idx]:.5f} vs reference {ref}"
            )
        finest = float(rates[-1])
        pred = BONITO_PREDICTED[s]
        print(
            f"[criterion 4] s={s}: ref rates {[f'{r:.4f}' for r in rates[:3]]} ~ {REF_RATES_BONITO[s]}, "
            f"finest {finest:.4f} vs predicted {pred}"
        )
        assert abs(finest - pred) <= 0.15, f"s={s}: finest rate {finest:.4f} vs predicted {pred}"
    print("[criterion 4] PASS: smooth-solution benchmark rates reproduced")


def test_criterion_5_oracle_equivalence():
    t0 = time.perf_counter()
    mesh = build_uniform_mesh(-1.0, 1.0, 4)
    worst = 0.0
    for s in (0.3, 0.5):
        space = make_space(mesh, make_weight("poly4", -1.0, 1.0), s)
        A = assemble_stiffness(space)
        for i in range(5):
            for j in range(i, 5):
                ref = oracle_full_entry(space, i, j, tol=1e-9 * max(abs(A.entries[i, j]), 0.1))
                rel = abs(A.entries[i, j] - ref) / max(abs(ref), 1e-14)
                worst = max(worst, rel)
                assert rel <= 1e-6, f"s={s}, entry ({i},{j}): rel diff {rel:.2e}"
    seminorm = hs_seminorm_direct(f1_exact_solution(0.5), 0.5, -1.0, 1.0, tol=1e-7)
    target = math.sqrt(math.pi / 2.0)
    assert abs(seminorm - target) <= 1e-6, f"[u*] = {seminorm!r} vs sqrt(pi/2) = {target!r}"
    print(
        f"[criterion 5] PASS: stiffness entries vs oracle (worst rel {worst:.2e}); "
        f"[u*]_Hs = {seminorm:.9f} ~ sqrt(pi/2) ({time.perf_counter() - t0:.0f}s)"
    )


def test_criterion_6_structural_properties(exact_study, f1_study, bonito_study):
    systems = []
    for s, (res, _) in exact_study.items():
        systems.append(("exact", s, res, f1_linear_functional(s)))
    for s, results in f1_study[0].items():
        for res in results:
            systems.append(("f1", s, res, f1_linear_functional(s)))
    for s, results in bonito_study.items():
        for res in results:
            systems.append(("bonito", s, res, bonito_linear_functional(s, EPS)))
    for tag, s, res, lin in systems:
        A, b, sol = res.system
        M = A.entries
        sym = float(np.max(np.abs(M - M.T)) / np.max(np.abs(M)))
        assert sym <= 1e-12, f"{tag} s={s} L{res.level}: symmetry defect {sym:.2e}"
        np.linalg.cholesky(M)
        resid = float(np.max(np.abs(M @ sol.coeffs - b.values)) / np.max(np.abs(b.values)))
        assert resid <= 1e-10, f"{tag} s={s} L{res.level}: residual {resid:.2e}"
        energy_sq = lin - float(b.values @ sol.coeffs)
        assert energy_sq >= -1e-12, f"{tag} s={s} L{res.level}: energy {energy_sq:.2e} < -1e-12"
    print(f"[criterion 6] PASS: {len(systems)} systems symmetric, SPD, residual <= 1e-10")


def test_criterion_7_interpolation_comparison():
    s = 0.4
    mesh = build_uniform_mesh(-1.0, 1.0, 32)  # h = 2^-4
    space = make_space(mesh, make_weight("poly4", -1.0, 1.0), s)
    u_star = f1_exact_solution(s)
    ih = interp_pl(u_star, mesh)
    jh = interp_weighted(f1_quotient(s, "poly4"), space)
    factors = []
    for lo, hi in ((-1.0, -1.0 + mesh.h), (1.0 - mesh.h, 1.0)):
        xs = np.linspace(lo, hi, 4001)
        e_ih = np.max(np.abs(eval_pl(ih, mesh, xs) - u_star(xs)))
        e_jh = np.max(np.abs(eval_solution(jh, xs) - u_star(xs)))
        factors.append(e_ih / e_jh)
    factor = min(factors)
    print(f"[criterion 7] boundary sup-error improvement factor {factor:.0f}")
    assert factor >= 5.0
    # regression bound frozen from the first computed value (5910)
    assert factor >= 5000.0
    print("[criterion 7] PASS: weighted interpolant beats nodal interpolant at the boundary")


def test_criterion_8_special_function_suite():
    rng = np.random.default_rng(123)
    xs = rng.uniform(0.1, 10.0, 500)
    rec = np.array([abs(gamma(x + 1.0) - x * gamma(x)) / abs(gamma(x + 1.0)) for x in xs])
    assert np.max(rec) <= 1e-12, f"gamma recurrence worst {np.max(rec):.2e}"
    assert abs(frac_lap_constant(1, 0.5) - 1.0 / math.pi) <= 1e-12 / math.pi
    assert abs(ball_solution_constant(1, 0.5) - 1.0) <= 1e-12
    assert gauss_2f1(1.0, 1.0, 2.0, 0.5) == pytest.approx(2.0 * math.log(2.0), rel=1e-10)
    assert bonito_rhs(0.0, frac_params(0.5)) == pytest.approx(4.0 / math.pi, rel=1e-10)
    print(
        "[criterion 8] PASS: gamma recurrence 1e-12, C_{1,1/2} = 1/pi, c_{1,1/2} = 1, "
        "2F1(1,1;2;1/2) = 2 ln 2, f(0; 1/2) = 4/pi"
    )
