import json
import subprocess
import sys

import numpy as np
import pytest

from fracfem.experiments import (
    ExperimentConfig,
    emit_report,
    parse_report_csv,
    run_exact_case,
    run_interp_demo,
)
from fracfem.errors import make_report


class TestConfig:
    def test_defaults_per_experiment(self):
        cfg = ExperimentConfig(experiment="convergence_f1")
        assert cfg.s_values == (0.1, 0.2, 0.4, 0.6)
        assert cfg.levels == (2, 3, 4, 5, 6)
        assert cfg.delta_kind == "poly4"

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="nope")
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="exact", s_values=(0.99,))
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="exact", levels=(4, 3))
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="exact", delta_kind="gauss")

    def test_from_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(
            json.dumps(
                {
                    "experiment": "bonito",
                    "s_values": [0.2, 0.4],
                    "levels": [2, 3],
                    "epsilon": 1e-10,
                    "quad_order": 16,
                }
            )
        )
        cfg = ExperimentConfig.from_json(path)
        assert cfg.experiment == "bonito"
        assert cfg.s_values == (0.2, 0.4)

    def test_from_json_unknown_field(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"experiment": "exact", "bogus": 1}))
        with pytest.raises(ValueError):
            ExperimentConfig.from_json(path)


class TestCsv:
    def test_empty_report_header_only(self, tmp_path):
        path = emit_report([], tmp_path / "out.csv")
        assert path.read_text() == "s,level,h,n_dofs,err_hs,err_l2,rate_hs,rate_l2\n"

    def test_rate_blank_on_first_level(self, tmp_path):
        rep = make_report(0.5, (2, 3), (0.5, 0.25), (5, 9), (1e-2, 2.5e-3), (1e-3, 2.4e-4))
        path = emit_report(rep, tmp_path / "out.csv")
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 3
        assert lines[1].endswith(",,")
        assert lines[2].count(",") == 7 and not lines[2].endswith(",")

    def test_roundtrip_bit_exact(self, tmp_path):
        rep = make_report(
            0.4,
            (2, 3, 4),
            (0.5, 0.25, 0.125),
            (5, 9, 17),
            (1.234567890123e-2, 3.33e-3, 8.1e-4),
            (9.87e-4, 2.5e-4, 6.33e-5),
        )
        path = emit_report(rep, tmp_path / "out.csv")
        back = parse_report_csv(path)[0]
        assert back == rep


class TestExactCase:
    def test_deviation_small(self):
        cfg = ExperimentConfig(experiment="exact", s_values=(0.5,), levels=(3,))
        reports, devs = run_exact_case(cfg)
        assert devs[(0.5, 3)] <= 1e-6
        assert reports[0].err_hs[0] <= 1e-5
        assert reports[0].err_l2[0] <= 1e-5

    def test_forces_quadratic_weight(self):
        cfg = ExperimentConfig(experiment="exact", s_values=(0.25,), levels=(3,), delta_kind="poly4")
        _, devs = run_exact_case(cfg)
        assert devs[(0.25, 3)] <= 1e-6


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo") / "interp.csv"
    cfg = ExperimentConfig(
        experiment="interp_demo", s_values=(0.4,), levels=(4,), out_path=str(out)
    )
    (path,) = run_interp_demo(cfg)
    rows = path.read_text().strip().splitlines()
    header = rows[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in rows[1:]])
    return header, data


class TestInterpDemo:
    def test_shape_and_header(self, demo):
        header, data = demo
        assert header == ["x", "u_star", "ih_ustar", "jh_poly2", "jh_poly4", "ih_quotient_poly4"]
        assert data.shape == (2001, 6)

    def test_ih_matches_u_star_at_nodes(self, demo):
        header, data = demo
        # mesh nodes for 16 elements land on the 2001-point grid every 125 rows
        for row in range(0, 2001, 125):
            assert data[row, 2] == pytest.approx(data[row, 1], abs=1e-14)

    def test_jh_poly2_equals_u_star_everywhere(self, demo):
        header, data = demo
        assert np.max(np.abs(data[:, 3] - data[:, 1])) < 1e-13

    def test_jh_poly4_beats_ih_on_boundary_elements(self, demo):
        header, data = demo
        x = data[:, 0]
        h = 2.0 / 16
        mask = (x <= -1.0 + h) | (x >= 1.0 - h)
        e_ih = np.max(np.abs(data[mask, 2] - data[mask, 1]))
        e_jh = np.max(np.abs(data[mask, 4] - data[mask, 1]))
        assert e_ih >= 5.0 * e_jh


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="convergence_f1", s_values=(0.4,), levels=(2, 3), out_path=None
        )
        from fracfem.experiments import run_convergence_f1

        p1 = emit_report(run_convergence_f1(cfg), tmp_path / "a.csv")
        p2 = emit_report(run_convergence_f1(cfg), tmp_path / "b.csv")
        assert p1.read_bytes() == p2.read_bytes()


class TestCli:
    def _run(self, *args):
        return subprocess.run(
            [sys.executable, "-m", "fracfem", *args],
            capture_output=True,
            text=True,
            timeout=600,
        )

    def test_exact_subcommand(self, tmp_path):
        out = tmp_path / "exact.csv"
        proc = self._run("exact", "--s", "0.5", "--levels", "3..3", "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        assert "max_rel_coeff_dev" in proc.stdout
        assert out.exists()

    def test_convergence_subcommand(self, tmp_path):
        out = tmp_path / "conv.csv"
        proc = self._run(
            "convergence", "--s", "0.4", "--levels", "2..3", "--delta", "poly4", "--out", str(out)
        )
        assert proc.returncode == 0, proc.stderr
        text = out.read_text()
        assert text.startswith("s,level,h,n_dofs,err_hs,err_l2,rate_hs,rate_l2")
        assert len(text.strip().splitlines()) == 3

    def test_interp_demo_subcommand(self, tmp_path):
        out = tmp_path / "interp.csv"
        proc = self._run("interp-demo", "--s", "0.4", "--levels", "4..4", "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        assert out.exists()

    def test_config_file(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        out = tmp_path / "out.csv"
        cfgfile.write_text(
            json.dumps(
                {"experiment": "exact", "s_values": [0.5], "levels": [3], "out_path": str(out)}
            )
        )
        proc = self._run("exact", "--config", str(cfgfile))
        assert proc.returncode == 0, proc.stderr
        assert out.exists()

    def test_dump_matrix_flag(self, tmp_path):
        dump = tmp_path / "mat.txt"
        proc = self._run(
            "exact", "--s", "0.5", "--levels", "3..3", "--dump-matrix", str(dump)
        )
        assert proc.returncode == 0, proc.stderr
        dumped = list(tmp_path.glob("mat_*"))
        assert dumped, "expected a dumped matrix file"
        M = np.loadtxt(dumped[0])
        assert M.shape == (9, 9)

    def test_error_exit_code(self):
        proc = self._run("convergence", "--s", "2.5", "--levels", "2..3")
        assert proc.returncode == 1
        assert proc.stderr.startswith("ERROR")
