import json
import math

import numpy as np
import pytest

from d2d_underlay import cli
from d2d_underlay.config import ConfigError, SweepConfig, load_config, parse_text, resolve
from d2d_underlay.sweep import (
    CSV_HEADER,
    SweepRow,
    golden_section_max,
    rows_from_json,
    rows_to_csv,
    rows_to_json,
    run_sweep,
)


class TestConfig:
    def test_defaults(self):
        cfg = load_config()
        assert cfg.params.lambda_b == 5.0 and cfg.engine == "analytic"
        np.testing.assert_allclose(cfg.betas, np.arange(-70.0, -29.0, 5.0))

    def test_file_and_override_precedence(self, tmp_path):
        f = tmp_path / "c.cfg"
        f.write_text("# scenario\nlambda_b_per_km2 = 10\nbeta_min_dbm = -60\nseed = 3\n")
        cfg = load_config(f, {"seed": 8})
        assert cfg.params.lambda_b == 10.0 and cfg.beta_min_dbm == -60.0 and cfg.seed == 8

    def test_profile_keys_in_db(self):
        cfg = resolve({"a_bl_db": "-30.8", "alpha_bn": "3.5"})
        seg = cfg.params.bs_profile.segments[0]
        assert seg.a_los == pytest.approx(10**-3.08) and seg.alpha_nlos == 3.5

    def test_missing_unit_suffix(self):
        with pytest.raises(ConfigError, match="unit suffix"):
            resolve({"lambda_b": "5"})

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            resolve({"lambda_q_per_km2": "5"})

    def test_out_of_range_names_key(self):
        with pytest.raises(ConfigError, match="epsilon"):
            resolve({"epsilon": "1.5"})

    def test_bad_number(self):
        with pytest.raises(ConfigError, match="rho"):
            resolve({"rho": "lots"})

    def test_parse_text_rejects_garbage(self):
        with pytest.raises(ConfigError):
            parse_text("no equals sign here\n")

    def test_echo_round_trips(self):
        cfg = SweepConfig()
        again = resolve(parse_text(cfg.echo()))
        assert again.as_dict() == cfg.as_dict()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")


class TestOutput:
    rows = [SweepRow(-60.0, q_analytic=0.8, ase_cell=1.0, ase_d2d=0.5, ase_total=1.5), SweepRow(-55.0, q_analytic=1 / 3)]

    def test_csv_header_and_blanks(self):
        text = rows_to_csv(self.rows)
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        assert lines[1].startswith("-60,0.8,,")
        assert lines[2].split(",")[1] == "0.333333"

    def test_json_round_trip(self):
        back = rows_from_json(rows_to_json(self.rows, SweepConfig()))
        assert back[0] == self.rows[0]
        assert math.isnan(back[1].q_mc)
        assert "config" in json.loads(rows_to_json(self.rows, SweepConfig()))

    def test_row_check(self):
        with pytest.raises(ValueError):
            SweepRow(-50.0, q_analytic=1.2).check()
        with pytest.raises(ValueError):
            SweepRow(-50.0, ase_cell=1.0, ase_d2d=1.0, ase_total=3.0).check()


def test_golden_section_finds_peak():
    x, fx = golden_section_max(lambda b: -((b + 56.3) ** 2), -60.0, -50.0, tol=0.01)
    assert x == pytest.approx(-56.3, abs=0.02) and fx == pytest.approx(0.0, abs=1e-3)


def test_q_sweep_is_decreasing():
    cfg = SweepConfig(workers=1)
    rows = run_sweep(cfg, what="q")
    q = [r.q_analytic for r in rows]
    assert all(a > b for a, b in zip(q, q[1:]))


class TestCli:
    def test_q_curve_stdout(self, capsys):
        assert cli.main(["q-curve", "--quiet", "--beta-min", "-60", "--beta-max", "-50", "--workers", "1"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == CSV_HEADER and len(out) == 4

    def test_config_echo_on_stderr(self, capsys):
        cli.main(["q-curve", "--beta-min", "-60", "--beta-max", "-60", "--workers", "1"])
        err = capsys.readouterr().err
        assert "# lambda_b_per_km2 = 5" in err

    def test_json_to_file(self, tmp_path):
        out = tmp_path / "q.json"
        code = cli.main(["q-curve", "--quiet", "--beta-min", "-60", "--beta-max", "-55", "--format", "json",
                         "--out", str(out), "--workers", "1"])
        assert code == 0
        data = json.loads(out.read_text())
        assert data["config"]["beta_min_dbm"] == -60.0 and len(data["rows"]) == 2

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("epsilon = 1.5\n")
        assert cli.main(["q-curve", "--config", str(bad)]) == cli.EXIT_CONFIG
        assert "epsilon" in capsys.readouterr().err

    def test_unknown_command(self):
        assert cli.main(["frobnicate"]) == cli.EXIT_CONFIG

    def test_infeasible_optimisation(self, capsys):
        code = cli.main(["optimize-beta", "--quiet", "--constraint", "0.999", "--beta-min", "-70", "--beta-max",
                         "-60", "--beta-step", "10", "--workers", "1"])
        assert code == cli.EXIT_INFEASIBLE
        assert "feasible = false" in capsys.readouterr().out
