import csv
import io

import numpy as np
import pytest

from kprsim import cli
from kprsim import experiments as ex
from kprsim.config import SimConfig, VariantId
from kprsim.engine import run_simulation
from kprsim.errors import ConfigError
from kprsim.metrics import final_utilization
from kprsim.protocols import ProtocolConfig, ProtocolKind
from kprsim.rng import RngStream


class TestParseConfig:
    def test_documented_example(self):
        cfg = ex.parse_config("run --protocol rp1 --k 50 --variant 2 --periods 100".split())
        assert cfg.protocol.kind is ProtocolKind.RP1 and cfg.protocol.k == 50
        assert cfg.variant is VariantId.VARIANT2 and cfg.periods == 100

    def test_alpha_out_of_range(self):
        with pytest.raises(ConfigError, match="alpha"):
            ex.parse_config(["--protocol", "rp4", "--alpha", "1.5"])

    def test_defaults(self):
        cfg = ex.parse_config([])
        assert (cfg.n, cfg.periods, cfg.n_seeds) == (1000, 20, 10)
        assert cfg.protocol.kind is ProtocolKind.RP1 and cfg.protocol.k == 50

    def test_bad_token_named(self):
        with pytest.raises(ConfigError, match="--frobnicate"):
            ex.parse_config(["--frobnicate"])
        with pytest.raises(ConfigError, match="abc"):
            ex.parse_config(["--n", "abc"])

    def test_config_file_and_precedence(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("# comment\nprotocol = rp6\nalpha=0.3  # trailing\npi = 0.8\nn = 200\nperiods=7\n")
        cfg = ex.parse_config(["--config", str(path), "--periods", "9"])
        assert cfg.protocol.kind is ProtocolKind.RP6
        assert (cfg.protocol.alpha, cfg.protocol.pi, cfg.n, cfg.periods) == (0.3, 0.8, 200, 9)

    def test_config_file_unknown_key(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("protocol = rp1\ncolour = blue\n")
        with pytest.raises(ConfigError, match="colour"):
            ex.parse_config(["--config", str(path)])

    def test_small_n_defaults_scale(self):
        cfg = ex.parse_config(["--n", "20"])
        assert cfg.protocol.k == 1


class TestPresets:
    def test_fig_100iter(self):
        p = ex.preset_fig("fig-100iter")
        assert len(p.configs) == 5
        assert all(c.periods == 100 and c.variant is VariantId.VARIANT2 for c in p.configs)
        settings = {c.protocol.kind: c.protocol for c in p.configs}
        assert settings[ProtocolKind.RP1].k == 50
        assert settings[ProtocolKind.RP2].customer_group_size == 50
        assert settings[ProtocolKind.RP3].restaurant_group_size == 50
        assert settings[ProtocolKind.RP4].alpha == 0.05
        assert settings[ProtocolKind.RP5].pi == 0.05

    def test_fig_s(self):
        p = ex.preset_fig("fig-s")
        assert len(p.configs) == 5 and not p.sweeps
        assert all(c.variant is VariantId.VARIANT1 and c.periods == 20 for c in p.configs)

    def test_fig_u1_u2(self):
        u1 = ex.preset_fig("fig-u1")
        assert {(c.protocol.kind.value, int(c.variant)) for c in u1.configs} == {
            (k, v) for k in ("rp1", "rp2", "rp3") for v in (1, 2)}
        u2 = ex.preset_fig("fig-u2")
        assert len(u2.configs) == 4 and len(u2.sweeps) == 2
        assert all(s.protocol.kind is ProtocolKind.RP6 for s in u2.sweeps)

    def test_unknown(self):
        with pytest.raises(ConfigError):
            ex.preset_fig("fig-9")


class TestSweep:
    base = SimConfig(n=40, periods=12, variant=2, n_seeds=3, protocol=ProtocolConfig(kind="rp6"))

    def test_grid_shape(self):
        grid = ex.run_sweep([0.0, 1.0], [0.0, 1.0], self.base)
        assert grid.mean.shape == (2, 2) and len(list(grid.cells())) == 4
        assert np.all((grid.mean >= 0) & (grid.mean <= 1))

    def test_no_belief_row_identical_across_alpha(self):
        grid = ex.run_sweep([0.0, 0.5, 1.0], [0.0], self.base)
        assert np.ptp(grid.mean[:, 0]) == 0.0

    def test_single_cell_matches_plain_run(self):
        grid = ex.run_sweep([0.3], [0.6], self.base)
        cfg = self.base.with_(protocol=ProtocolConfig(kind="rp6", alpha=0.3, pi=0.6))
        runs = [final_utilization(run_simulation(cfg, RngStream(cfg.seed_base, r)), 10) for r in cfg.seeds]
        assert grid.mean[0, 0] == pytest.approx(np.mean(runs), abs=1e-15)

    def test_rejects_other_protocols(self):
        with pytest.raises(ConfigError):
            ex.run_sweep([0.5], [0.5], self.base.with_(protocol=ProtocolConfig(kind="rp5")))
        with pytest.raises(ConfigError):
            ex.run_sweep([], [0.5], self.base)


class TestCsv:
    def test_series_rows_and_header(self, tmp_path):
        cfg = SimConfig(n=30, periods=20, n_seeds=1, protocol=ProtocolConfig(kind="rp2", customer_group_size=3))
        text = ex.export_csv(ex.run_config(cfg), tmp_path / "s.csv")
        lines = text.splitlines()
        assert lines[0] == "protocol,variant,seed,period,utilization,stability"
        assert len(lines) == 21 and text.endswith("\n")
        for row in csv.DictReader(io.StringIO(text)):
            for key in ("utilization", "stability"):
                value = row[key]
                assert len(value.split(".")[1]) == 6
                assert 0.0 <= float(value) <= 1.0
                assert f"{float(value):.6f}" == value

    def test_byte_identical(self, tmp_path):
        cfg = SimConfig(n=30, periods=10, n_seeds=2, protocol=ProtocolConfig(kind="rp4", alpha=0.4))
        a = ex.export_csv(ex.run_config(cfg), tmp_path / "a.csv")
        b = ex.export_csv(ex.run_config(cfg), tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_sweep_rows(self, tmp_path):
        base = SimConfig(n=12, periods=3, n_seeds=1, protocol=ProtocolConfig(kind="rp6"))
        grid = ex.run_sweep(ex.DEFAULT_AXIS, ex.DEFAULT_AXIS, base, window=2)
        text = ex.export_csv(grid, tmp_path / "g.csv")
        lines = text.splitlines()
        assert lines[0] == "alpha,pi,mean_final_utilization,std_final_utilization,seeds"
        assert len(lines) == 122

    def test_aggregate_schema(self):
        cfg = SimConfig(n=20, periods=4, n_seeds=3, protocol=ProtocolConfig(kind="rp1", k=2))
        text = ex.render_csv(ex.run_config(cfg), aggregate=True)
        assert text.splitlines()[0].startswith("protocol,variant,period,utilization_mean")
        assert len(text.splitlines()) == 5

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            ex.export_csv([], tmp_path / "missing" / "x.csv")


class TestCli:
    def test_run_to_file(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = cli.main(["run", "--protocol", "rp3", "--restaurant-group-size", "5", "--n", "30",
                         "--periods", "4", "--seeds", "2", "--out", str(out)])
        assert code == 0
        assert len(out.read_text().splitlines()) == 1 + 2 * 4

    def test_empty_invocation(self, monkeypatch, capsys):
        monkeypatch.setattr(ex, "DEFAULTS", {**ex.DEFAULTS, "n": 30, "seeds": 1, "periods": 2})
        assert cli.main([]) == 0
        captured = capsys.readouterr()
        assert "# run: rp1" in captured.err
        assert captured.out.startswith("protocol,variant,seed")

    def test_usage_errors(self, capsys):
        assert cli.main(["run", "--protocol", "rp4", "--alpha", "1.5"]) == 2
        assert "alpha" in capsys.readouterr().err
        assert cli.main(["run", "--protocol", "rp9"]) == 2
        assert "rp9" in capsys.readouterr().err
        assert cli.main(["preset", "fig-zz"]) == 2
        assert cli.main(["sweep", "--protocol", "rp1", "--n", "10", "--alphas", "0.5", "--pis", "0.5"]) == 2

    def test_io_error(self, tmp_path):
        code = cli.main(["run", "--n", "10", "--periods", "1", "--seeds", "1", "--out",
                         str(tmp_path / "nope" / "x.csv")])
        assert code == 3

    def test_internal_error_code(self, monkeypatch):
        from kprsim.errors import InvariantViolation

        def boom(config):
            raise InvariantViolation("saved copy missing")

        monkeypatch.setattr(ex, "run_config", boom)
        assert cli.main(["run", "--n", "10"]) == 4

    def test_baseline(self, tmp_path, capsys):
        out = tmp_path / "b.csv"
        assert cli.main(["baseline", "--out", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 10
        assert np.mean([float(r["utilization"]) for r in rows]) == pytest.approx(1 - 1 / np.e, abs=0.02)

    def test_sweep_small(self, tmp_path):
        out = tmp_path / "sw.csv"
        assert cli.main(["sweep", "--n", "20", "--periods", "5", "--seeds", "2",
                         "--alphas", "0,1", "--pis", "0,0.5,1", "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 1 + 6

    def test_preset_outputs(self, tmp_path):
        assert cli.main(["preset", "fig-s", "--n", "40", "--seeds", "2", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "fig-s_series.csv").exists()
        agg = (tmp_path / "fig-s_aggregate.csv").read_text().splitlines()
        assert len(agg) == 1 + 5 * 20

    def test_preset_with_sweep(self, tmp_path):
        assert cli.main(["preset", "fig-u2", "--n", "20", "--seeds", "1", "--alphas", "0,1", "--pis", "1",
                         "--out", str(tmp_path)]) == 0
        for v in (1, 2):
            assert len((tmp_path / f"fig-u2_rp6_sweep_v{v}.csv").read_text().splitlines()) == 3
