import hashlib
import json
from pathlib import Path

import pytest

from risklab import __version__
from risklab.cli import main
from risklab.config import RunConfig, parse_config
from risklab.exceptions import ConfigError


def write_config(path, data_dir, out_dir, extra=""):
    path.write_text(
        "[run]\n"
        f"data_dir = {data_dir}\n"
        f"out_dir = {out_dir}\n"
        "seed = 321\n"
        "[bootstrap]\n"
        "resamples = 120\n"
        "[sweep]\n"
        "grid_step = 0.02\n"
        "l_values = 2,3\n"
        + extra
    )
    return path


def tree_digest(root: Path) -> dict:
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


class TestParseConfig:
    def test_defaults_and_overrides(self, tmp_path, toy_data_dir):
        cfg_path = write_config(tmp_path / "run.cfg", toy_data_dir, tmp_path / "out")
        config = parse_config(cfg_path)
        assert config.seed == 321
        assert config.bootstrap_b == 120
        assert config.grid_step == 0.02
        assert config.l_values == (2, 3)
        assert config.annual_rf == 0.06
        assert config.kappa_kind == "chebyshev"

    def test_relative_paths_resolve_against_config(self, tmp_path, toy_data_dir):
        (tmp_path / "cfgdir").mkdir()
        rel = Path("..") / toy_data_dir.name
        cfg_path = write_config(tmp_path / "cfgdir" / "run.cfg", rel, "out")
        config = parse_config(cfg_path)
        assert Path(config.data_dir) == toy_data_dir.resolve()
        assert Path(config.out_dir) == (tmp_path / "cfgdir" / "out").resolve()

    def test_unknown_key_rejected(self, tmp_path, toy_data_dir):
        cfg_path = write_config(tmp_path / "run.cfg", toy_data_dir, "out",
                                extra="[data]\nstep = 0.1\n")
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(cfg_path)

    def test_unknown_section_rejected(self, tmp_path, toy_data_dir):
        cfg_path = write_config(tmp_path / "run.cfg", toy_data_dir, "out",
                                extra="[plotting]\ncolor = red\n")
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config(cfg_path)

    def test_missing_file_and_required_keys(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "none.cfg")
        bad = tmp_path / "bad.cfg"
        bad.write_text("[run]\ndata_dir = x\n")
        with pytest.raises(ConfigError, match="out_dir"):
            parse_config(bad)

    def test_domain_validation(self):
        with pytest.raises(ConfigError, match="confidence"):
            RunConfig(data_dir="x", out_dir="y", bootstrap_confidence=0.3)
        with pytest.raises(ConfigError, match="l_values"):
            RunConfig(data_dir="x", out_dir="y", l_values=(9,))
        with pytest.raises(ConfigError, match="kappa"):
            RunConfig(data_dir="x", out_dir="y", kappa_kind="cauchy")


EXPECTED_FILES = [
    "manifest.json", "summary.csv",
    "market_var_rows.csv", "market_cvar_rows.csv", "market_cvar_lselect.csv",
    "sim_zeta_var_rows.csv", "sim_zeta_cvar_rows.csv", "sim_zeta_cvar_lselect.csv",
    "sim_1000_var_rows.csv", "sim_1000_cvar_rows.csv", "sim_1000_cvar_lselect.csv",
]


class TestCmdRun:
    def test_full_run_emits_everything(self, tmp_path, toy_data_dir):
        out_dir = tmp_path / "out"
        cfg = write_config(tmp_path / "run.cfg", toy_data_dir, out_dir)
        assert main(["run", str(cfg)]) == 0
        for name in EXPECTED_FILES:
            assert (out_dir / name).is_file(), name
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["version"] == __version__
        assert len(manifest["scenarios"]) == 3
        assert set(manifest["data_checksums"]) == {"AAA.csv", "BBB.csv", "CCC.csv"}
        assert manifest["market_panel"]["n_periods"] == 39
        assert all(s["selected_l"] in (2, 3) for s in manifest["scenarios"])

    def test_rerun_is_byte_identical(self, tmp_path, toy_data_dir):
        out_dir = tmp_path / "out"
        cfg = write_config(tmp_path / "run.cfg", toy_data_dir, out_dir)
        assert main(["run", str(cfg)]) == 0
        first = tree_digest(out_dir)
        assert main(["run", str(cfg)]) == 0
        assert tree_digest(out_dir) == first

    def test_threads_env_does_not_change_bytes(self, tmp_path, toy_data_dir, monkeypatch):
        out_dir = tmp_path / "out"
        cfg = write_config(tmp_path / "run.cfg", toy_data_dir, out_dir)
        assert main(["run", str(cfg)]) == 0
        serial = tree_digest(out_dir)
        monkeypatch.setenv("RISKLAB_THREADS", "3")
        assert main(["run", str(cfg)]) == 0
        assert tree_digest(out_dir) == serial

    def test_invalid_threads_env(self, tmp_path, toy_data_dir, monkeypatch, capsys):
        cfg = write_config(tmp_path / "run.cfg", toy_data_dir, tmp_path / "out")
        monkeypatch.setenv("RISKLAB_THREADS", "many")
        assert main(["run", str(cfg)]) == 1
        assert capsys.readouterr().err.startswith("config-error:")

    def test_missing_data_dir_exits_2(self, tmp_path, capsys):
        missing = tmp_path / "nodata"
        cfg = write_config(tmp_path / "run.cfg", missing, tmp_path / "out")
        assert main(["run", str(cfg)]) == 2
        err = capsys.readouterr().err
        assert err.startswith("data-error:")
        assert "nodata" in err

    def test_config_error_exits_1(self, tmp_path, toy_data_dir, capsys):
        cfg = write_config(tmp_path / "run.cfg", toy_data_dir, tmp_path / "out",
                           extra="[run]\nannual_rf = -1\n")
        assert main(["run", str(cfg)]) == 1
        assert capsys.readouterr().err.startswith("config-error:")


class TestCmdPlotdata:
    def make_rows(self, path, rows):
        path.write_text("epsilon,model,mu,sigma_d,sortino\n"
                        + "\n".join(",".join(map(str, r)) for r in rows) + "\n")
        return path

    def test_pivot_two_models(self, tmp_path):
        rows_csv = self.make_rows(tmp_path / "rows.csv", [
            (0.01, "VaR", 1, 1, 0.5), (0.02, "VaR", 1, 1, 0.6),
            (0.01, "WVaR", 1, 1, 0.4), (0.02, "WVaR", 1, 1, 0.7),
        ])
        out_csv = tmp_path / "pivot.csv"
        assert main(["plotdata", str(rows_csv), str(out_csv)]) == 0
        lines = out_csv.read_text().splitlines()
        assert lines == ["epsilon,sr_VaR,sr_WVaR", "0.01,0.5,0.4", "0.02,0.6,0.7"]

    def test_sorts_unsorted_input(self, tmp_path):
        rows_csv = self.make_rows(tmp_path / "rows.csv", [
            (0.09, "CVaR", 1, 1, 0.3), (0.01, "CVaR", 1, 1, 0.1), (0.05, "CVaR", 1, 1, 0.2),
        ])
        out_csv = tmp_path / "pivot.csv"
        assert main(["plotdata", str(rows_csv), str(out_csv)]) == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "epsilon,sr_CVaR"
        assert [line.split(",")[0] for line in lines[1:]] == ["0.01", "0.05", "0.09"]

    def test_roundtrip_from_run_output(self, tmp_path, toy_data_dir):
        out_dir = tmp_path / "out"
        cfg = write_config(tmp_path / "run.cfg", toy_data_dir, out_dir)
        assert main(["run", str(cfg)]) == 0
        pivot = tmp_path / "pivot.csv"
        assert main(["plotdata", str(out_dir / "market_var_rows.csv"), str(pivot)]) == 0
        lines = pivot.read_text().splitlines()
        assert lines[0] == "epsilon,sr_VaR,sr_WVaR"
        assert len(lines) == 1 + 5  # grid_step 0.02 -> 5 sweep points

    def test_malformed_input_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("foo,bar\n1,2\n")
        assert main(["plotdata", str(bad), str(tmp_path / "out.csv")]) == 2
        assert capsys.readouterr().err.startswith("data-error:")
        missing = tmp_path / "missing.csv"
        assert main(["plotdata", str(missing), str(tmp_path / "out.csv")]) == 2


class TestVersion:
    def test_version_prints(self, capsys):
        assert main(["version"]) == 0
        assert capsys.readouterr().out.strip() == __version__
