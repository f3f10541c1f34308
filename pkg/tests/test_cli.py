import json

import numpy as np
import pytest

from cgclutter.cli import main

SIM = ["simulate", "--model", "finite-k", "--gamma", "0.25", "--T", "8",
       "--duration", "2000", "--dt", "0.1"]


def run(argv):
    return main([str(a) for a in argv])


class TestSimulate:
    def test_deterministic_outputs(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(SIM + ["--seed", "7", "--events", "--clutter", "--out", a]) == 0
        assert run(SIM + ["--seed", "7", "--events", "--clutter", "--out", b]) == 0
        for name in ("texture.csv", "events.csv", "clutter.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_seed_changes_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run(SIM + ["--seed", "7", "--out", a])
        run(SIM + ["--seed", "8", "--out", b])
        assert (a / "texture.csv").read_bytes() != (b / "texture.csv").read_bytes()

    def test_env_seed_override(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a", tmp_path / "b"
        monkeypatch.setenv("CLUTTER_SEED", "99")
        run(SIM + ["--seed", "7", "--out", a])
        run(SIM + ["--seed", "8", "--out", b])
        assert (a / "texture.csv").read_bytes() == (b / "texture.csv").read_bytes()

    def test_manifest_contents(self, tmp_path):
        out = tmp_path / "m"
        run(SIM + ["--seed", "5", "--out", out])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 5
        assert manifest["config"]["gamma"] == 0.25
        assert manifest["config"]["mode"] == "finite-exact"
        assert any(p.endswith("texture.csv") for p in manifest["outputs"])

    def test_nu_flag_resolution(self, tmp_path, capsys):
        out = tmp_path / "n"
        assert run(["simulate", "--model", "finite-k", "--nu", "2", "--T", "8",
                    "--duration", "1000", "--dt", "0.1", "--seed", "1",
                    "--out", out]) == 0
        assert "nu=2" in capsys.readouterr().out

    def test_inconsistent_flags_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["simulate", "--model", "finite-k", "--gamma", "1", "--T", "8",
                 "--nu", "2", "--duration", "100", "--dt", "0.1",
                 "--out", tmp_path / "x"])
        assert exc.value.code == 2

    def test_missing_shape_flags_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["simulate", "--model", "finite-k", "--gamma", "1",
                 "--duration", "100", "--dt", "0.1", "--out", tmp_path / "x"])
        assert exc.value.code == 2

    def test_bad_custom_lst_exit_3(self, tmp_path, capsys):
        table = tmp_path / "bad.csv"
        # G(0) != 1: not a probability transform
        table.write_text("0.0 0.5\n1.0 0.3\n2.0 0.2\n")
        code = run(["simulate", "--model", "custom-lst", "--lst-file", table,
                    "--nu", "2", "--duration", "100", "--dt", "0.1",
                    "--out", tmp_path / "y"])
        assert code == 3
        assert "validation failed" in capsys.readouterr().err

    def test_custom_lst_roundtrip(self, tmp_path, capsys):
        # tabulate the finite builtin's transform and simulate from the table
        z = np.concatenate([[0.0], np.logspace(-4, 6, 400)])
        G = np.exp(-2.0 * (z / 2.0) / (z / 2.0 + 1.0))
        table = tmp_path / "lst.csv"
        table.write_text("".join(f"{zi:.17g},{gi:.17g}\n" for zi, gi in zip(z, G)))
        code = run(["simulate", "--model", "custom-lst", "--lst-file", table,
                    "--nu", "2", "--T", "8", "--duration", "2000", "--dt", "0.1",
                    "--seed", "3", "--out", tmp_path / "z"])
        assert code == 0
        assert "mode=finite-exact" in capsys.readouterr().out


class TestValidate:
    def test_moments_suite_passes(self, capsys):
        code = run(["validate", "--model", "finite-k", "--nu", "2",
                    "--suite", "moments"])
        assert code == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out

    def test_gaussian_limit_large_nu(self, capsys):
        code = run(["validate", "--model", "infinite-gamma", "--nu", "10000",
                    "--suite", "gaussian-limit"])
        assert code == 0

    def test_marginal_suite(self, capsys):
        code = run(["validate", "--model", "finite-k", "--nu", "2",
                    "--duration", "30000", "--suite", "marginal", "--seed", "21"])
        assert code == 0
        assert "ks_vs_k-texture" in capsys.readouterr().out


class TestLawtable:
    def test_polya_aeppli_table(self, capsys):
        assert run(["lawtable", "--law", "polya-aeppli", "--nu", "2", "--p", "0.1",
                    "--n-max", "3"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "n,pmf"
        assert len(lines) == 5
        assert float(lines[1].split(",")[1]) == pytest.approx(np.exp(-1.8))

    def test_texture_table_to_file(self, tmp_path):
        f = tmp_path / "t.csv"
        assert run(["lawtable", "--law", "gamma", "--nu", "2", "--x-max", "5",
                    "--points", "11", "--out", f]) == 0
        rows = f.read_text().strip().split("\n")
        assert rows[0] == "x,pdf,cdf"
        assert len(rows) == 12

    def test_missing_parameter_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            run(["lawtable", "--law", "polya-aeppli", "--nu", "2"])
        assert exc.value.code == 2
