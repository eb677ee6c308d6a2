import json
import math
from pathlib import Path

import numpy as np
import pytest

import rtmodes as rt
from rtmodes.cli import main
from rtmodes.config import KEYS, key_help, load_config
from rtmodes.errors import ConfigurationError


BASE = """
geometry.m = 1.0
geometry.ell = 1.0
geometry.g = 1.0
geometry.sigma = 0.1      # surface tension
fluid.lower.K = 2.0
fluid.upper.K = 1.0
mesh.elements_per_side = 16
sweep.n = 6
"""


@pytest.fixture()
def cfg_path(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(BASE + f"output.dir = {tmp_path / 'out'}\n")
    return p


def test_defaults_and_parsing(cfg_path):
    cfg = load_config(cfg_path)
    assert cfg["geometry.sigma"] == 0.1
    assert cfg["mesh.elements_per_side"] == 16
    assert cfg["fluid.lower.gamma"] == 1.0     # default survives
    prof = cfg.profile()
    assert prof.rho_plus == pytest.approx(2.0)
    mesh = cfg.mesh()
    assert mesh.n_elements == 32


def test_overrides_win(cfg_path):
    cfg = load_config(cfg_path, overrides=["geometry.sigma=0.2", "sweep.n=3"])
    assert cfg["geometry.sigma"] == 0.2
    assert cfg["sweep.n"] == 3


def test_unknown_key_rejected(cfg_path, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text(BASE + "geometry.elll = 2\n")
    with pytest.raises(ConfigurationError, match="geometry.elll"):
        load_config(bad)
    with pytest.raises(ConfigurationError, match="nope"):
        load_config(cfg_path, overrides=["nope=1"])


def test_invalid_values_name_keys(cfg_path):
    with pytest.raises(ConfigurationError, match="geometry.sigma"):
        load_config(cfg_path, overrides=["geometry.sigma=-1"])
    with pytest.raises(ConfigurationError, match="parse"):
        load_config(cfg_path, overrides=["geometry.g=abc"])


def test_config_hash_tracks_values(cfg_path):
    a = load_config(cfg_path)
    b = load_config(cfg_path, overrides=["sweep.n=7"])
    assert a.config_hash() != b.config_hash()
    assert a.config_hash() == load_config(cfg_path).config_hash()


def test_key_help_covers_registry():
    text = key_help()
    for key in KEYS:
        assert key in text


def test_cli_help_documents_keys(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    assert "geometry.sigma" in out
    assert "synthesis.f.a" in out


class TestCliRuns:
    def test_profile_and_mode(self, cfg_path, tmp_path, capsys):
        assert main(["profile", "--config", str(cfg_path)]) == 0
        csv = (tmp_path / "out" / "profile.csv").read_text().splitlines()
        assert csv[0] == "x3,rho0,Pprime_rho0,eps0,delta0"
        assert main(["mode", "--config", str(cfg_path), "--xi", "1.0"]) == 0
        meta = json.loads((tmp_path / "out" / "run.json").read_text())
        assert meta["lambda"] > 0
        assert "config_hash" in meta

    def test_dispersion_deterministic(self, cfg_path, tmp_path):
        assert main(["dispersion", "--config", str(cfg_path)]) == 0
        first = (tmp_path / "out" / "curve.csv").read_bytes()
        assert main(["dispersion", "--config", str(cfg_path)]) == 0
        assert (tmp_path / "out" / "curve.csv").read_bytes() == first

    def test_lattice_certificate_comment(self, cfg_path, tmp_path):
        L = math.sqrt(0.1)
        assert main(["lattice", "--config", str(cfg_path), "--L", str(L)]) == 0
        text = (tmp_path / "out" / "lattice.csv").read_text()
        assert "# certificate: stable" in text
        assert main(["lattice", "--config", str(cfg_path), "--L", "1.0"]) == 0
        text = (tmp_path / "out" / "lattice.csv").read_text()
        assert "certificate" not in text
        meta = json.loads((tmp_path / "out" / "run.json").read_text())
        assert meta["Lambda_L"] > 0

    def test_lattice_vs_dispersion_metadata(self, cfg_path, tmp_path):
        assert main(["dispersion", "--config", str(cfg_path)]) == 0
        Lam = json.loads((tmp_path / "out" / "run.json").read_text())["Lambda"]
        assert main(["lattice", "--config", str(cfg_path), "--L", "1.0"]) == 0
        LamL = json.loads((tmp_path / "out" / "run.json").read_text())["Lambda_L"]
        assert LamL <= Lam + 1e-3

    def test_evolve_columns(self, cfg_path, tmp_path):
        assert main(["evolve", "--config", str(cfg_path), "--xi", "1.0",
                     "--T", "1.0", "--dt", "0.01"]) == 0
        header = (tmp_path / "out" / "traj.csv").read_text().splitlines()[0]
        assert header == "t,kinetic,potential,dissipated_cum,norm1,norm2"

    def test_synthesize_files(self, cfg_path, tmp_path):
        code = main(["synthesize", "--config", str(cfg_path), "--t", "0,1",
                     "--grid", "3,3,4",
                     "--set", "synthesis.radial_nodes=4",
                     "--set", "synthesis.angular_nodes=8"])
        assert code == 0
        for t in ("0", "1"):
            path = tmp_path / "out" / "fields" / f"t{t}.csv"
            head = path.read_text().splitlines()
            assert head[0] == "x1,x2,x3,eta1,eta2,eta3,v1,v2,v3,q"
            assert len(head) == 1 + 3 * 3 * 4

    def test_exit_codes(self, cfg_path):
        assert main(["mode", "--config", str(cfg_path), "--set", "geometry.sigma=-1"]) == 2
        assert main(["mode", "--config", str(cfg_path), "--set", "bogus.key=1"]) == 2
        # evolve at a stable frequency is a configuration error
        assert main(["evolve", "--config", str(cfg_path), "--xi", "5.0"]) == 2

    def test_verify_quick(self, cfg_path, capsys):
        assert main(["verify", "--config", str(cfg_path), "--quick"]) == 0
        out = capsys.readouterr().out
        assert "pass" in out and "FAIL" not in out

    def test_forms_dump(self, cfg_path, tmp_path, capsys):
        assert main(["forms", "--config", str(cfg_path), "--xi", "1.0", "--dump"]) == 0
        for name in ("E0", "E1", "J"):
            path = tmp_path / "out" / f"forms_{name}.txt"
            lines = path.read_text().splitlines()
            assert lines[0] == "# row col value"
            row, col, val = lines[1].split()
            int(row), int(col), float(val)

    def test_threads_flag_deterministic(self, cfg_path, tmp_path):
        assert main(["dispersion", "--config", str(cfg_path), "--threads", "3"]) == 0
        parallel = (tmp_path / "out" / "curve.csv").read_bytes()
        assert main(["dispersion", "--config", str(cfg_path)]) == 0
        assert (tmp_path / "out" / "curve.csv").read_bytes() == parallel
