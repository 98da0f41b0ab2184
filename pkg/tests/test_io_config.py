import numpy as np
import pytest

from maxplus_riccati.config import Config, load_config, parse_config
from maxplus_riccati.errors import ConfigError
from maxplus_riccati.io import TRAJECTORY_COLUMNS, read_matrix, read_trajectory, write_matrix, write_trajectory


def test_matrix_roundtrip_is_exact(tmp_path, rng):
    F = rng.standard_normal((5, 5)) * 10.0 ** rng.integers(-8, 8, (5, 5))
    write_matrix(tmp_path / "F.csv", F)
    assert np.array_equal(read_matrix(tmp_path / "F.csv"), F)


def test_matrix_header(tmp_path):
    write_matrix(tmp_path / "F.csv", np.eye(2))
    lines = (tmp_path / "F.csv").read_text().splitlines()
    assert lines[0] == "dim=2" and len(lines) == 3


def test_matrix_bad_header(tmp_path):
    (tmp_path / "F.csv").write_text("dim=3\n1,2,3\n")
    with pytest.raises(ValueError):
        read_matrix(tmp_path / "F.csv")


def test_trajectory_roundtrip(tmp_path):
    rows = [(0.0, 1.0, 2.0, 3.0, 0.0), (0.1, 1.5, 2.5, 3.5, 0.01)]
    write_trajectory(tmp_path / "t.csv", rows)
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert header == ",".join(TRAJECTORY_COLUMNS)
    back = read_trajectory(tmp_path / "t.csv")
    assert back[1]["margin_P_minus_M"] == 0.01 and back[0]["frob_R"] == 3.0


def test_trajectory_bad_header(tmp_path):
    (tmp_path / "t.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_trajectory(tmp_path / "t.csv")


def test_default_config():
    cfg = load_config()
    assert cfg == Config()
    assert cfg.grid_n == 32 and cfg.anchor_m == -0.1 and cfg.recipe_kappa == 8


def test_parse_config_values(tmp_path):
    cfg = parse_config("grid.n = 16  # comment\nrecipe.mtilde_eps = 0.1, 0.5\nbench.kappas=2,4\n"
                       "custom.A = a.csv\n", base=tmp_path)
    assert cfg.grid_n == 16
    assert cfg.recipe_mtilde_eps == (0.1, 0.5)
    assert cfg.bench_kappas == (2, 4)
    assert cfg.custom == {"A": str(tmp_path / "a.csv")}


@pytest.mark.parametrize("text, match", [
    ("grid.size=4\n", "grid.size"),
    ("grid.n=abc\n", "grid.n"),
    ("anchor.m=0.1\n", "anchor.m"),
    ("recipe.mode=doubling\nrecipe.kappa=6\n", "power of two"),
    ("just text\n", "key=value"),
    ("problem.name=custom\n", "custom.A"),
    ("custom.B=b.csv\n", "custom.B"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_load_config_overrides():
    assert load_config(grid_n=16).grid_n == 16
    with pytest.raises(ConfigError):
        load_config(no_such_field=1)
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.txt")
