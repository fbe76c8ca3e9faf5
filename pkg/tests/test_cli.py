"""Command line surface: config parsing, runs, outputs, exit codes."""

import configparser
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from hybridmem import cli
from hybridmem.config import (
    ConfigError,
    SCENARIO_NAMES,
    check_scenario_name,
    parse_config,
    print_defaults,
    scenario_defaults,
)
from hybridmem.scenarios import (
    Axis,
    SweepGrid,
    format_cell,
    run_scenario,
    write_csv,
)


def _write(tmp_path, body, name="run.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(body), encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------- config


def test_scenario_names_are_checked():
    check_scenario_name("fig3b")
    with pytest.raises(ConfigError, match="fig2d"):
        check_scenario_name("fig2x")        # nearest-name hint


def test_defaults_differ_per_scenario():
    assert scenario_defaults("fig3a")["rates"]["kappa"] == pytest.approx(0.01)
    assert scenario_defaults("fig2c")["rates"]["kappa"] == pytest.approx(0.0)
    assert scenario_defaults("fig4c")["sweep"]["points"] == 101
    assert scenario_defaults("fig3b")["sweep"]["t_max"] == pytest.approx(3.0)


def test_unknown_key_gets_a_suggestion(tmp_path):
    path = _write(tmp_path, """
        [rates]
        kapa = 0.1
    """)
    with pytest.raises(ConfigError, match="did you mean 'kappa'"):
        parse_config("fig2c", path)


def test_unknown_section_rejected(tmp_path):
    path = _write(tmp_path, """
        [ratez]
        kappa = 0.1
    """)
    with pytest.raises(ConfigError, match="rates"):
        parse_config("fig2c", path)


def test_value_range_enforced(tmp_path):
    path = _write(tmp_path, """
        [rates]
        kappa = -1
    """)
    with pytest.raises(ConfigError, match="kappa"):
        parse_config("fig2c", path)
    path = _write(tmp_path, """
        [sweep]
        points = 1
    """, name="p.ini")
    with pytest.raises(ConfigError, match="points"):
        parse_config("fig2c", path)


def test_grid_size_cap(tmp_path):
    path = _write(tmp_path, """
        [sweep]
        points = 120
    """)
    with pytest.raises(ConfigError, match="cell guard"):
        parse_config("fig2c", path)   # 120 x 120 > 10_000


def test_bad_type_reported(tmp_path):
    path = _write(tmp_path, """
        [sweep]
        points = many
    """)
    with pytest.raises(ConfigError, match="points"):
        parse_config("fig2c", path)


def test_config_hash_tracks_content(tmp_path):
    base = parse_config("fig3b", None)
    again = parse_config("fig3b", None)
    assert base.content_hash() == again.content_hash()
    path = _write(tmp_path, """
        [sweep]
        time_points = 200
    """)
    assert parse_config("fig3b", path).content_hash() != base.content_hash()


def test_print_defaults_round_trips(tmp_path, capsys):
    assert cli.main(["run", "fig3b", "--print-defaults"]) == 0
    text = capsys.readouterr().out
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(text)
    assert set(parser.sections()) == {"model", "rates", "sweep", "output"}
    path = tmp_path / "defaults.ini"
    path.write_text(text, encoding="utf-8")
    roundtrip = parse_config("fig3b", str(path))
    assert roundtrip.flat() == parse_config("fig3b", None).flat()


def test_every_scenario_prints_parseable_defaults():
    for name in SCENARIO_NAMES:
        parser = configparser.ConfigParser(interpolation=None)
        parser.read_string(print_defaults(name))
        assert parser.has_section("sweep")


# ------------------------------------------------------------- scenarios


def test_axis_and_grid_guards():
    with pytest.raises(ValueError):
        Axis("x", 0.0, 1.0, 1)
    with pytest.raises(ValueError):
        SweepGrid((Axis("x", 0.0, 1.0, 101), Axis("y", 0.0, 1.0, 101)))
    grid = SweepGrid((Axis("x", 0.0, 1.0, 2), Axis("y", 0.0, 2.0, 3)))
    cells = grid.cells()
    assert grid.shape == (2, 3)
    assert [c["x"] for c in cells] == [0.0, 0.0, 0.0, 1.0, 1.0, 1.0]
    assert [c["y"] for c in cells[:3]] == [0.0, 1.0, 2.0]


def test_cell_formatting():
    assert format_cell(True) == "true"
    assert format_cell(False) == "false"
    assert format_cell(3) == "3"
    assert format_cell("tag") == "tag"
    assert format_cell(0.1) == "0.1"
    assert format_cell(1.0 / 3.0) == "0.333333333333"


def test_csv_writer(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(str(path), ["a", "b"], [[1, 0.5], [2, np.nan]])
    text = path.read_text(encoding="utf-8")
    assert text == "a,b\n1,0.5\n2,nan\n"


@pytest.fixture(scope="module")
def small_grid_cfg(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cfg")
    path = tmp / "small.ini"
    path.write_text(textwrap.dedent("""
        [sweep]
        points = 5
        [output]
        figures = false
    """), encoding="utf-8")
    return parse_config("fig2d", str(path))


def test_threaded_run_is_deterministic(small_grid_cfg, tmp_path):
    one = run_scenario(small_grid_cfg, str(tmp_path / "a"), threads=1)
    four = run_scenario(small_grid_cfg, str(tmp_path / "b"), threads=4)
    again = run_scenario(small_grid_cfg, str(tmp_path / "c"), threads=1)
    bytes_one = open(one.csv_path, "rb").read()
    assert open(four.csv_path, "rb").read() == bytes_one
    assert open(again.csv_path, "rb").read() == bytes_one
    assert one.ok and four.ok


def test_metadata_contents(small_grid_cfg, tmp_path):
    result = run_scenario(small_grid_cfg, str(tmp_path), threads=1)
    meta = dict(
        line.split(" = ", 1)
        for line in open(result.meta_path, encoding="utf-8")
        .read()
        .splitlines()
        if line
    )
    assert meta["scenario"] == "fig2d"
    assert meta["config_sha"] == small_grid_cfg.content_hash()
    assert meta["rows"] == "25"
    assert meta["hygiene_ok"] == "true"
    assert meta["cfg.sweep.points"] == "5"
    assert "version" in meta and "revision" in meta
    assert float(meta["worst.trace_error"]) < 1e-9
    assert result.figure_path is None


def test_figures_rendered_on_request(tmp_path):
    path = _write(tmp_path, """
        [model]
        mode = ri
        [sweep]
        time_points = 40
        t_max = 2.0
        [output]
        dpi = 40
    """)
    cfg = parse_config("custom", path)
    result = run_scenario(cfg, str(tmp_path), threads=1)
    assert result.figure_path is not None
    assert str(result.figure_path).endswith(".png")
    with open(result.figure_path, "rb") as fh:
        assert fh.read(8) == b"\x89PNG\r\n\x1a\n"


def test_custom_scenario_time_window(tmp_path):
    # t_max is quoted in coupling-scaled units: the last sample lands there
    path = _write(tmp_path, """
        [model]
        mode = ri
        g0 = 2.0
        [sweep]
        time_points = 10
        t_max = 1.0
        [output]
        figures = false
    """)
    cfg = parse_config("custom", path)
    result = run_scenario(cfg, str(tmp_path), threads=1)
    rows = open(result.csv_path, encoding="utf-8").read().splitlines()
    assert rows[0].split(",")[0] == "g0_t"
    assert float(rows[-1].split(",")[0]) == pytest.approx(1.0, abs=1e-9)


def test_custom_scenario_w_mode(tmp_path):
    path = _write(tmp_path, """
        [model]
        mode = w
        n_ensembles = 2
        [sweep]
        time_points = 30
        t_max = 2.0
        [output]
        figures = false
    """)
    cfg = parse_config("custom", path)
    result = run_scenario(cfg, str(tmp_path), threads=1)
    header = open(result.csv_path, encoding="utf-8").readline().strip()
    assert header == "eta_t,f_unconditional,f_conditional,success_probability"


# ------------------------------------------------------------------ cli


def test_unknown_scenario_exit_code(capsys):
    assert cli.main(["run", "fig2x"]) == 2
    assert "did you mean" in capsys.readouterr().err


def test_config_error_exit_code(tmp_path, capsys):
    path = _write(tmp_path, """
        [rates]
        kapa = 1
    """)
    assert cli.main(["run", "fig2c", "--config", path]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_file_exit_code(tmp_path, capsys):
    missing = str(tmp_path / "nope.ini")
    assert cli.main(["run", "fig2c", "--config", missing]) == 2


def test_bad_thread_count(capsys):
    assert cli.main(["run", "fig3b", "--threads", "0"]) == 2


def test_diagnostics_breach_exit_code(tmp_path, capsys):
    # a rate far beyond the stable step size must surface as exit 3
    path = _write(tmp_path, """
        [model]
        mode = ri
        [rates]
        kappa = 5000
        [sweep]
        time_points = 10
        [output]
        figures = false
    """)
    code = cli.main(["run", "custom", "--config", path,
                     "--out", str(tmp_path)])
    assert code == 3
    assert "diagnostics" in capsys.readouterr().err


def test_cli_run_writes_outputs(tmp_path, capsys):
    path = _write(tmp_path, """
        [sweep]
        points = 3
        [output]
        figures = false
    """)
    code = cli.main(["run", "fig2d", "--config", path,
                     "--out", str(tmp_path / "out")])
    assert code == 0
    out = capsys.readouterr().out
    assert "fig2d.csv" in out and "fig2d.meta" in out
    assert (tmp_path / "out" / "fig2d.csv").exists()


def test_installed_entry_point_help():
    proc = subprocess.run([sys.executable, "-m", "pytest", "--version"],
                          capture_output=True)
    assert proc.returncode == 0   # sanity: subprocess plumbing works
    proc = subprocess.run(["hybridmem", "run", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "--print-defaults" in proc.stdout
