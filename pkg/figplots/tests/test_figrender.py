"""Figure rendering, CLI, and end-to-end tests for the plotting package."""

import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

import fig_testdata as td
from ksefigs import cli, figures, io


def _paths_by_id(results):
    return {res.figure_id: res.path for res in results}


def _messages_by_id(results):
    return {res.figure_id: res.message for res in results}


def test_scalar_run_renders_all_seven(tmp_path):
    run = td.build_scalar_run(str(tmp_path / "run"))
    out = str(tmp_path / "figs")
    results = figures.render_figures(run, out)
    assert [res.figure_id for res in results] == list(figures.FIGURE_IDS)
    for res in results:
        assert res.path is not None, f"{res.figure_id}: {res.message}"
        assert os.path.basename(res.path) == f"{res.figure_id}.png"
        assert os.path.getsize(res.path) > 1000


def test_rerun_is_byte_identical(tmp_path):
    run = td.build_scalar_run(str(tmp_path / "run"))
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    first = figures.render_figures(run, out_a)
    second = figures.render_figures(run, out_b)
    for res_a, res_b in zip(first, second):
        with open(res_a.path, "rb") as fa, open(res_b.path, "rb") as fb:
            assert fa.read() == fb.read(), res_a.figure_id


def test_drift_only_run_renders_just_drift(tmp_path):
    run = td.build_drift_only_run(str(tmp_path / "run"))
    results = figures.render_figures(run, str(tmp_path / "figs"))
    paths = _paths_by_id(results)
    messages = _messages_by_id(results)
    assert paths["drift"] is not None
    for fid in figures.FIGURE_IDS:
        if fid == "drift":
            continue
        assert paths[fid] is None
        assert messages[fid]


def test_vector_run_marks_gaps(tmp_path):
    run = td.build_vector_run(str(tmp_path / "run"))
    results = figures.render_figures(run, str(tmp_path / "figs"))
    paths = _paths_by_id(results)
    messages = _messages_by_id(results)
    # still renders the shared figures, including the inner-product panels
    # (two of the four carry data in a vector run)
    for fid in ("spectrum", "lp_phi", "lp_derivs", "planes", "energy_terms"):
        assert paths[fid] is not None, f"{fid}: {messages[fid]}"
    # no drift.csv and no scalar-field checkpoint
    assert paths["drift"] is None
    assert paths["snapshots"] is None
    assert "phi" in messages["snapshots"]


def test_unknown_figure_id_rejected(tmp_path):
    run = td.build_scalar_run(str(tmp_path / "run"))
    with pytest.raises(ValueError, match="unknown figure ids"):
        figures.render_figures(run, str(tmp_path / "figs"), ["nope"])


def test_subset_request_renders_only_that_figure(tmp_path):
    run = td.build_scalar_run(str(tmp_path / "run"))
    out = str(tmp_path / "figs")
    results = figures.render_figures(run, out, ["spectrum"])
    assert len(results) == 1
    assert results[0].figure_id == "spectrum"
    assert sorted(os.listdir(out)) == ["spectrum.png"]


def test_late_time_average_covers_final_tenth(tmp_path):
    def amp(step, shell):
        return {18: 5.0, 19: 7.0}.get(step, 1.0)

    td.write_spectra(str(tmp_path), steps=range(20), amplitude_of=amp)
    paths = io.spectrum_paths(str(tmp_path))
    shells, averaged = figures.late_time_average(paths)
    assert shells.shape == averaged.shape
    assert np.allclose(averaged, 6.0)


def test_late_time_average_single_file_floor(tmp_path):
    def amp(step, shell):
        return 3.0 if step == 4 else 1.0

    td.write_spectra(str(tmp_path), steps=range(5), amplitude_of=amp)
    _, averaged = figures.late_time_average(io.spectrum_paths(str(tmp_path)))
    assert np.allclose(averaged, 3.0)


def test_spectral_derivative_closed_forms():
    n = 32
    x = np.linspace(-np.pi, np.pi, n, endpoint=False)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    f = np.sin(x1)
    assert np.allclose(figures._spectral_derivative(f, 1, 0), np.cos(x1),
                       atol=1e-12)
    g = np.sin(x1) * np.sin(2.0 * x2)
    assert np.allclose(figures._spectral_derivative(g, 1, 1),
                       2.0 * np.cos(x1) * np.cos(2.0 * x2), atol=1e-12)
    h = np.cos(3.0 * x1 + x2)
    lap = (figures._spectral_derivative(h, 2, 0)
           + figures._spectral_derivative(h, 0, 2))
    assert np.allclose(lap, -10.0 * h, atol=1e-12)


def test_spectral_derivative_drops_unmatched_line_for_odd_orders():
    n = 8
    x = np.linspace(-np.pi, np.pi, n, endpoint=False)
    x1, _ = np.meshgrid(x, x, indexing="ij")
    f = np.cos(4.0 * x1)  # highest representable frequency on this grid
    assert np.allclose(figures._spectral_derivative(f, 1, 0), 0.0, atol=1e-12)
    assert np.allclose(figures._spectral_derivative(f, 2, 0), -16.0 * f,
                       atol=1e-10)


def test_cli_full_run_exits_zero(tmp_path, capsys):
    run = td.build_scalar_run(str(tmp_path / "run"))
    out = str(tmp_path / "figs")
    assert cli.main([run, out]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(figures.FIGURE_IDS)
    assert all(line.startswith("wrote ") for line in lines)


def test_cli_empty_dir_exits_one(tmp_path, capsys):
    run = str(tmp_path / "empty")
    os.makedirs(run)
    assert cli.main([run, str(tmp_path / "figs")]) == 1
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(figures.FIGURE_IDS)
    assert all(line.startswith("skipped ") for line in lines)


def test_cli_only_flag(tmp_path, capsys):
    run = td.build_scalar_run(str(tmp_path / "run"))
    assert cli.main([run, str(tmp_path / "figs"), "--only", "planes"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith("wrote planes")


@pytest.mark.skipif(shutil.which("kse") is None,
                    reason="simulator CLI not on PATH")
def test_end_to_end_against_simulator_output(tmp_path):
    run_dir = str(tmp_path / "run")
    config = tmp_path / "tiny.cfg"
    config.write_text(
        "model = scalar\n"
        "n = 32\n"
        "lambda = 8.1\n"
        "h = 1e-3\n"
        "t_final = 0.05\n"
        "save_every = 10\n"
        "init = KKP\n"
        f"output_dir = {run_dir}\n")
    proc = subprocess.run(["kse", "run", str(config)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr

    out = str(tmp_path / "figs")
    plot = subprocess.run([sys.executable, "-m", "ksefigs.cli", run_dir, out],
                          capture_output=True, text=True)
    assert plot.returncode == 0, plot.stdout + plot.stderr
    written = sorted(os.listdir(out))
    # a plain run keeps no drift table, so that one figure is skipped
    expected = sorted(f"{fid}.png" for fid in figures.FIGURE_IDS
                      if fid != "drift")
    assert written == expected
    assert "skipped drift" in plot.stdout
