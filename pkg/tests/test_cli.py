import json
import os
import subprocess
import sys

import numpy as np
import pytest

from weilkit.cli import main
from weilkit.grid import hermite_state, load_grid, save_grid
from weilkit.siegel import mp_fourier
from weilkit.symplectic import QuadraticHamiltonian


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_verify_pass_and_fail(capsys):
    assert main(["verify", "--suite", "symplectic", "--seed", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] and report["seed"] == 3
    assert main(["verify", "--suite", "symplectic", "--tol", "0", "--format", "csv"]) == 1
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "check,residual,tolerance,pass"


@pytest.mark.parametrize("argv", [
    ["verify", "--suite", "nonsense"],
    ["verify", "--format", "xml"],
    ["verify", "--n", "5"],
    ["verify", "--tol", "-1"],
    ["frobnicate"],
    ["kernel", "--t", "1.0"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_evolve_roundtrip(tmp_path, capsys):
    f = hermite_state((3,), 12.0, 256)
    src = tmp_path / "in.json"
    save_grid(f, src)
    el = _write(tmp_path / "m.json", mp_fourier(1).to_dict())
    out = tmp_path / "out.json"
    assert main(["evolve", "--in", str(src), "--element", el, "--out", str(out)]) == 0
    meta = json.loads(capsys.readouterr().out)
    assert abs(meta["norm_out"] - meta["norm_in"]) < 1e-10
    # the Fourier element multiplies h_3 by i^3 e^{i pi/4}
    g = load_grid(out)
    assert (g - f * (1j ** 3 * np.exp(0.25j * np.pi))).norm() < 1e-9

    ham = _write(tmp_path / "h.json", QuadraticHamiltonian.oscillator(1).to_dict())
    assert main(["evolve", "--in", str(src), "--hamiltonian", ham, "--t", "0.5",
                 "--out", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["path"] == "direct"
    assert main(["evolve", "--in", str(src), "--out", str(out)]) == 2


def test_transform_points_and_growth(tmp_path, capsys):
    src = _write(tmp_path / "s.json", {"hermite": [[[0], [1.0, 0.0]]]})
    pts = _write(tmp_path / "p.json", [{"n": 1, "re": [[0.0]], "im": [[1.0]]}])
    assert main(["transform", "--in", src, "--points", pts]) == 0
    val = json.loads(capsys.readouterr().out)["values"][0]["u"]
    # int pi^{-1/4} e^{-x^2} dx = pi^{1/4}
    assert np.isclose(val[0], np.pi ** 0.25) and abs(val[1]) < 1e-14
    assert main(["transform", "--in", src, "--path", "boundary", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("step,")
    assert main(["transform", "--in", src]) == 2


def test_kernel_and_cocycle(tmp_path, capsys):
    ham = _write(tmp_path / "h.json", QuadraticHamiltonian.oscillator(1).to_dict())
    assert main(["kernel", "--in", ham, "--t", "1.0", "--x", "0.0", "--y", "0.0"]) == 0
    K = json.loads(capsys.readouterr().out)["values"][0]["K"]
    assert np.isclose(complex(*K), (2j * np.pi * np.sin(1.0)) ** -0.5)
    assert main(["kernel", "--in", ham, "--t", str(np.pi)]) == 2
    capsys.readouterr()
    el = _write(tmp_path / "m.json", mp_fourier(1).to_dict())
    a = _write(tmp_path / "a.json", [[1.0]])
    assert main(["cocycle", "--in", el, "--a", a]) == 0
    assert json.loads(capsys.readouterr().out)["maslov"]["snap_residual"] < 1e-3


def test_norm42(tmp_path, capsys):
    src = _write(tmp_path / "s.json", {"hermite": [[[2], [1.0, 0.0]]]})
    assert main(["norm42", "--in", src]) == 0
    ratio = json.loads(capsys.readouterr().out)["ratio"]
    assert np.isclose(ratio, -8 * np.pi ** 1.5, rtol=1e-2)


def test_module_entry_point(tmp_path):
    env = dict(os.environ, WEILKIT_THREADS="1")
    out = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "weilkit", "verify", "--suite", "symplectic",
                           "--out", str(out)], env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["pass"]
    bad = subprocess.run([sys.executable, "-m", "weilkit", "verify", "--grid-N", "7", "--n", "1"],
                         env=env, capture_output=True, text=True)
    assert bad.returncode == 2
