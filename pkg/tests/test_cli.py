import subprocess
import sys

import pytest

from selfsim import gallery
from selfsim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gallery_output_pipes_into_nucleus(tmp_path, capsys):
    code, text, _ = run(capsys, "gallery", "golden-rotation")
    assert code == 0
    path = tmp_path / "rot.sys"
    path.write_text(text)
    code, out, _ = run(capsys, "nucleus", str(path))
    assert code == 0
    assert "elements: 6" in out and "n0: 2" in out


def test_stdin_pipe():
    text = subprocess.run([sys.executable, "-m", "selfsim.cli", "gallery", "adding-machine"],
                          capture_output=True, text=True, check=True).stdout
    res = subprocess.run([sys.executable, "-m", "selfsim.cli", "nucleus", "-"], input=text,
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "nucleus: 1 a a^-1" in res.stdout


def test_penrose_homology(capsys):
    code, out, _ = run(capsys, "homology", "penrose", "--n", "1")
    assert code == 0
    assert out.splitlines()[-1] == "H1 = (Z/2)^3; generators [B],[C],[D00]"
    code, out, _ = run(capsys, "homology", "penrose", "--n", "0", "--coeff", "Z/2")
    assert "group: (Z/2)^2" in out


def test_rotation_reports(capsys):
    code, out, _ = run(capsys, "growth", "golden-rotation", "--base", "(0)", "--radius", "3")
    assert code == 0 and "growth: 1 3 5 7" in out
    code, out, _ = run(capsys, "h1class", "golden-rotation", "--element", "R0+R1")
    assert code == 0
    code, out, _ = run(capsys, "complexity", "golden-rotation", "--radius", "2")
    assert code == 0 and out.strip().endswith("5")


def test_algebra_commands(capsys):
    code, out, _ = run(capsys, "algebra", "verify", "penrose")
    assert code == 0
    code, out, _ = run(capsys, "algebra", "recursion", "adding-machine", "--element", "a", "--k", "2")
    assert code == 0
    assert out.strip().splitlines()[-4].split() == ["0", "0", "0", "a"]


def test_dot_exports(capsys):
    code, out, _ = run(capsys, "export-dot", "moore", "golden-rotation")
    assert code == 0 and out.lstrip().startswith("digraph")
    code, out, _ = run(capsys, "export-dot", "cayley", "golden-rotation", "--base", "(0)", "--radius", "2")
    assert code == 0 and "R0" in out


def test_exit_codes(tmp_path, capsys):
    assert run(capsys, "nucleus", str(tmp_path / "missing.sys"))[0] == 1
    bad = tmp_path / "bad.sys"
    bad.write_text("[shift]\nletters: 0 1\n[generator F]\n0 -> 0 G\n")
    code, _, err = run(capsys, "nucleus", str(bad))
    assert code == 1 and "line 4" in err
    assert run(capsys, "--max-states", "5", "nucleus", "penrose")[0] == 2
    assert run(capsys, "h1class", "golden-rotation", "--element", "R0^-1*Q")[0] == 1
    assert run(capsys, "homology", "penrose", "--coeff", "Z/1")[0] == 1


@pytest.mark.parametrize("argv", [
    ["nucleus", "penrose"],
    ["homology", "golden-rotation", "--n", "0"],
    ["dimgroup", "golden-rotation"],
])
def test_deterministic(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[0] == 0


def test_gallery_names_resolve(capsys):
    for name in gallery.GALLERY:
        assert run(capsys, "check-contracting", name)[0] == 0
