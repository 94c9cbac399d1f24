import io
import json
import math
import re

import numpy as np
import pytest

from knotreps import __version__
from knotreps.cli import main

from oracles import hausdorff

TREFOIL_PD = "PD[(1,4,2,5),(3,6,4,1),(5,2,6,3)]"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv)
    return code, (json.loads(out) if out else None), err


def image_points(doc):
    return np.array([s["canonical"] for s in doc["image"]["samples"]]).reshape(-1, 2)


def test_reps_torus():
    code, doc, _ = run_json("reps", "--torus", "2", "3", "--grid", "500", "--seed", "7")
    assert code == 0
    assert doc["tool"] == {"name": "knotreps", "version": __version__}
    assert doc["config"]["grid"] == 500 and doc["config"]["seed"] == 7
    assert doc["config"]["restarts"] == 32
    assert len(doc["knot"]["hash"]) == 64
    pts = image_points(doc)
    assert len(pts) > 300
    assert np.all((pts[:, 0] > math.pi / 6) & (pts[:, 0] < 5 * math.pi / 6))


def test_reps_unknot_is_empty():
    code, doc, _ = run_json("reps", "--braid", "1")
    assert code == 0 and doc["image"]["samples"] == []


def test_reps_pd_matches_torus_up_to_mirror():
    _, a, _ = run_json("reps", "--torus", "2", "3", "--grid", "300")
    _, b, _ = run_json("reps", "--pd", TREFOIL_PD, "--grid", "300")
    _, c, _ = run_json("reps", "--pd", TREFOIL_PD, "--mirror", "--grid", "300")
    pa, pb, pc = image_points(a), image_points(b), image_points(c)
    # this PD code is the left-handed trefoil; its mirror is T(2,3)
    assert hausdorff(pa, pc) <= 1e-6
    assert hausdorff(pa * np.array([1.0, -1.0]), pb) <= 1e-6


def test_reps_writes_svg(tmp_path):
    svg = tmp_path / "img.svg"
    code, _, _ = run("reps", "--braid", "1 1 1", "--grid", "100", "--svg", str(svg))
    assert code == 0 and svg.read_text().startswith("<svg")


def test_certify_examples():
    code, doc, _ = run_json("certify", "--torus", "2", "3", "--slope", "1/1", "--grid", "600")
    assert code == 0
    cert = doc["certificate"]
    assert cert["verdict"] == "Found"
    assert cert["rep"]["alpha"] == pytest.approx(math.pi / 5, abs=1e-9)
    code, doc, _ = run_json("certify", "--torus", "2", "3", "--slope", "5/1", "--grid", "600")
    assert code == 1 and doc["certificate"]["verdict"] == "NotFound"
    code, _, _ = run("certify", "--braid", "1", "--slope", "1/1")
    assert code == 1
    code, _, _ = run("certify", "--braid", "1 1 1", "--slope", "1/0")
    assert code == 4


def svg_vertices(text):
    pat = r'id="z(\d)" data-alpha="([^"]+)" data-beta="([^"]+)"'
    return {int(i): (float(a), float(b)) for i, a, b in re.findall(pat, text)}


def test_figure_five_thirds(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, doc, _ = run_json("figure", "--slope", "5/3")
    assert code == 0
    text = (tmp_path / "figure_5_3.svg").read_text()
    v = svg_vertices(text)
    h = (1 - 5 / 3) * math.pi
    expected = {1: (-math.pi, 0), 2: (-math.pi, -h), 3: (0, -math.pi), 4: (0, math.pi),
                5: (math.pi, h), 6: (math.pi, 0)}
    assert set(v) == set(expected)
    for i, (a, b) in expected.items():
        assert abs(v[i][0] - a) <= 1e-12 and abs(v[i][1] - b) <= 1e-12
    assert v[2][1] == pytest.approx(2 * math.pi / 3, abs=1e-12)
    assert text.count('class="reducible"') == 2
    assert "stroke-dasharray" in text
    assert doc["n_beta_pi_contacts"] == 2


def test_figure_two_has_four_contacts(tmp_path):
    out = tmp_path / "f.svg"
    code, doc, _ = run_json("figure", "--slope", "2/1", "--out", str(out))
    assert code == 0 and doc["n_beta_pi_contacts"] == 4
    assert '"n_beta_pi_contacts": 4' in out.read_text()


def test_out_of_scope_slopes():
    assert run("figure", "--slope", "7/3")[0] == 4
    assert run("perturb", "--torus", "2", "3", "--slope", "5/2")[0] == 4
    assert run("arc", "--slope", "7/3")[0] == 4


def test_perturb_examples():
    code, doc, _ = run_json("perturb", "--braid", "1", "--slope", "1/1", "--epsilon", "0.15")
    assert code == 0
    report = doc["report"]
    assert report["status"] == "empty" and report["perturbation"]["coefficients"]
    code, doc, _ = run_json("perturb", "--torus", "2", "3", "--slope", "1/1", "--grid", "600")
    assert code == 1 and doc["report"]["witness"] is not None


def test_parse_errors():
    assert run("reps", "--braid", "1 x")[0] == 2
    assert run("reps", "--braid", "1 -1")[0] == 2
    assert run("reps", "--braid", "1", "--torus", "2", "3")[0] == 2
    assert run("reps")[0] == 2
    assert run("certify", "--braid", "1 1 1", "--slope", "two")[0] == 2
    assert run("certify", "--braid", "1 1 1", "--slope", "0/0")[0] == 2
    assert run("certify", "--torus", "4", "6", "--slope", "1")[0] == 2
    assert run("nonsense")[0] == 2


def test_arc_command():
    code, doc, _ = run_json("arc", "--slope", "5/3")
    assert code == 0
    assert len(doc["arc"]["vertices"]) == 6


def test_toml_job_file_and_flag_precedence(tmp_path):
    job = tmp_path / "job.toml"
    job.write_text('braid = "1 1 1"\ngrid = 120\nseed = 4\n')
    code, doc, _ = run_json("reps", "--job", str(job))
    assert code == 0 and doc["config"]["grid"] == 120 and doc["config"]["seed"] == 4
    code, doc, _ = run_json("reps", "--job", str(job), "--grid", "80", "--torus", "2", "5")
    assert code == 0 and doc["config"]["grid"] == 80
    assert doc["config"]["braid"] is None and doc["config"]["torus"] == [2, 5]
    bad = tmp_path / "bad.toml"
    bad.write_text("colour = 3\n")
    assert run("reps", "--job", str(bad))[0] == 2


def test_byte_identical_outputs_and_sidecar(tmp_path):
    a = tmp_path / "a.json"
    runs = []
    for _ in range(2):
        assert run("reps", "--braid", "1 -2 1 -2", "--grid", "150", "--out", str(a))[0] == 0
        runs.append(a.read_bytes())
    assert runs[0] == runs[1]
    stamp = json.loads((tmp_path / "a.json.timestamp.json").read_text())
    assert stamp["file"] == "a.json" and "written" in stamp
    assert "written" not in a.read_text()


def test_check_determinism_flag():
    code, _, _ = run("reps", "--braid", "1 1 1", "--grid", "100", "--check-determinism")
    assert code == 0


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "knotreps", "arc", "--slope", "1/1"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["n_beta_pi_contacts"] == 2
