import json
import subprocess
import sys

import pytest

from khovanov_zc.cli import main
from khovanov_zc.diagram import from_braid, load_fixture
from khovanov_zc.movie import VERDICT


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def test_homology_unknot(capsys):
    code, out, _ = run(capsys, "homology", "unknot0")
    assert code == 0
    data = json.loads(out)
    assert data["homology"] == {"(0,-1)": {"free": 1, "torsion": []}, "(0,1)": {"free": 1, "torsion": []}}
    assert data["oracle_match"] is True


def test_homology_text(capsys):
    code, out, _ = run(capsys, "homology", "trefoil_right", "--format", "text")
    assert code == 0
    assert "H^(3,9) = Z2[c]" in out
    assert "oracle match: true" in out


def test_homology_from_file(capsys, tmp_path):
    path = write(tmp_path, "hopf.json", load_fixture("hopf_pos").to_json())
    code, out, _ = run(capsys, "homology", path)
    assert code == 0
    assert json.loads(out)["writhe"] == 2


def test_malformed_diagram(capsys, tmp_path):
    path = write(tmp_path, "bad.json", "{not json")
    code, _, err = run(capsys, "homology", path)
    assert code == 2
    assert err.startswith("error:")
    path = write(tmp_path, "bad2.json", {"darts": 3, "edges": [[0, 1]], "orient": [1, -1, 1]})
    assert run(capsys, "homology", path)[0] == 2


def test_size_guard_exit(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("KHOVANOV_ZC_MAX_CROSSINGS", raising=False)
    path = write(tmp_path, "big.json", from_braid([1] * 13, 2).to_json())
    code, _, err = run(capsys, "homology", path)
    assert code == 3
    assert "bound" in err
    assert run(capsys, "euler", "trefoil_left", "--max-crossings", "2")[0] == 3


def test_euler(capsys):
    code, out, _ = run(capsys, "euler", "figure_eight", "--format", "text")
    assert code == 0
    assert "oracle match: true" in out


def test_movie_empty_is_identity(capsys, tmp_path):
    path = write(tmp_path, "empty.json", {"initial": "unlink2", "events": []})
    code, out, _ = run(capsys, "movie", path)
    assert code == 0
    data = json.loads(out)
    assert data["identity"] is True and data["identity_mod_c"] is True


def test_movie_slide(capsys):
    from importlib import resources

    path = str(resources.files("khovanov_zc") / "data" / "slide_movie.json")
    code, out, _ = run(capsys, "movie", path, "--format", "text")
    assert code == 0
    assert "id mod c: true" in out
    assert "id: false" in out


def test_movie_invalid_bigon(capsys, tmp_path):
    path = write(tmp_path, "bad.json", {"initial": "hopf_pos", "events": [{"type": "r2_down", "crossings": [0, 1]}]})
    assert run(capsys, "movie", path)[0] == 2


def test_movie_nonzero_differential_endpoints(capsys, tmp_path):
    path = write(tmp_path, "tref.json", {"initial": "trefoil_left", "events": []})
    assert run(capsys, "movie", path)[0] == 4


def test_counterexample_text(capsys):
    code, out, _ = run(capsys, "counterexample", "--format", "text")
    assert code == 0
    assert out.strip().splitlines()[-1] == VERDICT
    assert "[ c^2    c    c    1 ]" in out


def test_counterexample_json(capsys):
    code, out, _ = run(capsys, "counterexample")
    data = json.loads(out)
    assert code == 0
    assert data["verdict"] == VERDICT
    assert data["identity_mod_c"] and not data["identity"]


def test_fuzz_r2(capsys):
    code, out, _ = run(capsys, "fuzz-r2", "--seed", "4", "--steps", "1", "--count", "5")
    data = json.loads(out)
    assert code == 0
    assert data["all_identity_mod_c"] is True
    assert len(data["movies"]) == 5


def test_unknown_flag():
    with pytest.raises(SystemExit) as exc:
        main(["counterexample", "--bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["homology", "unknot0", "--max-crossings", "-1"])


def test_output_is_byte_identical():
    cmd = [sys.executable, "-m", "khovanov_zc.cli", "counterexample"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second
    assert VERDICT.encode() in first


def test_pure_python_kernels_give_the_same_report():
    import os

    env = dict(os.environ, KHOVANOV_ZC_PURE="1")
    code = "from khovanov_zc import kernels; print(kernels.IMPLEMENTATION)"
    impl = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
    assert impl.strip() == "python"
    cmd = [sys.executable, "-m", "khovanov_zc.cli", "counterexample"]
    pure = subprocess.run(cmd, env=env, capture_output=True, check=True).stdout
    assert pure == subprocess.run(cmd, capture_output=True, check=True).stdout
