import json

import pytest

import hodgecollapse.cli as cli
from hodgecollapse import SpectralError, mesh_from_text, read_mesh
from hodgecollapse.cli import build_from_descriptor, run_cli


def test_betti_prints_compact_list(capsys):
    assert run_cli(["betti", "--mesh", "torus:4x4"]) == 0
    assert capsys.readouterr().out.strip() == "[1,2,1]"


def test_betti_out_file(tmp_path, capsys):
    out = tmp_path / "betti.json"
    assert run_cli(["betti", "--mesh", "icosphere:1", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["betti"] == [1, 0, 1]
    assert payload["euler"] == 2


def test_mesh_document_round_trips(tmp_path, capsys):
    assert run_cli(["mesh", "--mesh", "circle:6"]) == 0
    K, coords = mesh_from_text(capsys.readouterr().out)
    assert K.num(0) == 6 and coords.shape == (6, 2)
    out = tmp_path / "c.mesh"
    assert run_cli(["mesh", "--mesh", "circle:6", "--out", str(out)]) == 0
    K2, _ = read_mesh(out)
    assert K2.simplices == K.simplices


def test_spectrum_stdout_payload(capsys):
    assert run_cli(["spectrum", "--mesh", "circle:12", "--p", "1",
                    "--k", "3"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["mesh"] == "circle:12"
    assert payload["zero_modes"] == payload["expected_zero_modes"] == 1
    assert len(payload["eigenvalues"]) == 3
    assert payload["eps"] is None


def test_spectrum_with_action_and_eps(capsys):
    rc = run_cli(["spectrum", "--mesh", "torus:4x4", "--action",
                  "translation", "--p", "1", "--eps", "0.5", "--k", "4"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["eps"] == 0.5


def test_spectrum_full_hodge(capsys):
    rc = run_cli(["spectrum", "--mesh", "torus:4x4", "--p", "1",
                  "--full-hodge", "--k", "3"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["zero_modes"] == 2  # b_1 of the torus


def test_action_name_mismatch_is_usage_error(capsys):
    rc = run_cli(["spectrum", "--mesh", "torus:4x4", "--action", "hopf",
                  "--p", "1"])
    assert rc == 2
    assert "provides action" in capsys.readouterr().err


def test_unknown_mesh_is_usage_error(capsys):
    assert run_cli(["betti", "--mesh", "klein:4"]) == 2
    err = capsys.readouterr().err
    assert "mesh descriptors" in err


def test_no_arguments_prints_usage():
    assert run_cli([]) == 2


def test_dump_matrices(tmp_path, capsys):
    prefix = tmp_path / "pencil"
    rc = run_cli(["spectrum", "--mesh", "circle:12", "--p", "1",
                  "--dump-matrices", str(prefix)])
    assert rc == 0
    for tag in ("A", "B"):
        lines = (tmp_path / f"pencil_{tag}.txt").read_text().splitlines()
        rows, cols, nnz = (int(v) for v in lines[0].split())
        assert rows == cols == 12
        assert len(lines) == 1 + nnz
        r, c, v = lines[1].split()
        int(r), int(c), float(v)


def test_collapse_torus_no_prediction(tmp_path, capsys):
    out = tmp_path / "sweep.json"
    rc = run_cli(["collapse", "--mesh", "torus:4x4", "--action",
                  "translation", "--p", "1", "--eps", "1,0.5", "--k", "3",
                  "--strict", "--out", str(out)])
    assert rc == 0  # no prediction is not a failed verdict
    payload = json.loads(out.read_text())
    assert payload["kind"] == "sweep"
    assert payload["verdict"] == "no prediction"


def test_collapse_csv_output(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    rc = run_cli(["collapse", "--mesh", "torus:4x4", "--action",
                  "translation", "--p", "1", "--eps", "1,0.5", "--k", "3",
                  "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "mesh,action,p,eps,j,lambda,zero_modes,cond_estimate"
    assert len(lines) == 1 + 2 * 3


def test_collapse_requires_action(capsys):
    rc = run_cli(["collapse", "--mesh", "torus:4x4", "--p", "1"])
    assert rc == 2
    assert "--action" in capsys.readouterr().err


def test_numerical_abort_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise SpectralError("synthetic failure")

    monkeypatch.setattr(cli, "spectrum_im_d", boom)
    rc = run_cli(["spectrum", "--mesh", "circle:12", "--p", "1"])
    assert rc == 3
    assert "numerical failure" in capsys.readouterr().err


def test_compare_scale_strict(tmp_path, capsys):
    out = tmp_path / "cmp.csv"
    rc = run_cli(["compare", "--mesh", "torus:4x4", "--p", "1", "--scale",
                  "2", "--strict", "--out", str(out)])
    assert rc == 0
    assert out.read_text().splitlines()[0].startswith("geometry_a")


def test_compare_conformal_strict(capsys):
    rc = run_cli(["compare", "--mesh", "torus:4x4", "--p", "1",
                  "--conformal", "0.1", "--strict"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["kind"] == "compare"
    assert payload["passed"] is True


def test_compare_requires_exactly_one_perturbation():
    rc = run_cli(["compare", "--mesh", "torus:4x4", "--p", "1",
                  "--scale", "2", "--conformal", "0.1"])
    assert rc == 2


def test_duality_json(capsys):
    rc = run_cli(["duality", "--mesh", "icosphere:1", "--k", "3"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["kind"] == "duality"
    assert [r["degree"] for r in payload["rows"]] == [1, 2]


def test_collapse_plot_renders_png(tmp_path, capsys):
    png = tmp_path / "sweep.png"
    rc = run_cli(["collapse", "--mesh", "torus:3x3", "--action",
                  "translation", "--p", "1", "--eps", "1,0.5", "--k", "3",
                  "--plot", str(png)])
    assert rc == 0
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_build_from_descriptor_errors():
    with pytest.raises(ValueError):
        build_from_descriptor("torus:4")
    with pytest.raises(ValueError):
        build_from_descriptor("s3:120cell")
