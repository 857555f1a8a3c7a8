import json

import numpy as np
import pytest

from lueq import fileio
from lueq.cli import main
from lueq.representation import build_representation
from lueq.states import BipartiteDims, DensityMatrix, WernerParams, pure_state, random_density, werner


@pytest.fixture
def werner_file(tmp_path):
    path = tmp_path / "w.json"
    assert main(["gen", "werner", "--e", "0.1", "--f", "0.2", "--out", str(path)]) == 0
    return path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_werner_entries_exact(werner_file):
    dims, mat = fileio.read_matrix(werner_file)
    assert dims == BipartiteDims(2, 2)
    assert np.array_equal(mat, werner(WernerParams(0.1, 0.2)).mat)
    assert mat[1, 2] == (1 - 4 * 0.2) / 6


def test_matrix_file_round_trip_is_bit_exact(tmp_path):
    rho = random_density(BipartiteDims(3, 2), 4, seed=12)
    path = tmp_path / "r.json"
    fileio.write_matrix(rho, path)
    _, mat = fileio.read_matrix(path)
    assert np.array_equal(mat, rho.mat)


def test_gen_random_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["gen", "random", "--m", "2", "--n", "3", "--rank", "2", "--seed", "7", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_validate_exit_codes(tmp_path, werner_file, capsys):
    assert run(capsys, "validate", str(werner_file))[0] == 0
    bad = tmp_path / "trace.json"
    fileio.write_text(fileio.dumps(fileio.matrix_to_json(DensityMatrix(BipartiteDims(2, 2), np.eye(4) * 1.01 / 4))), bad)
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 2 and "TraceNotOne" in err
    junk = tmp_path / "junk.json"
    junk.write_text("this is not json")
    assert run(capsys, "validate", str(junk))[0] == 1
    assert run(capsys, "validate", str(tmp_path / "missing.json"))[0] == 1


def test_validate_rejects_wrong_shape(tmp_path, capsys):
    p = tmp_path / "shape.json"
    p.write_text(json.dumps({"m": 2, "n": 2, "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]]}))
    assert run(capsys, "validate", str(p))[0] == 1


def test_represent_werner_pattern(werner_file, capsys):
    code, out, _ = run(capsys, "represent", str(werner_file), "--json", "--check")
    assert code == 0
    report = json.loads(out)
    pattern = [np.round(it["schmidt_coefficients"], 12).tolist() for it in report["items"]]
    s = round(2 ** -0.5, 12)
    assert pattern == [[1.0], [s, s], [1.0], [s, s]]
    assert report["reconstruction_error"] < 1e-9
    assert report["free_parameter_count"] == 16


def test_represent_text_report(werner_file, capsys):
    code, out, _ = run(capsys, "represent", str(werner_file), "--check")
    assert code == 0 and "free_parameter_count 16" in out and "reconstruction error" in out


def test_represent_pure_product(tmp_path, capsys):
    p = tmp_path / "p.json"
    fileio.write_matrix(pure_state(np.kron([0, 1], [1, 0, 0]), BipartiteDims(2, 3)), p)
    code, out, _ = run(capsys, "represent", str(p), "--json")
    report = json.loads(out)
    assert code == 0 and report["rank"] == 1 and report["items"][0]["schmidt_rank"] == 1


def test_represent_matches_library_byte_for_byte(tmp_path, capsys):
    p = tmp_path / "r.json"
    main(["gen", "random", "--m", "2", "--n", "3", "--rank", "2", "--seed", "3", "--out", str(p)])
    capsys.readouterr()
    _, first, _ = run(capsys, "represent", str(p), "--json")
    _, second, _ = run(capsys, "represent", str(p), "--json")
    dims, mat = fileio.read_matrix(p)
    direct = fileio.dumps(fileio.representation_to_json(build_representation(DensityMatrix(dims, mat))))
    assert first == second == direct


def test_check_same_file_and_orbit_pair(tmp_path, werner_file, capsys):
    cert = tmp_path / "cert.json"
    assert run(capsys, "check", str(werner_file), str(werner_file), "--out", str(cert))[0] == 0
    lu = fileio.read_certificate(cert)
    assert np.allclose(lu.u.conj().T @ lu.u, np.eye(2), atol=1e-10)

    prefix = tmp_path / "op"
    assert main(["gen", "orbit-pair", "--m", "2", "--n", "3", "--rank", "3", "--seed", "5", "--out", str(prefix)]) == 0
    capsys.readouterr()
    code, out, _ = run(capsys, "check", f"{prefix}_a.json", f"{prefix}_b.json", "--json", "--out", str(cert))
    payload = json.loads(out)
    assert code == 0 and payload["verdict"] == "Equivalent" and payload["residual"] < 1e-8


def test_check_werner_spectrum_mismatch(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["gen", "werner", "--f", "0.3", "--out", str(a)])
    main(["gen", "werner", "--f", "0.4", "--out", str(b)])
    code, out, _ = run(capsys, "check", str(a), str(b))
    assert code == 3 and "SpectrumMismatch" in out


def test_check_dims_mismatch_and_invalid(tmp_path, werner_file, capsys):
    r = tmp_path / "r.json"
    main(["gen", "random", "--m", "2", "--n", "3", "--out", str(r)])
    assert run(capsys, "check", str(werner_file), str(r))[0] == 5
    bad = tmp_path / "neg.json"
    fileio.write_text(fileio.dumps(fileio.matrix_to_json(DensityMatrix(BipartiteDims(2, 2), np.diag([0.6, 0.6, -0.2, 0])))), bad)
    assert run(capsys, "check", str(werner_file), str(bad))[0] == 2


def test_check_undecided_exit_code(tmp_path, capsys):
    w = werner(WernerParams(0.0, 0.3))
    rng = np.random.default_rng(3)
    q = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
    lam = np.linalg.eigvalsh(w.mat)
    other = DensityMatrix(w.dims, (q * lam) @ q.conj().T)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    fileio.write_matrix(w, a)
    fileio.write_matrix(other, b)
    code, out, _ = run(capsys, "check", str(a), str(b), "--restarts", "4")
    # off-orbit with a degenerate spectrum: the Schmidt gate rejects or the optimizer gives up
    assert code in (3, 4)


def test_gen_invalid_params(capsys):
    assert run(capsys, "gen", "werner", "--e", "0.5", "--f", "0.9")[0] == 2


def test_dim_reports(tmp_path, capsys):
    mixed = tmp_path / "mm.json"
    fileio.write_matrix(DensityMatrix(BipartiteDims(2, 2), np.eye(4) / 4), mixed)
    code, out, _ = run(capsys, "dim", str(mixed), "--json")
    assert code == 0 and json.loads(out) == {"orbit_dimension": 0, "ambient_dimension": 15}
    r = tmp_path / "r.json"
    main(["gen", "random", "--m", "2", "--n", "2", "--out", str(r)])
    capsys.readouterr()
    assert json.loads(run(capsys, "dim", str(r), "--json")[1])["orbit_dimension"] == 6
    main(["gen", "random", "--m", "2", "--n", "3", "--out", str(r)])
    capsys.readouterr()
    assert json.loads(run(capsys, "dim", str(r), "--json")[1])["orbit_dimension"] == 11


def test_orbit_test_small(capsys):
    code, out, _ = run(capsys, "orbit-test", "--dims", "2,2", "--trials", "12", "--json")
    summary = json.loads(out)
    assert code == 0 and summary["ok"] and summary["max_residual"] < 1e-8
    assert summary["histogram"]["2x2 orbit: Equivalent"] == 12
    assert summary["histogram"]["2x2 perturbed: Inequivalent/SpectrumMismatch"] == 12


def test_usage_error_is_exit_1(capsys):
    assert main(["check"]) == 1
    assert main(["frobnicate"]) == 1
