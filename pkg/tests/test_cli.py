"""End-to-end tests of the qng command line driven in process."""

import json

import numpy as np
import pytest

from qng_coherence import DensityMatrix, clear_threshold_cache
from qng_coherence import cli
from qng_coherence.cli import (
    UnphysicalStateError,
    UsageError,
    load_state,
    main,
    parse_float_list,
    parse_int_list,
    parse_measure,
    save_state,
)
from qng_coherence.thresholds import EnvelopeError

FAST = ["--dim", "14", "--starts", "4", "--validation-samples", "50"]


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("QNG_CACHE_DIR", str(tmp_path / "cache"))
    clear_threshold_cache()


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def cat_state(path, dim=8):
    psi = np.zeros(dim, dtype=complex)
    psi[0] = psi[4] = np.sqrt(0.5)
    save_state(np.outer(psi, psi.conj()), str(path))


def test_parse_helpers():
    assert parse_measure("3,4").order == 1
    assert parse_int_list("4..7") == [4, 5, 6, 7]
    assert parse_int_list("1,5,3") == [1, 5, 3]
    assert parse_float_list("lin:0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_float_list("0.2,0.4") == [0.2, 0.4]
    for bad in ("3", "4,3", "a,b"):
        with pytest.raises(UsageError):
            parse_measure(bad)
    with pytest.raises(UsageError):
        parse_int_list("7..4")


def test_thresholds_table_with_sentinels(tmp_path, capsys):
    out = tmp_path / "t.json"
    code, text, _ = run(["thresholds", "--measure", "3,4", "--hierarchy", "L",
                         "--orders", "1..3", "--out", str(out)] + FAST, capsys)
    assert code == 0
    lines = [l for l in text.splitlines() if "T[3,4]" in l]
    assert len(lines) == 3
    assert "saturated" not in lines[0]
    first = float(lines[0].split("=")[1].split()[0])
    assert abs(first - 0.80) < 0.01
    assert lines[1].endswith("saturated")
    assert lines[2].endswith("saturated")
    artifact = json.loads(out.read_text())
    assert artifact["schema_version"] == 1
    assert artifact["command"] == "thresholds"
    values = [r["value"] for r in artifact["rows"]]
    assert values[1] == 1.0 and values[2] == 1.0


def test_thresholds_cache_hit_is_byte_identical(tmp_path, capsys):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["thresholds", "--measure", "0,1", "--hierarchy", "fock"] + FAST
    assert run(argv + ["--out", str(out1)], capsys)[0] == 0
    clear_threshold_cache()
    assert run(argv + ["--out", str(out2)], capsys)[0] == 0
    assert out1.read_bytes() == out2.read_bytes()
    cache_files = list((tmp_path / "cache").glob("thresholds-*.json"))
    assert len(cache_files) == 1


def test_thresholds_seed_reruns_are_byte_identical(tmp_path, capsys):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["thresholds", "--measure", "1,2", "--hierarchy", "N", "--orders",
            "1", "--no-cache"] + FAST
    assert run(argv + ["--out", str(out1)], capsys)[0] == 0
    clear_threshold_cache()
    assert run(argv + ["--out", str(out2)], capsys)[0] == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_thresholds_csv_roundtrip(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code, _, _ = run(["thresholds", "--measure", "0,1", "--hierarchy", "fock",
                      "--format", "csv", "--out", str(out)] + FAST, capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# qng thresholds schema_version=1 "
                               "config_sha256_prefix=")
    assert lines[0].endswith("floats=%.17g")
    assert lines[1] == "label,order,value,saturated"
    label, order, value, saturated = lines[2].split(",")
    assert label == "fock" and saturated == "false"
    # 17 significant digits survive the text round trip bit-exactly
    json_out = tmp_path / "t.json"
    run(["thresholds", "--measure", "0,1", "--hierarchy", "fock",
         "--out", str(json_out)] + FAST, capsys)
    stored = json.loads(json_out.read_text())["rows"][0]["value"]
    assert float(value) == stored


def test_converge_rows_and_precondition(tmp_path, capsys):
    code, text, _ = run(["converge", "--measure", "0,3", "--n-range", "4..8",
                         "--exclude", "0"] + FAST, capsys)
    assert code == 0
    values = [float(l.split("T = ")[1].split()[0])
              for l in text.splitlines() if l.startswith("N=")]
    assert len(values) == 5
    assert values == sorted(values)
    code, _, err = run(["converge", "--measure", "0,3", "--n-range", "4..8",
                        "--exclude", "1"] + FAST, capsys)
    assert code == 2
    assert "excluded" in err


def test_curve_artifact(tmp_path, capsys):
    out = tmp_path / "curve.json"
    code, _, _ = run(["curve", "--measure", "0,1", "--hierarchy", "fock",
                      "--observable", "Pn", "--p-grid", "lin:0.2:0.6:3",
                      "--lambda-grid", "7", "--refine-tol", "1e-2",
                      "--out", str(out)] + FAST, capsys)
    assert code == 0
    artifact = json.loads(out.read_text())
    assert set(artifact) >= {"curve", "physical_boundary"}
    curve = artifact["curve"]["values"]
    bound = artifact["physical_boundary"]["values"]
    assert len(curve) == 3
    for c, b in zip(curve, bound):
        assert 0.0 <= c <= b + 1e-6


def test_curve_physical_only(tmp_path, capsys):
    out = tmp_path / "phys.csv"
    code, _, _ = run(["curve", "--measure", "0,1", "--hierarchy", "physical",
                      "--observable", "Pn", "--p-grid", "0.5",
                      "--format", "csv", "--out", str(out)] + FAST, capsys)
    assert code == 0
    rows = out.read_text().splitlines()
    value = float(rows[2].split(",")[1])
    assert abs(value - 1.0) < 1e-5


def test_curve_surface_for_physical_rejected(capsys):
    code, _, err = run(["curve", "--measure", "0,1", "--hierarchy", "physical",
                        "--observable", "Pn,Pe", "--p-grid", "0.4"] + FAST,
                       capsys)
    assert code == 2
    assert "hierarch" in err


def test_curve_envelope_failure_exit_code(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise EnvelopeError("forced")
    monkeypatch.setattr(cli, "relative_curve_2d", boom)
    code, _, err = run(["curve", "--measure", "0,1", "--hierarchy", "fock",
                        "--observable", "Pn", "--p-grid", "0.4", "--no-cache"]
                       + FAST, capsys)
    assert code == 3
    assert "search validation failure" in err


def test_depth_explicit_threshold(tmp_path, capsys):
    out = tmp_path / "d.json"
    code, text, _ = run(["depth", "--measure", "0,1", "--threshold", "0.93",
                         "--kind", "loss", "--out", str(out)] + FAST, capsys)
    assert code == 0
    artifact = json.loads(out.read_text())
    assert abs(artifact["depth"]["value"] - 0.15053763440860213) < 1e-12
    code, text, _ = run(["depth", "--measure", "0,1", "--threshold", "0.93",
                         "--kind", "thermal"] + FAST, capsys)
    assert code == 0
    assert "0.035" in text


def test_depth_no_margin_exit_code(capsys):
    code, _, err = run(["depth", "--measure", "0,1", "--threshold", "1.0"]
                       + FAST, capsys)
    assert code == 4
    assert "no depth" in err


def test_depth_boundary_sweep_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, _, _ = run(["depth", "--measure", "0,1", "--threshold", "0.9",
                      "--boundary-sweep", "--nbars", "0,0.01,0.02",
                      "--format", "csv", "--out", str(out)] + FAST, capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "nbar,gamma,saturated"
    gammas = [float(l.split(",")[1]) for l in lines[2:]]
    assert len(gammas) == 3
    assert gammas == sorted(gammas, reverse=True)
    assert abs(gammas[0] - 2.0 * (1.0 / 0.9 - 1.0)) < 1e-9


def test_certify_state_certified(tmp_path, capsys):
    state = tmp_path / "cat.json"
    cat_state(state)
    code, text, _ = run(["certify", "--measure", "0,4", "--state", str(state),
                         "--hierarchy", "N", "--orders", "1..4"] + FAST,
                        capsys)
    assert code == 0
    assert "certified" in text
    assert text.count("PASS") == 4


def test_certify_fock_state_fails(tmp_path, capsys):
    state = tmp_path / "one.json"
    mat = np.zeros((4, 4), dtype=complex)
    mat[1, 1] = 1.0
    save_state(mat, str(state))
    code, text, _ = run(["certify", "--measure", "0,1", "--state", str(state),
                         "--hierarchy", "N", "--orders", "1"] + FAST, capsys)
    assert code == 1
    assert "not certified" in text


def test_certify_tuple_unphysical(capsys):
    code, _, err = run(["certify", "--measure", "0,1", "--c", "0.9",
                        "--pn", "0.05", "--threshold", "0.5"] + FAST, capsys)
    assert code == 5
    assert "unphysical" in err


def test_certify_tuple_relative_beats_absolute(capsys):
    # a kinematically allowed pair that clears the conditioned threshold
    code, text, _ = run(["certify", "--measure", "0,1", "--c", "0.9",
                         "--pn", "0.5", "--threshold", "0.95",
                         "--lambda-grid", "9"] + FAST, capsys)
    assert code == 0
    lines = [l for l in text.splitlines() if "order 1" in l]
    assert any("PASS" in l and "relative" in l for l in lines)
    assert any("FAIL" in l and "absolute" in l for l in lines)


def test_certify_argument_validation(tmp_path, capsys):
    state = tmp_path / "cat.json"
    cat_state(state)
    code, _, _ = run(["certify", "--measure", "0,1", "--state", str(state),
                      "--c", "0.5"] + FAST, capsys)
    assert code == 2
    code, _, _ = run(["certify", "--measure", "0,1"] + FAST, capsys)
    assert code == 2
    code, _, _ = run(["certify", "--measure", "0,1", "--c", "0.5",
                      "--pm", "0.3", "--pn", "0.4", "--threshold", "0.9"]
                     + FAST, capsys)
    assert code == 2


def test_usage_errors(capsys):
    assert run(["thresholds", "--measure", "0", "--hierarchy", "fock"],
               capsys)[0] == 2
    assert run(["thresholds", "--measure", "0,1", "--hierarchy", "N"],
               capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2
    assert run(["--help"], capsys)[0] == 0


def test_state_file_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    g = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    mat = g @ g.conj().T
    mat /= np.trace(mat).real
    path = tmp_path / "rho.json"
    save_state(DensityMatrix(mat), str(path))
    back = load_state(str(path))
    assert isinstance(back, DensityMatrix)
    assert np.max(np.abs(back.elements - mat)) < 1e-15


def test_load_state_rejects_unphysical(tmp_path):
    mat = np.diag([0.7, 0.5]).astype(complex)
    path = tmp_path / "bad.json"
    save_state(mat, str(path))
    with pytest.raises(UnphysicalStateError):
        load_state(str(path))
    path2 = tmp_path / "shape.json"
    path2.write_text(json.dumps({"dim": 2, "elements": [[1.0, 0.0]]}))
    with pytest.raises(UsageError):
        load_state(str(path2))
