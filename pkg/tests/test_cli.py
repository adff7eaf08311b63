import json

import pytest

from surface_hochschild.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    assert code == 0
    return json.loads(out)


def test_model_sigma_genus3_sizes(capsys):
    doc = run_json(capsys, "model", "--space", "sigma", "--genus", "3",
                   "--levels", "2")
    assert doc["sizes"] == [5, 44, 113]
    assert doc["valid"] is True
    assert doc["schema"] == "surface-hochschild/1"


def test_model_sphere2_sizes(capsys):
    doc = run_json(capsys, "model", "--space", "sphere2", "--levels", "3")
    assert doc["sizes"] == [1, 2, 5, 10]


def test_model_dump_roundtrips(capsys):
    doc = run_json(capsys, "model", "--space", "circle", "--levels", "2")
    assert [lv["size"] for lv in doc["model"]["levels"]] == [1, 2, 3]


def test_model_negative_genus_is_usage_error(capsys):
    code, _ = run(capsys, "model", "--space", "sigma", "--genus", "-1",
                  "--levels", "2")
    assert code == 2


def test_model_unknown_space_is_usage_error(capsys):
    code, _ = run(capsys, "model", "--space", "mystery", "--levels", "2")
    assert code == 2


def test_model_csv_format(capsys):
    code, out = run(capsys, "model", "--space", "sphere2", "--levels", "2",
                    "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "schema,surface-hochschild/1"
    assert lines[1] == "level,size"
    assert lines[2:] == ["0,1", "1,2", "2,5"]


def test_betti_circle_matches_free_model_counts(capsys):
    doc = run_json(capsys, "betti", "--space", "circle",
                   "--degrees", "0..6")
    values = [row["value"] for row in doc["betti"]]
    assert values == [1, 0, 1, 1, 1, 1, 1]
    assert all(row["certified"] for row in doc["betti"])


def test_betti_sigma1_certified_defaults(capsys):
    # levels omitted: the truncation level comes from the certified bound
    doc = run_json(capsys, "betti", "--space", "sigma", "--genus", "1",
                   "--degrees", "0..4")
    assert doc["levels"] == 8
    values = [row["value"] for row in doc["betti"]]
    assert values == [1, 1, 2, 3, 4]
    assert all(row["certified"] for row in doc["betti"])


def test_betti_uncertified_rows_are_flagged(capsys):
    doc = run_json(capsys, "betti", "--space", "sigma", "--genus", "1",
                   "--levels", "2", "--degrees", "0..4")
    flags = [row["certified"] for row in doc["betti"]]
    assert flags[0] and flags[1]
    assert not all(flags)


def test_betti_custom_algebra(capsys):
    spec = json.dumps({"generators": [{"label": "x", "degree": 3},
                                      {"label": "y", "degree": 5}],
                       "window": [0, 8]})
    doc = run_json(capsys, "betti", "--space", "circle", "--algebra", spec,
                   "--degrees", "0..4")
    values = [row["value"] for row in doc["betti"]]
    # S(x (+) y (+) x[1] (+) y[1]) with |x| = 3, |y| = 5
    assert values == [1, 0, 1, 1, 2]


def test_betti_algebra_with_derivation(capsys):
    spec = json.dumps({"generators": [{"label": "x", "degree": 7},
                                      {"label": "y", "degree": 4}],
                       "window": [0, 11],
                       "derivation": {"x": [[[0, 2], 1, 1]]}})
    doc = run_json(capsys, "betti", "--space", "circle", "--algebra", spec,
                   "--levels", "4", "--degrees", "0..2")
    assert [row["value"] for row in doc["betti"]][0] == 1


def test_betti_algebra_from_file(capsys, tmp_path):
    path = tmp_path / "algebra.json"
    path.write_text(json.dumps({"generators": [{"label": "x",
                                                "degree": 3}],
                                "window": [0, 3]}))
    doc = run_json(capsys, "betti", "--space", "circle", "--algebra",
                   str(path), "--degrees", "0..2")
    assert [row["value"] for row in doc["betti"]] == [1, 0, 1]


def test_betti_bad_degree_range(capsys):
    code, _ = run(capsys, "betti", "--space", "circle", "--degrees", "4..1")
    assert code == 2
    code, _ = run(capsys, "betti", "--space", "circle", "--degrees", "0-4")
    assert code == 2


def test_betti_no_bound_without_levels(capsys):
    # degree-1 generator: no certified truncation level exists
    spec = json.dumps({"generators": [{"label": "u", "degree": 1}],
                       "window": [0, 1]})
    code, _ = run(capsys, "betti", "--space", "circle", "--algebra", spec,
                  "--degrees", "0..2")
    assert code == 2


def test_surface_product_sphere_rules(capsys):
    doc = run_json(capsys, "surface-product", "--exponents", "1",
                   "--genus", "1", "--genus2", "1")
    table = {(e["left"], e["right"]): e for e in doc["products"]}
    xw = table[("x1[g1]", "omega1[g1]")]
    assert xw["product"] == "x1*omega1[g2]"
    assert xw["genus"] == 2
    ab = table[("alpha1_1[g1]", "beta1_1[g1]")]
    assert ab["product"] == "alpha1_1*beta1_2[g2]"
    assert all(e["genus"] == 2 for e in doc["products"])


def test_surface_product_presentation_embedded(capsys):
    doc = run_json(capsys, "surface-product", "--exponents", "1,2",
                   "--genus", "0", "--genus2", "1")
    names = [g["name"] for g in doc["presentation"]["generators"]]
    assert "x1" in names and "x2" in names
    assert all(e["genus"] == 1 for e in doc["products"])


def test_surface_product_negative_genus(capsys):
    code, _ = run(capsys, "surface-product", "--genus", "-2")
    assert code == 2


def test_verify_suites_pass(capsys):
    for suite in ("simplicial", "hkr", "cup", "all"):
        code, out = run(capsys, "verify", suite, "--genus", "1")
        assert code == 0, suite
        doc = json.loads(out)
        assert doc["ok"] is True
        assert doc["checks"] and all(c["ok"] for c in doc["checks"])


def test_verify_unknown_suite(capsys):
    code, _ = run(capsys, "verify", "nonsense")
    assert code == 2


def test_output_is_deterministic(capsys):
    _, first = run(capsys, "betti", "--space", "sphere2", "--levels", "2",
                   "--degrees", "0..3")
    _, second = run(capsys, "betti", "--space", "sphere2", "--levels", "2",
                    "--degrees", "0..3")
    assert first == second


def test_out_file(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, out = run(capsys, "model", "--space", "circle", "--levels", "1",
                    "--out", str(path))
    assert code == 0 and out == ""
    doc = json.loads(path.read_text())
    assert doc["sizes"] == [1, 2]


def test_threads_env_is_validated(capsys, monkeypatch):
    monkeypatch.setenv("HH_THREADS", "zero")
    code, _ = run(capsys, "model", "--space", "pt", "--levels", "0")
    assert code == 2
    monkeypatch.setenv("HH_THREADS", "0")
    code, _ = run(capsys, "model", "--space", "pt", "--levels", "0")
    assert code == 2
    monkeypatch.setenv("HH_THREADS", "4")
    doc = run_json(capsys, "model", "--space", "pt", "--levels", "0")
    assert doc["threads"] == 4


def test_missing_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
