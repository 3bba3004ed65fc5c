import json

import pytest

from belle_paire.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_approx_endo_success(capsys):
    code, blob = run_json(capsys, "approx-endo", "--endo", "successor",
                          "--n", "8")
    assert code == 0
    assert blob["max_defect"] <= 1
    assert blob["bijective"] is True
    assert blob["semi_orbits"] == 1


def test_approx_endo_bad_table_exits_3(capsys):
    code, _ = run(capsys, "approx-endo", "--endo", "table:[[0,0],[1,0]]",
                  "--n", "4")
    assert code == 3


def test_approx_endo_unknown_endo_exits_2(capsys):
    code, _ = run(capsys, "approx-endo", "--endo", "whatever", "--n", "4")
    assert code == 2


def test_malformed_table_payload_exits_2(capsys):
    code, _ = run(capsys, "approx-endo", "--endo", "table:[[0]]", "--n", "2")
    assert code == 2


def test_lift_within_bound(capsys):
    code, blob = run_json(capsys, "lift", "--endo", "x+2", "--n", "10",
                          "--alphabet", "50")
    assert code == 0
    assert blob["matches_cell_formula"] is True
    assert blob["within_bound"] is True


def test_pair_certify_certificate(capsys):
    code, blob = run_json(capsys, "--eps", "1/10", "--window", "60",
                          "pair-certify", "--pair1", "pure:identity",
                          "--pair2", "pure:successor")
    assert code == 0
    assert blob["kind"] == "certificate"


def test_pair_certify_refusal_exits_1(capsys):
    code, blob = run_json(
        capsys, "--eps", "1/4", "--window", "40", "pair-certify",
        "--pair1", "fq2:identity", "--pair2", "fq2:shift",
        "--obstruction",
        '{"q": 2, "dim": 2, "grid": 2, "subspace": [[1, 0]]}')
    assert code == 1
    assert blob["kind"] == "refusal"


def test_pair_certify_writes_out_file(capsys, tmp_path):
    out = tmp_path / "cert.json"
    code, blob = run_json(capsys, "--eps", "1/10", "--window", "50",
                          "pair-certify", "--pair1", "pure:identity",
                          "--pair2", "pure:successor", "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text()) == blob


def test_pair_certify_unknown_preset_exits_2(capsys):
    code, _ = run(capsys, "pair-certify", "--pair1", "pure:nope",
                  "--pair2", "pure:identity")
    assert code == 2


def test_pair_distance(capsys):
    code, blob = run_json(capsys, "--window", "40", "pair-distance",
                          "--pair1", "pure:identity",
                          "--pair2", "pure:successor", "--alphabet", "10")
    assert code == 0
    from belle_paire.serialize import parse_frac
    assert parse_frac(blob["lower"]) <= parse_frac(blob["upper"])


def test_compose_reports_budgets(capsys):
    code, blob = run_json(capsys, "--eps", "1/4", "--window", "30",
                          "compose", "--expr", "wreath(pure,pure,m=2)")
    assert code == 0
    alloc = dict(tuple(a) for a in blob["certificate"]["allocations"])
    assert alloc["h"] == "1/8"
    assert alloc["b0"] == "1/16"
    assert blob["within_budget"] is True


def test_compose_bad_expr_exits_2(capsys):
    code, _ = run(capsys, "compose", "--expr", "wreath(pure)")
    assert code == 2
    code, _ = run(capsys, "compose", "--expr", "product(pure,pure)",
                  "--element", "nope")
    assert code == 2


def test_bound_table(capsys):
    code, blob = run_json(capsys, "bound", "--geometry", "affine:2",
                          "--delta", "1/8", "--n-max", "4")
    assert code == 0
    assert blob["min_k"]["1/8"] == 3
    assert blob["bounds"][0] == {"n": 1, "lower": "1/2", "modular": "1"}
    assert blob["bounds"][3] == {"n": 4, "lower": "1/8", "modular": "1/4"}


def test_bound_disintegrated_reports_refusal_text(capsys):
    code, blob = run_json(capsys, "bound", "--geometry", "disintegrated",
                          "--delta", "1/4")
    assert code == 0
    assert isinstance(blob["min_k"]["1/4"], str)  # refusal, not a number


def test_bound_bad_geometry_exits_2(capsys):
    code, _ = run(capsys, "bound", "--geometry", "hyperbolic:2")
    assert code == 2


def test_search_matches_baseline(capsys):
    code, blob = run_json(capsys, "--grid", "2", "search", "--q", "2",
                          "--dim", "2", "--subspace", "e0")
    assert code == 0
    assert blob["baseline"] == "match"
    assert blob["gap"] == "1"


def test_search_full_subspace_gap_zero(capsys):
    code, blob = run_json(capsys, "--grid", "2", "search", "--q", "2",
                          "--dim", "2", "--subspace", "full")
    assert code == 0
    assert blob["gap"] == "0"


def test_search_jobs_flag_same_output(capsys):
    _, a = run(capsys, "--grid", "2", "search")
    _, b = run(capsys, "--grid", "2", "--jobs", "2", "search")
    assert a == b


def test_search_guard_exits_3(capsys):
    code, _ = run(capsys, "--grid", "4", "search", "--q", "3", "--dim", "3",
                  "--subspace", "e0")
    assert code == 3


def test_search_baseline_mismatch_exits_1(capsys, tmp_path, monkeypatch):
    from belle_paire.serialize import store_baseline
    store_baseline("search", {"q2_dim2_grid2_span_e0":
                              {"gap": "1/2", "candidates": 1}}, str(tmp_path))
    monkeypatch.setenv("BELLE_PAIRE_BASELINES", str(tmp_path))
    code, blob = run_json(capsys, "--grid", "2", "search")
    assert code == 1
    assert blob["baseline"] == "MISMATCH"


def test_realize_sampled(capsys):
    code, blob = run_json(capsys, "--seed", "5", "realize")
    assert code == 0
    assert blob["identity_holds"] is True


def test_realize_deterministic(capsys):
    _, a = run(capsys, "--seed", "9", "realize")
    _, b = run(capsys, "--seed", "9", "realize")
    assert a == b


def test_realize_from_spec_file(capsys, tmp_path):
    from belle_paire.sampling import SampleStream
    from belle_paire.serialize import json_dumps, realization_spec_to_json
    spec = SampleStream(3).realization_spec()
    path = tmp_path / "spec.json"
    path.write_text(json_dumps(realization_spec_to_json(spec)))
    code, blob = run_json(capsys, "realize", "--spec", str(path))
    assert code == 0
    assert blob["identity_holds"] is True


def test_realize_bad_spec_exits_2(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{\"groups\": []}")
    code, _ = run(capsys, "realize", "--spec", str(path))
    assert code == 2
    code, _ = run(capsys, "realize", "--spec", str(tmp_path / "missing.json"))
    assert code == 2


def test_verify_battery(capsys):
    code, blob = run_json(capsys, "verify")
    assert code == 0
    assert blob["all_ok"] is True
    names = {c["name"] for c in blob["checks"]}
    assert {"defect_bound", "strip_lift", "search_baseline",
            "realization_round_trip", "combinator_budget"} <= names


def test_csv_format(capsys):
    code, out = run(capsys, "--format", "csv", "bound", "--n-max", "2")
    assert code == 0
    assert out.splitlines()[0] == "n,lower_bound,modular_bound"
    assert out.splitlines()[1] == "1,1/2,1"


def test_bad_eps_exits_2(capsys):
    with pytest.raises(SystemExit):
        # argparse handles its own failures; a bad subcommand dies with 2
        main(["no-such-command"])
    code = main(["--eps", "0.5", "bound"])
    assert code == 2
