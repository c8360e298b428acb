"""Report shape, determinism, exit codes and known values for the CLI."""

import json
import subprocess
import sys

import pytest

from semistable_lab import cli


def run_cli(argv):
    """Invoke main in process, return (report, exit status)."""
    report, status = cli.run(argv)
    # the printed payload must round-trip through json
    recovered = json.loads(json.dumps(report))
    assert recovered == report
    return report, status


def run_proc(argv, env=None):
    import os
    merged = dict(os.environ)
    merged.pop("SEMISTABLE_LAB_THREADS", None)
    if env:
        merged.update(env)
    return subprocess.run(
        [sys.executable, "-m", "semistable_lab.cli", *argv],
        capture_output=True, text=True, env=merged)


class TestReportShape:
    def test_top_level_keys_and_schema(self):
        report, status = run_cli(["class-number", "--disc", "-4"])
        assert list(report) == ["schema", "command", "inputs", "results",
                                "checks"]
        assert report["schema"] == 1
        assert report["command"] == "class-number"
        assert status == 0

    def test_check_fields(self):
        report, _ = run_cli(["controlled-degree", "--p", "41"])
        for check in report["checks"]:
            assert set(check) == {"name", "expected", "actual", "pass",
                                  "provenance"}
            assert isinstance(check["pass"], bool)
            assert check["provenance"] in ("paper", "trivial", "derived")

    def test_exit_zero_iff_all_checks_pass(self, monkeypatch):
        _, status = run_cli(["class-number", "--disc", "-164"])
        assert status == 0
        monkeypatch.setitem(cli._CLASS_NUMBER_TABLE, -164, (9, "paper"))
        report, status = run_cli(["class-number", "--disc", "-164"])
        assert status == 1
        assert report["checks"][0]["pass"] is False
        assert report["checks"][0]["expected"] == 9
        assert report["checks"][0]["actual"] == 8

    def test_big_integers_are_strings(self):
        report, _ = run_cli(["curve-info", "--curve", "0,0,0,0,123456789123"])
        disc = report["results"]["disc"]
        assert isinstance(disc, str)
        assert int(disc) == -6584362033202304959143728

    def test_fractions_are_strings(self):
        report, _ = run_cli(["curve-info", "--curve", "0,0,0,0,1"])
        assert report["results"]["j"] == "0/1"


class TestDeterminism:
    def test_byte_identical_repeat(self):
        outs = set()
        for _ in range(2):
            r = run_proc(["gamma-rank", "--ell", "5", "--p", "31"])
            assert r.returncode == 0
            outs.add(r.stdout)
        assert len(outs) == 1

    def test_meta_added_after_stable_region(self):
        plain, _ = run_cli(["class-number", "--disc", "-4"])
        tagged, _ = run_cli(["--meta", "class-number", "--disc", "-4"])
        assert list(tagged)[-1] == "meta"
        assert set(tagged["meta"]) == {"generated_at", "python"}
        stripped = {k: v for k, v in tagged.items() if k != "meta"}
        assert stripped == plain


class TestUsageErrors:
    def test_unknown_subcommand(self):
        r = run_proc(["frobnicate"])
        assert r.returncode == 2
        assert "usage" in r.stderr

    def test_unknown_flag(self):
        r = run_proc(["class-number", "--disc", "-4", "--loud"])
        assert r.returncode == 2

    def test_missing_subcommand(self):
        r = run_proc([])
        assert r.returncode == 2

    def test_domain_error_reports_usage_exit(self):
        r = run_proc(["verify-identities", "--ell", "7", "--s", "7"])
        assert r.returncode == 2
        assert "ell" in r.stderr

    def test_malformed_integer_list(self):
        r = run_proc(["ramification", "--orders", "4,x,1", "--ell", "2"])
        assert r.returncode == 2

    def test_curve_needs_five_coefficients(self):
        r = run_proc(["curve-info", "--curve", "1,2,3"])
        assert r.returncode == 2

    def test_non_squarefree_sextic_rejected(self):
        r = run_proc(["genus2-disc", "--p-coeffs", "0,0,0,0,0,1",
                      "--q-coeffs", "0,1"])
        assert r.returncode == 2


class TestWorkerCount:
    def test_default_is_one(self, monkeypatch):
        monkeypatch.delenv("SEMISTABLE_LAB_THREADS", raising=False)
        assert cli.worker_count() == 1

    def test_env_caps_workers(self, monkeypatch):
        import os
        monkeypatch.setenv("SEMISTABLE_LAB_THREADS", "3")
        assert cli.worker_count() == min(3, os.cpu_count() or 1)

    @pytest.mark.parametrize("bad", ["zebra", "0", "-2"])
    def test_invalid_env_rejected(self, monkeypatch, bad):
        monkeypatch.setenv("SEMISTABLE_LAB_THREADS", bad)
        with pytest.raises(SystemExit):
            cli.worker_count()


class TestKnownValues:
    def test_controlled_degree_41(self):
        report, status = run_cli(["controlled-degree", "--p", "41"])
        res = report["results"]
        assert status == 0
        assert res["disc"] == -164
        assert res["class_number"] == 8
        assert res["degree_over_Q"] == 32
        assert res["dihedral"] is True

    @pytest.mark.parametrize("disc,h", [(-3, 1), (-4, 1), (-164, 8),
                                        (-292, 4)])
    def test_class_number_table(self, disc, h):
        report, status = run_cli(["class-number", "--disc", str(disc)])
        assert status == 0
        assert report["results"]["class_number"] == h

    def test_class_number_off_table_has_no_checks(self):
        report, status = run_cli(["class-number", "--disc", "-20"])
        assert status == 0
        assert report["results"]["class_number"] == 2
        assert report["checks"] == []

    def test_gamma_rank_5_31(self):
        report, status = run_cli(["gamma-rank", "--ell", "5", "--p", "31"])
        res = report["results"]
        assert status == 0
        assert res["gamma_rank"] == 4
        assert res["unit_image_rank"] == 1
        assert res["bound"] == 3
        assert res["splitting"] == {"f": 1, "g": 4, "g2": 4,
                                    "has_two_primes": True}

    def test_gamma_rank_two_adic(self):
        report, status = run_cli(["gamma-rank", "--ell", "2", "--p", "73"])
        assert status == 0
        assert report["results"]["bound"] == 2

    def test_ns_enumerate_200(self):
        report, status = run_cli(["ns-enumerate", "--bound", "200"])
        res = report["results"]
        assert status == 0
        assert res["primes"] == [73, 89, 113]
        assert [(p["p"], p["u"]) for p in res["pairs"]] == [
            (73, -3), (89, 5), (113, -7)]
        assert res["exceptional"]["p"] == 17
        assert res["exceptional"]["curve"] == [1, -1, 1, -1, -14]

    def test_ns_enumerate_below_exceptional(self):
        report, _ = run_cli(["ns-enumerate", "--bound", "16"])
        assert "exceptional" not in report["results"]

    def test_verify_identities_two_adic(self):
        report, status = run_cli(["verify-identities", "--ell", "2",
                                  "--s", "2"])
        assert status == 0
        assert [c["name"] for c in report["checks"]] == [
            "identity-twisted-commutation", "identity-conjugate-difference"]
        assert report["results"]["omega"] == 15
        assert report["results"]["tau"] == [0, 1, 1, 0]

    def test_verify_identities_five_adic(self):
        report, status = run_cli(["verify-identities", "--ell", "5",
                                  "--s", "5"])
        assert status == 0
        assert [c["name"] for c in report["checks"]] == [
            "identity-twisted-commutation-tau-squared",
            "identity-conjugate-difference"]
        assert pow(report["results"]["omega"], 2, 5**4) == 5**4 - 1

    def test_isogeny_maximal_two_node_graph(self):
        report, status = run_cli(["isogeny-maximal", "--ell", "2",
                                  "--s", "2", "--n", "1"])
        res = report["results"]
        assert status == 0
        assert res["maximal_part"] == 2
        assert res["maximal_count"] == 1
        assert res["product_maximal_part"] == 4
        assert len(res["nodes"]) == 2
        assert res["nodes"][0] == {"lattice": [[1, 0], [0, 1]],
                                   "ell_part": 2, "sigma_trivial": True,
                                   "kernel_witnesses": 2}
        assert res["nodes"][1]["sigma_trivial"] is False

    def test_dagger_exceptional_pair(self):
        report, status = run_cli(["dagger", "--ell", "2", "--p", "17"])
        res = report["results"]
        assert status == 0
        assert res["dagger_valuation"] == 4
        assert res["dagger"] == [1, -1, 1, -1, -14]
        assert len(res["members"]) == 4
        assert res["unramified_signal"] is True

    @pytest.mark.parametrize("ell,p,val", [(2, 73, 2), (3, 19, 3),
                                           (3, 37, 3), (5, 11, 5)])
    def test_dagger_generic_pairs(self, ell, p, val):
        report, status = run_cli(["dagger", "--ell", str(ell), "--p", str(p)])
        assert status == 0
        assert report["results"]["dagger_valuation"] == val

    def test_miyawaki_default_box(self):
        report, status = run_cli(["miyawaki-search", "--ell", "3"])
        assert status == 0
        assert report["results"]["primes"] == [19, 37]
        assert report["results"]["hits"] == {
            "19": [[0, 1, 1, 1, 0]], "37": [[0, 1, 1, -3, 1]]}

    def test_ramification_4_2_1(self):
        report, status = run_cli(["ramification", "--orders", "4,2,1",
                                  "--ell", "2"])
        res = report["results"]
        assert status == 0
        assert res["upper_jumps"] == ["0/1", "1/2"]
        assert res["conductor_exponent"] == "3/2"
        assert res["break_bound_ok"] is True

    def test_curve_info_with_local_data(self):
        report, status = run_cli(["curve-info", "--curve", "0,-1,1,-10,-20",
                                  "--primes", "2,11"])
        res = report["results"]
        assert status == 0
        assert res["disc"] == -161051
        assert res["local"] == [
            {"p": 2, "kind": "good", "component_order": 1},
            {"p": 11, "kind": "multiplicative", "component_order": 5}]

    def test_genus2_reference_curve(self):
        report, status = run_cli(["genus2-disc", "--p-coeffs",
                                  "0,-1,2,-2,0,1", "--q-coeffs", "1"])
        res = report["results"]
        assert status == 0
        assert res["factorization"] == {"277": 1}
        names = [c["name"] for c in report["checks"]]
        assert "odd-part-is-power-of-277" in names


class TestPaperSuite:
    def test_all_paper_checks_pass(self):
        report, status = run_cli(["paper-suite"])
        assert status == 0
        assert report["results"]["total"] == 20
        assert report["results"]["passed"] == 20
        assert report["results"]["failed"] == []
        assert all(c["provenance"] == "paper" for c in report["checks"])

    def test_worker_env_does_not_change_output(self, monkeypatch):
        base, _ = run_cli(["paper-suite"])
        monkeypatch.setenv("SEMISTABLE_LAB_THREADS", "2")
        threaded, _ = run_cli(["paper-suite"])
        assert threaded["checks"] == base["checks"]
