import json
import re

import pytest

from dendron import (cyclic_group, group_to_json, single_edge, tree_to_json,
                     tree_from_json, gtree_to_gforest, gforest_dumps,
                     z4_orbit_contraction_sample)
from dendron.cli import main, SUITE_RUNNERS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestEnumerate:
    def test_one_binary_corolla(self, capsys):
        code, out, _ = run(capsys, "enumerate", "--leaves", "2",
                           "--max-vertices", "1")
        assert code == 0 and out.strip() == "1"

    def test_one_bare_edge(self, capsys):
        code, out, _ = run(capsys, "enumerate", "--leaves", "1",
                           "--max-vertices", "0")
        assert code == 0 and out.strip() == "1"

    def test_written_trees_parse_back(self, capsys, tmp_path):
        path = tmp_path / "trees.json"
        code, out, _ = run(capsys, "enumerate", "--leaves", "2",
                           "--max-vertices", "2", "--output", str(path))
        docs = json.loads(path.read_text())
        assert code == 0 and int(out.strip()) == len(docs)
        for doc in docs:
            assert tree_from_json(doc).edges


class TestCheckSuites:
    def test_factorization(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        code, _, err = run(capsys, "check", "factorization",
                           "--max-edges", "3", "--output", str(path))
        report = json.loads(path.read_text())
        assert code == 0 and "pass" in err
        assert (report["trees"], report["pairs"],
                report["morphisms"]) == (9, 81, 158)
        assert report["ok"] and report["counterexample"] is None

    def test_coherence(self, capsys):
        code, out, _ = run(capsys, "check", "coherence", "--max-size", "2",
                           "--probe-edges", "3")
        report = json.loads(out)
        assert code == 0 and report["ok"]
        assert (report["squares"], report["triangles"]) == (5331, 401)

    def test_equivalence_lists_hom_sizes(self, capsys):
        code, out, _ = run(capsys, "check", "equivalence",
                           "--max-edges", "3")
        report = json.loads(out)
        assert code == 0 and report["ok"]
        assert report["morphisms"] == 158
        assert report["hom_sizes"][0] == [0, 0, 1]
        assert len(report["hom_sizes"]) == report["pairs"] == 81

    def test_equivariant(self, capsys):
        code, out, _ = run(capsys, "check", "equivariant",
                           "--group", "z2", "--max-edges", "3")
        report = json.loads(out)
        assert code == 0 and report["ok"]
        assert report["trees"] == 11
        assert report["plain_homs"] == 219
        assert report["equivariant_homs"] == report["groth_homs"] == 173

    def test_genuine(self, capsys):
        code, out, _ = run(capsys, "check", "genuine", "--group", "z2",
                           "--max-edges", "2")
        report = json.loads(out)
        assert code == 0 and report["ok"]
        assert report["forest_check"]["objects"] == 8
        assert report["forest_check"]["triple_homs"] == 84
        assert report["one_object_groupoid_equivalences"] == {
            "0": True, "0,1": True}

    def test_group_file_input(self, capsys, tmp_path):
        path = tmp_path / "z3.json"
        path.write_text(json.dumps(group_to_json(cyclic_group(3))))
        code, out, _ = run(capsys, "check", "equivariant",
                           "--group", str(path), "--max-edges", "2")
        report = json.loads(out)
        assert code == 0 and report["ok"]
        assert report["group"] == str(path)


class TestDeterminism:
    def test_reports_are_byte_identical_across_runs(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, "check", "equivalence", "--max-edges", "3",
            "--output", str(a))
        run(capsys, "check", "equivalence", "--max-edges", "3",
            "--output", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_worker_count_never_changes_the_bytes(self, capsys, tmp_path,
                                                  monkeypatch):
        outs = []
        for workers in ("1", "3"):
            monkeypatch.setenv("DENDRON_WORKERS", workers)
            path = tmp_path / f"w{workers}.json"
            code, _, _ = run(capsys, "check", "factorization",
                             "--max-edges", "3", "--output", str(path))
            assert code == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]


class TestExportDot:
    def test_bare_edge_renders_two_stubs(self, capsys, tmp_path):
        path = tmp_path / "eta.json"
        path.write_text(json.dumps(tree_to_json(single_edge("e"))))
        code, out, _ = run(capsys, "export-dot", str(path))
        assert code == 0
        assert out.count("plaintext") == 2
        assert out.count("->") == 1

    def test_orbit_coloring_groups_the_action_classes(self, capsys,
                                                      tmp_path):
        sample = z4_orbit_contraction_sample()
        gf = gtree_to_gforest(sample.big.gtree)
        path = tmp_path / "z4.json"
        path.write_text(gforest_dumps(gf, group_ref="z4"))
        code, out, _ = run(capsys, "export-dot", str(path),
                           "--color-orbits")
        assert code == 0
        classes = {}
        for line in out.splitlines():
            m = re.search(r'label="([^"]+)", color="([^"]+)"', line)
            if m:
                classes.setdefault(m.group(2), set()).add(m.group(1))
        assert sorted(map(sorted, classes.values())) == [
            ["-c", "-ic", "c", "ic"], ["a", "ia"], ["b"],
            ["d", "id"], ["e"], ["r"]]

    def test_export_is_deterministic(self, capsys, tmp_path):
        sample = z4_orbit_contraction_sample()
        gf = gtree_to_gforest(sample.big.gtree)
        path = tmp_path / "z4.json"
        path.write_text(gforest_dumps(gf, group_ref="z4"))
        first = run(capsys, "export-dot", str(path), "--color-orbits")[1]
        second = run(capsys, "export-dot", str(path), "--color-orbits")[1]
        assert first == second


class TestExitCodes:
    def test_unknown_suite_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["check", "nonsense"])
        assert exc.value.code == 2

    def test_missing_file_is_an_io_error(self, capsys, tmp_path):
        code, _, err = run(capsys, "export-dot",
                           str(tmp_path / "missing.json"))
        assert code == 2 and "error:" in err

    def test_unknown_group_is_a_usage_error(self, capsys):
        code, _, err = run(capsys, "check", "equivariant",
                           "--group", "z9", "--max-edges", "2")
        assert code == 2 and "error:" in err

    def test_failed_check_exits_one(self, capsys, monkeypatch):
        monkeypatch.setitem(
            SUITE_RUNNERS, "coherence",
            lambda args: {"suite": "coherence", "ok": False,
                          "counterexample": "forced"})
        code, out, err = run(capsys, "check", "coherence")
        assert code == 1 and "FAIL" in err
        assert json.loads(out)["counterexample"] == "forced"
