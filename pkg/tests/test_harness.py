import json

import pytest

from limitlab import cli
from limitlab import harness as H
from limitlab.learners import QUESTION


def spec(kind, horizon=6, tail=4, window=2, budget=None):
    return H.CriterionSpec(
        kind, horizon=horizon, tail=tail, window=window, budget=budget
    )


FAM = H.get_family("omega_pair")


class TestCheck:
    def test_ex_settled_tail_passes(self):
        v = H.check(spec("Ex"), ["?", "?", 0, 0, 0, 0], 0, FAM)
        assert v.status == "PASS"

    def test_ex_stuck_wrong(self):
        v = H.check(spec("Ex"), ["?", "?", 1, 1, 1, 1], 0, FAM)
        assert v.status == "FAIL"
        assert v.certificate.kind == "StuckWrong"

    def test_ex_oscillation(self):
        v = H.check(spec("Ex"), [0, 1, 0, 1, 0, 1], 0, FAM)
        assert v.status == "FAIL"
        assert v.certificate.kind == "InfinitelyManyMindChanges"

    def test_fin_revision_fails(self):
        v = H.check(spec("Fin", horizon=4, tail=2), ["?", 0, 1, 1], 1, FAM)
        assert v.status == "FAIL"
        assert v.certificate.kind == "CommitRevised"

    def test_fin_single_commit_passes(self):
        v = H.check(spec("Fin", horizon=4, tail=2), ["?", 1, 1, 1], 1, FAM)
        assert v.status == "PASS"

    def test_fin_silence_fails(self):
        v = H.check(spec("Fin", horizon=4, tail=2), ["?"] * 4, 1, FAM)
        assert v.status == "FAIL"
        assert v.certificate.kind == "NeverCommits"

    def test_alpha_fin_budget(self):
        transcript = [0, 1, 0, 0, 0, 0]
        over = H.check(spec("AlphaFin", budget=1), transcript, 0, FAM)
        assert over.status == "FAIL"
        assert over.certificate.kind == "MindChangeBudgetExceeded"
        under = H.check(spec("AlphaFin", budget=2), transcript, 0, FAM)
        assert under.status == "PASS"

    def test_co_truth_emission_fails(self):
        v = H.check(spec("Co"), [1, 0, 1, 1, 1, 1], 0, FAM)
        assert v.status == "FAIL"
        assert v.certificate.kind == "CorrectCodeEmitted"

    def test_co_omission_passes(self):
        v = H.check(spec("Co"), ["?", 1, 1, 1, 1, 1], 0, FAM)
        assert v.status == "PASS"

    def test_co_missing_other_code(self):
        v = H.check(spec("Co"), ["?"] * 6, 0, FAM)
        assert v.status == "FAIL"
        assert v.certificate.kind == "MissingCode"

    def test_pl_recurrence_gap(self):
        transcript = [0] * 10 + ["?"] * 10
        v = H.check(spec("PL", horizon=20, tail=4, window=4), transcript, 0, FAM)
        assert v.status == "FAIL"
        assert v.certificate.kind == "RecurrenceGap"

    def test_pl_wrong_code_recurs(self):
        transcript = [0, 1] * 10
        v = H.check(spec("PL", horizon=20, tail=4, window=4), transcript, 0, FAM)
        assert v.status == "FAIL"
        assert v.certificate.kind == "WrongCodeRecurs"

    def test_pl_clean_recurrence_passes(self):
        transcript = [1] * 10 + [0, "?"] * 5
        v = H.check(spec("PL", horizon=20, tail=4, window=4), transcript, 0, FAM)
        assert v.status == "PASS"

    def test_nus_abandoned_truth(self):
        v = H.check(spec("NUs"), [0, 1, 0, 0, 0, 0], 0, FAM)
        assert v.status == "FAIL"
        assert v.certificate.kind == "AbandonedTruth"

    def test_dec_abandon_return(self):
        v = H.check(spec("Dec"), [0, 1, 0, 0, 0, 0], 0, FAM)
        assert v.status == "FAIL"
        assert v.certificate.kind == "AbandonReturn"

    def test_dec_clean_run_passes(self):
        v = H.check(spec("Dec"), [1, 0, 0, 0, 0, 0], 0, FAM)
        assert v.status == "PASS"

    def test_short_transcript_inconclusive(self):
        v = H.check(spec("Ex"), [0, 0], 0, FAM)
        assert v.status == "INCONCLUSIVE"

    def test_totality_on_garbage(self):
        for transcript in ([None] * 6, [object()] * 6, [0.5, {}, (), "x", 0, 0]):
            v = H.check(spec("Ex"), transcript, 0, FAM)
            assert v.status in ("PASS", "FAIL", "INCONCLUSIVE")

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            H.CriterionSpec("Ex", horizon=10, window=10)
        with pytest.raises(ValueError):
            H.CriterionSpec("Nope")
        with pytest.raises(ValueError):
            H.CriterionSpec("AlphaFin")


class TestMatrix:
    def test_incompatible_cell_skipped(self):
        rows = H.run_matrix(
            [{"family": "omega_pair", "learner": "fin", "criterion": "Fin"}]
        )
        assert [r["verdict"].status for r in rows] == ["SKIPPED"]
        assert H.matrix_exit_code(rows) == 0

    def test_rows_serialize(self):
        rows = H.run_matrix(
            [
                {
                    "family": "omega_pair",
                    "learner": "ex_minmax",
                    "criterion": "Ex",
                    "horizon": 128,
                    "tail": 16,
                    "window": 8,
                    "member": 0,
                }
            ]
        )
        blob = json.dumps(H.row_to_json(rows[0]))
        parsed = json.loads(blob)
        assert parsed["verdict"]["status"] == "PASS"
        assert "PASS" in H.render_table(rows)


class TestMonotoneEvidence:
    def test_stuck_wrong_persists_at_doubled_horizon(self):
        base = spec("Ex", horizon=8, tail=4, window=2)
        doubled = spec("Ex", horizon=16, tail=4, window=2)
        transcript = [0] + [1] * 15
        assert H.check(base, transcript, 0, FAM).certificate.kind == "StuckWrong"
        assert (
            H.check(doubled, transcript, 0, FAM).certificate.kind
            == "StuckWrong"
        )


class TestCli:
    def test_list_families(self, capsys):
        assert cli.main(["list-families"]) == 0
        out = capsys.readouterr().out
        assert "omega_pair" in out

    def test_usage_error_exit_code(self):
        assert cli.main(["run", "omega_pair", "nope", "Ex"]) == 2
        assert cli.main(["frobnicate"]) == 2

    def test_classify_command(self, capsys):
        assert cli.main(["classify", "cycles"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["level"] == "StrongAntichain"

    def test_run_command(self, capsys):
        code = cli.main(
            [
                "run", "omega_pair", "ex_minmax", "Ex",
                "--horizon", "128", "--tail", "16", "--window", "8",
            ]
        )
        assert code == 0
        assert capsys.readouterr().out.count("PASS") == 2

    def test_reduce_verify_command(self, capsys):
        code = cli.main(
            ["reduce", "gamma_erange", "tilde_chains", "--verify"]
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["passed"]

    def test_matrix_and_report(self, tmp_path, capsys):
        config = tmp_path / "cells.json"
        config.write_text(
            json.dumps(
                {
                    "cells": [
                        {
                            "family": "omega_pair",
                            "learner": "ex_minmax",
                            "criterion": "Ex",
                            "horizon": 128,
                            "tail": 16,
                            "window": 8,
                        }
                    ]
                }
            )
        )
        log = tmp_path / "runs.jsonl"
        assert cli.main(["matrix", str(config), "--out", str(log)]) == 0
        capsys.readouterr()
        assert cli.main(["report", str(log)]) == 0
        out = capsys.readouterr().out
        assert "PASS=2" in out
