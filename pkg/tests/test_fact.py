"""Probe catalogs, MCQ scoring, chain-of-thought context text, report joins."""

from __future__ import annotations

import json

import pytest

from factnice import fact, metrics
from factnice.fact import (
    DEFAULT_CATALOG,
    CotMode,
    ProbeCatalog,
    ProbeOption,
    TgAnnotation,
    build_cot_context,
    diagnostic_summary,
    score_plc,
    score_tg_gna,
    score_tg_mcq,
    score_vf,
)
from factnice.ingest import GnaContext, ProbeKind, ProbeResponse, TgTimestampPrediction


def probe(kind, selected, gold, item_id="q1"):
    return ProbeResponse(item_id, kind, frozenset(selected), frozenset(gold))


class TestCatalog:
    def test_option_counts(self):
        assert len(DEFAULT_CATALOG.vf_options) == 4
        assert len(DEFAULT_CATALOG.plc_options) == 5
        assert len(DEFAULT_CATALOG.tg_options) == 4

    def test_vf_ids(self):
        assert DEFAULT_CATALOG.universe(ProbeKind.VF) == {"D1", "D2", "D3", "D4"}

    def test_plc_formulas(self):
        details = {opt.option_id: opt.detail for opt in DEFAULT_CATALOG.plc_options}
        assert details["C"] == "v = Δx/Δt"
        assert details["E"] == "a = Δv/Δt"
        assert "pixel_ratio" in details["G"]

    def test_machine_readable_document(self):
        doc = json.loads(DEFAULT_CATALOG.to_json())
        assert {o["option_id"] for o in doc["VF"]} == {"D1", "D2", "D3", "D4"}
        assert any(o["detail"] == "v = Δx/Δt" for o in doc["PLC"])

    def test_duplicate_ids_rejected(self):
        options = tuple(ProbeOption(f"D{i}", f"n{i}", "d") for i in (1, 2, 3, 3))
        with pytest.raises(ValueError, match="unique"):
            ProbeCatalog(options, DEFAULT_CATALOG.plc_options, DEFAULT_CATALOG.tg_options)


class TestScoreVf:
    def test_perfect(self):
        responses = [probe(ProbeKind.VF, {"D1", "D4"}, {"D1", "D4"}), probe(ProbeKind.VF, {"D2"}, {"D2"})]
        card = score_vf(responses)
        assert card.macro_f1 == 1.0
        assert card.n_items == 2

    def test_empty_selections_all_gold(self):
        responses = [
            probe(ProbeKind.VF, set(), {"D1", "D2"}),
            probe(ProbeKind.VF, set(), {"D3", "D4"}),
        ]
        assert score_vf(responses).macro_f1 == 0.0

    def test_delegation_identity(self):
        responses = [
            probe(ProbeKind.VF, {"D1"}, {"D1", "D2"}),
            probe(ProbeKind.VF, {"D2", "D3"}, {"D3"}),
            probe(ProbeKind.VF, {"D4"}, {"D4"}),
        ]
        macro, per_option = metrics.macro_f1(
            responses, DEFAULT_CATALOG.universe(ProbeKind.VF), skip_vacuous=True
        )
        card = score_vf(responses)
        assert card.macro_f1 == macro
        assert card.per_option_f1 == per_option

    def test_wrong_kind_rejected(self):
        with pytest.raises(ValueError, match="VF"):
            score_vf([probe(ProbeKind.PLC, {"C"}, {"C"})])


class TestScorePlc:
    def test_perfect_single_option(self):
        responses = [probe(ProbeKind.PLC, {"C"}, {"C"}, f"q{i}") for i in range(3)]
        assert score_plc(responses).macro_f1 == 1.0

    def test_fully_disjoint(self):
        responses = [probe(ProbeKind.PLC, {"G"}, {"C", "E"}, f"q{i}") for i in range(3)]
        assert score_plc(responses).macro_f1 == 0.0

    def test_half_match_half_disjoint(self):
        responses = [
            probe(ProbeKind.PLC, {"C"}, {"C"}, "q1"),
            probe(ProbeKind.PLC, {"D"}, {"D"}, "q2"),
            probe(ProbeKind.PLC, {"E"}, {"F"}, "q3"),
            probe(ProbeKind.PLC, {"F"}, {"E"}, "q4"),
        ]
        # Hand counts: C and D exact (F1 1 each); E and F each have one FP
        # and one FN, no TP (F1 0 each). Macro over {C, D, E, F} = 0.5.
        card = score_plc(responses)
        assert card.macro_f1 == pytest.approx(0.5, abs=1e-12)
        expected, _ = metrics.macro_f1(responses, DEFAULT_CATALOG.universe(ProbeKind.PLC), skip_vacuous=True)
        assert card.macro_f1 == expected


class TestScoreTgGna:
    def test_exact_timestamp(self):
        score = score_tg_gna([TgTimestampPrediction("q1", 2.0, 2.0)])
        assert score.mean_mra == 1.0

    def test_half_ratio(self):
        score = score_tg_gna([TgTimestampPrediction("q1", 3.0, 2.0)])
        assert score.mean_mra == 0.4

    def test_full_miss(self):
        score = score_tg_gna([TgTimestampPrediction("q1", 0.0, 2.0)])
        assert score.mean_mra == 0.0

    def test_mean_is_arithmetic(self):
        preds = [
            TgTimestampPrediction("q1", 2.0, 2.0),
            TgTimestampPrediction("q2", 3.0, 2.0),
            TgTimestampPrediction("q3", 0.0, 2.0),
        ]
        score = score_tg_gna(preds)
        assert score.mean_mra == pytest.approx(sum(score.per_item.values()) / 3, abs=1e-12)


class TestScoreTgMcq:
    def test_all_correct(self):
        responses = [probe(ProbeKind.TG_EVENT, {"E1"}, {"E1"}, f"q{i}") for i in range(4)]
        assert score_tg_mcq(responses).macro_f1 == 1.0

    def test_all_same_wrong_option(self):
        responses = [probe(ProbeKind.TG_EVENT, {"E2"}, {"E1"}, f"q{i}") for i in range(4)]
        assert score_tg_mcq(responses).macro_f1 == 0.0

    def test_three_of_four_balanced(self):
        responses = [
            probe(ProbeKind.TG_EVENT, {"E1"}, {"E1"}, "q1"),
            probe(ProbeKind.TG_EVENT, {"E2"}, {"E2"}, "q2"),
            probe(ProbeKind.TG_EVENT, {"E3"}, {"E3"}, "q3"),
            probe(ProbeKind.TG_EVENT, {"E1"}, {"E4"}, "q4"),
        ]
        # E1: TP=1 FP=1 -> 2/3; E2, E3: 1.0; E4: FN only -> 0. Macro = 2/3.
        assert score_tg_mcq(responses).macro_f1 == pytest.approx(2 / 3, abs=1e-12)

    def test_multi_select_rejected(self):
        with pytest.raises(ValueError, match="exactly one option"):
            score_tg_mcq([probe(ProbeKind.TG_EVENT, {"E1", "E2"}, {"E1"})])


class TestTgAnnotation:
    def test_valid(self):
        ann = TgAnnotation("q1", "ball released", 2.0, ("E1", "E2", "E3", "E4"), "E2")
        assert ann.gold_ts == 2.0

    def test_shape_validated(self):
        with pytest.raises(ValueError, match="4 distinct"):
            TgAnnotation("q1", "e", 2.0, ("E1", "E1", "E3", "E4"), "E1")
        with pytest.raises(ValueError, match="gold_option"):
            TgAnnotation("q1", "e", 2.0, ("E1", "E2", "E3", "E4"), "E9")


class TestCotContext:
    def test_vf_model_answer_names_scale_reference(self):
        response = probe(ProbeKind.VF, {"D4"}, {"D1"})
        text = build_cot_context(response, CotMode.MODEL_ANSWER)
        assert "Scale reference" in text
        assert "D4" in text

    def test_plc_ground_truth_carries_formula(self):
        response = probe(ProbeKind.PLC, {"G"}, {"C"})
        text = build_cot_context(response, CotMode.GROUND_TRUTH)
        assert "v = Δx/Δt" in text

    def test_empty_selection_degenerate_text(self):
        response = probe(ProbeKind.VF, set(), {"D1"})
        text = build_cot_context(response, CotMode.MODEL_ANSWER)
        assert "no preconditions identified" in text

    def test_tg_rejected(self):
        response = probe(ProbeKind.TG_EVENT, {"E1"}, {"E1"})
        with pytest.raises(ValueError, match="VF and PLC"):
            build_cot_context(response, CotMode.MODEL_ANSWER)

    def test_byte_stable(self):
        response = probe(ProbeKind.VF, {"D4", "D1"}, {"D2"})
        first = build_cot_context(response, CotMode.MODEL_ANSWER)
        second = build_cot_context(
            probe(ProbeKind.VF, {"D1", "D4"}, {"D2"}), CotMode.MODEL_ANSWER
        )
        assert first == second


class TestDiagnosticSummary:
    def card(self):
        return fact.ProbeScorecard(ProbeKind.VF, 0.5, {"D1": 0.5}, 4)

    def test_zero_shot_only(self):
        report = diagnostic_summary(self.card(), None, None, None, {GnaContext.ZERO_SHOT: 0.4})
        assert report.cot_deltas == ()
        assert report.mra_by_context == {"ZERO_SHOT": 0.4}

    def test_single_delta_row(self):
        report = diagnostic_summary(
            None, None, None, None, {GnaContext.ZERO_SHOT: 0.4, GnaContext.COT_GT: 0.55}
        )
        assert len(report.cot_deltas) == 1
        row = report.cot_deltas[0]
        assert row.context == "COT_GT"
        assert row.mean_delta == pytest.approx(0.15, abs=1e-12)

    def test_five_context_table(self):
        means = {
            GnaContext.ZERO_SHOT: 0.4,
            GnaContext.COT_VF: 0.35,
            GnaContext.COT_PLC: 0.37,
            GnaContext.COT_VF_PLC: 0.33,
            GnaContext.COT_GT: 0.5,
        }
        report = diagnostic_summary(None, None, None, None, means)
        assert len(report.mra_by_context) == 5
        assert len(report.cot_deltas) == 4
        assert report.mra_by_context["COT_PLC"] == 0.37

    def test_requires_zero_shot(self):
        with pytest.raises(ValueError, match="ZERO_SHOT"):
            diagnostic_summary(None, None, None, None, {GnaContext.COT_GT: 0.5})
