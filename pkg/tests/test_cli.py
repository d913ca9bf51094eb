"""End-to-end command behavior: flows, determinism, exit codes, remote scoring."""

from __future__ import annotations

import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from factnice import ingest
from factnice.cli import build_parser, main
from factnice.ingest import DatasetItem, GnaContext, GnaPrediction


def write_items(path, n=5, start=4.0):
    items = [
        DatasetItem(f"item{i:02d}", f"How fast is object {i}?", start + 0.5 * i, "m/s", f"v{i}.mp4")
        for i in range(n)
    ]
    ingest.write_jsonl(path, [ingest.item_to_json(item) for item in items])
    return items


def write_gna(path, rows):
    ingest.write_jsonl(path, [ingest.gna_to_json(r) for r in rows])


class TestUsage:
    @pytest.mark.parametrize(
        "command",
        ["mra", "probes", "nice", "calibrate", "temp-scale", "simulate", "report", "cot-delta"],
    )
    def test_help_exits_zero(self, command, capsys):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args([command, "--help"])
        assert exc.value.code == 0

    def test_calibrate_help_documents_defaults(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["calibrate", "--help"])
        text = capsys.readouterr().out
        for flag, default in [
            ("--delta", "2.5"),
            ("--step", "0.5"),
            ("--half", "5"),
            ("--zeta", "-1.0"),
            ("--eps", "0.001"),
            ("--alpha", "0.5"),
            ("--k", "10"),
        ]:
            assert flag in text
            assert default in text

    def test_missing_required_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["mra", "--items", "x.jsonl"])
        assert exc.value.code == 2

    def test_unknown_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["frobnicate"])
        assert exc.value.code == 2


class TestMraCommand:
    def test_means_and_per_item(self, tmp_path):
        items = write_items(tmp_path / "items.jsonl", n=2, start=10.0)
        rows = [
            GnaPrediction("item00", 10.0, GnaContext.ZERO_SHOT),   # exact -> 1.0
            GnaPrediction("item01", 15.75, GnaContext.ZERO_SHOT),  # ratio 0.5 -> 0.4
            GnaPrediction("item00", 19.0, GnaContext.COT_VF),      # ratio 0.9 -> 0.0
        ]
        write_gna(tmp_path / "gna.jsonl", rows)
        out = tmp_path / "mra.json"
        assert main(["mra", "--items", str(tmp_path / "items.jsonl"), "--gna", str(tmp_path / "gna.jsonl"), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["mra_by_context"]["ZERO_SHOT"] == pytest.approx(0.7)
        assert doc["mra_by_context"]["COT_VF"] == 0.0
        assert doc["per_item_mra"]["ZERO_SHOT"]["item01"] == 0.4
        assert doc["robustness"] == []

    def test_variant_rows_feed_robustness(self, tmp_path):
        write_items(tmp_path / "items.jsonl", n=1, start=10.0)
        rows = [
            GnaPrediction("item00", 10.0, GnaContext.ZERO_SHOT),
            GnaPrediction("item00", 10.0, GnaContext.ZERO_SHOT, "p1"),
            GnaPrediction("item00", 15.0, GnaContext.ZERO_SHOT, "p2"),
        ]
        write_gna(tmp_path / "gna.jsonl", rows)
        out = tmp_path / "mra.json"
        assert main(["mra", "--items", str(tmp_path / "items.jsonl"), "--gna", str(tmp_path / "gna.jsonl"), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        (row,) = doc["robustness"]
        assert row["n_variants"] == 2
        assert row["mean"] == pytest.approx(0.7)  # variants scored 1.0 and 0.4

    def test_unknown_item_id_names_offender(self, tmp_path, capsys):
        write_items(tmp_path / "items.jsonl", n=1)
        write_gna(tmp_path / "gna.jsonl", [GnaPrediction("ghost", 1.0, GnaContext.ZERO_SHOT)])
        code = main(["mra", "--items", str(tmp_path / "items.jsonl"), "--gna", str(tmp_path / "gna.jsonl"), "--out", str(tmp_path / "o.json")])
        assert code == 1
        assert "ghost" in capsys.readouterr().err

    def test_malformed_line_names_file_and_line(self, tmp_path, capsys):
        write_items(tmp_path / "items.jsonl", n=1)
        (tmp_path / "gna.jsonl").write_text('{"item_id": "item00", "predicted": 1.0, "context": "ZERO_SHOT"}\n{oops\n')
        code = main(["mra", "--items", str(tmp_path / "items.jsonl"), "--gna", str(tmp_path / "gna.jsonl"), "--out", str(tmp_path / "o.json")])
        assert code == 1
        err = capsys.readouterr().err
        assert "gna.jsonl" in err and "line 2" in err

    def test_missing_file(self, tmp_path, capsys):
        code = main(["mra", "--items", str(tmp_path / "nope.jsonl"), "--gna", str(tmp_path / "gna.jsonl"), "--out", str(tmp_path / "o.json")])
        assert code == 1
        assert "not found" in capsys.readouterr().err


class TestProbesCommand:
    def test_probe_and_tg_scoring(self, tmp_path):
        probes = [
            {"item_id": "q1", "probe_kind": "VF", "selected": ["D1"], "gold": ["D1"]},
            {"item_id": "q2", "probe_kind": "VF", "selected": ["D2"], "gold": ["D2"]},
            {"item_id": "q1", "probe_kind": "PLC", "selected": ["C"], "gold": ["C", "E"]},
            {"item_id": "q1", "probe_kind": "TG_EVENT", "selected": ["E1"], "gold": ["E1"]},
        ]
        ingest.write_jsonl(tmp_path / "probes.jsonl", [json.dumps(p) for p in probes])
        tg = [{"item_id": "q1", "predicted_ts": 2.0, "gold_ts": 2.0}]
        ingest.write_jsonl(tmp_path / "tg.jsonl", [json.dumps(t) for t in tg])
        out = tmp_path / "probes.json"
        assert main(["probes", "--probes", str(tmp_path / "probes.jsonl"), "--tg", str(tmp_path / "tg.jsonl"), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["probe_f1"]["VF"]["macro_f1"] == 1.0
        assert doc["probe_f1"]["PLC"]["macro_f1"] == pytest.approx(0.5)  # C=1, E=0
        assert doc["probe_f1"]["TG_EVENT"]["macro_f1"] == 1.0
        assert doc["tg_gna"]["mean_mra"] == 1.0

    def test_absent_kinds_are_null(self, tmp_path):
        probes = [{"item_id": "q1", "probe_kind": "VF", "selected": ["D1"], "gold": ["D1"]}]
        ingest.write_jsonl(tmp_path / "probes.jsonl", [json.dumps(p) for p in probes])
        out = tmp_path / "probes.json"
        assert main(["probes", "--probes", str(tmp_path / "probes.jsonl"), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["probe_f1"]["PLC"] is None
        assert doc["tg_gna"] is None


def run_pipeline(tmp_path, tag, workers=1, n_items=5):
    items_path = tmp_path / "items.jsonl"
    if not items_path.exists():
        write_items(items_path, n=n_items)
    scores = tmp_path / f"scores_{tag}.jsonl"
    nice_out = tmp_path / f"nice_{tag}.json"
    cal_out = tmp_path / f"cal_{tag}.json"
    report_out = tmp_path / f"report_{tag}.json"
    assert main(["simulate", "--items", str(items_path), "--model", "gaussian", "--sigma", "1.0", "--base", "0.4", "--out", str(scores)]) == 0
    assert main(["nice", "--items", str(items_path), "--scores", str(scores), "--out", str(nice_out), "--workers", str(workers)]) == 0
    assert main(["calibrate", "--items", str(items_path), "--scores", str(scores), "--out", str(cal_out), "--workers", str(workers)]) == 0
    assert main(["report", "--nice", str(nice_out), "--calibrate", str(cal_out), "--model-tag", "synthetic", "--out", str(report_out)]) == 0
    return scores, nice_out, cal_out, report_out


class TestPipeline:
    def test_simulate_emits_grid_and_beam_rows(self, tmp_path):
        write_items(tmp_path / "items.jsonl", n=2)
        scores = tmp_path / "scores.jsonl"
        assert main(["simulate", "--items", str(tmp_path / "items.jsonl"), "--model", "gaussian", "--out", str(scores)]) == 0
        with open(scores, encoding="utf-8") as handle:
            rows = ingest.parse_scores(handle)
        assert len(rows) == 4  # one grid row + one beam row per item
        sources = {rows[0].candidates[0].source, rows[1].candidates[0].source}
        assert sources == {ingest.CandidateSource.GRID_QUERY, ingest.CandidateSource.BEAM}
        assert len(rows[1].candidates) == 10  # default beam count

    def test_nice_values_match_direct_computation(self, tmp_path):
        from factnice import nice as nice_mod
        from factnice import oracle

        items = write_items(tmp_path / "items.jsonl", n=3)
        scores, nice_out, _, _ = run_pipeline(tmp_path, "direct", n_items=3)
        doc = json.loads(nice_out.read_text())
        scorer = oracle.gaussian(items[0].ground_truth, 1.0, 0.4)
        expected = nice_mod.nci(lambda v: oracle.score(scorer, v), items[0].ground_truth)
        assert doc["per_item"][0]["nci_raw"] == pytest.approx(expected, abs=1e-6)
        assert doc["per_item"][0]["top1_confidence"] == pytest.approx(0.4, abs=1e-6)

    def test_pipeline_bytes_stable_across_runs_and_workers(self, tmp_path):
        first = run_pipeline(tmp_path, "a", workers=1)
        second = run_pipeline(tmp_path, "b", workers=4)
        for path_a, path_b in zip(first, second):
            assert path_a.read_bytes() == path_b.read_bytes()

    def test_calibrate_moves_gaussian_distribution(self, tmp_path):
        _, _, cal_out, _ = run_pipeline(tmp_path, "cal")
        doc = json.loads(cal_out.read_text())
        assert doc["summary"]["n_collapsed"] == 0
        for row in doc["per_item"]:
            assert row["entries"] is not None
            total = math.fsum(e["calibrated_p"] for e in row["entries"])
            assert total == pytest.approx(1.0, abs=1e-5)

    def test_spike_simulation_warns_and_omits_beams(self, tmp_path, capsys):
        write_items(tmp_path / "items.jsonl", n=1)
        scores = tmp_path / "scores.jsonl"
        assert main(["simulate", "--items", str(tmp_path / "items.jsonl"), "--model", "spike", "--out", str(scores)]) == 0
        assert "no beam row" in capsys.readouterr().err
        with open(scores, encoding="utf-8") as handle:
            rows = ingest.parse_scores(handle)
        assert len(rows) == 1  # grid row only, carrying just the spiked truth
        assert [c.value for c in rows[0].candidates] == [4.0]

    def test_report_includes_tier_table_when_mra_present(self, tmp_path):
        items = write_items(tmp_path / "items.jsonl", n=3)
        rows = [GnaPrediction(i.item_id, i.ground_truth, GnaContext.ZERO_SHOT) for i in items]
        write_gna(tmp_path / "gna.jsonl", rows)
        mra_out = tmp_path / "mra.json"
        assert main(["mra", "--items", str(tmp_path / "items.jsonl"), "--gna", str(tmp_path / "gna.jsonl"), "--out", str(mra_out)]) == 0
        _, nice_out, cal_out, _ = run_pipeline(tmp_path, "tiers", n_items=3)
        report_out = tmp_path / "joined.json"
        csv_dir = tmp_path / "csv"
        assert main([
            "report", "--mra", str(mra_out), "--nice", str(nice_out), "--calibrate", str(cal_out),
            "--out", str(report_out), "--csv-dir", str(csv_dir),
        ]) == 0
        doc = json.loads(report_out.read_text())
        high = next(r for r in doc["tier_table"] if r["tier"] == "HIGH")
        assert high["n"] == 3  # exact predictions land in the top tier
        assert high["mean_top1_confidence"] == pytest.approx(0.4, abs=1e-6)
        assert (csv_dir / "tiers.csv").exists()
        assert doc["nice_table"]["nci_calibrated"] is not None


class TestTempScale:
    def test_t1_matches_unscaled_and_output_parses(self, tmp_path):
        from factnice.seqprob import StepLogits, sequence_logprob

        tokens = [
            {"item_id": "q1", "candidate_text": "6.6", "steps": [{"scores": [2.0, 0.0], "chosen_index": 0}]},
            {"item_id": "q1", "candidate_text": "6.9", "steps": [{"scores": [1.0, 3.0], "chosen_index": 1}]},
        ]
        ingest.write_jsonl(tmp_path / "tokens.jsonl", [json.dumps(t) for t in tokens])
        out = tmp_path / "scores.jsonl"
        assert main(["temp-scale", "--tokens", str(tmp_path / "tokens.jsonl"), "--t", "1.0", "--out", str(out)]) == 0
        with open(out, encoding="utf-8") as handle:
            (dist,) = ingest.parse_scores(handle)
        expected = sequence_logprob([StepLogits((2.0, 0.0), 0)])
        assert dist.candidates[0].logprob == expected

    def test_t2_scales(self, tmp_path):
        tokens = [{"item_id": "q1", "candidate_text": "6.6", "steps": [{"scores": [2.0, 0.0], "chosen_index": 0}]}]
        ingest.write_jsonl(tmp_path / "tokens.jsonl", [json.dumps(t) for t in tokens])
        out = tmp_path / "scores.jsonl"
        assert main(["temp-scale", "--tokens", str(tmp_path / "tokens.jsonl"), "--t", "2.0", "--out", str(out)]) == 0
        with open(out, encoding="utf-8") as handle:
            (dist,) = ingest.parse_scores(handle)
        assert dist.candidates[0].logprob == pytest.approx(-0.313262, abs=1e-6)


class TestCotDeltaCommand:
    def test_delta_rows(self, tmp_path):
        items = write_items(tmp_path / "items.jsonl", n=2, start=10.0)
        rows = [
            GnaPrediction("item00", 10.0, GnaContext.ZERO_SHOT),
            GnaPrediction("item01", 10.5, GnaContext.ZERO_SHOT),
            GnaPrediction("item00", 15.0, GnaContext.COT_GT),
            GnaPrediction("item01", 10.5, GnaContext.COT_GT),
        ]
        write_gna(tmp_path / "gna.jsonl", rows)
        out = tmp_path / "cot.json"
        assert main(["cot-delta", "--items", str(tmp_path / "items.jsonl"), "--gna", str(tmp_path / "gna.jsonl"), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        (row,) = doc["deltas"]
        assert row["context"] == "COT_GT"
        assert row["n_common"] == 2
        assert row["per_item"]["item00"] == pytest.approx(-0.6)

    def test_requires_zero_shot(self, tmp_path, capsys):
        write_items(tmp_path / "items.jsonl", n=1, start=10.0)
        write_gna(tmp_path / "gna.jsonl", [GnaPrediction("item00", 10.0, GnaContext.COT_GT)])
        code = main(["cot-delta", "--items", str(tmp_path / "items.jsonl"), "--gna", str(tmp_path / "gna.jsonl"), "--out", str(tmp_path / "o.json")])
        assert code == 1
        assert "ZERO_SHOT" in capsys.readouterr().err


class _StubAdapterHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers["Content-Length"])
        request = json.loads(self.rfile.read(length))
        candidates = [
            {"text": text, "logprob": math.log(0.25)} for text in request["candidates"]
        ]
        body = json.dumps({"candidates": candidates}).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):  # keep test output quiet
        pass


class TestAdapterFallback:
    def test_nice_queries_adapter_when_grid_rows_absent(self, tmp_path, monkeypatch):
        write_items(tmp_path / "items.jsonl", n=1, start=10.0)
        # Beam-only scores: no GRID_QUERY rows, so grid mass must come from the adapter.
        beams = {
            "item_id": "item00",
            "candidates": [
                {"value": 10.0, "text": "10.0", "logprob": math.log(0.3), "source": "BEAM"},
                {"value": 10.5, "text": "10.5", "logprob": math.log(0.2), "source": "BEAM"},
            ],
        }
        ingest.write_jsonl(tmp_path / "scores.jsonl", [json.dumps(beams)])
        server = ThreadingHTTPServer(("127.0.0.1", 0), _StubAdapterHandler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            monkeypatch.setenv("FACTNICE_ADAPTER_URL", f"http://127.0.0.1:{server.server_port}")
            out = tmp_path / "nice.json"
            assert main(["nice", "--items", str(tmp_path / "items.jsonl"), "--scores", str(tmp_path / "scores.jsonl"), "--out", str(out)]) == 0
            doc = json.loads(out.read_text())
            # Adapter scores everything 0.25; beam values keep their own probabilities.
            # Grid mass = 8 * 0.25 (pure grid points) + 0.2 (beam at 10.5) ... but
            # grid points are scored first, so all ten carry 0.25 except 10.5 -> 0.2.
            expected_nci = (9 * 0.25 + 0.2) / (10 * 0.3)
            assert doc["per_item"][0]["nci_raw"] == pytest.approx(expected_nci, abs=1e-6)
        finally:
            server.shutdown()

    def test_without_adapter_beam_only_scores_still_work(self, tmp_path):
        write_items(tmp_path / "items.jsonl", n=1, start=10.0)
        beams = {
            "item_id": "item00",
            "candidates": [
                {"value": 10.0, "text": "10.0", "logprob": math.log(0.3), "source": "BEAM"},
                {"value": 10.5, "text": "10.5", "logprob": math.log(0.2), "source": "BEAM"},
            ],
        }
        ingest.write_jsonl(tmp_path / "scores.jsonl", [json.dumps(beams)])
        out = tmp_path / "nice.json"
        assert main(["nice", "--items", str(tmp_path / "items.jsonl"), "--scores", str(tmp_path / "scores.jsonl"), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["per_item"][0]["nci_raw"] == pytest.approx(0.2 / 3.0, abs=1e-6)
