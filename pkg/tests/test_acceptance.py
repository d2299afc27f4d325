"""Acceptance suite: one test per criterion, each printing a PASS line and
enforcing its runtime budget.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.
"""

import json
import math
import random
import time
from collections import Counter
from pathlib import Path

import pytest
from click.testing import CliRunner

from sentidistill.bench.data import read_split, sample_splits
from sentidistill.bench.prompts import render_eval_prompt
from sentidistill.bench.registry import REGISTRY, TASK_ORDER, get_spec
from sentidistill.bench.run import run_eval
from sentidistill.cli import main as cli_main
from sentidistill.client.api import TeacherClient
from sentidistill.dedup import dedup
from sentidistill.decontam import build_index, decontaminate
from sentidistill.prompts import default_demo_pool_path
from sentidistill.prompts.general_tasks import ingest_general_tasks
from sentidistill.prompts.icldist import FormatStrategy, build_icl_corpus, load_demo_pool, render_icl_prompt
from sentidistill.prompts.knowdist import load_templates
from sentidistill.prompts.spec import GenParams, PromptSpec, make_prompt_id
from sentidistill.records import TextRecord
from sentidistill.report import aggregate, emit, load_scorecards
from sentidistill.scoring.metrics import macro_f1, micro_f1_tuples, sentiment_graph_f1
from sentidistill.scoring.parse import parse_label, parse_tuples
from benchfix import gold_reply, make_bench_dir, make_general_task_files, registry_sized_raw
from conftest import synth_records, synth_text
from mockserver import MockTeacher
from oracles import ref_dedup_allpairs, ref_graph_f1, ref_macro_f1, ref_micro_f1
from test_dedup import plant_near_duplicates
from test_icldist import _demo
from test_parse import TUPLE_FIXTURES

GOLDEN = Path(__file__).parent / "golden"


class _Budget:
    def __init__(self, name: str, seconds: float | None):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, *exc):
        elapsed = time.monotonic() - self.start
        if exc_type is None:
            if self.seconds is not None:
                assert elapsed < self.seconds, (
                    f"{self.name}: runtime {elapsed:.2f}s over budget {self.seconds}s"
                )
            print(f"\n[PASS] {self.name} ({elapsed:.2f}s)")
        else:
            print(f"\n[FAIL] {self.name} ({elapsed:.2f}s)")


def test_a1_template_fidelity():
    with _Budget("A1 template fidelity (all prompt renderings match golden files)", 1.0):
        fixture = "The new camera focuses quickly, but the battery barely lasts a day."
        templates = {t.template_id: t for t in load_templates()}
        assert len(templates) == 10
        for template_id, template in templates.items():
            golden = (GOLDEN / "knowdist" / f"{template_id.replace('/', '_')}.txt")
            assert template.render(fixture) == golden.read_text(encoding="utf-8"), template_id

        oil = ("I bought this because I wanted to control the amount of oil I was "
               "using. I read the other reviews and the ...")
        renders = {
            "sc_basic": render_icl_prompt(
                "sentiment_cls", FormatStrategy("basic"), [_demo(oil)],
                "A fabulous social commentary is illustrated between the lines that "
                "you can enjoy privately in your mind while ..."),
            "sc_lw": render_icl_prompt(
                "sentiment_cls", FormatStrategy("label_words", "+1/-1/0"), [_demo(oil)],
                "If your planting several rows of garden veggies, ie: corn beans, etc, "
                "this is a great time saver. You must make ..."),
            "sc_mi": render_icl_prompt(
                "sentiment_cls", FormatStrategy("minimized_instruction"),
                [_demo("I couldn't use this cable. But it is not the fault of the "
                       "cable. I ordered it to use with my new kodak printer. I ...")],
                "This is a good family game, easy to learn, and straightforward to "
                "play. Also helpful in teaching US geography ..."),
            "er_basic": render_icl_prompt(
                "emotion_rec", FormatStrategy("basic"),
                [_demo("I just received a pair 38x30 VIP and they were a bit loose "
                       "around the waste, and the legging was long enough ...",
                       emotions=("disgust", "neutral", "sadness"))],
                "First, the title is misleading. One might expect a book called "
                "\"Stumbling on happiness\" to perhaps provide ..."),
            "er_lt": render_icl_prompt(
                "emotion_rec", FormatStrategy("label_taxonomy", "goemotions28"),
                [_demo("Let me start by saying that I have read as many Agatha "
                       "Christie books as I possibly could. Sad Cypress ...",
                       goemotions=("curiosity", "admiration", "surprise",
                                   "disappointment", "disapproval"))],
                "I put this in my Garage and the humidity that comes out of the end "
                "is good for the wood in this kind of ..."),
            "er_mi": render_icl_prompt(
                "emotion_rec", FormatStrategy("minimized_instruction"),
                [_demo("I really don't get how this game got such good ratings. My "
                       "only guess is that people just like game of ...",
                       emotions=("disgust", "neutral", "anger"))],
                "This wonderful allegory is highly entertaining for a young person "
                "and deeply inspiring for an adult who is ..."),
        }
        for name, rendered in renders.items():
            assert rendered == (GOLDEN / "icl" / f"{name}.txt").read_text(encoding="utf-8"), name

        from test_bench import _GOLDEN_INPUTS
        from sentidistill.bench.data import TaskInstance

        for task_id, ((demo_text, demo_label), query_text) in _GOLDEN_INPUTS.items():
            demo = TaskInstance("d1", task_id, "dev", demo_text, label=demo_label)
            query = TaskInstance("q1", task_id, "test", query_text)
            rendered = render_eval_prompt(task_id, query, [demo])
            assert rendered == (GOLDEN / "eval" / f"{task_id}.txt").read_text(encoding="utf-8")
        # stance + the four extraction tasks carry extra fields
        stance_demo = TaskInstance(
            "d1", "pstance", "dev",
            "? seriously - no hate but what leadership . dude is loosing sensibility "
            "and MIA. Bernie though has ...", label="favor", target="Bernie Sanders")
        stance_query = TaskInstance(
            "q1", "pstance", "test",
            "He's the ONLY ONE Where have I heard that before? No, Bernie is NOT the "
            "only one The Democrats ...", target="Bernie Sanders")
        assert render_eval_prompt("pstance", stance_query, [stance_demo]) == \
            (GOLDEN / "eval" / "pstance.txt").read_text(encoding="utf-8")
        extraction = {
            "atsa": ([("ravioli", "positive")], "I had the best ravioli ever.",
                     "Green Tea creme brulee is a must!"),
            "acsa": ([("restaurant general", "positive")], "I pray it stays open forever.",
                     "Serves really good sushi."),
            "asqp": ([("restaurant general", "place", "try", "positive")],
                     "Make sure you try this place as often as you can .",
                     "All their menu items are a hit , and they serve mimosas"),
            "ssa": ([("NULL", "wellness hotel", "beautiful", "positive")],
                    "A beautiful wellness hotel",
                    "We went foor a cheap city trip and that 's what we have got ."),
        }
        for task_id, (tuples, demo_text, query_text) in extraction.items():
            demo = TaskInstance("d1", task_id, "dev", demo_text, tuples=tuples)
            query = TaskInstance("q1", task_id, "test", query_text)
            assert render_eval_prompt(task_id, query, [demo]) == \
                (GOLDEN / "eval" / f"{task_id}.txt").read_text(encoding="utf-8")


def test_a2_dedup_oracle_equivalence():
    with _Budget("A2 dedup equals all-pairs Hamming oracle (3 corpora, thresholds 0-3)", 10.0):
        corpora = [
            plant_near_duplicates(200, 20, seed=11),
            plant_near_duplicates(700, 60, seed=22),
            plant_near_duplicates(2000, 150, seed=33),
        ]
        for records in corpora:
            items = [(r.id, r.fingerprint) for r in records]
            for threshold in range(4):
                kept, dropped = dedup(records, threshold)
                oracle_kept, oracle_dropped = ref_dedup_allpairs(items, threshold)
                assert [r.id for r in kept] == oracle_kept
                assert [(d.dropped_id, d.kept_id, d.distance) for d in dropped] == oracle_dropped


def test_a3_decontamination_completeness():
    with _Budget("A3 decontamination: 100% planted dropped, 0% control dropped", 5.0):
        rng = random.Random(500)
        bench_sentences = [synth_text(rng, 12) for _ in range(25)]
        index = build_index((("bench", t) for t in bench_sentences), ngram_size=8)
        planted = []
        for i in range(60):
            sentence = bench_sentences[i % len(bench_sentences)]
            filler_a = synth_text(rng, rng.randint(0, 8))
            filler_b = synth_text(rng, rng.randint(0, 8))
            text = " ".join(x for x in (filler_a, sentence, filler_b) if x)
            planted.append(TextRecord.from_text(f"planted:{i}", "other", text))
        control = [
            TextRecord.from_text(f"control:{i}", "other",
                                 "unrelated movie chatter about props costumes "
                                 f"and lighting rigs number {i} plus filler")
            for i in range(60)
        ]
        kept, dropped = decontaminate(planted + control, index)
        dropped_ids = {d.record_id for d in dropped}
        assert dropped_ids == {r.id for r in planted}  # 100% planted, 0% control
        assert {r.id for r in kept} == {r.id for r in control}


def test_a4_icldist_distribution(tmp_path):
    with _Budget("A4 ICL corpus: uniform demo counts, weighted strategies, no leakage", 30.0):
        records = synth_records(600, seed=41, n_tokens=12)
        pool = load_demo_pool(default_demo_pool_path())
        task_paths = make_general_task_files(
            tmp_path, n_tasks=6, n_instances=20,
            excluded_specs=(("senti", "Sentiment Analysis"),))
        tasks = ingest_general_tasks(task_paths)
        specs = list(build_icl_corpus(records, pool, tasks, 16_000, (0.8, 0.2), seed=91))
        assert len(specs) == 16_000

        demo_counts = Counter(s.provenance["k"] for s in specs)
        sigma_k = math.sqrt(16_000 * (1 / 16) * (15 / 16))
        for k in range(1, 17):
            assert abs(demo_counts[k] - 1000) <= 3 * sigma_k, (k, demo_counts[k])

        senti = [s for s in specs if s.stage == "icldist"]
        strategies = Counter(s.provenance["strategy"] for s in senti)
        n = len(senti)
        sigma_s = math.sqrt(n * 0.25 * 0.75)
        for kind in ("basic", "label_words", "label_taxonomy", "minimized_instruction"):
            assert abs(strategies[kind] - n * 0.25) <= 3 * sigma_s, (kind, strategies[kind])

        for spec in specs:
            assert spec.provenance["query_id"] not in spec.provenance["demo_ids"]

        general_tasks_seen = {s.provenance["task"] for s in specs if s.stage == "icl_general"}
        assert general_tasks_seen
        assert not any("senti" in t for t in general_tasks_seen)


def test_a5_protocol_constants(tmp_path):
    with _Budget("A5 protocol constants: temp 0, 4 demos, 3 seeds, registry split counts", None):
        bench = make_bench_dir(tmp_path / "bench", default_sizes=(6, 6, 4),
                               task_ids=["imdb", "atsa"])
        with MockTeacher(reply=gold_reply(bench)) as server:
            results = run_eval(server.url, "mock", bench, tmp_path / "results",
                               task_ids=("imdb", "atsa"), seeds=(13, 17, 19))
            payloads = list(server.payloads)
        assert len({r.seed for r in results}) == 3
        assert payloads
        for payload in payloads:
            assert payload["temperature"] == 0.0
            content = payload["messages"][-1]["content"]
            assert len(content.split("\n\n")) == 1 + 4 + 1  # instruction, 4 demos, query

        raw = registry_sized_raw(tmp_path / "raw")
        sizes = sample_splits(raw, tmp_path / "sampled", seed=7)
        for task_id in TASK_ORDER:
            spec = get_spec(task_id)
            assert sizes[task_id] == {"train": spec.train_size, "dev": spec.dev_size,
                                      "test": spec.test_size}, task_id
        assert sizes["imdb"] == {"train": 3000, "dev": 300, "test": 1000}
        assert sizes["asqp"] == {"train": 1264, "dev": 316, "test": 544}


def test_a6_metric_oracles():
    with _Budget("A6 metrics match brute-force oracles (500 random instances each)", 20.0):
        value, _ = macro_f1(
            ["positive", "negative", "positive", "negative"],
            ["positive", "positive", "positive", "negative"],
            ("positive", "negative"))
        assert value == pytest.approx(11 / 15, abs=1e-12)  # 0.7333...
        micro, _ = micro_f1_tuples([[("a", "pos"), ("b", "neg")]],
                                   [[("a", "pos"), ("c", "pos")]])
        assert micro == pytest.approx(0.5, abs=1e-12)
        graph, _ = sentiment_graph_f1(
            [[("NULL", "wellness hotel", "beautiful", "positive")]],
            [[("NULL", "hotel", "beautiful", "positive")]])
        assert graph == pytest.approx(5 / 6, abs=1e-12)

        rng = random.Random(606)
        labels_pool = ["l1", "l2", "l3", "l4", "l5", "l6"]
        for _ in range(500):
            label_set = labels_pool[: rng.randint(2, 6)]
            n = rng.randint(1, 20)
            golds = [rng.choice(label_set) for _ in range(n)]
            preds = [rng.choice(label_set + [None]) for _ in range(n)]
            ours, _ = macro_f1(
                golds,
                [p if p else parse_label("???", label_set) for p in preds],
                label_set)
            assert ours == pytest.approx(ref_macro_f1(golds, preds, label_set), abs=1e-9)

        vocab = ["spresso", "patio", "decor", "wine", "brunch"]
        pols = ["positive", "negative", "neutral"]
        for _ in range(500):
            n_inst = rng.randint(1, 5)
            golds = [[(rng.choice(vocab), rng.choice(pols))
                      for _ in range(rng.randint(0, 3))] for _ in range(n_inst)]
            preds = [[(rng.choice(vocab), rng.choice(pols))
                      for _ in range(rng.randint(0, 3))] for _ in range(n_inst)]
            ours, _ = micro_f1_tuples(golds, preds)
            assert ours == pytest.approx(ref_micro_f1(golds, preds), abs=1e-9)

        def quad():
            def span():
                if rng.random() < 0.3:
                    return "NULL"
                return " ".join(rng.sample(vocab, rng.randint(1, 2)))
            return (span(), span(), " ".join(rng.sample(vocab, rng.randint(1, 2))),
                    rng.choice(pols))

        for _ in range(500):
            n_inst = rng.randint(1, 3)
            golds = [[quad() for _ in range(rng.randint(0, 3))] for _ in range(n_inst)]
            preds = [[quad() for _ in range(rng.randint(0, 3))] for _ in range(n_inst)]
            ours, _ = sentiment_graph_f1(golds, preds)
            assert ours == pytest.approx(ref_graph_f1(golds, preds), abs=1e-9)


def test_a7_parser_robustness():
    with _Budget("A7 parser robustness (>= 40 golden fixtures)", 1.0):
        assert len(TUPLE_FIXTURES) >= 40
        for raw, arity, null_slots, expected in TUPLE_FIXTURES:
            pred = parse_tuples(raw, arity, null_slots)
            if expected is None:
                assert pred.tuples == []
                assert pred.diagnostics.get("reason") or pred.diagnostics.get("notes")
            else:
                assert pred.kind == "tuple_set"
                assert pred.tuples == expected, raw
        assert parse_tuples("total gibberish", 2).unparsed


def test_a8_end_to_end_mock_run(tmp_path):
    with _Budget("A8 end-to-end mock pipeline with gold-echo eval", 120.0):
        runner = CliRunner()

        def invoke(args):
            result = runner.invoke(cli_main, args, catch_exceptions=False)
            assert result.exit_code == 0, result.output
            return json.loads(result.output.strip().splitlines()[-1])

        # 200-record raw fixture
        rng = random.Random(808)
        raw = tmp_path / "raw.jsonl"
        with open(raw, "w", encoding="utf-8") as fh:
            for i in range(200):
                fh.write(json.dumps({"text": synth_text(rng, 18)}) + "\n")
        bench = make_bench_dir(tmp_path / "bench", default_sizes=(8, 6, 5))
        tasks_dir = tmp_path / "tasks"
        make_general_task_files(tasks_dir, n_tasks=4, n_instances=20)

        invoke(["ingest", "--in", str(raw), "--schema", "jsonl", "--source", "other",
                "--out", str(tmp_path / "records.jsonl")])
        invoke(["dedup", "--in", str(tmp_path / "records.jsonl"), "--threshold", "3",
                "--out", str(tmp_path / "dedup.jsonl"),
                "--drops", str(tmp_path / "dd.jsonl")])
        out = invoke(["decontam", "--in", str(tmp_path / "dedup.jsonl"),
                      "--bench-dir", str(bench), "--ngram", "8",
                      "--out", str(tmp_path / "clean.jsonl"),
                      "--drops", str(tmp_path / "cd.jsonl")])
        assert out["kept"] > 150

        invoke(["gen-knowdist", "--in", str(tmp_path / "clean.jsonl"),
                "--out", str(tmp_path / "kd.jsonl"), "--ratio", "0.2", "--seed", "17"])
        invoke(["gen-icldist", "--records", str(tmp_path / "clean.jsonl"),
                "--tasks-dir", str(tasks_dir), "--target", "150", "--mix", "0.8,0.2",
                "--seed", "17", "--out", str(tmp_path / "icl.jsonl")])

        with MockTeacher(reply="Measured reflection on the text at hand.") as server:
            invoke(["collect", "--prompts", str(tmp_path / "kd.jsonl"),
                    "--endpoint", server.url, "--model", "mock",
                    "--out", str(tmp_path / "kd_samples.jsonl"),
                    "--failures", str(tmp_path / "kd_fail.jsonl")])
            invoke(["collect", "--prompts", str(tmp_path / "icl.jsonl"),
                    "--endpoint", server.url, "--model", "mock",
                    "--out", str(tmp_path / "icl_samples.jsonl"),
                    "--failures", str(tmp_path / "icl_fail.jsonl")])

        invoke(["export", "--stage", "knowdist", "--in", str(tmp_path / "kd_samples.jsonl"),
                "--profile", "llama-1.2b", "--seed", "17",
                "--out-dir", str(tmp_path / "corpus_kd")])
        invoke(["export", "--stage", "icldist", "--in", str(tmp_path / "icl_samples.jsonl"),
                "--profile", "llama-1.2b", "--seed", "17",
                "--out-dir", str(tmp_path / "corpus_icl")])
        assert invoke(["validate", "--in", str(tmp_path / "corpus_kd" / "train.jsonl")])["errors"] == 0
        assert invoke(["validate", "--in", str(tmp_path / "corpus_icl" / "train.jsonl")])["errors"] == 0

        with MockTeacher(reply=gold_reply(bench)) as server:
            invoke(["eval", "--endpoint", server.url, "--model", "mock",
                    "--bench-dir", str(bench), "--tasks", "all", "--seeds", "13,17,19",
                    "--out", str(tmp_path / "results")])

        report_out = invoke(["report", "--scores", str(tmp_path / "results"),
                             "--model", "mock", "--formats", "md,csv,json",
                             "--out", str(tmp_path / "report")])
        report = json.loads((tmp_path / "report" / "report.json").read_text())
        classification = [t for t in TASK_ORDER if REGISTRY[t].is_classification]
        for task_id in classification:
            assert report["per_task"][task_id]["mean"] == pytest.approx(1.0), task_id
        means = [report["per_task"][t]["mean"] for t in TASK_ORDER]
        assert report["overall"] == pytest.approx(sum(means) / len(means), abs=1e-12)

        # aggregation arithmetic reproduces the published best-row average
        from sentidistill.scoring.metrics import ScoreCard

        best_row = (94.30, 98.17, 95.41, 69.57, 85.25, 77.47, 75.10, 48.24,
                    53.24, 66.01, 22.95, 35.16)
        cards = [ScoreCard(t, 13, "macro_f1", v / 100)
                 for t, v in zip(TASK_ORDER, best_row)]
        assert aggregate(cards).overall * 100 == pytest.approx(68.41, abs=0.005)


def test_a9_idempotent_caching(tmp_path):
    with _Budget("A9 collect idempotence: cache absorbs re-runs and resume", None):
        def spec(i):
            return PromptSpec(
                prompt_id=make_prompt_id("knowdist", i=i),
                stage="knowdist",
                messages=[{"role": "user", "content": f"cache probe {i}"}],
                gen_params=GenParams(0.7, 64),
                provenance={"stage": "knowdist", "method": "analyzing",
                            "perspective": "basic", "record_id": f"r{i}",
                            "source": "other"},
            )

        specs = [spec(i) for i in range(30)]
        with MockTeacher(reply="OK") as server:
            client = TeacherClient(server.url, "m", tmp_path / "cache",
                                   sleeper=lambda s: None)
            client.collect(specs, tmp_path / "out.jsonl", tmp_path / "fail.jsonl", 4)
            assert server.requests == 30
            # full re-run into a fresh output: zero network requests
            client.collect(specs, tmp_path / "out2.jsonl", tmp_path / "fail2.jsonl", 4)
            assert server.requests == 30

            # kill-and-resume: partial first run, then the full list
            kill_out = tmp_path / "kill.jsonl"
            client2 = TeacherClient(server.url, "m2", tmp_path / "cache2",
                                    sleeper=lambda s: None)
            client2.collect(specs[:13], kill_out, tmp_path / "kf.jsonl", 4)
            after_partial = server.requests
            client2.collect(specs, kill_out, tmp_path / "kf.jsonl", 4)
            # never more than one network request per prompt across both runs
            assert server.requests - 30 == 30
            assert after_partial - 30 == 13
        lines = kill_out.read_text().strip().splitlines()
        assert [json.loads(x)["prompt_id"] for x in lines] == [s.prompt_id for s in specs]
