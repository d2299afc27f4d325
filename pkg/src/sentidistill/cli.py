"""Command-line interface.

One subcommand per pipeline step: ingest -> dedup -> decontam ->
gen-knowdist / gen-icldist -> collect -> export / validate for corpus
construction, and sample-splits -> eval -> score -> report for benchmarking.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import dedup as dedup_mod
from . import decontam as decontam_mod
from . import export as export_mod
from . import records as records_mod
from . import report as report_mod
from .bench import data as bench_data
from .bench import run as bench_run
from .bench.registry import TASK_ORDER
from .client.api import TeacherClient
from .prompts import default_demo_pool_path, read_prompts, write_prompts
from .prompts.general_tasks import ingest_general_tasks
from .prompts.icldist import build_icl_corpus, load_demo_pool
from .prompts.knowdist import METHODS, PERSPECTIVES, build_knowdist


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Debug logging.")
def main(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--in", "in_paths", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--schema", type=click.Choice(records_mod.SCHEMAS), required=True)
@click.option("--source", type=click.Choice(records_mod.SOURCES), required=True)
@click.option("--min-tokens", default=records_mod.DEFAULT_MIN_TOKENS, show_default=True)
@click.option("--max-tokens", default=records_mod.DEFAULT_MAX_TOKENS, show_default=True)
@click.option("--out", required=True, type=click.Path())
def ingest(in_paths, schema, source, min_tokens, max_tokens, out):
    """Load, normalize, and fingerprint raw texts."""
    recs, stats = records_mod.load_texts(in_paths, schema, source, min_tokens, max_tokens)
    records_mod.write_records(out, recs)
    click.echo(json.dumps({
        "files": stats.files, "lines_read": stats.lines_read, "kept": stats.kept,
        "dropped_short": stats.dropped_short, "dropped_long": stats.dropped_long,
        "dropped_empty": stats.dropped_empty, "replaced_chars": stats.replaced_chars,
    }))


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=3, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--drops", required=True, type=click.Path())
def dedup(in_path, threshold, out, drops):
    """Remove near-duplicates by simhash Hamming distance."""
    recs = records_mod.read_records(in_path)
    kept, dropped = dedup_mod.dedup(recs, threshold)
    records_mod.write_records(out, kept)
    with open(drops, "w", encoding="utf-8") as fh:
        for entry in dropped:
            fh.write(json.dumps(entry.to_json()) + "\n")
    click.echo(json.dumps({"input": len(recs), "kept": len(kept), "dropped": len(dropped)}))


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--bench-dir", required=True, type=click.Path(exists=True))
@click.option("--ngram", default=decontam_mod.DEFAULT_NGRAM_SIZE, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--drops", required=True, type=click.Path())
def decontam(in_path, bench_dir, ngram, out, drops):
    """Drop records overlapping benchmark dev/test n-grams."""
    recs = records_mod.read_records(in_path)
    index = decontam_mod.build_index_from_dir(bench_dir, ngram)
    kept, dropped = decontam_mod.decontaminate(recs, index)
    records_mod.write_records(out, kept)
    with open(drops, "w", encoding="utf-8") as fh:
        for entry in dropped:
            fh.write(json.dumps(entry.to_json()) + "\n")
    click.echo(json.dumps({"input": len(recs), "kept": len(kept), "dropped": len(dropped)}))


@main.command("gen-knowdist")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--methods", default=",".join(METHODS), show_default=True)
@click.option("--perspectives", default="all", show_default=True)
@click.option("--ratio", default=1.0, show_default=True)
@click.option("--seed", default=17, show_default=True)
def gen_knowdist(in_path, out, methods, perspectives, ratio, seed):
    """Render knowledge-stage prompts over ingested records."""
    recs = records_mod.read_records(in_path)
    method_list = METHODS if methods == "all" else tuple(methods.split(","))
    persp_list = PERSPECTIVES if perspectives == "all" else tuple(perspectives.split(","))
    n = write_prompts(out, build_knowdist(recs, method_list, persp_list, ratio, seed))
    click.echo(json.dumps({"records": len(recs), "prompts": n}))


@main.command("gen-icldist")
@click.option("--records", "records_path", required=True, type=click.Path(exists=True))
@click.option("--demos", "demos_path", type=click.Path(exists=True), default=None,
              help="Demo pool JSONL; defaults to the bundled example pool.")
@click.option("--tasks-dir", type=click.Path(exists=True), default=None,
              help="Directory of instruction-task JSON files.")
@click.option("--target", required=True, type=int)
@click.option("--mix", default="0.8,0.2", show_default=True,
              help="sentiment,general fractions.")
@click.option("--seed", default=17, show_default=True)
@click.option("--out", required=True, type=click.Path())
def gen_icldist(records_path, demos_path, tasks_dir, target, mix, seed, out):
    """Build the alignment-stage prompt corpus."""
    recs = records_mod.read_records(records_path)
    pool = load_demo_pool(demos_path or default_demo_pool_path())
    senti_frac, general_frac = (float(x) for x in mix.split(","))
    tasks = []
    if tasks_dir:
        tasks = ingest_general_tasks(sorted(Path(tasks_dir).glob("*.json")), seed=seed)
    n = write_prompts(out, build_icl_corpus(
        recs, pool, tasks, target, (senti_frac, general_frac), seed=seed,
    ))
    click.echo(json.dumps({"records": len(recs), "prompts": n, "general_tasks": len(tasks)}))


@main.command()
@click.option("--prompts", "prompts_path", required=True, type=click.Path(exists=True))
@click.option("--endpoint", required=True)
@click.option("--model", required=True)
@click.option("--max-in-flight", default=16, show_default=True)
@click.option("--cache-dir", default=None, type=click.Path(),
              help="Response cache; defaults to <out>.cache/ next to the output.")
@click.option("--api-key-env", default="TEACHER_API_KEY", show_default=True,
              help="Environment variable holding the bearer token.")
@click.option("--out", required=True, type=click.Path())
@click.option("--failures", required=True, type=click.Path())
def collect(prompts_path, endpoint, model, max_in_flight, cache_dir, api_key_env,
            out, failures):
    """Query the teacher endpoint for every prompt (resumable, cached)."""
    specs = list(read_prompts(prompts_path))
    client = TeacherClient(endpoint, model, cache_dir or f"{out}.cache",
                           api_key_env=api_key_env)
    stats = client.collect(specs, out, failures, max_in_flight)
    click.echo(json.dumps({
        "total": stats.total, "completed": stats.completed, "cached": stats.cached,
        "failed": stats.failed, "skipped_done": stats.skipped_done,
    }))
    if stats.failed:
        sys.exit(1)


@main.command()
@click.option("--stage", type=click.Choice(export_mod.STAGES), required=True)
@click.option("--in", "in_paths", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--profile", type=click.Choice(export_mod.MODEL_PROFILES),
              default="llama-1.2b", show_default=True)
@click.option("--seed", default=17, show_default=True)
@click.option("--ratio", default="4,1", show_default=True,
              help="icldist:general mixing ratio (icldist stage only).")
@click.option("--target", default=None, type=int)
@click.option("--out-dir", required=True, type=click.Path())
def export(stage, in_paths, profile, seed, ratio, target, out_dir):
    """Export a stage corpus (train.jsonl + manifest.json)."""
    r_icl, r_gen = (int(x) for x in ratio.split(","))
    train_path, manifest_path = export_mod.export_stage(
        in_paths, stage, out_dir, profile=profile, shuffle_seed=seed,
        ratio=(r_icl, r_gen), target_count=target,
    )
    click.echo(json.dumps({"train": str(train_path), "manifest": str(manifest_path)}))


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--report", "report_path", default=None, type=click.Path())
def validate(in_path, report_path):
    """Validate an exported corpus file."""
    result = export_mod.validate_corpus(in_path)
    payload = result.to_json()
    if report_path:
        Path(report_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    click.echo(json.dumps({"lines": result.lines, "errors": len(result.errors),
                           "warnings": len(result.warnings)}))
    if result.errors:
        sys.exit(1)


@main.command("sample-splits")
@click.option("--raw-dir", required=True, type=click.Path(exists=True))
@click.option("--seed", default=7, show_default=True)
@click.option("--tasks", default="all", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def sample_splits(raw_dir, seed, tasks, out_dir):
    """Downsample raw task files to the registry split sizes."""
    task_ids = TASK_ORDER if tasks == "all" else tuple(tasks.split(","))
    sizes = bench_data.sample_splits(raw_dir, out_dir, seed, task_ids)
    click.echo(json.dumps(sizes))


@main.command("eval")
@click.option("--endpoint", required=True)
@click.option("--model", required=True)
@click.option("--bench-dir", required=True, type=click.Path(exists=True))
@click.option("--tasks", default="all", show_default=True)
@click.option("--seeds", default="13,17,19", show_default=True)
@click.option("--max-in-flight", default=8, show_default=True)
@click.option("--per-instance-demos", is_flag=True,
              help="Draw fresh demos per query instead of per run.")
@click.option("--api-key-env", default="TEACHER_API_KEY", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def eval_cmd(endpoint, model, bench_dir, tasks, seeds, max_in_flight,
             per_instance_demos, api_key_env, out_dir):
    """Run the benchmark against a chat-completions endpoint."""
    task_ids = TASK_ORDER if tasks == "all" else tuple(tasks.split(","))
    seed_list = tuple(int(s) for s in seeds.split(","))
    results = bench_run.run_eval(
        endpoint, model, bench_dir, out_dir, task_ids, seed_list,
        max_in_flight=max_in_flight, per_instance_demos=per_instance_demos,
        api_key_env=api_key_env,
    )
    click.echo(json.dumps({
        f"{r.task_id}/seed{r.seed}": round(r.card.value, 6) for r in results
    }))


@main.command()
@click.option("--raw", "raw_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def score(raw_dir, out_dir):
    """Re-score persisted raw outputs (no network access)."""
    raw_dir, out_dir = Path(raw_dir), Path(out_dir)
    scored = {}
    for raw_path in sorted(raw_dir.glob("*/seed*/raw.jsonl")):
        task_id = raw_path.parent.parent.name
        seed = int(raw_path.parent.name.removeprefix("seed"))
        card, _preds = bench_run.score_raw_file(raw_path, task_id, seed)
        dest = out_dir / task_id / raw_path.parent.name
        dest.mkdir(parents=True, exist_ok=True)
        (dest / "score.json").write_text(
            json.dumps(card.to_json(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        scored[f"{task_id}/seed{seed}"] = round(card.value, 6)
    if not scored:
        raise click.ClickException(f"no raw.jsonl files found under {raw_dir}")
    click.echo(json.dumps(scored))


@main.command("report")
@click.option("--scores", "scores_dir", required=True, type=click.Path(exists=True))
@click.option("--model", default="model", show_default=True)
@click.option("--formats", default="md,csv,json", show_default=True)
@click.option("--partial", is_flag=True, help="Allow missing tasks.")
@click.option("--out", "out_dir", required=True, type=click.Path())
def report_cmd(scores_dir, model, formats, partial, out_dir):
    """Aggregate scorecards into report tables."""
    cards = report_mod.load_scorecards(scores_dir)
    if not cards:
        raise click.ClickException(f"no scorecards found under {scores_dir}")
    rep = report_mod.aggregate(cards, model=model, partial=partial)
    written = report_mod.emit(rep, formats.split(","), out_dir)
    click.echo(json.dumps({"overall": rep.overall, "files": [str(p) for p in written]}))


if __name__ == "__main__":
    main()
