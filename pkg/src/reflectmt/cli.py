"""Command-line entry point.

Subcommands: build-data, translate, ape, evaluate. Option precedence is
flags > environment > config file; every run writes a manifest with the
fully resolved configuration and input digests next to its main output.

Environment variables: REFLECTMT_API_KEY (bearer token for the generation
endpoint), REFLECTMT_ENDPOINT, REFLECTMT_MODEL, REFLECTMT_SCORER_ENDPOINT.
"""

from __future__ import annotations

import os
import sys
from dataclasses import replace
from pathlib import Path

import click
import yaml

from . import corpus, dataset, languages, metrics, pipeline
from .backend import BackendConfig, HttpBackend, mock_from_script
from .corpus import QualityTier, tier_counts
from .errors import ReflectMtError
from .manifest import file_digest, write_manifest
from .prompts import AssessmentKind, LanguagePair
from .scorer import ScoreRequestItem, make_scorer

ENV_ENDPOINT = "REFLECTMT_ENDPOINT"
ENV_MODEL = "REFLECTMT_MODEL"
ENV_SCORER_ENDPOINT = "REFLECTMT_SCORER_ENDPOINT"


def _fail(message: str, code: int = 2):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    if not Path(path).exists():
        _fail(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        _fail(f"config file must be a mapping: {path}")
    extra_langs = data.get("languages") or {}
    languages.LANGUAGE_NAMES.update(
        {str(k).lower(): str(v) for k, v in extra_langs.items()}
    )
    return data


def _resolve(flag, env_var: str | None, file_value, default=None):
    """flags > env > file > default."""
    if flag is not None:
        return flag
    if env_var:
        env = os.environ.get(env_var)
        if env:
            return env
    if file_value is not None:
        return file_value
    return default


def _parse_quota(text: str, flag: str) -> dict[QualityTier, int]:
    parts = [p.strip() for p in text.split(",")]
    try:
        numbers = [int(p) for p in parts]
    except ValueError:
        _fail(f"{flag} expects an integer or three comma-separated integers, got {text!r}")
    if len(numbers) == 1:
        numbers = numbers * 3
    if len(numbers) != 3:
        _fail(f"{flag} expects one or three values, got {len(numbers)}")
    return dict(zip((QualityTier.GOOD, QualityTier.MEDIUM, QualityTier.BAD), numbers))


def _require_file(path: str | None, what: str) -> Path:
    if not path:
        _fail(f"missing required input: {what}")
    p = Path(path)
    if not p.exists():
        _fail(f"{what} not found: {path}")
    return p


def _read_lines(path: Path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _mode_from_flags(tc: bool, qe: bool) -> AssessmentKind:
    if tc and qe:
        _fail("--tc and --qe are mutually exclusive")
    return AssessmentKind.QE if qe else AssessmentKind.TC


def _build_backend(cfg_file: dict, endpoint, model, mock_script, temperature, top_p,
                   max_tokens, timeout, retries, concurrency):
    section = cfg_file.get("backend") or {}
    bc = BackendConfig(
        endpoint=_resolve(endpoint, ENV_ENDPOINT, section.get("endpoint"), "") or "",
        model=_resolve(model, ENV_MODEL, section.get("model"), "") or "",
        temperature=_resolve(temperature, None, section.get("temperature"), 0.0),
        top_p=_resolve(top_p, None, section.get("top_p"), 1.0),
        max_new_tokens=_resolve(max_tokens, None, section.get("max_tokens"), 512),
        timeout_s=_resolve(timeout, None, section.get("timeout"), 60.0),
        max_retries=_resolve(retries, None, section.get("retries"), 3),
        max_in_flight=_resolve(concurrency, None, section.get("concurrency"), 4),
    )
    script = _resolve(mock_script, None, section.get("mock_script"))
    if script:
        script_path = _require_file(script, "mock script")
        bc = replace(bc, endpoint=bc.endpoint or f"mock://{script_path}",
                     model=bc.model or "mock")
        return mock_from_script(script_path, cfg=bc)
    if not bc.endpoint:
        _fail("no backend: pass --endpoint/--model or --mock-script (or set them in config)")
    return HttpBackend(bc)


def _build_scorer(cfg_file: dict, kind, endpoint):
    section = cfg_file.get("scorer") or {}
    resolved_kind = _resolve(kind, None, section.get("kind"), "lexical")
    resolved_endpoint = _resolve(endpoint, ENV_SCORER_ENDPOINT, section.get("endpoint"))
    if resolved_kind == "remote" and not resolved_endpoint:
        _fail("remote scorer selected but no endpoint given "
              f"(--scorer-endpoint, ${ENV_SCORER_ENDPOINT}, or config scorer.endpoint)")
    return make_scorer(resolved_kind, resolved_endpoint)


def _backend_flags(fn):
    fn = click.option("--endpoint", default=None, help="Generation endpoint URL.")(fn)
    fn = click.option("--model", default=None, help="Model name sent on the wire.")(fn)
    fn = click.option("--mock-script", default=None, help="JSONL of scripted mock replies (offline runs).")(fn)
    fn = click.option("--temperature", type=float, default=None)(fn)
    fn = click.option("--top-p", type=float, default=None)(fn)
    fn = click.option("--max-tokens", type=int, default=None)(fn)
    fn = click.option("--timeout", type=float, default=None, help="Request timeout, seconds.")(fn)
    fn = click.option("--retries", type=int, default=None)(fn)
    fn = click.option("--concurrency", type=int, default=None, help="Max in-flight requests.")(fn)
    return fn


def _mode_flags(fn):
    fn = click.option("--tc", is_flag=True, help="Label-mode quality prediction (default).")(fn)
    fn = click.option("--qe", is_flag=True, help="Score-mode quality prediction.")(fn)
    return fn


@click.group()
def main():
    """Self-reflective translation toolkit: data building, two-stage
    inference, post-editing, and evaluation.

    Option precedence: command-line flags > environment variables
    (REFLECTMT_ENDPOINT, REFLECTMT_MODEL, REFLECTMT_SCORER_ENDPOINT,
    REFLECTMT_API_KEY) > --config file. Every command writes a manifest
    with the fully resolved configuration next to its output.
    """


@main.command("build-data")
@click.option("--task", type=click.Choice(["basic", "qp", "dr", "all"]), default="all")
@_mode_flags
@click.option("--merged", is_flag=True, help="Build both TC and QE variants and concatenate.")
@click.option("--parallel", "parallel_path", default=None, help="Parallel JSONL for basic translation.")
@click.option("--candidates", "candidates_path", default=None, help="Multi-candidate JSONL for qp/dr.")
@click.option("--quota-qp", default="0", help="Per-tier quality-prediction quota (N or G,M,B).")
@click.option("--quota-dr", default="0", help="Per-tier draft-refinement quota (N or G,M,B).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--allow-undersample", is_flag=True, help="Take what is available instead of failing.")
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--config", "config_path", default=None)
def cmd_build_data(task, tc, qe, merged, parallel_path, candidates_path, quota_qp,
                   quota_dr, seed, allow_undersample, out_dir, config_path):
    """Build the SFT datasets and emit training JSONL plus a manifest."""
    cfg_file = _load_config(config_path)
    kind = _mode_from_flags(tc, qe)
    quota = dataset.QuotaConfig(
        qp_per_tier=_parse_quota(quota_qp, "--quota-qp"),
        dr_per_tier=_parse_quota(quota_dr, "--quota-dr"),
        seed=seed,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    inputs: dict[str, str] = {}
    outputs: dict[str, int] = {}
    counters: dict[str, dict] = {}
    try:
        if task in ("basic", "all"):
            p = _require_file(parallel_path, "--parallel file")
            inputs[str(p)] = file_digest(p)
            segments = corpus.ingest_parallel(p)
            instances = dataset.build_basic_translation(segments)
            path = out / "basic_translation.jsonl"
            outputs[str(path)] = dataset.emit_jsonl(instances, path)

        if task in ("qp", "dr", "all"):
            c = _require_file(candidates_path, "--candidates file")
            inputs[str(c)] = file_digest(c)
            pools = corpus.ingest_candidates(c)
            tiers = corpus.assign_tiers(pools)
            kinds = (
                [AssessmentKind.TC, AssessmentKind.QE] if merged else [kind]
            )
            suffix = "merged" if merged else kind.value
            if task in ("qp", "all"):
                instances = []
                shortfalls = {}
                for k in kinds:
                    build = dataset.build_quality_prediction(
                        pools, tiers, k, quota, allow_undersample=allow_undersample
                    )
                    instances.extend(build.instances)
                    shortfalls.update({f"{k.value}/{t.value}": n for t, n in build.shortfalls.items()})
                path = out / f"quality_prediction_{suffix}.jsonl"
                outputs[str(path)] = dataset.emit_jsonl(instances, path)
                counters["quality_prediction_shortfalls"] = shortfalls
            if task in ("dr", "all"):
                instances = []
                shortfalls = {}
                skipped = 0
                for k in kinds:
                    build = dataset.build_draft_refinement(
                        pools, tiers, k, quota, allow_undersample=allow_undersample
                    )
                    instances.extend(build.instances)
                    skipped = build.skipped_pools
                    shortfalls.update({f"{k.value}/{t.value}": n for t, n in build.shortfalls.items()})
                path = out / f"draft_refinement_{suffix}.jsonl"
                outputs[str(path)] = dataset.emit_jsonl(instances, path)
                counters["draft_refinement_shortfalls"] = shortfalls
                counters["skipped_pools"] = skipped
    except FileNotFoundError as exc:
        _fail(str(exc))
    except ReflectMtError as exc:
        _fail(f"{type(exc).__name__}: {exc}", code=1)

    write_manifest(
        out / "manifest.json",
        command="build-data",
        config={
            "task": task,
            "mode": "merged" if merged else kind.value,
            "seed": seed,
            "rng": dataset.RNG_ALGORITHM,
            "quota_qp": {t.value: n for t, n in quota.qp_per_tier.items()},
            "quota_dr": {t.value: n for t, n in quota.dr_per_tier.items()},
            "allow_undersample": allow_undersample,
        },
        inputs=inputs,
        outputs=outputs,
        counters=counters,
    )
    for path, count in outputs.items():
        click.echo(f"wrote {count} instances to {path}")


def _report_warnings(records) -> int:
    failures = sum(1 for r in records if r.error is not None)
    if failures:
        click.echo(f"warning: {failures} of {len(records)} records failed", err=True)
    return failures


@main.command("translate")
@click.option("--mode", type=click.Choice(["reflect", "baseline"]), default="reflect", show_default=True,
              help="reflect = two-stage draft/assess/refine; baseline = single-stage translation.")
@_mode_flags
@click.option("--override", "override_name",
              type=click.Choice(["none", "good", "bad", "random", "blank"]), default="none",
              show_default=True, help="Stage-2 hint manipulation (label-role ablations).")
@click.option("--override-seed", type=int, default=None)
@click.option("--sources", "sources_path", required=True, help="UTF-8 text, one segment per line.")
@click.option("--src-lang", required=True, help="ISO code, e.g. zh.")
@click.option("--tgt-lang", required=True, help="ISO code, e.g. en.")
@_backend_flags
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--config", "config_path", default=None)
def cmd_translate(mode, tc, qe, override_name, override_seed, sources_path, src_lang,
                  tgt_lang, endpoint, model, mock_script, temperature, top_p, max_tokens,
                  timeout, retries, concurrency, out_path, config_path):
    """Run two-stage reflective translation (or the single-stage baseline)."""
    cfg_file = _load_config(config_path)
    kind = _mode_from_flags(tc, qe)
    src_file = _require_file(sources_path, "--sources file")
    sources = _read_lines(src_file)
    backend = _build_backend(cfg_file, endpoint, model, mock_script, temperature,
                             top_p, max_tokens, timeout, retries, concurrency)
    try:
        pair = LanguagePair(
            src=languages.name_for_code(src_lang), tgt=languages.name_for_code(tgt_lang)
        )
        if mode == "baseline":
            records = pipeline.baseline_translate(sources, pair, backend)
            override = pipeline.LabelOverride.none()
        else:
            override = pipeline.LabelOverride(
                mode=pipeline.OverrideMode(override_name), seed=override_seed
            )
            records = pipeline.reflect(sources, pair, kind, override, backend)
    except (ReflectMtError, ValueError) as exc:
        _fail(f"{type(exc).__name__}: {exc}", code=1)

    pipeline.write_records(records, out_path)
    failures = _report_warnings(records)
    write_manifest(
        Path(out_path).with_suffix(Path(out_path).suffix + ".manifest.json"),
        command="translate",
        config={
            "mode": mode,
            "task_kind": kind.value,
            "override": {"mode": override.mode.value, "seed": override.seed},
            "pair": {"src": src_lang, "tgt": tgt_lang},
            "backend": backend.cfg.identity(),
        },
        inputs={str(src_file): file_digest(src_file)},
        outputs={str(out_path): len(records)},
        counters={"failed_records": failures},
    )
    click.echo(f"wrote {len(records)} records to {out_path}")


@main.command("ape")
@_mode_flags
@click.option("--sources", "sources_path", required=True)
@click.option("--bases", "bases_path", required=True,
              help="Base translations to post-edit, aligned line-by-line with --sources.")
@click.option("--src-lang", required=True)
@click.option("--tgt-lang", required=True)
@_backend_flags
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--config", "config_path", default=None)
def cmd_ape(tc, qe, sources_path, bases_path, src_lang, tgt_lang, endpoint, model,
            mock_script, temperature, top_p, max_tokens, timeout, retries, concurrency,
            out_path, config_path):
    """Post-edit externally produced translations."""
    cfg_file = _load_config(config_path)
    kind = _mode_from_flags(tc, qe)
    src_file = _require_file(sources_path, "--sources file")
    base_file = _require_file(bases_path, "--bases file")
    sources = _read_lines(src_file)
    bases = _read_lines(base_file)
    if len(sources) != len(bases):
        _fail(f"--sources has {len(sources)} lines but --bases has {len(bases)}")
    backend = _build_backend(cfg_file, endpoint, model, mock_script, temperature,
                             top_p, max_tokens, timeout, retries, concurrency)
    try:
        pair = LanguagePair(
            src=languages.name_for_code(src_lang), tgt=languages.name_for_code(tgt_lang)
        )
        records = pipeline.ape(sources, bases, pair, kind, backend)
    except ReflectMtError as exc:
        _fail(f"{type(exc).__name__}: {exc}", code=1)

    pipeline.write_records(records, out_path)
    failures = _report_warnings(records)
    write_manifest(
        Path(out_path).with_suffix(Path(out_path).suffix + ".manifest.json"),
        command="ape",
        config={
            "task_kind": kind.value,
            "pair": {"src": src_lang, "tgt": tgt_lang},
            "backend": backend.cfg.identity(),
        },
        inputs={
            str(src_file): file_digest(src_file),
            str(base_file): file_digest(base_file),
        },
        outputs={str(out_path): len(records)},
        counters={"failed_records": failures},
    )
    click.echo(f"wrote {len(records)} records to {out_path}")


def _final_output(record: dict) -> str | None:
    return record.get("refined") or record.get("draft")


@main.command("evaluate")
@click.option("--records", "records_path", required=True, help="Run output JSONL.")
@click.option("--references", "references_path", default=None, help="UTF-8 text, one per line.")
@click.option("--alignments", "alignments_path", default=None, help="Pharaoh i-j file for --utw.")
@click.option("--bleu", is_flag=True)
@click.option("--edit-dist", is_flag=True)
@click.option("--labels", is_flag=True, help="Weighted P/R/F1 of predicted labels (TC runs).")
@click.option("--pearson", is_flag=True, help="Correlation of predicted scores (QE runs).")
@click.option("--utw", is_flag=True)
@click.option("--delta", is_flag=True, help="Mean score change from draft to refinement, per label.")
@click.option("--scorer", "scorer_kind", type=click.Choice(["lexical", "remote"]), default=None)
@click.option("--scorer-endpoint", default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--config", "config_path", default=None)
def cmd_evaluate(records_path, references_path, alignments_path, bleu, edit_dist, labels,
                 pearson, utw, delta, scorer_kind, scorer_endpoint, out_path, config_path):
    """Evaluate a run: emits a report as JSON and a plain-text table."""
    cfg_file = _load_config(config_path)
    rec_file = _require_file(records_path, "--records file")
    raw_records = pipeline.read_records(rec_file)
    report = metrics.EvalReport()
    inputs = {str(rec_file): file_digest(rec_file)}

    needs_refs = bleu or labels or pearson or delta
    references = None
    if needs_refs:
        ref_file = _require_file(references_path, "--references file (required by the enabled sections)")
        references = _read_lines(ref_file)
        if len(references) != len(raw_records):
            _fail(f"{len(raw_records)} records but {len(references)} references")
        inputs[str(ref_file)] = file_digest(ref_file)

    scorer = None
    if labels or pearson or delta:
        scorer = _build_scorer(cfg_file, scorer_kind, scorer_endpoint)
        report.add_section("scorer", {"kind": scorer.kind})

    try:
        if bleu:
            pairs = [
                (_final_output(r), ref)
                for r, ref in zip(raw_records, references)
                if r.get("error") is None and _final_output(r)
            ]
            score = metrics.corpus_bleu([h for h, _ in pairs], [ref for _, ref in pairs])
            report.add_section("bleu", {"score": score, "segments": len(pairs)}, inputs)

        if edit_dist:
            pairs = [
                (r["draft"], r["refined"])
                for r in raw_records
                if r.get("error") is None and r.get("draft") and r.get("refined")
            ]
            stats = metrics.avg_edit_distance(pairs)
            report.add_section(
                "edit_distance", {"mean": stats.mean, "segments": len(pairs)}, inputs
            )

        if labels or pearson or delta:
            usable = [
                (i, r) for i, r in enumerate(raw_records)
                if r.get("error") is None and r.get("draft") and r.get("quality")
            ]
            items = [
                ScoreRequestItem(source=r["source"], hypothesis=r["draft"], reference=references[i])
                for i, r in usable
            ]
            gold_scores = scorer.score_batch(items) if items else []

        if labels:
            tc = [(r, s) for (_, r), s in zip(usable, gold_scores) if r["quality"]["kind"] == "tc"]
            if not tc:
                _fail("--labels needs label-mode records", code=1)
            order = sorted(range(len(tc)), key=lambda k: (-tc[k][1], k))
            good, medium, _ = tier_counts(len(tc))
            gold = [""] * len(tc)
            for rank, k in enumerate(order):
                gold[k] = ("Good" if rank < good else "Medium" if rank < good + medium else "Bad")
            predicted = [r["quality"]["value"] for r, _ in tc]
            matrix = metrics.ConfusionMatrix3.from_pairs(gold, predicted)
            prf = metrics.classification_metrics(matrix)
            report.add_section(
                "quality_labels",
                {"precision": prf.precision, "recall": prf.recall, "f1": prf.f1,
                 "segments": len(tc)},
                inputs,
            )

        if pearson:
            qe = [(r, s) for (_, r), s in zip(usable, gold_scores) if r["quality"]["kind"] == "qe"]
            if not qe:
                _fail("--pearson needs score-mode records", code=1)
            predicted = [float(r["quality"]["value"]) for r, _ in qe]
            gold_vec = [s for _, s in qe]
            r_value = metrics.pearson_r(predicted, gold_vec)
            report.add_section("pearson", {"r": r_value, "segments": len(qe)}, inputs)

        if utw:
            align_file = _require_file(alignments_path, "--alignments file (required by --utw)")
            inputs[str(align_file)] = file_digest(align_file)
            alignments = metrics.read_pharaoh(align_file)
            tokens = [(_final_output(r) or "").split() for r in raw_records]
            rate = metrics.utw_rate(tokens, alignments)
            report.add_section("utw", {"unaligned_pct": rate, "segments": len(tokens)}, inputs)

        if delta:
            records = _reconstruct_records(raw_records)
            ok = [(r, ref) for r, ref in zip(records, references) if r.ok and r.draft and r.refined]
            table = metrics.delta_by_label([r for r, _ in ok], [ref for _, ref in ok], scorer)
            report.add_section(
                "delta_by_label",
                {label: {"count": d.count, "proportion_pct": d.proportion_pct,
                         "mean_delta": d.mean_delta} for label, d in table.items()},
                inputs,
            )
    except ReflectMtError as exc:
        _fail(f"{type(exc).__name__}: {exc}", code=1)

    Path(out_path).write_text(report.to_json() + "\n", encoding="utf-8")
    write_manifest(
        Path(out_path).with_suffix(Path(out_path).suffix + ".manifest.json"),
        command="evaluate",
        config={"sections": [s for s, on in [("bleu", bleu), ("edit_dist", edit_dist),
                                             ("labels", labels), ("pearson", pearson),
                                             ("utw", utw), ("delta", delta)] if on]},
        inputs=inputs,
        outputs={str(out_path): len(report.sections)},
    )
    click.echo(report.to_text())


def _reconstruct_records(raw_records: list[dict]) -> list[pipeline.ReflectionRecord]:
    from .prompts import QualityAssessment

    records = []
    for raw in raw_records:
        assessment = None
        quality = raw.get("quality")
        if quality:
            if quality["kind"] == "tc":
                assessment = QualityAssessment.tc(quality["value"])
            else:
                assessment = QualityAssessment.qe(int(quality["value"]))
        records.append(
            pipeline.ReflectionRecord(
                id=raw["id"],
                source=raw["source"],
                draft=raw.get("draft"),
                assessment=assessment,
                refined=raw.get("refined"),
                error=raw.get("error"),
            )
        )
    return records


if __name__ == "__main__":
    main()
