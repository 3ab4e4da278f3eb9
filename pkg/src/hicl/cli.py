"""Command-line surface for the pipeline: fixture generation, few-shot
sampling, indexer training, database building, retrieval, classification,
evaluation and the annotation service.

Commands that produce artifacts also write `<artifact>.manifest.json`
recording the command, its arguments and sha256 hashes of inputs and outputs,
so identical inputs can be checked to yield identical artifacts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
from pathlib import Path

import click

from . import __version__, prompts
from .corpus import (
    CorpusError,
    Document,
    FewShotConfig,
    SamplingMode,
    load_corpus,
    sample_few_shot,
    sample_imbalanced,
    save_corpus,
    tokenize,
)
from .evaluation import EvaluationError, format_report, micro_macro_f1
from .indexer import (
    IndexerError,
    TrainConfig,
    load_params,
    params_fingerprint,
    save_params,
    train_indexer,
)
from .inference import (
    InferenceConfig,
    InferenceError,
    classify_iterative,
    generate_label_description,
)
from .llm import LLMError, make_client
from .retrieval import (
    RetrievalError,
    build_database,
    load_db,
    save_db,
    search_topk_diverse,
)
from .indexer import encode
from .synthetic import FixtureConfig, make_corpus, make_taxonomy
from .taxonomy import LabelTextMode, TaxonomyError, load_taxonomy


log = logging.getLogger(__name__)

_ERRORS = (
    TaxonomyError,
    CorpusError,
    IndexerError,
    RetrievalError,
    InferenceError,
    EvaluationError,
    LLMError,
    OSError,
    ValueError,
)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(
    artifact: Path, command: str, args: dict, inputs: list[Path]
) -> None:
    manifest = {
        "command": command,
        "args": args,
        "version": __version__,
        "template_version": prompts.TEMPLATE_VERSION,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(artifact): _sha256(artifact)},
    }
    Path(str(artifact) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _fail(command: str, exc: Exception) -> None:
    raise click.ClickException(f"{command}: {exc}")


def _require(path: str, what: str, command: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise click.ClickException(f"{command}: {what} file not found: {path}")
    return p


@click.group()
@click.option("--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool) -> None:
    """Few-shot hierarchical text classification with retrieval-augmented
    in-context learning."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@main.command("make-fixture")
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
@click.option("--depth", default=3, show_default=True)
@click.option("--branching", default=3, show_default=True)
@click.option("--docs-per-leaf", default=8, show_default=True)
@click.option("--seed", default=0, show_default=True)
def make_fixture(out: str, depth: int, branching: int, docs_per_leaf: int, seed: int):
    """Generate a synthetic separable taxonomy and corpus."""
    try:
        cfg = FixtureConfig(
            depth=depth, branching=branching, docs_per_leaf=docs_per_leaf, seed=seed
        )
        taxonomy = make_taxonomy(cfg)
        docs = make_corpus(taxonomy, cfg)
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        tax_path = out_dir / "taxonomy.tsv"
        corpus_path = out_dir / "corpus.jsonl"
        taxonomy.dump(tax_path)
        save_corpus(docs, taxonomy, corpus_path)
    except _ERRORS as exc:
        _fail("make-fixture", exc)
    _write_manifest(
        tax_path,
        "make-fixture",
        {"depth": depth, "branching": branching, "docs_per_leaf": docs_per_leaf, "seed": seed},
        [],
    )
    _write_manifest(corpus_path, "make-fixture", {"seed": seed}, [tax_path])
    click.echo(f"wrote {tax_path} and {corpus_path} ({len(docs)} docs)")


@main.command("sample")
@click.option("--taxonomy", "taxonomy_path", required=True, type=click.Path())
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--q", default=1, show_default=True, help="Shots per label path.")
@click.option("--seed", default=0, show_default=True)
@click.option(
    "--mode",
    type=click.Choice(["balanced", "imbalanced"]),
    default="balanced",
    show_default=True,
)
def sample(taxonomy_path: str, corpus_path: str, out: str, q: int, seed: int, mode: str):
    """Draw a Q-shot training subset from a corpus."""
    tax_p = _require(taxonomy_path, "taxonomy", "sample")
    cor_p = _require(corpus_path, "corpus", "sample")
    try:
        taxonomy = load_taxonomy(tax_p)
        corpus = load_corpus(cor_p, taxonomy)
        cfg = FewShotConfig(q=q, seed=seed, mode=SamplingMode(mode))
        picked = (
            sample_few_shot(corpus, cfg)
            if cfg.mode is SamplingMode.BALANCED
            else sample_imbalanced(corpus, cfg)
        )
        save_corpus(picked, taxonomy, out)
    except _ERRORS as exc:
        _fail("sample", exc)
    _write_manifest(
        Path(out), "sample", {"q": q, "seed": seed, "mode": mode}, [tax_p, cor_p]
    )
    click.echo(f"sampled {len(picked)} docs to {out}")


@main.command("describe-labels")
@click.option("--taxonomy", "taxonomy_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--llm", default="stub:echo", show_default=True)
@click.option("--audit-log", default=None, type=click.Path())
def describe_labels(taxonomy_path: str, out: str, llm: str, audit_log):
    """Generate and store a description for every leaf label."""
    tax_p = _require(taxonomy_path, "taxonomy", "describe-labels")
    try:
        taxonomy = load_taxonomy(tax_p)
        client = make_client(llm, audit_log=audit_log)
        for path in taxonomy.leaf_paths():
            generate_label_description(taxonomy, path, client)
        taxonomy.dump(out)
    except _ERRORS as exc:
        _fail("describe-labels", exc)
    _write_manifest(Path(out), "describe-labels", {"llm": llm}, [tax_p])
    click.echo(f"wrote described taxonomy to {out}")


@main.command("train-indexer")
@click.option("--taxonomy", "taxonomy_path", required=True, type=click.Path())
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--lr", default=5e-5, show_default=True)
@click.option("--epochs", default=20, show_default=True)
@click.option("--alpha", default=1.0, show_default=True)
@click.option("--beta", default=0.01, show_default=True)
@click.option("--tau", default=0.1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--dim", default=64, show_default=True)
@click.option(
    "--label-text",
    type=click.Choice([m.value for m in LabelTextMode]),
    default=LabelTextMode.PATH_TEXT.value,
    show_default=True,
    help="Label text used for hard-negative similarity and description positives.",
)
@click.option(
    "--infonce-denominator",
    is_flag=True,
    help="Include the positive pair in the contrastive denominator.",
)
def train_indexer_cmd(
    taxonomy_path, corpus_path, out, lr, epochs, alpha, beta, tau, seed, dim,
    label_text, infonce_denominator,
):
    """Train the per-level encoder on a Q-shot corpus."""
    tax_p = _require(taxonomy_path, "taxonomy", "train-indexer")
    cor_p = _require(corpus_path, "corpus", "train-indexer")
    try:
        taxonomy = load_taxonomy(tax_p)
        corpus = load_corpus(cor_p, taxonomy)
        cfg = TrainConfig(
            lr=lr,
            epochs=epochs,
            alpha=alpha,
            beta=beta,
            tau=tau,
            seed=seed,
            dim=dim,
            infonce_denominator=infonce_denominator,
            label_text_mode=LabelTextMode(label_text),
        )
        params = train_indexer(corpus, taxonomy, cfg)
        save_params(params, out)
    except _ERRORS as exc:
        _fail("train-indexer", exc)
    _write_manifest(
        Path(out),
        "train-indexer",
        {
            "lr": lr, "epochs": epochs, "alpha": alpha, "beta": beta, "tau": tau,
            "seed": seed, "dim": dim, "label_text": label_text,
            "infonce_denominator": infonce_denominator,
        },
        [tax_p, cor_p],
    )
    click.echo(f"wrote params to {out} (fingerprint {params_fingerprint(params)})")


@main.command("build-db")
@click.option("--taxonomy", "taxonomy_path", required=True, type=click.Path())
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--params", "params_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
def build_db(taxonomy_path, corpus_path, params_path, out):
    """Encode a labeled corpus into a retrieval database."""
    tax_p = _require(taxonomy_path, "taxonomy", "build-db")
    cor_p = _require(corpus_path, "corpus", "build-db")
    par_p = _require(params_path, "params", "build-db")
    try:
        taxonomy = load_taxonomy(tax_p)
        corpus = load_corpus(cor_p, taxonomy)
        params = load_params(par_p)
        db = build_database(corpus, params, taxonomy)
        save_db(db, out)
    except _ERRORS as exc:
        _fail("build-db", exc)
    _write_manifest(Path(out), "build-db", {}, [tax_p, cor_p, par_p])
    click.echo(f"indexed {len(db)} instances to {out}")


@main.command("search")
@click.option("--taxonomy", "taxonomy_path", required=True, type=click.Path())
@click.option("--params", "params_path", required=True, type=click.Path())
@click.option("--db", "db_path", required=True, type=click.Path())
@click.option("--text", required=True)
@click.option("--k", default=3, show_default=True)
def search(taxonomy_path, params_path, db_path, text, k):
    """Retrieve the Top-K label-diverse instances for a text."""
    tax_p = _require(taxonomy_path, "taxonomy", "search")
    par_p = _require(params_path, "params", "search")
    db_p = _require(db_path, "db", "search")
    try:
        taxonomy = load_taxonomy(tax_p)
        params = load_params(par_p)
        db = load_db(db_p, taxonomy)
        vectors = encode(tokenize(text), params).m
        ranked = search_topk_diverse(db, vectors, k)
    except _ERRORS as exc:
        _fail("search", exc)
    for inst, score in ranked:
        labels = " / ".join(taxonomy.path_names(inst.path))
        click.echo(f"{score:.6f}\t{inst.doc_id}\t{labels}")


@main.command("classify")
@click.option("--taxonomy", "taxonomy_path", required=True, type=click.Path())
@click.option("--params", "params_path", required=True, type=click.Path())
@click.option("--db", "db_path", required=True, type=click.Path())
@click.option(
    "--train-corpus", "train_corpus_path", required=True, type=click.Path(),
    help="Corpus providing the texts of indexed documents (demonstrations).",
)
@click.option("--text", default=None, help="Classify a single text.")
@click.option("--input", "input_path", default=None, type=click.Path(),
              help="Classify every document in a corpus file.")
@click.option("--out", default=None, type=click.Path(),
              help="Write predictions as JSONL (defaults to stdout).")
@click.option("--k", default=3, show_default=True)
@click.option("--llm", default="stub:oracle-demo", show_default=True)
@click.option("--temperature", default=0.2, show_default=True)
@click.option("--no-iterative", is_flag=True, help="Single full-path call.")
@click.option("--no-demos", is_flag=True, help="Drop retrieved demonstrations.")
@click.option("--no-pruning", is_flag=True, help="Candidates are all children.")
@click.option("--no-candidate-set", is_flag=True,
              help="LLM picks the most similar demo text instead.")
@click.option("--fallback-policy", type=click.Choice(["paper", "consistent"]),
              default="paper", show_default=True)
@click.option("--audit-log", default=None, type=click.Path())
def classify(
    taxonomy_path, params_path, db_path, train_corpus_path, text, input_path, out,
    k, llm, temperature, no_iterative, no_demos, no_pruning, no_candidate_set,
    fallback_policy, audit_log,
):
    """Classify texts with the iterative in-context-learning policy."""
    if (text is None) == (input_path is None):
        raise click.ClickException("classify: provide exactly one of --text / --input")
    tax_p = _require(taxonomy_path, "taxonomy", "classify")
    par_p = _require(params_path, "params", "classify")
    db_p = _require(db_path, "db", "classify")
    train_p = _require(train_corpus_path, "train corpus", "classify")
    try:
        taxonomy = load_taxonomy(tax_p)
        params = load_params(par_p)
        db = load_db(db_p, taxonomy)
        train_docs = load_corpus(train_p, taxonomy)
        doc_texts = {d.id: d.text for d in train_docs}
        cfg = InferenceConfig(
            k=k,
            temperature=temperature,
            iterative=not no_iterative,
            demos=not no_demos,
            pruning=not no_pruning,
            candidate_set=not no_candidate_set,
            fallback_policy=fallback_policy,
        )
        client = make_client(llm, temperature=temperature, audit_log=audit_log)
        if text is not None:
            queries = [("query", text)]
        else:
            in_p = _require(input_path, "input corpus", "classify")
            queries = [(d.id, d.text) for d in load_corpus(in_p, taxonomy)]
        lines = []
        for qid, qtext in queries:
            trace = classify_iterative(
                qtext, db, params, taxonomy, cfg, client, doc_texts
            )
            lines.append(
                json.dumps(
                    {
                        "id": qid,
                        "labels": list(trace.final_names),
                        "llm_calls": trace.llm_calls,
                        "fallback_used": any(lv.fallback_used for lv in trace.levels),
                        "template_version": trace.template_version,
                        "db_fingerprint": trace.db_fingerprint,
                    },
                    ensure_ascii=False,
                )
            )
        payload = "\n".join(lines) + "\n"
        if out is None:
            click.echo(payload, nl=False)
        else:
            Path(out).write_text(payload, encoding="utf-8")
    except _ERRORS as exc:
        _fail("classify", exc)
    if out is not None:
        _write_manifest(
            Path(out),
            "classify",
            {"k": k, "llm": llm, "fallback_policy": fallback_policy},
            [tax_p, par_p, db_p, train_p],
        )
        click.echo(f"wrote {len(lines)} predictions to {out}")


@main.command("evaluate")
@click.option("--taxonomy", "taxonomy_path", required=True, type=click.Path())
@click.option("--gold", "gold_path", required=True, type=click.Path(),
              help="Corpus file with gold label paths.")
@click.option("--pred", "pred_path", required=True, type=click.Path(),
              help="Predictions JSONL from `classify`.")
@click.option("--out", default=None, type=click.Path(), help="Write report JSON.")
def evaluate(taxonomy_path, gold_path, pred_path, out):
    """Score predictions against gold paths with micro/macro F1."""
    tax_p = _require(taxonomy_path, "taxonomy", "evaluate")
    gold_p = _require(gold_path, "gold", "evaluate")
    pred_p = _require(pred_path, "predictions", "evaluate")
    try:
        taxonomy = load_taxonomy(tax_p)
        golds = {d.id: d.gold for d in load_corpus(gold_p, taxonomy)}
        pairs = []
        with open(pred_p, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    doc_id = rec["id"]
                    pred = taxonomy.resolve_path(rec["labels"])
                except (json.JSONDecodeError, KeyError, TypeError, TaxonomyError) as exc:
                    raise EvaluationError(f"{pred_p} line {line_no}: {exc}")
                if doc_id not in golds:
                    raise EvaluationError(
                        f"{pred_p} line {line_no}: no gold labels for id {doc_id!r}"
                    )
                pairs.append((golds[doc_id], pred))
        report = micro_macro_f1(pairs, taxonomy)
    except _ERRORS as exc:
        _fail("evaluate", exc)
    click.echo(format_report(report))
    if out is not None:
        Path(out).write_text(
            json.dumps(
                {
                    "micro_f1": report.micro_f1,
                    "macro_f1": report.macro_f1,
                    "per_level": [
                        {"level": lv, "micro_f1": mi, "macro_f1": ma}
                        for lv, mi, ma in report.per_level
                    ],
                    "n_docs": report.n_docs,
                },
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )
        _write_manifest(Path(out), "evaluate", {}, [tax_p, gold_p, pred_p])


@main.command("serve")
@click.option("--taxonomy", "taxonomy_path", required=True, type=click.Path())
@click.option("--params", "params_path", required=True, type=click.Path())
@click.option("--db", "db_path", required=True, type=click.Path())
@click.option("--train-corpus", "train_corpus_path", required=True, type=click.Path())
@click.option("--tasks", "tasks_path", required=True, type=click.Path(),
              help="Corpus file of documents to annotate.")
@click.option("--annotations", "annotations_path", required=True, type=click.Path(),
              help="Append-only annotation log (created if missing).")
@click.option("--llm", default="stub:oracle-demo", show_default=True)
@click.option("--append-on-annotate", is_flag=True,
              help="Feed each confirmed annotation back into the database.")
@click.option("--ui-dir", default=None, type=click.Path(),
              help="Directory with the built annotation UI (index.html, app.js).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(
    taxonomy_path, params_path, db_path, train_corpus_path, tasks_path,
    annotations_path, llm, append_on_annotate, ui_dir, host, port,
):
    """Run the annotation and classification HTTP service."""
    import uvicorn

    from .service import ServiceState, create_app

    tax_p = _require(taxonomy_path, "taxonomy", "serve")
    par_p = _require(params_path, "params", "serve")
    db_p = _require(db_path, "db", "serve")
    train_p = _require(train_corpus_path, "train corpus", "serve")
    tasks_p = _require(tasks_path, "tasks", "serve")
    try:
        taxonomy = load_taxonomy(tax_p)
        params = load_params(par_p)
        db = load_db(db_p, taxonomy)
        train_docs = load_corpus(train_p, taxonomy)
        tasks = load_corpus(tasks_p, taxonomy)
        state = ServiceState(
            taxonomy=taxonomy,
            params=params,
            db=db,
            tasks=tasks,
            doc_texts={d.id: d.text for d in train_docs},
            annotations_path=Path(annotations_path),
            llm=make_client(llm),
            append_on_annotate=append_on_annotate,
        )
        app = create_app(state, ui_dir=Path(ui_dir) if ui_dir else None)
    except _ERRORS as exc:
        _fail("serve", exc)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
