"""Command line interface driving the construction pipeline and the server."""

from __future__ import annotations

import contextlib
import os
import sys

import click

from . import distant, embed, fusion, pipeline, relclf, tagger
from .corpus import ingest_corpus
from .graphstore import KnowledgeGraph


def data_dir_option(f):
    return click.option(
        "--data-dir",
        envvar="MATHKG_DATA_DIR",
        default="data",
        show_default=True,
        help="working directory for pipeline artifacts (env: MATHKG_DATA_DIR)",
    )(f)


@contextlib.contextmanager
def cleanup_on_failure(*paths):
    """Remove partial outputs when the wrapped step fails."""
    try:
        yield
    except Exception:
        for p in paths:
            if os.path.exists(p):
                os.remove(p)
        raise


def _require(path: str, hint: str) -> str:
    if not os.path.exists(path):
        raise click.ClickException(f"missing {path} (run `mathkg {hint}` first)")
    return path


@click.group()
def main():
    """Math knowledge graph pipeline."""


@main.command()
@click.argument("source", type=click.Path(exists=True))
@data_dir_option
@click.option("--seed", default=0, show_default=True)
def ingest(source, data_dir, seed):
    """Validate a documents.jsonl dump and stage it into the data directory."""
    os.makedirs(data_dir, exist_ok=True)
    try:
        docs = ingest_corpus(source)
    except ValueError as e:
        raise click.ClickException(str(e))
    out = os.path.join(data_dir, "corpus.jsonl")
    with cleanup_on_failure(out):
        import json

        with open(out, "w", encoding="utf-8") as f:
            for d in docs:
                f.write(
                    json.dumps(
                        {
                            "id": d.id, "title": d.title, "categories": d.categories,
                            "abstract": d.abstract, "body": d.body, "infobox": d.infobox,
                            "links": d.links, "formulas": d.formulas,
                        },
                        ensure_ascii=False, separators=(",", ":"),
                    )
                    + "\n"
                )
    click.echo(f"ingested {len(docs)} documents -> {out}")


@main.command("build-datasets")
@data_dir_option
@click.option("--seed", default=0, show_default=True)
@click.option("--min-tfidf", default=8.0, show_default=True)
@click.option("--na-ratio", default=1.0, show_default=True)
def build_datasets(data_dir, seed, min_tfidf, na_ratio):
    """Recall seed entities and build the KER/ERC datasets by distant supervision."""
    corpus_path = _require(os.path.join(data_dir, "corpus.jsonl"), "ingest")
    docs = ingest_corpus(corpus_path)
    gaz = distant.recall_seed_entities(docs, min_tfidf)
    seeds = pipeline.extract_seed_triples(docs)

    ker = distant.build_ker_dataset(docs, gaz)
    positives = distant.build_erc_dataset(docs, gaz, seeds, (), na_ratio=0.0, seed=seed)
    rules = relclf.discover_patterns(positives)
    erc = distant.build_erc_dataset(docs, gaz, seeds, rules, na_ratio=na_ratio, seed=seed)

    outputs = [
        os.path.join(data_dir, name)
        for name in (
            "gazetteer.json", "rules.json", "ker.conll", "erc.tsv",
            "ker.train.conll", "ker.dev.conll", "ker.test.conll",
            "erc.train.tsv", "erc.dev.tsv", "erc.test.tsv", "seed_triples.tsv",
        )
    ]
    with cleanup_on_failure(*outputs):
        distant.save_gazetteer(gaz, outputs[0])
        relclf.save_rules(rules, outputs[1])
        distant.write_conll(ker, outputs[2])
        distant.write_erc_tsv(erc, outputs[3])
        for split, path in zip(distant.split_dataset(ker, seed), outputs[4:7]):
            distant.write_conll(split, path)
        for split, path in zip(distant.split_dataset(erc, seed), outputs[7:10]):
            distant.write_erc_tsv(split, path)
        fusion.write_raw_triples(seeds, outputs[10])
    click.echo(
        f"gazetteer={len(gaz.entries)} ker={len(ker)} erc={len(erc)} "
        f"rules={len(rules)} seeds={len(seeds)}"
    )


@main.command("train-tagger")
@data_dir_option
@click.option("--seed", default=0, show_default=True)
@click.option("--epochs", default=10, show_default=True)
def train_tagger(data_dir, seed, epochs):
    """Train the CRF tagger on the KER train split."""
    train_path = _require(os.path.join(data_dir, "ker.train.conll"), "build-datasets")
    gaz = distant.load_gazetteer(_require(os.path.join(data_dir, "gazetteer.json"), "build-datasets"))
    dataset = distant.read_conll(train_path)
    model = tagger.train(dataset, epochs=epochs, seed=seed, gazetteer=gaz)
    out = os.path.join(data_dir, "tagger.json")
    with cleanup_on_failure(out):
        tagger.save_model(model, out)
    dev = distant.read_conll(os.path.join(data_dir, "ker.dev.conll"))
    if dev:
        preds = [tagger.decode(model, ex.tokens, gaz) for ex in dev]
        m = tagger.evaluate_spans(dev, preds)
        click.echo(f"dev span F1 {m.f1:.4f} (P {m.precision:.4f} R {m.recall:.4f})")
    click.echo(f"saved {out}")


@main.command("train-relclf")
@data_dir_option
@click.option("--seed", default=0, show_default=True)
@click.option("--epochs", default=200, show_default=True)
@click.option("--learning-rate", default=0.5, show_default=True)
def train_relclf(data_dir, seed, epochs, learning_rate):
    """Train the relation classifier on the ERC train split."""
    train_path = _require(os.path.join(data_dir, "erc.train.tsv"), "build-datasets")
    rules = relclf.load_rules(_require(os.path.join(data_dir, "rules.json"), "build-datasets"))
    dataset = distant.read_erc_tsv(train_path)
    clf = relclf.RelationClassifier(
        epochs=epochs, learning_rate=learning_rate, seed=seed, rules=rules
    ).fit(dataset)
    out = os.path.join(data_dir, "relclf.json")
    with cleanup_on_failure(out):
        clf.save(out)
    click.echo(f"train accuracy {clf.score(dataset):.4f}; saved {out}")


@main.command()
@data_dir_option
@click.option("--seed", default=0, show_default=True)
@click.option("--threshold", default=0.5, show_default=True)
def extract(data_dir, seed, threshold):
    """Run the tagger and classifier over the corpus to produce raw triples."""
    docs = ingest_corpus(_require(os.path.join(data_dir, "corpus.jsonl"), "ingest"))
    gaz = distant.load_gazetteer(_require(os.path.join(data_dir, "gazetteer.json"), "build-datasets"))
    rules = relclf.load_rules(_require(os.path.join(data_dir, "rules.json"), "build-datasets"))
    model = tagger.load_model(_require(os.path.join(data_dir, "tagger.json"), "train-tagger"))
    crf = tagger.CrfTagger(gazetteer=gaz)
    crf.model_ = model
    clf = relclf.RelationClassifier.load(
        _require(os.path.join(data_dir, "relclf.json"), "train-relclf"), rules=rules
    )
    raw = pipeline.extract_triples(docs, gaz, crf, clf, rules, threshold)
    raw += pipeline.extract_seed_triples(docs)
    out = os.path.join(data_dir, "raw_triples.tsv")
    with cleanup_on_failure(out):
        fusion.write_raw_triples(raw, out)
    click.echo(f"extracted {len(raw)} raw triples -> {out}")


@main.command()
@data_dir_option
@click.option("--seed", default=0, show_default=True)
def fuse(data_dir, seed):
    """Fuse raw triples into the canonical entity/triple store."""
    docs = ingest_corpus(_require(os.path.join(data_dir, "corpus.jsonl"), "ingest"))
    gaz = distant.load_gazetteer(_require(os.path.join(data_dir, "gazetteer.json"), "build-datasets"))
    raw = fusion.read_raw_triples(_require(os.path.join(data_dir, "raw_triples.tsv"), "extract"))
    manual_path = os.path.join(data_dir, "manual_triples.tsv")
    manual = fusion.read_raw_triples(manual_path) if os.path.exists(manual_path) else []
    graph = pipeline.build_graph(docs, gaz, raw, manual)
    graph_dir = os.path.join(data_dir, "graph")
    graph.save(graph_dir)
    m = graph.manifest()
    click.echo(f"graph: {m['entities']} entities, {m['triples']} triples -> {graph_dir}")


@main.command("train-embed")
@data_dir_option
@click.option("--seed", default=0, show_default=True)
@click.option("--dim", default=50, show_default=True)
@click.option("--margin", default=1.0, show_default=True)
@click.option("--learning-rate", default=0.01, show_default=True)
@click.option("--epochs", default=200, show_default=True)
def train_embed(data_dir, seed, dim, margin, learning_rate, epochs):
    """Train TransE embeddings over the fused graph."""
    graph = KnowledgeGraph.load(_require(os.path.join(data_dir, "graph"), "fuse"))
    table = embed.train_transe(
        graph, dim=dim, margin=margin, learning_rate=learning_rate,
        epochs=epochs, seed=seed,
    )
    out = os.path.join(data_dir, "embeddings.json")
    with cleanup_on_failure(out):
        embed.save_table(table, out)
    click.echo(f"saved {out} (dim={dim})")


@main.command("eval")
@data_dir_option
@click.option("--seed", default=0, show_default=True)
def eval_cmd(data_dir, seed):
    """Evaluate tagger and classifier on the held-out test splits."""
    gaz = distant.load_gazetteer(_require(os.path.join(data_dir, "gazetteer.json"), "build-datasets"))
    model = tagger.load_model(_require(os.path.join(data_dir, "tagger.json"), "train-tagger"))
    rules = relclf.load_rules(_require(os.path.join(data_dir, "rules.json"), "build-datasets"))
    clf = relclf.RelationClassifier.load(
        _require(os.path.join(data_dir, "relclf.json"), "train-relclf"), rules=rules
    )
    ker_test = distant.read_conll(_require(os.path.join(data_dir, "ker.test.conll"), "build-datasets"))
    erc_test = distant.read_erc_tsv(_require(os.path.join(data_dir, "erc.test.tsv"), "build-datasets"))

    click.echo("dataset\tprecision\trecall\tF1")
    preds = [tagger.decode(model, ex.tokens, gaz) for ex in ker_test]
    m = tagger.evaluate_spans(ker_test, preds)
    click.echo(f"KER\t{m.precision:.4f}\t{m.recall:.4f}\t{m.f1:.4f}")
    rm = relclf.evaluate_relations(erc_test, clf.predict(erc_test))
    click.echo(f"ERC\t{rm['precision']:.4f}\t{rm['recall']:.4f}\t{rm['f1']:.4f}")


@main.command()
@data_dir_option
@click.option("--seed", default=0, show_default=True)
@click.option("--port", default=8750, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(data_dir, seed, port, host):
    """Start the HTTP JSON API."""
    import uvicorn

    from .api import create_app, load_state

    _require(os.path.join(data_dir, "graph"), "fuse")
    app = create_app(load_state(data_dir))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
