import pytest

from hicl.corpus import FewShotConfig, sample_few_shot
from hicl.indexer import TrainConfig, train_indexer
from hicl.retrieval import build_database
from hicl.synthetic import FixtureConfig, make_corpus, make_taxonomy, split_corpus
from hicl.taxonomy import LabelTextMode, loads_taxonomy


MINI_TAX_TEXT = """\
CS\tROOT
Machine Learning\tCS
Databases\tCS
Biology\tROOT
Genetics\tBiology
Ecology\tBiology
"""

FIG_TAX_TEXT = """\
AI\tROOT
speech\tAI
speech recognition\tspeech
speech synthesis\tspeech
CS\tROOT
databases\tCS
relational databases\tdatabases
"""


@pytest.fixture
def mini_tax():
    return loads_taxonomy(MINI_TAX_TEXT)


@pytest.fixture
def fig_tax():
    return loads_taxonomy(FIG_TAX_TEXT)


@pytest.fixture(scope="session")
def small_fixture():
    """A quick separable 2x2x2 world with a lightly trained encoder, shared by
    retrieval/inference/service tests to keep the suite fast."""
    cfg = FixtureConfig(depth=3, branching=2, docs_per_leaf=4, seed=3)
    taxonomy = make_taxonomy(cfg)
    docs = make_corpus(taxonomy, cfg)
    train, held = split_corpus(docs, 1, seed=5)
    shots = sample_few_shot(train, FewShotConfig(q=2, seed=171))
    params = train_indexer(
        shots,
        taxonomy,
        TrainConfig(
            epochs=2, seed=171, dim=16, label_text_mode=LabelTextMode.DESCRIPTION
        ),
    )
    db = build_database(shots, params, taxonomy)
    doc_texts = {d.id: d.text for d in shots}
    return {
        "taxonomy": taxonomy,
        "docs": docs,
        "train": shots,
        "held": held,
        "params": params,
        "db": db,
        "doc_texts": doc_texts,
    }
