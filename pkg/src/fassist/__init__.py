"""Natural-language function retrieval over mined API documentation."""

__version__ = "0.1.0"

from .corpus import (
    ClassHierarchy,
    Component,
    ComponentInventory,
    Corpus,
    CorpusError,
    Pair,
    SourceLocation,
    SplitSpec,
    TextSequence,
    linearize_component,
    load_corpus,
    load_hierarchy,
    save_corpus,
    save_hierarchy,
    split_corpus,
    split_identifier,
    tokenize_text,
)
from .translation import (
    Alignment,
    LexTable,
    TranslationError,
    likelihood,
    rank_components,
    symmetrize,
    train_model1,
    viterbi_align,
)
from .features import FeatureIndex, FeatureVector, Featurizer, PhraseTable, build_phrase_table
from .reranker import RerankTrainConfig, RerankError, WeightVector, rerank, train
from .evaluation import (
    EvalResult,
    compute_metrics,
    exact_match,
    run_experiment,
    term_match_rank,
)
from .model_store import TrainedModel, load_model, save_model
from .pipeline import PipelineConfig, PipelineError, run_pipeline, validate_config
