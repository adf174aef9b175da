"""textsift: embed developer Q&A text, rank related tweets, flag informative comments."""

from .corpus import (
    CleanSentence,
    DocKind,
    DumpSource,
    Label,
    RawDocument,
    load_labeled_comments,
    load_tweets,
    normalize,
    parse_dump,
    split_sentences,
    strip_html,
)
from .embedding import (
    EmbeddingModel,
    NegativeSamplingTable,
    TrainingConfig,
    Vocabulary,
    build_vocabulary,
    load_model,
    nearest_neighbors,
    save_model,
    sgns_pair_loss,
    sgns_step,
    train,
)
from .errors import DataError, DumpParseError
from .metrics import ConfusionCounts, MetricReport, accuracy_at_k, cohen_kappa, prf
from .porter import porter_stem
from .ranking import Aggregation, QuerySet, RankedList, rank, score, select_instances
from .svm import (
    KernelSpec,
    SvmModel,
    cross_validate,
    load_svm_model,
    normalized_tf_features,
    ntf_vocabulary,
    predict,
    save_svm_model,
    train_smo,
)
from .tfidf import SparseVector, TfidfModel, fit, rank_tfidf, remove_stopwords, transform
from .vectorize import OovPolicy, SentenceVector, cosine, vectorize

__version__ = "0.1.0"

__all__ = [
    "Aggregation",
    "CleanSentence",
    "ConfusionCounts",
    "DataError",
    "DocKind",
    "DumpParseError",
    "DumpSource",
    "EmbeddingModel",
    "KernelSpec",
    "Label",
    "MetricReport",
    "NegativeSamplingTable",
    "OovPolicy",
    "QuerySet",
    "RankedList",
    "RawDocument",
    "SentenceVector",
    "SparseVector",
    "SvmModel",
    "TfidfModel",
    "TrainingConfig",
    "Vocabulary",
    "accuracy_at_k",
    "build_vocabulary",
    "cohen_kappa",
    "cosine",
    "cross_validate",
    "fit",
    "load_labeled_comments",
    "load_model",
    "load_svm_model",
    "load_tweets",
    "nearest_neighbors",
    "normalize",
    "normalized_tf_features",
    "ntf_vocabulary",
    "parse_dump",
    "porter_stem",
    "predict",
    "prf",
    "rank",
    "rank_tfidf",
    "remove_stopwords",
    "save_model",
    "save_svm_model",
    "score",
    "select_instances",
    "sgns_pair_loss",
    "sgns_step",
    "split_sentences",
    "strip_html",
    "train",
    "train_smo",
    "transform",
    "vectorize",
]
