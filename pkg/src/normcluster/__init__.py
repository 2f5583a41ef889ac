"""Clustering, homogeneity scoring and centroid-gated kNN mining for
embedded normative statements."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    CATEGORY_LABELS,
    DEFAULT_FOCUS_WORDS,
    CategoryLabel,
    Corpus,
    CorpusFormatError,
    EmbeddingRecord,
    ExtractionMode,
    FocusWordList,
    Token,
    load_corpus,
    parse_corpus,
    resolve_corpus,
    resolve_embedding,
    select_focus_token,
    token_mean,
    write_corpus,
)
from .clustering import (  # noqa: F401
    NOISE,
    ClusterAssignment,
    DbscanParams,
    KMeansParams,
    dbscan,
    inertia,
    kmeans,
)
from .homogeneity import (  # noqa: F401
    AwhScore,
    CompositionRow,
    NoClustersError,
    awh,
    composition_report,
    composition_tsv,
    weighed_homogeneity,
)
from .sweep import (  # noqa: F401
    RunConfig,
    RunResult,
    SweepSpec,
    generate_grid,
    grid_counts,
    rank_results,
    rank_rows,
    run_sweep,
)
from .classifier import (  # noqa: F401
    ClassifierModel,
    PrEvaluation,
    Prediction,
    evaluate,
    fit,
    fit_from_corpus,
    load_model,
    predict,
    predict_corpus,
    save_model,
)
from .bootstrap import (  # noqa: F401
    ReviewBatch,
    ReviewEntry,
    SegmentedDocument,
    Sentence,
    merge_reviews,
    mine,
    parse_review_tsv,
    review_tsv,
    segment,
)
