"""Model-free dataset pruning by TF-IDF distance to the geometric median."""

from .corpus import Corpus, Document, TokenStream, load_corpus, tokenize, tokenize_corpus
from .errors import ConfigError, DataError, FDPruneError, SolverError, StageError
from .geomedian import MedianResult, PointSet, SolverConfig, geometric_median, objective
from .pipeline import RunConfig, RunReport, cmd_project, cmd_prune, cmd_score, cmd_stats
from .projection import Projection, principal_components
from .pruner import (
    CoresetSelection,
    PruneConfig,
    Stratum,
    adaptive_branch,
    coreset_budget,
    make_strata,
    prune,
    prune_closest,
    prune_furthest,
    prune_random,
    prune_stratified,
)
from .scoring import ScoreSet, fd_scores, percentile_rank
from .vectorizer import (
    EmbeddingMatrix,
    SparseVector,
    Vocabulary,
    build_vocabulary,
    embed,
    inverse_document_frequency,
    term_frequency,
)

__version__ = "0.1.0"
