"""Heterogeneous information networks: meta-path walks, diversity and recommendation."""

__version__ = "0.1.0"

from .hin import (  # noqa: E402
    Hin, HinError, LinkGroup, MetaPath, MetaPathError, ObjectGroup, Schema, Step,
    UnknownRelationError, build_hin, link_group_from_labels, parse_steps, validate_meta_path,
)
from .walks import (  # noqa: E402
    Pmf, TransitionOperator, all_source_distributions, collective_distribution,
    source_distribution, source_matrix, transition_operator,
)
from .diversity import (  # noqa: E402
    DegenerateError, collective_diversity, diversity_mosaic, mean_individual_diversity,
    perplexity, shannon_entropy,
)
from .ingest import (  # noqa: E402
    DataError, RelationTableSpec, derive_likes, parse_movielens_100k, parse_relation_tables,
    read_manifest,
)
from .recommender import (  # noqa: E402
    MixedPathSpec, RecommendationSet, ipp_recommend, recommend_mixture, two_path_recommend,
    ubcf_recommend,
)
from .randomizer import ShuffleConfig, jaccard, replicate_seed, shuffle_link_group  # noqa: E402
from .evaluation import (  # noqa: E402
    ExperimentResult, SplitSpec, evaluate_grid, precision_recall_f1, run_alpha_grid,
    run_randomization_study, split_likes,
)
