"""Graph-clustered contextual bandits (SCLUB-CD, CLUB, LinUCB) and their benchmark harness."""

from ._core import (
    PcaBasis,
    Round,
    SyntheticParams,
    SyntheticWorld,
    __version__,
    build_similarity_graph,
    filter_rare,
    inv_rank_one_update,
    louvain,
    modularity,
    nmi,
    pca_fit,
    rank_one_update,
    rbf_weight,
    run_experiment,
    solve_spd,
    sparsify_top_n,
    spearman,
    tokenize_tag,
)

__all__ = [
    "PcaBasis",
    "Round",
    "SyntheticParams",
    "SyntheticWorld",
    "__version__",
    "build_similarity_graph",
    "filter_rare",
    "inv_rank_one_update",
    "louvain",
    "modularity",
    "nmi",
    "pca_fit",
    "rank_one_update",
    "rbf_weight",
    "run_experiment",
    "solve_spd",
    "sparsify_top_n",
    "spearman",
    "tokenize_tag",
]
