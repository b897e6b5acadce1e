#pragma once

#include "sclub/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace sclub {

/// Undirected user graph: symmetric, zero diagonal, nonnegative weights.
struct SimilarityGraph {
  Mat weights;

  int size() const { return static_cast<int>(weights.rows()); }
  double total_weight() const;  // m = sum over unordered pairs
  bool has_edges() const;
};

/// Community assignment with contiguous ids 0..k-1.
struct Partition {
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
  int num_communities() const;
  std::vector<std::vector<int>> members() const;

  /// Relabels arbitrary ids to 0..k-1 in order of first appearance.
  static Partition from_labels(const std::vector<int>& raw);
  static Partition singletons(int n);
  static Partition single(int n);
};

/// Median of pairwise Euclidean distances between the rows of `estimates`.
/// Falls back to the mean nonzero distance when the median is zero, and to 1
/// when all rows coincide.
double median_bandwidth(const RowMat& estimates);

/// Pairwise RBF weights between estimate rows (one user per row).
SimilarityGraph build_similarity_graph(const RowMat& estimates, double sigma);

/// Squared Euclidean distance between two length-`dim` arrays.
double sq_distance(const double* a, const double* b, Eigen::Index dim);

/// Symmetric matrix of squared distances between estimate rows.
Mat pairwise_sq_distances(const RowMat& estimates);

/// RBF graph from precomputed squared distances; sigma defaults to the median distance.
SimilarityGraph similarity_graph_from_sq(const Mat& sq, std::optional<double> sigma);

/// Keeps each node's n heaviest edges (ties to the lower index), union-symmetrised.
SimilarityGraph sparsify_top_n(const SimilarityGraph& g, int n, bool binarize);

/// Records modularity of the working partition after every accepted local move.
struct LouvainTrace {
  std::vector<double> modularity_after_move;
  int levels = 0;
};

Partition louvain(const SimilarityGraph& g, std::uint64_t seed, LouvainTrace* trace = nullptr);

/// Newman-Girvan modularity of P on G.
double modularity(const SimilarityGraph& g, const Partition& p);

/// Normalised mutual information, arithmetic-mean normalisation, natural logs.
double nmi(const Partition& a, const Partition& b);

/// Connected components of the graph's nonzero edges.
Partition connected_components(const SimilarityGraph& g);

/// Plain edge list "i j weight" (i < j, nonzero weights only).
void write_edge_list(const SimilarityGraph& g, const std::filesystem::path& path);

}  // namespace sclub
