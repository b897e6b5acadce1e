#include "sclub/usergraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace sclub {

double SimilarityGraph::total_weight() const {
  return weights.sum() / 2.0;
}

bool SimilarityGraph::has_edges() const {
  return (weights.array() > 0.0).any();
}

int Partition::num_communities() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<std::vector<int>> Partition::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_communities()));
  for (int i = 0; i < size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(i);
  return out;
}

Partition Partition::from_labels(const std::vector<int>& raw) {
  std::unordered_map<int, int> remap;
  Partition p;
  p.labels.reserve(raw.size());
  for (int r : raw) {
    auto [it, inserted] = remap.try_emplace(r, static_cast<int>(remap.size()));
    p.labels.push_back(it->second);
  }
  return p;
}

Partition Partition::singletons(int n) {
  Partition p;
  p.labels.resize(static_cast<std::size_t>(n));
  std::iota(p.labels.begin(), p.labels.end(), 0);
  return p;
}

Partition Partition::single(int n) {
  Partition p;
  p.labels.assign(static_cast<std::size_t>(n), 0);
  return p;
}

namespace {

// Upper-triangle entries in (0,1), (0,2), ..., (1,2), ... order.
std::vector<double> condensed(const Mat& sq) {
  const Eigen::Index n = sq.rows();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) out.push_back(sq(j, i));
  }
  return out;
}

std::vector<double> condensed_sq_distances(const RowMat& estimates) {
  return condensed(pairwise_sq_distances(estimates));
}

double median_from_sq(std::vector<double> sq) {
  if (sq.empty()) return 1.0;
  const auto mid = sq.begin() + static_cast<std::ptrdiff_t>(sq.size() / 2);
  std::nth_element(sq.begin(), mid, sq.end());
  double median = std::sqrt(*mid);
  if (sq.size() % 2 == 0) median = 0.5 * (median + std::sqrt(*std::max_element(sq.begin(), mid)));
  if (median > 0.0) return median;
  double sum = 0.0;
  std::size_t nonzero = 0;
  for (double v : sq) {
    if (v > 0.0) {
      sum += std::sqrt(v);
      ++nonzero;
    }
  }
  return nonzero > 0 ? sum / static_cast<double>(nonzero) : 1.0;
}

SimilarityGraph graph_from_sq(const std::vector<double>& sq, Eigen::Index n, double sigma) {
  const double scale = 1.0 / (2.0 * sigma * sigma);
  SimilarityGraph g;
  g.weights = Mat::Zero(n, n);
  std::size_t p = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j, ++p) {
      const double w = std::exp(-sq[p] * scale);
      g.weights(i, j) = w;
      g.weights(j, i) = w;
    }
  }
  return g;
}

void check_graph_inputs(const RowMat& estimates) {
  if (estimates.rows() < 2) throw std::invalid_argument("build_similarity_graph: need at least 2 users");
}

}  // namespace

double sq_distance(const double* a, const double* b, Eigen::Index dim) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

Mat pairwise_sq_distances(const RowMat& estimates) {
  const Eigen::Index n = estimates.rows();
  const Eigen::Index d = estimates.cols();
  Mat out = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double s = sq_distance(estimates.data() + i * d, estimates.data() + j * d, d);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

SimilarityGraph similarity_graph_from_sq(const Mat& sq, std::optional<double> sigma) {
  if (sq.rows() < 2 || sq.rows() != sq.cols()) {
    throw std::invalid_argument("similarity_graph_from_sq: need a square matrix over at least 2 users");
  }
  if (sigma && !(*sigma > 0.0)) throw std::invalid_argument("similarity_graph_from_sq: sigma must be positive");
  const auto flat = condensed(sq);
  return graph_from_sq(flat, sq.rows(), sigma ? *sigma : median_from_sq(flat));
}

double median_bandwidth(const RowMat& estimates) {
  return median_from_sq(condensed_sq_distances(estimates));
}

SimilarityGraph build_similarity_graph(const RowMat& estimates, double sigma) {
  check_graph_inputs(estimates);
  if (!(sigma > 0.0)) throw std::invalid_argument("build_similarity_graph: sigma must be positive");
  return graph_from_sq(condensed_sq_distances(estimates), estimates.rows(), sigma);
}

SimilarityGraph sparsify_top_n(const SimilarityGraph& g, int n, bool binarize) {
  const int size = g.size();
  if (n < 1 || n > size - 1) {
    throw std::invalid_argument("sparsify_top_n: n=" + std::to_string(n) + " outside [1, " +
                                std::to_string(size - 1) + "]");
  }
  SimilarityGraph out;
  out.weights = Mat::Zero(size, size);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    order.clear();
    for (int j = 0; j < size; ++j) {
      if (j != i) order.push_back(j);
    }
    // Column i equals row i (symmetry) and is contiguous in memory.
    const double* col = g.weights.data() + static_cast<Eigen::Index>(i) * size;
    std::nth_element(order.begin(), order.begin() + (n - 1), order.end(), [col](int a, int b) {
      return col[a] > col[b] || (col[a] == col[b] && a < b);
    });
    for (int r = 0; r < n; ++r) {
      const int j = order[static_cast<std::size_t>(r)];
      const double w = binarize ? 1.0 : g.weights(i, j);
      out.weights(i, j) = w;
      out.weights(j, i) = w;
    }
  }
  return out;
}

double modularity(const SimilarityGraph& g, const Partition& p) {
  if (p.size() != g.size()) throw std::invalid_argument("modularity: partition size mismatch");
  const double two_m = g.weights.sum();
  if (!(two_m > 0.0)) throw std::invalid_argument("modularity: graph has no edges");
  const int k = p.num_communities();
  std::vector<double> internal(static_cast<std::size_t>(k), 0.0);
  std::vector<double> total(static_cast<std::size_t>(k), 0.0);
  const Vec degree = g.weights.rowwise().sum();
  for (int i = 0; i < g.size(); ++i) {
    const auto ci = static_cast<std::size_t>(p.labels[i]);
    total[ci] += degree(i);
    for (int j = 0; j < g.size(); ++j) {
      if (p.labels[j] == p.labels[i]) internal[ci] += g.weights(i, j);
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < internal.size(); ++c) {
    const double share = total[c] / two_m;
    q += internal[c] / two_m - share * share;
  }
  return q;
}

double nmi(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw std::invalid_argument("nmi: partitions differ in size");
  const auto n = static_cast<double>(a.size());
  if (a.size() == 0) return 1.0;
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ca;
  std::map<int, double> cb;
  for (int i = 0; i < a.size(); ++i) {
    joint[{a.labels[i], b.labels[i]}] += 1.0;
    ca[a.labels[i]] += 1.0;
    cb[b.labels[i]] += 1.0;
  }
  auto entropy = [n](const std::map<int, double>& counts) {
    double h = 0.0;
    for (const auto& [label, c] : counts) {
      const double pr = c / n;
      h -= pr * std::log(pr);
    }
    return h;
  };
  const double ha = entropy(ca);
  const double hb = entropy(cb);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  if (ha == 0.0 || hb == 0.0) return 0.0;
  // A one-to-one contingency table means equal partitions up to relabelling.
  if (joint.size() == ca.size() && joint.size() == cb.size()) return 1.0;
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pij = c / n;
    mi += pij * std::log(pij / ((ca[key.first] / n) * (cb[key.second] / n)));
  }
  return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

Partition connected_components(const SimilarityGraph& g) {
  const int n = g.size();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<int> stack;
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (label[static_cast<std::size_t>(s)] >= 0) continue;
    label[static_cast<std::size_t>(s)] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u = 0; u < n; ++u) {
        if (label[static_cast<std::size_t>(u)] < 0 && g.weights(v, u) > 0.0) {
          label[static_cast<std::size_t>(u)] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  Partition p;
  p.labels = std::move(label);
  return p;
}

void write_edge_list(const SimilarityGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_edge_list: cannot open " + path.string());
  out.precision(17);
  for (int i = 0; i < g.size(); ++i) {
    for (int j = i + 1; j < g.size(); ++j) {
      if (g.weights(i, j) != 0.0) out << i << ' ' << j << ' ' << g.weights(i, j) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write_edge_list: write failed for " + path.string());
}

}  // namespace sclub
