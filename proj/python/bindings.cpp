#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sclub/agents.hpp"
#include "sclub/bench.hpp"
#include "sclub/envsim.hpp"
#include "sclub/ingest.hpp"
#include "sclub/numerics.hpp"
#include "sclub/usergraph.hpp"

namespace py = pybind11;
using namespace sclub;

namespace {

SimilarityGraph as_graph(const Mat& weights) {
  return SimilarityGraph{weights};
}

py::dict run_to_dict(const RunResult& r) {
  py::dict d;
  d["policy"] = r.policy;
  d["seed"] = r.seed;
  d["regret"] = r.regret;
  d["cumulative"] = r.cumulative;
  d["clusters"] = r.clusters;
  d["nmi"] = r.nmi;
  d["modularity"] = r.modularity;
  return d;
}

void bind_numerics(py::module_& m) {
  m.def("rank_one_update", &rank_one_update, py::arg("m"), py::arg("x"));
  m.def("solve_spd", &solve_spd, py::arg("m"), py::arg("b"));
  m.def("inv_rank_one_update", &inv_rank_one_update, py::arg("minv"), py::arg("x"));
  m.def("rbf_weight", &rbf_weight, py::arg("u"), py::arg("v"), py::arg("sigma"));

  py::class_<PcaBasis>(m, "PcaBasis")
      .def_readonly("components", &PcaBasis::components)
      .def_readonly("eigenvalues", &PcaBasis::eigenvalues)
      .def_readonly("mean", &PcaBasis::mean)
      .def("project", [](const PcaBasis& b, const Mat& rows) { return pca_project(b, rows); });
  m.def("pca_fit", &pca_fit, py::arg("rows"), py::arg("k"));
}

void bind_graph(py::module_& m) {
  m.def("build_similarity_graph",
        [](const RowMat& estimates, std::optional<double> sigma) {
          return build_similarity_graph(estimates, sigma ? *sigma : median_bandwidth(estimates)).weights;
        },
        py::arg("estimates"), py::arg("sigma") = py::none(),
        "Pairwise RBF weights; sigma defaults to the median pairwise distance.");
  m.def("sparsify_top_n",
        [](const Mat& w, int n, bool binarize) { return sparsify_top_n(as_graph(w), n, binarize).weights; },
        py::arg("weights"), py::arg("n"), py::arg("binarize") = true);
  m.def("louvain", [](const Mat& w, std::uint64_t seed) { return louvain(as_graph(w), seed).labels; },
        py::arg("weights"), py::arg("seed") = 0);
  m.def("modularity",
        [](const Mat& w, const std::vector<int>& labels) {
          return modularity(as_graph(w), Partition::from_labels(labels));
        },
        py::arg("weights"), py::arg("labels"));
  m.def("nmi",
        [](const std::vector<int>& a, const std::vector<int>& b) {
          return nmi(Partition::from_labels(a), Partition::from_labels(b));
        },
        py::arg("a"), py::arg("b"));
}

void bind_worlds(py::module_& m) {
  py::class_<SyntheticParams>(m, "SyntheticParams")
      .def(py::init<>())
      .def_readwrite("users", &SyntheticParams::users)
      .def_readwrite("clusters", &SyntheticParams::clusters)
      .def_readwrite("items", &SyntheticParams::items)
      .def_readwrite("dim", &SyntheticParams::dim)
      .def_readwrite("pool", &SyntheticParams::pool)
      .def_readwrite("sigma_c", &SyntheticParams::sigma_c)
      .def_readwrite("sigma_eps", &SyntheticParams::sigma_eps)
      .def_property(
          "perturbation", [](const SyntheticParams& p) { return std::string(to_string(p.perturbation)); },
          [](SyntheticParams& p, const std::string& v) { p.perturbation = parse_perturbation(v); });

  py::class_<Round>(m, "Round")
      .def_readonly("t", &Round::t)
      .def_readonly("user", &Round::user)
      .def_readonly("candidates", &Round::candidates);

  py::class_<SyntheticWorld>(m, "SyntheticWorld")
      .def_static("generate", &SyntheticWorld::generate, py::arg("params"), py::arg("seed"))
      .def("sample_round", &SyntheticWorld::sample_round, py::arg("t"))
      .def("realize_payoff", &SyntheticWorld::realize_payoff, py::arg("user"), py::arg("item"))
      .def("expected_payoff", &SyntheticWorld::expected_payoff, py::arg("user"), py::arg("item"))
      .def("instant_regret", &SyntheticWorld::instant_regret, py::arg("round"), py::arg("chosen"))
      .def_property_readonly("user_vectors", &SyntheticWorld::user_vectors)
      .def_property_readonly("cluster_centers", &SyntheticWorld::cluster_centers)
      .def_property_readonly("items", &SyntheticWorld::items)
      .def_property_readonly("user_cluster", &SyntheticWorld::user_cluster);
}

void bind_ingest(py::module_& m) {
  m.def("tokenize_tag", &tokenize_tag, py::arg("raw"));
  m.def("filter_rare", &filter_rare, py::arg("counts"), py::arg("min_count") = 10);
}

void bind_bench(py::module_& m) {
  m.def("run_experiment",
        [](const std::string& config_json, const std::string& policy, std::uint64_t seed) {
          const auto cfg = parse_config(config_json);
          for (const auto& p : cfg.policies) {
            if (p.name == policy) {
              RunResult r;
              {
                py::gil_scoped_release release;
                r = run_experiment(cfg, p, seed);
              }
              return run_to_dict(r);
            }
          }
          throw std::invalid_argument("no policy named '" + policy + "' in the config");
        },
        py::arg("config_json"), py::arg("policy"), py::arg("seed"),
        "Runs one (policy, seed) pair of a JSON experiment config and returns its traces.");
  m.def("spearman", &spearman, py::arg("x"), py::arg("y"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Graph-clustered contextual bandits: core bindings";
  m.attr("__version__") = std::string(kVersion);
  bind_numerics(m);
  bind_graph(m);
  bind_worlds(m);
  bind_ingest(m);
  bind_bench(m);
}
