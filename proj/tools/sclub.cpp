// sclub: run bandit experiments, sparsity sweeps, dataset ingestion and plotting.

#include <CLI11.hpp>

#include "sclub/bench.hpp"
#include "sclub/ingest.hpp"

#include <cstdio>
#include <iostream>

namespace {

struct GlobalOptions {
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  int threads = 0;
};

sclub::ExperimentConfig load_with_overrides(const std::string& path, const GlobalOptions& g) {
  auto cfg = sclub::load_config(path);
  if (!g.seeds.empty()) cfg.seeds = g.seeds;
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  if (g.threads > 0) cfg.threads = g.threads;
  cfg.validate();
  return cfg;
}

int cmd_run(const std::string& config_path, const GlobalOptions& g) {
  const auto cfg = load_with_overrides(config_path, g);
  const auto results = sclub::run_all(cfg, cfg.threads);
  const auto base = cfg.output_dir / cfg.name;
  sclub::emit_csv(results, base.string() + ".csv", cfg.record);
  const auto aggregates = sclub::aggregate_by_policy(results);
  sclub::emit_plot(aggregates, base.string() + "_regret.svg");
  sclub::write_manifest(cfg, results, base.string() + "_manifest.json");

  std::printf("%-24s %8s %18s %12s\n", "policy", "runs", "final R_T (mean)", "clusters");
  for (const auto& a : aggregates) {
    std::printf("%-24s %8zu %12.3f +- %-6.2f %9.2f\n", a.policy.c_str(), a.runs, a.cumulative.mean.back(),
                a.cumulative.std.back(), a.clusters.mean.back());
  }
  std::printf("wrote %s.{csv,_regret.svg,_manifest.json}\n", base.string().c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, std::vector<int> n_values, const GlobalOptions& g) {
  const auto cfg = load_with_overrides(config_path, g);
  if (n_values.empty()) n_values = cfg.sweep.n_values;
  const auto rows = sclub::sparsity_sweep(cfg, n_values, cfg.threads);
  const auto path = cfg.output_dir / (cfg.name + "_sweep.csv");
  sclub::emit_sweep_csv(rows, path);

  std::vector<double> regret;
  std::vector<double> nmi;
  std::printf("%6s %16s %10s %12s %10s\n", "n", "final R_T", "NMI", "modularity", "clusters");
  for (const auto& r : rows) {
    std::printf("%6d %16.3f %10.4f %12.4f %10.2f\n", r.n, r.final_regret, r.final_nmi, r.final_modularity,
                r.final_clusters);
    regret.push_back(r.final_regret);
    nmi.push_back(r.final_nmi);
  }
  if (rows.size() >= 2) std::printf("spearman(NMI, regret) = %.4f\n", sclub::spearman(nmi, regret));
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-clustered contextual bandit experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seeds", global.seeds, "Override the config's seed list")->delimiter(',');
  app.add_option("--out", global.out_dir, "Override the output directory");
  app.add_option("--threads", global.threads, "Worker threads (default: config value)")
      ->check(CLI::Range(1, 1024));

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every policy and seed of a config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  std::vector<int> sweep_n;
  auto* sweep = app.add_subcommand("sweep", "Sparsity sweep over the edge parameter n");
  sweep->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--n", sweep_n, "n values (default: the config's sweep.n_values)")->delimiter(',');

  std::string assignments;
  std::string tag_dict;
  std::string interactions;
  std::string archive_out;
  sclub::IngestOptions ingest_opts;
  sclub::TsvColumns columns;
  auto* ingest = app.add_subcommand("ingest", "Tag dataset (HetRec layout) -> feature archive");
  ingest->add_option("--assignments", assignments, "Tag assignment TSV (user, item, tag)")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("--tags", tag_dict, "Tag dictionary TSV (tag id -> text)")->check(CLI::ExistingFile);
  ingest->add_option("--interactions", interactions, "User-item interaction TSV")->check(CLI::ExistingFile);
  ingest->add_option("--archive", archive_out, "Output feature archive")->required();
  ingest->add_option("--dim", ingest_opts.dim, "Target feature dimension")->capture_default_str();
  ingest->add_option("--min-count", ingest_opts.min_count, "Minimum token count")->capture_default_str();
  ingest->add_option("--max-users", ingest_opts.max_users, "Random user cap (0 = all)")->capture_default_str();
  ingest->add_option("--seed", ingest_opts.seed, "Seed for the user cap")->capture_default_str();
  ingest->add_option("--user-col", columns.user)->capture_default_str();
  ingest->add_option("--item-col", columns.item)->capture_default_str();
  ingest->add_option("--tag-col", columns.tag)->capture_default_str();
  ingest->add_option("--tag-key-col", columns.tag_key)->capture_default_str();
  ingest->add_option("--tag-value-col", columns.tag_value)->capture_default_str();

  std::string csv_in;
  std::string svg_out;
  auto* plot = app.add_subcommand("plot", "Results CSV -> SVG regret and cluster-count charts");
  plot->add_option("csv", csv_in, "CSV written by `run`")->required()->check(CLI::ExistingFile);
  plot->add_option("--svg", svg_out, "Output SVG (default: next to the CSV)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, global);
    if (*sweep) return cmd_sweep(config_path, sweep_n, global);
    if (*ingest) {
      const auto corpus = sclub::read_hetrec(
          assignments, tag_dict.empty() ? std::nullopt : std::optional<std::filesystem::path>(tag_dict),
          interactions.empty() ? std::nullopt : std::optional<std::filesystem::path>(interactions), columns);
      const auto archive = sclub::build_archive(corpus, ingest_opts);
      sclub::write_archive(archive, std::filesystem::path(archive_out));
      std::printf("wrote %s: %zu items, %zu users, dimension %d, vocabulary %d\n", archive_out.c_str(),
                  archive.item_ids.size(), archive.user_ids.size(), archive.dim, archive.vocabulary_size);
      return 0;
    }
    if (*plot) {
      std::filesystem::path out = svg_out;
      if (out.empty()) {
        out = csv_in;
        out.replace_extension(".svg");
      }
      const auto results = sclub::read_csv(csv_in);
      if (results.empty()) throw std::runtime_error(csv_in + ": no rows");
      sclub::emit_plot(sclub::aggregate_by_policy(results), out);
      std::printf("wrote %s and %s\n", out.string().c_str(), sclub::companion_cluster_plot(out).string().c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sclub: %s\n", e.what());
    return 1;
  }
  return 0;
}
