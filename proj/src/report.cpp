// CSV, SVG and manifest writers for experiment results.

#include "sclub/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sclub {

namespace {

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Enough digits to read back the same double.
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Series {
  std::string label;
  const std::vector<double>* mean;
  const std::vector<double>* std;
};

// Sample indices 0..len-1 evenly, always keeping the last point.
std::vector<std::size_t> sample_points(std::size_t len, std::size_t max_points) {
  std::vector<std::size_t> idx;
  if (len == 0) return idx;
  if (len <= max_points) {
    for (std::size_t i = 0; i < len; ++i) idx.push_back(i);
    return idx;
  }
  for (std::size_t k = 0; k < max_points; ++k) {
    idx.push_back(k * (len - 1) / (max_points - 1));
  }
  return idx;
}

void write_chart(const std::vector<Series>& series, const std::string& title, const std::string& y_label,
                 const std::filesystem::path& path) {
  constexpr double kWidth = 800.0;
  constexpr double kHeight = 500.0;
  constexpr double kLeft = 80.0;
  constexpr double kRight = 180.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 60.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::size_t len = 0;
  double y_max = 0.0;
  double y_min = 0.0;
  for (const auto& s : series) {
    len = std::max(len, s.mean->size());
    for (std::size_t i = 0; i < s.mean->size(); ++i) {
      const double sd = s.std->empty() ? 0.0 : (*s.std)[i];
      if (std::isfinite((*s.mean)[i])) {
        y_max = std::max(y_max, (*s.mean)[i] + sd);
        y_min = std::min(y_min, (*s.mean)[i] - sd);
      }
    }
  }
  if (y_max <= y_min) y_max = y_min + 1.0;
  const double x_span = len > 1 ? static_cast<double>(len - 1) : 1.0;
  auto px = [&](std::size_t i) { return kLeft + plot_w * static_cast<double>(i) / x_span; };
  auto py = [&](double v) { return kTop + plot_h * (1.0 - (v - y_min) / (y_max - y_min)); };

  auto out = open_out(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  out << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
      << kTop + plot_h << "\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
      << "\"/>\n</g>\n";
  out << "<g id=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y_min + (y_max - y_min) * k / 4.0;
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt3(py(v) + 4) << "\" text-anchor=\"end\">" << fmt12(v)
        << "</text>\n";
    const auto i = static_cast<std::size_t>(std::llround(x_span * k / 4.0));
    out << "<text x=\"" << fmt3(px(i)) << "\" y=\"" << kTop + plot_h + 18 << "\" text-anchor=\"middle\">" << i + 1
        << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">round t</text>\n";
  out << "<text x=\"20\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 20 " << kTop + plot_h / 2
      << ")\" text-anchor=\"middle\">" << y_label << "</text>\n</g>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    const auto idx = sample_points(ser.mean->size(), 400);
    auto band = [&](std::size_t i, double sign) {
      const double sd = ser.std->empty() ? 0.0 : (*ser.std)[i];
      return py((*ser.mean)[i] + sign * sd);
    };
    out << "<g class=\"series\" data-policy=\"" << ser.label << "\">\n";
    out << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i : idx) out << fmt3(px(i)) << ',' << fmt3(band(i, 1.0)) << ' ';
    for (auto it = idx.rbegin(); it != idx.rend(); ++it) out << fmt3(px(*it)) << ',' << fmt3(band(*it, -1.0)) << ' ';
    out << "\"/>\n";
    out << "<polyline class=\"mean\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k > 0) out << ' ';
      out << fmt3(px(idx[k])) << ',' << fmt3(py((*ser.mean)[idx[k]]));
    }
    out << "\"/>\n</g>\n";
    const double ly = kTop + 20.0 * static_cast<double>(s);
    out << "<line x1=\"" << kLeft + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + plot_w + 35 << "\" y2=\""
        << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kLeft + plot_w + 40 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << ser.label << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void emit_csv(const std::vector<RunResult>& results, const std::filesystem::path& path, const RecordOptions& record) {
  auto out = open_out(path);
  out << "t,policy,seed,regret,cumulative_regret,cluster_count";
  if (record.nmi) out << ",nmi";
  if (record.modularity) out << ",modularity";
  out << '\n';
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.regret.size(); ++i) {
      out << i + 1 << ',' << r.policy << ',' << r.seed << ',' << fmt17(r.regret[i]) << ',' << fmt17(r.cumulative[i])
          << ',' << r.clusters[i];
      if (record.nmi) out << ',' << (i < r.nmi.size() ? fmt17(r.nmi[i]) : "nan");
      if (record.modularity) out << ',' << (i < r.modularity.size() ? fmt17(r.modularity[i]) : "nan");
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<RunResult> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto header = split_commas(line);
  auto col = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_policy = col("policy");
  const int c_seed = col("seed");
  const int c_regret = col("regret");
  const int c_cum = col("cumulative_regret");
  const int c_clusters = col("cluster_count");
  const int c_nmi = col("nmi");
  const int c_mod = col("modularity");
  if (c_policy < 0 || c_seed < 0 || c_regret < 0 || c_cum < 0 || c_clusters < 0) {
    throw std::runtime_error(path.string() + ": missing required columns");
  }

  std::vector<RunResult> results;
  std::map<std::pair<std::string, std::uint64_t>, std::size_t> index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() < header.size()) throw std::runtime_error(path.string() + ": short row");
    const std::uint64_t seed = std::stoull(f[static_cast<std::size_t>(c_seed)]);
    const auto key = std::make_pair(f[static_cast<std::size_t>(c_policy)], seed);
    auto [it, inserted] = index.try_emplace(key, results.size());
    if (inserted) {
      results.emplace_back();
      results.back().policy = key.first;
      results.back().seed = seed;
    }
    auto& r = results[it->second];
    r.regret.push_back(std::stod(f[static_cast<std::size_t>(c_regret)]));
    r.cumulative.push_back(std::stod(f[static_cast<std::size_t>(c_cum)]));
    r.clusters.push_back(std::stoi(f[static_cast<std::size_t>(c_clusters)]));
    if (c_nmi >= 0) r.nmi.push_back(std::stod(f[static_cast<std::size_t>(c_nmi)]));
    if (c_mod >= 0) r.modularity.push_back(std::stod(f[static_cast<std::size_t>(c_mod)]));
  }
  return results;
}

void emit_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "n,final_regret_mean,final_regret_std,final_nmi,final_modularity,final_clusters\n";
  for (const auto& r : rows) {
    out << r.n << ',' << fmt12(r.final_regret) << ',' << fmt12(r.final_regret_std) << ',' << fmt12(r.final_nmi)
        << ',' << fmt12(r.final_modularity) << ',' << fmt12(r.final_clusters) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::filesystem::path companion_cluster_plot(const std::filesystem::path& path) {
  auto out = path;
  out.replace_filename(path.stem().string() + "_clusters.svg");
  return out;
}

void emit_plot(const std::vector<Aggregate>& aggregates, const std::filesystem::path& path) {
  std::vector<Series> regret;
  std::vector<Series> clusters;
  std::vector<std::string> labels;
  labels.reserve(aggregates.size());
  for (const auto& a : aggregates) labels.push_back(xml_escape(a.policy));
  for (std::size_t i = 0; i < aggregates.size(); ++i) {
    regret.push_back({labels[i], &aggregates[i].cumulative.mean, &aggregates[i].cumulative.std});
    clusters.push_back({labels[i], &aggregates[i].clusters.mean, &aggregates[i].clusters.std});
  }
  write_chart(regret, "Cumulative regret (mean +- 1 std)", "cumulative regret", path);
  write_chart(clusters, "Number of clusters", "clusters", companion_cluster_plot(path));
}

void write_manifest(const ExperimentConfig& config, const std::vector<RunResult>& results,
                    const std::filesystem::path& path) {
  using nlohmann::json;
  const std::string canonical = config_to_json(config);
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  json runs = json::array();
  for (const auto& r : results) {
    runs.push_back({{"policy", r.policy},
                    {"seed", r.seed},
                    {"final_cumulative_regret", r.cumulative.empty() ? 0.0 : r.cumulative.back()},
                    {"final_clusters", r.clusters.empty() ? 0 : r.clusters.back()},
                    {"seconds_per_1000_rounds", r.seconds_per_1000}});
  }
  json manifest = {{"tool", "sclub"},
                   {"version", std::string(kVersion)},
                   {"config_hash", std::string(hash)},
                   {"config", json::parse(canonical)},
                   {"seeds", config.seeds},
                   {"runs", runs}};
  auto out = open_out(path);
  out << manifest.dump(2) << '\n';
}

}  // namespace sclub
