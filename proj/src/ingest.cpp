#include "sclub/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace sclub {

namespace {

constexpr std::string_view kArchiveMagic = "sclub-feature-archive";
constexpr int kArchiveVersion = 1;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

class TsvReader {
 public:
  explicit TsvReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw std::runtime_error("cannot open " + path.string());
    std::string header;
    if (!next_line(header)) throw std::runtime_error(path.string() + ": missing header row");
    header_ = split_tabs(header);
  }

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) throw std::runtime_error(path_.string() + ": no column named '" + name + "'");
    return static_cast<std::size_t>(it - header_.begin());
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (next_line(line)) {
      if (line.empty()) continue;
      fields = split_tabs(line);
      if (fields.size() < header_.size()) {
        throw std::runtime_error(path_.string() + ":" + std::to_string(line_no_) + ": expected " +
                                 std::to_string(header_.size()) + " fields");
      }
      return true;
    }
    return false;
  }

  long to_long(const std::string& field) const {
    try {
      std::size_t used = 0;
      const long v = std::stol(field, &used);
      if (used != field.size()) throw std::invalid_argument(field);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error(path_.string() + ":" + std::to_string(line_no_) + ": not an integer: '" + field + "'");
    }
  }

 private:
  bool next_line(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  long line_no_ = 0;
};

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error("archive: bad real '" + s + "'");
  return v;
}

}  // namespace

TagCorpus read_hetrec(const std::filesystem::path& assignments,
                      const std::optional<std::filesystem::path>& tag_dictionary,
                      const std::optional<std::filesystem::path>& interactions, const TsvColumns& columns) {
  std::unordered_map<std::string, std::string> tag_text;
  if (tag_dictionary) {
    TsvReader dict(*tag_dictionary);
    const auto key = dict.column(columns.tag_key);
    const auto value = dict.column(columns.tag_value);
    std::vector<std::string> f;
    while (dict.next(f)) tag_text[f[key]] = f[value];
  }

  TagCorpus corpus;
  {
    TsvReader reader(assignments);
    const auto u = reader.column(columns.user);
    const auto i = reader.column(columns.item);
    const auto t = reader.column(columns.tag);
    std::vector<std::string> f;
    while (reader.next(f)) {
      std::string tag = f[t];
      if (tag_dictionary) {
        const auto it = tag_text.find(tag);
        if (it == tag_text.end()) throw std::runtime_error(assignments.string() + ": unknown tag id " + tag);
        tag = it->second;
      }
      corpus.records.push_back({reader.to_long(f[u]), reader.to_long(f[i]), std::move(tag)});
    }
  }
  std::sort(corpus.records.begin(), corpus.records.end());
  corpus.records.erase(std::unique(corpus.records.begin(), corpus.records.end()), corpus.records.end());

  if (interactions) {
    TsvReader reader(*interactions);
    const auto u = reader.column(columns.user);
    const auto i = reader.column(columns.item);
    std::vector<std::string> f;
    while (reader.next(f)) corpus.interactions.emplace_back(reader.to_long(f[u]), reader.to_long(f[i]));
  } else {
    for (const auto& r : corpus.records) corpus.interactions.emplace_back(r.user, r.item);
  }
  std::sort(corpus.interactions.begin(), corpus.interactions.end());
  corpus.interactions.erase(std::unique(corpus.interactions.begin(), corpus.interactions.end()),
                            corpus.interactions.end());
  return corpus;
}

std::vector<std::string> tokenize_tag(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (c == '_' || c == '-' || c == '\'' || std::isspace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> filter_rare(const std::map<std::string, long>& counts, int min_count) {
  if (min_count < 1) throw std::invalid_argument("filter_rare: min_count must be >= 1");
  std::vector<std::string> kept;
  for (const auto& [token, count] : counts) {
    if (count >= min_count) kept.push_back(token);
  }
  if (kept.empty()) {
    throw std::runtime_error("filter_rare: no token occurs at least " + std::to_string(min_count) + " times");
  }
  return kept;
}

Mat build_tfidf(const std::vector<std::vector<std::string>>& item_tokens, const Vocabulary& vocabulary) {
  if (vocabulary.empty()) throw std::invalid_argument("build_tfidf: empty vocabulary");
  const auto n_items = static_cast<Eigen::Index>(item_tokens.size());
  const auto n_terms = static_cast<Eigen::Index>(vocabulary.size());
  Mat tf = Mat::Zero(n_items, n_terms);
  for (Eigen::Index r = 0; r < n_items; ++r) {
    for (const auto& tok : item_tokens[static_cast<std::size_t>(r)]) {
      const auto it = vocabulary.find(tok);
      if (it != vocabulary.end()) tf(r, it->second) += 1.0;
    }
  }
  for (Eigen::Index c = 0; c < n_terms; ++c) {
    const auto df = static_cast<double>((tf.col(c).array() > 0.0).count());
    const double idf = df > 0.0 ? std::log(static_cast<double>(n_items) / df) : 0.0;
    tf.col(c) *= idf;
  }
  return tf;
}

ItemFeatures featurize(const TagCorpus& corpus, const IngestOptions& options) {
  if (options.dim < 1) throw std::invalid_argument("featurize: target dimension must be positive");

  // Items in ascending id order, each with the tokens of all its tag records.
  std::map<long, std::vector<std::string>> by_item;
  std::map<std::string, long> counts;
  for (const auto& r : corpus.records) {
    auto& toks = by_item[r.item];
    for (auto& tok : tokenize_tag(r.tag)) {
      ++counts[tok];
      toks.push_back(std::move(tok));
    }
  }

  ItemFeatures out;
  int column = 0;
  for (const auto& tok : filter_rare(counts, options.min_count)) out.vocabulary.emplace(tok, column++);

  std::vector<std::vector<std::string>> item_tokens;
  item_tokens.reserve(by_item.size());
  for (auto& [item, toks] : by_item) {
    out.item_ids.push_back(item);
    item_tokens.push_back(std::move(toks));
  }
  const Mat tfidf = build_tfidf(item_tokens, out.vocabulary);
  try {
    out.basis = pca_fit(tfidf, options.dim);
  } catch (const RankDeficient& e) {
    throw RankDeficient("featurize: the TF-IDF matrix has rank " + std::to_string(e.achievable_rank()) +
                            " after centring; use a target dimension of at most " +
                            std::to_string(e.achievable_rank()) + " (requested " + std::to_string(options.dim) + ")",
                        e.achievable_rank());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("featurize: ") + e.what() + "; use a smaller target dimension");
  }
  out.features = pca_project(out.basis, tfidf);
  return out;
}

FeatureArchive build_archive(const TagCorpus& corpus, const IngestOptions& options) {
  ItemFeatures feats = featurize(corpus, options);
  FeatureArchive archive;
  archive.dim = options.dim;
  archive.provenance = options;
  archive.vocabulary_size = static_cast<int>(feats.vocabulary.size());
  archive.item_ids = feats.item_ids;
  archive.features = std::move(feats.features);

  std::map<long, std::set<int>> by_user;
  for (const auto& [user, item] : corpus.interactions) {
    const auto it = std::lower_bound(archive.item_ids.begin(), archive.item_ids.end(), item);
    if (it == archive.item_ids.end() || *it != item) continue;  // item has no tags
    by_user[user].insert(static_cast<int>(it - archive.item_ids.begin()));
  }
  std::vector<long> users;
  for (const auto& [user, items] : by_user) users.push_back(user);

  if (options.max_users > 0 && static_cast<int>(users.size()) > options.max_users) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(users.begin(), users.end(), rng);
    users.resize(static_cast<std::size_t>(options.max_users));
    std::sort(users.begin(), users.end());
  }
  for (long user : users) {
    const auto& items = by_user[user];
    archive.user_ids.push_back(user);
    archive.positives.emplace_back(items.begin(), items.end());
  }
  return archive;
}

void write_archive(const FeatureArchive& a, std::ostream& out) {
  out << kArchiveMagic << ' ' << kArchiveVersion << '\n';
  out << "dimension " << a.dim << '\n';
  out << "items " << a.item_ids.size() << '\n';
  out << "users " << a.user_ids.size() << '\n';
  out << "vocabulary_size " << a.vocabulary_size << '\n';
  out << "min_count " << a.provenance.min_count << '\n';
  out << "max_users " << a.provenance.max_users << '\n';
  out << "seed " << a.provenance.seed << '\n';
  for (std::size_t r = 0; r < a.item_ids.size(); ++r) {
    out << "item " << a.item_ids[r];
    for (int c = 0; c < a.dim; ++c) out << ' ' << hex_double(a.features(static_cast<Eigen::Index>(r), c));
    out << '\n';
  }
  for (std::size_t u = 0; u < a.user_ids.size(); ++u) {
    out << "user " << a.user_ids[u] << ' ' << a.positives[u].size();
    for (int k : a.positives[u]) out << ' ' << k;
    out << '\n';
  }
  out << "end\n";
}

void write_archive(const FeatureArchive& archive, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write archive " + path.string());
  write_archive(archive, out);
  if (!out) throw std::runtime_error("write failed for archive " + path.string());
}

FeatureArchive read_archive(std::istream& in) {
  auto expect_key = [&](const char* key) {
    std::string k;
    if (!(in >> k) || k != key) throw std::runtime_error(std::string("archive: expected '") + key + "'");
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kArchiveMagic) throw std::runtime_error("archive: bad magic");
  if (version != kArchiveVersion) throw std::runtime_error("archive: unsupported version " + std::to_string(version));

  FeatureArchive a;
  std::size_t n_items = 0;
  std::size_t n_users = 0;
  expect_key("dimension");
  in >> a.dim;
  expect_key("items");
  in >> n_items;
  expect_key("users");
  in >> n_users;
  expect_key("vocabulary_size");
  in >> a.vocabulary_size;
  expect_key("min_count");
  in >> a.provenance.min_count;
  expect_key("max_users");
  in >> a.provenance.max_users;
  expect_key("seed");
  in >> a.provenance.seed;
  if (!in || a.dim < 1) throw std::runtime_error("archive: malformed header");
  a.provenance.dim = a.dim;

  a.features.resize(static_cast<Eigen::Index>(n_items), a.dim);
  std::string token;
  for (std::size_t r = 0; r < n_items; ++r) {
    expect_key("item");
    long id = 0;
    in >> id;
    a.item_ids.push_back(id);
    for (int c = 0; c < a.dim; ++c) {
      in >> token;
      a.features(static_cast<Eigen::Index>(r), c) = parse_hex_double(token);
    }
  }
  for (std::size_t u = 0; u < n_users; ++u) {
    expect_key("user");
    long id = 0;
    std::size_t count = 0;
    in >> id >> count;
    std::vector<int> items(count);
    for (auto& k : items) {
      in >> k;
      if (k < 0 || static_cast<std::size_t>(k) >= n_items) throw std::runtime_error("archive: item index out of range");
    }
    a.user_ids.push_back(id);
    a.positives.push_back(std::move(items));
  }
  expect_key("end");
  if (!in) throw std::runtime_error("archive: truncated");
  return a;
}

FeatureArchive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read archive " + path.string());
  return read_archive(in);
}

LoggedWorld make_logged_world(const FeatureArchive& archive, int pool, std::uint64_t seed) {
  return LoggedWorld(archive.features, archive.positives, pool, seed);
}

}  // namespace sclub
