#pragma once

#include "sclub/envsim.hpp"
#include "sclub/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sclub {

struct TagRecord {
  long user = 0;
  long item = 0;
  std::string tag;

  auto operator<=>(const TagRecord&) const = default;
};

struct TagCorpus {
  std::vector<TagRecord> records;
  std::vector<std::pair<long, long>> interactions;  // (user, item) positive events
};

/// Column names of the tab-separated inputs (HetRec-2011 layout by default).
struct TsvColumns {
  std::string user = "userID";
  std::string item = "artistID";
  std::string tag = "tagID";
  std::string tag_key = "tagID";       // key column of the tag dictionary
  std::string tag_value = "tagValue";  // text column of the tag dictionary
};

/// Reads tag assignments, an optional tag dictionary (tag column holds ids when given), and
/// optional interactions (defaults to the distinct (user, item) pairs of the assignments).
TagCorpus read_hetrec(const std::filesystem::path& assignments,
                      const std::optional<std::filesystem::path>& tag_dictionary,
                      const std::optional<std::filesystem::path>& interactions, const TsvColumns& columns = {});

/// Lowercases and splits on underscore, hyphen, apostrophe and whitespace.
std::vector<std::string> tokenize_tag(std::string_view raw);

/// Tokens whose corpus-wide count is at least min_count, sorted.
std::vector<std::string> filter_rare(const std::map<std::string, long>& counts, int min_count);

using Vocabulary = std::map<std::string, int>;

/// Rows are items (in the order given), columns vocabulary indices. Entry = count * ln(n_items / df).
Mat build_tfidf(const std::vector<std::vector<std::string>>& item_tokens, const Vocabulary& vocabulary);

struct IngestOptions {
  int dim = 25;
  int min_count = 10;
  int max_users = 0;  // 0 keeps every user
  std::uint64_t seed = 0;
};

struct ItemFeatures {
  std::vector<long> item_ids;  // original ids, ascending
  RowMat features;             // one dim-length row per item
  Vocabulary vocabulary;
  PcaBasis basis;
};

/// tokenize -> filter_rare -> TF-IDF -> PCA -> projection.
ItemFeatures featurize(const TagCorpus& corpus, const IngestOptions& options);

/// Everything a replay world needs, plus provenance.
struct FeatureArchive {
  int dim = 0;
  std::vector<long> item_ids;
  RowMat features;
  std::vector<long> user_ids;
  std::vector<std::vector<int>> positives;  // indices into item_ids
  IngestOptions provenance;
  int vocabulary_size = 0;
};

FeatureArchive build_archive(const TagCorpus& corpus, const IngestOptions& options);

/// Text container with hexadecimal floats; write -> read is bit-exact.
void write_archive(const FeatureArchive& archive, std::ostream& out);
void write_archive(const FeatureArchive& archive, const std::filesystem::path& path);
FeatureArchive read_archive(std::istream& in);
FeatureArchive read_archive(const std::filesystem::path& path);

LoggedWorld make_logged_world(const FeatureArchive& archive, int pool, std::uint64_t seed);

}  // namespace sclub
