// File formats. All numeric output uses shortest round-trip formatting,
// so re-reading a file reproduces the exact doubles that were written.
//
//   ratings (input)    delimited text: voter_id, item_id, rating; an
//                      optional header line is auto-detected
//   items.map          "index<TAB>id", one item per line
//   pairwise.coo       header "n m", then m lines "i j value" (i < j)
//   pairwise.support   header "n m", then m lines "i j support",
//                      parallel to pairwise.coo
//   samples.coo        header "n m", then m lines "r c b" (r < c); the
//                      mirrored constraints are implied and reconstructed
//                      on read
//   factors_{U,S,V}.txt  header "rows cols", then whitespace rows
//   *.meta             "key = value" lines, insertion-ordered
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "skewrank/types.hpp"

namespace skewrank::io {

std::string format_double(double v);

struct CsvOptions {
  char delimiter = ',';
};

struct RatingsFile {
  RatingsMatrix<double> ratings;
  std::vector<std::string> voter_ids;  // dense index -> external id
  std::vector<std::string> item_ids;
};

RatingsFile read_ratings(const std::filesystem::path& path,
                         const CsvOptions& options = {});

void write_id_map(const std::filesystem::path& path,
                  const std::vector<std::string>& ids);
std::vector<std::string> read_id_map(const std::filesystem::path& path);

void write_pairwise(const std::filesystem::path& values_path,
                    const std::filesystem::path& support_path,
                    const PairwiseMatrix<double>& Y);
PairwiseMatrix<double> read_pairwise(const std::filesystem::path& values_path,
                                     const std::filesystem::path& support_path);

void write_samples(const std::filesystem::path& path,
                   const SampleSet<double>& samples);
SampleSet<double> read_samples(const std::filesystem::path& path);

void write_factors(const std::filesystem::path& dir,
                   const LowRankFactors<double>& factors);
LowRankFactors<double> read_factors(const std::filesystem::path& dir);

void write_ranking(const std::filesystem::path& path,
                   const RankedList<double>& ranking);

// Ordered key/value record attached to every produced artifact.
class Metadata {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, Index value);
  void set(const std::string& key, bool value);

  bool contains(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

void write_metadata(const std::filesystem::path& path, const Metadata& meta);
Metadata read_metadata(const std::filesystem::path& path);

}  // namespace skewrank::io
