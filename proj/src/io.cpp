#include "skewrank/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace skewrank::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string() + " for reading");
  }
  return in;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && std::isfinite(out);
}

bool parse_index(std::string_view s, Index& out) {
  s = trim(s);
  if (s.empty()) return false;
  long long v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return false;
  out = static_cast<Index>(v);
  return true;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, p);
}

RatingsFile read_ratings(const std::filesystem::path& path,
                         const CsvOptions& options) {
  std::ifstream in = open_in(path);
  RatingsFile out;
  std::unordered_map<std::string, Index> voter_index, item_index;
  std::unordered_set<std::uint64_t> seen;
  std::vector<Rating<double>> entries;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, options.delimiter);
    if (fields.size() < 3) {
      throw ParseError("expected voter, item, rating fields", line_no);
    }
    double rating = 0;
    if (!parse_double(fields[2], rating)) {
      if (line_no == 1) continue;  // header line
      throw ParseError("cannot parse rating '" + std::string(trim(fields[2])) +
                           "'",
                       line_no);
    }
    const std::string voter(trim(fields[0]));
    const std::string item(trim(fields[1]));
    if (voter.empty() || item.empty()) {
      throw ParseError("empty voter or item id", line_no);
    }
    auto [vit, vnew] =
        voter_index.emplace(voter, static_cast<Index>(out.voter_ids.size()));
    if (vnew) out.voter_ids.push_back(voter);
    auto [iit, inew] =
        item_index.emplace(item, static_cast<Index>(out.item_ids.size()));
    if (inew) out.item_ids.push_back(item);
    if (!seen.insert(detail::pack_pair(vit->second, iit->second)).second) {
      throw ParseError("duplicate rating for voter '" + voter + "', item '" +
                           item + "'",
                       line_no);
    }
    entries.push_back({vit->second, iit->second, rating});
  }
  out.ratings = RatingsMatrix<double>(static_cast<Index>(out.voter_ids.size()),
                                      static_cast<Index>(out.item_ids.size()),
                                      std::move(entries));
  return out;
}

void write_id_map(const std::filesystem::path& path,
                  const std::vector<std::string>& ids) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << i << '\t' << ids[i] << '\n';
  }
}

std::vector<std::string> read_id_map(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.empty()) continue;
    const std::size_t tab = sv.find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError("expected 'index<TAB>id'", line_no);
    }
    Index idx = 0;
    if (!parse_index(sv.substr(0, tab), idx) ||
        idx != static_cast<Index>(ids.size())) {
      throw ParseError("id map indices must be consecutive from 0", line_no);
    }
    ids.emplace_back(sv.substr(tab + 1));
  }
  return ids;
}

void write_pairwise(const std::filesystem::path& values_path,
                    const std::filesystem::path& support_path,
                    const PairwiseMatrix<double>& Y) {
  std::ofstream values = open_out(values_path);
  std::ofstream support = open_out(support_path);
  values << Y.num_items() << ' ' << Y.num_pairs() << '\n';
  support << Y.num_items() << ' ' << Y.num_pairs() << '\n';
  for (const auto& e : Y.upper()) {
    values << e.i << ' ' << e.j << ' ' << format_double(e.value) << '\n';
    support << e.i << ' ' << e.j << ' ' << e.support << '\n';
  }
}

PairwiseMatrix<double> read_pairwise(const std::filesystem::path& values_path,
                                     const std::filesystem::path& support_path) {
  std::ifstream values = open_in(values_path);
  std::ifstream support = open_in(support_path);
  Index n = 0, m = 0, ns = 0, ms = 0;
  if (!(values >> n >> m)) {
    throw ParseError("pairwise file missing 'n m' header", 1);
  }
  if (!(support >> ns >> ms) || ns != n || ms != m) {
    throw ParseError("support file header does not match pairwise file", 1);
  }
  std::vector<PairwiseEntry<double>> upper;
  upper.reserve(static_cast<std::size_t>(m));
  for (Index t = 0; t < m; ++t) {
    Index i = 0, j = 0, si = 0, sj = 0, count = 0;
    double value = 0;
    if (!(values >> i >> j >> value)) {
      throw ParseError("truncated pairwise file", static_cast<std::size_t>(t) + 2);
    }
    if (!(support >> si >> sj >> count) || si != i || sj != j) {
      throw ParseError("support file rows do not parallel pairwise file",
                       static_cast<std::size_t>(t) + 2);
    }
    upper.push_back({i, j, value, count});
  }
  return PairwiseMatrix<double>(n, std::move(upper));
}

void write_samples(const std::filesystem::path& path,
                   const SampleSet<double>& samples) {
  samples.validate();
  std::ofstream out = open_out(path);
  std::vector<Index> upper;
  for (Index l = 0; l < samples.size(); ++l) {
    const auto [r, c] = samples.pairs[static_cast<std::size_t>(l)];
    if (r < c) upper.push_back(l);
  }
  out << samples.num_items << ' ' << upper.size() << '\n';
  for (Index l : upper) {
    const auto [r, c] = samples.pairs[static_cast<std::size_t>(l)];
    out << r << ' ' << c << ' ' << format_double(samples.values[l]) << '\n';
  }
}

SampleSet<double> read_samples(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  Index n = 0, m = 0;
  if (!(in >> n >> m)) {
    throw ParseError("samples file missing 'n m' header", 1);
  }
  std::vector<IndexPair> upper(static_cast<std::size_t>(m));
  VectorX<double> values(m);
  for (Index t = 0; t < m; ++t) {
    Index r = 0, c = 0;
    double b = 0;
    if (!(in >> r >> c >> b)) {
      throw ParseError("truncated samples file", static_cast<std::size_t>(t) + 2);
    }
    upper[static_cast<std::size_t>(t)] = {r, c};
    values[t] = b;
  }
  return SampleSet<double>::from_upper(n, upper, values);
}

namespace {

void write_dense(const std::filesystem::path& path, const MatrixX<double>& M) {
  std::ofstream out = open_out(path);
  out << M.rows() << ' ' << M.cols() << '\n';
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) {
      if (c > 0) out << ' ';
      out << format_double(M(r, c));
    }
    out << '\n';
  }
}

MatrixX<double> read_dense(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw ParseError("dense file missing 'rows cols' header", 1);
  }
  MatrixX<double> M(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (!(in >> M(r, c))) {
        throw ParseError("truncated dense file", static_cast<std::size_t>(r) + 2);
      }
    }
  }
  return M;
}

}  // namespace

void write_factors(const std::filesystem::path& dir,
                   const LowRankFactors<double>& factors) {
  write_dense(dir / "factors_U.txt", factors.U);
  write_dense(dir / "factors_S.txt", factors.S);
  write_dense(dir / "factors_V.txt", factors.V);
}

LowRankFactors<double> read_factors(const std::filesystem::path& dir) {
  LowRankFactors<double> f;
  f.U = read_dense(dir / "factors_U.txt");
  MatrixX<double> S = read_dense(dir / "factors_S.txt");
  f.S = S.col(0);
  f.V = read_dense(dir / "factors_V.txt");
  if (f.U.cols() != f.S.size() || f.V.cols() != f.S.size() ||
      f.U.rows() != f.V.rows()) {
    throw std::runtime_error("inconsistent factor dimensions in " +
                             dir.string());
  }
  return f;
}

void write_ranking(const std::filesystem::path& path,
                   const RankedList<double>& ranking) {
  std::ofstream out = open_out(path);
  out << "rank,item_id,score\n";
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    out << (r + 1) << ',' << ranking[r].id << ','
        << format_double(ranking[r].score) << '\n';
  }
}

void Metadata::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Metadata::set(const std::string& key, double value) {
  set(key, format_double(value));
}

void Metadata::set(const std::string& key, Index value) {
  set(key, std::to_string(value));
}

void Metadata::set(const std::string& key, bool value) {
  set(key, std::string(value ? "true" : "false"));
}

bool Metadata::contains(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

const std::string& Metadata::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw std::runtime_error("metadata key not found: " + key);
}

double Metadata::get_double(const std::string& key) const {
  double v = 0;
  if (!parse_double(get(key), v)) {
    throw std::runtime_error("metadata value for '" + key + "' is not a number");
  }
  return v;
}

void write_metadata(const std::filesystem::path& path, const Metadata& meta) {
  std::ofstream out = open_out(path);
  for (const auto& [k, v] : meta.entries()) {
    out << k << " = " << v << '\n';
  }
}

Metadata read_metadata(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  Metadata meta;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    const std::size_t sep = sv.find(" = ");
    if (sep == std::string_view::npos) {
      throw ParseError("expected 'key = value'", line_no);
    }
    meta.set(std::string(sv.substr(0, sep)), std::string(sv.substr(sep + 3)));
  }
  return meta;
}

}  // namespace skewrank::io
