#pragma once

// Binary-labelled datasets in svmlight/libsvm text format.
//
//   <label> <index>:<value> <index>:<value> ... [# comment]
//
// Indices are positive and strictly increasing within a line. Labels are
// normalized to -1/+1: labels already in {-1,+1} are kept, otherwise the
// larger of the two distinct raw labels becomes +1. Files may be gzip
// compressed (detected by magic bytes).

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "budgetsvm/errors.hpp"
#include "budgetsvm/kernel.hpp"
#include "budgetsvm/random.hpp"

namespace budgetsvm {

struct Dataset {
  std::vector<SparseVector> points;
  std::vector<int> labels;  // each -1 or +1
  FeatureIndex max_feature_index = 0;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }

  void push_back(SparseVector x, int y) {
    max_feature_index = std::max(max_feature_index, x.max_index());
    points.push_back(std::move(x));
    labels.push_back(y);
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline bool parse_real(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size() && std::isfinite(out);
}

inline bool parse_index(std::string_view token, FeatureIndex& out) {
  if (token.empty()) return false;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size() && out > 0;
}

inline std::string format_real(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace detail

/// Parses svmlight text. Throws ParseError (with 1-based line) on malformed
/// tokens, non-increasing indices, more than two distinct labels, or input
/// without any data line.
inline Dataset parse_svmlight(std::istream& in) {
  std::vector<SparseVector> points;
  std::vector<double> raw_labels;
  std::vector<std::size_t> line_of;
  std::set<double> distinct;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    rest = detail::trim(rest);
    if (rest.empty()) continue;

    auto next_token = [&rest]() {
      const auto end = rest.find_first_of(" \t");
      auto token = rest.substr(0, end);
      rest = end == std::string_view::npos ? std::string_view{} : detail::trim(rest.substr(end));
      return token;
    };

    const auto label_token = next_token();
    double label;
    if (!detail::parse_real(label_token, label)) {
      throw ParseError(line_no, "malformed label '" + std::string(label_token) + "'");
    }
    std::vector<Entry> entries;
    while (!rest.empty()) {
      const auto token = next_token();
      const auto colon = token.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "expected index:value, got '" + std::string(token) + "'");
      }
      if (token.substr(0, colon) == "qid") continue;
      FeatureIndex index;
      double value;
      if (!detail::parse_index(token.substr(0, colon), index)) {
        throw ParseError(line_no, "malformed feature index in '" + std::string(token) + "'");
      }
      if (!detail::parse_real(token.substr(colon + 1), value)) {
        throw ParseError(line_no, "malformed feature value in '" + std::string(token) + "'");
      }
      if (!entries.empty() && index <= entries.back().index) {
        throw ParseError(line_no, "feature indices must be strictly increasing");
      }
      entries.push_back({index, value});
    }
    if (distinct.insert(label).second && distinct.size() > 2) {
      throw ParseError(line_no, "more than two distinct labels (binary classification only)");
    }
    points.emplace_back(std::move(entries));
    raw_labels.push_back(label);
    line_of.push_back(line_no);
  }
  if (in.bad()) throw IoError("read error while parsing svmlight data");
  if (points.empty()) throw ParseError(0, "no data lines in input");

  const bool already_signed =
      std::all_of(distinct.begin(), distinct.end(), [](double v) { return v == 1.0 || v == -1.0; });
  const double positive = *distinct.rbegin();

  Dataset ds;
  for (std::size_t k = 0; k < points.size(); ++k) {
    int y;
    if (already_signed) {
      y = raw_labels[k] > 0 ? 1 : -1;
    } else if (distinct.size() == 2) {
      y = raw_labels[k] == positive ? 1 : -1;
    } else {
      // A single non-signed class (e.g. a one-class test file): sign decides.
      y = raw_labels[k] > 0 ? 1 : -1;
    }
    ds.push_back(std::move(points[k]), y);
  }
  return ds;
}

inline Dataset parse_svmlight(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_svmlight(in);
}

/// Reads a whole file, transparently inflating gzip input.
inline std::string read_file_bytes(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open '" + path + "'");
  unsigned char magic[2] = {0, 0};
  probe.read(reinterpret_cast<char*>(magic), 2);
  const bool gz = probe.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
  if (!gz) {
    probe.clear();
    probe.seekg(0);
    return std::string(std::istreambuf_iterator<char>(probe), {});
  }
  probe.close();

  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw IoError("cannot open '" + path + "'");
  std::string out;
  char buf[1 << 16];
  int got;
  while ((got = gzread(file, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(got));
  const bool failed = got < 0;
  gzclose(file);
  if (failed) throw IoError("corrupt gzip stream in '" + path + "'");
  return out;
}

inline Dataset load_svmlight(const std::string& path) {
  return parse_svmlight(std::string_view(read_file_bytes(path)));
}

inline void write_svmlight(std::ostream& out, const Dataset& ds) {
  for (std::size_t k = 0; k < ds.size(); ++k) {
    out << (ds.labels[k] > 0 ? "+1" : "-1");
    for (const auto& e : ds.points[k].entries()) {
      out << ' ' << e.index << ':' << detail::format_real(e.value);
    }
    out << '\n';
  }
}

/// Presentation order for epoch `epoch` (epochs count from 1). A uniformly
/// random permutation of 0..n-1, deterministic in (seed, epoch).
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t epoch,
                                                 std::uint64_t seed) {
  return random_permutation(n, seed, epoch);
}

inline constexpr std::uint64_t kSplitStream = 0xD1B54A32D192ED03ULL;

/// Random train/test split with |train| = floor(fraction * n). Both parts
/// keep the original relative order.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidFraction("split fraction must lie in (0, 1)");
  }
  const auto n = ds.size();
  const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw InvalidFraction("split fraction leaves the train or test part empty");
  }
  auto perm = random_permutation(n, seed, kSplitStream);
  std::vector<bool> in_train(n, false);
  for (std::size_t k = 0; k < n_train; ++k) in_train[perm[k]] = true;

  Dataset train, test;
  for (std::size_t k = 0; k < n; ++k) {
    (in_train[k] ? train : test).push_back(ds.points[k], ds.labels[k]);
  }
  return {std::move(train), std::move(test)};
}

/// Per-feature min-max scaling to [0, 1], fitted on one dataset and
/// applicable to others. Constant features are left untouched.
class MinMaxScaler {
 public:
  explicit MinMaxScaler(const Dataset& fit_on)
      : lo_(fit_on.max_feature_index + 1, 0.0), hi_(fit_on.max_feature_index + 1, 0.0) {
    // Implicit zeros count toward the range.
    for (const auto& x : fit_on.points) {
      for (const auto& e : x.entries()) {
        lo_[e.index] = std::min(lo_[e.index], e.value);
        hi_[e.index] = std::max(hi_[e.index], e.value);
      }
    }
  }

  SparseVector transform(const SparseVector& x) const {
    std::vector<Entry> out;
    std::size_t k = 0;
    auto entries = x.entries();
    for (FeatureIndex i = 1; i < lo_.size(); ++i) {
      double v = 0.0;
      if (k < entries.size() && entries[k].index == i) v = entries[k++].value;
      const double range = hi_[i] - lo_[i];
      if (range > 0.0) v = std::clamp((v - lo_[i]) / range, 0.0, 1.0);
      out.push_back({i, v});
    }
    for (; k < entries.size(); ++k) out.push_back(entries[k]);  // unseen features
    return SparseVector(std::move(out));
  }

  Dataset transform(const Dataset& ds) const {
    Dataset out;
    for (std::size_t k = 0; k < ds.size(); ++k) out.push_back(transform(ds.points[k]), ds.labels[k]);
    return out;
  }

 private:
  std::vector<double> lo_, hi_;
};

}  // namespace budgetsvm
