#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace cqsim::problems {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Labeled sparse rows in CSR form. Column indices are 0-based.
struct Dataset {
  std::size_t d = 0;
  std::vector<double> labels;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;

  std::size_t rows() const { return labels.size(); }
  std::size_t row_begin(std::size_t r) const { return row_ptr[r]; }
  std::size_t row_end(std::size_t r) const { return row_ptr[r + 1]; }

  void push_row(double label, const std::vector<std::uint32_t>& c, const std::vector<double>& v) {
    labels.push_back(label);
    cols.insert(cols.end(), c.begin(), c.end());
    vals.insert(vals.end(), v.begin(), v.end());
    row_ptr.push_back(cols.size());
  }
};

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

inline double parse_double(std::string_view tok, std::size_t line, const char* what) {
  double v = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty())
    throw ParseError(line, std::string("malformed ") + what + " '" + std::string(tok) + "'");
  return v;
}

}  // namespace detail

/// Parses LibSVM text: "label idx:val idx:val ...", 1-based strictly
/// increasing indices. Labels map to -1/+1 by sign; 0 is rejected. Blank
/// lines are skipped; '#' comments are rejected.
inline Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> d_expected = std::nullopt) {
  Dataset ds;
  std::string text;
  std::size_t line = 0, max_index = 0;
  std::vector<std::uint32_t> c;
  std::vector<double> v;
  while (std::getline(in, text)) {
    ++line;
    std::string_view sv(text);
    if (sv.find('#') != std::string_view::npos) throw ParseError(line, "comments are not supported");
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string_view {
      while (pos < sv.size() && detail::is_space(sv[pos])) ++pos;
      const std::size_t start = pos;
      while (pos < sv.size() && !detail::is_space(sv[pos])) ++pos;
      return sv.substr(start, pos - start);
    };
    const auto label_tok = next_token();
    if (label_tok.empty()) continue;
    const double raw = detail::parse_double(label_tok, line, "label");
    if (raw == 0.0) throw ParseError(line, "label 0 cannot be mapped to -1/+1");
    c.clear();
    v.clear();
    std::size_t prev = 0;
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) throw ParseError(line, "expected idx:val, got '" + std::string(tok) + "'");
      const auto idx_tok = tok.substr(0, colon);
      long long idx = 0;
      auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (ec != std::errc{} || ptr != idx_tok.data() + idx_tok.size() || idx_tok.empty())
        throw ParseError(line, "malformed index '" + std::string(idx_tok) + "'");
      if (idx <= 0) throw ParseError(line, "feature indices are 1-based");
      if (static_cast<std::size_t>(idx) <= prev) throw ParseError(line, "feature indices must be strictly increasing");
      if (idx > static_cast<long long>(UINT32_MAX)) throw ParseError(line, "feature index too large");
      prev = static_cast<std::size_t>(idx);
      c.push_back(static_cast<std::uint32_t>(idx - 1));
      v.push_back(detail::parse_double(tok.substr(colon + 1), line, "value"));
    }
    if (d_expected && prev > *d_expected)
      throw ParseError(line, "feature index " + std::to_string(prev) + " exceeds expected dimension");
    max_index = std::max(max_index, prev);
    ds.push_row(raw > 0 ? 1.0 : -1.0, c, v);
  }
  ds.d = d_expected ? *d_expected : max_index;
  return ds;
}

inline Dataset load_libsvm(const std::string& path, std::optional<std::size_t> d_expected = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_libsvm: cannot open " + path);
  return parse_libsvm(in, d_expected);
}

/// Contiguous split into n shards of floor(N/n) rows; the first N mod n
/// shards take one extra row.
inline std::vector<Dataset> shard(const Dataset& ds, std::size_t n) {
  if (n == 0 || n > ds.rows()) throw std::invalid_argument("shard: need 1 <= n <= rows");
  const std::size_t base = ds.rows() / n, extra = ds.rows() % n;
  std::vector<Dataset> out(n);
  std::size_t r = 0;
  for (std::size_t s = 0; s < n; ++s) {
    out[s].d = ds.d;
    const std::size_t count = base + (s < extra ? 1 : 0);
    for (std::size_t k = 0; k < count; ++k, ++r) {
      const std::size_t b = ds.row_begin(r), e = ds.row_end(r);
      out[s].labels.push_back(ds.labels[r]);
      out[s].cols.insert(out[s].cols.end(), ds.cols.begin() + b, ds.cols.begin() + e);
      out[s].vals.insert(out[s].vals.end(), ds.vals.begin() + b, ds.vals.begin() + e);
      out[s].row_ptr.push_back(out[s].cols.size());
    }
  }
  return out;
}

}  // namespace cqsim::problems
