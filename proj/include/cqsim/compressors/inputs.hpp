#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "cqsim/numkit/linalg.hpp"

namespace cqsim::compressors {

/// Per-client input vectors. Either n distinct vectors, or one vector shared
/// by all n clients (homogeneous rounds); the latter is never copied n times
/// unless a caller asks for materialize().
class ClientInputs {
 public:
  static ClientInputs distinct(std::vector<Vector> rows) {
    if (rows.empty()) throw std::invalid_argument("ClientInputs: need at least one client");
    const std::size_t d = rows.front().size();
    for (const auto& r : rows)
      if (r.size() != d) throw std::invalid_argument("ClientInputs: ragged input vectors");
    ClientInputs in;
    in.n_ = rows.size();
    in.rows_ = std::move(rows);
    return in;
  }

  static ClientInputs replicated(Vector row, std::size_t n) {
    if (n == 0) throw std::invalid_argument("ClientInputs: need at least one client");
    ClientInputs in;
    in.n_ = n;
    in.rows_.push_back(std::move(row));
    in.replicated_ = true;
    return in;
  }

  std::size_t n() const { return n_; }
  std::size_t d() const { return rows_.front().size(); }
  bool is_replicated() const { return replicated_; }
  const Vector& operator[](std::size_t i) const { return replicated_ ? rows_.front() : rows_[i]; }

  std::vector<Vector> materialize() const {
    if (!replicated_) return rows_;
    return std::vector<Vector>(n_, rows_.front());
  }

  Vector mean() const {
    if (replicated_) return rows_.front();
    return numkit::mean_of(rows_);
  }

  /// (1/n) sum ||a_i||^2
  double mean_square_norm() const {
    if (replicated_) return numkit::norm_sq(rows_.front());
    double s = 0.0;
    for (const auto& r : rows_) s += numkit::norm_sq(r);
    return s / static_cast<double>(n_);
  }

 private:
  std::size_t n_ = 0;
  std::vector<Vector> rows_;
  bool replicated_ = false;
};

}  // namespace cqsim::compressors
