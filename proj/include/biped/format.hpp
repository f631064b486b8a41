#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "biped/types.hpp"

namespace biped {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Space-separated shortest round-trip representation.
std::string format_numbers(const double* data, int count);

template <typename Derived>
std::string format_numbers(const Eigen::DenseBase<Derived>& m) {
  // Row-major order regardless of storage.
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return format_numbers(flat.data(), static_cast<int>(flat.size()));
}

/// Whitespace-separated decimal numbers; throws std::invalid_argument.
std::vector<double> parse_numbers(std::string_view text);

}  // namespace biped
