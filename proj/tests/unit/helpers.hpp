#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "s2s/core_model.hpp"

namespace testing {

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// Mask from rows of 0/1 with the given neuron signs; label signs from `labels`.
inline s2s::MaskMatrix mask_from_rows(const std::vector<std::vector<int>>& rows, std::vector<int> signs,
                                      const Eigen::VectorXd& labels) {
  const int n = static_cast<int>(rows.size());
  const int m = static_cast<int>(signs.size());
  std::vector<std::uint8_t> entries;
  for (const auto& row : rows) {
    for (int x : row) entries.push_back(static_cast<std::uint8_t>(x));
  }
  std::vector<int> label_signs(n);
  for (int i = 0; i < n; ++i) label_signs[i] = s2s::sign_of(labels(i));
  return s2s::MaskMatrix(n, m, std::move(entries), std::move(signs), std::move(label_signs));
}

inline std::vector<std::vector<int>> rows_of(const s2s::MaskMatrix& mask) {
  std::vector<std::vector<int>> rows(mask.n(), std::vector<int>(mask.m()));
  for (int i = 0; i < mask.n(); ++i) {
    for (int j = 0; j < mask.m(); ++j) rows[i][j] = mask(i, j) ? 1 : 0;
  }
  return rows;
}

}  // namespace testing
