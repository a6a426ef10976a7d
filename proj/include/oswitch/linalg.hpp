#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace oswitch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Matrix with row `row` and column `col` removed (the Q^{(i,j)} notation).
Matrix remove_row_col(const Matrix& m, Index row, Index col);

/// Vector with entry `k` removed (the c^{(j)} notation).
Vector remove_entry(const Vector& v, Index k);

/// Position of index i once index j has been deleted: i - 1{i > j}.
inline Index reduced_index(Index i, Index j) { return i > j ? i - 1 : i; }

/// Classical adjugate computed from cofactors: adj(A)_{r,c} = (-1)^{r+c} det A^{(c,r)}.
Matrix adjugate(const Matrix& a);

/// Representative of y in the slice {y_d = 0}, moving along (1,...,1).
inline Vector slice_representative(const Vector& y) {
  return y.array() - y(y.size() - 1);
}

/// splitmix64 finalizer; used to derive independent per-path/per-sample seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return mix_seed(mix_seed(seed ^ mix_seed(stream)) + index);
}

}  // namespace oswitch
