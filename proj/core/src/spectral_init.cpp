#include "tcomplete/spectral_init.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcomplete/errors.hpp"

namespace tcomplete {

namespace {

struct Entry {
  Index column;
  Index row;
  double value;
};

// (row, column) of omega in the mode-k unfolding.
std::pair<Index, Index> unfolding_position(const std::array<Index, 3>& idx, const Dims3& dims,
                                           int mode) {
  switch (mode) {
    case 1: return {idx[0], idx[1] * dims[2] + idx[2]};
    case 2: return {idx[1], idx[0] * dims[2] + idx[2]};
    default: return {idx[2], idx[0] * dims[1] + idx[1]};
  }
}

}  // namespace

SecondMomentEstimate second_moment_estimate(const ObservationSet& obs, int mode) {
  if (mode < 1 || mode > 3) {
    throw std::invalid_argument("second_moment_estimate: mode must be 1, 2 or 3, got " +
                                std::to_string(mode));
  }
  const Index n = obs.size();
  if (n < 2) throw std::invalid_argument("second_moment_estimate: need n >= 2");
  const Dims3& dims = obs.dims();
  const Index rows = dims[static_cast<std::size_t>(mode - 1)];
  const double scale = static_cast<double>(volume(dims));

  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(n));
  for (const Sample& s : obs.samples()) {
    const auto [row, column] = unfolding_position(s.index, dims, mode);
    entries.push_back({column, row, scale * s.value});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.column != b.column ? a.column < b.column : a.row < b.row;
  });

  // Within one column of S, merge duplicates into (row, sum, sum of squares);
  // then the column contributes s_a s_b off the diagonal and s_a^2 - q_a on it.
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rows, rows);
  std::vector<Index> col_rows;
  std::vector<double> col_sums;
  std::vector<double> col_squares;
  for (std::size_t begin = 0; begin < entries.size();) {
    std::size_t end = begin;
    col_rows.clear();
    col_sums.clear();
    col_squares.clear();
    while (end < entries.size() && entries[end].column == entries[begin].column) {
      const Entry& e = entries[end];
      if (col_rows.empty() || col_rows.back() != e.row) {
        col_rows.push_back(e.row);
        col_sums.push_back(0.0);
        col_squares.push_back(0.0);
      }
      col_sums.back() += e.value;
      col_squares.back() += e.value * e.value;
      ++end;
    }
    for (std::size_t a = 0; a < col_rows.size(); ++a) {
      acc(col_rows[a], col_rows[a]) += col_sums[a] * col_sums[a] - col_squares[a];
      for (std::size_t b = a + 1; b < col_rows.size(); ++b) {
        const double v = col_sums[a] * col_sums[b];
        acc(col_rows[a], col_rows[b]) += v;
        acc(col_rows[b], col_rows[a]) += v;
      }
    }
    begin = end;
  }

  const double nd = static_cast<double>(n);
  acc /= nd * (nd - 1.0);
  return {mode, std::move(acc), n};
}

Frame top_eigenspace(const Eigen::MatrixXd& symmetric, Index r) {
  const Index d = symmetric.rows();
  if (symmetric.cols() != d) throw std::invalid_argument("top_eigenspace: matrix must be square");
  if (r < 1 || r > d) throw std::invalid_argument("top_eigenspace: need 1 <= r <= d");
  const Eigen::MatrixXd sym = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericError("top_eigenspace: eigensolver failed");
  // Eigenvalues are ascending; take the last r columns in reverse.
  Eigen::MatrixXd top = eig.eigenvectors().rightCols(r).rowwise().reverse();
  return Frame::orthonormalize(top);
}

Frame top_eigenspace(const SecondMomentEstimate& estimate, Index r) {
  return top_eigenspace(estimate.matrix, r);
}

double top_eigenvalue(const SecondMomentEstimate& estimate) {
  const Eigen::MatrixXd sym = 0.5 * (estimate.matrix + estimate.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericError("top_eigenvalue: eigensolver failed");
  return eig.eigenvalues()(sym.rows() - 1);
}

TripleFrame spectral_frames(const ObservationSet& obs, const Dims3& ranks) {
  return {top_eigenspace(second_moment_estimate(obs, 1), ranks[0]),
          top_eigenspace(second_moment_estimate(obs, 2), ranks[1]),
          top_eigenspace(second_moment_estimate(obs, 3), ranks[2])};
}

TripleFrame initialize(const ObservationSet& obs, const Dims3& ranks, double mu0) {
  if (!(mu0 >= 1.0)) throw std::invalid_argument("initialize: mu0 must be >= 1");
  const TripleFrame raw = spectral_frames(obs, ranks);
  return {trim(raw.x, mu0), trim(raw.y, mu0), trim(raw.z, mu0)};
}

}  // namespace tcomplete
