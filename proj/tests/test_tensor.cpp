#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete {
namespace {

using testing::kron;
using testing::naive_multilinear_product;
using testing::random_tensor;

Tensor3 example_rank_one() {
  Eigen::VectorXd x(2), y(2), z(2);
  x << 1, 2;
  y << 1, 0;
  z << 1, 3;
  return outer(x, y, z);
}

TEST(Tensor3, RejectsWrongValueCount) {
  EXPECT_THROW(Tensor3({2, 2, 2}, std::vector<double>(7)), std::invalid_argument);
}

TEST(Tensor3, AccessorMatchesStorageOrder) {
  Tensor3 t({2, 3, 4});
  for (Index k = 0; k < t.size(); ++k) t.values()[k] = static_cast<double>(k);
  EXPECT_EQ(t(1, 2, 3), 23.0);
  EXPECT_EQ(t(0, 1, 0), 4.0);
  EXPECT_EQ(t(1, 0, 0), 12.0);
}

TEST(Unfold, RankOneModeOne) {
  const UnfoldedMatrix m = unfold(example_rank_one(), 1);
  Eigen::MatrixXd expected(2, 4);
  expected << 1, 3, 0, 0, 2, 6, 0, 0;
  EXPECT_EQ(m.matrix, expected);
}

TEST(Unfold, ColumnConventionModesTwoAndThree) {
  Tensor3 t({2, 3, 4});
  for (Index k = 0; k < t.size(); ++k) t.values()[k] = static_cast<double>(k);
  const Eigen::MatrixXd m2 = unfold(t, 2).matrix;
  const Eigen::MatrixXd m3 = unfold(t, 3).matrix;
  ASSERT_EQ(m2.rows(), 3);
  ASSERT_EQ(m2.cols(), 8);
  ASSERT_EQ(m3.rows(), 4);
  ASSERT_EQ(m3.cols(), 6);
  EXPECT_EQ(m2(2, 1 * 4 + 3), t(1, 2, 3));
  EXPECT_EQ(m3(3, 1 * 3 + 2), t(1, 2, 3));
  EXPECT_EQ(m3(1, 0 * 3 + 2), t(0, 2, 1));
}

TEST(Unfold, InvalidModeThrows) {
  EXPECT_THROW(unfold(example_rank_one(), 0), std::invalid_argument);
  EXPECT_THROW(unfold(example_rank_one(), 4), std::invalid_argument);
}

TEST(Refold, InvertsTheExample) {
  EXPECT_EQ(refold(unfold(example_rank_one(), 1), {2, 2, 2}), example_rank_one());
}

TEST(Refold, ZeroMatrixGivesZeroTensor) {
  EXPECT_EQ(refold(Eigen::MatrixXd::Zero(3, 8), 2, {2, 3, 4}), Tensor3({2, 3, 4}));
}

TEST(Refold, ShapeMismatchThrows) {
  EXPECT_THROW(refold(Eigen::MatrixXd::Zero(3, 7), 2, {2, 3, 4}), std::invalid_argument);
  EXPECT_THROW(refold(Eigen::MatrixXd::Zero(2, 12), 2, {2, 3, 4}), std::invalid_argument);
}

TEST(Refold, RoundTripIsBitExactOnRandomTensors) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Dims3 dims{1 + static_cast<Index>(rng.bounded(5)), 1 + static_cast<Index>(rng.bounded(5)),
                     1 + static_cast<Index>(rng.bounded(5))};
    const Tensor3 a = random_tensor(dims, rng);
    for (int mode = 1; mode <= 3; ++mode) {
      const UnfoldedMatrix m = unfold(a, mode);
      ASSERT_EQ(refold(m, dims), a);
      ASSERT_EQ(unfold(refold(m, dims), mode).matrix, m.matrix);
    }
  }
}

TEST(Unfold, KroneckerFactorizationAllModes) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor3 core = random_tensor({1, 2, 1}, rng);
    const Eigen::MatrixXd x = testing::gaussian_matrix(2, 1, rng);
    const Eigen::MatrixXd y = testing::gaussian_matrix(3, 2, rng);
    const Eigen::MatrixXd z = testing::gaussian_matrix(2, 1, rng);
    const Tensor3 full = multilinear_product(core, x, y, z);
    const Eigen::MatrixXd m1 = x * unfold(core, 1).matrix * kron(y, z).transpose();
    const Eigen::MatrixXd m2 = y * unfold(core, 2).matrix * kron(x, z).transpose();
    const Eigen::MatrixXd m3 = z * unfold(core, 3).matrix * kron(x, y).transpose();
    EXPECT_LE((unfold(full, 1).matrix - m1).norm(), 1e-12 * m1.norm());
    EXPECT_LE((unfold(full, 2).matrix - m2).norm(), 1e-12 * m2.norm());
    EXPECT_LE((unfold(full, 3).matrix - m3).norm(), 1e-12 * m3.norm());
  }
}

TEST(MultilinearProduct, IdentityFactorsReturnCore) {
  Rng rng(3);
  const Tensor3 core = random_tensor({2, 3, 2}, rng);
  const Tensor3 out = multilinear_product(core, Eigen::MatrixXd::Identity(2, 2),
                                          Eigen::MatrixXd::Identity(3, 3),
                                          Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(out, core);
}

TEST(MultilinearProduct, OneByOneCoreIsScaledRankOne) {
  Eigen::VectorXd x(3), y(2), z(4);
  x << 1, -2, 0.5;
  y << 3, 1;
  z << 0.25, 1, -1, 2;
  const Tensor3 core({1, 1, 1}, {2.5});
  const Tensor3 out = multilinear_product(core, x, y, z);
  const Tensor3 direct = outer(2.5 * x, y, z);
  EXPECT_LE(testing::relative_difference(out, direct), 1e-15);
}

TEST(MultilinearProduct, MatchesNaiveLoops) {
  Rng rng(8);
  const Tensor3 core = random_tensor({2, 2, 2}, rng);
  const Eigen::MatrixXd x = testing::gaussian_matrix(3, 2, rng);
  const Eigen::MatrixXd y = testing::gaussian_matrix(4, 2, rng);
  const Eigen::MatrixXd z = testing::gaussian_matrix(2, 2, rng);
  EXPECT_LE(testing::relative_difference(multilinear_product(core, x, y, z),
                                         naive_multilinear_product(core, x, y, z)),
            1e-12);
}

TEST(MultilinearProduct, DimensionMismatchThrows) {
  const Tensor3 core({2, 2, 2});
  EXPECT_THROW(multilinear_product(core, Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 2),
                                   Eigen::MatrixXd::Zero(3, 2)),
               std::invalid_argument);
}

TEST(Inner, BasicIdentities) {
  Rng rng(1);
  const Tensor3 a = random_tensor({3, 2, 4}, rng);
  EXPECT_NEAR(inner(a, a), std::pow(norm(a), 2), 1e-12 * inner(a, a));
  EXPECT_EQ(inner(a, Tensor3({3, 2, 4})), 0.0);
  EXPECT_THROW(inner(a, Tensor3({3, 2, 3})), std::invalid_argument);
}

TEST(Inner, RankOneSeparability) {
  Rng rng(2);
  const Eigen::VectorXd x = testing::gaussian_matrix(3, 1, rng), x2 = testing::gaussian_matrix(3, 1, rng);
  const Eigen::VectorXd y = testing::gaussian_matrix(4, 1, rng), y2 = testing::gaussian_matrix(4, 1, rng);
  const Eigen::VectorXd z = testing::gaussian_matrix(2, 1, rng), z2 = testing::gaussian_matrix(2, 1, rng);
  const double expected = x.dot(x2) * y.dot(y2) * z.dot(z2);
  EXPECT_NEAR(inner(outer(x, y, z), outer(x2, y2, z2)), expected, 1e-12 * std::abs(expected) + 1e-14);
}

TEST(Norm, OnesAndZeros) {
  const Tensor3 ones({2, 2, 2}, std::vector<double>(8, 1.0));
  EXPECT_DOUBLE_EQ(norm(ones, NormKind::Frobenius), std::sqrt(8.0));
  EXPECT_DOUBLE_EQ(norm(ones, NormKind::Max), 1.0);
  EXPECT_EQ(norm(Tensor3({2, 3, 1}), NormKind::Frobenius), 0.0);
  EXPECT_EQ(norm(Tensor3({2, 3, 1}), NormKind::Max), 0.0);
}

TEST(Norm, FrobeniusIsUnfoldingInvariant) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor3 a = random_tensor({3, 4, 5}, rng);
    for (int mode = 1; mode <= 3; ++mode) {
      EXPECT_NEAR(norm(a), unfold(a, mode).matrix.norm(), 1e-13 * norm(a));
    }
  }
}

TEST(SpectralLowerBound, RankOneAttainsScale) {
  Rng rng(6);
  const Eigen::VectorXd x = testing::gaussian_matrix(4, 1, rng).normalized();
  const Eigen::VectorXd y = testing::gaussian_matrix(3, 1, rng).normalized();
  const Eigen::VectorXd z = testing::gaussian_matrix(5, 1, rng).normalized();
  const Tensor3 a = outer(-2.75 * x, y, z);
  EXPECT_NEAR(spectral_lower_bound(a), 2.75, 1e-10);
}

TEST(SpectralLowerBound, OdecoEqualsLargestWeight) {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto odeco = testing::random_odeco({6, 5, 7}, {3.0, 1.5, 0.7}, rng);
    EXPECT_NEAR(spectral_lower_bound(odeco.tensor, {.seed = static_cast<std::uint64_t>(trial)}), 3.0,
                1e-8);
  }
}

TEST(SpectralLowerBound, BoundedByMaxAndFrobenius) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor3 a = random_tensor({3, 4, 3}, rng);
    const double s = spectral_lower_bound(a, {.sweeps = 20, .random_restarts = 2});
    ASSERT_GE(s, norm(a, NormKind::Max));
    ASSERT_LE(s, norm(a) * (1 + 1e-12));
  }
}

TEST(SpectralLowerBound, ZeroTensorAndBadSweeps) {
  EXPECT_EQ(spectral_lower_bound(Tensor3({2, 2, 2})), 0.0);
  EXPECT_THROW(spectral_lower_bound(Tensor3({2, 2, 2}), {.sweeps = 0}), std::invalid_argument);
}

TEST(MultilinearRanks, Examples) {
  EXPECT_EQ(multilinear_ranks(example_rank_one()), (std::array<Index, 3>{1, 1, 1}));
  EXPECT_EQ(multilinear_ranks(Tensor3({3, 3, 3})), (std::array<Index, 3>{0, 0, 0}));

  Rng rng(21);
  // A generic 2x3x2 core has full multilinear rank (2, 3, 2).
  const Tensor3 core = random_tensor({2, 3, 2}, rng);
  const Tensor3 a = multilinear_product(core, testing::random_frame(6, 2, rng).matrix(),
                                        testing::random_frame(7, 3, rng).matrix(),
                                        testing::random_frame(5, 2, rng).matrix());
  EXPECT_EQ(multilinear_ranks(a), (std::array<Index, 3>{2, 3, 2}));
  EXPECT_THROW(multilinear_ranks(a, 0.0), std::invalid_argument);
}

TEST(NormChain, OdecoTensors) {
  Rng rng(30);
  for (int trial = 0; trial < 10; ++trial) {
    const auto odeco = testing::random_odeco({5, 6, 4}, {2.0, 1.0}, rng);
    const double spectral = 2.0;
    EXPECT_LE(norm(odeco.tensor, NormKind::Max), spectral);
    EXPECT_LE(spectral, norm(odeco.tensor));
    EXPECT_LE(norm(odeco.tensor), std::sqrt(8.0) * spectral);
  }
}

}  // namespace
}  // namespace tcomplete
