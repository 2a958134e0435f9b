#include "aslpv/core_algebra.h"

#include <cmath>

#include <gtest/gtest.h>

#include "aslpv/errors.h"
#include "support/random_systems.h"

namespace aslpv {
namespace {

using testing::Rng;
using testing::random_matrix;

TEST(WordTest, ParsesDigitsCommasAndEpsilon) {
  EXPECT_EQ(Word::parse("12"), (Word{1, 2}));
  EXPECT_EQ(Word::parse("1,10,2"), (Word{1, 10, 2}));
  EXPECT_TRUE(Word::parse("").empty());
  EXPECT_TRUE(Word::parse("e").empty());
  EXPECT_TRUE(Word::parse("eps").empty());
  EXPECT_THROW(Word::parse("1a"), DomainError);
  EXPECT_THROW(Word::parse("0"), DomainError);
}

TEST(WordTest, SerializesOneBasedDigits) {
  EXPECT_EQ((Word{1, 2}).to_string(), "12");
  EXPECT_EQ(Word().to_string(), "");
  EXPECT_EQ((Word{1, 12}).to_string(), "1,12");
  EXPECT_EQ(Word::parse((Word{3, 1, 2}).to_string()), (Word{3, 1, 2}));
}

TEST(WordTest, EmptyWordIsConcatenationIdentity) {
  const Word w{2, 1, 1};
  EXPECT_EQ(Word().concat(w), w);
  EXPECT_EQ(w.concat(Word()), w);
  EXPECT_EQ((Word{1}).concat(Word{2, 3}), (Word{1, 2, 3}));
}

TEST(WordTest, CheckAlphabetRejectsLargeLetters) {
  EXPECT_NO_THROW((Word{1, 2}).check_alphabet(2));
  EXPECT_THROW((Word{1, 3}).check_alphabet(2), DomainError);
}

TEST(WordTest, EnumerationIsShortlex) {
  const auto words = enumerate_words(2, 2);
  ASSERT_EQ(words.size(), 7u);
  const std::vector<std::string> expected = {"", "1", "2", "11", "12", "21", "22"};
  for (std::size_t i = 0; i < words.size(); ++i) {
    EXPECT_EQ(words[i].to_string(), expected[i]);
  }
  for (std::size_t i = 1; i < words.size(); ++i) {
    EXPECT_TRUE(shortlex_less(words[i - 1], words[i]));
  }
  EXPECT_EQ(enumerate_words(3, 3).size(), 1u + 3u + 9u + 27u);
}

TEST(KronTest, SmallCases) {
  EXPECT_TRUE(kron(Matrix::Identity(2, 2), Matrix::Identity(2, 2))
                  .isApprox(Matrix::Identity(4, 4)));
  EXPECT_DOUBLE_EQ(kron(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 3.0))(0, 0),
                   6.0);
  Matrix nil(2, 2);
  nil << 0, 1, 0, 0;
  Matrix expected = Matrix::Zero(4, 4);
  expected.topLeftCorner(2, 2) = nil;
  expected.bottomRightCorner(2, 2) = nil;
  EXPECT_EQ(kron(Matrix::Identity(2, 2), nil), expected);
}

TEST(KronTest, ShapeAndEntries) {
  Rng rng(1);
  const Matrix a = random_matrix(rng, 2, 3);
  const Matrix b = random_matrix(rng, 4, 1);
  const Matrix k = kron(a, b);
  ASSERT_EQ(k.rows(), 8);
  ASSERT_EQ(k.cols(), 3);
  EXPECT_DOUBLE_EQ(k(5, 2), a(1, 2) * b(1, 0));
}

TEST(KronTest, RejectsNonFinite) {
  Matrix bad = Matrix::Zero(1, 1);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(kron(bad, bad), DomainError);
}

TEST(WordProductTest, EmptyWordIsIdentity) {
  const MatrixFamily family = {Matrix::Constant(3, 3, 2.0)};
  EXPECT_EQ(word_product(family, Word()), Matrix::Identity(3, 3));
}

TEST(WordProductTest, LaterLettersMultiplyFromTheLeft) {
  const MatrixFamily scalars = {Matrix::Constant(1, 1, 2.0),
                                Matrix::Constant(1, 1, 3.0)};
  EXPECT_DOUBLE_EQ(word_product(scalars, Word{1, 2})(0, 0), 6.0);

  Matrix a1(2, 2), a2(2, 2), expected(2, 2);
  a1 << 1, 1, 0, 1;
  a2 << 1, 0, 2, 1;
  expected << 1, 1, 2, 3;
  EXPECT_EQ(word_product({a1, a2}, Word{1, 2}), expected);
}

TEST(WordProductTest, RejectsLetterOutsideFamily) {
  const MatrixFamily family = {Matrix::Identity(2, 2)};
  EXPECT_THROW(word_product(family, Word{2}), DomainError);
}

TEST(WordProductTest, ConcatenationReversesIntoLeftMultiplication) {
  Rng rng(2);
  const MatrixFamily family = {random_matrix(rng, 3, 3), random_matrix(rng, 3, 3),
                               random_matrix(rng, 3, 3)};
  const auto words = enumerate_words(3, 2);
  for (const Word& u : words) {
    for (const Word& v : words) {
      const Matrix lhs = word_product(family, u.concat(v));
      const Matrix rhs = word_product(family, v) * word_product(family, u);
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(StabilityMatrixTest, ScalarAndZeroCases) {
  const Matrix m = ms_stability_matrix({Matrix::Constant(1, 1, 0.5)}, {1.0});
  EXPECT_DOUBLE_EQ(m(0, 0), 0.25);
  const Matrix z = ms_stability_matrix({Matrix::Zero(2, 2), Matrix::Zero(2, 2)},
                                       {1.0, 1.0});
  EXPECT_TRUE(z.isZero());
  EXPECT_EQ(z.rows(), 4);
}

TEST(StabilityMatrixTest, RejectsMismatchedFamily) {
  EXPECT_THROW(ms_stability_matrix({Matrix::Zero(2, 2), Matrix::Zero(3, 3)},
                                   {1.0, 1.0}),
               DomainError);
  EXPECT_THROW(ms_stability_matrix({Matrix::Zero(2, 2)}, {0.0}), DomainError);
}

TEST(SpectralRadiusTest, KnownValues) {
  EXPECT_NEAR(spectral_radius(Matrix::Identity(3, 3)), 1.0, 1e-14);
  Matrix nil(2, 2);
  nil << 0, 1, 0, 0;
  EXPECT_NEAR(spectral_radius(nil), 0.0, 1e-14);
  // Characteristic polynomial l^2 - 0.5 l - 0.04.
  Matrix a(2, 2);
  a << 0.4, 0.4, 0.2, 0.1;
  const double root = (0.5 + std::sqrt(0.25 + 4 * 0.04)) / 2.0;
  EXPECT_NEAR(spectral_radius(a), root, 1e-12);
  EXPECT_NEAR(root, 0.5702, 1e-4);
  EXPECT_THROW(spectral_radius(Matrix::Zero(2, 3)), DomainError);
}

TEST(SpectralRadiusTest, KroneckerSquareProperty) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_matrix(rng, 1 + trial % 4, 1 + trial % 4);
    const double r = spectral_radius(a);
    EXPECT_NEAR(spectral_radius(kron(a, a)), r * r, 1e-10 * std::max(1.0, r * r));
  }
}

TEST(ColumnSpaceTest, ZeroIdentityAndRankOne) {
  EXPECT_EQ(column_space_basis(Matrix::Zero(3, 2)).cols(), 0);
  const Matrix i4 = column_space_basis(Matrix::Identity(4, 4));
  EXPECT_EQ(i4.cols(), 4);
  EXPECT_TRUE((i4.transpose() * i4).isIdentity(1e-12));

  Matrix m(2, 2);
  m << 1, 2, 2, 4;
  const Matrix b = column_space_basis(m);
  ASSERT_EQ(b.cols(), 1);
  EXPECT_NEAR(b(0, 0), 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(b(1, 0), 2.0 / std::sqrt(5.0), 1e-12);
}

TEST(ColumnSpaceTest, RankMatchesExactEliminationOnIntegerMatrices) {
  Rng rng(4);
  std::uniform_int_distribution<int> entry(-3, 3);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = dim(rng), cols = dim(rng);
    // Low-rank products exercise genuine rank drops.
    const int inner = 1 + trial % std::max(rows, cols);
    Eigen::MatrixXi left(rows, inner), right(inner, cols);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < inner; ++k) left(i, k) = entry(rng);
    for (int k = 0; k < inner; ++k)
      for (int j = 0; j < cols; ++j) right(k, j) = entry(rng);
    const Eigen::MatrixXi m = left * right;
    EXPECT_EQ(numerical_rank(m.cast<double>()), testing::exact_integer_rank(m))
        << m;
    EXPECT_EQ(column_space_basis(m.cast<double>()).cols(),
              testing::exact_integer_rank(m));
  }
}

TEST(InvariantClosureTest, SmallCases) {
  Rng rng(5);
  const MatrixFamily random = {random_matrix(rng, 3, 3), random_matrix(rng, 3, 3)};
  EXPECT_EQ(invariant_closure(random, Matrix::Identity(3, 3), 2).cols(), 3);

  const Matrix e1 = Matrix::Identity(2, 1);
  const Matrix zero_closure =
      invariant_closure({Matrix::Zero(2, 2), Matrix::Zero(2, 2)}, e1, 1);
  EXPECT_TRUE(subspaces_equal(zero_closure, e1));

  Matrix shift(2, 2);
  shift << 0, 0, 1, 0;
  EXPECT_EQ(invariant_closure({shift}, e1, 1).cols(), 2);
  EXPECT_EQ(invariant_closure({shift}, e1, 0).cols(), 1);
}

TEST(InvariantClosureTest, SaturatesAfterNMinusOneSteps) {
  Rng rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 4;
    // Block-triangular families keep a proper invariant subspace.
    MatrixFamily family;
    for (int s = 0; s < 2; ++s) {
      Matrix a = random_matrix(rng, n, n);
      a.bottomLeftCorner(n / 2, n - n / 2).setZero();
      family.push_back(a);
    }
    Matrix v0 = Matrix::Zero(n, 1);
    v0(0, 0) = 1.0;
    const Matrix at_n_minus_1 = invariant_closure(family, v0, n - 1);
    const Matrix at_n = invariant_closure(family, v0, n);
    EXPECT_LT(subspace_distance(at_n_minus_1, at_n), 1e-10);
    for (const Matrix& a : family) {
      const Matrix image = a * at_n;
      const Matrix residual = image - at_n * (at_n.transpose() * image);
      EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(InvariantClosureTest, RejectsRowMismatch) {
  EXPECT_THROW(invariant_closure({Matrix::Identity(2, 2)}, Matrix::Zero(3, 1), 1),
               DomainError);
}

TEST(SubspaceTest, DistanceIsBasisIndependent) {
  Rng rng(7);
  const Matrix basis = column_space_basis(random_matrix(rng, 5, 2));
  const Matrix rotated = column_space_basis(basis * random_matrix(rng, 2, 2));
  EXPECT_TRUE(subspaces_equal(basis, rotated));
  const Matrix complement = orthogonal_complement(basis);
  EXPECT_EQ(complement.cols(), 3);
  EXPECT_LT((basis.transpose() * complement).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(std::isinf(subspace_distance(basis, complement)));
}

}  // namespace
}  // namespace aslpv
