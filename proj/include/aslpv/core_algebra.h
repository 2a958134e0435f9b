#pragma once

// Word combinatorics over the scheduling alphabet and the dense matrix
// kernels shared by the realization algorithms.

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace aslpv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One matrix per letter of the alphabet; entry k belongs to letter k + 1.
using MatrixFamily = std::vector<Matrix>;

/// Relative rank tolerance used throughout (scaled by sigma_max and the
/// larger matrix dimension).
inline constexpr double kRankTolerance = 1e-9;

/// Basis-independent subspace comparison threshold.
inline constexpr double kSubspaceTolerance = 1e-8;

/// A finite sequence of letters in {1, ..., pdim}. The first letter is the
/// oldest one: for w = s1 s2 ... sk the matrix product is A_sk ... A_s1.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<int> letters);
  Word(std::initializer_list<int> letters);

  /// Parses "12" (single digits) or "1,10,2" (comma separated). The empty
  /// string and "e"/"eps" denote the empty word.
  static Word parse(std::string_view text);

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  int operator[](std::size_t i) const { return letters_[i]; }
  const std::vector<int>& letters() const { return letters_; }
  auto begin() const { return letters_.begin(); }
  auto end() const { return letters_.end(); }

  /// Letters from position `from` to the end.
  Word suffix_from(std::size_t from) const;
  Word concat(const Word& other) const;

  /// Throws DomainError unless every letter is in [1, pdim].
  void check_alphabet(int pdim) const;

  /// Digits joined when every letter is < 10, comma separated otherwise;
  /// the empty word serializes as "".
  std::string to_string() const;

  friend auto operator<=>(const Word&, const Word&) = default;
  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<int> letters_;
};

/// Ordering by (length, letters); the enumeration order of every word list.
bool shortlex_less(const Word& a, const Word& b);

/// All words of length <= max_length over {1..pdim}, epsilon first, then
/// each length in lexicographic order.
std::vector<Word> enumerate_words(int pdim, int max_length);

Matrix kron(const Matrix& a, const Matrix& b);

/// A_w = A_{s_k} ... A_{s_1}; identity for the empty word.
Matrix word_product(const MatrixFamily& family, const Word& w);

/// sum_s p_s (A_s (x) A_s).
Matrix ms_stability_matrix(const MatrixFamily& family,
                           const std::vector<double>& p);

double spectral_radius(const Matrix& m);

/// Orthonormal basis of the numerical column space. Columns are signed so
/// that the entry of largest magnitude is positive, which makes the result
/// independent of the SVD backend's sign conventions.
Matrix column_space_basis(const Matrix& m, double tol = kRankTolerance);

int numerical_rank(const Matrix& m, double tol = kRankTolerance);

/// Orthonormal basis of span{ A_w v : |w| <= steps, v in Im V0 }.
Matrix invariant_closure(const MatrixFamily& family, const Matrix& v0,
                         int steps);

/// Orthonormal basis of the orthogonal complement of Im(basis) in R^n.
/// `basis` must have orthonormal columns.
Matrix orthogonal_complement(const Matrix& basis);

/// max of the two mutual projection residuals of orthonormal bases; +inf
/// when the dimensions differ.
double subspace_distance(const Matrix& u, const Matrix& v);

bool subspaces_equal(const Matrix& u, const Matrix& v,
                     double tol = kSubspaceTolerance);

/// Checks that every family member is rows x cols; throws DomainError
/// naming `what` otherwise.
void check_family(const MatrixFamily& family, Eigen::Index rows,
                  Eigen::Index cols, const char* what);

/// Throws DomainError if any entry is NaN or infinite.
void check_finite(const Matrix& m, const char* what);

}  // namespace aslpv
