#include "aslpv/core_algebra.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "aslpv/errors.h"

namespace aslpv {

Word::Word(std::vector<int> letters) : letters_(std::move(letters)) {
  for (int letter : letters_) {
    if (letter < 1) throw DomainError("word letters are 1-based");
  }
}

Word::Word(std::initializer_list<int> letters)
    : Word(std::vector<int>(letters)) {}

Word Word::parse(std::string_view text) {
  if (text.empty() || text == "e" || text == "eps") return Word{};
  std::vector<int> letters;
  auto parse_int = [&](std::string_view token) {
    int value = 0;
    auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || value < 1) {
      throw DomainError("invalid word letter '" + std::string(token) + "'");
    }
    letters.push_back(value);
  };
  if (text.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t comma = text.find(',', start);
      const std::size_t stop =
          comma == std::string_view::npos ? text.size() : comma;
      parse_int(text.substr(start, stop - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    for (std::size_t i = 0; i < text.size(); ++i) parse_int(text.substr(i, 1));
  }
  return Word(std::move(letters));
}

Word Word::suffix_from(std::size_t from) const {
  if (from >= letters_.size()) return Word{};
  return Word(std::vector<int>(letters_.begin() + from, letters_.end()));
}

Word Word::concat(const Word& other) const {
  std::vector<int> joined = letters_;
  joined.insert(joined.end(), other.letters_.begin(), other.letters_.end());
  return Word(std::move(joined));
}

void Word::check_alphabet(int pdim) const {
  for (int letter : letters_) {
    if (letter < 1 || letter > pdim) {
      throw DomainError("letter " + std::to_string(letter) +
                        " outside alphabet {1.." + std::to_string(pdim) + "}");
    }
  }
}

std::string Word::to_string() const {
  const bool digits = std::all_of(letters_.begin(), letters_.end(),
                                  [](int l) { return l < 10; });
  std::ostringstream out;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (!digits && i > 0) out << ',';
    out << letters_[i];
  }
  return out.str();
}

bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.letters() < b.letters();
}

std::vector<Word> enumerate_words(int pdim, int max_length) {
  if (pdim < 1) throw DomainError("alphabet must be nonempty");
  std::vector<Word> words{Word{}};
  std::vector<std::vector<int>> layer{{}};
  for (int len = 1; len <= max_length; ++len) {
    std::vector<std::vector<int>> next;
    next.reserve(layer.size() * static_cast<std::size_t>(pdim));
    for (const auto& prefix : layer) {
      for (int letter = 1; letter <= pdim; ++letter) {
        auto extended = prefix;
        extended.push_back(letter);
        words.emplace_back(extended);
        next.push_back(std::move(extended));
      }
    }
    layer = std::move(next);
  }
  return words;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  check_finite(a, "kron lhs");
  check_finite(b, "kron rhs");
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix word_product(const MatrixFamily& family, const Word& w) {
  if (family.empty()) throw DomainError("empty matrix family");
  const Eigen::Index n = family.front().rows();
  check_family(family, n, n, "word_product family");
  w.check_alphabet(static_cast<int>(family.size()));
  Matrix product = Matrix::Identity(n, n);
  for (int letter : w) product = family[letter - 1] * product;
  return product;
}

Matrix ms_stability_matrix(const MatrixFamily& family,
                           const std::vector<double>& p) {
  if (family.empty()) throw DomainError("empty matrix family");
  if (family.size() != p.size()) {
    throw DomainError("family size differs from number of p constants");
  }
  const Eigen::Index n = family.front().rows();
  check_family(family, n, n, "stability family");
  Matrix out = Matrix::Zero(n * n, n * n);
  for (std::size_t s = 0; s < family.size(); ++s) {
    if (!(p[s] > 0)) throw DomainError("p constants must be positive");
    out += p[s] * kron(family[s], family[s]);
  }
  return out;
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw DomainError("spectral_radius: not square");
  check_finite(m, "spectral_radius input");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw DomainError("eigenvalue computation failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

int rank_from_singular_values(const Vector& s, Eigen::Index rows,
                              Eigen::Index cols, double tol) {
  if (s.size() == 0 || !(s(0) > 0)) return 0;
  const double threshold =
      tol * s(0) * static_cast<double>(std::max(rows, cols));
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++rank;
  }
  return rank;
}

void normalize_signs(Matrix& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0) basis.col(j) *= -1.0;
  }
}

}  // namespace

Matrix column_space_basis(const Matrix& m, double tol) {
  if (tol < 0) throw DomainError("rank tolerance must be nonnegative");
  check_finite(m, "column_space_basis input");
  if (m.rows() == 0 || m.cols() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const int rank =
      rank_from_singular_values(svd.singularValues(), m.rows(), m.cols(), tol);
  Matrix basis = svd.matrixU().leftCols(rank);
  normalize_signs(basis);
  return basis;
}

int numerical_rank(const Matrix& m, double tol) {
  check_finite(m, "numerical_rank input");
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return rank_from_singular_values(svd.singularValues(), m.rows(), m.cols(),
                                   tol);
}

Matrix invariant_closure(const MatrixFamily& family, const Matrix& v0,
                         int steps) {
  if (family.empty()) throw DomainError("empty matrix family");
  const Eigen::Index n = family.front().rows();
  check_family(family, n, n, "invariant_closure family");
  if (v0.rows() != n) throw DomainError("invariant_closure: V0 row mismatch");
  if (steps < 0) throw DomainError("invariant_closure: negative steps");
  Matrix basis = column_space_basis(v0);
  for (int step = 0; step < steps; ++step) {
    if (basis.cols() == n) break;
    Matrix stacked(n, basis.cols() * static_cast<Eigen::Index>(family.size() + 1));
    stacked.leftCols(basis.cols()) = basis;
    for (std::size_t s = 0; s < family.size(); ++s) {
      stacked.middleCols(basis.cols() * static_cast<Eigen::Index>(s + 1),
                         basis.cols()) = family[s] * basis;
    }
    Matrix grown = column_space_basis(stacked);
    // No growth means Im(basis) is already invariant.
    const bool saturated = grown.cols() == basis.cols();
    basis = std::move(grown);
    if (saturated) break;
  }
  return basis;
}

Matrix orthogonal_complement(const Matrix& basis) {
  const Eigen::Index n = basis.rows();
  if (basis.cols() == 0) return Matrix::Identity(n, n);
  if (basis.cols() >= n) return Matrix(n, 0);
  const Matrix residual =
      Matrix::Identity(n, n) - basis * basis.transpose();
  return column_space_basis(residual, 1e-6);
}

double subspace_distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  if (u.cols() == 0) return 0.0;
  const double a = (u - v * (v.transpose() * u)).norm();
  const double b = (v - u * (u.transpose() * v)).norm();
  return std::max(a, b);
}

bool subspaces_equal(const Matrix& u, const Matrix& v, double tol) {
  return subspace_distance(u, v) < tol;
}

void check_family(const MatrixFamily& family, Eigen::Index rows,
                  Eigen::Index cols, const char* what) {
  for (std::size_t s = 0; s < family.size(); ++s) {
    if (family[s].rows() != rows || family[s].cols() != cols) {
      std::ostringstream msg;
      msg << what << "[" << s + 1 << "] is " << family[s].rows() << "x"
          << family[s].cols() << ", expected " << rows << "x" << cols;
      throw DomainError(msg.str());
    }
  }
}

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw DomainError(std::string(what) + " contains NaN or Inf");
  }
}

}  // namespace aslpv
