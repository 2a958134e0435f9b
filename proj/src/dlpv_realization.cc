#include "aslpv/dlpv_realization.h"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "aslpv/errors.h"

namespace aslpv {

namespace {

Matrix hstack(const MatrixFamily& blocks, Eigen::Index rows) {
  Eigen::Index cols = 0;
  for (const Matrix& b : blocks) cols += b.cols();
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Matrix& b : blocks) {
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

MatrixFamily transposed(const MatrixFamily& family) {
  MatrixFamily out;
  out.reserve(family.size());
  for (const Matrix& m : family) out.push_back(m.transpose());
  return out;
}

// Depth-first walk over C A_s B_sigma for |sigma s| <= max_length, calling
// visit(term1, term2) on the matching parameters of both systems.
template <class Visit>
void walk_pairs(const DLpvSsa& d1, const DLpvSsa& d2, const Matrix& x1,
                const Matrix& x2, int remaining, Visit& visit) {
  visit(d1.C * x1, d2.C * x2);
  if (remaining == 0) return;
  for (std::size_t s = 0; s < d1.A.size(); ++s) {
    walk_pairs(d1, d2, d1.A[s] * x1, d2.A[s] * x2, remaining - 1, visit);
  }
}

}  // namespace

Matrix sub_markov(const DLpvSsa& d, const Word& w) {
  d.require_consistent();
  w.check_alphabet(d.pdim());
  if (w.empty()) return d.D;
  const Matrix a_s = word_product(d.A, w.suffix_from(1));
  return d.C * a_s * d.B[w[0] - 1];
}

Matrix reachability_matrix(const DLpvSsa& d, int depth) {
  d.require_consistent();
  if (depth < 0) throw DomainError("reachability depth must be >= 0");
  MatrixFamily blocks;
  for (const Word& w : enumerate_words(d.pdim(), depth)) {
    const Matrix a_w = word_product(d.A, w);
    for (const Matrix& b : d.B) blocks.push_back(a_w * b);
  }
  return hstack(blocks, d.n());
}

Matrix observability_matrix(const DLpvSsa& d, int depth) {
  d.require_consistent();
  if (depth < 0) throw DomainError("observability depth must be >= 0");
  const auto words = enumerate_words(d.pdim(), depth);
  Matrix out(d.ny() * static_cast<Eigen::Index>(words.size()), d.n());
  Eigen::Index row = 0;
  for (const Word& w : words) {
    out.middleRows(row, d.ny()) = d.C * word_product(d.A, w);
    row += d.ny();
  }
  return out;
}

MinimalityReport is_minimal_dlpv(const DLpvSsa& d) {
  d.require_consistent();
  MinimalityReport report;
  report.n = static_cast<int>(d.n());
  if (report.n == 0) {
    report.minimal = true;
    return report;
  }
  report.reach_rank = numerical_rank(reachability_matrix(d, report.n - 1));
  report.obs_rank = numerical_rank(observability_matrix(d, report.n - 1));
  report.minimal = report.reach_rank == report.n && report.obs_rank == report.n;
  return report;
}

double sub_markov_distance(const DLpvSsa& d1, const DLpvSsa& d2,
                           int max_length) {
  d1.require_consistent();
  d2.require_consistent();
  if (d1.pdim() != d2.pdim() || d1.ny() != d2.ny() || d1.nu() != d2.nu()) {
    throw DomainError("sub-Markov comparison needs matching pdim, ny, nu");
  }
  auto scaled = [](const Matrix& m1, const Matrix& m2) {
    if (m1.size() == 0) return 0.0;
    const double scale = std::max(1.0, m1.cwiseAbs().maxCoeff());
    return (m1 - m2).cwiseAbs().maxCoeff() / scale;
  };
  double worst = scaled(d1.D, d2.D);
  if (max_length < 1) return worst;
  auto visit = [&](const Matrix& m1, const Matrix& m2) {
    worst = std::max(worst, scaled(m1, m2));
  };
  for (std::size_t s = 0; s < d1.B.size(); ++s) {
    walk_pairs(d1, d2, d1.B[s], d2.B[s], max_length - 1, visit);
  }
  return worst;
}

KalmanMinimization kalman_minimize(const DLpvSsa& d) {
  d.require_consistent();
  const Eigen::Index n = d.n();
  KalmanMinimization out;
  if (n == 0) {
    out.reduced = d;
    out.basis = Matrix(0, 0);
    return out;
  }
  const Matrix reach =
      invariant_closure(d.A, hstack(d.B, n), static_cast<int>(n) - 1);

  DLpvSsa restricted;
  restricted.D = d.D;
  restricted.C = d.C * reach;
  for (std::size_t s = 0; s < d.A.size(); ++s) {
    restricted.A.push_back(reach.transpose() * d.A[s] * reach);
    restricted.B.push_back(reach.transpose() * d.B[s]);
  }

  Matrix observable(reach.cols(), 0);
  if (reach.cols() > 0) {
    // Row space of the observability matrix, via the dual closure.
    observable = invariant_closure(transposed(restricted.A),
                                   restricted.C.transpose(),
                                   static_cast<int>(reach.cols()) - 1);
  }

  out.reduced.D = d.D;
  out.reduced.C = restricted.C * observable;
  for (std::size_t s = 0; s < d.A.size(); ++s) {
    out.reduced.A.push_back(observable.transpose() * restricted.A[s] *
                            observable);
    out.reduced.B.push_back(observable.transpose() * restricted.B[s]);
  }
  out.basis = reach * observable;
  out.n_min = static_cast<int>(observable.cols());
  return out;
}

double isomorphism_residual(const DLpvSsa& d1, const DLpvSsa& d2,
                            const Matrix& t) {
  if (t.size() == 0) return 0.0;
  const Matrix t_inv = t.inverse();
  double worst = (d1.C * t_inv - d2.C).cwiseAbs().maxCoeff();
  for (std::size_t s = 0; s < d1.A.size(); ++s) {
    worst = std::max(worst,
                     (t * d1.A[s] * t_inv - d2.A[s]).cwiseAbs().maxCoeff());
    if (d1.B[s].size() > 0) {
      worst = std::max(worst, (t * d1.B[s] - d2.B[s]).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

std::optional<Matrix> find_isomorphism(const DLpvSsa& d1, const DLpvSsa& d2,
                                       IsomorphismTolerances tol) {
  d1.require_consistent();
  d2.require_consistent();
  if (d1.n() != d2.n() || d1.pdim() != d2.pdim() || d1.ny() != d2.ny() ||
      d1.nu() != d2.nu()) {
    throw DomainError("find_isomorphism: dimensions differ");
  }
  if (!is_minimal_dlpv(d1).minimal || !is_minimal_dlpv(d2).minimal) {
    throw DomainError("find_isomorphism: both systems must be minimal");
  }
  const int n = static_cast<int>(d1.n());
  if (sub_markov_distance(d1, d2, 2 * n) > tol.markov) return std::nullopt;
  if (n == 0) return Matrix(0, 0);

  const Matrix r1 = reachability_matrix(d1, n - 1);
  const Matrix r2 = reachability_matrix(d2, n - 1);
  // T R1 = R2 in the least-squares sense: R1^T T^T = R2^T.
  const Matrix t =
      r1.transpose().colPivHouseholderQr().solve(r2.transpose()).transpose();
  if (!t.allFinite() || !(condition_number(t) <= kMaxConditionNumber)) {
    return std::nullopt;
  }
  if (isomorphism_residual(d1, d2, t) > tol.matrices) return std::nullopt;
  return t;
}

DLpvSsa transform_F(const DLpvSsa& d) {
  d.require_consistent();
  if (d.D.rows() != d.D.cols() || !d.D.isIdentity(1e-12)) {
    throw DomainError("transform_F requires D = I");
  }
  DLpvSsa out = d;
  for (std::size_t s = 0; s < d.A.size(); ++s) {
    out.A[s] = d.A[s] - d.B[s] * d.C;
  }
  return out;
}

DLpvSsa transform_D(const DLpvSsa& d) {
  d.require_consistent();
  DLpvSsa out = d;
  out.C = -d.C;
  return out;
}

}  // namespace aslpv
