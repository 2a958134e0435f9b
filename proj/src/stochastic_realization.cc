#include "aslpv/stochastic_realization.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "aslpv/errors.h"

namespace aslpv {

namespace {

constexpr std::size_t kResidualTail = 8;

void require_matching(const AsLpvSsa& s, const SchedulingSpec& spec) {
  s.require_consistent();
  if (spec.pdim() != s.pdim()) {
    throw DomainError("scheduling has " + std::to_string(spec.pdim()) +
                      " coordinates, system has " + std::to_string(s.pdim()));
  }
}

void require_ms_stable(const AsLpvSsa& s, const SchedulingSpec& spec) {
  const double radius = ms_radius(s, spec);
  if (!(radius < 1.0)) {
    std::ostringstream msg;
    msg << "system is not mean-square stable (radius " << radius << ")";
    throw DomainError(msg.str());
  }
}

Matrix noise_injection(const AsLpvSsa& s) {
  Matrix sum = Matrix::Zero(s.n(), s.n());
  for (std::size_t j = 0; j < s.A.size(); ++j) {
    sum += s.K[j] * s.Q[j] * s.K[j].transpose();
  }
  return sum;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

std::vector<double> tail_of(const std::deque<double>& history) {
  return {history.begin(), history.end()};
}

}  // namespace

MomentSolution state_second_moments(const AsLpvSsa& s,
                                    const SchedulingSpec& spec,
                                    IterationOptions options) {
  require_matching(s, spec);
  if (!(options.tol > 0)) throw DomainError("tolerance must be positive");
  require_ms_stable(s, spec);

  const auto& p = spec.p();
  const Eigen::Index n = s.n();
  const Matrix noise = noise_injection(s);
  MomentSolution sol;
  sol.P.assign(s.A.size(), Matrix::Zero(n, n));
  std::deque<double> history;
  for (int it = 1; it <= options.max_iter; ++it) {
    Matrix common = noise;
    for (std::size_t j = 0; j < s.A.size(); ++j) {
      common += s.A[j] * sol.P[j] * s.A[j].transpose();
    }
    common = symmetrized(common);
    double residual = 0.0;
    for (std::size_t i = 0; i < s.A.size(); ++i) {
      Matrix next = p[i] * common;
      residual = std::max(residual, (next - sol.P[i]).norm());
      sol.P[i] = std::move(next);
    }
    sol.iterations = it;
    sol.residual = residual;
    history.push_back(residual);
    if (history.size() > kResidualTail) history.pop_front();
    if (residual < options.tol) return sol;
  }
  throw ConvergenceError("state second moments did not converge", sol.residual,
                         tail_of(history));
}

MomentSolution state_second_moments_direct(const AsLpvSsa& s,
                                           const SchedulingSpec& spec) {
  require_matching(s, spec);
  require_ms_stable(s, spec);
  const Eigen::Index n = s.n();
  MomentSolution sol;
  if (n == 0) {
    sol.P.assign(s.A.size(), Matrix(0, 0));
    return sol;
  }
  const Matrix system =
      Matrix::Identity(n * n, n * n) - ms_stability_matrix(s.A, spec.p());
  const Matrix rhs = noise_injection(s);
  const Vector vec_x = system.partialPivLu().solve(
      Eigen::Map<const Vector>(rhs.data(), rhs.size()));
  const Matrix x = symmetrized(Eigen::Map<const Matrix>(vec_x.data(), n, n));
  for (double p_s : spec.p()) sol.P.push_back(p_s * x);
  sol.iterations = 1;
  sol.residual = 0.0;
  return sol;
}

AssociatedDlpv associated_dlpv(const AsLpvSsa& s, const SchedulingSpec& spec,
                               IterationOptions options) {
  AssociatedDlpv out;
  out.moments = state_second_moments(s, spec, options);
  const auto& p = spec.p();
  DLpvSsa& d = out.system;
  d.C = s.C;
  d.D = Matrix::Identity(s.ny(), s.ny());
  for (std::size_t i = 0; i < s.A.size(); ++i) {
    const double root = std::sqrt(p[i]);
    const Matrix& P = out.moments.P[i];
    d.A.push_back(root * s.A[i]);
    d.B.push_back((s.A[i] * P * s.C.transpose() +
                   s.K[i] * s.Q[i] * s.F.transpose()) /
                  root);
    out.Ty.push_back(symmetrized(s.C * P * s.C.transpose() +
                                 s.F * s.Q[i] * s.F.transpose()) /
                     p[i]);
  }
  return out;
}

Matrix psi_y(const AssociatedDlpv& assoc, const Word& w) {
  if (w.empty()) {
    return Matrix::Identity(assoc.system.ny(), assoc.system.ny());
  }
  return sub_markov(assoc.system, w);
}

Matrix psi_y_model(const AsLpvSsa& s, const SchedulingSpec& spec,
                   const Word& w) {
  w.check_alphabet(s.pdim());
  return psi_y(associated_dlpv(s, spec), w);
}

Matrix output_covariance(const AssociatedDlpv& assoc) {
  return assoc.Ty.front();
}

InnovationSolution associated_aslpv(const DLpvSsa& d, const MatrixFamily& ty,
                                    const SchedulingSpec& spec,
                                    IterationOptions options) {
  d.require_consistent();
  if (d.pdim() != spec.pdim()) {
    throw DomainError("scheduling and dLPV-SSA alphabets differ");
  }
  if (d.D.rows() != d.D.cols() || !d.D.isIdentity(1e-12)) {
    throw DomainError("associated asLPV-SSA needs a realization with D = I");
  }
  check_family(ty, d.ny(), d.ny(), "T^y");
  if (ty.size() != d.A.size()) throw DomainError("need one T^y per letter");
  if (!(options.tol > 0)) throw DomainError("tolerance must be positive");

  const auto& p = spec.p();
  const std::size_t np = d.A.size();
  const Eigen::Index n = d.n();
  const Eigen::Index ny = d.ny();

  InnovationSolution sol;
  sol.Phat.assign(np, Matrix::Zero(n, n));
  sol.Qhat.assign(np, Matrix::Zero(ny, ny));
  sol.Khat.assign(np, Matrix::Zero(n, ny));

  auto update_gain = [&](int iteration) {
    for (std::size_t s = 0; s < np; ++s) {
      const double root = std::sqrt(p[s]);
      Matrix q = symmetrized(p[s] * ty[s] -
                             d.C * sol.Phat[s] * d.C.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
      const double trace = q.trace();
      const double min_eig = ny > 0 ? eig.eigenvalues().minCoeff() : 1.0;
      if (ny > 0 && (!(trace > 0) || min_eig < kInnovationPdFloor * trace)) {
        std::ostringstream msg;
        msg << "innovation covariance Q_hat_" << s + 1
            << " lost positive definiteness at iteration " << iteration
            << " (min eigenvalue " << min_eig << ", trace " << trace << ")";
        throw DegeneracyError(msg.str(), static_cast<int>(s + 1), iteration);
      }
      const Matrix numerator =
          d.B[s] * root - d.A[s] * sol.Phat[s] * d.C.transpose() / root;
      sol.Khat[s] = q.llt().solve(numerator.transpose()).transpose();
      sol.Qhat[s] = std::move(q);
    }
  };

  std::deque<double> history;
  bool converged = false;
  for (int it = 0; it < options.max_iter; ++it) {
    update_gain(it);
    Matrix common = Matrix::Zero(n, n);
    for (std::size_t j = 0; j < np; ++j) {
      common += d.A[j] * sol.Phat[j] * d.A[j].transpose() / p[j] +
                sol.Khat[j] * sol.Qhat[j] * sol.Khat[j].transpose();
    }
    common = symmetrized(common);
    double residual = 0.0;
    for (std::size_t s = 0; s < np; ++s) {
      Matrix next = p[s] * common;
      residual = std::max(residual, (next - sol.Phat[s]).norm());
      sol.Phat[s] = std::move(next);
    }
    sol.iterations = it + 1;
    sol.residual = residual;
    history.push_back(residual);
    if (history.size() > kResidualTail) history.pop_front();
    if (residual < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("innovation gain recursion did not converge",
                           sol.residual, tail_of(history));
  }
  update_gain(sol.iterations);

  AsLpvSsa& out = sol.system;
  out.C = d.C;
  out.F = Matrix::Identity(ny, ny);
  for (std::size_t s = 0; s < np; ++s) {
    out.A.push_back(d.A[s] / std::sqrt(p[s]));
    out.K.push_back(sol.Khat[s]);
    out.Q.push_back(sol.Qhat[s]);
  }
  return sol;
}

StableInvertability is_stably_invertable(const AsLpvSsa& s,
                                         const SchedulingSpec& spec) {
  require_matching(s, spec);
  const DLpvSsa inverse = transform_F(innovation_dlpv(s));
  StableInvertability out;
  out.radius = spectral_radius(ms_stability_matrix(inverse.A, spec.p()));
  out.flag = out.radius < 1.0;
  return out;
}

Algorithm1Result minimize_algorithm1(const AsLpvSsa& s,
                                     const SchedulingSpec& spec,
                                     IterationOptions options) {
  require_matching(s, spec);
  Algorithm1Result result;
  result.n_input = static_cast<int>(s.n());

  const AssociatedDlpv assoc = associated_dlpv(s, spec, options);
  result.moment_iterations = assoc.moments.iterations;
  result.moment_residual = assoc.moments.residual;

  const KalmanMinimization reduced = kalman_minimize(assoc.system);
  result.n_min = reduced.n_min;

  const InnovationSolution innovation =
      associated_aslpv(reduced.reduced, assoc.Ty, spec, options);
  result.system = innovation.system;
  result.innovation_iterations = innovation.iterations;
  result.innovation_residual = innovation.residual;

  const bool f_identity = s.F.rows() == s.F.cols() && s.F.isIdentity(1e-12);
  result.innovation_hypothesis =
      f_identity && is_stably_invertable(s, spec).flag;
  result.note = result.innovation_hypothesis
                    ? "input is stably invertable, hence in innovation form; "
                      "the output is a minimal realization in innovation form"
                    : "input not known to be in innovation form; the output "
                      "realizes the same Psi_y, but minimality is only "
                      "guaranteed for innovation-form inputs";
  return result;
}

InnovationReport check_minimal_innovation(const AsLpvSsa& s,
                                          const SchedulingSpec& spec) {
  require_matching(s, spec);
  InnovationReport report;
  report.minimality = is_minimal_dlpv(innovation_dlpv(s));
  report.invertability = is_stably_invertable(s, spec);
  report.innovation_form_sufficient = report.invertability.flag;
  report.minimal_innovation =
      report.minimality.minimal && report.invertability.flag;
  return report;
}

Algorithm2Result minimize_algorithm2(const AsLpvSsa& s,
                                     const SchedulingSpec& spec,
                                     bool recompute_noise,
                                     IterationOptions options) {
  require_matching(s, spec);
  const StableInvertability inv = is_stably_invertable(s, spec);
  if (!inv.flag) {
    std::ostringstream msg;
    msg << "Algorithm 2 needs a stably invertable input (radius " << inv.radius
        << " >= 1)";
    throw DomainError(msg.str());
  }
  Algorithm2Result result;
  result.reduction = kalman_minimize(innovation_dlpv(s));
  const DLpvSsa& dm = result.reduction.reduced;
  AsLpvSsa& out = result.system;
  out.A = dm.A;
  out.K = dm.B;
  out.C = dm.C;
  out.F = s.F;
  out.Q = s.Q;
  if (!recompute_noise) return result;

  // Psi_y of the input, restricted to the reduced state space.
  const AssociatedDlpv assoc = associated_dlpv(s, spec, options);
  const Matrix projection = result.reduction.projection();
  DLpvSsa restricted;
  restricted.C = dm.C;
  restricted.D = assoc.system.D;
  for (std::size_t i = 0; i < dm.A.size(); ++i) {
    restricted.A.push_back(std::sqrt(spec.p()[i]) * dm.A[i]);
    restricted.B.push_back(projection * assoc.system.B[i]);
  }
  const InnovationSolution innovation =
      associated_aslpv(restricted, assoc.Ty, spec, options);
  out.Q = innovation.Qhat;
  result.q_status = NoiseMomentStatus::kRecomputed;
  result.innovation_iterations = innovation.iterations;
  for (std::size_t i = 0; i < dm.A.size(); ++i) {
    if (dm.B[i].size() == 0) continue;
    result.gain_consistency =
        std::max(result.gain_consistency,
                 (innovation.Khat[i] - dm.B[i]).cwiseAbs().maxCoeff());
  }
  return result;
}

}  // namespace aslpv
