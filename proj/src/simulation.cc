#include "aslpv/simulation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "aslpv/errors.h"
#include "aslpv/stochastic_realization.h"

namespace aslpv {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Matrix psd_factor(const Matrix& q) {
  if (q.size() == 0) return q;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (q + q.transpose()));
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal();
}

Matrix draw_scheduling(const SchedulingSpec& spec, int rows,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int pdim = spec.pdim();
  Matrix mu = Matrix::Zero(rows, pdim);
  std::visit(
      Overloaded{
          [&](const WhiteNoiseUniform& f) {
            std::vector<std::uniform_real_distribution<double>> dists;
            for (double a : f.bounds) dists.emplace_back(-a, a);
            for (int t = 0; t < rows; ++t) {
              for (int s = 0; s < pdim; ++s) mu(t, s) = dists[s](rng);
            }
          },
          [&](const DiscreteIID& f) {
            std::discrete_distribution<int> regime(f.probabilities.begin(),
                                                   f.probabilities.end());
            for (int t = 0; t < rows; ++t) mu(t, regime(rng)) = 1.0;
          },
          [&](const ConstantPlusWhite& f) {
            std::vector<std::uniform_real_distribution<double>> dists;
            for (double a : f.bounds) dists.emplace_back(-a, a);
            for (int t = 0; t < rows; ++t) {
              mu(t, 0) = 1.0;
              for (int s = 1; s < pdim; ++s) mu(t, s) = dists[s - 1](rng);
            }
          }},
      spec.family());
  return mu;
}

MomentEstimate batch_moment(const Matrix& left, const Matrix& right) {
  MomentEstimate est;
  const Eigen::Index n = left.rows();
  est.samples = static_cast<long>(n);
  est.value = left.transpose() * right / static_cast<double>(n);
  const Eigen::Index batches =
      std::min<Eigen::Index>(kStandardErrorBatches, n);
  if (batches < 2) {
    est.standard_error =
        Matrix::Constant(left.cols(), right.cols(),
                         std::numeric_limits<double>::infinity());
    return est;
  }
  Matrix sum = Matrix::Zero(left.cols(), right.cols());
  Matrix sum_sq = Matrix::Zero(left.cols(), right.cols());
  for (Eigen::Index b = 0; b < batches; ++b) {
    const Eigen::Index begin = b * n / batches;
    const Eigen::Index end = (b + 1) * n / batches;
    const Matrix mean = left.middleRows(begin, end - begin).transpose() *
                        right.middleRows(begin, end - begin) /
                        static_cast<double>(end - begin);
    sum += mean;
    sum_sq += mean.cwiseProduct(mean);
  }
  const double nb = static_cast<double>(batches);
  const Matrix var =
      ((sum_sq - sum.cwiseProduct(sum) / nb) / (nb - 1.0)).cwiseMax(0.0);
  est.standard_error = (var / nb).cwiseSqrt();
  return est;
}

// Batch-means mean and standard error of a scalar series.
std::pair<double, double> batch_mean(const Vector& series) {
  const Matrix ones = Matrix::Ones(series.size(), 1);
  const MomentEstimate est = batch_moment(ones, series);
  return {est.value(0, 0), est.standard_error(0, 0)};
}

void require_spec(const AsLpvSsa& s, const SchedulingSpec& spec) {
  s.require_consistent();
  if (spec.pdim() != s.pdim()) {
    throw DomainError("scheduling has " + std::to_string(spec.pdim()) +
                      " coordinates, system has " + std::to_string(s.pdim()));
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Trajectory gen_scheduling(const SchedulingSpec& spec, int T,
                          std::uint64_t seed) {
  if (T < 1) throw DomainError("trajectory length must be >= 1");
  Trajectory traj;
  traj.length = T;
  traj.seed = seed;
  traj.mu = draw_scheduling(spec, T, seed);
  return traj;
}

MatrixFamily conditional_noise_covariances(const AsLpvSsa& s,
                                           const SchedulingSpec& spec) {
  require_spec(s, spec);
  MatrixFamily out;
  for (int i = 0; i < s.pdim(); ++i) out.push_back(s.Q[i] / spec.p()[i]);
  if (std::holds_alternative<DiscreteIID>(spec.family())) return out;
  for (std::size_t i = 1; i < out.size() && s.m() > 0; ++i) {
    const double scale = std::max(1.0, out[0].cwiseAbs().maxCoeff());
    if ((out[i] - out[0]).cwiseAbs().maxCoeff() > 1e-8 * scale) {
      throw DomainError(
          "Q_s / p_s differ across letters, which no noise independent of "
          "the scheduling can produce");
    }
  }
  return out;
}

AsLpvSsa retarget_scheduling(const AsLpvSsa& s, const SchedulingSpec& from,
                             const SchedulingSpec& to) {
  require_spec(s, from);
  if (to.pdim() != from.pdim()) {
    throw DomainError("retargeted scheduling must keep the alphabet");
  }
  AsLpvSsa out = s;
  for (int i = 0; i < s.pdim(); ++i) {
    out.Q[i] = s.Q[i] * (to.p()[i] / from.p()[i]);
  }
  return out;
}

Matrix standard_normal_path(Eigen::Index rows, Eigen::Index cols,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix xi(rows, cols);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (Eigen::Index j = 0; j < cols; ++j) xi(t, j) = normal(rng);
  }
  return xi;
}

Trajectory simulate_paths(const AsLpvSsa& s, const SchedulingSpec& spec,
                          const Matrix& mu, const Matrix& xi, int burn_in) {
  require_spec(s, spec);
  if (burn_in < 0) throw DomainError("burn-in must be >= 0");
  if (mu.cols() != s.pdim() || xi.cols() != s.m() || mu.rows() != xi.rows()) {
    throw DomainError("scheduling and noise paths do not match the system");
  }
  const Eigen::Index total = mu.rows();
  if (total <= burn_in) throw DomainError("no retained samples after burn-in");
  const double radius = ms_radius(s, spec);
  if (!(radius < 1.0)) {
    std::ostringstream msg;
    msg << "cannot simulate a system that is not mean-square stable (radius "
        << radius << ")";
    throw DomainError(msg.str());
  }

  const MatrixFamily cov = conditional_noise_covariances(s, spec);
  const bool discrete = std::holds_alternative<DiscreteIID>(spec.family());
  MatrixFamily factor;
  for (const Matrix& c : cov) factor.push_back(psd_factor(c));

  const Eigen::Index T = total - burn_in;
  const Eigen::Index n = s.n();
  Trajectory traj;
  traj.length = static_cast<int>(T);
  traj.burn_in = burn_in;
  traj.mu = mu.bottomRows(T);
  traj.y.resize(T, s.ny());
  traj.x = Matrix(T, n);
  traj.v = Matrix(T, s.m());

  Vector x = Vector::Zero(n);
  for (Eigen::Index t = 0; t < total; ++t) {
    Eigen::Index regime = 0;
    if (discrete) mu.row(t).maxCoeff(&regime);
    const Vector v = factor[regime] * xi.row(t).transpose();
    Vector next = Vector::Zero(n);
    for (int i = 0; i < s.pdim(); ++i) {
      const double weight = mu(t, i);
      if (weight == 0.0) continue;
      next += weight * (s.A[i] * x + s.K[i] * v);
    }
    if (t >= burn_in) {
      const Eigen::Index r = t - burn_in;
      traj.x->row(r) = x.transpose();
      traj.v->row(r) = v.transpose();
      traj.y.row(r) = (s.C * x + s.F * v).transpose();
    }
    x = std::move(next);
  }
  return traj;
}

Trajectory simulate(const AsLpvSsa& s, const SchedulingSpec& spec,
                    const Trajectory& scheduling, std::uint64_t noise_seed,
                    int burn_in) {
  require_spec(s, spec);
  if (burn_in < 0) throw DomainError("burn-in must be >= 0");
  if (scheduling.mu.cols() != s.pdim() || scheduling.length < 1) {
    throw DomainError("scheduling path does not match the system");
  }
  Matrix mu(burn_in + scheduling.length, s.pdim());
  if (burn_in > 0) {
    mu.topRows(burn_in) =
        draw_scheduling(spec, burn_in, derive_seed(scheduling.seed, 1));
  }
  mu.bottomRows(scheduling.length) = scheduling.mu;
  const Matrix xi = standard_normal_path(mu.rows(), s.m(), noise_seed);
  Trajectory traj = simulate_paths(s, spec, mu, xi, burn_in);
  traj.seed = scheduling.seed;
  traj.noise_seed = noise_seed;
  return traj;
}

std::map<Word, MomentEstimate> empirical_cross_moments(
    const Matrix& left, const Matrix& right, const Matrix& mu,
    const SchedulingSpec& spec, const std::vector<Word>& words) {
  const Eigen::Index T = left.rows();
  if (right.rows() != T || mu.rows() != T || mu.cols() != spec.pdim()) {
    throw DomainError("series lengths or scheduling width do not match");
  }
  std::map<Word, MomentEstimate> out;
  for (const Word& w : words) {
    w.check_alphabet(spec.pdim());
    const Eigen::Index k = static_cast<Eigen::Index>(w.size());
    if (k >= T) {
      throw DomainError("word " + w.to_string() +
                        " is not shorter than the trajectory");
    }
    const Eigen::Index N = T - k;
    Vector weight = Vector::Constant(N, 1.0 / std::sqrt(spec.p_word(w)));
    for (Eigen::Index i = 0; i < k; ++i) {
      // Letter i multiplies mu at time t - k + i for sample time t.
      weight.array() *= mu.col(w[i] - 1).segment(i, N).array();
    }
    const Matrix z = weight.asDiagonal() * right.topRows(N);
    out.emplace(w, batch_moment(left.bottomRows(N), z));
  }
  return out;
}

std::map<Word, MomentEstimate> empirical_psi(const Trajectory& traj,
                                             const SchedulingSpec& spec,
                                             const std::vector<Word>& words) {
  return empirical_cross_moments(traj.y, traj.y, traj.mu, spec, words);
}

FilterRun innovation_filter(const AsLpvSsa& s, const SchedulingSpec& spec,
                            const Trajectory& traj) {
  const StableInvertability inv = is_stably_invertable(s, spec);
  if (!inv.flag) {
    std::ostringstream msg;
    msg << "innovation filter needs a stably invertable system (radius "
        << inv.radius << ")";
    throw DomainError(msg.str());
  }
  if (traj.y.cols() != s.ny() || traj.mu.cols() != s.pdim() ||
      traj.y.rows() != traj.mu.rows()) {
    throw DomainError("trajectory does not match the system");
  }
  const Eigen::Index T = traj.y.rows();
  const Eigen::Index n = s.n();
  MatrixFamily closed;
  for (int i = 0; i < s.pdim(); ++i) closed.push_back(s.A[i] - s.K[i] * s.C);

  FilterRun run;
  run.xbar.resize(T, n);
  run.ybar.resize(T, s.ny());
  run.err.resize(T, s.ny());
  Vector xbar = Vector::Zero(n);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Vector y = traj.y.row(t).transpose();
    run.xbar.row(t) = xbar.transpose();
    const Vector ybar = s.C * xbar;
    run.ybar.row(t) = ybar.transpose();
    run.err.row(t) = (y - ybar).transpose();
    Vector next = Vector::Zero(n);
    for (int i = 0; i < s.pdim(); ++i) {
      const double weight = traj.mu(t, i);
      if (weight == 0.0) continue;
      next += weight * (closed[i] * xbar + s.K[i] * y);
    }
    xbar = std::move(next);
  }
  return run;
}

OutputComparison compare_outputs(const AsLpvSsa& s1, const AsLpvSsa& s2,
                                 const SchedulingSpec& spec, CompareSeeds seeds,
                                 int T, int burn_in) {
  require_spec(s1, spec);
  require_spec(s2, spec);
  if (s1.ny() != s2.ny()) {
    throw DomainError("compared systems must have the same output dimension");
  }
  if (T < 1) throw DomainError("comparison length must be >= 1");

  const Trajectory sched = gen_scheduling(spec, T, seeds.scheduling);
  Matrix mu(burn_in + T, spec.pdim());
  if (burn_in > 0) {
    mu.topRows(burn_in) =
        draw_scheduling(spec, burn_in, derive_seed(seeds.scheduling, 1));
  }
  mu.bottomRows(T) = sched.mu;

  OutputComparison out;
  out.length = T;
  out.shared_noise = s1.m() == s2.m();
  const Matrix xi1 = standard_normal_path(mu.rows(), s1.m(), seeds.noise);
  const Matrix xi2 =
      out.shared_noise
          ? xi1
          : standard_normal_path(mu.rows(), s2.m(), derive_seed(seeds.noise, 2));
  const Trajectory t1 = simulate_paths(s1, spec, mu, xi1, burn_in);
  const Trajectory t2 = simulate_paths(s2, spec, mu, xi2, burn_in);

  const Vector diff = (t1.y - t2.y).rowwise().squaredNorm();
  const Vector pow1 = t1.y.rowwise().squaredNorm();
  const Vector pow2 = t2.y.rowwise().squaredNorm();
  std::tie(out.mse, out.mse_se) = batch_mean(diff);
  out.power1 = pow1.mean();
  out.power2 = pow2.mean();
  out.relative_mse = out.power1 > 0 ? out.mse / out.power1 : out.mse;
  std::tie(out.power_gap, out.power_gap_se) = batch_mean(pow1 - pow2);

  const AssociatedDlpv a1 = associated_dlpv(s1, spec);
  const AssociatedDlpv a2 = associated_dlpv(s2, spec);
  out.model_covariance_gap =
      (output_covariance(a1) - output_covariance(a2)).cwiseAbs().maxCoeff();
  for (const Word& w : enumerate_words(spec.pdim(), 2)) {
    if (w.empty()) continue;
    out.model_psi_gap = std::max(
        out.model_psi_gap, (psi_y(a1, w) - psi_y(a2, w)).cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace aslpv
