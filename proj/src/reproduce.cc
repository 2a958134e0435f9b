#include "aslpv/reproduce.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "aslpv/builtin_examples.h"
#include "aslpv/errors.h"
#include "aslpv/stochastic_realization.h"

namespace aslpv {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

Json family_json(const MatrixFamily& f) {
  Json out = Json::array();
  for (const Matrix& m : f) out.push_back(matrix_to_json(m));
  return out;
}

struct Minimized {
  Algorithm1Result result;
  DLpvSsa dlpv;
};

Minimized minimize(const AsLpvSsa& s, const SchedulingSpec& spec) {
  Minimized out{minimize_algorithm1(s, spec), {}};
  out.dlpv = innovation_dlpv(out.result.system);
  return out;
}

class Checks {
 public:
  explicit Checks(ReproduceReport& report) : report_(report) {}
  void add(std::string name, bool passed, std::string detail) {
    report_.checks.push_back({std::move(name), passed, std::move(detail)});
  }

 private:
  ReproduceReport& report_;
};

void check_reference_match(Checks& checks, Json& details, const Minimized& m,
                           int example) {
  const DLpvSsa reference = examples::reference_minimal(example);
  const IsomorphismTolerances tol{examples::kReferenceTolerance,
                                  examples::kReferenceTolerance};
  bool matched = false;
  std::string detail;
  if (m.dlpv.n() != reference.n()) {
    detail = "state dimension " + std::to_string(m.dlpv.n()) + " vs " +
             std::to_string(reference.n());
  } else if (const auto t = find_isomorphism(m.dlpv, reference, tol)) {
    matched = true;
    const double residual = isomorphism_residual(m.dlpv, reference, *t);
    detail = "isomorphic to the reference matrices, residual " + fmt(residual);
    details["reference_isomorphism"] = matrix_to_json(*t);
    details["reference_residual"] = residual;
  } else {
    detail = "no isomorphism within " + fmt(tol.matrices);
  }
  checks.add("matches reference minimal form", matched, detail);
}

void check_psi_preserved(Checks& checks, Json& details, const AsLpvSsa& input,
                         const AsLpvSsa& output, const SchedulingSpec& spec) {
  const double gap = psi_gap(input, output, spec, kPsiPreservationLength);
  details["psi_gap_under_p"] = gap;
  checks.add("Psi_y preserved for |w| <= 6", gap <= kPsiPreservationTolerance,
             "max scaled gap " + fmt(gap));
}

Json minimized_json(const Minimized& m) {
  const AsLpvSsa& s = m.result.system;
  Json j;
  j["n_input"] = m.result.n_input;
  j["n_min"] = m.result.n_min;
  j["A"] = family_json(s.A);
  j["K"] = family_json(s.K);
  j["C"] = matrix_to_json(s.C);
  j["Q"] = family_json(s.Q);
  j["moment_iterations"] = m.result.moment_iterations;
  j["innovation_iterations"] = m.result.innovation_iterations;
  j["innovation_residual"] = m.result.innovation_residual;
  return j;
}

OutputComparison compare_under(const AsLpvSsa& s1, const AsLpvSsa& s2,
                               const SchedulingSpec& to,
                               const ReproduceOptions& options) {
  const SchedulingSpec from = examples::scheduling();
  return compare_outputs(retarget_scheduling(s1, from, to),
                         retarget_scheduling(s2, from, to), to, options.seeds,
                         options.T, options.burn_in);
}

void run_example1(Checks& checks, Json& details,
                  const ReproduceOptions& options) {
  const SchedulingSpec p = examples::scheduling();
  const AsLpvSsa input = examples::system(1);
  const Minimized m = minimize(input, p);
  details["minimized"] = minimized_json(m);
  checks.add("state dimension 3 -> 2", m.result.n_min == 2,
             std::to_string(m.result.n_input) + " -> " +
                 std::to_string(m.result.n_min));
  check_reference_match(checks, details, m, 1);
  check_psi_preserved(checks, details, input, m.result.system, p);

  const OutputComparison c =
      compare_under(input, m.result.system, examples::scheduling_prime(),
                    options);
  details["comparison_p_prime"] = comparison_to_json(c);
  const double z = c.power_gap_se > 0 ? c.power_gap / c.power_gap_se : 0.0;
  checks.add("outputs differ under p'",
             c.model_covariance_gap > 1e-3 && std::abs(z) > 3.0,
             "model variance gap " + fmt(c.model_covariance_gap) +
                 ", empirical variance gap z = " + fmt(z));
}

void run_example2(Checks& checks, Json& details,
                  const ReproduceOptions& options) {
  const SchedulingSpec p = examples::scheduling();
  const AsLpvSsa input = examples::system(2);
  const StableInvertability inv = is_stably_invertable(input, p);
  details["invertability_radius"] = inv.radius;
  checks.add("input not stably invertable", !inv.flag,
             "radius " + fmt(inv.radius));

  const Minimized m = minimize(input, p);
  details["minimized"] = minimized_json(m);
  check_reference_match(checks, details, m, 2);
  check_psi_preserved(checks, details, input, m.result.system, p);

  const auto t = find_isomorphism(innovation_dlpv(input), m.dlpv);
  checks.add("input and minimized form not isomorphic", !t.has_value(),
             t ? "an isomorphism was found" : "no isomorphism exists");

  const SchedulingSpec p_prime = examples::scheduling_prime();
  const OutputComparison c =
      compare_under(input, m.result.system, p_prime, options);
  const AsLpvSsa ex3 = examples::system(3);
  const OutputComparison baseline =
      compare_under(ex3, minimize_algorithm1(ex3, p).system, p_prime, options);
  details["comparison_p_prime"] = comparison_to_json(c);
  details["noise_floor_baseline"] = comparison_to_json(baseline);
  checks.add("mean-square divergence under p' exceeds 10x noise floor",
             c.mse > 10.0 * baseline.mse && c.model_covariance_gap > 1e-3,
             "mse " + fmt(c.mse) + " vs baseline " + fmt(baseline.mse));
}

void run_example3(Checks& checks, Json& details,
                  const ReproduceOptions& options) {
  const SchedulingSpec p = examples::scheduling();
  const AsLpvSsa input = examples::system(3);
  const InnovationReport report = check_minimal_innovation(input, p);
  details["invertability_radius"] = report.invertability.radius;
  checks.add("minimal and stably invertable",
             report.minimality.minimal && report.invertability.flag,
             "ranks " + std::to_string(report.minimality.reach_rank) + "/" +
                 std::to_string(report.minimality.obs_rank) + ", radius " +
                 fmt(report.invertability.radius));

  const Minimized m = minimize(input, p);
  details["minimized"] = minimized_json(m);
  const DLpvSsa input_dlpv = innovation_dlpv(input);
  const auto own = find_isomorphism(input_dlpv, m.dlpv);
  checks.add("minimized form isomorphic to input", own.has_value(),
             own ? "residual " + fmt(isomorphism_residual(input_dlpv, m.dlpv,
                                                          *own))
                 : "no isomorphism within 1e-06");
  if (own) details["isomorphism"] = matrix_to_json(*own);
  check_reference_match(checks, details, m, 3);

  const IsomorphismTolerances loose{examples::kReferenceTolerance,
                                    examples::kReferenceTolerance};
  const auto t = find_isomorphism(input_dlpv, examples::reference_minimal(3),
                                  loose);
  double t_gap = std::numeric_limits<double>::infinity();
  if (t) {
    t_gap = (*t - examples::reference_isomorphism()).cwiseAbs().maxCoeff();
    details["recovered_T"] = matrix_to_json(*t);
  }
  details["recovered_T_gap"] = t ? Json(t_gap) : Json(nullptr);
  checks.add("recovered T matches reference T",
             t_gap <= examples::kReferenceTolerance, "max gap " + fmt(t_gap));

  struct Scenario {
    const char* label;
    const char* key;
    SchedulingSpec spec;
  };
  for (const Scenario& sc :
       {Scenario{"p", "comparison_p", p},
        Scenario{"p'", "comparison_p_prime", examples::scheduling_prime()}}) {
    const OutputComparison c =
        compare_under(input, m.result.system, sc.spec, options);
    details[sc.key] = comparison_to_json(c);
    checks.add(std::string("outputs at noise floor under ") + sc.label,
               c.relative_mse < kNoiseFloorRelativeMse &&
                   c.model_psi_gap < 1e-8 && c.model_covariance_gap < 1e-8,
               "relative mse " + fmt(c.relative_mse) + ", model Psi gap " +
                   fmt(c.model_psi_gap));
  }
}

}  // namespace

bool ReproduceReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

double psi_gap(const AsLpvSsa& s1, const AsLpvSsa& s2,
               const SchedulingSpec& spec, int max_length) {
  const AssociatedDlpv a1 = associated_dlpv(s1, spec);
  const AssociatedDlpv a2 = associated_dlpv(s2, spec);
  return sub_markov_distance(a1.system, a2.system, max_length);
}

Json comparison_to_json(const OutputComparison& c) {
  Json j;
  j["T"] = c.length;
  j["shared_noise"] = c.shared_noise;
  j["mse"] = c.mse;
  j["mse_se"] = c.mse_se;
  j["relative_mse"] = c.relative_mse;
  j["power1"] = c.power1;
  j["power2"] = c.power2;
  j["power_gap"] = c.power_gap;
  j["power_gap_se"] = c.power_gap_se;
  j["model_covariance_gap"] = c.model_covariance_gap;
  j["model_psi_gap"] = c.model_psi_gap;
  return j;
}

ReproduceReport reproduce_example(int example, const ReproduceOptions& options) {
  if (example < 1 || example > examples::kCount) {
    throw DomainError("example must be 1, 2 or 3");
  }
  if (options.T < 1) throw DomainError("T must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  ReproduceReport report;
  report.example = example;
  Checks checks(report);
  Json details = Json::object();
  switch (example) {
    case 1:
      run_example1(checks, details, options);
      break;
    case 2:
      run_example2(checks, details, options);
      break;
    default:
      run_example3(checks, details, options);
      break;
  }
  report.details = std::move(details);
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

}  // namespace aslpv
