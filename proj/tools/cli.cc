#include "cli.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "aslpv/errors.h"
#include "aslpv/io.h"
#include "aslpv/reproduce.h"
#include "aslpv/simulation.h"
#include "aslpv/stochastic_realization.h"

namespace aslpv::cli {

namespace {

/// Bad invocation detected after CLI11 parsing (exit 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that fails a semantic requirement (exit 1).
class SemanticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  bool json = false;
  std::string command;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  Json header() const {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    return j;
  }
  void emit(const Json& j) const { *out << j.dump(2) << "\n"; }
};

struct LoadedModel {
  ModelDocument doc;
  std::string sha256;
};

LoadedModel load_model(const std::string& path) {
  const std::string bytes = read_text_file(path);
  Json j;
  try {
    j = Json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return {model_from_json(j), sha256_hex(bytes)};
}

bool same_moments(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) {
      return false;
    }
  }
  return true;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out << (i ? ", " : "") << v[i];
  }
  return out.str();
}

/// The scheduling file when given; otherwise white noise with the model's p.
SchedulingSpec resolve_scheduling(const std::string& path,
                                  const std::vector<double>& model_p) {
  if (path.empty()) return SchedulingSpec::with_moments(model_p);
  SchedulingSpec spec = scheduling_from_json(read_json_file(path));
  if (!same_moments(spec.p(), model_p)) {
    throw SemanticError("model p = (" + join(model_p) +
                        ") does not match the scheduling p = (" +
                        join(spec.p()) + ")");
  }
  return spec;
}

std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return kFallbackSeed;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || *env == '-') {
    throw UsageError(std::string(kSeedEnv) + " must be a non-negative integer");
  }
  return v;
}

std::string matrix_text(const Matrix& m) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << (i ? "; " : "");
    for (Eigen::Index k = 0; k < m.cols(); ++k) out << (k ? " " : "") << m(i, k);
  }
  out << "]";
  return out.str();
}

std::string word_label(const Word& w) {
  return w.empty() ? std::string("eps") : w.to_string();
}

// --- validate ---------------------------------------------------------------

struct ModelArgs {
  std::string model;
  std::string scheduling;
};

void add_model_args(CLI::App* cmd, ModelArgs& args, bool scheduling_required) {
  cmd->add_option("--model", args.model, "model JSON")->required()
      ->check(CLI::ExistingFile);
  auto* sched = cmd->add_option("--scheduling", args.scheduling,
                                "scheduling JSON (default: white noise with "
                                "the model's p)");
  sched->check(CLI::ExistingFile);
  if (scheduling_required) sched->required();
}

int cmd_validate(const Context& ctx, const ModelArgs& args) {
  const LoadedModel m = load_model(args.model);
  Json report = ctx.header();
  std::optional<SchedulingSpec> spec;
  std::string p_problem;
  try {
    spec = resolve_scheduling(args.scheduling, m.doc.p);
  } catch (const SemanticError& e) {
    p_problem = e.what();
    spec = SchedulingSpec::with_moments(m.doc.p);
  }
  ValidationReport v = validate_aslpv(m.doc.system, *spec);
  if (!p_problem.empty()) v.problems.push_back(p_problem);
  const bool ok = v.ok() && p_problem.empty();
  report["ok"] = ok;
  report["dimensions_ok"] = v.dimensions_ok;
  report["q_psd"] = v.q_psd;
  report["q_min_eigenvalue"] = v.q_min_eigenvalue;
  report["ms_stable"] = v.ms_stable;
  report["ms_radius"] = v.ms_radius;
  report["p_matches_scheduling"] = p_problem.empty();
  report["problems"] = v.problems;
  report["model_sha256"] = m.sha256;
  if (ctx.json) {
    ctx.emit(report);
  } else {
    *ctx.out << (ok ? "valid" : "invalid") << ": n=" << m.doc.system.n()
             << " pdim=" << m.doc.system.pdim() << " ny=" << m.doc.system.ny()
             << " m=" << m.doc.system.m() << " ms_radius=" << v.ms_radius
             << "\n";
    for (const auto& p : v.problems) *ctx.out << "  problem: " << p << "\n";
  }
  return ok ? kPass : kSemanticFailure;
}

// --- check ------------------------------------------------------------------

struct CheckArgs {
  ModelArgs model;
  bool minimal = false;
  bool innovation = false;
  bool stably_invertable = false;
};

int cmd_check(const Context& ctx, CheckArgs args) {
  const LoadedModel m = load_model(args.model.model);
  const SchedulingSpec spec = resolve_scheduling(args.model.scheduling, m.doc.p);
  const AsLpvSsa& s = m.doc.system;
  if (!args.minimal && !args.innovation && !args.stably_invertable) {
    args.minimal = args.innovation = args.stably_invertable = true;
  }
  const bool f_identity = s.F.rows() == s.F.cols() && s.F.isIdentity(1e-12);
  if ((args.innovation || args.stably_invertable) && !f_identity) {
    throw SemanticError(
        "innovation-form and stable-invertability checks need F = I; this "
        "model has F = " + matrix_text(s.F));
  }

  Json report = ctx.header();
  bool all = true;
  std::ostringstream text;
  if (args.minimal) {
    const MinimalityReport r = is_minimal_dlpv(DLpvSsa{s.A, s.K, s.C, s.F});
    report["minimal"] = {{"value", r.minimal},
                         {"reach_rank", r.reach_rank},
                         {"obs_rank", r.obs_rank},
                         {"n", r.n}};
    all = all && r.minimal;
    text << "minimal: " << std::boolalpha << r.minimal << " (reach rank "
         << r.reach_rank << ", obs rank " << r.obs_rank << ", n " << r.n
         << ")\n";
  }
  if (args.stably_invertable || args.innovation) {
    const StableInvertability inv = is_stably_invertable(s, spec);
    if (args.stably_invertable) {
      report["stably_invertable"] = {{"value", inv.flag},
                                     {"radius", inv.radius}};
      all = all && inv.flag;
      text << "stably invertable: " << std::boolalpha << inv.flag
           << " (radius " << inv.radius << ")\n";
    }
    if (args.innovation) {
      const InnovationReport r = check_minimal_innovation(s, spec);
      report["innovation"] = {
          {"sufficient_condition", r.innovation_form_sufficient},
          {"minimal_innovation", r.minimal_innovation}};
      all = all && r.minimal_innovation;
      text << "innovation form (stable invertability): " << std::boolalpha
           << r.innovation_form_sufficient
           << "\nminimal in innovation form: " << r.minimal_innovation << "\n";
    }
  }
  report["ok"] = all;
  if (ctx.json) {
    ctx.emit(report);
  } else {
    *ctx.out << text.str();
  }
  return all ? kPass : kSemanticFailure;
}

// --- minimize ---------------------------------------------------------------

struct MinimizeArgs {
  ModelArgs model;
  std::string algorithm = "assoc";
  std::string out;
  bool recompute_noise = false;
};

int cmd_minimize(const Context& ctx, const MinimizeArgs& args) {
  const LoadedModel m = load_model(args.model.model);
  const SchedulingSpec spec = resolve_scheduling(args.model.scheduling, m.doc.p);
  Json provenance;
  provenance["input_sha256"] = m.sha256;
  provenance["algorithm"] = args.algorithm;
  AsLpvSsa result;
  if (args.algorithm == "assoc") {
    const Algorithm1Result r = minimize_algorithm1(m.doc.system, spec);
    result = r.system;
    provenance["n_input"] = r.n_input;
    provenance["n_min"] = r.n_min;
    provenance["iterations"] = {{"moments", r.moment_iterations},
                                {"innovation", r.innovation_iterations}};
    provenance["residuals"] = {{"moments", r.moment_residual},
                               {"innovation", r.innovation_residual}};
    provenance["innovation_hypothesis"] = r.innovation_hypothesis;
    provenance["note"] = r.note;
  } else {
    const Algorithm2Result r =
        minimize_algorithm2(m.doc.system, spec, args.recompute_noise);
    result = r.system;
    provenance["n_input"] = m.doc.system.n();
    provenance["n_min"] = r.reduction.n_min;
    provenance["iterations"] = {{"innovation", r.innovation_iterations}};
    provenance["residuals"] = {{"gain_consistency", r.gain_consistency}};
    provenance["noise_moments"] =
        r.q_status == NoiseMomentStatus::kRecomputed ? "recomputed"
                                                     : "inherited_unverified";
  }
  const Json model = model_to_json(result, spec.p(), provenance);
  if (!args.out.empty()) write_text_file(args.out, model.dump(2) + "\n");

  if (ctx.json) {
    Json report = ctx.header();
    report["ok"] = true;
    report["provenance"] = provenance;
    if (args.out.empty()) {
      report["model"] = model;
    } else {
      report["out"] = args.out;
    }
    ctx.emit(report);
  } else if (args.out.empty()) {
    *ctx.out << model.dump(2) << "\n";
  } else {
    *ctx.out << "minimized " << provenance["n_input"] << " -> "
             << provenance["n_min"] << " states with " << args.algorithm
             << ", wrote " << args.out << "\n";
  }
  return kPass;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  ModelArgs model;
  int T = 0;
  std::optional<std::uint64_t> seed;
  int burn_in = kDefaultBurnIn;
  std::string out;
  bool no_state = false;
};

int cmd_simulate(const Context& ctx, const SimulateArgs& args) {
  const LoadedModel m = load_model(args.model.model);
  const SchedulingSpec spec = resolve_scheduling(args.model.scheduling, m.doc.p);
  const std::uint64_t seed = args.seed.value_or(default_seed());
  const Trajectory sched = gen_scheduling(spec, args.T, seed);
  Trajectory traj =
      simulate(m.doc.system, spec, sched, derive_seed(seed, 2), args.burn_in);
  if (args.no_state) {
    traj.x.reset();
    traj.v.reset();
  }
  const std::string sidecar_path = args.out + ".json";
  write_text_file(args.out, trajectory_to_csv(traj));
  write_text_file(sidecar_path,
                  trajectory_sidecar(traj, spec, m.sha256).dump(2) + "\n");

  const Matrix sample = traj.y.transpose() * traj.y / traj.length;
  const Matrix model =
      output_covariance(associated_dlpv(m.doc.system, spec));
  if (ctx.json) {
    Json report = ctx.header();
    report["ok"] = true;
    report["T"] = traj.length;
    report["seed"] = seed;
    report["noise_seed"] = *traj.noise_seed;
    report["burn_in"] = traj.burn_in;
    report["out"] = args.out;
    report["sidecar"] = sidecar_path;
    report["sample_output_covariance"] = matrix_to_json(sample);
    report["model_output_covariance"] = matrix_to_json(model);
    ctx.emit(report);
  } else {
    *ctx.out << "wrote " << traj.length << " samples to " << args.out
             << " (seed " << seed << ")\n"
             << "sample E[y y^T] " << matrix_text(sample) << ", model "
             << matrix_text(model) << "\n";
  }
  return kPass;
}

// --- psi --------------------------------------------------------------------

struct PsiArgs {
  std::string model;
  std::string trajectory;
  std::string scheduling;
  std::vector<std::string> words;
  std::optional<int> max_len;
};

std::vector<Word> psi_words(const PsiArgs& args, int pdim) {
  std::vector<Word> words;
  try {
    for (const std::string& w : args.words) {
      words.push_back(Word::parse(w));
      words.back().check_alphabet(pdim);
    }
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (args.max_len || words.empty()) {
    for (const Word& w : enumerate_words(pdim, args.max_len.value_or(2))) {
      words.push_back(w);
    }
  }
  return words;
}

int cmd_psi(const Context& ctx, const PsiArgs& args) {
  if (args.model.empty() && args.trajectory.empty()) {
    throw UsageError("psi needs --model, --trajectory or both");
  }
  std::optional<LoadedModel> model;
  std::optional<SchedulingSpec> spec;
  if (!args.model.empty()) {
    model = load_model(args.model);
    spec = resolve_scheduling(args.scheduling, model->doc.p);
  } else if (!args.scheduling.empty()) {
    spec = scheduling_from_json(read_json_file(args.scheduling));
  }
  std::optional<Trajectory> traj;
  if (!args.trajectory.empty()) {
    traj = trajectory_from_csv(read_text_file(args.trajectory));
    const std::string sidecar = args.trajectory + ".json";
    if (!spec) {
      if (!std::filesystem::exists(sidecar)) {
        throw UsageError("trajectory-only psi needs --scheduling or a sidecar " +
                         sidecar);
      }
      const Json j = read_json_file(sidecar);
      if (!j.contains("scheduling")) {
        throw ParseError(sidecar + ": missing scheduling");
      }
      spec = scheduling_from_json(j.at("scheduling"));
    }
    if (traj->mu.cols() != spec->pdim()) {
      throw UsageError("trajectory has " + std::to_string(traj->mu.cols()) +
                       " scheduling columns, scheduling has pdim " +
                       std::to_string(spec->pdim()));
    }
  }
  const std::vector<Word> words = psi_words(args, spec->pdim());

  std::optional<AssociatedDlpv> assoc;
  if (model) assoc = associated_dlpv(model->doc.system, *spec);
  std::map<Word, MomentEstimate> empirical;
  if (traj) empirical = empirical_psi(*traj, *spec, words);

  Json report = ctx.header();
  report["mode"] = model && traj ? "comparison" : (model ? "model" : "empirical");
  Json rows = Json::array();
  double max_z = 0.0;
  std::ostringstream text;
  for (const Word& w : words) {
    Json row;
    row["word"] = w.to_string();
    text << std::setw(6) << word_label(w);
    std::optional<Matrix> model_value;
    if (assoc) {
      model_value = psi_y(*assoc, w);
      row["model"] = matrix_to_json(*model_value);
      text << "  model " << matrix_text(*model_value);
    }
    if (traj) {
      const MomentEstimate& e = empirical.at(w);
      row["empirical"] = matrix_to_json(e.value);
      row["standard_error"] = matrix_to_json(e.standard_error);
      text << "  empirical " << matrix_text(e.value) << " +- "
           << matrix_text(e.standard_error);
      if (assoc) {
        // Psi_y(eps) is normalized to I; the sample moment estimates E[y y^T].
        const Matrix target = w.empty() ? output_covariance(*assoc)
                                        : *model_value;
        const Matrix z = (e.value - target).cwiseQuotient(e.standard_error);
        row["z"] = matrix_to_json(z);
        max_z = std::max(max_z, z.cwiseAbs().maxCoeff());
        text << "  z " << matrix_text(z);
      }
    }
    text << "\n";
    rows.push_back(std::move(row));
  }
  report["words"] = rows;
  if (model && traj) {
    report["max_abs_z"] = max_z;
    report["within_3_se"] = max_z < 3.0;
    text << "max |z| = " << max_z << "\n";
  }
  report["ok"] = true;
  if (ctx.json) {
    ctx.emit(report);
  } else {
    *ctx.out << text.str();
  }
  return kPass;
}

// --- reproduce --------------------------------------------------------------

struct ReproduceArgs {
  int example = 0;
  int T = 100000;
  std::string seeds;
  int burn_in = kDefaultBurnIn;
};

CompareSeeds parse_seeds(const std::string& text) {
  if (text.empty()) {
    const std::uint64_t base = default_seed();
    return {base, derive_seed(base, 2)};
  }
  const auto comma = text.find(',');
  try {
    std::size_t used = 0;
    const std::string first = text.substr(0, comma);
    CompareSeeds seeds;
    seeds.scheduling = std::stoull(first, &used);
    if (used != first.size()) throw std::invalid_argument(first);
    if (comma == std::string::npos) {
      seeds.noise = derive_seed(seeds.scheduling, 2);
    } else {
      const std::string second = text.substr(comma + 1);
      seeds.noise = std::stoull(second, &used);
      if (used != second.size()) throw std::invalid_argument(second);
    }
    return seeds;
  } catch (const std::logic_error&) {
    throw UsageError("--seeds takes SCHEDULING[,NOISE] non-negative integers");
  }
}

int cmd_reproduce(const Context& ctx, const ReproduceArgs& args) {
  ReproduceOptions options;
  options.T = args.T;
  options.seeds = parse_seeds(args.seeds);
  options.burn_in = args.burn_in;
  const ReproduceReport r = reproduce_example(args.example, options);
  if (ctx.json) {
    Json report = ctx.header();
    report["example"] = r.example;
    report["ok"] = r.passed();
    report["T"] = options.T;
    report["seeds"] = {options.seeds.scheduling, options.seeds.noise};
    Json checks = Json::array();
    for (const CheckResult& c : r.checks) {
      checks.push_back(
          {{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    report["checks"] = checks;
    report["details"] = r.details;
    report["seconds"] = r.seconds;
    ctx.emit(report);
  } else {
    for (const CheckResult& c : r.checks) {
      *ctx.out << (c.passed ? "PASS" : "FAIL") << "  " << c.name << ": "
               << c.detail << "\n";
    }
    *ctx.out << "example " << r.example << ": "
             << (r.passed() ? "PASS" : "FAIL") << "\n";
  }
  return r.passed() ? kPass : kSemanticFailure;
}

int report_error(const Context& ctx, int code, const std::string& message) {
  if (ctx.json) {
    Json j = ctx.header();
    j["ok"] = false;
    j["exit_code"] = code;
    j["error"] = message;
    ctx.emit(j);
  } else {
    *ctx.err << "error: " << message << "\n";
  }
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Realization, minimization and simulation of asLPV-SSAs"};
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  app.add_flag("--json", ctx.json, "machine-readable output");

  ModelArgs validate_args;
  auto* validate = app.add_subcommand("validate", "structural and stability checks");
  add_model_args(validate, validate_args, false);

  CheckArgs check_args;
  auto* check = app.add_subcommand("check", "minimality, innovation form, invertability");
  add_model_args(check, check_args.model, false);
  check->add_flag("--minimal", check_args.minimal);
  check->add_flag("--innovation", check_args.innovation);
  check->add_flag("--stably-invertable", check_args.stably_invertable);

  MinimizeArgs minimize_args;
  auto* minimize = app.add_subcommand("minimize", "minimal innovation-form realization");
  add_model_args(minimize, minimize_args.model, false);
  minimize->add_option("--algorithm", minimize_args.algorithm)
      ->check(CLI::IsMember({"assoc", "stable-inv"}));
  minimize->add_option("--out", minimize_args.out, "output model JSON");
  minimize->add_flag("--recompute-noise", minimize_args.recompute_noise,
                     "stable-inv: recompute Q from the input's covariances");

  SimulateArgs simulate_args;
  auto* sim = app.add_subcommand("simulate", "sample a trajectory");
  add_model_args(sim, simulate_args.model, true);
  sim->add_option("--T", simulate_args.T, "retained samples")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", simulate_args.seed,
                  std::string("seed (default $") + kSeedEnv + " or 42)");
  sim->add_option("--burn-in", simulate_args.burn_in)
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--out", simulate_args.out, "trajectory CSV")->required();
  sim->add_flag("--no-state", simulate_args.no_state, "omit x and v columns");

  PsiArgs psi_args;
  auto* psi = app.add_subcommand("psi", "analytic and empirical Psi_y");
  psi->add_option("--model", psi_args.model)->check(CLI::ExistingFile);
  psi->add_option("--trajectory", psi_args.trajectory)
      ->check(CLI::ExistingFile);
  psi->add_option("--scheduling", psi_args.scheduling)
      ->check(CLI::ExistingFile);
  psi->add_option("--words", psi_args.words, "words such as e 1 12 21");
  psi->add_option("--max-len", psi_args.max_len, "all words up to this length")
      ->check(CLI::NonNegativeNumber);

  ReproduceArgs reproduce_args;
  auto* reproduce = app.add_subcommand("reproduce", "run a built-in example");
  reproduce->add_option("example,--example", reproduce_args.example)
      ->required()
      ->check(CLI::Range(1, 3));
  reproduce->add_option("--T", reproduce_args.T, "comparison length")
      ->check(CLI::PositiveNumber);
  reproduce->add_option("--seeds", reproduce_args.seeds, "SCHEDULING[,NOISE]");
  reproduce->add_option("--burn-in", reproduce_args.burn_in)
      ->check(CLI::NonNegativeNumber);

  std::vector<const char*> argv{"aslpv"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  const auto* chosen = app.get_subcommands().front();
  ctx.command = chosen->get_name();
  try {
    if (chosen == validate) return cmd_validate(ctx, validate_args);
    if (chosen == check) return cmd_check(ctx, check_args);
    if (chosen == minimize) return cmd_minimize(ctx, minimize_args);
    if (chosen == sim) return cmd_simulate(ctx, simulate_args);
    if (chosen == psi) return cmd_psi(ctx, psi_args);
    return cmd_reproduce(ctx, reproduce_args);
  } catch (const UsageError& e) {
    return report_error(ctx, kUsageError, e.what());
  } catch (const ParseError& e) {
    return report_error(ctx, kUsageError, e.what());
  } catch (const SemanticError& e) {
    return report_error(ctx, kSemanticFailure, e.what());
  } catch (const DomainError& e) {
    return report_error(ctx, kSemanticFailure, e.what());
  } catch (const ConvergenceError& e) {
    return report_error(ctx, kSemanticFailure, e.what());
  } catch (const DegeneracyError& e) {
    return report_error(ctx, kSemanticFailure, e.what());
  }
}

}  // namespace aslpv::cli
