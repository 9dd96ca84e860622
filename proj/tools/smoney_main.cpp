// Command-line entry point wiring the bound evaluators, the feasibility
// sweep, the small-N oracle, the photonic Monte Carlo, record analysis and
// the protocol engine.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "smoney/analysis.hpp"
#include "smoney/bounds.hpp"
#include "smoney/oracle.hpp"
#include "smoney/photonics.hpp"
#include "smoney/protocol.hpp"
#include "smoney/qmath.hpp"
#include "smoney/rng.hpp"
#include "smoney/spacetime.hpp"

namespace {

using nlohmann::json;
namespace bd = smoney::bounds;
namespace an = smoney::analysis;
namespace ph = smoney::photonics;
namespace pr = smoney::protocol;
namespace orc = smoney::oracle;
using smoney::qmath::Angle;
using smoney::qmath::Bias;

constexpr int kExitOk = 0;
constexpr int kExitIoError = 1;
constexpr int kExitConstraint = 2;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SMONEY_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 1;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

bd::SchemeParams params_from_json(const json& p) {
  bd::SchemeParams out;
  out.N = p.value("N", 1ll);
  out.M = p.value("M", 1);
  out.p_det = p.value("P_det", 0.0);
  out.error_rate = p.value("E", 0.0);
  out.gamma_det = p.value("gamma_det", 0.0);
  out.gamma_err = p.value("gamma_err", 0.0);
  out.beta_pb = Bias(p.value("beta_PB", 0.0));
  out.beta_ps = Bias(p.value("beta_PS", 0.0));
  out.beta_e = Bias(p.value("beta_E", 0.0));
  out.theta = Angle::degrees(p.value("theta_deg", 0.0));
  out.p_noqub = p.value("P_noqub", 0.0);
  out.mu = p.value("mu", 0.0);
  out.eta = p.value("eta", 1.0);
  return out;
}

pr::Geometry geometry_from_json(const json& g) {
  pr::Geometry geo;
  geo.stage_point = smoney::spacetime::Point{
      g.at("stage").value("t", 0.0), g.at("stage").value("x", 0.0), "P"};
  for (const json& pj : g.at("points"))
    geo.presentation.push_back(smoney::spacetime::Point{
        pj.at("t").get<double>(), pj.at("x").get<double>(),
        pj.at("label").get<std::string>()});
  return geo;
}

an::CountTable counts_from_json(const json& cj) {
  an::CountTable c;
  c.N = cj.at("N").get<long long>();
  c.n = cj.at("n").get<long long>();
  const char* tu[2][2] = {{"00", "01"}, {"10", "11"}};
  for (int t = 0; t < 2; ++t)
    for (int u = 0; u < 2; ++u) {
      c.n_tu[t][u] = cj.at("n_tu").at(tu[t][u]).get<long long>();
      c.n_same[t][u] = cj.at("n_same").at(tu[t][u]).get<long long>();
      c.n_err[t][u] = cj.at("n_err").at(tu[t][u]).get<long long>();
    }
  return c;
}

// ---- subcommand runners ---------------------------------------------------

struct BoundsArgs {
  std::string config, out;
  bool validate_only = false;
};

int run_bounds(const BoundsArgs& a) {
  const json cfg = load_json(a.config);
  const bd::SchemeParams params = params_from_json(cfg.at("params"));
  bd::FreeVariables vars;
  vars.nu_cor = cfg.at("free").value("nu_cor", 0.0);
  vars.nu_unf = cfg.at("free").value("nu_unf", 0.0);

  std::optional<long long> pairs;
  if (cfg.contains("geometry")) {
    const pr::Geometry geo = geometry_from_json(cfg.at("geometry"));
    pairs = smoney::spacetime::count_spacelike_pairs(geo.presentation);
  }

  auto rob_checks = bd::check_rob_constraints(params);
  auto cor_checks = bd::check_cor_constraints(params, vars);
  auto unf_checks = bd::check_unf_constraints(params, vars);
  bool hard_violation = false;
  for (const auto& list : {rob_checks, cor_checks})
    for (const auto& c : list)
      if (!c.ok) {
        std::cerr << "constraint violated: " << c.name << " (margin "
                  << c.margin << ")\n";
        hard_violation = true;
      }
  if (a.validate_only) {
    for (const auto& c : unf_checks)
      if (!c.ok)
        std::cerr << "unforgeability constraint violated: " << c.name
                  << " (margin " << c.margin << ")\n";
    std::cout << (hard_violation ? "invalid\n" : "valid\n");
    return hard_violation ? kExitConstraint : kExitOk;
  }
  if (hard_violation) return kExitConstraint;

  const bd::BoundReport report = bd::evaluate_bounds(params, vars, pairs);
  write_text(a.out, report.to_json() + "\n");
  return kExitOk;
}

struct SweepArgs {
  std::string config, out;
  bool fig2 = false;
  double target = 1e-9;
  std::vector<double> theta_deg, error_rates;
  double nu_unf = -1.0;
  int jobs = 1;
};

int run_sweep(const SweepArgs& a) {
  bd::SweepFixed fixed;
  if (!a.config.empty()) {
    const json cfg = load_json(a.config);
    fixed.base = params_from_json(cfg.at("params"));
  } else {
    // Reference-experiment fixed parameters.
    fixed.base.N = 40000000;
    fixed.base.p_det = 0.019;
    fixed.base.gamma_det = 0.018;
    fixed.base.p_noqub = 3.8e-3;
  }
  fixed.target = a.target;
  if (a.nu_unf > 0.0) fixed.nu_unf_override = a.nu_unf;

  std::vector<double> thetas = a.theta_deg;
  std::vector<double> errors = a.error_rates;
  if (a.fig2) {
    thetas.clear();
    for (int d = 0; d <= 11; ++d) thetas.push_back(d);
    errors = {0.01, 0.03, 0.058};
  }
  if (thetas.empty() || errors.empty()) {
    std::cerr << "sweep: need --fig2 or both --theta-deg and --error-rates\n";
    return kExitIoError;
  }
  std::vector<Angle> grid;
  for (double d : thetas) grid.push_back(Angle::degrees(d));

  const auto rows = bd::sweep_beta_max(fixed, grid, errors, a.jobs);
  write_text(a.out, bd::sweep_csv(rows));
  return kExitOk;
}

struct OracleArgs {
  bool ideal = false;
  int N = 1;
  double gamma_err = 0.0;
  double theta_deg = -1.0, xi0 = 0.0, xi1 = 0.0, p0 = 0.5;
  int random_count = 0;
  std::uint64_t seed = 1;
  std::string out;
  int jobs = 1;
};

int run_oracle(const OracleArgs& a) {
  std::vector<orc::PreparationSpec> specs;
  if (a.random_count > 0) {
    smoney::Rng rng(a.seed);
    for (int i = 0; i < a.random_count; ++i) {
      const double theta = rng.uniform() * smoney::qmath::kPi / 4.0 * 0.999;
      const double xi0 = (2.0 * rng.uniform() - 1.0) * theta;
      const double xi1 = (2.0 * rng.uniform() - 1.0) * theta;
      const double beta = rng.uniform() * 0.45;
      specs.push_back(orc::PreparationSpec::homogeneous_tilted(
          a.N, Angle::radians(theta), xi0, xi1, 0.5 + beta));
    }
  } else if (a.ideal) {
    specs.push_back(orc::PreparationSpec::ideal_bb84(a.N));
  } else if (a.theta_deg >= 0.0) {
    specs.push_back(orc::PreparationSpec::homogeneous_tilted(
        a.N, Angle::degrees(a.theta_deg), a.xi0, a.xi1, a.p0));
  } else {
    std::cerr << "oracle: need --ideal, --theta-deg or --random-homogeneous\n";
    return kExitIoError;
  }

  std::ostringstream out;
  for (const auto& spec : specs) {
    const orc::OracleResult res =
        orc::max_norm_exact(spec, a.gamma_err, a.jobs);
    out << res.to_json(-1) << "\n";
  }
  write_text(a.out, out.str());
  return kExitOk;
}

struct SimulateArgs {
  long long pulses = 0;
  double mu = 0.09, eta = 0.21, dark = 0.0;
  int strategy = 1;
  double beta_ps = 0.0, beta_pb = 0.0, theta_deg = 0.0, inject_error = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  bool only_reported = false;
  int jobs = 1;
};

int run_simulate(const SimulateArgs& a) {
  ph::SourceModel source;
  source.mu = a.mu;
  ph::DetectorModel det;
  det.eta = a.eta;
  det.dark_d0 = det.dark_d1 = det.dark_dp = det.dark_dm = a.dark;
  ph::PrepConfig prep;
  prep.beta_ps = Bias(a.beta_ps);
  prep.beta_pb = Bias(a.beta_pb);
  prep.theta = Angle::degrees(a.theta_deg);
  prep.inject_error_rate = a.inject_error;
  const auto strategy = a.strategy == 1 ? ph::ReportingStrategy::strategy1
                                        : ph::ReportingStrategy::strategy2;
  auto records =
      ph::simulate_pulses(source, det, strategy, prep, a.pulses, a.seed, a.jobs);
  if (a.only_reported) {
    std::erase_if(records, [](const ph::PulseRecord& r) { return r.m == 0; });
  }
  std::ostringstream out;
  ph::write_records_csv(out, records);
  write_text(a.out, out.str());
  return kExitOk;
}

struct AnalyzeArgs {
  std::string records, counts, out;
  bool reference_counts_flag = false, text = false, all_pulses = false;
  long long transmitted = -1;
};

int run_analyze(const AnalyzeArgs& a) {
  an::CountTable table;
  if (a.reference_counts_flag) {
    table = an::reference_counts();
  } else if (!a.counts.empty()) {
    table = counts_from_json(load_json(a.counts));
  } else if (!a.records.empty()) {
    std::ifstream in(a.records);
    if (!in) throw std::runtime_error("cannot open " + a.records);
    const auto records = ph::read_records_csv(in);
    const long long transmitted =
        a.transmitted > 0 ? a.transmitted
                          : static_cast<long long>(records.size());
    table = an::tally(records, transmitted);
  } else {
    std::cerr << "analyze: need --records, --counts or --reference-counts\n";
    return kExitIoError;
  }
  const an::StatsReport report = an::estimate_stats(
      table, a.all_pulses ? an::BiasSource::all_pulses
                          : an::BiasSource::reported_pulses);
  write_text(a.out, a.text ? report.render_text() : report.to_json() + "\n");
  return kExitOk;
}

struct ProtocolArgs {
  std::string scheme = "QT1";
  std::string geometry;
  std::string config;
  long long N = 1000;
  int M = 1;
  double p_det = 1.0, error_rate = 0.0, gamma_det = 0.0, gamma_err = 0.0;
  double beta_pb = 0.0, beta_ps = 0.0, beta_e = 0.0;
  std::string b_bits = "0";
  std::string adversary;
  std::string target_pair = "0,1";
  long long trials = 1;
  std::uint64_t seed = 1;
  std::string out, transcript;
};

int run_protocol(ProtocolArgs a) {
  // A run config JSON may carry the whole experiment description; explicit
  // flags for params are ignored when a config is given.
  json cfg;
  if (!a.config.empty()) cfg = load_json(a.config);
  bd::SchemeParams params;
  if (cfg.contains("params")) {
    params = params_from_json(cfg.at("params"));
  } else {
    params.N = a.N;
    params.M = a.M;
    params.p_det = a.p_det;
    params.error_rate = a.error_rate;
    params.gamma_det = a.gamma_det;
    params.gamma_err = a.gamma_err;
    params.beta_pb = Bias(a.beta_pb);
    params.beta_ps = Bias(a.beta_ps);
    params.beta_e = Bias(a.beta_e);
  }
  if (cfg.contains("scheme")) a.scheme = cfg.at("scheme").get<std::string>();
  if (cfg.contains("adversary"))
    a.adversary = cfg.at("adversary").get<std::string>();
  if (cfg.contains("trials")) a.trials = cfg.at("trials").get<long long>();
  if (cfg.contains("seed")) a.seed = cfg.at("seed").get<std::uint64_t>();
  if (cfg.contains("b")) a.b_bits = cfg.at("b").get<std::string>();
  if (cfg.contains("target_pair"))
    a.target_pair = cfg.at("target_pair").get<std::string>();

  const pr::Scheme scheme = pr::scheme_from_string(a.scheme);
  const int M = pr::is_multi(scheme) ? params.M : 1;
  pr::Geometry geo;
  if (cfg.contains("geometry"))
    geo = geometry_from_json(cfg.at("geometry"));
  else if (!a.geometry.empty())
    geo = geometry_from_json(load_json(a.geometry));
  else
    geo = M == 1 ? pr::Geometry::two_points_spacelike()
                 : pr::Geometry::simultaneous(M);

  json out;
  if (a.adversary.empty()) {
    std::vector<std::uint8_t> b;
    for (char ch : a.b_bits) b.push_back(ch == '1' ? 1 : 0);
    long long validated = 0, aborted = 0, causal_fail = 0;
    std::string transcript_dump;
    for (long long trial = 0; trial < a.trials; ++trial) {
      const pr::Transcript tr = pr::run_honest(
          scheme, params, geo, b, a.seed + static_cast<std::uint64_t>(trial));
      validated += tr.validated ? 1 : 0;
      aborted += tr.aborted ? 1 : 0;
      causal_fail += tr.causal_check_passed ? 0 : 1;
      if (trial == 0 && !a.transcript.empty()) transcript_dump = tr.to_jsonl();
    }
    if (!a.transcript.empty()) write_text(a.transcript, transcript_dump);
    out["mode"] = "honest";
    out["trials"] = a.trials;
    out["validated"] = validated;
    out["aborted"] = aborted;
    out["causal_failures"] = causal_fail;
  } else {
    const auto comma = a.target_pair.find(',');
    if (comma == std::string::npos) {
      std::cerr << "protocol: --target-pair expects v,w labels\n";
      return kExitIoError;
    }
    const pr::ForgeryStats stats = pr::run_double_spend(
        pr::adversary_from_string(a.adversary), scheme, params, geo,
        {a.target_pair.substr(0, comma), a.target_pair.substr(comma + 1)},
        a.trials, a.seed);
    out["mode"] = "double_spend";
    out["adversary"] = a.adversary;
    out["trials"] = stats.trials;
    out["successes"] = stats.successes;
    out["frequency"] = stats.frequency;
    out["accepted_first"] = stats.accepted_first;
    out["accepted_second"] = stats.accepted_second;
    out["causal_check_passed"] = stats.causal_check_passed;
  }
  write_text(a.out, out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"s-money quantum token scheme laboratory"};
  app.require_subcommand(1);

  BoundsArgs bounds_args;
  auto* cmd_bounds = app.add_subcommand("bounds", "evaluate security bounds");
  cmd_bounds->add_option("--config", bounds_args.config, "JSON config")
      ->required();
  cmd_bounds->add_option("--out", bounds_args.out, "output path (default stdout)");
  cmd_bounds->add_flag("--validate-only", bounds_args.validate_only,
                       "check constraints without computing");

  SweepArgs sweep_args;
  auto* cmd_sweep = app.add_subcommand("sweep", "beta_max feasibility sweep");
  cmd_sweep->add_flag("--fig2", sweep_args.fig2,
                      "theta 0..11 deg, E in {0.01, 0.03, 0.058}");
  cmd_sweep->add_option("--target", sweep_args.target, "eps budget (default 1e-9)");
  cmd_sweep->add_option("--theta-deg", sweep_args.theta_deg, "theta grid, degrees");
  cmd_sweep->add_option("--error-rates", sweep_args.error_rates, "error rate list");
  cmd_sweep->add_option("--nu-unf", sweep_args.nu_unf,
                        "override the default nu_unf heuristic");
  cmd_sweep->add_option("--config", sweep_args.config, "fixed params JSON");
  cmd_sweep->add_option("--out", sweep_args.out, "CSV output path");
  cmd_sweep->add_option("--jobs", sweep_args.jobs, "worker threads");

  OracleArgs oracle_args;
  oracle_args.seed = default_seed();
  auto* cmd_oracle = app.add_subcommand("oracle", "small-N norm oracle");
  cmd_oracle->add_flag("--ideal", oracle_args.ideal, "ideal BB84 ensemble");
  cmd_oracle->add_option("--N", oracle_args.N, "qubit count (<= 12)")->required();
  cmd_oracle->add_option("--gamma-err", oracle_args.gamma_err, "error threshold");
  cmd_oracle->add_option("--theta-deg", oracle_args.theta_deg,
                         "homogeneous spec: declared theta");
  cmd_oracle->add_option("--xi0", oracle_args.xi0, "basis-0 tilt (radians)");
  cmd_oracle->add_option("--xi1", oracle_args.xi1, "basis-1 tilt (radians)");
  cmd_oracle->add_option("--p0", oracle_args.p0, "basis probability P(u=0)");
  cmd_oracle->add_option("--random-homogeneous", oracle_args.random_count,
                         "number of random homogeneous specs");
  cmd_oracle->add_option("--seed", oracle_args.seed, "RNG seed");
  cmd_oracle->add_option("--out", oracle_args.out, "output path");
  cmd_oracle->add_option("--jobs", oracle_args.jobs, "worker threads");

  SimulateArgs sim_args;
  sim_args.seed = default_seed();
  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo pulse stream");
  cmd_sim->add_option("--pulses", sim_args.pulses, "number of pulses")->required();
  cmd_sim->add_option("--mu", sim_args.mu, "mean photon number");
  cmd_sim->add_option("--eta", sim_args.eta, "detection efficiency");
  cmd_sim->add_option("--dark", sim_args.dark, "dark count probability (all arms)");
  cmd_sim->add_option("--strategy", sim_args.strategy, "reporting strategy 1|2");
  cmd_sim->add_option("--beta-ps", sim_args.beta_ps, "state bias");
  cmd_sim->add_option("--beta-pb", sim_args.beta_pb, "basis bias");
  cmd_sim->add_option("--theta-deg", sim_args.theta_deg, "tilt bound, degrees");
  cmd_sim->add_option("--inject-error", sim_args.inject_error,
                      "extra same-basis flip probability");
  cmd_sim->add_option("--seed", sim_args.seed, "RNG seed");
  cmd_sim->add_flag("--only-reported", sim_args.only_reported,
                    "write only m=1 rows");
  cmd_sim->add_option("--out", sim_args.out, "CSV output path");
  cmd_sim->add_option("--jobs", sim_args.jobs, "worker threads");

  AnalyzeArgs an_args;
  auto* cmd_an = app.add_subcommand("analyze", "estimate statistics");
  cmd_an->add_option("--records", an_args.records, "records CSV");
  cmd_an->add_option("--counts", an_args.counts, "count table JSON");
  cmd_an->add_flag("--reference-counts", an_args.reference_counts_flag,
                   "embedded reference-experiment counts");
  cmd_an->add_option("--transmitted", an_args.transmitted,
                     "total transmitted pulses (for --only-reported records)");
  cmd_an->add_flag("--all-pulses", an_args.all_pulses,
                   "bias estimators over every transmitted pulse (needs the "
                   "full record stream)");
  cmd_an->add_flag("--text", an_args.text, "human-readable two-sig-fig report");
  cmd_an->add_option("--out", an_args.out, "output path");

  ProtocolArgs pr_args;
  pr_args.seed = default_seed();
  auto* cmd_pr = app.add_subcommand("protocol", "token scheme runs");
  cmd_pr->add_option("--scheme", pr_args.scheme,
                     "IQT1|IQT2|QT1|QT2|QT1M|QT2M");
  cmd_pr->add_option("--config", pr_args.config, "params JSON");
  cmd_pr->add_option("--geometry", pr_args.geometry, "geometry JSON");
  cmd_pr->add_option("--N", pr_args.N, "states per round");
  cmd_pr->add_option("--M", pr_args.M, "rounds (multi schemes)");
  cmd_pr->add_option("--p-det", pr_args.p_det, "detection probability");
  cmd_pr->add_option("--error-rate", pr_args.error_rate, "error rate E");
  cmd_pr->add_option("--gamma-det", pr_args.gamma_det, "abort threshold");
  cmd_pr->add_option("--gamma-err", pr_args.gamma_err, "validation threshold");
  cmd_pr->add_option("--beta-pb", pr_args.beta_pb, "basis bias");
  cmd_pr->add_option("--beta-ps", pr_args.beta_ps, "state bias");
  cmd_pr->add_option("--beta-e", pr_args.beta_e, "encoding bias");
  cmd_pr->add_option("--b", pr_args.b_bits, "presentation label bits");
  cmd_pr->add_option("--adversary", pr_args.adversary,
                     "measure_once_replay|random_second_token|basis_guess");
  cmd_pr->add_option("--target-pair", pr_args.target_pair, "v,w labels");
  cmd_pr->add_option("--trials", pr_args.trials, "number of runs");
  cmd_pr->add_option("--seed", pr_args.seed, "RNG seed");
  cmd_pr->add_option("--out", pr_args.out, "stats output path");
  cmd_pr->add_option("--transcript", pr_args.transcript,
                     "JSONL transcript of the first run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return kExitOk;
    return 64;  // usage error
  }

  try {
    if (cmd_bounds->parsed()) return run_bounds(bounds_args);
    if (cmd_sweep->parsed()) return run_sweep(sweep_args);
    if (cmd_oracle->parsed()) return run_oracle(oracle_args);
    if (cmd_sim->parsed()) return run_simulate(sim_args);
    if (cmd_an->parsed()) return run_analyze(an_args);
    if (cmd_pr->parsed()) return run_protocol(pr_args);
  } catch (const bd::PreconditionError& e) {
    std::cerr << e.what() << "\n";
    return kExitConstraint;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitConstraint;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  return kExitOk;
}
