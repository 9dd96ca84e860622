#include "smoney/analysis.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace smoney::analysis {

bool CountTable::has_prepared_counts() const {
  long long sum = 0;
  for (int t = 0; t < 2; ++t)
    for (int u = 0; u < 2; ++u) sum += prepared_tu[t][u];
  return sum > 0;
}

void CountTable::validate() const {
  long long sum = 0;
  for (int t = 0; t < 2; ++t)
    for (int u = 0; u < 2; ++u) {
      if (n_err[t][u] > n_same[t][u])
        throw std::domain_error("CountTable: n_err > n_same");
      if (n_same[t][u] > n_tu[t][u])
        throw std::domain_error("CountTable: n_same > n_tu");
      if (prepared_tu[t][u] != 0 && n_tu[t][u] > prepared_tu[t][u])
        throw std::domain_error("CountTable: n_tu > prepared_tu");
      sum += n_tu[t][u];
    }
  if (sum != n) throw std::domain_error("CountTable: n != sum of n_tu");
  if (n > N) throw std::domain_error("CountTable: n > N");
}

CountTable tally(std::span<const photonics::PulseRecord> records,
                 long long total_transmitted) {
  CountTable c;
  c.N = total_transmitted;
  // Prepared counts are complete only when the stream carries every pulse.
  const bool full_stream =
      static_cast<long long>(records.size()) == total_transmitted;
  for (const auto& r : records) {
    if (full_stream) ++c.prepared_tu[r.t][r.u];
    if (!r.in_lambda()) continue;
    ++c.n;
    ++c.n_tu[r.t][r.u];
    if (r.w == r.u) {
      ++c.n_same[r.t][r.u];
      if (r.x != r.t) ++c.n_err[r.t][r.u];
    }
  }
  if (!full_stream)
    for (int t = 0; t < 2; ++t)
      for (int u = 0; u < 2; ++u) c.prepared_tu[t][u] = 0;
  return c;
}

namespace {

struct BiasCounts {
  long long tu[2][2];
  long long total;
};

void fill_biases(const BiasCounts& counts, StatsReport& rep,
                 std::ostringstream& missing) {
  const long long comp = counts.tu[0][0] + counts.tu[1][0];
  const long long had = counts.tu[0][1] + counts.tu[1][1];
  if (counts.total > 0) {
    rep.beta_pb = std::abs(static_cast<double>(comp) /
                               static_cast<double>(counts.total) - 0.5);
  } else {
    missing << "beta_PB ";
  }
  if (comp > 0 && had > 0) {
    const double dev0 = std::abs(static_cast<double>(counts.tu[0][0]) /
                                     static_cast<double>(comp) - 0.5);
    const double dev1 = std::abs(static_cast<double>(counts.tu[0][1]) /
                                     static_cast<double>(had) - 0.5);
    rep.beta_ps = std::max(dev0, dev1);
  } else {
    missing << "beta_PS ";
  }
}

}  // namespace

StatsReport estimate_stats(const CountTable& counts, BiasSource bias_source) {
  counts.validate();
  StatsReport rep;
  std::ostringstream missing;

  if (counts.N <= 0) throw std::domain_error("estimate_stats: N <= 0");
  rep.p_det = static_cast<double>(counts.n) / static_cast<double>(counts.N);

  bool all_cells = true;
  double emax = 0.0;
  for (int t = 0; t < 2; ++t)
    for (int u = 0; u < 2; ++u) {
      if (counts.n_same[t][u] > 0) {
        const double e = static_cast<double>(counts.n_err[t][u]) /
                         static_cast<double>(counts.n_same[t][u]);
        rep.e_tu[t][u] = e;
        emax = std::max(emax, e);
      } else {
        all_cells = false;
        missing << "E_" << t << u << ' ';
      }
    }
  if (all_cells) rep.error_rate = emax;

  BiasCounts bias{};
  if (bias_source == BiasSource::all_pulses) {
    if (!counts.has_prepared_counts())
      throw std::domain_error(
          "estimate_stats: all-pulse biases need prepared_tu counts");
    bias.total = 0;
    for (int t = 0; t < 2; ++t)
      for (int u = 0; u < 2; ++u) {
        bias.tu[t][u] = counts.prepared_tu[t][u];
        bias.total += counts.prepared_tu[t][u];
      }
  } else {
    for (int t = 0; t < 2; ++t)
      for (int u = 0; u < 2; ++u) bias.tu[t][u] = counts.n_tu[t][u];
    bias.total = counts.n;
  }
  fill_biases(bias, rep, missing);

  rep.insufficient = missing.str();
  if (!rep.insufficient.empty()) rep.insufficient.pop_back();
  return rep;
}

std::string format_two_sig(double v) {
  if (v == 0.0) return "0";
  const double mag = std::abs(v);
  const int exponent = static_cast<int>(std::floor(std::log10(mag)));
  const int decimals = std::max(0, 1 - exponent);
  std::ostringstream out;
  if (exponent < -4 || exponent > 5) {
    out.precision(1);
    out << std::scientific << v;
  } else {
    out.precision(decimals);
    out << std::fixed << v;
  }
  return out.str();
}

std::string StatsReport::to_json(int indent) const {
  nlohmann::json j;
  j["P_det"] = p_det;
  for (int t = 0; t < 2; ++t)
    for (int u = 0; u < 2; ++u) {
      const std::string key = "E_" + std::to_string(t) + std::to_string(u);
      if (e_tu[t][u]) j[key] = *e_tu[t][u];
    }
  if (error_rate) j["E"] = *error_rate;
  if (beta_pb) j["beta_PB"] = *beta_pb;
  if (beta_ps) j["beta_PS"] = *beta_ps;
  if (!insufficient.empty()) j["insufficient_data"] = insufficient;
  return j.dump(indent);
}

std::string StatsReport::render_text() const {
  std::ostringstream out;
  out << "P_det   = " << format_two_sig(p_det) << '\n';
  for (int t = 0; t < 2; ++t)
    for (int u = 0; u < 2; ++u) {
      out << "E_" << t << u << "    = ";
      if (e_tu[t][u])
        out << format_two_sig(*e_tu[t][u]) << '\n';
      else
        out << "insufficient data\n";
    }
  out << "E       = "
      << (error_rate ? format_two_sig(*error_rate) : "insufficient data")
      << '\n';
  out << "beta_PB = "
      << (beta_pb ? format_two_sig(*beta_pb) : "insufficient data") << '\n';
  out << "beta_PS = "
      << (beta_ps ? format_two_sig(*beta_ps) : "insufficient data") << '\n';
  return out.str();
}

CountTable reference_counts() {
  CountTable c;
  c.N = 40000000;
  c.n = 742491;
  c.n_tu[0][0] = 185166;
  c.n_tu[1][0] = 187842;
  c.n_tu[0][1] = 184251;
  c.n_tu[1][1] = 185232;
  c.n_same[0][0] = 80786;
  c.n_same[1][0] = 121159;
  c.n_same[0][1] = 93618;
  c.n_same[1][1] = 80653;
  c.n_err[0][0] = 4725;
  c.n_err[1][0] = 2250;
  c.n_err[0][1] = 1602;
  c.n_err[1][1] = 3851;
  return c;
}

}  // namespace smoney::analysis
