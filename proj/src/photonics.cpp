#include "smoney/photonics.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace smoney::photonics {

using qmath::QubitState;
using qmath::kPi;

void DetectorModel::validate(ReportingStrategy strategy) const {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::domain_error("DetectorModel: eta outside (0, 1]");
  for (double d : {dark_d0, dark_d1, dark_dp, dark_dm})
    if (!(d >= 0.0 && d < 1.0))
      throw std::domain_error("DetectorModel: dark count outside [0, 1)");
  if (strategy == ReportingStrategy::strategy1) {
    const double lhs = (1.0 - dark_d0) * (1.0 - dark_d1);
    const double rhs = (1.0 - dark_dp) * (1.0 - dark_dm);
    if (std::abs(lhs - rhs) > 1e-12)
      throw std::domain_error(
          "DetectorModel: strategy 1 requires (1-d0)(1-d1) = (1-d+)(1-d-)");
  }
}

double p_noqub(double mu) {
  if (mu < 0.0) throw std::domain_error("p_noqub: mu < 0");
  return -std::expm1(-mu + std::log1p(mu));
}

double p_det_theory(double mu, double eta) {
  if (mu < 0.0) throw std::domain_error("p_det_theory: mu < 0");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::domain_error("p_det_theory: eta outside [0, 1]");
  return 2.0 * (std::exp(-mu * eta / 2.0) - std::exp(-mu * eta));
}

double g1(int m, int w, double d0, double d1, double eta, int a) {
  if (a < 0) throw std::domain_error("g1: negative photon number");
  const double dp = (1.0 - d0) * (1.0 - d1);
  const double reported =
      dp * std::pow(1.0 - eta / 2.0, a) - dp * dp * std::pow(1.0 - eta, a);
  if (m == 1) return reported;  // same expression for either basis bit w
  return (w == 0) ? 1.0 - 2.0 * reported : 0.0;
}

double g2(int m, double d0, double d1, double eta, int a) {
  if (a < 0) throw std::domain_error("g2: negative photon number");
  const double silent = (1.0 - d0) * (1.0 - d1) * std::pow(1.0 - eta, a);
  return (m == 0) ? silent : 1.0 - silent;
}

void simulate_detection(double state_bloch_angle, int photons,
                        const DetectorModel& det, ReportingStrategy strategy,
                        int z_basis, Rng& rng, PulseRecord& rec) {
  const QubitState psi = QubitState::bloch(state_bloch_angle);
  // Born probability of the outcome-0 detector in basis u.
  const double p0_comp = psi.overlap2(qmath::bb84_state(0, 0));
  const double p0_had = psi.overlap2(qmath::bb84_state(0, 1));

  bool detected[4] = {false, false, false, false};  // D0 D1 D+ D-
  for (int ph = 0; ph < photons; ++ph) {
    int arm;  // 0: computational pair, 1: Hadamard pair
    if (strategy == ReportingStrategy::strategy1)
      arm = rng.uniform_bit();  // 50:50 splitter
    else
      arm = z_basis;  // wave plate fixed by z
    const double p0 = (arm == 0) ? p0_comp : p0_had;
    const int outcome = rng.bernoulli(p0) ? 0 : 1;
    if (rng.bernoulli(det.eta)) detected[arm * 2 + outcome] = true;
  }

  bool click[4];
  const double darks[4] = {det.dark_d0, det.dark_d1, det.dark_dp, det.dark_dm};
  for (int i = 0; i < 4; ++i)
    click[i] = detected[i] || rng.bernoulli(darks[i]);

  rec.click_d0 = click[0];
  rec.click_d1 = click[1];
  rec.click_dp = click[2];
  rec.click_dm = click[3];

  const bool comp_fired = click[0] || click[1];
  const bool had_fired = click[2] || click[3];

  auto assign_outcome = [&](int i0, int i1) -> int {
    if (click[i0] && click[i1]) return rng.uniform_bit();  // random on double click
    return click[i1] ? 1 : 0;
  };

  if (strategy == ReportingStrategy::strategy1) {
    if (comp_fired && !had_fired) {
      rec.m = 1;
      rec.w = 0;
      rec.x = assign_outcome(0, 1);
    } else if (had_fired && !comp_fired) {
      rec.m = 1;
      rec.w = 1;
      rec.x = assign_outcome(2, 3);
    } else {
      rec.m = 0;
      rec.w = 0;
      rec.x = -1;
    }
  } else {
    const int base = z_basis * 2;
    if (click[base] || click[base + 1]) {
      rec.m = 1;
      rec.w = static_cast<std::uint8_t>(z_basis);
      rec.x = assign_outcome(base, base + 1);
    } else {
      rec.m = 0;
      rec.w = 0;
      rec.x = -1;
    }
  }
}

namespace {

void simulate_range(const SourceModel& source, const DetectorModel& det,
                    ReportingStrategy strategy, const PrepConfig& prep,
                    std::uint64_t seed, int z_run, long long first,
                    long long last, std::vector<PulseRecord>& out) {
  const double p_t0 = 0.5 + prep.beta_ps.value();
  const double p_u0 = 0.5 + prep.beta_pb.value();
  const double theta = prep.theta.rad();
  for (long long k = first; k < last; ++k) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
    PulseRecord& rec = out[static_cast<std::size_t>(k - first)];
    rec.k = k;
    rec.t = rng.bernoulli(p_t0) ? 0 : 1;
    rec.u = rng.bernoulli(p_u0) ? 0 : 1;
    rec.photons = source.fixed_photon_number >= 0 ? source.fixed_photon_number
                                                  : rng.poisson(source.mu);
    const double tilt = theta > 0.0 ? (2.0 * rng.uniform() - 1.0) * theta : 0.0;
    const double angle = rec.t * kPi + rec.u * (kPi / 2.0) + tilt;
    simulate_detection(angle, rec.photons, det, strategy, z_run, rng, rec);
    if (rec.m == 1 && rec.w == rec.u && prep.inject_error_rate > 0.0 &&
        rng.bernoulli(prep.inject_error_rate))
      rec.x ^= 1;
  }
}

}  // namespace

std::vector<PulseRecord> simulate_pulses(const SourceModel& source,
                                         const DetectorModel& det,
                                         ReportingStrategy strategy,
                                         const PrepConfig& prep, long long N,
                                         std::uint64_t seed, int jobs) {
  if (N < 1) throw std::domain_error("simulate_pulses: N must be >= 1");
  det.validate(strategy);

  int z_run = 0;
  if (strategy == ReportingStrategy::strategy2) {
    Rng zrng = Rng::stream(seed, static_cast<std::uint64_t>(N));
    z_run = zrng.uniform_bit();
  }

  std::vector<PulseRecord> records(static_cast<std::size_t>(N));
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    simulate_range(source, det, strategy, prep, seed, z_run, 0, N, records);
    return records;
  }

  std::vector<std::thread> workers;
  const long long chunk = (N + jobs - 1) / jobs;
  for (int j = 0; j < jobs; ++j) {
    const long long first = j * chunk;
    const long long last = std::min<long long>(N, first + chunk);
    if (first >= last) break;
    workers.emplace_back([&, first, last]() {
      std::vector<PulseRecord> local(static_cast<std::size_t>(last - first));
      simulate_range(source, det, strategy, prep, seed, z_run, first, last,
                     local);
      std::copy(local.begin(), local.end(),
                records.begin() + static_cast<std::size_t>(first));
    });
  }
  for (auto& w : workers) w.join();
  return records;
}

void write_records_csv(std::ostream& out,
                       const std::vector<PulseRecord>& recs) {
  out << "# smoney-records v1\n";
  out << "k,t,u,L,click_D0,click_D1,click_Dp,click_Dm,m,w,x\n";
  for (const PulseRecord& r : recs) {
    out << r.k << ',' << int(r.t) << ',' << int(r.u) << ',' << r.photons << ','
        << int(r.click_d0) << ',' << int(r.click_d1) << ',' << int(r.click_dp)
        << ',' << int(r.click_dm) << ',' << int(r.m) << ',' << int(r.w) << ',';
    if (r.m == 1) out << r.x;
    out << '\n';
  }
}

std::vector<PulseRecord> read_records_csv(std::istream& in) {
  std::vector<PulseRecord> recs;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {  // column header
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string field;
    PulseRecord r;
    auto next_int = [&](int& dst) {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("records csv: truncated row");
      dst = std::stoi(field);
    };
    int v = 0;
    if (!std::getline(ss, field, ','))
      throw std::runtime_error("records csv: truncated row");
    r.k = std::stoll(field);
    next_int(v); r.t = static_cast<std::uint8_t>(v);
    next_int(v); r.u = static_cast<std::uint8_t>(v);
    next_int(v); r.photons = v;
    next_int(v); r.click_d0 = v != 0;
    next_int(v); r.click_d1 = v != 0;
    next_int(v); r.click_dp = v != 0;
    next_int(v); r.click_dm = v != 0;
    next_int(v); r.m = static_cast<std::uint8_t>(v);
    next_int(v); r.w = static_cast<std::uint8_t>(v);
    if (std::getline(ss, field, ','))
      r.x = field.empty() ? -1 : std::stoi(field);
    else
      r.x = -1;
    recs.push_back(r);
  }
  return recs;
}

}  // namespace smoney::photonics
