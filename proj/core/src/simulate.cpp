#include "swcrt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "swcrt/error.hpp"

namespace swcrt {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_a,
                     std::uint64_t stream_b) {
  std::uint64_t k = mix64(seed + kGamma);
  k = mix64(k ^ mix64(stream_a + 0x632BE59BD9B4E019ull));
  k = mix64(k ^ mix64(stream_b + 0x85157AF5ull));
  key_ = k;
}

std::uint64_t RngStream::operator()() {
  return mix64(key_ + (++counter_) * kGamma);
}

double RngStream::uniform() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() { return -std::log(uniform()); }

double sample_positive_stable(double alpha, RngStream& rng) {
  if (!(alpha > 0 && alpha <= 1))
    throw Error("simgen.alpha", "stable index must lie in (0, 1]");
  if (alpha == 1) return 1.0;
  // Skewness 1 with scale cos(pi alpha / 2)^(1/alpha); the scale cancels
  // the usual S factor, leaving Kanter's form.
  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double shift = alpha * (v + std::numbers::pi / 2);
  return std::sin(shift) / std::pow(std::cos(v), 1 / alpha) *
         std::pow(std::cos(v - shift) / w, (1 - alpha) / alpha);
}

std::vector<std::vector<double>> sample_cluster(const std::vector<int>& schedule,
                                                int m, const HazardSpec& hazard,
                                                const CorrelationSpec& corr,
                                                RngStream& rng) {
  if (!corr.generative())
    throw Error("corr.not_generative", "simulation needs Kendall's tau input");
  corr.validate();
  const double outer = 1 - corr.tau_b;
  const double inner = (1 - corr.tau_w) / (1 - corr.tau_b);
  const double v0 = sample_positive_stable(outer, rng);
  std::vector<std::vector<double>> times(schedule.size(), std::vector<double>(m));
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const double rate = hazard.rate(static_cast<int>(j) + 1, schedule[j]);
    const double vj = sample_positive_stable(inner, rng);
    for (int k = 0; k < m; ++k) {
      // -log U with U = exp(-(E/V_j)^inner) uniform; then the outer frailty
      // maps it to the survival scale and the margin inverts it.
      const double x = std::pow(rng.exponential() / vj, inner);
      times[j][k] = std::pow(x / v0, outer) / rate;
    }
  }
  return times;
}

TrialDataset generate_trial(const TrialDesign& design, const HazardSpec& hazard,
                            const CensoringSpec& censoring,
                            const CorrelationSpec& corr, std::uint64_t seed,
                            std::uint64_t replicate) {
  hazard.validate(design.periods());
  censoring.validate();
  const int J = design.periods(), m = design.cluster_size(), n = design.clusters();
  TrialDataset out;
  out.periods = J;
  out.clusters = n;
  out.cluster_size = m;
  out.seed = seed;
  out.replicate = replicate;
  out.records.reserve(static_cast<std::size_t>(n) * J * m);
  for (int i = 0; i < n; ++i) {
    RngStream rng(seed, replicate, static_cast<std::uint64_t>(i));
    const auto& schedule = design.sequences()[design.sequence_of(i)];
    const auto times = sample_cluster(schedule, m, hazard, corr, rng);
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < m; ++k) {
        const double t = times[j][k];
        const double c = std::min(rng.uniform() * censoring.c_star, censoring.c_star);
        TrialRecord r;
        r.cluster = i + 1;
        r.period = j + 1;
        r.individual = k + 1;
        r.treatment = schedule[j];
        r.event = t <= c ? 1 : 0;
        r.time = r.event ? t : c;
        out.records.push_back(r);
      }
  }
  return out;
}

namespace {

// Inversions counted during a stable merge sort.
long long count_inversions(std::vector<double>& v, std::vector<double>& buf,
                           std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<long long>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return inv;
}

}  // namespace

double empirical_kendall_tau(const std::vector<std::pair<double, double>>& pairs) {
  const std::size_t n = pairs.size();
  if (n < 2) throw Error("simgen.tau_pairs", "Kendall's tau needs at least two pairs");
  auto sorted = pairs;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = sorted[i].second;
  const long long discordant = count_inversions(ys, buf, 0, n);
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return 1.0 - 2.0 * static_cast<double>(discordant) / total;
}

void write_dataset_csv(std::ostream& out, const TrialDataset& data) {
  out << "cluster,period,individual,time,event,treatment\n";
  char buf[64];
  for (const auto& r : data.records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.time);
    out << r.cluster << ',' << r.period << ',' << r.individual << ',' << buf << ','
        << r.event << ',' << r.treatment << '\n';
  }
}

std::string dataset_to_csv(const TrialDataset& data) {
  std::ostringstream out;
  write_dataset_csv(out, data);
  return out.str();
}

TrialDataset read_dataset_csv(std::istream& in) {
  std::string line;
  auto strip = [](std::string& s) {
    s.erase(std::remove(s.begin(), s.end(), '\r'), s.end());
  };
  if (!std::getline(in, line)) throw Error("dataset.empty", "dataset is empty");
  strip(line);
  if (line != "cluster,period,individual,time,event,treatment")
    throw Error("dataset.header",
                "expected header cluster,period,individual,time,event,treatment");
  TrialDataset data;
  std::set<int> clusters;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip(line);
    if (line.empty()) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    auto bad = [&] {
      return Error("dataset.parse", "line " + std::to_string(lineno) + " is malformed");
    };
    auto next_long = [&]() {
      long v = std::strtol(p, &end, 10);
      if (end == p) throw bad();
      p = end;
      return v;
    };
    auto comma = [&] {
      if (*p != ',') throw bad();
      ++p;
    };
    TrialRecord r;
    r.cluster = static_cast<int>(next_long());
    comma();
    r.period = static_cast<int>(next_long());
    comma();
    r.individual = static_cast<int>(next_long());
    comma();
    r.time = std::strtod(p, &end);
    if (end == p) throw bad();
    p = end;
    comma();
    r.event = static_cast<int>(next_long());
    comma();
    r.treatment = static_cast<int>(next_long());
    if (*p != '\0') throw bad();
    if (r.cluster < 1 || r.period < 1 || r.individual < 1 || !(r.time > 0) ||
        (r.event != 0 && r.event != 1) || (r.treatment != 0 && r.treatment != 1))
      throw Error("dataset.value", "line " + std::to_string(lineno) +
                                       " has an out-of-range value");
    clusters.insert(r.cluster);
    data.periods = std::max(data.periods, r.period);
    data.records.push_back(r);
  }
  if (data.records.empty()) throw Error("dataset.empty", "dataset has no records");
  data.clusters = static_cast<int>(clusters.size());
  const std::size_t cells = static_cast<std::size_t>(data.clusters) * data.periods;
  data.cluster_size = data.records.size() % cells == 0
                          ? static_cast<int>(data.records.size() / cells)
                          : 0;
  return data;
}

TrialDataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  return read_dataset_csv(in);
}

}  // namespace swcrt
