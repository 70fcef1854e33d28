#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "swcrt/design.hpp"
#include "swcrt/survival.hpp"

namespace swcrt {

// Counter-based generator: draw i of a stream is a pure function of
// (seed, stream ids, i), so replicate r / cluster c always sees the same
// numbers however the work is scheduled. Not shareable across threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b = 0);

  std::uint64_t operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  double uniform();      // open interval (0, 1)
  double exponential();  // rate 1
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// One-sided stable law with Laplace transform exp(-t^alpha), alpha in (0, 1],
// by the Chambers-Mallows-Stuck construction.
double sample_positive_stable(double alpha, RngStream& rng);

// Event times for one cluster (periods x m), nested Gumbel dependence:
// outer frailty V0 of index 1 - tau_b shared by the cluster, inner V_j of
// index (1 - tau_w) / (1 - tau_b) shared by the cluster-period.
std::vector<std::vector<double>> sample_cluster(const std::vector<int>& schedule,
                                                int m, const HazardSpec& hazard,
                                                const CorrelationSpec& corr,
                                                RngStream& rng);

struct TrialRecord {
  int cluster = 0;     // 1-based
  int period = 0;      // 1-based
  int individual = 0;  // 1-based
  double time = 0;
  int event = 0;
  int treatment = 0;
};

struct TrialDataset {
  int periods = 0;
  int clusters = 0;
  int cluster_size = 0;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::vector<TrialRecord> records;
};

TrialDataset generate_trial(const TrialDesign& design, const HazardSpec& hazard,
                            const CensoringSpec& censoring,
                            const CorrelationSpec& corr, std::uint64_t seed,
                            std::uint64_t replicate = 0);

// Concordance estimator (tau-a) in O(N log N). Assumes continuous data.
double empirical_kendall_tau(const std::vector<std::pair<double, double>>& pairs);

// cluster,period,individual,time,event,treatment; times printed with 17
// significant digits so reading back is bit exact.
void write_dataset_csv(std::ostream& out, const TrialDataset& data);
std::string dataset_to_csv(const TrialDataset& data);
TrialDataset read_dataset_csv(std::istream& in);
TrialDataset dataset_from_csv(const std::string& text);

}  // namespace swcrt
