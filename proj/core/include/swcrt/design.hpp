#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swcrt {

struct JointProbs {
  double p00 = 0, p01 = 0, p10 = 0, p11 = 0;

  double operator()(int a, int b) const {
    return a ? (b ? p11 : p10) : (b ? p01 : p00);
  }
};

// Cluster-by-period treatment schedule. Immutable once built; all period
// indices in the public API are 1-based to match the usual notation.
class TrialDesign {
 public:
  TrialDesign(std::vector<std::vector<int>> sequences, std::vector<int> counts,
              int m);

  int periods() const { return periods_; }
  int cluster_size() const { return m_; }
  int clusters() const { return n_; }
  int sequence_count() const { return static_cast<int>(sequences_.size()); }
  const std::vector<std::vector<int>>& sequences() const { return sequences_; }
  const std::vector<int>& counts() const { return counts_; }

  bool balanced() const;

  // Treatment indicator of cluster i (0-based, clusters laid out sequence by
  // sequence) in period j.
  int treatment(int cluster, int j) const;
  int sequence_of(int cluster) const;

  double treat_prob(int j) const;
  JointProbs joint_probs(int j, int l) const;

  TrialDesign with_cluster_size(int m) const;

  // One row per sequence, first column "count".
  std::string to_csv() const;

 private:
  std::vector<std::vector<int>> sequences_;
  std::vector<int> counts_;
  std::vector<int> first_cluster_;
  int periods_ = 0;
  int m_ = 0;
  int n_ = 0;
};

TrialDesign build_balanced_design(int J, int n, int m = 1);

// Rows of 0/1 entries. Identical rows are merged and their counts summed.
TrialDesign parse_design_matrix(const std::vector<std::vector<int>>& rows,
                                const std::optional<std::vector<int>>& counts,
                                int m = 1);

// Comma separated text: one row per sequence or per cluster, entries 0/1,
// optional leading "count" column announced by a header line.
TrialDesign parse_design_csv(std::string_view text, int m = 1);

}  // namespace swcrt
