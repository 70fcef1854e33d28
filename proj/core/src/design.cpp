#include "swcrt/design.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "swcrt/error.hpp"

namespace swcrt {

namespace {

std::string row_label(std::size_t r) { return "row " + std::to_string(r + 1); }

void check_sequence(const std::vector<int>& s, std::size_t r, std::size_t J) {
  if (s.size() != J)
    throw Error("design.ragged", row_label(r) + " has " +
                                     std::to_string(s.size()) +
                                     " entries, expected " + std::to_string(J));
  for (int v : s)
    if (v != 0 && v != 1)
      throw Error("design.not_binary", row_label(r) + " has an entry outside {0,1}");
  if (s.front() != 0)
    throw Error("design.treated_first_period",
                row_label(r) + " is treated in period 1");
  if (s.back() != 1)
    throw Error("design.never_treated",
                row_label(r) + " is not treated by the final period");
  for (std::size_t j = 1; j < J; ++j)
    if (s[j] < s[j - 1])
      throw Error("design.non_monotone",
                  row_label(r) + " switches back from treatment to control");
}

}  // namespace

TrialDesign::TrialDesign(std::vector<std::vector<int>> sequences,
                         std::vector<int> counts, int m)
    : sequences_(std::move(sequences)), counts_(std::move(counts)), m_(m) {
  if (sequences_.empty()) throw Error("design.empty", "design has no sequences");
  if (counts_.size() != sequences_.size())
    throw Error("design.counts_mismatch",
                "one cluster count is required per sequence", "counts");
  periods_ = static_cast<int>(sequences_.front().size());
  if (periods_ < 2) throw Error("design.periods", "J must be at least 2", "J");
  if (m_ < 1) throw Error("design.cluster_size", "m must be at least 1", "m");
  for (std::size_t r = 0; r < sequences_.size(); ++r) {
    check_sequence(sequences_[r], r, periods_);
    if (counts_[r] < 1)
      throw Error("design.count", "cluster counts must be at least 1", "counts");
    for (std::size_t q = 0; q < r; ++q)
      if (sequences_[q] == sequences_[r])
        throw Error("design.duplicate", row_label(r) + " repeats " + row_label(q));
  }
  first_cluster_.reserve(counts_.size());
  for (int c : counts_) {
    first_cluster_.push_back(n_);
    n_ += c;
  }
}

bool TrialDesign::balanced() const {
  return std::all_of(counts_.begin(), counts_.end(),
                     [&](int c) { return c == counts_.front(); }) &&
         sequence_count() == periods_ - 1;
}

int TrialDesign::sequence_of(int cluster) const {
  if (cluster < 0 || cluster >= n_)
    throw Error("design.cluster_index", "cluster index out of range");
  auto it = std::upper_bound(first_cluster_.begin(), first_cluster_.end(), cluster);
  return static_cast<int>(it - first_cluster_.begin()) - 1;
}

int TrialDesign::treatment(int cluster, int j) const {
  if (j < 1 || j > periods_) throw Error("design.period_index", "period out of range");
  return sequences_[sequence_of(cluster)][j - 1];
}

double TrialDesign::treat_prob(int j) const {
  if (j < 1 || j > periods_) throw Error("design.period_index", "period out of range");
  long treated = 0;
  for (std::size_t r = 0; r < sequences_.size(); ++r)
    treated += static_cast<long>(sequences_[r][j - 1]) * counts_[r];
  return static_cast<double>(treated) / n_;
}

JointProbs TrialDesign::joint_probs(int j, int l) const {
  if (j < 1 || j > periods_ || l < 1 || l > periods_)
    throw Error("design.period_index", "period out of range");
  if (j == l)
    throw Error("design.same_period",
                "joint probabilities need two distinct periods");
  long c[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t r = 0; r < sequences_.size(); ++r)
    c[sequences_[r][j - 1]][sequences_[r][l - 1]] += counts_[r];
  const double n = n_;
  return {c[0][0] / n, c[0][1] / n, c[1][0] / n, c[1][1] / n};
}

TrialDesign TrialDesign::with_cluster_size(int m) const {
  return TrialDesign(sequences_, counts_, m);
}

std::string TrialDesign::to_csv() const {
  std::ostringstream out;
  out << "count";
  for (int j = 1; j <= periods_; ++j) out << ",p" << j;
  out << '\n';
  for (std::size_t r = 0; r < sequences_.size(); ++r) {
    out << counts_[r];
    for (int v : sequences_[r]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

TrialDesign build_balanced_design(int J, int n, int m) {
  if (J < 2) throw Error("design.periods", "J must be at least 2", "J");
  if (n < J - 1)
    throw Error("design.too_few_clusters",
                "need at least one cluster per sequence (n >= J-1)", "n");
  if (n % (J - 1) != 0)
    throw Error("design.not_divisible",
                std::to_string(n) + " clusters cannot be split evenly over " +
                    std::to_string(J - 1) +
                    " sequences; supply an unbalanced design matrix instead",
                "n");
  std::vector<std::vector<int>> seq(J - 1, std::vector<int>(J, 0));
  for (int b = 1; b < J; ++b)
    for (int j = b; j < J; ++j) seq[b - 1][j] = 1;
  return TrialDesign(std::move(seq), std::vector<int>(J - 1, n / (J - 1)), m);
}

TrialDesign parse_design_matrix(const std::vector<std::vector<int>>& rows,
                                const std::optional<std::vector<int>>& counts,
                                int m) {
  if (rows.empty()) throw Error("design.empty", "design has no rows");
  if (counts && counts->size() != rows.size())
    throw Error("design.counts_mismatch",
                "one cluster count is required per row", "counts");
  const std::size_t J = rows.front().size();
  std::vector<std::vector<int>> seqs;
  std::vector<int> tally;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    check_sequence(rows[r], r, J);
    const int c = counts ? (*counts)[r] : 1;
    if (c < 1) throw Error("design.count", row_label(r) + " has a count below 1", "counts");
    auto it = std::find(seqs.begin(), seqs.end(), rows[r]);
    if (it == seqs.end()) {
      seqs.push_back(rows[r]);
      tally.push_back(c);
    } else {
      tally[it - seqs.begin()] += c;
    }
  }
  return TrialDesign(std::move(seqs), std::move(tally), m);
}

TrialDesign parse_design_csv(std::string_view text, int m) {
  std::vector<std::vector<std::string>> table;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    line.erase(std::remove(line.begin(), line.end(), '\r'), line.end());
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      auto a = cell.find_first_not_of(" \t");
      auto b = cell.find_last_not_of(" \t");
      cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    table.push_back(std::move(cells));
  }
  if (table.empty()) throw Error("design.empty", "design file has no rows");

  auto is_int = [](const std::string& s) {
    int v;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return !s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size();
  };
  bool has_count = false;
  std::size_t start = 0;
  const auto& head = table.front();
  if (!std::all_of(head.begin(), head.end(), is_int)) {
    std::string h0 = head.front();
    std::transform(h0.begin(), h0.end(), h0.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    has_count = h0 == "count";
    start = 1;
  }

  std::vector<std::vector<int>> rows;
  std::vector<int> counts;
  for (std::size_t r = start; r < table.size(); ++r) {
    const auto& cells = table[r];
    std::vector<int> vals;
    for (const auto& c : cells) {
      if (!is_int(c))
        throw Error("design.parse", "line " + std::to_string(r + 1) +
                                        ": '" + c + "' is not an integer");
      vals.push_back(std::stoi(c));
    }
    if (has_count) {
      if (vals.size() < 2)
        throw Error("design.ragged", "line " + std::to_string(r + 1) + " is too short");
      counts.push_back(vals.front());
      vals.erase(vals.begin());
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw Error("design.empty", "design file has no data rows");
  if (has_count) return parse_design_matrix(rows, counts, m);
  return parse_design_matrix(rows, std::nullopt, m);
}

}  // namespace swcrt
