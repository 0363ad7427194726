#pragma once

// Evaluation quantities, cross-seed aggregation, and deterministic CSV
// artifacts (byte-identical across reruns of identical inputs).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace fedswarm {

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& detail)
      : std::runtime_error("io error: " + path + ": " + detail), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct EpisodeMetrics {
  int episode = 0;
  double attack_success_rate = 0.0;  // successful-attack steps / episode_len
  double defense_cost = 0.0;         // sum of executed-tool costs, all agents+steps
  double mean_reward = 0.0;          // mean over reward samples
  double agreement_rate = 0.0;       // fraction of (agent, step) with a_pi == a_slm
};

// One CSV row: an episode's metrics tagged with its experiment cell.
struct MetricRecord {
  int swarm_size = 0;
  std::string paradigm;  // "frl" or "crl"
  std::uint64_t seed = 0;
  EpisodeMetrics metrics;
};

struct ComparisonSummary {
  int swarm_size = 0;
  double frl_cost_mean = 0.0, frl_cost_std = 0.0;
  double crl_cost_mean = 0.0, crl_cost_std = 0.0;
  double frl_asr_mean = 0.0, frl_asr_std = 0.0;
  double crl_asr_mean = 0.0, crl_asr_std = 0.0;
  // (crl - frl)/crl * 100; defined only when the CRL denominator > 0.
  double cost_reduction_pct = 0.0;
  double asr_reduction_pct = 0.0;
  bool cost_reduction_defined = false;
  bool asr_reduction_defined = false;
};

// Numeric CSV formatting: 9 significant digits, locale-independent.
inline std::string format_sig9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline const char* metrics_csv_header() {
  return "swarm_size,paradigm,seed,episode,asr,defense_cost,mean_reward,agreement_rate";
}

// Writes records sorted by (swarm_size, paradigm, seed, episode).
inline void export_csv(std::vector<MetricRecord> records, const std::string& path) {
  std::stable_sort(records.begin(), records.end(),
                   [](const MetricRecord& a, const MetricRecord& b) {
                     return std::tie(a.swarm_size, a.paradigm, a.seed, a.metrics.episode) <
                            std::tie(b.swarm_size, b.paradigm, b.seed, b.metrics.episode);
                   });
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << metrics_csv_header() << "\n";
  for (const auto& r : records) {
    out << r.swarm_size << ',' << r.paradigm << ',' << r.seed << ','
        << r.metrics.episode << ',' << format_sig9(r.metrics.attack_success_rate) << ','
        << format_sig9(r.metrics.defense_cost) << ','
        << format_sig9(r.metrics.mean_reward) << ','
        << format_sig9(r.metrics.agreement_rate) << "\n";
  }
  if (!out) throw IoError(path, "write failed");
}

// Reads a file produced by export_csv (used by the compare subcommand).
inline std::vector<MetricRecord> parse_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path, "empty file");
  if (line != metrics_csv_header()) throw IoError(path, "unexpected header: " + line);
  std::vector<MetricRecord> records;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) {
      throw IoError(path, "line " + std::to_string(lineno) + ": expected 8 columns");
    }
    MetricRecord r;
    try {
      r.swarm_size = std::stoi(cells[0]);
      r.paradigm = cells[1];
      r.seed = std::stoull(cells[2]);
      r.metrics.episode = std::stoi(cells[3]);
      r.metrics.attack_success_rate = std::stod(cells[4]);
      r.metrics.defense_cost = std::stod(cells[5]);
      r.metrics.mean_reward = std::stod(cells[6]);
      r.metrics.agreement_rate = std::stod(cells[7]);
    } catch (const std::exception& e) {
      throw IoError(path, "line " + std::to_string(lineno) + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

namespace detail {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1); 0 for n < 2
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd ms;
  if (xs.empty()) return ms;
  for (double x : xs) ms.mean += x;
  ms.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return ms;
  double ss = 0.0;
  for (double x : xs) ss += (x - ms.mean) * (x - ms.mean);
  ms.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return ms;
}

}  // namespace detail

// Aggregates per-seed results of the two paradigms into the reduction
// percentages. Each element of frl_runs / crl_runs is one seed's evaluation.
inline ComparisonSummary summarize_comparison(const std::vector<EpisodeMetrics>& frl_runs,
                                              const std::vector<EpisodeMetrics>& crl_runs,
                                              int swarm_size) {
  if (frl_runs.empty() || crl_runs.empty()) {
    throw std::invalid_argument("summarize_comparison: both run sets must be nonempty");
  }
  auto column = [](const std::vector<EpisodeMetrics>& runs, auto member) {
    std::vector<double> xs;
    xs.reserve(runs.size());
    for (const auto& r : runs) xs.push_back(r.*member);
    return xs;
  };
  ComparisonSummary s;
  s.swarm_size = swarm_size;
  auto fc = detail::mean_std(column(frl_runs, &EpisodeMetrics::defense_cost));
  auto cc = detail::mean_std(column(crl_runs, &EpisodeMetrics::defense_cost));
  auto fa = detail::mean_std(column(frl_runs, &EpisodeMetrics::attack_success_rate));
  auto ca = detail::mean_std(column(crl_runs, &EpisodeMetrics::attack_success_rate));
  s.frl_cost_mean = fc.mean;
  s.frl_cost_std = fc.stddev;
  s.crl_cost_mean = cc.mean;
  s.crl_cost_std = cc.stddev;
  s.frl_asr_mean = fa.mean;
  s.frl_asr_std = fa.stddev;
  s.crl_asr_mean = ca.mean;
  s.crl_asr_std = ca.stddev;
  if (cc.mean > 0.0) {
    s.cost_reduction_pct = (cc.mean - fc.mean) / cc.mean * 100.0;
    s.cost_reduction_defined = true;
  }
  if (ca.mean > 0.0) {
    s.asr_reduction_pct = (ca.mean - fa.mean) / ca.mean * 100.0;
    s.asr_reduction_defined = true;
  }
  return s;
}

inline const char* comparison_csv_header() {
  return "swarm_size,frl_cost_mean,frl_cost_std,crl_cost_mean,crl_cost_std,"
         "frl_asr_mean,frl_asr_std,crl_asr_mean,crl_asr_std,"
         "cost_reduction_pct,asr_reduction_pct";
}

inline void export_comparison_csv(std::vector<ComparisonSummary> rows,
                                  const std::string& path) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ComparisonSummary& a, const ComparisonSummary& b) {
                     return a.swarm_size < b.swarm_size;
                   });
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << comparison_csv_header() << "\n";
  for (const auto& s : rows) {
    out << s.swarm_size << ',' << format_sig9(s.frl_cost_mean) << ','
        << format_sig9(s.frl_cost_std) << ',' << format_sig9(s.crl_cost_mean) << ','
        << format_sig9(s.crl_cost_std) << ',' << format_sig9(s.frl_asr_mean) << ','
        << format_sig9(s.frl_asr_std) << ',' << format_sig9(s.crl_asr_mean) << ','
        << format_sig9(s.crl_asr_std) << ','
        << (s.cost_reduction_defined ? format_sig9(s.cost_reduction_pct) : "undefined")
        << ','
        << (s.asr_reduction_defined ? format_sig9(s.asr_reduction_pct) : "undefined")
        << "\n";
  }
  if (!out) throw IoError(path, "write failed");
}

}  // namespace fedswarm
