#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "avla/trainer.hpp"

namespace avla {

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);
// Semicolon-joined list.
std::string format_list(std::span<const double> values);

// Per-iteration columns, in order:
//   iteration,rollout_count,mean_reward,eval_success_rate,eval_progress,
//   suggestion_probability,suggestion_coverage,update_skipped,c_hat,weights
// Evaluation columns are empty on iterations without an evaluation.
std::string iteration_csv_header();
std::string iteration_csv_row(const IterationRecord& rec);

// Streams rows as they arrive, flushing each one.
class IterationCsvWriter {
 public:
  // `prefix_header` / `prefix` name and fill leading columns (may be empty).
  IterationCsvWriter(std::ostream& out, std::string prefix_header = "");
  void write(const IterationRecord& rec, const std::string& prefix = "");

 private:
  std::ostream& out_;
};

}  // namespace avla
