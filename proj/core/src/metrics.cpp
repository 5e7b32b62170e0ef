#include "avla/metrics.hpp"

#include <array>
#include <charconv>

namespace avla {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

std::string format_list(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    out += format_number(values[i]);
  }
  return out;
}

std::string iteration_csv_header() {
  return "iteration,rollout_count,mean_reward,eval_success_rate,eval_progress,"
         "suggestion_probability,suggestion_coverage,update_skipped,c_hat,weights";
}

std::string iteration_csv_row(const IterationRecord& r) {
  std::string row = std::to_string(r.iteration);
  row += ',' + std::to_string(r.rollout_count);
  row += ',' + format_number(r.mean_reward);
  row += ',' + format_optional(r.eval_success_rate);
  row += ',' + format_optional(r.eval_progress);
  row += ',' + format_number(r.suggestion_probability);
  row += ',' + format_number(r.suggestion_coverage);
  row += r.update_skipped ? ",1" : ",0";
  row += ',' + format_list(r.capabilities);
  row += ',' + format_list(r.weights);
  return row;
}

IterationCsvWriter::IterationCsvWriter(std::ostream& out, std::string prefix_header) : out_(out) {
  if (!prefix_header.empty()) out_ << prefix_header << ',';
  out_ << iteration_csv_header() << '\n';
  out_.flush();
}

void IterationCsvWriter::write(const IterationRecord& rec, const std::string& prefix) {
  if (!prefix.empty()) out_ << prefix << ',';
  out_ << iteration_csv_row(rec) << '\n';
  out_.flush();
}

}  // namespace avla
