#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "desklab/common/time.hpp"

namespace desklab::metrics {

using Value = std::variant<std::int64_t, double>;
using Labels = std::map<std::string, std::string>;

struct MetricRecord {
  SimTime time{0};
  std::string node;
  std::string name;  // dotted namespace, e.g. frost.e2e_ns
  Value value{std::int64_t{0}};
  Labels labels;

  double as_double() const;
  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

class StoreFlushedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Append-only record list for one run. Records keep event-loop order.
class MetricStore {
 public:
  void record(MetricRecord r);
  /// Ends the run; any later record() throws StoreFlushedError.
  void flush() { flushed_ = true; }
  bool flushed() const { return flushed_; }

  const std::vector<MetricRecord>& records() const { return records_; }
  std::set<std::string> names() const;
  std::vector<MetricRecord> select(const std::string& name) const;

 private:
  std::vector<MetricRecord> records_;
  bool flushed_ = false;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0;
  double min = 0;
  double max = 0;
  std::vector<std::pair<double, double>> percentiles;  // (p, value)
  std::vector<std::pair<double, double>> ecdf;         // (value, cumulative fraction)
};

/// Nearest-rank percentile of sorted values: the value at rank ceil(p/100 * N),
/// with rank at least 1. Requires a non-empty input.
double percentile_nearest_rank(std::span<const double> sorted, double p);

/// One point per distinct value, carrying the fraction of samples <= it.
std::vector<std::pair<double, double>> ecdf(std::span<const double> sorted);

Summary summarize(std::span<const double> values, std::span<const double> percentiles);
/// Summary of every record named `name`; an unknown name yields count 0.
Summary summarize(std::span<const MetricRecord> records, const std::string& name, std::span<const double> percentiles);

/// Records named `name` per window, divided by the window length in seconds.
/// Windows start at `origin` and cover [origin, end).
std::vector<double> throughput(std::span<const MetricRecord> records, const std::string& name, SimTime origin,
                               SimTime end, Duration window);

/// Text forms. Doubles always carry a '.', an exponent or a non-finite marker
/// so that a reader can tell them from integers.
std::string format_value(const Value& v);
std::string format_labels(const Labels& labels);
Labels parse_labels(const std::string& text);

inline constexpr const char* kCsvHeader = "time_ns,node,name,value,labels";

void write_csv(std::ostream& out, std::span<const MetricRecord> records);
void write_jsonl(std::ostream& out, std::span<const MetricRecord> records);
std::vector<MetricRecord> read_csv(std::istream& in);
std::vector<MetricRecord> read_jsonl(std::istream& in);

/// Writes metrics.csv and/or metrics.jsonl into `dir`. IO failures throw
/// std::runtime_error naming the path.
void export_files(std::span<const MetricRecord> records, const std::filesystem::path& dir, bool csv, bool jsonl);

/// Loads a run directory, preferring metrics.csv over metrics.jsonl.
std::vector<MetricRecord> load_run(const std::filesystem::path& dir);

}  // namespace desklab::metrics
