#include "desklab/metrics/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "desklab/common/format.hpp"

namespace desklab::metrics {

double MetricRecord::as_double() const {
  return std::visit([](auto v) { return static_cast<double>(v); }, value);
}

void MetricStore::record(MetricRecord r) {
  if (flushed_) throw StoreFlushedError("metric '" + r.name + "' recorded after the run was flushed");
  if (r.name.empty()) throw std::invalid_argument("metric name must not be empty");
  records_.push_back(std::move(r));
}

std::set<std::string> MetricStore::names() const {
  std::set<std::string> out;
  for (const auto& r : records_) out.insert(r.name);
  return out;
}

std::vector<MetricRecord> MetricStore::select(const std::string& name) const {
  std::vector<MetricRecord> out;
  for (const auto& r : records_) {
    if (r.name == name) out.push_back(r);
  }
  return out;
}

double percentile_nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::vector<std::pair<double, double>> ecdf(std::span<const double> sorted) {
  std::vector<std::pair<double, double>> out;
  const auto n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

Summary summarize(std::span<const double> values, std::span<const double> percentiles) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.min = sorted.front();
  s.max = sorted.back();
  for (double p : percentiles) s.percentiles.emplace_back(p, percentile_nearest_rank(sorted, p));
  s.ecdf = ecdf(sorted);
  return s;
}

Summary summarize(std::span<const MetricRecord> records, const std::string& name, std::span<const double> percentiles) {
  std::vector<double> values;
  for (const auto& r : records) {
    if (r.name == name) values.push_back(r.as_double());
  }
  return summarize(values, percentiles);
}

std::vector<double> throughput(std::span<const MetricRecord> records, const std::string& name, SimTime origin,
                               SimTime end, Duration window) {
  if (window.count() <= 0) throw std::invalid_argument("throughput window must be positive");
  if (end <= origin) return {};
  const auto span = (end - origin).count();
  const auto windows = static_cast<std::size_t>((span + window.count() - 1) / window.count());
  std::vector<double> counts(windows, 0.0);
  for (const auto& r : records) {
    if (r.name != name || r.time < origin || r.time >= end) continue;
    counts[static_cast<std::size_t>((r.time - origin).count() / window.count())] += 1;
  }
  for (auto& c : counts) c /= to_seconds(window);
  return counts;
}

std::string format_value(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  const double d = std::get<double>(v);
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  auto s = format_double(d);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

namespace {

Value parse_value(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  if (s.find_first_of(".e") == std::string::npos) {
    std::int64_t i = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), i);
    if (res.ec == std::errc{} && res.ptr == s.data() + s.size()) return i;
  } else {
    double d = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), d);
    if (res.ec == std::errc{} && res.ptr == s.data() + s.size()) return d;
  }
  throw std::runtime_error("bad metric value '" + s + "'");
}

std::string escape_label(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '%': out += "%25"; break;
      case ';': out += "%3B"; break;
      case '=': out += "%3D"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_label(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const auto code = s.substr(i + 1, 2);
      if (code == "25") out += '%';
      else if (code == "3B") out += ';';
      else if (code == "3D") out += '=';
      else throw std::runtime_error("bad label escape in '" + s + "'");
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Splits one CSV record; quoted fields may span lines.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quoted CSV field");
  if (any) fields.push_back(std::move(field));
  return any;
}

}  // namespace

std::string format_labels(const Labels& labels) {
  std::string out;
  for (const auto& [k, v] : labels) {
    if (!out.empty()) out += ';';
    out += escape_label(k) + "=" + escape_label(v);
  }
  return out;
}

Labels parse_labels(const std::string& text) {
  Labels out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(';', start);
    if (end == std::string::npos) end = text.size();
    const auto pair = text.substr(start, end - start);
    const auto eq = pair.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad label '" + pair + "'");
    out[unescape_label(pair.substr(0, eq))] = unescape_label(pair.substr(eq + 1));
    start = end + 1;
  }
  return out;
}

void write_csv(std::ostream& out, std::span<const MetricRecord> records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.time.count() << ',' << csv_field(r.node) << ',' << csv_field(r.name) << ',' << format_value(r.value) << ','
        << csv_field(format_labels(r.labels)) << '\n';
  }
}

void write_jsonl(std::ostream& out, std::span<const MetricRecord> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["time_ns"] = r.time.count();
    j["node"] = r.node;
    j["name"] = r.name;
    if (const auto* i = std::get_if<std::int64_t>(&r.value)) {
      j["value"] = *i;
    } else {
      const double d = std::get<double>(r.value);
      // JSON has no non-finite numbers; those travel as strings.
      if (std::isfinite(d)) j["value"] = d;
      else j["value"] = format_value(r.value);
    }
    j["labels"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.labels) j["labels"][k] = v;
    out << j.dump() << '\n';
  }
}

std::vector<MetricRecord> read_csv(std::istream& in) {
  std::vector<MetricRecord> out;
  std::vector<std::string> f;
  if (!read_csv_record(in, f)) return out;
  if (f.size() != 5 || f[0] != "time_ns") throw std::runtime_error("not a metrics CSV (bad header)");
  while (read_csv_record(in, f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 5) throw std::runtime_error("metrics CSV row with " + std::to_string(f.size()) + " fields");
    MetricRecord r;
    r.time = SimTime(std::stoll(f[0]));
    r.node = f[1];
    r.name = f[2];
    r.value = parse_value(f[3]);
    r.labels = parse_labels(f[4]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MetricRecord> read_jsonl(std::istream& in) {
  std::vector<MetricRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    MetricRecord r;
    r.time = SimTime(j.at("time_ns").get<std::int64_t>());
    r.node = j.at("node").get<std::string>();
    r.name = j.at("name").get<std::string>();
    const auto& v = j.at("value");
    if (v.is_number_integer()) r.value = v.get<std::int64_t>();
    else if (v.is_number()) r.value = v.get<double>();
    else r.value = parse_value(v.get<std::string>());
    for (const auto& [k, lv] : j.at("labels").items()) r.labels[k] = lv.get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& w) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  w(out);
  out.flush();
  if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace

void export_files(std::span<const MetricRecord> records, const std::filesystem::path& dir, bool csv, bool jsonl) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  if (csv) write_file(dir / "metrics.csv", [&](std::ostream& o) { write_csv(o, records); });
  if (jsonl) write_file(dir / "metrics.jsonl", [&](std::ostream& o) { write_jsonl(o, records); });
}

std::vector<MetricRecord> load_run(const std::filesystem::path& dir) {
  if (std::filesystem::exists(dir / "metrics.csv")) {
    std::ifstream in(dir / "metrics.csv", std::ios::binary);
    return read_csv(in);
  }
  if (std::filesystem::exists(dir / "metrics.jsonl")) {
    std::ifstream in(dir / "metrics.jsonl", std::ios::binary);
    return read_jsonl(in);
  }
  throw std::runtime_error("no metrics file in " + dir.string());
}

}  // namespace desklab::metrics
