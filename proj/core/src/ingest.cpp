#include "pqsched/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "pqsched/csv.hpp"

namespace pqsched {

namespace {

[[noreturn]] void fail_at(ErrorCode code, const csv::Table& t, std::size_t row, const std::string& what) {
  throw Error(code, t.source() + ":" + std::to_string(t.line_of(row)) + ": " + what);
}

double parse_real(const csv::Table& t, std::size_t row, std::size_t col, const char* name) {
  const std::string& s = t.cell(row, col);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail_at(ErrorCode::ParseError, t, row, std::string(name) + " '" + s + "' is not a finite number");
  }
  return v;
}

std::size_t parse_class(const csv::Table& t, std::size_t row, std::size_t col, const char* name) {
  const std::string& s = t.cell(row, col);
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) fail_at(ErrorCode::ParseError, t, row, std::string(name) + " '" + s + "' is not an integer");
  if (v < 1) fail_at(ErrorCode::EntryOutOfRange, t, row, std::string(name) + " must be >= 1");
  return static_cast<std::size_t>(v - 1);
}

std::size_t infer_classes(std::span<const ValidationRecord> records, std::size_t requested) {
  std::size_t k = 0;
  for (const auto& r : records) {
    k = std::max(k, r.true_class + 1);
    if (r.predicted_class) k = std::max(k, *r.predicted_class + 1);
  }
  if (requested == 0) return k;
  if (k > requested) throw Error(ErrorCode::EntryOutOfRange, "class index exceeds the requested class count");
  return requested;
}

std::string where(const ValidationRecord& r) {
  return r.line > 0 ? "line " + std::to_string(r.line) + ": " : std::string();
}

}  // namespace

std::vector<ValidationRecord> read_validation_csv(std::istream& in, const std::string& source) {
  const auto t = csv::Table::parse(in, source);
  const auto c_true = t.column("true_class");
  if (!c_true) throw Error(ErrorCode::ParseError, source + ":1: missing column 'true_class'");
  const auto c_score = t.column("score");
  const auto c_pred = t.column("predicted_class");
  const auto c_serv = t.column("service_time");

  std::vector<ValidationRecord> out;
  out.reserve(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    ValidationRecord r;
    r.line = t.line_of(i);
    r.true_class = parse_class(t, i, *c_true, "true_class");
    if (c_score && !t.cell(i, *c_score).empty()) r.score = parse_real(t, i, *c_score, "score");
    if (c_pred && !t.cell(i, *c_pred).empty()) r.predicted_class = parse_class(t, i, *c_pred, "predicted_class");
    if (c_serv && !t.cell(i, *c_serv).empty()) {
      r.service_time = parse_real(t, i, *c_serv, "service_time");
      if (!(*r.service_time > 0.0)) fail_at(ErrorCode::EntryOutOfRange, t, i, "service_time must be > 0");
    }
    out.push_back(r);
  }
  return out;
}

std::vector<ValidationRecord> read_validation_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_validation_csv(in, path.string());
}

ConfusionEstimate estimate_confusion(std::span<const ValidationRecord> records, const LabelRule& rule) {
  if (!(rule.laplace_alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "Laplace alpha must be >= 0");
  const std::size_t K = infer_classes(records, rule.num_classes);
  if (K == 0) throw Error(ErrorCode::EmptyClass, "no validation records");
  if (rule.threshold && K != 2) throw Error(ErrorCode::InvalidArgument, "a score threshold needs exactly two classes");

  ConfusionEstimate e;
  e.counts.assign(K * K, 0);
  std::vector<std::size_t> totals(K, 0);
  for (const auto& r : records) {
    std::size_t l = 0;
    if (rule.threshold) {
      if (!r.score) throw Error(ErrorCode::ParseError, where(r) + "record has no score");
      l = *r.score >= *rule.threshold ? 0 : 1;
    } else {
      if (!r.predicted_class) throw Error(ErrorCode::ParseError, where(r) + "record has no predicted_class");
      l = *r.predicted_class;
    }
    ++e.counts[r.true_class * K + l];
    ++totals[r.true_class];
  }

  e.confusion = ConfusionMatrix(K);
  e.prevalences.assign(K, 0.0);
  const double n = static_cast<double>(records.size());
  const double a = rule.laplace_alpha;
  for (std::size_t k = 0; k < K; ++k) {
    if (totals[k] == 0) throw Error(ErrorCode::EmptyClass, "true class " + std::to_string(k + 1) + " has no records");
    e.prevalences[k] = static_cast<double>(totals[k]) / n;
    const double denom = static_cast<double>(totals[k]) + a * static_cast<double>(K);
    for (std::size_t l = 0; l < K; ++l) e.confusion(k, l) = (static_cast<double>(e.counts[k * K + l]) + a) / denom;
  }
  for (std::size_t l = 0; l < K; ++l) {
    double column = 0.0;
    for (std::size_t k = 0; k < K; ++k) column += e.confusion(k, l);
    if (!(column > 0.0)) throw Error(ErrorCode::ZeroColumn, "predicted class " + std::to_string(l + 1) + " never occurs");
  }
  return e;
}

RateEstimate estimate_rates(std::span<const ValidationRecord> records, std::size_t num_classes) {
  const std::size_t K = infer_classes(records, num_classes);
  if (K == 0) throw Error(ErrorCode::EmptyClass, "no validation records");
  RateEstimate e;
  e.counts.assign(K, 0);
  std::vector<double> sum(K, 0.0), sum2(K, 0.0);
  for (const auto& r : records) {
    if (!r.service_time) continue;
    ++e.counts[r.true_class];
    sum[r.true_class] += *r.service_time;
    sum2[r.true_class] += *r.service_time * *r.service_time;
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (e.counts[k] == 0) throw Error(ErrorCode::EmptyClass, "class " + std::to_string(k + 1) + " has no service times");
    const double n = static_cast<double>(e.counts[k]);
    e.service_rates.push_back(n / sum[k]);
    e.second_moments.push_back(sum2[k] / n);
  }
  return e;
}

std::vector<std::vector<double>> scores_by_class(std::span<const ValidationRecord> records, std::size_t num_classes) {
  std::vector<std::vector<double>> out(infer_classes(records, num_classes));
  for (const auto& r : records) {
    if (r.score) out[r.true_class].push_back(*r.score);
  }
  return out;
}

}  // namespace pqsched
