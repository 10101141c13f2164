#ifndef OBSOLIB_INGEST_HPP
#define OBSOLIB_INGEST_HPP

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "obsolib/errors.hpp"
#include "obsolib/kahan.hpp"

namespace obsolib {

enum class GroupKind { journal, category };
enum class InputFormat { records, histogram };
enum class Strictness { fail_fast, lenient };

// Histogram of cited-reference ages for one journal or one subject category.
class AgeSample {
public:
  static AgeSample from_counts(std::string dataset_id, GroupKind kind,
                               std::map<std::int64_t, std::int64_t> counts,
                               std::int64_t age_cap = 150) {
    if (counts.empty())
      throw DataError("AgeSample '" + dataset_id + "': empty sample");
    std::int64_t n = 0;
    for (const auto& [age, count] : counts) {
      if (age < 0)
        throw DataError("AgeSample '" + dataset_id + "': negative age");
      if (age > age_cap)
        throw DataError("AgeSample '" + dataset_id + "': age " +
                        std::to_string(age) + " exceeds cap " +
                        std::to_string(age_cap));
      if (count < 1)
        throw DataError("AgeSample '" + dataset_id + "': count must be >= 1");
      n += count;
    }
    return AgeSample(std::move(dataset_id), kind, std::move(counts), n);
  }

  const std::string& dataset_id() const { return id_; }
  GroupKind kind() const { return kind_; }
  const std::map<std::int64_t, std::int64_t>& counts() const {
    return counts_;
  }
  std::int64_t n_obs() const { return n_; }

  double mean() const {
    KahanSum acc;
    for (const auto& [age, count] : counts_)
      acc.add(static_cast<double>(age) * static_cast<double>(count));
    return acc.value() / static_cast<double>(n_);
  }

  // population variance, matching the dispersion-index convention
  double variance() const {
    const double mu = mean();
    KahanSum acc;
    for (const auto& [age, count] : counts_) {
      const double d = static_cast<double>(age) - mu;
      acc.add(d * d * static_cast<double>(count));
    }
    return acc.value() / static_cast<double>(n_);
  }

  double dispersion_index() const {
    const double mu = mean();
    if (mu == 0.0)
      throw DataError("AgeSample '" + id_ +
                      "': dispersion index undefined (mean is 0)");
    return variance() / mu;
  }

private:
  AgeSample(std::string id, GroupKind kind,
            std::map<std::int64_t, std::int64_t> counts, std::int64_t n)
      : id_(std::move(id)), kind_(kind), counts_(std::move(counts)), n_(n) {}

  std::string id_;
  GroupKind kind_;
  std::map<std::int64_t, std::int64_t> counts_;
  std::int64_t n_;
};

struct StatsReport {
  std::string dataset_id;
  std::int64_t n_obs;
  double mean;
  double median;
  std::int64_t mode;
  std::int64_t min;
  std::int64_t max;
  double dispersion_index;
};

struct ParseIssue {
  std::size_t line;
  std::string field;
  std::string reason;
};

struct ParseOptions {
  std::int64_t age_cap = 150;
  Strictness strictness = Strictness::fail_fast;
};

struct ParseOutput {
  std::vector<AgeSample> journals;
  std::vector<AgeSample> categories;
  std::vector<ParseIssue> issues;
};

namespace detail {

inline double histogram_median(
    const std::map<std::int64_t, std::int64_t>& counts, std::int64_t n) {
  // ranks are 1-based; even n averages the two central order statistics
  const std::int64_t lo_rank = (n + 1) / 2;
  const std::int64_t hi_rank = n / 2 + 1;
  double lo = 0.0, hi = 0.0;
  std::int64_t seen = 0;
  bool have_lo = false, have_hi = false;
  for (const auto& [age, count] : counts) {
    seen += count;
    if (!have_lo && seen >= lo_rank) {
      lo = static_cast<double>(age);
      have_lo = true;
    }
    if (!have_hi && seen >= hi_rank) {
      hi = static_cast<double>(age);
      have_hi = true;
      break;
    }
  }
  return 0.5 * (lo + hi);
}

inline bool parse_int(std::string_view text, std::int64_t& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail

inline ParseOutput parse_ages(std::istream& in, InputFormat format,
                              const ParseOptions& opt = {}) {
  const std::string expected_header =
      format == InputFormat::records ? "journal,subject_category,age"
                                     : "journal,subject_category,age,count";
  const std::size_t n_fields = format == InputFormat::records ? 3 : 4;

  ParseOutput out;
  std::map<std::string, std::map<std::int64_t, std::int64_t>> by_journal;
  std::map<std::string, std::map<std::int64_t, std::int64_t>> by_category;

  std::string line;
  std::size_t line_no = 0;

  const auto fail = [&](const std::string& field, const std::string& reason) {
    if (opt.strictness == Strictness::fail_fast)
      throw ParseError("field '" + field + "': " + reason, line_no);
    out.issues.push_back({line_no, field, reason});
  };

  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != expected_header)
        throw ParseError("expected header '" + expected_header + "'", line_no);
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;

    const auto fields = detail::split_fields(line);
    if (fields.size() != n_fields) {
      fail("row", "expected " + std::to_string(n_fields) + " columns, got " +
                      std::to_string(fields.size()));
      continue;
    }
    if (fields[0].empty()) {
      fail("journal", "empty");
      continue;
    }
    if (fields[1].empty()) {
      fail("subject_category", "empty");
      continue;
    }
    std::int64_t age = 0;
    if (!detail::parse_int(fields[2], age)) {
      fail("age", "not a base-10 integer");
      continue;
    }
    if (age < 0) {
      fail("age", "negative");
      continue;
    }
    if (age > opt.age_cap) {
      fail("age", "exceeds cap " + std::to_string(opt.age_cap));
      continue;
    }
    std::int64_t count = 1;
    if (format == InputFormat::histogram) {
      if (!detail::parse_int(fields[3], count)) {
        fail("count", "not a base-10 integer");
        continue;
      }
      if (count < 1) {
        fail("count", "must be positive");
        continue;
      }
    }
    by_journal[std::string(fields[0])][age] += count;
    by_category[std::string(fields[1])][age] += count;
  }
  if (!saw_header)
    throw ParseError("expected header '" + expected_header + "'", 1);

  for (auto& [id, counts] : by_journal)
    out.journals.push_back(AgeSample::from_counts(id, GroupKind::journal,
                                                  std::move(counts),
                                                  opt.age_cap));
  for (auto& [id, counts] : by_category)
    out.categories.push_back(AgeSample::from_counts(id, GroupKind::category,
                                                    std::move(counts),
                                                    opt.age_cap));
  return out;
}

inline StatsReport descriptive_stats(const AgeSample& sample) {
  const auto& counts = sample.counts();
  std::int64_t mode = counts.begin()->first;
  std::int64_t best = 0;
  for (const auto& [age, count] : counts) {
    if (count > best) {  // strict: ties keep the smallest age
      best = count;
      mode = age;
    }
  }
  return {sample.dataset_id(),
          sample.n_obs(),
          sample.mean(),
          detail::histogram_median(counts, sample.n_obs()),
          mode,
          counts.begin()->first,
          counts.rbegin()->first,
          sample.dispersion_index()};
}

inline void write_histogram_csv(std::ostream& os, const AgeSample& sample) {
  os << "journal,subject_category,age,count\n";
  for (const auto& [age, count] : sample.counts())
    os << sample.dataset_id() << ',' << sample.dataset_id() << ',' << age
       << ',' << count << '\n';
}

}  // namespace obsolib

#endif
