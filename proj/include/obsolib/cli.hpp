#ifndef OBSOLIB_CLI_HPP
#define OBSOLIB_CLI_HPP

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "obsolib/convergence.hpp"
#include "obsolib/errors.hpp"
#include "obsolib/ingest.hpp"
#include "obsolib/report.hpp"
#include "obsolib/simulate.hpp"

// Stream-based command driver.  The binary in tools/ is a thin flag parser
// around run(); everything observable behaves the same in-process, which is
// how the tests exercise it.

namespace obsolib::cli {

enum class Command { describe, fit, compare, tails, risk, simulate, report, verify };

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_data = 2;
inline constexpr int exit_numeric = 3;
inline constexpr int exit_verify = 4;

struct RunConfig {
  Command command = Command::report;
  std::string input;  // path; empty or "-" reads the provided stream
  InputFormat format = InputFormat::records;
  Strictness strictness = Strictness::fail_fast;
  GroupKind by = GroupKind::category;
  std::vector<std::int64_t> ages = default_ages();
  std::vector<double> probs = default_probs();
  std::int64_t age_cap = 150;
  RenderFormat render_format = RenderFormat::text;
  std::optional<double> alpha;  // with beta: model given directly, no input
  std::optional<double> beta;
  std::int64_t n = 10000;
  std::optional<std::uint64_t> seed;
  std::string out;  // path; empty writes the provided stream
};

namespace detail {

inline std::int64_t parse_grid_int(const std::string& tok) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw DomainError("grid: '" + tok + "' is not an integer");
  return v;
}

inline double parse_grid_double(const std::string& tok) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DomainError("grid: '" + tok + "' is not a number");
  }
}

inline std::vector<std::string> split_tokens(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream is(s);
  while (std::getline(is, tok, sep)) out.push_back(tok);
  return out;
}

}  // namespace detail

// "A..B:STEP" (STEP optional, default 1) or a comma-separated list
inline std::vector<std::int64_t> parse_age_grid(const std::string& s) {
  if (s.empty()) throw DomainError("ages: empty grid expression");
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const auto lo = detail::parse_grid_int(s.substr(0, dots));
    std::string rest = s.substr(dots + 2);
    std::int64_t step = 1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = detail::parse_grid_int(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const auto hi = detail::parse_grid_int(rest);
    if (step < 1) throw DomainError("ages: step must be >= 1");
    if (hi < lo) throw DomainError("ages: range end precedes start");
    std::vector<std::int64_t> out;
    for (std::int64_t a = lo; a <= hi; a += step) out.push_back(a);
    return out;
  }
  std::vector<std::int64_t> out;
  for (const auto& tok : detail::split_tokens(s, ','))
    out.push_back(detail::parse_grid_int(tok));
  return out;
}

inline std::vector<double> parse_prob_grid(const std::string& s) {
  if (s.empty()) throw DomainError("probs: empty grid expression");
  std::vector<double> out;
  for (const auto& tok : detail::split_tokens(s, ','))
    out.push_back(detail::parse_grid_double(tok));
  return out;
}

namespace detail {

inline ConvergenceSpec spec_from_env() {
  const char* env = std::getenv("OBSOLIB_MAX_ITERS");
  if (env == nullptr || *env == '\0') return {};
  const std::string s(env);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v == 0)
    throw DomainError("OBSOLIB_MAX_ITERS: '" + s +
                      "' is not a positive integer");
  return ConvergenceSpec(static_cast<std::size_t>(v));
}

inline std::vector<AgeSample> load_samples(const RunConfig& cfg,
                                           std::istream& fallback,
                                           std::ostream& err) {
  std::ifstream file;
  std::istream* in = &fallback;
  if (!cfg.input.empty() && cfg.input != "-") {
    file.open(cfg.input);
    if (!file) throw DataError("cannot open input '" + cfg.input + "'");
    in = &file;
  }
  ParseOptions opt;
  opt.age_cap = cfg.age_cap;
  opt.strictness = cfg.strictness;
  auto parsed = parse_ages(*in, cfg.format, opt);
  for (const auto& issue : parsed.issues)
    err << "warning: line " << issue.line << ": " << issue.reason << '\n';
  auto& samples =
      cfg.by == GroupKind::journal ? parsed.journals : parsed.categories;
  if (samples.empty()) throw DataError("input contains no usable rows");
  return std::move(samples);
}

inline StudyOptions study_options(const RunConfig& cfg,
                                  const ConvergenceSpec& spec) {
  StudyOptions opt;
  opt.ages = cfg.ages;
  opt.probs = cfg.probs;
  opt.spec = spec;
  opt.with_stats = false;
  opt.with_fit = false;
  opt.with_tails = false;
  opt.with_risk = false;
  opt.with_verification = false;
  return opt;
}

inline int dispatch(const RunConfig& cfg, std::istream& in, std::ostream& out,
                    std::ostream& err) {
  const ConvergenceSpec spec = spec_from_env();

  if (cfg.command == Command::verify) {
    StudyReport study;
    study.verification = run_verification(spec);
    out << render(study, cfg.render_format);
    return verification_passed(study.verification) ? exit_ok : exit_verify;
  }

  if (cfg.command == Command::simulate) {
    if (!cfg.alpha || !cfg.beta)
      throw DomainError("simulate: --alpha and --beta are required");
    if (!cfg.seed)
      throw DomainError("simulate: --seed is required for reproducibility");
    const auto ages = simulate_ages(*cfg.alpha, *cfg.beta, cfg.n, *cfg.seed);
    out << "journal,subject_category,age\n";
    for (const auto a : ages) out << "sim,sim," << a << '\n';
    return exit_ok;
  }

  if (cfg.alpha.has_value() != cfg.beta.has_value())
    throw DomainError("--alpha and --beta must be given together");

  StudyOptions opt = study_options(cfg, spec);
  StudyReport study;

  if ((cfg.command == Command::tails || cfg.command == Command::risk) &&
      cfg.alpha) {
    // direct model, no input dataset
    const NegBinModel m(*cfg.alpha, *cfg.beta);
    DatasetReport ds;
    ds.dataset_id = "model";
    ds.model = ModelRef{m.alpha(), m.beta(), true};
    if (cfg.command == Command::tails) {
      ds.tails = make_tail_report(ds.dataset_id, m, cfg.ages, spec);
    } else {
      ds.risk = make_risk_report(ds.dataset_id, m, cfg.probs, spec);
    }
    study.datasets.push_back(std::move(ds));
    out << render(study, cfg.render_format);
    return exit_ok;
  }

  switch (cfg.command) {
    case Command::describe:
      opt.with_stats = true;
      break;
    case Command::fit:
    case Command::compare:
      opt.with_fit = true;
      break;
    case Command::tails:
      opt.with_tails = true;
      break;
    case Command::risk:
      opt.with_risk = true;
      break;
    default:  // report
      opt.with_stats = opt.with_fit = opt.with_tails = opt.with_risk = true;
      opt.with_verification = true;
      break;
  }

  const auto samples = load_samples(cfg, in, err);
  study = build_study(samples, opt);
  out << render(study, cfg.render_format);
  if (opt.with_verification && !verification_passed(study.verification))
    return exit_verify;
  return exit_ok;
}

}  // namespace detail

inline int run(const RunConfig& cfg, std::istream& in, std::ostream& out,
               std::ostream& err) {
  std::ofstream file;
  std::ostream* sink = &out;
  try {
    if (!cfg.out.empty()) {
      file.open(cfg.out);
      if (!file) throw DataError("cannot open output '" + cfg.out + "'");
      sink = &file;
    }
    return detail::dispatch(cfg, in, *sink, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_data;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return exit_data;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const TailUnderflowError& e) {
    err << "error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
}

}  // namespace obsolib::cli

#endif
