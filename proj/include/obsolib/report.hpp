#ifndef OBSOLIB_REPORT_HPP
#define OBSOLIB_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "obsolib/convergence.hpp"
#include "obsolib/errors.hpp"
#include "obsolib/fit.hpp"
#include "obsolib/ingest.hpp"
#include "obsolib/tails.hpp"
#include "obsolib/verify.hpp"

namespace obsolib {

// model a dataset's tail measures were computed under, with provenance
struct ModelRef {
  double alpha;
  double beta;
  bool injected;
};

struct DatasetReport {
  std::string dataset_id;
  std::optional<StatsReport> stats;
  std::optional<FitReport> fit;
  std::optional<ModelRef> model;
  std::optional<TailReport> tails;
  std::optional<RiskReport> risk;
  std::optional<std::string> skip_reason;
};

struct StudyReport {
  std::vector<DatasetReport> datasets;
  std::vector<VerificationEntry> verification;
};

inline std::vector<std::int64_t> default_ages() {
  return {20, 30, 40, 50, 60, 70, 80, 90, 100};
}

inline std::vector<double> default_probs() {
  return {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09};
}

struct StudyOptions {
  std::vector<std::int64_t> ages = default_ages();
  std::vector<double> probs = default_probs();
  // dataset id -> (alpha, beta); overrides the fitted model for tail measures
  std::map<std::string, std::pair<double, double>> injected;
  bool with_stats = true;
  bool with_fit = true;
  bool with_tails = true;
  bool with_risk = true;
  bool with_verification = false;
  ConvergenceSpec spec{};
};

namespace detail {

inline void validate_age_grid(const std::vector<std::int64_t>& ages) {
  if (ages.empty()) throw DomainError("build_study: ages grid must be non-empty");
  for (std::size_t i = 0; i < ages.size(); ++i) {
    if (ages[i] < 0)
      throw DomainError("build_study: ages must be nonnegative");
    if (i > 0 && ages[i] <= ages[i - 1])
      throw DomainError("build_study: ages must be strictly increasing");
  }
}

inline void validate_prob_grid(const std::vector<double>& probs) {
  if (probs.empty())
    throw DomainError("build_study: probability grid must be non-empty");
  for (const auto p : probs)
    if (!(p > 0.0 && p < 1.0))
      throw DomainError(
          "build_study: probabilities must lie strictly inside (0, 1)");
}

inline void append_reason(std::optional<std::string>& slot,
                          const std::string& reason) {
  if (slot)
    *slot += "; " + reason;
  else
    slot = reason;
}

}  // namespace detail

inline StudyReport build_study(const std::vector<AgeSample>& samples,
                               const StudyOptions& opt = {}) {
  if (opt.with_tails) detail::validate_age_grid(opt.ages);
  if (opt.with_risk) detail::validate_prob_grid(opt.probs);

  std::vector<const AgeSample*> ordered;
  ordered.reserve(samples.size());
  for (const auto& s : samples) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const AgeSample* a, const AgeSample* b) {
              return a->dataset_id() < b->dataset_id();
            });
  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i]->dataset_id() == ordered[i - 1]->dataset_id())
      throw DataError("build_study: duplicate dataset id '" +
                      ordered[i]->dataset_id() + "'");

  StudyReport study;
  for (const auto* sample : ordered) {
    DatasetReport ds;
    ds.dataset_id = sample->dataset_id();

    if (opt.with_stats) {
      try {
        ds.stats = descriptive_stats(*sample);
      } catch (const DataError& e) {
        detail::append_reason(ds.skip_reason, std::string("stats: ") + e.what());
      }
    }

    const bool need_model = opt.with_tails || opt.with_risk;
    const auto inj = opt.injected.find(ds.dataset_id);
    if (opt.with_fit || (need_model && inj == opt.injected.end())) {
      try {
        ds.fit = compare_models(*sample, ds.dataset_id);
      } catch (const DataError& e) {
        detail::append_reason(ds.skip_reason, std::string("fit: ") + e.what());
      }
    }

    if (need_model) {
      if (inj != opt.injected.end()) {
        NegBinModel m(inj->second.first, inj->second.second);
        ds.model = ModelRef{m.alpha(), m.beta(), true};
      } else if (ds.fit && ds.fit->negbin) {
        ds.model = ModelRef{ds.fit->negbin->alpha(), ds.fit->negbin->beta(),
                            false};
      } else {
        std::string why = "no negative binomial model for tail measures";
        if (ds.fit && ds.fit->negbin_skip_reason)
          why += " (" + *ds.fit->negbin_skip_reason + ")";
        detail::append_reason(ds.skip_reason, why);
      }
    }

    if (ds.model) {
      const NegBinModel m(ds.model->alpha, ds.model->beta);
      if (opt.with_tails) {
        try {
          ds.tails = make_tail_report(ds.dataset_id, m, opt.ages, opt.spec);
        } catch (const TailUnderflowError& e) {
          detail::append_reason(ds.skip_reason,
                                std::string("tails: ") + e.what());
        }
      }
      if (opt.with_risk)
        ds.risk = make_risk_report(ds.dataset_id, m, opt.probs, opt.spec);
    }

    if (!opt.with_fit) ds.fit.reset();
    study.datasets.push_back(std::move(ds));
  }

  if (opt.with_verification) study.verification = run_verification(opt.spec);
  return study;
}

enum class RenderFormat { text, csv, json };

namespace detail {

// probabilities print with four decimals; below 1e-4 they switch to
// scientific notation with a bare exponent, e.g. 6.30E-7
inline std::string format_prob(double v) {
  char buf[48];
  if (v >= 1e-4 || v == 0.0) {
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%.2E", v);
  std::string s = buf;
  const auto e = s.find('E');
  std::size_t d = e + 2;  // skip 'E' and the sign
  while (d + 1 < s.size() && s[d] == '0') s.erase(d, 1);
  return s;
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string format_compact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string format_sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline const char* preferred_name(Preferred p) {
  return p == Preferred::poisson ? "poisson" : "negbin";
}

inline nlohmann::ordered_json study_to_json(const StudyReport& study) {
  nlohmann::ordered_json root;
  root["datasets"] = nlohmann::ordered_json::array();
  for (const auto& ds : study.datasets) {
    nlohmann::ordered_json j;
    j["id"] = ds.dataset_id;
    if (ds.stats) {
      j["stats"] = {{"n_obs", ds.stats->n_obs},
                    {"mean", ds.stats->mean},
                    {"median", ds.stats->median},
                    {"mode", ds.stats->mode},
                    {"min", ds.stats->min},
                    {"max", ds.stats->max},
                    {"dispersion_index", ds.stats->dispersion_index}};
    }
    if (ds.fit) {
      nlohmann::ordered_json f;
      f["n_obs"] = ds.fit->n_obs;
      f["poisson"] = {{"theta", ds.fit->poisson.theta()},
                      {"loglik", ds.fit->poisson_loglik},
                      {"aic", ds.fit->poisson_aic}};
      if (ds.fit->negbin) {
        f["negbin"] = {{"alpha", ds.fit->negbin->alpha()},
                       {"beta", ds.fit->negbin->beta()},
                       {"q0", ds.fit->negbin->q0()},
                       {"loglik", *ds.fit->negbin_loglik},
                       {"aic", *ds.fit->negbin_aic}};
      } else {
        f["negbin"] = nullptr;
      }
      if (ds.fit->negbin_skip_reason)
        f["negbin_skip_reason"] = *ds.fit->negbin_skip_reason;
      f["preferred"] = preferred_name(ds.fit->preferred);
      if (ds.fit->aic_reduction_pct)
        f["aic_reduction_pct"] = *ds.fit->aic_reduction_pct;
      if (!ds.fit->warnings.empty()) f["warnings"] = ds.fit->warnings;
      j["fit"] = std::move(f);
    }
    if (ds.model) {
      j["model"] = {{"alpha", ds.model->alpha},
                    {"beta", ds.model->beta},
                    {"source", ds.model->injected ? "injected" : "fitted"}};
    }
    if (ds.tails) {
      j["tails"] = {{"ages", ds.tails->ages},
                    {"survival", ds.tails->survival},
                    {"mortality", ds.tails->mortality}};
    }
    if (ds.risk) {
      j["risk"] = {{"probabilities", ds.risk->probabilities},
                   {"var", ds.risk->var},
                   {"tvar", ds.risk->tvar},
                   {"tail_mean", ds.risk->tail_mean}};
    }
    if (ds.skip_reason) j["skip_reason"] = *ds.skip_reason;
    root["datasets"].push_back(std::move(j));
  }
  root["verification"] = nlohmann::ordered_json::array();
  for (const auto& e : study.verification) {
    nlohmann::ordered_json j;
    j["name"] = e.name;
    j["max_deviation"] = e.max_deviation;
    j["tolerance"] = e.tolerance;  // diagnostics carry +inf, dumped as null
    j["pass"] = e.pass;
    root["verification"].push_back(std::move(j));
  }
  return root;
}

inline void render_csv_row(std::ostringstream& os, const std::string& section,
                           const std::string& dataset,
                           const std::string& metric, const std::string& x,
                           const std::string& value,
                           const std::string& pass = "") {
  os << section << ',' << csv_escape(dataset) << ',' << metric << ',' << x
     << ',' << csv_escape(value) << ',' << pass << '\n';
}

inline std::string render_csv(const StudyReport& study) {
  std::ostringstream os;
  os << "section,dataset,metric,x,value,pass\n";
  for (const auto& ds : study.datasets) {
    const auto& id = ds.dataset_id;
    if (ds.stats) {
      render_csv_row(os, "stats", id, "n_obs", "",
                     std::to_string(ds.stats->n_obs));
      render_csv_row(os, "stats", id, "mean", "",
                     format_fixed(ds.stats->mean, 2));
      render_csv_row(os, "stats", id, "median", "",
                     format_fixed(ds.stats->median, 1));
      render_csv_row(os, "stats", id, "mode", "", std::to_string(ds.stats->mode));
      render_csv_row(os, "stats", id, "min", "", std::to_string(ds.stats->min));
      render_csv_row(os, "stats", id, "max", "", std::to_string(ds.stats->max));
      render_csv_row(os, "stats", id, "dispersion_index", "",
                     format_fixed(ds.stats->dispersion_index, 2));
    }
    if (ds.fit) {
      render_csv_row(os, "fit", id, "theta", "",
                     format_fixed(ds.fit->poisson.theta(), 4));
      render_csv_row(os, "fit", id, "poisson_loglik", "",
                     format_fixed(ds.fit->poisson_loglik, 2));
      render_csv_row(os, "fit", id, "poisson_aic", "",
                     format_fixed(ds.fit->poisson_aic, 2));
      if (ds.fit->negbin) {
        render_csv_row(os, "fit", id, "alpha", "",
                       format_fixed(ds.fit->negbin->alpha(), 4));
        render_csv_row(os, "fit", id, "beta", "",
                       format_fixed(ds.fit->negbin->beta(), 4));
        render_csv_row(os, "fit", id, "negbin_loglik", "",
                       format_fixed(*ds.fit->negbin_loglik, 2));
        render_csv_row(os, "fit", id, "negbin_aic", "",
                       format_fixed(*ds.fit->negbin_aic, 2));
      }
      if (ds.fit->negbin_skip_reason)
        render_csv_row(os, "fit", id, "negbin_skip_reason", "",
                       *ds.fit->negbin_skip_reason);
      render_csv_row(os, "fit", id, "preferred", "",
                     preferred_name(ds.fit->preferred));
      if (ds.fit->aic_reduction_pct)
        render_csv_row(os, "fit", id, "aic_reduction_pct", "",
                       format_fixed(*ds.fit->aic_reduction_pct, 2));
    }
    if (ds.model) {
      render_csv_row(os, "model", id, "alpha", "",
                     format_fixed(ds.model->alpha, 4));
      render_csv_row(os, "model", id, "beta", "",
                     format_fixed(ds.model->beta, 4));
      render_csv_row(os, "model", id, "source", "",
                     ds.model->injected ? "injected" : "fitted");
    }
    if (ds.tails) {
      for (std::size_t i = 0; i < ds.tails->ages.size(); ++i)
        render_csv_row(os, "tails", id, "survival",
                       std::to_string(ds.tails->ages[i]),
                       format_prob(ds.tails->survival[i]));
      for (std::size_t i = 0; i < ds.tails->ages.size(); ++i)
        render_csv_row(os, "tails", id, "mortality",
                       std::to_string(ds.tails->ages[i]),
                       format_prob(ds.tails->mortality[i]));
    }
    if (ds.risk) {
      for (std::size_t i = 0; i < ds.risk->probabilities.size(); ++i)
        render_csv_row(os, "risk", id, "var",
                       format_compact(ds.risk->probabilities[i]),
                       std::to_string(ds.risk->var[i]));
      for (std::size_t i = 0; i < ds.risk->probabilities.size(); ++i)
        render_csv_row(os, "risk", id, "tvar",
                       format_compact(ds.risk->probabilities[i]),
                       format_fixed(ds.risk->tvar[i], 2));
      for (std::size_t i = 0; i < ds.risk->probabilities.size(); ++i)
        render_csv_row(os, "risk", id, "tail_mean",
                       format_compact(ds.risk->probabilities[i]),
                       format_fixed(ds.risk->tail_mean[i], 2));
    }
    if (ds.skip_reason)
      render_csv_row(os, "skip", id, "reason", "", *ds.skip_reason);
  }
  // for verification rows the x column holds the tolerance
  for (const auto& e : study.verification)
    render_csv_row(os, "verification", "", e.name,
                   std::isfinite(e.tolerance) ? format_sci(e.tolerance) : "",
                   format_sci(e.max_deviation), e.pass ? "PASS" : "FAIL");
  return os.str();
}

inline std::string render_text(const StudyReport& study) {
  std::ostringstream os;
  constexpr int label_w = 12;
  constexpr int cell_w = 10;
  bool first = true;
  for (const auto& ds : study.datasets) {
    if (!first) os << '\n';
    first = false;
    os << "== " << ds.dataset_id << " ==\n";
    if (ds.stats) {
      os << "stats      n=" << ds.stats->n_obs
         << "  mean=" << format_fixed(ds.stats->mean, 2)
         << "  median=" << format_fixed(ds.stats->median, 1)
         << "  mode=" << ds.stats->mode << "  min=" << ds.stats->min
         << "  max=" << ds.stats->max
         << "  dispersion=" << format_fixed(ds.stats->dispersion_index, 2)
         << '\n';
    }
    if (ds.fit) {
      os << "fit        poisson  theta=" << format_fixed(ds.fit->poisson.theta(), 4)
         << "  loglik=" << format_fixed(ds.fit->poisson_loglik, 2)
         << "  aic=" << format_fixed(ds.fit->poisson_aic, 2) << '\n';
      if (ds.fit->negbin) {
        os << "           negbin   alpha=" << format_fixed(ds.fit->negbin->alpha(), 4)
           << "  beta=" << format_fixed(ds.fit->negbin->beta(), 4)
           << "  loglik=" << format_fixed(*ds.fit->negbin_loglik, 2)
           << "  aic=" << format_fixed(*ds.fit->negbin_aic, 2) << '\n';
      } else if (ds.fit->negbin_skip_reason) {
        os << "           negbin   skipped: " << *ds.fit->negbin_skip_reason
           << '\n';
      }
      os << "           preferred=" << preferred_name(ds.fit->preferred);
      if (ds.fit->aic_reduction_pct)
        os << "  aic_reduction=" << format_fixed(*ds.fit->aic_reduction_pct, 2)
           << '%';
      os << '\n';
      for (const auto& w : ds.fit->warnings)
        os << "           warning: " << w << '\n';
    }
    if (ds.model) {
      os << "model      alpha=" << format_fixed(ds.model->alpha, 4)
         << "  beta=" << format_fixed(ds.model->beta, 4) << "  ("
         << (ds.model->injected ? "injected" : "fitted") << ")\n";
    }
    if (ds.tails) {
      os << "tails\n" << std::left << std::setw(label_w) << "  age";
      for (const auto a : ds.tails->ages) os << std::setw(cell_w) << a;
      os << '\n' << std::setw(label_w) << "  survival";
      for (const auto v : ds.tails->survival)
        os << std::setw(cell_w) << format_prob(v);
      os << '\n' << std::setw(label_w) << "  mortality";
      for (const auto v : ds.tails->mortality)
        os << std::setw(cell_w) << format_prob(v);
      os << '\n';
    }
    if (ds.risk) {
      os << "risk\n" << std::left << std::setw(label_w) << "  p";
      for (const auto p : ds.risk->probabilities)
        os << std::setw(cell_w) << format_compact(p);
      os << '\n' << std::setw(label_w) << "  var";
      for (const auto v : ds.risk->var) os << std::setw(cell_w) << v;
      os << '\n' << std::setw(label_w) << "  tvar";
      for (const auto v : ds.risk->tvar)
        os << std::setw(cell_w) << format_fixed(v, 2);
      os << '\n' << std::setw(label_w) << "  tail_mean";
      for (const auto v : ds.risk->tail_mean)
        os << std::setw(cell_w) << format_fixed(v, 2);
      os << '\n';
    }
    if (ds.skip_reason) os << "skip       " << *ds.skip_reason << '\n';
  }
  if (!study.verification.empty()) {
    if (!first) os << '\n';
    os << "verification\n";
    for (const auto& e : study.verification) {
      if (std::isfinite(e.tolerance)) {
        os << "  [" << (e.pass ? "PASS" : "FAIL") << "] " << std::left
           << std::setw(34) << e.name << " max_dev=" << std::setw(10)
           << format_sci(e.max_deviation) << " tol=" << format_sci(e.tolerance)
           << '\n';
      } else {
        os << "  [INFO] " << std::left << std::setw(34) << e.name
           << " max_dev=" << std::setw(10) << format_sci(e.max_deviation)
           << " (diagnostic)\n";
      }
    }
  }
  return os.str();
}

}  // namespace detail

inline std::string render(const StudyReport& study, RenderFormat format) {
  switch (format) {
    case RenderFormat::csv:
      return detail::render_csv(study);
    case RenderFormat::json:
      return detail::study_to_json(study).dump(2) + "\n";
    default:
      return detail::render_text(study);
  }
}

}  // namespace obsolib

#endif
