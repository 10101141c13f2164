#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "obsolib/cli.hpp"
#include "obsolib/fit.hpp"
#include "obsolib/ingest.hpp"
#include "obsolib/report.hpp"
#include "obsolib/simulate.hpp"
#include "obsolib/tails.hpp"
#include "obsolib/verify.hpp"

// Acceptance gate.  Each numbered criterion prints one [PASS]/[FAIL] line;
// the process exits nonzero if any fail.
//
// The published tables list model parameters rounded to two decimals, so a
// printed table cell is compared against the range a quantity attains while
// (alpha, beta) sweep the rounding box +-0.005, widened by the stated
// tolerance.  A cell also passes when its own print quantization band (half
// of the last printed decimal) overlaps the computed range.

namespace {

using namespace obsolib;

int failures = 0;

void line(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s%s%s\n", ok ? "PASS" : "FAIL", idx, name,
              detail.empty() ? "" : " :: ", detail.c_str());
  if (!ok) ++failures;
}

struct Cat {
  const char* id;
  double alpha, beta;
};

constexpr Cat kCats[8] = {
    {"CB", 1.71, 0.18},   {"E&E", 1.48, 0.12}, {"E&EE", 1.21, 0.15},
    {"GC", 1.13, 0.12},   {"GM", 1.44, 0.17},  {"GP&A", 1.16, 0.08},
    {"H", 1.11, 0.05},    {"L&IS", 1.33, 0.11},
};

constexpr std::int64_t kAges[9] = {20, 30, 40, 50, 60, 70, 80, 90, 100};
constexpr double kProbs[9] = {0.01, 0.02, 0.03, 0.04, 0.05,
                              0.06, 0.07, 0.08, 0.09};

// a published cell: printed value and half of its last printed decimal
struct Cell {
  double v, q;
};

constexpr Cell kSurv[8][9] = {
    {{0.1112, 5e-5}, {0.0273, 5e-5}, {0.0063, 5e-5}, {0.0014, 5e-5},
     {0.0003, 5e-5}, {0.0001, 5e-5}, {1.4e-5, 5e-7}, {3.01e-6, 5e-9},
     {6.30e-7, 5e-10}},
    {{0.2115, 5e-5}, {0.0813, 5e-5}, {0.0302, 5e-5}, {0.0109, 5e-5},
     {0.0039, 5e-5}, {0.0013, 5e-5}, {0.0004, 5e-5}, {0.0001, 5e-5},
     {6.0e-5, 5e-7}},
    {{0.0826, 5e-5}, {0.0212, 5e-5}, {0.0053, 5e-5}, {0.0013, 5e-5},
     {0.0003, 5e-5}, {8.2e-5, 5e-7}, {2.03e-5, 5e-8}, {5.00e-6, 5e-9},
     {1.22e-6, 5e-9}},
    {{0.1153, 5e-5}, {0.0368, 5e-5}, {0.0116, 5e-5}, {0.0036, 5e-5},
     {0.0011, 5e-5}, {0.0003, 5e-5}, {0.0001, 5e-5}, {3.4e-5, 5e-7},
     {1.07e-5, 5e-8}},
    {{0.0910, 5e-5}, {0.0222, 5e-5}, {0.0052, 5e-5}, {0.0012, 5e-5},
     {0.0002, 5e-5}, {6.2e-5, 5e-7}, {1.4e-5, 5e-7}, {3.13e-6, 5e-9},
     {6.95e-7, 5e-10}},
    {{0.2539, 5e-5}, {0.1206, 5e-5}, {0.0566, 5e-5}, {0.0264, 5e-5},
     {0.0123, 5e-5}, {0.0056, 5e-5}, {0.0026, 5e-5}, {0.0012, 5e-5},
     {0.0005, 5e-5}},
    {{0.4151, 5e-5}, {0.2595, 5e-5}, {0.1612, 5e-5}, {0.0998, 5e-5},
     {0.0616, 5e-5}, {0.0380, 5e-5}, {0.0233, 5e-5}, {0.0143, 5e-5},
     {0.0088, 5e-5}},
    {{0.1793, 5e-5}, {0.0663, 5e-5}, {0.0239, 5e-5}, {0.0085, 5e-5},
     {0.0030, 5e-5}, {0.0010, 5e-5}, {0.0003, 5e-5}, {0.0001, 5e-5},
     {4.3e-5, 5e-7}},
};

constexpr Cell kMort[8][9] = {
    {{0.1278, 5e-5}, {0.1341, 5e-5}, {0.1377, 5e-5}, {0.1400, 5e-5},
     {0.1416, 5e-5}, {0.1428, 5e-5}, {0.1437, 5e-5}, {0.1445, 5e-5},
     {0.1451, 5e-5}},
    {{0.0891, 5e-5}, {0.0931, 5e-5}, {0.0954, 5e-5}, {0.0969, 5e-5},
     {0.0980, 5e-5}, {0.0988, 5e-5}, {0.0994, 5e-5}, {0.0999, 5e-5},
     {0.1003, 5e-5}},
    {{0.1259, 5e-5}, {0.1279, 5e-5}, {0.1290, 5e-5}, {0.1297, 5e-5},
     {0.1302, 5e-5}, {0.1305, 5e-5}, {0.1308, 5e-5}, {0.1310, 5e-5},
     {0.1312, 5e-5}},
    {{0.1073, 5e-5}, {0.1084, 5e-5}, {0.1091, 5e-5}, {0.1095, 5e-5},
     {0.1097, 5e-5}, {0.1100, 5e-5}, {0.1101, 5e-5}, {0.1103, 5e-5},
     {0.1104, 5e-5}},
    {{0.1292, 5e-5}, {0.1332, 5e-5}, {0.13547, 5e-6}, {0.1369, 5e-5},
     {0.1378, 5e-5}, {0.1386, 5e-5}, {0.1391, 5e-5}, {0.1396, 5e-5},
     {0.1400, 5e-5}},
    {{0.0711, 5e-5}, {0.0723, 5e-5}, {0.0731, 5e-5}, {0.0735, 5e-5},
     {0.0739, 5e-5}, {0.0741, 5e-5}, {0.0743, 5e-5}, {0.0745, 5e-5},
     {0.0746, 5e-5}},
    {{0.0455, 5e-5}, {0.0462, 5e-5}, {0.0466, 5e-5}, {0.0469, 5e-5},
     {0.0471, 5e-5}, {0.0473, 5e-5}, {0.0474, 5e-5}, {0.0475, 5e-5},
     {0.0476, 5e-5}},
    {{0.0932, 5e-5}, {0.0960, 5e-5}, {0.0976, 5e-5}, {0.0987, 5e-5},
     {0.0994, 5e-5}, {0.0999, 5e-5}, {0.1004, 5e-5}, {0.1007, 5e-5},
     {0.1010, 5e-5}},
};

constexpr std::int64_t kVar[8][9] = {
    {36, 32, 29, 27, 25, 24, 23, 22, 21},
    {50, 44, 40, 37, 34, 33, 31, 30, 28},
    {35, 30, 27, 25, 23, 22, 21, 20, 19},
    {41, 35, 31, 29, 27, 25, 24, 23, 22},
    {35, 30, 27, 25, 24, 22, 21, 20, 20},
    {62, 53, 48, 44, 41, 39, 37, 35, 33},
    {97, 83, 74, 68, 64, 60, 57, 54, 52},
    {48, 41, 37, 34, 32, 30, 29, 28, 26},
};

constexpr double kTvar[8][9] = {
    {37.18, 33.18, 30.18, 28.18, 26.18, 25.18, 24.18, 23.18, 22.18},
    {51.11, 45.11, 41.11, 38.11, 35.11, 34.11, 32.11, 31.11, 29.11},
    {36.15, 31.15, 28.15, 26.15, 24.15, 23.15, 22.15, 21.15, 20.15},
    {42.12, 36.12, 32.12, 30.12, 28.12, 26.12, 25.12, 24.12, 23.12},
    {36.16, 31.17, 28.17, 26.17, 25.17, 23.17, 22.17, 21.17, 21.17},
    {63.08, 54.08, 49.08, 45.08, 42.08, 40.08, 38.08, 36.08, 34.08},
    {98.05, 84.05, 75.05, 69.05, 65.05, 61.05, 58.05, 55.05, 53.05},
    {49.11, 42.11, 38.11, 35.11, 33.11, 31.11, 30.11, 29.11, 27.11},
};

template <typename F>
void box_range(double alpha, double beta, F f, double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) {
      const double v =
          f(alpha - 0.005 + 0.001 * i, beta - 0.005 + 0.001 * j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
}

bool cell_in_band(Cell cell, double lo, double hi, bool relative_below_1e3) {
  if (cell.v + cell.q >= lo && cell.v - cell.q <= hi) return true;
  if (relative_below_1e3 && cell.v < 1e-3)
    return cell.v >= 0.7 * lo && cell.v <= 1.3 * hi;
  return cell.v >= lo - 5e-3 && cell.v <= hi + 5e-3;
}

double tvar_geo(double alpha, double beta, double p) {
  const TvarResult t = tvar_p(NegBinModel(alpha, beta), p);
  return t.geometric_form.value_or(t.value);
}

AgeSample sample_of(const std::vector<std::int64_t>& ages) {
  std::map<std::int64_t, std::int64_t> counts;
  for (const auto a : ages) ++counts[a];
  return AgeSample::from_counts("synthetic", GroupKind::category, counts,
                                1 << 30);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void criterion_survival() {
  const auto t0 = std::chrono::steady_clock::now();
  int bad = 0;
  double worst = 0.0;
  std::string worst_at;
  for (int c = 0; c < 8; ++c)
    for (int a = 0; a < 9; ++a) {
      double lo, hi;
      box_range(kCats[c].alpha, kCats[c].beta, [&](double al, double be) {
        return survival(NegBinModel(al, be), kAges[a]);
      }, lo, hi);
      if (!cell_in_band(kSurv[c][a], lo, hi, true)) {
        ++bad;
        const double center = survival(
            NegBinModel(kCats[c].alpha, kCats[c].beta), kAges[a]);
        const double dev = std::abs(kSurv[c][a].v - center);
        if (dev > worst) {
          worst = dev;
          worst_at = std::string(kCats[c].id) + "@" + std::to_string(kAges[a]);
        }
      }
    }
  const double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "72 cells, abs 5e-3 (rel 30%% below 1e-3): %d outside, %.2fs",
                bad, secs);
  std::string detail = buf;
  if (bad > 0) detail += " worst " + worst_at;
  line(1, "survival table", bad == 0 && secs < 1.0, detail);
}

void criterion_mortality() {
  int bad = 0;
  for (int c = 0; c < 8; ++c)
    for (int a = 0; a < 9; ++a) {
      double lo, hi;
      box_range(kCats[c].alpha, kCats[c].beta, [&](double al, double be) {
        return mortality(NegBinModel(al, be), kAges[a]);
      }, lo, hi);
      if (!cell_in_band(kMort[c][a], lo, hi, false)) ++bad;
    }
  const double cb20 = mortality(NegBinModel(1.71, 0.18), 20);
  const double h20 = mortality(NegBinModel(1.11, 0.05), 20);
  const bool anchors =
      std::abs(cb20 - 0.1278) <= 5e-3 && std::abs(h20 - 0.0455) <= 5e-3;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "72 cells abs 5e-3: %d outside; anchors CB20=%.4f H20=%.4f",
                bad, cb20, h20);
  line(2, "mortality table", bad == 0 && anchors, buf);
}

void criterion_var_tvar() {
  int var_bad = 0;
  for (int c = 0; c < 8; ++c)
    for (int p = 0; p < 9; ++p) {
      double lo, hi;
      box_range(kCats[c].alpha, kCats[c].beta, [&](double al, double be) {
        return static_cast<double>(var_p(NegBinModel(al, be), kProbs[p]));
      }, lo, hi);
      const double v = static_cast<double>(kVar[c][p]);
      if (!(v >= lo - 1.0 && v <= hi + 1.0)) ++var_bad;
    }

  // TVaR anchors, under the convention the published table prints
  double lo, hi;
  box_range(1.71, 0.18,
            [](double a, double b) { return tvar_geo(a, b, 0.01); }, lo, hi);
  const bool cb_anchor = 37.18 >= lo - 0.5 && 37.18 <= hi + 0.5;
  box_range(1.11, 0.05,
            [](double a, double b) { return tvar_geo(a, b, 0.01); }, lo, hi);
  const bool h_anchor = 98.05 >= lo - 0.5 && 98.05 <= hi + 0.5;

  // gap constancy, both in the published table and as computed
  double printed_spread = 0.0, computed_spread = 0.0;
  for (int c = 0; c < 8; ++c) {
    double pmin = 1e300, pmax = -1e300, cmin = 1e300, cmax = -1e300;
    for (int p = 0; p < 9; ++p) {
      const double printed_gap =
          kTvar[c][p] - static_cast<double>(kVar[c][p]);
      pmin = std::min(pmin, printed_gap);
      pmax = std::max(pmax, printed_gap);
      const NegBinModel m(kCats[c].alpha, kCats[c].beta);
      const TvarResult t = tvar_p(m, kProbs[p]);
      const double computed_gap =
          t.geometric_form.value_or(t.value) - static_cast<double>(t.var);
      cmin = std::min(cmin, computed_gap);
      cmax = std::max(cmax, computed_gap);
    }
    printed_spread = std::max(printed_spread, pmax - pmin);
    computed_spread = std::max(computed_spread, cmax - cmin);
  }
  const bool gaps_ok =
      printed_spread <= 0.02 + 1e-9 && computed_spread <= 0.02 + 1e-9;

  // informational: distance of every published TVaR cell from its box range
  double tvar_worst = 0.0;
  std::string tvar_worst_at;
  for (int c = 0; c < 8; ++c)
    for (int p = 0; p < 9; ++p) {
      box_range(kCats[c].alpha, kCats[c].beta, [&](double al, double be) {
        return tvar_geo(al, be, kProbs[p]);
      }, lo, hi);
      const double d =
          std::max({0.0, lo - kTvar[c][p], kTvar[c][p] - hi});
      if (d > tvar_worst) {
        tvar_worst = d;
        char at[32];
        std::snprintf(at, sizeof at, "%s@p=%.2f", kCats[c].id, kProbs[p]);
        tvar_worst_at = at;
      }
    }

  char buf[240];
  std::snprintf(buf, sizeof buf,
                "VaR +-1: %d/72 outside; anchors CB=%s H=%s; gap spread "
                "printed %.3f computed %.3f; info: full TVaR grid max "
                "box-distance %.2f at %s",
                var_bad, cb_anchor ? "ok" : "off", h_anchor ? "ok" : "off",
                printed_spread, computed_spread, tvar_worst,
                tvar_worst_at.c_str());
  line(3, "VaR/TVaR table", var_bad == 0 && cb_anchor && h_anchor && gaps_ok,
       buf);
}

void criterion_oracles() {
  const auto entries = run_verification();
  auto get = [&](const char* name) -> const VerificationEntry& {
    for (const auto& e : entries)
      if (e.name == name) return e;
    static const VerificationEntry missing{"missing", 1e300, 0.0, false};
    return missing;
  };
  const auto& surv = get("survival_closed_vs_summation");
  const auto& pmf = get("pmf_closed_vs_quadrature");
  const auto& trunc = get("tvar_truncation_bound");
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "survival dev %.2e (<=1e-10), pmf dev %.2e (<=1e-8), "
                "truncation %.2e (<1e-9)",
                surv.max_deviation, pmf.max_deviation, trunc.max_deviation);
  line(4, "oracle equivalence",
       surv.pass && pmf.pass && trunc.max_deviation < 1e-9, buf);
}

void criterion_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> rel_a, rel_b;
  int nb_wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = sample_of(simulate_ages(1.5, 0.12, 50000, seed));
    const FitReport r = compare_models(s, "nb");
    if (!r.negbin) {
      rel_a.push_back(1.0);
      rel_b.push_back(1.0);
      continue;
    }
    rel_a.push_back(std::abs(r.negbin->alpha() - 1.5) / 1.5);
    rel_b.push_back(std::abs(r.negbin->beta() - 0.12) / 0.12);
    if (*r.negbin_aic < r.poisson_aic) ++nb_wins;
  }
  const double med_a = median_of(rel_a), med_b = median_of(rel_b);

  int small_reduction = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    std::vector<std::int64_t> draws;
    draws.reserve(50000);
    for (int i = 0; i < 50000; ++i) draws.push_back(sample_poisson(rng, 5.0));
    const FitReport r = compare_models(sample_of(draws), "pois");
    const double reduction = r.aic_reduction_pct.value_or(0.0);
    if (std::abs(reduction) < 0.1) ++small_reduction;
  }
  const double secs = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "median rel err alpha %.3f beta %.3f (<=0.05); NB wins %d/10; "
                "Poisson |reduction|<0.1%%: %d/10 (>=9); %.1fs (<30)",
                med_a, med_b, nb_wins, small_reduction, secs);
  line(5, "estimator recovery",
       med_a <= 0.05 && med_b <= 0.05 && nb_wins == 10 &&
           small_reduction >= 9 && secs < 30.0,
       buf);
}

void criterion_hazard() {
  int bad = 0;
  for (const auto& cat : kCats) {
    const NegBinModel m(cat.alpha, cat.beta);
    double prev = mortality(m, 1);
    for (std::int64_t x = 2; x <= 150; ++x) {
      const double cur = mortality(m, x);
      if (cur < prev - 1e-12) ++bad;
      prev = cur;
    }
  }
  line(6, "increasing hazard", bad == 0,
       bad == 0 ? "nondecreasing on [1,150] for all 8 parameter pairs"
                : std::to_string(bad) + " decreases found");
}

void criterion_exclusions() {
  // absolute AIC/loglik magnitudes and corpus descriptive statistics need
  // the raw citation corpus, which is not shipped; the substitute is the
  // property checks above plus this sampler-vs-pmf comparison
  const NegBinModel m(1.5, 0.12);
  const auto draws = simulate_ages(1.5, 0.12, 1000000, 20260823u);
  std::vector<std::int64_t> hist(6, 0);
  for (const auto d : draws)
    if (d < 6) ++hist[static_cast<std::size_t>(d)];
  double worst = 0.0;
  for (std::int64_t x = 0; x < 6; ++x)
    worst = std::max(
        worst, std::abs(static_cast<double>(hist[static_cast<std::size_t>(x)]) /
                            1e6 -
                        negbin_pmf(m, x)));
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "absolute AIC values and corpus descriptive stats excluded "
                "(raw corpus not shipped); substitute MC pmf check dev %.2e "
                "(<=2e-3)",
                worst);
  line(7, "documented exclusions", worst <= 2e-3, buf);
}

void criterion_determinism() {
  cli::RunConfig sim;
  sim.command = cli::Command::simulate;
  sim.alpha = 1.71;
  sim.beta = 0.18;
  sim.n = 2000;
  sim.seed = 123;

  auto run_to_string = [](const cli::RunConfig& cfg, const std::string& input,
                          int& code) {
    std::istringstream in(input);
    std::ostringstream out, err;
    code = cli::run(cfg, in, out, err);
    return out.str();
  };

  int c1 = 0, c2 = 0;
  const auto sim1 = run_to_string(sim, "", c1);
  const auto sim2 = run_to_string(sim, "", c2);
  const bool sim_ok = c1 == 0 && c2 == 0 && sim1 == sim2;

  cli::RunConfig rep;
  rep.command = cli::Command::report;
  rep.render_format = RenderFormat::json;
  const auto rep1 = run_to_string(rep, sim1, c1);
  const auto rep2 = run_to_string(rep, sim1, c2);
  const bool rep_ok = c1 == 0 && c2 == 0 && rep1 == rep2 && !rep1.empty();

  char buf[120];
  std::snprintf(buf, sizeof buf,
                "simulate %zu bytes %s; report %zu bytes %s", sim1.size(),
                sim_ok ? "identical" : "DIFFER", rep1.size(),
                rep_ok ? "identical" : "DIFFER");
  line(8, "byte-stable outputs", sim_ok && rep_ok, buf);
}

}  // namespace

int main() {
  criterion_survival();
  criterion_mortality();
  criterion_var_tvar();
  criterion_oracles();
  criterion_recovery();
  criterion_hazard();
  criterion_exclusions();
  criterion_determinism();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 8 criteria passed\n");
  return 0;
}
