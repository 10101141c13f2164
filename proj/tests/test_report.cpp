#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "obsolib/report.hpp"
#include "obsolib/simulate.hpp"

using namespace obsolib;
using Catch::Matchers::WithinAbs;

namespace {

AgeSample sample_from_ages(const std::string& id,
                           const std::vector<std::int64_t>& ages) {
  std::map<std::int64_t, std::int64_t> counts;
  for (const auto a : ages) ++counts[a];
  // simulated draws occasionally exceed the observational cap
  return AgeSample::from_counts(id, GroupKind::category, counts, 1 << 20);
}

AgeSample simulated_sample(const std::string& id, double alpha, double beta,
                           std::int64_t n, std::uint64_t seed) {
  return sample_from_ages(id, simulate_ages(alpha, beta, n, seed));
}

int count_rows(const std::string& csv, const std::string& prefix) {
  int n = 0;
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line))
    if (line.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("probability formatting", "[report]") {
  using detail::format_prob;
  CHECK(format_prob(0.11116) == "0.1112");
  CHECK(format_prob(0.0) == "0.0000");
  CHECK(format_prob(1.0) == "1.0000");
  CHECK(format_prob(1e-4) == "0.0001");
  CHECK(format_prob(9.99e-5) == "9.99E-5");
  CHECK(format_prob(6.303e-7) == "6.30E-7");
  CHECK(format_prob(3.014e-6) == "3.01E-6");
  CHECK(format_prob(1.07e-15) == "1.07E-15");
}

TEST_CASE("build_study end to end on a simulated dataset", "[report]") {
  const auto s = simulated_sample("sim", 1.71, 0.18, 20000, 3);
  const auto study = build_study({s});

  REQUIRE(study.datasets.size() == 1);
  const auto& ds = study.datasets[0];
  CHECK(ds.dataset_id == "sim");
  REQUIRE(ds.stats.has_value());
  CHECK(ds.stats->n_obs == 20000);
  REQUIRE(ds.fit.has_value());
  REQUIRE(ds.fit->negbin.has_value());
  REQUIRE(ds.model.has_value());
  CHECK_FALSE(ds.model->injected);
  CHECK(ds.model->alpha == ds.fit->negbin->alpha());
  REQUIRE(ds.tails.has_value());
  REQUIRE(ds.risk.has_value());
  CHECK_FALSE(ds.skip_reason.has_value());

  // tail columns are exactly the closed forms under the fitted model
  const NegBinModel m(ds.model->alpha, ds.model->beta);
  REQUIRE(ds.tails->ages == default_ages());
  for (std::size_t i = 0; i < ds.tails->ages.size(); ++i) {
    CHECK(ds.tails->survival[i] == survival(m, ds.tails->ages[i]));
    CHECK(ds.tails->mortality[i] == mortality(m, ds.tails->ages[i]));
  }
  REQUIRE(ds.risk->probabilities == default_probs());
  for (std::size_t i = 0; i < ds.risk->probabilities.size(); ++i)
    CHECK(ds.risk->var[i] == var_p(m, ds.risk->probabilities[i]));
}

TEST_CASE("injected parameters bypass the fit for tail measures", "[report]") {
  const auto toy = sample_from_ages("cb", {0, 1, 1, 2, 3, 5, 8, 13});
  StudyOptions opt;
  opt.injected["cb"] = {1.71, 0.18};
  const auto study = build_study({toy}, opt);

  REQUIRE(study.datasets.size() == 1);
  const auto& ds = study.datasets[0];
  REQUIRE(ds.model.has_value());
  CHECK(ds.model->injected);
  CHECK(ds.model->alpha == 1.71);
  CHECK(ds.model->beta == 0.18);
  REQUIRE(ds.tails.has_value());
  CHECK_THAT(ds.tails->survival[0], WithinAbs(0.1112, 5e-3));
  REQUIRE(ds.risk.has_value());
  CHECK(ds.risk->var[0] == 36);
  CHECK_THAT(ds.risk->tvar[0], WithinAbs(37.18, 5e-3));
}

TEST_CASE("grid validation happens before any work", "[report]") {
  const auto s = sample_from_ages("a", {1, 2, 3});
  StudyOptions bad_probs;
  bad_probs.probs = {};
  CHECK_THROWS_AS(build_study({s}, bad_probs), DomainError);
  bad_probs.probs = {0.5, 1.0};
  CHECK_THROWS_AS(build_study({s}, bad_probs), DomainError);

  StudyOptions bad_ages;
  bad_ages.ages = {10, 10, 20};
  CHECK_THROWS_AS(build_study({s}, bad_ages), DomainError);
  bad_ages.ages = {-1, 4};
  CHECK_THROWS_AS(build_study({s}, bad_ages), DomainError);
  bad_ages.ages = {};
  CHECK_THROWS_AS(build_study({s}, bad_ages), DomainError);

  // grids only matter for the sections that use them
  StudyOptions no_tails;
  no_tails.ages = {};
  no_tails.probs = {};
  no_tails.with_tails = false;
  no_tails.with_risk = false;
  CHECK_NOTHROW(build_study({s}, no_tails));
}

TEST_CASE("age zero row reports full survival", "[report]") {
  const auto toy = sample_from_ages("z", {0, 1, 2});
  StudyOptions opt;
  opt.injected["z"] = {1.33, 0.11};
  opt.ages = {0};
  const auto study = build_study({toy}, opt);
  REQUIRE(study.datasets[0].tails.has_value());
  CHECK(study.datasets[0].tails->survival == std::vector<double>{1.0});
}

TEST_CASE("datasets come out sorted and duplicates are rejected", "[report]") {
  const auto b = sample_from_ages("beta", {1, 2, 3, 9});
  const auto a = sample_from_ages("alpha", {2, 4, 4, 8});
  const auto study = build_study({b, a});
  REQUIRE(study.datasets.size() == 2);
  CHECK(study.datasets[0].dataset_id == "alpha");
  CHECK(study.datasets[1].dataset_id == "beta");

  const auto dup = sample_from_ages("alpha", {5, 6});
  CHECK_THROWS_AS(build_study({a, dup}), DataError);
}

TEST_CASE("underdispersed dataset degrades to Poisson-only", "[report]") {
  // variance far below the mean: the negative binomial step refuses
  const auto s = sample_from_ages("narrow", {5, 5, 5, 5, 6, 6, 6, 6});
  const auto study = build_study({s});
  const auto& ds = study.datasets[0];
  REQUIRE(ds.fit.has_value());
  CHECK_FALSE(ds.fit->negbin.has_value());
  CHECK(ds.fit->preferred == Preferred::poisson);
  CHECK_FALSE(ds.tails.has_value());
  CHECK_FALSE(ds.risk.has_value());
  REQUIRE(ds.skip_reason.has_value());
  CHECK(ds.skip_reason->find("no negative binomial model") != std::string::npos);

  // the skip still renders
  const auto csv = render(study, RenderFormat::csv);
  CHECK(count_rows(csv, "skip,narrow") == 1);
  CHECK(count_rows(csv, "tails,") == 0);
}

TEST_CASE("csv row counts match the grid sizes", "[report]") {
  const auto s = simulated_sample("sim", 1.2, 0.1, 4000, 11);
  StudyOptions opt;
  opt.ages = {10, 20, 30, 40};
  opt.probs = {0.01, 0.05};
  const auto csv = render(build_study({s}, opt), RenderFormat::csv);

  CHECK(count_rows(csv, "tails,sim,survival,") == 4);
  CHECK(count_rows(csv, "tails,sim,mortality,") == 4);
  CHECK(count_rows(csv, "risk,sim,var,") == 2);
  CHECK(count_rows(csv, "risk,sim,tvar,") == 2);
  CHECK(count_rows(csv, "risk,sim,tail_mean,") == 2);
  CHECK(count_rows(csv, "stats,sim,") == 7);
  CHECK(csv.rfind("section,dataset,metric,x,value,pass\n", 0) == 0);
}

TEST_CASE("csv quoting protects embedded commas", "[report]") {
  CHECK(detail::csv_escape("plain") == "plain");
  CHECK(detail::csv_escape("a,b") == "\"a,b\"");
  CHECK(detail::csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("rendering is deterministic", "[report]") {
  const auto s1 = simulated_sample("a", 1.5, 0.12, 8000, 5);
  const auto s2 = simulated_sample("b", 1.11, 0.05, 8000, 6);
  const auto study1 = build_study({s1, s2});
  const auto study2 = build_study({s1, s2});
  for (const auto f :
       {RenderFormat::text, RenderFormat::csv, RenderFormat::json})
    CHECK(render(study1, f) == render(study2, f));
}

TEST_CASE("json payload round-trips at full precision", "[report]") {
  const auto s = simulated_sample("rt", 1.5, 0.12, 8000, 5);
  const auto study = build_study({s});
  const auto parsed = nlohmann::json::parse(render(study, RenderFormat::json));

  const auto& ds = study.datasets[0];
  const auto& j = parsed.at("datasets").at(0);
  CHECK(j.at("id") == "rt");
  CHECK(j.at("fit").at("negbin").at("alpha").get<double>() ==
        ds.fit->negbin->alpha());
  CHECK(j.at("fit").at("negbin").at("beta").get<double>() ==
        ds.fit->negbin->beta());
  CHECK(j.at("tails").at("survival").at(0).get<double>() ==
        ds.tails->survival[0]);
  CHECK(j.at("risk").at("tvar").at(8).get<double>() == ds.risk->tvar[8]);
  CHECK(j.at("model").at("source") == "fitted");
  CHECK(parsed.at("verification").empty());
}

TEST_CASE("verification entries all pass and render", "[report][verify]") {
  const auto entries = run_verification();
  REQUIRE(entries.size() == 10);
  CHECK(verification_passed(entries));
  for (const auto& e : entries) {
    INFO(e.name << " deviation " << e.max_deviation << " tol " << e.tolerance);
    CHECK(e.pass);
    if (std::isfinite(e.tolerance)) CHECK(e.max_deviation <= e.tolerance);
  }

  // determinism of the whole verification block
  const auto again = run_verification();
  REQUIRE(again.size() == entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(entries[i].name == again[i].name);
    CHECK(entries[i].max_deviation == again[i].max_deviation);
  }

  StudyReport study;
  study.verification = entries;
  const auto text = render(study, RenderFormat::text);
  CHECK(text.find("[PASS] survival_closed_vs_summation") != std::string::npos);
  CHECK(text.find("[INFO] tvar_strict_exceedance_gap") != std::string::npos);
  CHECK(text.find("[FAIL]") == std::string::npos);
  const auto csv = render(study, RenderFormat::csv);
  CHECK(count_rows(csv, "verification,") == 10);
}
