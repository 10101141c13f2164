#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "obsolib/cli.hpp"

namespace {

struct Flags {
  obsolib::cli::RunConfig cfg;
  std::string format = "records";
  std::string by = "category";
  std::string ages;
  std::string probs;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
};

bool option_given(const CLI::App* cmd, const std::string& name) {
  const auto* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

void add_render_flags(CLI::App* cmd, Flags& f) {
  auto* json = cmd->add_flag_callback(
      "--json", [&f] { f.cfg.render_format = obsolib::RenderFormat::json; },
      "emit JSON");
  auto* csv = cmd->add_flag_callback(
      "--csv", [&f] { f.cfg.render_format = obsolib::RenderFormat::csv; },
      "emit long-format CSV");
  auto* table = cmd->add_flag_callback(
      "--table", [&f] { f.cfg.render_format = obsolib::RenderFormat::text; },
      "emit aligned text tables (default)");
  json->excludes(csv, table);
  csv->excludes(table);
  cmd->add_option("-o,--out", f.cfg.out, "write to this path instead of stdout");
}

void add_input_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("-i,--input", f.cfg.input,
                  "input CSV path ('-' or omitted: stdin)");
  cmd->add_option("--format", f.format, "input layout")
      ->check(CLI::IsMember({"records", "histogram"}));
  cmd->add_option("--by", f.by, "grouping column")
      ->check(CLI::IsMember({"category", "journal"}));
  cmd->add_option("--age-cap", f.cfg.age_cap, "reject ages above this")
      ->check(CLI::PositiveNumber);
  cmd->add_flag_callback(
      "--lenient",
      [&f] { f.cfg.strictness = obsolib::Strictness::lenient; },
      "skip malformed rows with a warning instead of failing");
}

void add_model_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--alpha", f.alpha, "gamma shape");
  cmd->add_option("--beta", f.beta, "gamma rate");
}

}  // namespace

int main(int argc, char** argv) {
  using obsolib::cli::Command;

  CLI::App app{"obsol: literature-aging models from cited-reference ages"};
  app.require_subcommand(1);
  Flags f;

  auto* describe =
      app.add_subcommand("describe", "descriptive statistics per dataset");
  add_input_flags(describe, f);
  add_render_flags(describe, f);

  auto* fit = app.add_subcommand(
      "fit", "maximum-likelihood Poisson and negative binomial fits");
  add_input_flags(fit, f);
  add_render_flags(fit, f);

  auto* compare =
      app.add_subcommand("compare", "AIC model comparison per dataset");
  add_input_flags(compare, f);
  add_render_flags(compare, f);

  auto* tails =
      app.add_subcommand("tails", "survival and mortality over an age grid");
  add_input_flags(tails, f);
  add_render_flags(tails, f);
  add_model_flags(tails, f);
  tails->add_option("--ages", f.ages, "age grid: A..B:STEP or a,b,c");

  auto* risk = app.add_subcommand("risk", "VaR and TVaR over a probability grid");
  add_input_flags(risk, f);
  add_render_flags(risk, f);
  add_model_flags(risk, f);
  risk->add_option("--probs", f.probs, "tail probabilities: p1,p2,...");

  auto* report = app.add_subcommand(
      "report", "full study: stats, fits, tails, risk, verification");
  add_input_flags(report, f);
  add_render_flags(report, f);
  report->add_option("--ages", f.ages, "age grid: A..B:STEP or a,b,c");
  report->add_option("--probs", f.probs, "tail probabilities: p1,p2,...");

  auto* simulate =
      app.add_subcommand("simulate", "draw synthetic cited-reference ages");
  add_model_flags(simulate, f);
  simulate->add_option("--seed", f.seed, "RNG seed (required)");
  simulate->add_option("-n,--n", f.cfg.n, "number of draws")
      ->check(CLI::PositiveNumber);
  simulate->add_option("-o,--out", f.cfg.out,
                       "write to this path instead of stdout");

  auto* verify =
      app.add_subcommand("verify", "cross-validate the computational routes");
  add_render_flags(verify, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : obsolib::cli::exit_usage;
  }

  CLI::App* sub = nullptr;
  if (describe->parsed()) (f.cfg.command = Command::describe, sub = describe);
  if (fit->parsed()) (f.cfg.command = Command::fit, sub = fit);
  if (compare->parsed()) (f.cfg.command = Command::compare, sub = compare);
  if (tails->parsed()) (f.cfg.command = Command::tails, sub = tails);
  if (risk->parsed()) (f.cfg.command = Command::risk, sub = risk);
  if (report->parsed()) (f.cfg.command = Command::report, sub = report);
  if (simulate->parsed()) (f.cfg.command = Command::simulate, sub = simulate);
  if (verify->parsed()) (f.cfg.command = Command::verify, sub = verify);

  f.cfg.format = f.format == "histogram" ? obsolib::InputFormat::histogram
                                         : obsolib::InputFormat::records;
  f.cfg.by = f.by == "journal" ? obsolib::GroupKind::journal
                               : obsolib::GroupKind::category;
  if (option_given(sub, "--alpha")) f.cfg.alpha = f.alpha;
  if (option_given(sub, "--beta")) f.cfg.beta = f.beta;
  if (option_given(sub, "--seed")) f.cfg.seed = f.seed;

  try {
    if (!f.ages.empty()) f.cfg.ages = obsolib::cli::parse_age_grid(f.ages);
    if (!f.probs.empty()) f.cfg.probs = obsolib::cli::parse_prob_grid(f.probs);
  } catch (const obsolib::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return obsolib::cli::exit_usage;
  }

  return obsolib::cli::run(f.cfg, std::cin, std::cout, std::cerr);
}
