// Copyright 2026 The regperturb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "regperturb/regperturb.hpp"

namespace regperturb::cli {
namespace {

struct SchemaOptions {
  std::string response;
  std::vector<std::string> dummies;
  std::vector<std::string> ignored;

  void Register(CLI::App* cmd) {
    cmd->add_option("--response", response, "Response column name")->required();
    cmd->add_option("--dummy", dummies, "Column holding 0/1 values (repeatable)");
    cmd->add_option("--ignore", ignored, "Column excluded from the regression (repeatable)");
  }
};

std::optional<bool> ParsePositivity(const std::string& mode) {
  if (mode == "required") return true;
  if (mode == "off") return false;
  return std::nullopt;
}

void PrintKv(std::ostream& out, const std::string& key, const std::string& value) {
  out << key << '=' << value << '\n';
}

void PrintKv(std::ostream& out, const std::string& key, double value) {
  PrintKv(out, key, FormatDouble(value));
}

Dataset LoadWithSchema(const std::string& path, const SchemaOptions& schema,
                       CsvTable* table_out = nullptr) {
  CsvTable table = ReadCsvTable(path);
  Dataset data = DatasetFromTable(
      table, InferSchema(table.header, schema.response, schema.dummies, schema.ignored));
  if (table_out) *table_out = std::move(table);
  return data;
}

// ---- fit ------------------------------------------------------------------

struct FitCommand {
  SchemaOptions schema;
  std::string input;

  void Register(CLI::App* cmd) {
    schema.Register(cmd);
    cmd->add_option("input", input, "Input CSV")->required();
  }

  int Run(std::ostream& out) const {
    const Dataset data = LoadWithSchema(input, schema);
    const RegressionFit fit = FitOls(data);
    PrintKv(out, "rows", std::to_string(data.rows()));
    PrintKv(out, "parameters", std::to_string(data.parameters()));
    PrintKv(out, "r_squared", fit.r_squared);
    PrintKv(out, "rss", fit.rss);
    PrintKv(out, "tss", fit.tss);
    PrintKv(out, "mean", fit.y_bar);
    const auto& names = data.column_names();
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      PrintKv(out, "beta." + names[j], fit.beta_hat(i));
      PrintKv(out, "t." + names[j], fit.t_values(i));
    }
    return 0;
  }
};

// ---- perturb --------------------------------------------------------------

struct PerturbCommand {
  SchemaOptions schema;
  std::string input;
  std::string output;
  std::string sidecar;
  double a = -2.0;
  double b = 1.0;
  std::uint64_t seed = 0;
  CLI::Option* seed_option = nullptr;
  std::string positivity = "auto";
  int max_retries = 100;
  bool round_to_integer = false;
  bool disclose_seed = false;

  void Register(CLI::App* cmd) {
    schema.Register(cmd);
    cmd->add_option("--a", a, "Noise scale a (nonzero; -2 preserves the fit)");
    cmd->add_option("--b", b, "Perturbation strength b >= 0");
    seed_option = cmd->add_option("--seed", seed, "RNG seed (random if omitted)");
    cmd->add_option("--positivity", positivity, "Require y+eps > 0")
        ->check(CLI::IsMember({"auto", "required", "off"}));
    cmd->add_option("--max-retries", max_retries, "Redraws allowed for positivity");
    cmd->add_flag("--round", round_to_integer, "Round the released response to integers");
    cmd->add_flag("--disclose-seed", disclose_seed, "Write the seed into the sidecar");
    cmd->add_option("--sidecar", sidecar, "Metadata path (default: <output>.meta)");
    cmd->add_option("input", input, "Original CSV")->required();
    cmd->add_option("output", output, "Released CSV")->required();
  }

  int Run(std::ostream& out) const {
    CsvTable table;
    const Dataset data = LoadWithSchema(input, schema, &table);

    NoiseSpec spec;
    spec.a = a;
    spec.b = b;
    const bool seed_given = seed_option->count() > 0;
    spec.seed = seed_given ? seed : std::random_device{}();
    spec.positivity_required = ParsePositivity(positivity);
    spec.max_retries = max_retries;

    const RegressionFit fit = FitOls(data);
    const PerturbedRelease release = Perturb(data, fit, spec);

    Eigen::VectorXd published = release.y_perturbed;
    if (round_to_integer) published = published.array().round().matrix();
    const RegressionFit achieved = Refit(fit, data.WithResponse(published));

    ReleaseMetadata meta;
    meta.response = schema.response;
    meta.explanatory.assign(data.column_names().begin() + 1, data.column_names().end());
    meta.dummies = schema.dummies;
    meta.ignored = schema.ignored;
    meta.rows = data.rows();
    meta.a = release.spec.a;
    meta.b = release.spec.b;
    meta.positivity_required = *release.spec.positivity_required;
    meta.max_retries = release.spec.max_retries;
    meta.retries_used = release.retries_used;
    meta.seed_present = seed_given;
    if (disclose_seed) meta.seed = spec.seed;
    meta.rounded = round_to_integer;
    meta.original_r_squared = fit.r_squared;
    meta.achieved_r_squared = achieved.r_squared;
    meta.achieved_mean = achieved.y_bar;
    meta.correlation_with_original = PearsonCorrelation(data.response(), published);
    meta.min_value = published.minCoeff();
    meta.achieved_beta.assign(achieved.beta_hat.begin(), achieved.beta_hat.end());
    meta.achieved_t_values.assign(achieved.t_values.begin(), achieved.t_values.end());

    const std::string sidecar_path = sidecar.empty() ? output + ".meta" : sidecar;
    AtomicWriteFile(output, TableToCsv(ReplaceColumn(table, schema.response, published,
                                                     round_to_integer)));
    try {
      AtomicWriteFile(sidecar_path, meta.ToKeyValue().ToString());
    } catch (...) {
      std::error_code ignored;
      std::filesystem::remove(output, ignored);
      throw;
    }

    PrintKv(out, "output", output);
    PrintKv(out, "sidecar", sidecar_path);
    PrintKv(out, "rows", std::to_string(data.rows()));
    PrintKv(out, "retries_used", std::to_string(release.retries_used));
    PrintKv(out, "original_r_squared", fit.r_squared);
    PrintKv(out, "achieved_r_squared", achieved.r_squared);
    PrintKv(out, "correlation_with_original", meta.correlation_with_original);
    PrintKv(out, "min_value", meta.min_value);
    return 0;
  }
};

// ---- verify ---------------------------------------------------------------

struct VerifyCommand {
  std::string original;
  std::string release;
  std::string sidecar;
  double tolerance = 1e-9;

  void Register(CLI::App* cmd) {
    cmd->add_option("--original", original, "Original CSV")->required();
    cmd->add_option("--release", release, "Released CSV")->required();
    cmd->add_option("--sidecar", sidecar, "Release metadata (default: <release>.meta)");
    cmd->add_option("--tol", tolerance, "Relative tolerance");
  }

  int Run(std::ostream& out) const {
    const std::string sidecar_path = sidecar.empty() ? release + ".meta" : sidecar;
    std::ifstream in(sidecar_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open " + sidecar_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const ReleaseMetadata meta =
        ReleaseMetadata::FromKeyValue(KeyValueText::Parse(buffer.str()));

    SchemaOptions schema{meta.response, meta.dummies, meta.ignored};
    const Dataset base = LoadWithSchema(original, schema);
    const Dataset published = LoadWithSchema(release, schema);
    if (base.rows() != meta.rows || published.rows() != meta.rows) {
      throw Error(ErrorCode::kVerificationFailed, "row counts disagree with the sidecar");
    }
    const std::vector<std::string> explanatory(base.column_names().begin() + 1,
                                               base.column_names().end());
    if (explanatory != meta.explanatory) {
      throw Error(ErrorCode::kVerificationFailed,
                  "explanatory columns disagree with the sidecar");
    }
    if (base.design() != published.design()) {
      throw Error(ErrorCode::kVerificationFailed,
                  "explanatory values of the release differ from the original");
    }
    const VerificationReport report =
        VerifyRelease(base, published.response(), meta.a, meta.b, tolerance);
    out << report.ToKeyValue();
    if (!report.passed) {
      throw Error(ErrorCode::kVerificationFailed,
                  "release deviates from the predicted statistics (max rel dev " +
                      FormatDouble(report.max_rel_deviation()) + ")");
    }
    return 0;
  }
};

// ---- chow -----------------------------------------------------------------

struct ChowCommand {
  SchemaOptions schema;
  std::string first;
  std::string second;
  double alpha = 0.05;

  void Register(CLI::App* cmd) {
    schema.Register(cmd);
    cmd->add_option("--alpha", alpha, "Significance level");
    cmd->add_option("first", first, "First CSV")->required();
    cmd->add_option("second", second, "Second CSV (same columns)")->required();
  }

  int Run(std::ostream& out) const {
    const Dataset one = LoadWithSchema(first, schema);
    const Dataset two = LoadWithSchema(second, schema);
    if (one.column_names() != two.column_names()) {
      throw Error(ErrorCode::kSchemaMismatch, "the two files have different columns");
    }
    const ChowResult r =
        ChowTest(one.design(), one.response(), two.design(), two.response(), alpha);
    PrintKv(out, "f_value", r.f_value);
    PrintKv(out, "df1", std::to_string(r.df1));
    PrintKv(out, "df2", std::to_string(r.df2));
    PrintKv(out, "alpha", alpha);
    PrintKv(out, "critical_value", r.critical_value);
    PrintKv(out, "accepted", r.accepted ? "true" : "false");
    PrintKv(out, "rss_first", r.rss_first);
    PrintKv(out, "rss_second", r.rss_second);
    PrintKv(out, "rss_pooled", r.rss_pooled);
    return 0;
  }
};

// ---- calibrate ------------------------------------------------------------

struct CalibrateCommand {
  SchemaOptions schema;
  std::string input;
  std::vector<std::string> q_specs;
  std::vector<std::string> b_specs;
  int trials = 1000;
  double alpha = 0.05;
  double a = -2.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string scope = "full";
  bool share_subsamples = false;
  std::string positivity = "auto";
  int max_retries = 100;
  std::string table_path;
  std::string percentile_path;
  std::string summary_path;

  void Register(CLI::App* cmd) {
    schema.Register(cmd);
    cmd->add_option("--q", q_specs, "Subsample fractions: list or lo:hi[:step]");
    cmd->add_option("--b", b_specs, "b grid: list or lo:hi[:step]");
    cmd->add_option("--trials", trials, "Subsamples per (b, q) cell");
    cmd->add_option("--alpha", alpha, "Chow test significance level");
    cmd->add_option("--a", a, "Noise scale a");
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--workers", workers, "Worker threads");
    cmd->add_option("--scope", scope, "Perturb the full data or each subsample")
        ->check(CLI::IsMember({"full", "subsample"}));
    cmd->add_flag("--share-subsamples", share_subsamples,
                  "Use the same subsamples for every b");
    cmd->add_option("--positivity", positivity, "Require y+eps > 0")
        ->check(CLI::IsMember({"auto", "required", "off"}));
    cmd->add_option("--max-retries", max_retries, "Redraws allowed for positivity");
    cmd->add_option("--out", table_path, "Write the acceptance table here");
    cmd->add_option("--percentiles", percentile_path, "Write the F percentile table here");
    cmd->add_option("--summary", summary_path, "Write b* and the recommendation here");
    cmd->add_option("input", input, "Input CSV")->required();
  }

  static std::vector<double> Collect(const std::vector<std::string>& specs) {
    std::vector<double> out;
    for (const auto& s : specs) {
      const auto part = ParseGrid(s);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }

  int Run(std::ostream& out) const {
    const Dataset data = LoadWithSchema(input, schema);
    CalibrationPlan plan;
    if (!q_specs.empty()) plan.q_grid = Collect(q_specs);
    if (!b_specs.empty()) plan.b_grid = Collect(b_specs);
    plan.trials = trials;
    plan.alpha = alpha;
    plan.a = a;
    plan.master_seed = seed;
    plan.workers = workers;
    plan.scope = scope == "subsample" ? PerturbationScope::kSubsample
                                      : PerturbationScope::kFullData;
    plan.share_subsamples_across_b = share_subsamples;
    plan.positivity_required = ParsePositivity(positivity);
    plan.max_retries = max_retries;

    const CalibrationReport report = RunCalibration(data, plan);
    const std::string table = AcceptanceTableCsv(report);
    const std::string summary = CalibrationSummary(report);
    if (!table_path.empty()) AtomicWriteFile(table_path, table);
    if (!percentile_path.empty()) AtomicWriteFile(percentile_path, PercentileTableCsv(report));
    if (!summary_path.empty()) AtomicWriteFile(summary_path, summary);
    out << table << '\n' << summary;
    return 0;
  }
};

// ---- synth ----------------------------------------------------------------

struct SynthCommand {
  Eigen::Index n = 1320;
  double r_squared = 0.78;
  double error_scale = 0.0;
  CLI::Option* error_scale_option = nullptr;
  std::uint64_t seed = 0;
  std::string output;

  void Register(CLI::App* cmd) {
    cmd->add_option("--n", n, "Rows");
    cmd->add_option("--r2", r_squared, "Target R^2 of the generated regression");
    error_scale_option =
        cmd->add_option("--error-scale", error_scale,
                        "Error sd relative to the signal sd (overrides --r2)");
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("output", output, "Output CSV")->required();
  }

  int Run(std::ostream& out) const {
    SynthSpec spec = HousingSynthSpec(n, r_squared, seed);
    if (error_scale_option->count() > 0) {
      spec.target_r_squared.reset();
      spec.error_scale = error_scale;
    }
    const Dataset data = GenerateSynthetic(spec);
    AtomicWriteFile(output, TableToCsv(DatasetToTable(data)));
    const RegressionFit fit = FitOls(data);
    PrintKv(out, "output", output);
    PrintKv(out, "rows", std::to_string(data.rows()));
    PrintKv(out, "response", data.response_name());
    PrintKv(out, "r_squared", fit.r_squared);
    PrintKv(out, "min_response", data.response().minCoeff());
    return 0;
  }
};

// ---- theory-table ---------------------------------------------------------

struct TheoryTableCommand {
  double a = -2.0;
  int digits = 2;

  void Register(CLI::App* cmd) {
    cmd->add_option("--a", a, "Noise scale a");
    cmd->add_option("--digits", digits, "Decimals per cell")->check(CLI::Range(0, 17));
  }

  int Run(std::ostream& out) const {
    out << MakeCorrelationTable(a).ToCsv(digits);
    return 0;
  }
};

void ReportError(std::ostream& err, std::string_view code, int status,
                 const std::string& message) {
  err << "error code=" << code << " exit=" << status << ": " << message << '\n';
}

}  // namespace

std::vector<double> ParseGrid(const std::string& text) {
  auto parse = [&text](std::string_view piece) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (piece.empty() || ec != std::errc() || ptr != piece.data() + piece.size() ||
        !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidParameters, "bad grid specification '" + text + "'");
    }
    return v;
  };
  std::vector<double> values;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
      const auto colon = text.find(':', start);
      parts.push_back(parse(std::string_view(text).substr(start, colon - start)));
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    if (parts.size() < 2 || parts.size() > 3) {
      throw Error(ErrorCode::kInvalidParameters, "range must be lo:hi or lo:hi:step");
    }
    const double lo = parts[0];
    const double hi = parts[1];
    const double step = parts.size() == 3 ? parts[2] : 0.1;
    if (!(step > 0.0) || hi < lo) {
      throw Error(ErrorCode::kInvalidParameters, "range needs lo <= hi and step > 0");
    }
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      // Snap to 1e-10 so 0.5 + 3 * 0.1 prints as 0.8.
      values.push_back(std::round((lo + static_cast<double>(i) * step) * 1e10) / 1e10);
    }
    return values;
  }
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    values.push_back(parse(std::string_view(text).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

int CliMain(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regression-preserving response perturbation for data release",
               "regperturb"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Read options from an INI/TOML file");
  app.require_subcommand(1);

  FitCommand fit;
  PerturbCommand perturb;
  VerifyCommand verify;
  ChowCommand chow;
  CalibrateCommand calibrate;
  SynthCommand synth;
  TheoryTableCommand theory;
  fit.Register(app.add_subcommand("fit", "Fit OLS and print coefficients, t-values, R^2"));
  perturb.Register(app.add_subcommand("perturb", "Write a perturbed release plus metadata"));
  verify.Register(app.add_subcommand("verify", "Check a release against the closed forms"));
  chow.Register(app.add_subcommand("chow", "Chow test between two CSV files"));
  calibrate.Register(
      app.add_subcommand("calibrate", "Monte-Carlo Chow-test sweep over (b, q)"));
  synth.Register(app.add_subcommand("synth", "Generate a synthetic housing dataset"));
  theory.Register(app.add_subcommand("theory-table", "Predicted corr(y, y+eps) grid"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "regperturb 1.0.0\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    ReportError(err, "Usage", 2, e.what());
    return 2;
  }

  err << "# resolved configuration\n";
  for (const CLI::App* sub : app.get_subcommands()) {
    std::istringstream config(sub->config_to_str(true, false));
    for (std::string line; std::getline(config, line);) {
      err << "# " << sub->get_name() << '.' << line << '\n';
    }
  }

  try {
    if (app.got_subcommand("fit")) return fit.Run(out);
    if (app.got_subcommand("perturb")) return perturb.Run(out);
    if (app.got_subcommand("verify")) return verify.Run(out);
    if (app.got_subcommand("chow")) return chow.Run(out);
    if (app.got_subcommand("calibrate")) return calibrate.Run(out);
    if (app.got_subcommand("synth")) return synth.Run(out);
    if (app.got_subcommand("theory-table")) return theory.Run(out);
  } catch (const Error& e) {
    ReportError(err, ErrorCodeName(e.code()), ExitStatusFor(e.code()), e.what());
    return ExitStatusFor(e.code());
  } catch (const std::exception& e) {
    ReportError(err, "Internal", 1, e.what());
    return 1;
  }
  return 2;
}

int CliMain(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("regperturb");
  for (const auto& a : args) argv.push_back(a.c_str());
  return CliMain(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace regperturb::cli
