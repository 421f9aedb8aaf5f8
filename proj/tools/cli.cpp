#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "gapforge/benchmark.hpp"
#include "gapforge/error.hpp"
#include "gapforge/imputers.hpp"
#include "gapforge/missingness.hpp"
#include "gapforge/spec_io.hpp"
#include "gapforge/synthetic.hpp"
#include "gapforge/tabular.hpp"

namespace gapforge::cli {

namespace {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string output;
  std::uint64_t seed = 0;
  std::vector<CLI::Option*> seed_options;
  std::vector<std::string> missing_tokens;
  std::vector<std::string> formats;

  std::optional<std::uint64_t> seed_flag() const {
    for (const auto* o : seed_options) {
      if (o->count() > 0) return seed;
    }
    return std::nullopt;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write '" + path + "'");
  file << text;
  if (!file.flush()) throw InputError("failed writing '" + path + "'");
}

// GAPFORGE_SEED is the fallback when neither the flag nor the spec has a seed.
std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("GAPFORGE_SEED");
  if (!raw || !*raw) return std::nullopt;
  const std::string_view text(raw);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw InputError("GAPFORGE_SEED must be an unsigned 64-bit integer, got '" + std::string(text) + "'");
  }
  return v;
}

CsvOptions csv_options(const Common& c) {
  CsvOptions o;
  if (!c.missing_tokens.empty()) o.missing_tokens = {c.missing_tokens.begin(), c.missing_tokens.end()};
  return o;
}

Table read_table(const std::string& path, const Common& c) {
  return load_csv(read_file(path), csv_options(c));
}

std::string single_format(const Common& c, std::initializer_list<std::string_view> allowed,
                          std::string fallback) {
  if (c.formats.size() > 1) throw InputError("this subcommand writes a single format");
  const std::string f = c.formats.empty() ? std::move(fallback) : c.formats.front();
  if (std::find(allowed.begin(), allowed.end(), f) == allowed.end()) {
    throw InputError("format '" + f + "' is not available for this subcommand");
  }
  return f;
}

std::string percent_text(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
  return buf;
}

int cmd_profile(const std::string& input, const Common& c, std::ostream& out) {
  const std::string format = single_format(c, {"text", "json", "csv"}, "text");
  const Table table = read_table(input, c);
  MissingnessProfile p = profile(table);
  std::stable_sort(p.columns.begin(), p.columns.end(),
                   [](const auto& a, const auto& b) { return a.missing_count > b.missing_count; });

  std::ostringstream text;
  if (format == "json") {
    nlohmann::ordered_json j;
    j["rows"] = p.n_rows;
    j["columns"] = table.n_cols();
    j["missing_cells"] = p.total_missing_cells;
    auto& cols = j["profile"] = nlohmann::ordered_json::array();
    for (const auto& col : p.columns) {
      cols.push_back({{"column", col.name},
                      {"missing", col.missing_count},
                      {"fraction", col.missing_fraction}});
    }
    text << j.dump(2) << '\n';
  } else if (format == "csv") {
    std::vector<Column> cols;
    std::vector<std::optional<std::string>> names;
    std::vector<double> counts;
    std::vector<double> fractions;
    for (const auto& col : p.columns) {
      names.emplace_back(col.name);
      counts.push_back(static_cast<double>(col.missing_count));
      fractions.push_back(col.missing_fraction);
    }
    cols.push_back(Column::from_labels("column", names));
    cols.push_back(Column::numeric("missing", counts));
    cols.push_back(Column::numeric("fraction", fractions));
    text << write_csv(Table(std::move(cols), p.columns.size()));
  } else {
    std::size_t width = 0;
    for (const auto& col : p.columns) width = std::max(width, col.name.size());
    for (const auto& col : p.columns) {
      text << col.name << std::string(width - col.name.size() + 2, ' ') << col.missing_count
           << " missing (" << percent_text(col.missing_fraction) << ")\n";
    }
    text << p.total_missing_cells << " missing cells in " << p.n_rows << " rows x "
         << table.n_cols() << " columns\n";
  }
  write_output(text.str(), c.output, out);
  return kOk;
}

int cmd_inject(const std::string& input, const std::string& spec_path, const Common& c,
               std::ostream& out, std::ostream& err) {
  single_format(c, {"csv"}, "csv");
  const std::string spec_text = read_file(spec_path);
  const Table table = read_table(input, c);
  MissingnessSpec spec = parse_missingness_spec(spec_text, env_seed());
  if (auto s = c.seed_flag()) spec.seed = *s;

  std::size_t eligible = 0;
  for (const auto& name : target_columns(spec)) {
    if (table.has_column(name)) eligible += table.column(name).observed_count();
  }
  const InjectionResult result = inject(table, spec);
  write_output(write_csv(result.table), c.output, out);

  const double achieved =
      eligible == 0 ? 0.0 : static_cast<double>(result.held_out.total()) / static_cast<double>(eligible);
  std::ostream& note = c.output.empty() ? err : out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", achieved);
  note << "masked " << result.held_out.total() << " of " << eligible
       << " observed target cells (achieved fraction " << buf << ")\n";
  return kOk;
}

int cmd_impute(const std::string& input, const std::string& spec_path, const std::string& fit_on,
               const Common& c, std::ostream& out) {
  single_format(c, {"csv"}, "csv");
  const std::string spec_text = read_file(spec_path);
  const Table table = read_table(input, c);
  const std::optional<Table> train =
      fit_on.empty() ? std::nullopt : std::optional<Table>(read_table(fit_on, c));
  const ImputerSpec spec = parse_imputer_spec(spec_text);
  const FittedImputer fitted = fit(spec, train ? *train : table);
  write_output(write_csv(transform(fitted, table)), c.output, out);
  return kOk;
}

std::string render(const BenchmarkReport& report, const std::string& format, bool timing) {
  if (format == "csv") return report_to_csv(report);
  if (format == "md") return report_to_markdown(report);
  if (format == "plot") return report_to_plot_csv(report);
  JsonOptions o;
  o.include_timing = timing;
  return report_to_json(report, o);
}

std::string format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "csv") return "csv";
  if (ext == "md") return "md";
  return "json";
}

std::string with_extension(const std::string& path, const std::string& format) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.rfind('.');
  const std::string stem =
      dot == std::string::npos || (slash != std::string::npos && dot < slash) ? path : path.substr(0, dot);
  if (format == "plot") return stem + ".plot.csv";
  return stem + "." + format;
}

int cmd_bench(const std::vector<std::string>& positional, const std::string& synth_path,
              bool timing, const Common& c, std::ostream& out, std::ostream& err) {
  const bool synthetic = !synth_path.empty();
  if (positional.size() != (synthetic ? 1u : 2u)) {
    throw InputError(synthetic ? "bench --synth expects exactly one plan file"
                               : "bench expects an input CSV and a plan file");
  }
  const std::string& plan_path = positional.back();
  const std::string plan_text = read_file(plan_path);
  const std::string data_text = read_file(synthetic ? synth_path : positional.front());

  BenchmarkPlan plan = parse_benchmark_plan(plan_text, env_seed());
  if (auto s = c.seed_flag()) plan.base_seed = *s;
  const Table table = synthetic ? synthesize(parse_synthetic_spec(data_text, env_seed()))
                                : load_csv(data_text, csv_options(c));

  std::vector<std::string> formats = c.formats;
  if (formats.empty()) formats.push_back(c.output.empty() ? "json" : format_from_path(c.output));

  const BenchmarkReport report = run(plan, table);
  if (formats.size() == 1) {
    write_output(render(report, formats.front(), timing), c.output, out);
  } else {
    for (const auto& f : formats) {
      write_output(render(report, f, timing), c.output.empty() ? "" : with_extension(c.output, f), out);
    }
  }

  const std::size_t failed = report.failed_cells();
  if (failed > 0) {
    err << failed << " of " << report.cells.size() << " cells failed\n";
  }
  return failed == report.cells.size() ? kAllCellsFailed : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Missing-data toolkit: profile, inject, impute and benchmark tabular data", "gapforge"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "gapforge 0.1.0");

  Common common;
  const auto add_common = [&](CLI::App* sub, std::vector<std::string> formats) {
    sub->add_option("-o,--output", common.output, "Output path (default: stdout)");
    common.seed_options.push_back(sub->add_option("--seed", common.seed, "Seed override (u64)"));
    sub->add_option("--missing-token", common.missing_tokens,
                    "Cell text read as missing; repeatable, replaces the defaults")
        ->allow_extra_args(false);
    sub->add_option("--format", common.formats, "Output format")
        ->check(CLI::IsMember(std::move(formats)))
        ->allow_extra_args(false);
  };

  std::string input;
  std::string spec_path;
  std::string fit_on;
  std::string synth_path;
  bool timing = false;
  std::vector<std::string> bench_files;

  auto* profile_cmd = app.add_subcommand("profile", "Per-column missing counts, most missing first");
  profile_cmd->add_option("input", input, "CSV file")->required();
  add_common(profile_cmd, {"text", "json", "csv"});

  auto* inject_cmd = app.add_subcommand("inject", "Mask cells according to a missingness spec");
  inject_cmd->add_option("input", input, "CSV file")->required();
  inject_cmd->add_option("spec", spec_path, "Missingness spec (JSON)")->required();
  add_common(inject_cmd, {"csv"});

  auto* impute_cmd = app.add_subcommand("impute", "Fill missing cells with an imputer spec");
  impute_cmd->add_option("input", input, "CSV file")->required();
  impute_cmd->add_option("spec", spec_path, "Imputer spec (JSON)")->required();
  impute_cmd->add_option("--fit-on", fit_on, "Fit the imputer on this CSV instead of the input");
  add_common(impute_cmd, {"csv"});

  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark plan over a CSV or synthetic data");
  bench_cmd->add_option("files", bench_files, "[input.csv] plan.json")->required();
  bench_cmd->add_option("--synth", synth_path, "Synthetic dataset spec (JSON) instead of a CSV");
  bench_cmd->add_flag("--timing", timing, "Include per-cell wall time in JSON reports");
  add_common(bench_cmd, {"json", "csv", "md", "plot"});

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (profile_cmd->parsed()) return cmd_profile(input, common, out);
    if (inject_cmd->parsed()) return cmd_inject(input, spec_path, common, out, err);
    if (impute_cmd->parsed()) return cmd_impute(input, spec_path, fit_on, common, out);
    return cmd_bench(bench_files, synth_path, timing, common, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kInputError;
}

}  // namespace gapforge::cli
