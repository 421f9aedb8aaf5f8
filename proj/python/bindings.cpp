#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "gapforge/benchmark.hpp"
#include "gapforge/error.hpp"
#include "gapforge/imputers.hpp"
#include "gapforge/learners.hpp"
#include "gapforge/metrics.hpp"
#include "gapforge/missingness.hpp"
#include "gapforge/spec_io.hpp"
#include "gapforge/synthetic.hpp"
#include "gapforge/tabular.hpp"

namespace py = pybind11;
using namespace gapforge;

namespace {


py::list column_cells(const Column& c) {
  py::list out;
  for (std::size_t r = 0; r < c.size(); ++r) {
    if (c.is_missing(r)) {
      out.append(py::none());
    } else if (c.is_numeric()) {
      out.append(c.value(r));
    } else {
      out.append(c.label(r));
    }
  }
  return out;
}

// Columns whose non-missing entries are all numbers become numeric.
Table table_from_dict(const py::dict& columns) {
  std::vector<Column> cols;
  std::size_t rows = 0;
  for (auto [key, value] : columns) {
    const std::string name = py::cast<std::string>(key);
    const auto cells = py::cast<std::vector<std::optional<std::variant<double, std::string>>>>(value);
    rows = cells.size();
    bool numeric = true;
    for (const auto& cell : cells) {
      if (cell && std::holds_alternative<std::string>(*cell)) numeric = false;
    }
    if (numeric) {
      std::vector<double> values(cells.size(), 0.0);
      std::vector<std::uint8_t> mask(cells.size(), 0);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i]) {
          values[i] = std::get<double>(*cells[i]);
        } else {
          mask[i] = 1;
        }
      }
      cols.push_back(Column::numeric(name, std::move(values), std::move(mask)));
    } else {
      std::vector<std::optional<std::string>> labels(cells.size());
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i]) continue;
        if (const auto* s = std::get_if<std::string>(&*cells[i])) {
          labels[i] = *s;
        } else {
          labels[i] = format_number(std::get<double>(*cells[i]));
        }
      }
      cols.push_back(Column::from_labels(name, labels));
    }
  }
  return Table(std::move(cols), rows);
}

CsvOptions csv_options(const std::optional<std::vector<std::string>>& tokens) {
  CsvOptions o;
  if (tokens) o.missing_tokens = {tokens->begin(), tokens->end()};
  return o;
}

// A learner together with the encoding it was trained under.
struct TrainedModel {
  FittedLearner learner;
  FeatureSchema schema;
  std::vector<std::string> classes;
  std::string target;

  py::list predict(const Table& table) const {
    const Matrix x = encode_features(table, schema);
    const auto raw = learner.predict(x);
    py::list out;
    for (double v : raw) {
      if (classes.empty()) {
        out.append(v);
      } else {
        out.append(classes[static_cast<std::size_t>(v)]);
      }
    }
    return out;
  }
};

std::string render_report(const BenchmarkReport& report, const std::string& format, bool timing) {
  if (format == "json") return report_to_json(report, JsonOptions{timing, 2});
  if (format == "csv") return report_to_csv(report);
  if (format == "md") return report_to_markdown(report);
  if (format == "plot") return report_to_plot_csv(report);
  throw py::value_error("format must be one of json, csv, md, plot");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Missing-value injection, imputation and benchmarking over tabular data";

  auto base = py::register_exception<Error>(m, "GapforgeError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SpecError>(m, "SpecError", base.ptr());
  py::register_exception<PlanError>(m, "PlanError", base.ptr());
  py::register_exception<FitError>(m, "FitError", base.ptr());

  py::class_<Table>(m, "Table")
      .def(py::init(&table_from_dict), py::arg("columns"),
           "Build from {name: [value or None, ...]}; columns with any string become categorical.")
      .def_property_readonly("n_rows", &Table::n_rows)
      .def_property_readonly("n_cols", &Table::n_cols)
      .def_property_readonly("column_names", &Table::column_names)
      .def_property_readonly("missing_cells", &Table::missing_cells)
      .def("column", [](const Table& t, const std::string& name) { return column_cells(t.column(name)); })
      .def("kind", [](const Table& t, const std::string& name) {
        return std::string(to_string(t.column(name).kind()));
      })
      .def("to_dict",
           [](const Table& t) {
             py::dict d;
             for (const auto& c : t.columns()) d[py::str(c.name())] = column_cells(c);
             return d;
           })
      .def("to_csv", [](const Table& t, const std::string& token) { return write_csv(t, token); },
           py::arg("missing_token") = "NaN")
      .def("__eq__", [](const Table& a, const Table& b) { return a == b; })
      .def("__len__", &Table::n_rows)
      .def("__repr__", [](const Table& t) {
        return "<Table " + std::to_string(t.n_rows()) + " rows x " + std::to_string(t.n_cols()) + " columns>";
      });

  m.def("read_csv",
        [](const std::string& text, std::optional<std::vector<std::string>> tokens) {
          return load_csv(std::string_view(text), csv_options(tokens));
        },
        py::arg("text"), py::arg("missing_tokens") = py::none(), "Parse CSV text.");
  m.def("load_csv",
        [](const std::string& path, std::optional<std::vector<std::string>> tokens) {
          return load_csv_file(path, csv_options(tokens));
        },
        py::arg("path"), py::arg("missing_tokens") = py::none());
  m.def("write_csv",
        [](const Table& t, const std::string& path, const std::string& token) {
          std::ofstream out(path, std::ios::binary);
          if (!out) throw py::value_error("cannot open '" + path + "' for writing");
          write_csv(t, out, token);
        },
        py::arg("table"), py::arg("path"), py::arg("missing_token") = "NaN");

  m.def("profile",
        [](const Table& t) {
          py::list out;
          for (const auto& c : profile(t).columns) {
            out.append(py::make_tuple(c.name, c.missing_count, c.missing_fraction));
          }
          return out;
        },
        "(name, missing count, missing fraction) per column, most missing first.");

  m.def("inject",
        [](const Table& t, const std::string& spec, std::optional<std::uint64_t> seed) {
          MissingnessSpec s = parse_missingness_spec(spec);
          if (seed) s.seed = *seed;
          auto result = inject(t, s);
          py::dict held;
          for (const auto& name : result.held_out.columns()) {
            py::dict cells;
            for (const auto& cell : result.held_out.cells(name)) cells[py::int_(cell.row)] = cell.value;
            held[py::str(name)] = cells;
          }
          return py::make_tuple(std::move(result.table), held);
        },
        py::arg("table"), py::arg("spec"), py::arg("seed") = py::none(),
        "Apply a JSON missingness spec. Returns (masked table, {column: {row: original value}}).");
  m.def("mask_value_dependence", &mask_value_dependence, py::arg("original"), py::arg("injected"),
        py::arg("column"));

  m.def("impute",
        [](const Table& t, const std::string& spec, std::optional<Table> fit_on) {
          const ImputerSpec s = parse_imputer_spec(spec);
          return transform(fit(s, fit_on ? *fit_on : t), t);
        },
        py::arg("table"), py::arg("spec"), py::arg("fit_on") = py::none(),
        "Fill gaps with a JSON imputer spec, fitting on `fit_on` when given.");

  py::class_<TrainedModel>(m, "Model")
      .def("predict", &TrainedModel::predict, py::arg("table"))
      .def_property_readonly("target", [](const TrainedModel& tm) { return tm.target; })
      .def_property_readonly("classes", [](const TrainedModel& tm) { return tm.classes; })
      .def_property_readonly("feature_names", [](const TrainedModel& tm) { return tm.schema.feature_names(); })
      .def_property_readonly("name", [](const TrainedModel& tm) { return display_name(tm.learner.spec()); });
  m.def("fit",
        [](const std::string& spec, const Table& t, const std::string& target) {
          const DesignMatrix d = encode(t, target);
          return TrainedModel{gapforge::fit(parse_learner_spec(spec), d), d.schema, d.classes, target};
        },
        py::arg("spec"), py::arg("table"), py::arg("target"),
        "Train a JSON learner spec on every other column of a complete table.");

  m.def("mse", [](const std::vector<double>& p, const std::vector<double>& a) { return mse(p, a); });
  m.def("rmse", [](const std::vector<double>& p, const std::vector<double>& a) { return rmse(p, a); });
  m.def("rmsle", [](const std::vector<double>& p, const std::vector<double>& a) { return rmsle(p, a); });
  m.def("classification_report",
        [](const std::vector<std::int64_t>& truth, const std::vector<std::int64_t>& predicted, bool as_text) {
          const auto rep = classification_report(confusion_matrix(std::span<const std::int64_t>(truth),
                                                                  std::span<const std::int64_t>(predicted)));
          return as_text ? render_text(rep) : render_json(rep);
        },
        py::arg("truth"), py::arg("predicted"), py::arg("text") = false,
        "Per-class precision/recall/f1 with macro and weighted averages, as JSON or text.");

  m.def("synthesize", [](const std::string& spec) { return synthesize(parse_synthetic_spec(spec)); },
        py::arg("spec"), "Seeded synthetic table from a JSON spec.");
  m.def("run_benchmark",
        [](const std::string& plan, const Table& t, const std::string& format, bool timing) {
          BenchmarkReport report;
          {
            py::gil_scoped_release release;
            report = run(parse_benchmark_plan(plan), t);
          }
          return render_report(report, format, timing);
        },
        py::arg("plan"), py::arg("table"), py::arg("format") = "json", py::arg("timing") = false,
        "Run a JSON benchmark plan and render the report as json, csv, md or plot.");
}
