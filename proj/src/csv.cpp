#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include "gapforge/error.hpp"
#include "gapforge/tabular.hpp"

namespace gapforge {

namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

using Record = std::vector<Field>;

bool is_space(char c) { return c == ' ' || c == '\t'; }

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// RFC 4180 style tokenizer. Accepts LF or CRLF line endings. A trailing newline
// does not start a new record.
std::vector<Record> tokenize(std::string_view text) {
  std::vector<Record> records;
  Record record;
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  bool after_quote = false;
  std::size_t line = 1;
  std::size_t record_start_line = 1;

  auto finish_field = [&] {
    record.push_back({quoted ? field : trim(field), quoted});
    field.clear();
    quoted = false;
    after_quote = false;
  };
  auto finish_record = [&] {
    finish_field();
    records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == ',') {
      finish_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      finish_record();
      ++line;
      record_start_line = line;
    } else if (c == '"') {
      if (!quoted && trim(field).empty()) {
        field.clear();
        quoted = true;
        in_quotes = true;
      } else {
        throw ParseError("line " + std::to_string(line) + ": unexpected quote character", line);
      }
    } else {
      if (after_quote && !is_space(c)) {
        throw ParseError("line " + std::to_string(line) + ": text after closing quote", line);
      }
      if (!after_quote) field.push_back(c);
    }
  }
  if (in_quotes) {
    throw ParseError("line " + std::to_string(record_start_line) + ": unterminated quoted field",
                     record_start_line);
  }
  if (!field.empty() || quoted || !record.empty()) finish_record();
  return records;
}

std::optional<double> parse_real(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

bool needs_quotes(std::string_view s) {
  if (s.empty()) return false;
  if (is_space(s.front()) || is_space(s.back())) return true;
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_field(std::ostream& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

std::set<std::string> default_missing_tokens() {
  return {"NaN", "", "null", "undefined", "NA", "na"};
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Table load_csv(std::string_view text, const CsvOptions& options) {
  if (options.missing_tokens.empty()) {
    throw DomainError("missing_tokens must not be empty");
  }
  // UTF-8 byte order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<Record> records = tokenize(text);
  if (records.empty()) throw ParseError("missing header row", 1);

  std::vector<std::string> names;
  for (auto& f : records.front()) names.push_back(f.text);
  {
    std::set<std::string> seen;
    for (const auto& n : names) {
      if (!seen.insert(n).second) throw SchemaError("duplicate header name '" + n + "'");
    }
  }
  for (const auto& [name, kind] : options.schema_hint) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw NameError("schema hint names unknown column '" + name + "'");
    }
  }

  const std::size_t n_cols = names.size();
  // Blank trailing lines are not rows of a multi-column table.
  while (n_cols > 1 && records.size() > 1 && records.back().size() == 1 &&
         !records.back().front().quoted && records.back().front().text.empty()) {
    records.pop_back();
  }
  const std::size_t n_rows = records.size() - 1;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != n_cols) {
      throw ParseError("row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                           " fields, header has " + std::to_string(n_cols),
                       r + 1);
    }
  }

  std::vector<Column> columns;
  columns.reserve(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    std::vector<std::uint8_t> missing(n_rows, 0);
    std::vector<double> numbers(n_rows, 0.0);
    bool all_numeric = true;
    std::size_t first_bad_row = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
      const std::string& cell = records[r + 1][c].text;
      if (options.missing_tokens.contains(cell)) {
        missing[r] = 1;
        continue;
      }
      if (all_numeric) {
        if (auto v = parse_real(cell)) {
          numbers[r] = *v;
        } else {
          all_numeric = false;
          first_bad_row = r;
        }
      }
    }

    ColumnKind kind = all_numeric ? ColumnKind::Numeric : ColumnKind::Categorical;
    if (auto it = options.schema_hint.find(names[c]); it != options.schema_hint.end()) {
      if (it->second == ColumnKind::Numeric && !all_numeric) {
        throw TypeMismatchError("column '" + names[c] + "', row " + std::to_string(first_bad_row) +
                                ": '" + records[first_bad_row + 1][c].text +
                                "' is not a real number");
      }
      kind = it->second;
    }

    if (kind == ColumnKind::Numeric) {
      columns.push_back(Column::numeric(names[c], std::move(numbers), std::move(missing)));
    } else {
      std::vector<std::optional<std::string>> labels(n_rows);
      for (std::size_t r = 0; r < n_rows; ++r) {
        if (!missing[r]) labels[r] = records[r + 1][c].text;
      }
      columns.push_back(Column::from_labels(names[c], labels));
    }
  }
  return Table(std::move(columns), n_rows);
}

Table load_csv(std::istream& in, const CsvOptions& options) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return load_csv(std::string_view(text), options);
}

Table load_csv_file(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return load_csv(in, options);
}

void write_csv(const Table& table, std::ostream& out, std::string_view missing_token) {
  const auto cols = table.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out << ',';
    write_field(out, cols[c].name());
  }
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out << ',';
      const Column& col = cols[c];
      if (col.is_missing(r)) {
        write_field(out, missing_token);
      } else if (col.is_numeric()) {
        out << format_number(col.value(r));
      } else {
        write_field(out, col.label(r));
      }
    }
    out << '\n';
  }
}

std::string write_csv(const Table& table, std::string_view missing_token) {
  std::ostringstream out;
  write_csv(table, out, missing_token);
  return out.str();
}

}  // namespace gapforge
