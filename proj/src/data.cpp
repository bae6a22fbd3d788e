#include "ift/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ift/error.hpp"

namespace ift {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    field = trim(field);
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') field = field.substr(1, field.size() - 2);
    fields.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw DataError(path.string() + ": empty file");
  return table;
}

void check_unique(const std::vector<std::string>& names, const char* what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw DataError(std::string("empty ") + what + " name");
    if (!seen.insert(n).second) throw DataError(std::string("duplicate ") + what + " name \"" + n + "\"");
  }
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

ResponseMatrix::ResponseMatrix(std::vector<std::string> item_names, std::size_t persons,
                               std::vector<std::uint8_t> values)
    : item_names_(std::move(item_names)), persons_(persons), values_(std::move(values)) {
  if (item_names_.size() < 2) throw DataError("response matrix needs at least 2 items");
  if (persons_ < 2) throw DataError("response matrix needs at least 2 persons");
  check_unique(item_names_, "item");
  if (values_.size() != persons_ * item_names_.size()) throw DataError("response matrix size mismatch");
  for (std::size_t p = 0; p < persons_; ++p) {
    for (std::size_t i = 0; i < items(); ++i) {
      if (at(p, i) > 1) {
        throw DataError("response is not 0/1", static_cast<long>(p + 1), item_names_[i]);
      }
    }
  }
}

std::vector<std::uint8_t> ResponseMatrix::column(std::size_t item) const {
  std::vector<std::uint8_t> out(persons_);
  for (std::size_t p = 0; p < persons_; ++p) out[p] = at(p, item);
  return out;
}

std::string_view to_string(Scale scale) {
  switch (scale) {
    case Scale::Binary: return "binary";
    case Scale::Ordinal: return "ordinal";
    case Scale::Continuous: return "continuous";
  }
  return "continuous";
}

Scale parse_scale(std::string_view text) {
  if (text == "binary") return Scale::Binary;
  if (text == "ordinal") return Scale::Ordinal;
  if (text == "continuous" || text == "metric") return Scale::Continuous;
  if (text == "nominal" || text == "categorical") {
    throw DataError("nominal variables with more than two categories are not supported; "
                    "dummy-code them into binary columns");
  }
  throw DataError("unknown scale \"" + std::string(text) + "\"");
}

CovariateTable::CovariateTable(std::vector<VariableSpec> variables, std::vector<std::vector<double>> columns)
    : variables_(std::move(variables)), columns_(std::move(columns)) {
  if (variables_.empty()) throw DataError("covariate table needs at least one variable");
  if (columns_.size() != variables_.size()) throw DataError("covariate column count does not match schema");
  std::vector<std::string> names;
  for (const auto& v : variables_) names.push_back(v.name);
  check_unique(names, "variable");
  persons_ = columns_.front().size();
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].size() != persons_) throw DataError("covariate columns differ in length");
    const auto& spec = variables_[j];
    for (std::size_t p = 0; p < persons_; ++p) {
      double v = columns_[j][p];
      if (!std::isfinite(v)) throw DataError("non-finite covariate value", static_cast<long>(p + 1), spec.name);
      if (spec.scale == Scale::Binary && v != 0.0 && v != 1.0) {
        throw DataError("binary covariate value outside {0,1}", static_cast<long>(p + 1), spec.name);
      }
      if (spec.scale == Scale::Ordinal && v != std::floor(v)) {
        throw DataError("ordinal covariate value is not an integer", static_cast<long>(p + 1), spec.name);
      }
    }
  }
}

std::vector<double> CovariateTable::row(std::size_t person) const {
  std::vector<double> out(variables());
  for (std::size_t j = 0; j < variables(); ++j) out[j] = columns_[j][person];
  return out;
}

std::size_t CovariateTable::index_of(std::string_view name) const {
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    if (variables_[j].name == name) return j;
  }
  throw DataError("unknown variable \"" + std::string(name) + "\"");
}

ScoreVector compute_test_scores(const ResponseMatrix& responses) {
  ScoreVector scores(responses.persons(), 0.0);
  for (std::size_t p = 0; p < responses.persons(); ++p) {
    int sum = 0;
    for (auto v : responses.row(p)) sum += v;
    scores[p] = sum;
  }
  return scores;
}

ScoreVector item_score(const ResponseMatrix& responses, const ScoreVector& total, std::size_t item,
                       const ScoreOptions& options) {
  ScoreVector s = total;
  if (options.rest_score) {
    for (std::size_t p = 0; p < s.size(); ++p) s[p] -= responses.at(p, item);
  }
  if (options.standardize) {
    const double k = static_cast<double>(responses.items());
    for (auto& v : s) v /= k;
  }
  return s;
}

Dataset::Dataset(ResponseMatrix r, CovariateTable c) : responses(std::move(r)), covariates(std::move(c)) {
  if (responses.persons() != covariates.persons()) {
    throw DataError("responses have " + std::to_string(responses.persons()) + " persons but covariates have " +
                    std::to_string(covariates.persons()));
  }
  scores = compute_test_scores(responses);
}

ResponseMatrix load_responses(const std::filesystem::path& path) {
  CsvTable table = read_csv(path);
  check_unique(table.header, "item");
  const std::size_t items = table.header.size();
  std::vector<std::uint8_t> values;
  values.reserve(table.rows.size() * items);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t i = 0; i < items; ++i) {
      std::string_view cell = trim(table.rows[r][i]);
      if (cell.empty()) {
        throw DataError("missing response; remove incomplete rows upstream (listwise deletion)",
                        static_cast<long>(r + 1), table.header[i]);
      }
      if (cell == "0") {
        values.push_back(0);
      } else if (cell == "1") {
        values.push_back(1);
      } else {
        throw DataError("response \"" + std::string(cell) + "\" is not 0/1", static_cast<long>(r + 1),
                        table.header[i]);
      }
    }
  }
  return ResponseMatrix(std::move(table.header), table.rows.size(), std::move(values));
}

void save_responses(const ResponseMatrix& responses, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const auto& names = responses.item_names();
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  std::string line;
  for (std::size_t p = 0; p < responses.persons(); ++p) {
    line.clear();
    for (std::size_t i = 0; i < responses.items(); ++i) {
      if (i) line.push_back(',');
      line.push_back(responses.at(p, i) ? '1' : '0');
    }
    out << line << '\n';
  }
}

std::vector<VariableSpec> load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("schema " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.contains("variables") || !doc["variables"].is_array()) {
    throw DataError("schema " + path.string() + " lacks a \"variables\" array");
  }
  std::vector<VariableSpec> vars;
  for (const auto& v : doc["variables"]) {
    if (!v.contains("name") || !v.contains("scale")) throw DataError("schema entry needs \"name\" and \"scale\"");
    vars.push_back({v["name"].get<std::string>(), parse_scale(v["scale"].get<std::string>())});
  }
  return vars;
}

void save_schema(const std::vector<VariableSpec>& variables, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["variables"] = nlohmann::json::array();
  for (const auto& v : variables) doc["variables"].push_back({{"name", v.name}, {"scale", to_string(v.scale)}});
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

CovariateTable load_covariates(const std::filesystem::path& path, const std::filesystem::path& schema) {
  std::vector<VariableSpec> specs = load_schema(schema);
  CsvTable table = read_csv(path);
  check_unique(table.header, "variable");
  if (table.header.size() != specs.size()) {
    throw DataError("covariate file has " + std::to_string(table.header.size()) + " columns but schema declares " +
                    std::to_string(specs.size()));
  }
  std::vector<std::vector<double>> columns(specs.size());
  std::vector<std::size_t> source(specs.size());
  for (std::size_t j = 0; j < specs.size(); ++j) {
    auto it = std::find(table.header.begin(), table.header.end(), specs[j].name);
    if (it == table.header.end()) throw DataError("schema variable \"" + specs[j].name + "\" missing from data");
    source[j] = static_cast<std::size_t>(it - table.header.begin());
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < specs.size(); ++j) {
      double v = 0.0;
      if (!parse_double(table.rows[r][source[j]], v)) {
        throw DataError("covariate value \"" + table.rows[r][source[j]] + "\" is not numeric",
                        static_cast<long>(r + 1), specs[j].name);
      }
      columns[j].push_back(v);
    }
  }
  if (table.rows.empty()) throw DataError(path.string() + ": no data rows");
  return CovariateTable(std::move(specs), std::move(columns));
}

void save_covariates(const CovariateTable& covariates, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t j = 0; j < covariates.variables(); ++j) out << (j ? "," : "") << covariates.spec(j).name;
  out << '\n';
  for (std::size_t p = 0; p < covariates.persons(); ++p) {
    for (std::size_t j = 0; j < covariates.variables(); ++j) {
      out << (j ? "," : "") << format_double(covariates.at(p, j));
    }
    out << '\n';
  }
}

}  // namespace ift
