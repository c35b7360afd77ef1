#include "bnem/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "bnem/errors.hpp"
#include "bnem/rng.hpp"

namespace bnem {

namespace {

[[noreturn]] void parse_fail(int line, const std::string& message) {
  throw Error(ErrorKind::kParse,
              "line " + std::to_string(line) + ": " + message);
}

bool is_label_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '+' ||
         c == '-';
}

bool valid_label(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!is_label_char(c)) return false;
  return true;
}

bool reserved_word(std::string_view s) {
  return s == "node" || s == "parents" || s == "states" || s == "cpt" ||
         s == "min" || s == "max";
}

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
      ++pos;
    std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos])))
      ++pos;
    if (pos > start) tokens.emplace_back(line.substr(start, pos - start));
  }
  return tokens;
}

struct Line {
  int number;  // 1-based
  std::vector<std::string> tokens;
};

// Non-blank, non-comment lines with their original numbers.
std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                       : eol - pos);
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::size_t first = raw.find_first_not_of(" \t");
    if (first != std::string_view::npos && raw[first] != '#')
      lines.push_back({number, tokenize(raw)});
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return lines;
}

double parse_double(const std::string& token, int line) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    parse_fail(line, "expected a number, got '" + token + "'");
  return value;
}

// Reads q rows of r probabilities starting at lines[pos]; applies the
// row-sum renormalization rule.
Eigen::ArrayXXd parse_probability_rows(const std::vector<Line>& lines,
                                       std::size_t& pos, int q, int r,
                                       const std::string& what) {
  Eigen::ArrayXXd table(q, r);
  for (int j = 0; j < q; ++j) {
    if (pos >= lines.size())
      parse_fail(lines.back().number,
                 what + ": expected " + std::to_string(q) + " rows, got " +
                     std::to_string(j));
    const Line& line = lines[pos];
    if (static_cast<int>(line.tokens.size()) != r)
      parse_fail(line.number, what + " row " + std::to_string(j) + ": expected " +
                                  std::to_string(r) + " values, got " +
                                  std::to_string(line.tokens.size()));
    for (int k = 0; k < r; ++k) {
      const double v = parse_double(line.tokens[k], line.number);
      if (!(v >= 0.0) || !std::isfinite(v))
        parse_fail(line.number,
                   what + " row " + std::to_string(j) + ": negative or non-finite value");
      table(j, k) = v;
    }
    ++pos;
  }
  return table;
}

// Renormalizes rows that deviate from one by up to 1e-6 (decimal rounding
// in hand-written files); rejects worse. Rows already within 1e-12 are
// left untouched so round-trips are bit-exact.
void apply_row_sum_rule(Eigen::ArrayXXd& table, int line,
                        const std::string& what) {
  for (Eigen::Index j = 0; j < table.rows(); ++j) {
    const double sum = table.row(j).sum();
    const double deviation = std::abs(sum - 1.0);
    if (deviation > 1e-6)
      throw Error(ErrorKind::kParse,
                  "near line " + std::to_string(line) + ": " + what + " row " +
                      std::to_string(j) + " sums to " + format_double(sum));
    if (deviation > 1e-12) table.row(j) /= sum;
  }
}

void append_rows(std::string& out, const Eigen::ArrayXXd& table) {
  for (Eigen::Index j = 0; j < table.rows(); ++j) {
    for (Eigen::Index k = 0; k < table.cols(); ++k) {
      if (k > 0) out += ' ';
      out += format_double(table(j, k));
    }
    out += '\n';
  }
}

void append_comments(std::string& out, std::span<const std::string> comments) {
  for (const std::string& c : comments) out += "# " + c + "\n";
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

ParsedNetwork parse_network(std::string_view text) {
  const std::vector<Line> lines = content_lines(text);

  ParsedNetwork result;
  NetworkStructure& structure = result.structure;
  std::map<std::string, int> name_to_index;
  std::map<int, Eigen::ArrayXXd> cpts;  // node index -> table
  std::map<int, int> cpt_lines;

  std::size_t pos = 0;
  while (pos < lines.size()) {
    const Line& line = lines[pos];
    const std::vector<std::string>& tokens = line.tokens;
    if (tokens[0] == "node") {
      if (tokens.size() < 2) parse_fail(line.number, "node without a name");
      const std::string& name = tokens[1];
      if (!valid_label(name) || reserved_word(name))
        parse_fail(line.number, "invalid node name '" + name + "'");
      if (name_to_index.count(name))
        parse_fail(line.number, "duplicate node '" + name + "'");

      Node node;
      node.name = name;
      std::size_t t = 2;
      if (t < tokens.size() && tokens[t] == "parents") {
        ++t;
        while (t < tokens.size() && tokens[t] != "states") {
          auto it = name_to_index.find(tokens[t]);
          if (it == name_to_index.end())
            parse_fail(line.number, "unknown parent '" + tokens[t] +
                                        "' of node '" + name +
                                        "' (parents must be declared first)");
          node.parents.push_back(it->second);
          ++t;
        }
      }
      if (t >= tokens.size() || tokens[t] != "states")
        parse_fail(line.number, "node '" + name + "' missing 'states'");
      ++t;
      for (; t < tokens.size(); ++t) {
        if (!valid_label(tokens[t]) || reserved_word(tokens[t]))
          parse_fail(line.number, "invalid state label '" + tokens[t] + "'");
        node.states.push_back(tokens[t]);
      }
      name_to_index.emplace(name, structure.node_count());
      structure.nodes.push_back(std::move(node));
      ++pos;
    } else if (tokens[0] == "cpt") {
      if (tokens.size() != 2) parse_fail(line.number, "expected 'cpt <name>'");
      auto it = name_to_index.find(tokens[1]);
      if (it == name_to_index.end())
        parse_fail(line.number, "cpt for unknown node '" + tokens[1] + "'");
      if (cpts.count(it->second))
        parse_fail(line.number, "duplicate cpt for node '" + tokens[1] + "'");
      const int node = it->second;
      cpt_lines[node] = line.number;
      ++pos;
      cpts[node] = parse_probability_rows(
          lines, pos, structure.num_parent_configs(node),
          structure.num_states(node), "cpt " + tokens[1]);
    } else {
      parse_fail(line.number, "unexpected directive '" + tokens[0] + "'");
    }
  }

  const std::vector<Violation> violations = validate_network(structure);
  if (!violations.empty())
    throw Error(ErrorKind::kParse, "invalid network: " + violations[0].node +
                                       ": " + violations[0].message);

  if (!cpts.empty()) {
    ParameterSet params;
    params.tables.resize(structure.node_count());
    for (int i = 0; i < structure.node_count(); ++i) {
      auto it = cpts.find(i);
      if (it == cpts.end())
        throw Error(ErrorKind::kParse, "missing cpt for node '" +
                                           structure.nodes[i].name + "'");
      apply_row_sum_rule(it->second, cpt_lines.at(i),
                         "cpt " + structure.nodes[i].name);
      params.tables[i] = std::move(it->second);
    }
    result.params = std::move(params);
  }
  return result;
}

std::string serialize_network(const NetworkStructure& structure,
                              const ParameterSet* params,
                              std::span<const std::string> comments) {
  std::string out;
  append_comments(out, comments);
  for (const Node& node : structure.nodes) {
    out += "node " + node.name;
    if (!node.parents.empty()) {
      out += " parents";
      for (int p : node.parents) out += ' ' + structure.nodes[p].name;
    }
    out += " states";
    for (const std::string& s : node.states) out += ' ' + s;
    out += '\n';
  }
  if (params) {
    for (int i = 0; i < structure.node_count(); ++i) {
      out += "cpt " + structure.nodes[i].name + "\n";
      append_rows(out, params->tables[i]);
    }
  }
  return out;
}

Dataset parse_dataset(std::string_view text,
                      const NetworkStructure& structure) {
  // CSV splitting keeps empty fields, so ragged rows are reported exactly.
  std::vector<std::pair<int, std::vector<std::string>>> rows;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                       : eol - pos);
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const bool is_comment = !raw.empty() && raw[0] == '#';
    if (!raw.empty() && !is_comment) {
      std::vector<std::string> fields;
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = raw.find(',', start);
        fields.emplace_back(raw.substr(
            start, comma == std::string_view::npos ? raw.size() - start
                                                   : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      rows.emplace_back(number, std::move(fields));
    } else if (is_comment && !rows.empty()) {
      parse_fail(number, "comments are only allowed above the header");
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }

  if (rows.empty())
    throw Error(ErrorKind::kParse, "dataset has no header row");

  const std::vector<std::string>& header = rows.front().second;
  const int n = structure.node_count();
  std::vector<int> column_node(header.size(), -1);
  std::vector<bool> node_seen(n, false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const int node = structure.find_node(header[c]);
    if (node < 0)
      parse_fail(rows.front().first, "unknown column '" + header[c] + "'");
    if (node_seen[node])
      parse_fail(rows.front().first, "duplicate column '" + header[c] + "'");
    node_seen[node] = true;
    column_node[c] = node;
  }
  for (int i = 0; i < n; ++i)
    if (!node_seen[i])
      parse_fail(rows.front().first,
                 "missing column for node '" + structure.nodes[i].name + "'");

  Dataset dataset;
  dataset.records.reserve(rows.size() - 1);
  for (std::size_t row = 1; row < rows.size(); ++row) {
    const auto& [line, fields] = rows[row];
    const int record_number = static_cast<int>(row);  // 1-based data row
    if (fields.size() != header.size())
      parse_fail(line, "record " + std::to_string(record_number) + " has " +
                           std::to_string(fields.size()) + " cells, expected " +
                           std::to_string(header.size()));
    std::vector<int> record(n, kMissing);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& cell = fields[c];
      if (cell == "?") continue;
      const int node = column_node[c];
      const int state = structure.find_state(node, cell);
      if (state < 0)
        parse_fail(line, "record " + std::to_string(record_number) +
                             ": unknown state '" + cell + "' for node '" +
                             structure.nodes[node].name + "'");
      record[node] = state;
    }
    dataset.records.push_back(std::move(record));
  }
  return dataset;
}

std::string serialize_dataset(const NetworkStructure& structure,
                              const Dataset& dataset,
                              std::span<const std::string> comments) {
  std::string out;
  append_comments(out, comments);
  for (int i = 0; i < structure.node_count(); ++i) {
    if (i > 0) out += ',';
    out += structure.nodes[i].name;
  }
  out += '\n';
  for (const std::vector<int>& record : dataset.records) {
    for (int i = 0; i < structure.node_count(); ++i) {
      if (i > 0) out += ',';
      out += record[i] == kMissing ? "?" : structure.nodes[i].states[record[i]];
    }
    out += '\n';
  }
  return out;
}

ParameterBounds parse_bounds(std::string_view text,
                             const NetworkStructure& structure) {
  const std::vector<Line> lines = content_lines(text);
  const int n = structure.node_count();

  std::vector<Eigen::ArrayXXd> lower(n), upper(n);
  std::vector<bool> have_lower(n, false), have_upper(n, false);

  std::size_t pos = 0;
  while (pos < lines.size()) {
    const Line& line = lines[pos];
    if (line.tokens.size() != 2 ||
        (line.tokens[0] != "min" && line.tokens[0] != "max"))
      parse_fail(line.number, "expected 'min <name>' or 'max <name>'");
    const bool is_min = line.tokens[0] == "min";
    const int node = structure.find_node(line.tokens[1]);
    if (node < 0)
      parse_fail(line.number, "unknown node '" + line.tokens[1] + "'");
    if ((is_min && have_lower[node]) || (!is_min && have_upper[node]))
      parse_fail(line.number, "duplicate " + line.tokens[0] + " table for '" +
                                  line.tokens[1] + "'");
    ++pos;
    Eigen::ArrayXXd table = parse_probability_rows(
        lines, pos, structure.num_parent_configs(node),
        structure.num_states(node), line.tokens[0] + " " + line.tokens[1]);
    if ((table > 1.0).any())
      parse_fail(line.number, "bound above one for '" + line.tokens[1] + "'");
    if (is_min) {
      lower[node] = std::move(table);
      have_lower[node] = true;
    } else {
      upper[node] = std::move(table);
      have_upper[node] = true;
    }
  }

  for (int i = 0; i < n; ++i) {
    if (!have_lower[i] || !have_upper[i])
      throw Error(ErrorKind::kParse, "missing min/max tables for node '" +
                                         structure.nodes[i].name + "'");
    if ((lower[i] > upper[i]).any())
      throw Error(ErrorKind::kParse, "lower bound exceeds upper bound for '" +
                                         structure.nodes[i].name + "'");
  }
  return ParameterBounds{std::move(lower), std::move(upper)};
}

std::string serialize_bounds(const NetworkStructure& structure,
                             const ParameterBounds& bounds,
                             std::span<const std::string> comments) {
  std::string out;
  append_comments(out, comments);
  for (int i = 0; i < structure.node_count(); ++i) {
    out += "min " + structure.nodes[i].name + "\n";
    append_rows(out, bounds.lower[i]);
    out += "max " + structure.nodes[i].name + "\n";
    append_rows(out, bounds.upper[i]);
  }
  return out;
}

std::string serialize_trace(std::span<const TraceRow> trace) {
  std::string out =
      "iteration,observed_loglik,expected_loglik,max_param_delta,clip_count,"
      "post_norm_violations,skipped_records\n";
  for (const TraceRow& row : trace) {
    out += std::to_string(row.iteration) + ',' +
           format_double(row.observed_loglik) + ',' +
           format_double(row.expected_loglik) + ',' +
           format_double(row.max_param_delta) + ',' +
           std::to_string(row.clip_count) + ',' +
           std::to_string(row.post_norm_violations) + ',' +
           std::to_string(row.skipped_records) + '\n';
  }
  return out;
}

Dataset forward_sample(const NetworkStructure& structure,
                       const ParameterSet& params, int n, std::uint64_t seed) {
  if (n < 0)
    throw Error(ErrorKind::kDomain, "sample size must be nonnegative");
  const std::optional<std::vector<int>> order = topological_order(structure);
  if (!order)
    throw Error(ErrorKind::kDomain, "cannot sample from a cyclic structure");

  Dataset dataset;
  dataset.records.reserve(n);
  std::vector<int> parent_values;
  for (int l = 0; l < n; ++l) {
    SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(l));
    std::vector<int> record(structure.node_count(), kMissing);
    for (int i : *order) {
      parent_values.clear();
      for (int p : structure.nodes[i].parents)
        parent_values.push_back(record[p]);
      const int j = parent_config_index(structure, i, parent_values);
      const double u = rng.next_unit();
      const int r = structure.num_states(i);
      double cum = 0.0;
      int state = r - 1;  // guards against round-off in the running sum
      for (int k = 0; k < r; ++k) {
        cum += params.tables[i](j, k);
        if (u < cum) {
          state = k;
          break;
        }
      }
      record[i] = state;
    }
    dataset.records.push_back(std::move(record));
  }
  return dataset;
}

Dataset mask_mcar(const Dataset& dataset, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw Error(ErrorKind::kDomain,
                "mask rate must lie in [0,1], got " + format_double(rate));
  Dataset masked = dataset;
  for (std::size_t l = 0; l < masked.records.size(); ++l) {
    SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(l));
    for (int& cell : masked.records[l])
      if (rng.next_unit() < rate) cell = kMissing;
  }
  return masked;
}

double missingness_rate(const Dataset& dataset) {
  long missing = 0;
  long total = 0;
  for (const std::vector<int>& record : dataset.records) {
    total += static_cast<long>(record.size());
    for (int cell : record)
      if (cell == kMissing) ++missing;
  }
  return total == 0 ? 0.0 : static_cast<double>(missing) / total;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error(ErrorKind::kIo, "cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
      throw Error(ErrorKind::kIo, "failed writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error(ErrorKind::kIo, "failed to move '" + tmp + "' to '" + path + "'");
}

}  // namespace bnem
