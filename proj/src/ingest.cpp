#include "tqk/ingest.hpp"

#include <sstream>

#include "tqk/error.hpp"
#include "tqk/numeric.hpp"

namespace tqk {

namespace {

const Json& require(const Json& j, const char* field, const std::string& prefix = {}) {
  if (!j.is_object()) throw Error("expected object" + (prefix.empty() ? "" : " at " + prefix));
  auto it = j.find(field);
  if (it == j.end()) throw Error("missing field " + prefix + field);
  return *it;
}

std::string get_string(const Json& j, const char* field, const std::string& prefix = {}) {
  const Json& v = require(j, field, prefix);
  if (!v.is_string()) throw Error("field " + prefix + field + ": expected string");
  return v.get<std::string>();
}

std::string opt_string(const Json& j, const char* field, const std::string& prefix = {}) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw Error("field " + prefix + field + ": expected string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const Json& j, const char* field, const std::string& prefix) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_array()) throw Error("field " + prefix + field + ": expected array");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw Error("field " + prefix + field + ": expected array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::size_t get_index(const Json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw Error("field " + what + ": expected non-negative integer");
  }
  return v.get<std::size_t>();
}

Cell cell_from_json(const Json& j) {
  if (j.is_string()) return Cell(j.get<std::string>());
  if (j.is_number()) return Cell(j.dump());
  if (!j.is_object()) throw Error("field table.cells: expected cell object");
  return Cell(get_string(j, "text", "table.cells."), string_list(j, "links", "table.cells."),
              string_list(j, "images", "table.cells."));
}

void expect_object(const Json& j, const char* what) {
  if (!j.is_object()) throw Error(std::string("field ") + what + ": expected object");
}

std::string violation_message(const std::vector<std::string>& violations) {
  std::string msg = "invalid example:";
  for (const auto& v : violations) msg += " " + v + ";";
  msg.pop_back();
  return msg;
}

}  // namespace

Json to_json(const UnifiedTable& table) {
  Json cells = Json::array();
  for (const auto& row : table.cells()) {
    Json r = Json::array();
    for (const auto& c : row) {
      r.push_back(Json{{"text", c.text}, {"links", c.links}, {"images", c.images}});
    }
    cells.push_back(std::move(r));
  }
  Json regions = Json::array();
  for (const auto& g : table.merged_regions()) regions.push_back({g.r0, g.c0, g.r1, g.c1});
  Json j;
  j["id"] = table.id();
  j["header_rows"] = table.header_rows();
  j["caption"] = table.caption() ? Json(*table.caption()) : Json(nullptr);
  j["cells"] = std::move(cells);
  j["merged_regions"] = std::move(regions);
  return j;
}

Json to_json(const QAExample& ex) {
  Json j;
  j["id"] = ex.id;
  j["dataset"] = ex.dataset;
  j["category"] = std::string(to_string(ex.category));
  j["question"] = ex.question;
  j["table"] = to_json(ex.table);
  Json passages = Json::array();
  for (const auto& p : ex.passages) passages.push_back({{"id", p.id}, {"title", p.title}, {"text", p.text}});
  j["passages"] = std::move(passages);
  Json images = Json::array();
  for (const auto& i : ex.images) images.push_back({{"id", i.id}, {"uri", i.uri}, {"caption", i.caption}});
  j["images"] = std::move(images);
  j["answer"] = {
      {"format", std::string(to_string(ex.answer.format))},
      {"value", ex.answer.value},
      {"derivation", ex.answer.derivation ? Json(*ex.answer.derivation) : Json(nullptr)},
  };
  return j;
}

UnifiedTable table_from_json(const Json& j) {
  expect_object(j, "table");
  const Json& cells_json = require(j, "cells", "table.");
  if (!cells_json.is_array()) throw Error("field table.cells: expected array of rows");
  Grid grid;
  for (const auto& row : cells_json) {
    if (!row.is_array()) throw Error("field table.cells: expected array of rows");
    std::vector<Cell> cells;
    for (const auto& c : row) cells.push_back(cell_from_json(c));
    grid.push_back(std::move(cells));
  }
  std::vector<Region> regions;
  if (auto it = j.find("merged_regions"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error("field table.merged_regions: expected array");
    for (const auto& r : *it) {
      if (!r.is_array() || r.size() != 4) {
        throw Error("field table.merged_regions: expected [r0,c0,r1,c1]");
      }
      regions.push_back({get_index(r[0], "table.merged_regions"), get_index(r[1], "table.merged_regions"),
                         get_index(r[2], "table.merged_regions"), get_index(r[3], "table.merged_regions")});
    }
  }
  std::optional<std::string> caption;
  if (auto it = j.find("caption"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("field table.caption: expected string");
    caption = it->get<std::string>();
  }
  std::string id = opt_string(j, "id", "table.");
  auto hr = j.find("header_rows");
  try {
    if (hr == j.end() || hr->is_null()) {
      return normalize_table(std::move(grid), regions, std::move(id), std::move(caption));
    }
    return UnifiedTable(std::move(id), std::move(grid), get_index(*hr, "table.header_rows"),
                        std::move(regions), std::move(caption));
  } catch (const Error& e) {
    throw Error(std::string("table: ") + e.what());
  }
}

QAExample example_from_json(const Json& j) {
  if (!j.is_object()) throw Error("expected a JSON object");
  QAExample ex;
  ex.id = get_string(j, "id");
  ex.dataset = get_string(j, "dataset");
  std::string category = get_string(j, "category");
  auto cat = category_from_string(category);
  if (!cat) throw Error("field category: unknown category " + category);
  ex.category = *cat;
  ex.question = get_string(j, "question");
  ex.table = table_from_json(require(j, "table"));

  if (auto it = j.find("passages"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error("field passages: expected array");
    for (const auto& p : *it) {
      ex.passages.push_back({get_string(p, "id", "passages."), opt_string(p, "title", "passages."),
                             get_string(p, "text", "passages.")});
    }
  }
  if (auto it = j.find("images"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error("field images: expected array");
    for (const auto& i : *it) {
      ex.images.push_back({get_string(i, "id", "images."), opt_string(i, "uri", "images."),
                           opt_string(i, "caption", "images.")});
    }
  }

  const Json& answer = require(j, "answer");
  std::string format = get_string(answer, "format", "answer.");
  auto fmt = answer_format_from_string(format);
  if (!fmt) throw Error("field answer.format: unknown format " + format);
  ex.answer.format = *fmt;
  ex.answer.value = get_string(answer, "value", "answer.");
  if (auto it = answer.find("derivation"); it != answer.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("field answer.derivation: expected string");
    ex.answer.derivation = it->get<std::string>();
  }
  return ex;
}

std::string to_jsonl_line(const QAExample& ex) { return to_json(ex).dump(); }

UnifiedReader::UnifiedReader(const std::string& path) : in_(path) {
  if (!in_) throw Error("cannot open " + path);
}

std::optional<QAExample> UnifiedReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_) + ": ";
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(where + "malformed JSON (" + e.what() + ")");
    }
    QAExample ex;
    try {
      ex = example_from_json(j);
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
    auto violations = validate_example(ex);
    if (!violations.empty()) throw Error(where + violation_message(violations));
    return ex;
  }
  return std::nullopt;
}

std::vector<QAExample> load_unified(const std::string& path) {
  UnifiedReader reader(path);
  std::vector<QAExample> out;
  while (auto ex = reader.next()) out.push_back(std::move(*ex));
  return out;
}

std::vector<QAExample> parse_unified(std::string_view text) {
  std::vector<QAExample> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    try {
      QAExample ex = example_from_json(Json::parse(line));
      auto violations = validate_example(ex);
      if (!violations.empty()) throw Error(violation_message(violations));
      out.push_back(std::move(ex));
    } catch (const Json::parse_error& e) {
      throw Error(where + "malformed JSON (" + e.what() + ")");
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
  }
  return out;
}

std::size_t save_unified(const std::vector<QAExample>& examples, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  for (const auto& ex : examples) out << to_jsonl_line(ex) << '\n';
  out.flush();
  if (!out) throw Error("write failed for " + path);
  return examples.size();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_delimited(std::string_view text, char delimiter) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  std::size_t row_no = 1;
  std::size_t i = 0;
  bool field_started = false;  // something (possibly empty quotes) was read for this field

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    if (row.empty() && field.empty() && !field_started) {  // blank line
      ++row_no;
      return;
    }
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    ++row_no;
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == '"' && field.empty() && !field_started) {
      std::size_t open = i++;
      while (true) {
        if (i >= text.size()) {
          throw ParseError("row " + std::to_string(row_no) + ": unterminated quoted field", open);
        }
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (text[i] == '\n') ++row_no;
        field.push_back(text[i++]);
      }
      field_started = true;
      if (i < text.size() && text[i] != delimiter && text[i] != '\n' && text[i] != '\r') {
        throw ParseError("row " + std::to_string(row_no) + ": text after closing quote", i);
      }
      continue;
    }
    if (c == '"') {
      throw ParseError("row " + std::to_string(row_no) + ": stray quote in unquoted field", i);
    }
    if (c == delimiter) {
      end_field();
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_row();
      i += (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ? 2 : 1;
    } else {
      field.push_back(c);
      field_started = true;
      ++i;
    }
  }
  if (field_started || !row.empty()) end_row();
  return rows;
}

std::string write_delimited(const UnifiedTable& table, char delimiter) {
  std::string out;
  for (const auto& row : table.cells()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += delimiter;
      const std::string& s = row[c].text;
      bool needs_quotes = s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos ||
                          (!s.empty() && (s.front() == ' ' || s.back() == ' ')) ||
                          (s.empty() && row.size() == 1);  // a bare empty line would be skipped
      if (!needs_quotes) {
        out += s;
        continue;
      }
      out += '"';
      for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
      }
      out += '"';
    }
    out += '\n';
  }
  return out;
}

UnifiedTable table_from_delimited(std::string_view text, char delimiter, bool has_header,
                                  std::string id) {
  auto rows = parse_delimited(text, delimiter);
  if (rows.empty()) throw Error("empty table");
  if (!has_header) return normalize_table(rows, {}, std::move(id));
  Grid grid;
  for (auto& r : rows) grid.emplace_back(r.begin(), r.end());
  UnifiedTable t(std::move(id), std::move(grid), 1);
  if (t.cols() == 0) throw Error("empty table");
  return t;
}

UnifiedTable import_delimited(const std::string& path, char delimiter, bool has_header) {
  std::string id = path;
  if (auto slash = id.find_last_of('/'); slash != std::string::npos) id = id.substr(slash + 1);
  return table_from_delimited(read_file(path), delimiter, has_header, std::move(id));
}

}  // namespace tqk
