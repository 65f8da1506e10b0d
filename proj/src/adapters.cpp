// Source-record adapters. Each one maps the record shape of a public
// TableQA dataset onto QAExample; downloading the data itself is left to
// the user.

#include <algorithm>
#include <map>

#include "tqk/error.hpp"
#include "tqk/ingest.hpp"
#include "tqk/linearize.hpp"
#include "tqk/math_expr.hpp"
#include "tqk/numeric.hpp"
#include "tqk/program.hpp"
#include "tqk/sql.hpp"

namespace tqk {

namespace {

std::string option(const AdapterSpec& spec, const std::string& key, std::string fallback = {}) {
  auto it = spec.options.find(key);
  return it == spec.options.end() ? fallback : it->second;
}

bool truthy(const std::string& s) {
  std::string v = to_lower(trim(s));
  return v == "1" || v == "true" || v == "yes";
}

// Text of a JSON scalar or list as it should appear in a cell or answer.
std::string text_of(const Json& v) {
  if (v.is_null()) return {};
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += ", ";
      out += text_of(item);
    }
    return out;
  }
  return v.dump();
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw Error("expected object record");
  auto it = j.find(name);
  if (it == j.end()) throw Error(std::string("source record missing field ") + name);
  return *it;
}

const Json* first_of(const Json& j, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (auto it = j.find(n); it != j.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

std::string record_id(const Json& j, std::initializer_list<const char*> names, const AdapterSpec& spec) {
  if (const Json* v = first_of(j, names)) return text_of(*v);
  throw Error("source record has no id (" + spec.name + ")");
}

std::string dataset_name(const AdapterSpec& spec) { return option(spec, "dataset", spec.name); }

// {header: [...], rows: [[...]]} with one header row.
UnifiedTable header_rows_table(const Json& t, const std::string& id) {
  Grid grid;
  std::vector<Cell> header;
  for (const auto& h : field(t, "header")) header.emplace_back(text_of(h));
  grid.push_back(std::move(header));
  for (const auto& row : field(t, "rows")) {
    std::vector<Cell> cells;
    for (const auto& v : row) cells.emplace_back(text_of(v));
    grid.push_back(std::move(cells));
  }
  std::optional<std::string> caption;
  if (const Json* c = first_of(t, {"caption", "page_title", "title"})) caption = text_of(*c);
  return UnifiedTable(id, std::move(grid), 1, {}, caption);
}

std::vector<std::vector<std::string>> string_grid(const Json& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& row : rows) {
    std::vector<std::string> r;
    for (const auto& v : row) r.push_back(text_of(v));
    out.push_back(std::move(r));
  }
  return out;
}

// Canonical program text, or nullopt when the source uses ops outside the
// supported inventory.
std::optional<std::string> canonical_program(const std::string& text) {
  try {
    return print_program(parse_program(text));
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

// WikiSQL ------------------------------------------------------------------

SqlQuery wikisql_query(const Json& sql, const std::vector<std::string>& header) {
  static constexpr std::optional<Aggregate> kAgg[] = {
      std::nullopt, Aggregate::kMax, Aggregate::kMin, Aggregate::kCount, Aggregate::kSum, Aggregate::kAvg};
  static constexpr CompareOp kCmp[] = {CompareOp::kEq, CompareOp::kGt, CompareOp::kLt};
  auto column = [&](const Json& idx) {
    std::size_t i = idx.get<std::size_t>();
    if (i >= header.size()) throw Error("sql column index out of range");
    return header[i];
  };
  SqlQuery q;
  q.select_column = column(field(sql, "sel"));
  std::size_t agg = field(sql, "agg").get<std::size_t>();
  if (agg >= std::size(kAgg)) throw Error("unknown WikiSQL aggregate index");
  q.agg = kAgg[agg];
  for (const auto& cond : field(sql, "conds")) {
    if (!cond.is_array() || cond.size() != 3) throw Error("malformed WikiSQL condition");
    std::size_t op = cond[1].get<std::size_t>();
    if (op >= std::size(kCmp)) throw Error("unsupported WikiSQL operator index");
    q.conditions.push_back({column(cond[0]), kCmp[op], text_of(cond[2])});
  }
  return q;
}

std::vector<QAExample> adapt_wikisql(const Json& r, const AdapterSpec& spec) {
  QAExample ex;
  ex.id = record_id(r, {"id", "qid"}, spec);
  ex.dataset = dataset_name(spec);
  ex.category = Category::kStructured;
  ex.question = text_of(field(r, "question"));
  const Json& t = field(r, "table");
  ex.table = header_rows_table(t, first_of(t, {"id"}) ? text_of(t["id"]) : ex.id);

  const Json& sql = field(r, "sql");
  SqlQuery q = sql.is_string() ? parse_sql(sql.get<std::string>())
                               : wikisql_query(sql, ex.table.column_headers());
  ex.answer.format = AnswerFormat::kSql;
  ex.answer.derivation = print_sql(q);
  if (const Json* a = first_of(r, {"answer", "answers"})) {
    ex.answer.value = text_of(*a);
  } else {
    ex.answer.value = exec_sql(q, ex.table);
  }
  return {ex};
}

// WikiTableQuestions and SQA share the header/rows shape with direct answers.
std::vector<QAExample> adapt_direct_structured(const Json& r, const AdapterSpec& spec) {
  QAExample ex;
  ex.id = record_id(r, {"id", "qid", "question_id"}, spec);
  ex.dataset = dataset_name(spec);
  ex.category = Category::kStructured;
  ex.question = text_of(field(r, "question"));
  const Json& t = field(r, "table");
  ex.table = header_rows_table(t, first_of(t, {"id"}) ? text_of(t["id"]) : ex.id);
  const Json* a = first_of(r, {"answer", "answers", "target_value", "answer_text"});
  if (!a) throw Error("source record missing field answer");
  ex.answer.value = text_of(*a);
  return {ex};
}

// FinQA ----------------------------------------------------------------------

std::vector<QAExample> adapt_finqa(const Json& r, const AdapterSpec& spec) {
  QAExample ex;
  ex.id = record_id(r, {"id", "uid"}, spec);
  ex.dataset = dataset_name(spec);
  ex.category = Category::kSpreadSheet;
  ex.table = normalize_table(string_grid(field(r, "table")), {}, ex.id);
  auto add_passages = [&](const char* key, const char* prefix) {
    if (auto it = r.find(key); it != r.end() && it->is_array()) {
      std::size_t i = 0;
      for (const auto& line : *it) {
        ex.passages.push_back({std::string(prefix) + std::to_string(i++), "", text_of(line)});
      }
    }
  };
  add_passages("pre_text", "pre-");
  add_passages("post_text", "post-");

  const Json& qa = field(r, "qa");
  ex.question = text_of(field(qa, "question"));
  const Json* value = first_of(qa, {"exe_ans", "answer"});
  if (!value) throw Error("source record missing field qa.exe_ans");
  ex.answer.value = text_of(*value);
  if (const Json* prog = first_of(qa, {"program", "program_re"})) {
    if (auto canon = canonical_program(text_of(*prog))) {
      ex.answer.format = AnswerFormat::kProgram;
      ex.answer.derivation = *canon;
    }
  }
  return {ex};
}

// TAT-QA: one table + paragraphs, many questions per record. Arithmetic
// derivations are math expressions, converted into programs unless
// keep_math_expr is set.
std::vector<QAExample> adapt_tatqa(const Json& r, const AdapterSpec& spec) {
  const Json& t = field(r, "table");
  std::string table_id = first_of(t, {"uid"}) ? text_of(t["uid"]) : "";
  UnifiedTable table = normalize_table(string_grid(field(t, "table")), {}, table_id);
  std::vector<Passage> passages;
  if (auto it = r.find("paragraphs"); it != r.end() && it->is_array()) {
    std::size_t i = 0;
    for (const auto& p : *it) {
      std::string pid = first_of(p, {"uid"}) ? text_of(p["uid"]) : "para-" + std::to_string(i);
      passages.push_back({pid, "", text_of(field(p, "text"))});
      ++i;
    }
  }
  const bool keep_expr = truthy(option(spec, "keep_math_expr", "false"));
  std::vector<QAExample> out;
  for (const auto& q : field(r, "questions")) {
    QAExample ex;
    ex.id = record_id(q, {"uid", "id"}, spec);
    ex.dataset = dataset_name(spec);
    ex.category = Category::kSpreadSheet;
    ex.question = text_of(field(q, "question"));
    ex.table = table;
    ex.passages = passages;
    ex.answer.value = text_of(field(q, "answer"));
    const std::string type = first_of(q, {"answer_type"}) ? text_of(q["answer_type"]) : "";
    const std::string derivation = first_of(q, {"derivation"}) ? text_of(q["derivation"]) : "";
    if (type == "arithmetic" && !trim(derivation).empty()) {
      try {
        MathExpr e = parse_math_expr(derivation);
        if (keep_expr) {
          ex.answer.format = AnswerFormat::kMathExpr;
          ex.answer.derivation = print_math_expr(e);
        } else {
          ex.answer.format = AnswerFormat::kProgram;
          ex.answer.derivation = print_program(expr_to_program(e));
        }
      } catch (const Error&) {
        // Not expressible in the supported grammars; kept as a direct answer.
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// HiTab: hierarchical grid with explicit merged regions.
std::vector<QAExample> adapt_hitab(const Json& r, const AdapterSpec& spec) {
  QAExample ex;
  ex.id = record_id(r, {"id"}, spec);
  ex.dataset = dataset_name(spec);
  ex.category = Category::kSpreadSheet;
  ex.question = text_of(field(r, "question"));
  const Json& t = field(r, "table");
  std::vector<Region> regions;
  if (auto it = t.find("merged_regions"); it != t.end() && it->is_array()) {
    for (const auto& g : *it) {
      regions.push_back({field(g, "first_row").get<std::size_t>(), field(g, "first_column").get<std::size_t>(),
                         field(g, "last_row").get<std::size_t>(), field(g, "last_column").get<std::size_t>()});
    }
  }
  std::optional<std::string> caption;
  if (const Json* c = first_of(t, {"title", "caption"})) caption = text_of(*c);
  ex.table = normalize_table(string_grid(field(t, "texts")), regions, ex.id, caption);
  ex.answer.value = text_of(field(r, "answer"));
  return {ex};
}

// MultiHiertt: several tables per record; the first becomes the table and
// the rest are attached as markdown passages.
std::vector<QAExample> adapt_multihiertt(const Json& r, const AdapterSpec& spec) {
  QAExample ex;
  ex.id = record_id(r, {"uid", "id"}, spec);
  ex.dataset = dataset_name(spec);
  ex.category = Category::kSpreadSheet;
  const Json& tables = field(r, "tables");
  if (!tables.is_array() || tables.empty()) throw Error("source record has no tables");
  ex.table = normalize_table(string_grid(tables[0]), {}, ex.id + "-t0");
  for (std::size_t k = 1; k < tables.size(); ++k) {
    auto extra = normalize_table(string_grid(tables[k]), {}, ex.id + "-t" + std::to_string(k));
    ex.passages.push_back({"table-" + std::to_string(k), "table " + std::to_string(k), to_markdown(extra)});
  }
  if (auto it = r.find("paragraphs"); it != r.end() && it->is_array()) {
    std::size_t i = 0;
    for (const auto& p : *it) ex.passages.push_back({"para-" + std::to_string(i++), "", text_of(p)});
  }
  const Json& qa = field(r, "qa");
  ex.question = text_of(field(qa, "question"));
  ex.answer.value = text_of(field(qa, "answer"));
  if (const Json* prog = first_of(qa, {"program"})) {
    if (auto canon = canonical_program(text_of(*prog))) {
      ex.answer.format = AnswerFormat::kProgram;
      ex.answer.derivation = *canon;
    }
  }
  return {ex};
}

std::string title_from_link(const std::string& link) {
  std::string title = link;
  if (auto slash = title.find_last_of('/'); slash != std::string::npos) title = title.substr(slash + 1);
  std::replace(title.begin(), title.end(), '_', ' ');
  return title;
}

// HybridQA: cells are [text, [links]] pairs; passages keyed by link.
std::vector<QAExample> adapt_hybridqa(const Json& r, const AdapterSpec& spec) {
  QAExample ex;
  ex.id = record_id(r, {"question_id", "id"}, spec);
  ex.dataset = dataset_name(spec);
  ex.category = Category::kEncyclopedia;
  ex.question = text_of(field(r, "question"));

  const Json& ps = field(r, "passages");
  if (ps.is_object()) {
    for (const auto& [link, text] : ps.items()) ex.passages.push_back({link, title_from_link(link), text_of(text)});
  } else {
    for (const auto& p : ps) {
      std::string pid = text_of(field(p, "id"));
      ex.passages.push_back({pid, first_of(p, {"title"}) ? text_of(p["title"]) : title_from_link(pid),
                             text_of(field(p, "text"))});
    }
  }
  std::map<std::string, bool> known;
  for (const auto& p : ex.passages) known[p.id] = true;

  auto cell = [&](const Json& c) {
    if (!c.is_array()) return Cell(text_of(c));
    Cell out(c.empty() ? "" : text_of(c[0]));
    if (c.size() > 1 && c[1].is_array()) {
      for (const auto& l : c[1]) {
        std::string link = text_of(l);
        if (known.count(link)) out.links.push_back(link);  // unresolved links are dropped
      }
    }
    return out;
  };
  const Json& t = field(r, "table");
  Grid grid;
  std::vector<Cell> header;
  for (const auto& h : field(t, "header")) header.push_back(cell(h));
  grid.push_back(std::move(header));
  for (const auto& row : field(t, "data")) {
    std::vector<Cell> cells;
    for (const auto& c : row) cells.push_back(cell(c));
    grid.push_back(std::move(cells));
  }
  std::optional<std::string> caption;
  if (const Json* c = first_of(t, {"title"})) caption = text_of(*c);
  ex.table = UnifiedTable(first_of(t, {"uid"}) ? text_of(t["uid"]) : ex.id, std::move(grid), 1, {}, caption);
  const Json* a = first_of(r, {"answer-text", "answer_text", "answer"});
  if (!a) throw Error("source record missing field answer-text");
  ex.answer.value = text_of(*a);
  return {ex};
}

// MultimodalQA: cells may reference text passages and images by id.
std::vector<QAExample> adapt_multimodalqa(const Json& r, const AdapterSpec& spec) {
  QAExample ex;
  ex.id = record_id(r, {"qid", "id"}, spec);
  ex.dataset = dataset_name(spec);
  ex.category = Category::kEncyclopedia;
  ex.question = text_of(field(r, "question"));
  if (auto it = r.find("texts"); it != r.end() && it->is_array()) {
    for (const auto& p : *it) {
      ex.passages.push_back({text_of(field(p, "id")), first_of(p, {"title"}) ? text_of(p["title"]) : "",
                             text_of(field(p, "text"))});
    }
  }
  if (auto it = r.find("images"); it != r.end() && it->is_array()) {
    for (const auto& i : *it) {
      const Json* uri = first_of(i, {"uri", "path", "url"});
      const Json* cap = first_of(i, {"caption", "title"});
      ex.images.push_back({text_of(field(i, "id")), uri ? text_of(*uri) : "", cap ? text_of(*cap) : ""});
    }
  }
  const Json& t = field(r, "table");
  Grid grid;
  std::vector<Cell> header;
  for (const auto& h : field(t, "header")) header.emplace_back(text_of(h));
  grid.push_back(std::move(header));
  for (const auto& row : field(t, "rows")) {
    std::vector<Cell> cells;
    for (const auto& c : row) {
      if (c.is_object()) {
        Cell cell(text_of(field(c, "text")));
        if (auto l = c.find("links"); l != c.end()) {
          for (const auto& v : *l) cell.links.push_back(text_of(v));
        }
        if (auto im = c.find("images"); im != c.end()) {
          for (const auto& v : *im) cell.images.push_back(text_of(v));
        }
        cells.push_back(std::move(cell));
      } else {
        cells.emplace_back(text_of(c));
      }
    }
    grid.push_back(std::move(cells));
  }
  std::optional<std::string> caption;
  if (const Json* c = first_of(t, {"title"})) caption = text_of(*c);
  ex.table = UnifiedTable(ex.id, std::move(grid), 1, {}, caption);
  const Json& answers = field(r, "answers");
  if (answers.is_array()) {
    std::string value;
    for (const auto& a : answers) {
      if (!value.empty()) value += ", ";
      value += a.is_object() ? text_of(field(a, "answer")) : text_of(a);
    }
    ex.answer.value = value;
  } else {
    ex.answer.value = text_of(answers);
  }
  return {ex};
}

const std::map<std::string, Adapter, std::less<>>& registry() {
  static const std::map<std::string, Adapter, std::less<>> adapters = {
      {"wikisql", adapt_wikisql},         {"wtq", adapt_direct_structured},
      {"sqa", adapt_direct_structured},   {"finqa", adapt_finqa},
      {"tatqa", adapt_tatqa},             {"hitab", adapt_hitab},
      {"multihiertt", adapt_multihiertt}, {"hybridqa", adapt_hybridqa},
      {"multimodalqa", adapt_multimodalqa},
      // "delimited" reads CSV/TSV rather than JSON records; see convert_records.
      {"delimited", nullptr},
  };
  return adapters;
}

std::vector<Json> source_records(std::string_view text) {
  std::string_view body = trim(text);
  std::vector<Json> out;
  if (body.empty()) return out;
  if (body.front() == '[') {
    Json all;
    try {
      all = Json::parse(body);
    } catch (const Json::parse_error& e) {
      throw Error(std::string("malformed JSON input (") + e.what() + ")");
    }
    for (auto& r : all) out.push_back(std::move(r));
    return out;
  }
  // A single pretty-printed record is not valid JSONL but is unambiguous.
  if (body.front() == '{' && body.find('\n') != std::string_view::npos) {
    Json one = Json::parse(body, nullptr, false);
    if (!one.is_discarded() && one.is_object()) {
      out.push_back(std::move(one));
      return out;
    }
  }
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw Error("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
  }
  return out;
}

QAExample adapt_delimited(std::string_view text, const AdapterSpec& spec) {
  std::string delim = option(spec, "delimiter", ",");
  char d = delim == "tab" || delim == "\\t" || delim == "\t" ? '\t' : (delim.empty() ? ',' : delim[0]);
  QAExample ex;
  ex.id = option(spec, "id", "delimited-0");
  ex.dataset = dataset_name(spec);
  ex.question = option(spec, "question");
  if (trim(ex.question).empty()) throw Error("delimited adapter needs option question");
  auto cat = category_from_string(option(spec, "category", "Structured"));
  if (!cat) throw Error("delimited adapter: unknown category " + option(spec, "category"));
  ex.category = *cat;
  ex.table = table_from_delimited(text, d, truthy(option(spec, "has_header", "true")), ex.id);
  ex.answer.value = option(spec, "answer");
  return ex;
}

}  // namespace

std::vector<std::string> adapter_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

bool has_adapter(std::string_view name) { return registry().find(name) != registry().end(); }

std::vector<QAExample> convert_records(const AdapterSpec& adapter, std::string_view input_text) {
  auto it = registry().find(adapter.name);
  if (it == registry().end()) {
    std::string names;
    for (const auto& n : adapter_names()) names += (names.empty() ? "" : ", ") + n;
    throw Error("unknown adapter " + adapter.name + " (registered: " + names + ")");
  }
  std::vector<QAExample> out;
  if (!it->second) {
    out.push_back(adapt_delimited(input_text, adapter));
  } else {
    auto records = source_records(input_text);
    for (std::size_t i = 0; i < records.size(); ++i) {
      try {
        for (auto& ex : it->second(records[i], adapter)) out.push_back(std::move(ex));
      } catch (const Json::exception& e) {
        throw Error("record " + std::to_string(i) + ": source schema mismatch (" + e.what() + ")");
      } catch (const Error& e) {
        throw Error("record " + std::to_string(i) + ": " + e.what());
      }
    }
  }
  for (const auto& ex : out) {
    auto violations = validate_example(ex);
    if (!violations.empty()) throw Error("example " + ex.id + " failed validation: " + violations.front());
  }
  return out;
}

std::size_t convert(const AdapterSpec& adapter, const std::string& input, const std::string& output) {
  if (!has_adapter(adapter.name)) convert_records(adapter, {});  // throws the listing error
  auto examples = convert_records(adapter, read_file(input));
  return save_unified(examples, output);
}

}  // namespace tqk
