#pragma once

#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tqk/table.hpp"

namespace tqk {

using Json = nlohmann::ordered_json;

// Unified JSONL schema, one example per line:
//   id, dataset, category, question,
//   table{id, header_rows, caption, cells[[{text, links[], images[]}]],
//         merged_regions[[r0,c0,r1,c1]]},
//   passages[{id,title,text}], images[{id,uri,caption}],
//   answer{format, value, derivation}
Json to_json(const UnifiedTable& table);
Json to_json(const QAExample& ex);
// Throws Error naming the offending field.
UnifiedTable table_from_json(const Json& j);
QAExample example_from_json(const Json& j);

std::string to_jsonl_line(const QAExample& ex);

// Streams examples from a unified JSONL file. Blank lines are skipped.
// Errors carry the line number: "line 2: missing field question".
class UnifiedReader {
 public:
  explicit UnifiedReader(const std::string& path);
  std::optional<QAExample> next();
  std::size_t line() const { return line_; }

 private:
  std::ifstream in_;
  std::size_t line_ = 0;
};

std::vector<QAExample> load_unified(const std::string& path);
// Parses JSONL held in memory (same rules as load_unified).
std::vector<QAExample> parse_unified(std::string_view text);
// Returns the number of examples written; throws Error on an unwritable path.
std::size_t save_unified(const std::vector<QAExample>& examples, const std::string& path);

// RFC 4180-style reader: quoted fields may contain the delimiter, newlines,
// and doubled quotes. Throws ParseError mentioning the row on bad quoting.
std::vector<std::vector<std::string>> parse_delimited(std::string_view text, char delimiter);
std::string write_delimited(const UnifiedTable& table, char delimiter = ',');

// header_rows is 1 when has_header, otherwise computed by the header finder.
UnifiedTable table_from_delimited(std::string_view text, char delimiter, bool has_header,
                                  std::string id = {});
UnifiedTable import_delimited(const std::string& path, char delimiter, bool has_header);

// Dataset adapters -------------------------------------------------------

struct AdapterSpec {
  std::string name;
  std::map<std::string, std::string> options;
};

// Maps one source record to zero or more examples.
using Adapter = std::function<std::vector<QAExample>(const Json& record, const AdapterSpec& spec)>;

// Registered names in sorted order.
std::vector<std::string> adapter_names();
bool has_adapter(std::string_view name);

// Reads `input` (a JSON array or JSONL of source records; CSV/TSV for the
// "delimited" adapter), converts, and writes unified JSONL to `output`.
// Every converted example must validate. Returns the number written.
std::size_t convert(const AdapterSpec& adapter, const std::string& input, const std::string& output);
// In-memory variant of convert.
std::vector<QAExample> convert_records(const AdapterSpec& adapter, std::string_view input_text);

std::string read_file(const std::string& path);

}  // namespace tqk
