#include "tqk/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tqk/benchmark.hpp"
#include "tqk/error.hpp"
#include "tqk/evaluation.hpp"
#include "tqk/ingest.hpp"
#include "tqk/linearize.hpp"
#include "tqk/numeric.hpp"
#include "tqk/reasoner.hpp"
#include "tqk/retrieval.hpp"
#include "tqk/service.hpp"

namespace tqk::cli {

namespace {

const std::map<std::string, InputFormat> kFormats{{"markdown", InputFormat::kMarkdown},
                                                  {"flatten", InputFormat::kFlatten}};
const std::map<std::string, Granularity> kGranularities{{"row", Granularity::kRow},
                                                        {"column", Granularity::kColumn},
                                                        {"cell", Granularity::kCell},
                                                        {"passage", Granularity::kPassage}};
const std::map<std::string, Scheme> kSchemes{
    {"direct", Scheme::kDirect}, {"cot", Scheme::kCoT}, {"pot", Scheme::kPoT}};

char parse_delimiter(const std::string& d, const std::string& path) {
  if (d.empty()) {
    auto ext = to_lower(std::filesystem::path(path).extension().string());
    return ext == ".tsv" || ext == ".tab" ? '\t' : ',';
  }
  if (d == "tab" || d == "\\t") return '\t';
  if (d.size() != 1) throw Error("delimiter must be one character or 'tab'");
  return d[0];
}

Tokenizer make_tokenizer(const std::string& vocab) {
  return vocab.empty() ? Tokenizer() : Tokenizer::from_vocab_file(vocab);
}

// Examples from a unified JSONL file, or a single question over a CSV/TSV table.
std::vector<QAExample> load_inputs(const std::string& unified, const std::string& table,
                                   const std::string& delimiter, const std::string& question) {
  if (!unified.empty()) return load_unified(unified);
  if (table.empty()) throw Error("give --in <unified.jsonl> or --table <file.csv>");
  QAExample ex;
  ex.id = std::filesystem::path(table).stem().string();
  ex.dataset = "custom";
  ex.question = question;
  ex.table = import_delimited(table, parse_delimiter(delimiter, table), true);
  return {ex};
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err, const Hooks& hooks) {
  CLI::App app{"Table question answering toolkit"};
  app.name(argv.empty() ? "tqk" : std::filesystem::path(argv[0]).filename().string());
  app.require_subcommand(1);
  app.set_config("--settings", "", "INI/TOML settings file; flags override it");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert a raw dataset into unified JSONL");
  std::string adapter, ingest_in, ingest_out;
  std::vector<std::string> adapter_opts;
  ingest->add_option("--adapter", adapter, "Source dataset adapter")
      ->required()
      ->check(CLI::IsMember(adapter_names()));
  ingest->add_option("--in", ingest_in, "Raw input file")->required();
  ingest->add_option("--out", ingest_out, "Unified JSONL output")->required();
  ingest->add_option("--opt", adapter_opts, "Adapter option key=value (repeatable)");

  // linearize
  auto* linearize = app.add_subcommand("linearize", "Render tables as prompt text");
  std::string lin_in, lin_table, lin_delim, lin_vocab;
  std::string lin_format_s = "markdown";
  std::size_t lin_budget = 0;
  linearize->add_option("--in", lin_in, "Unified JSONL input");
  linearize->add_option("--table", lin_table, "CSV/TSV table instead of --in");
  linearize->add_option("--delimiter", lin_delim, "Delimiter for --table (default by extension)");
  linearize->add_option("--format", lin_format_s, "markdown or flatten")
      ->check(CLI::IsMember(kFormats, CLI::ignore_case));
  linearize->add_option("--budget", lin_budget, "Token budget; 0 keeps every row");
  linearize->add_option("--vocab", lin_vocab, "Tokenizer vocabulary file");

  // retrieve
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Rank table fragments against each question");
  std::string ret_in, ret_table, ret_delim, ret_question, ret_scores;
  RetrieverConfig rcfg;
  std::string ret_gran_s = "row";
  retrieve_cmd->add_option("--in", ret_in, "Unified JSONL input");
  retrieve_cmd->add_option("--table", ret_table, "CSV/TSV table instead of --in");
  retrieve_cmd->add_option("--delimiter", ret_delim, "Delimiter for --table");
  retrieve_cmd->add_option("--question", ret_question, "Question for --table");
  retrieve_cmd->add_option("--granularity", ret_gran_s, "row, column, cell or passage")
      ->check(CLI::IsMember(kGranularities, CLI::ignore_case));
  retrieve_cmd->add_option("--topk", rcfg.top_k, "Units to keep")->check(CLI::PositiveNumber);
  retrieve_cmd->add_option("--k1", rcfg.k1, "BM25 k1");
  retrieve_cmd->add_option("--b", rcfg.b, "BM25 b");
  retrieve_cmd->add_flag("--passages", rcfg.include_passages, "Index passages too");
  retrieve_cmd->add_option("--scores", ret_scores, "Precomputed scores JSONL instead of BM25");

  // eval
  auto* eval = app.add_subcommand("eval", "Score predictions against gold");
  std::string pred_path, gold_path, metrics_list = "em,f1,exe,prog";
  bool per_example = false, summary = false;
  eval->add_option("--pred", pred_path, "Predictions JSONL {id, answer, derivation?}")->required();
  eval->add_option("--gold", gold_path, "Unified JSONL gold")->required();
  eval->add_option("--metrics", metrics_list, "Comma list of em, f1, exe, prog");
  eval->add_flag("--per-example", per_example, "Include per-example rows");
  eval->add_flag("--summary", summary, "Also print a text table to stderr");

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmark assembly");
  bench->require_subcommand(1);
  auto* build = bench->add_subcommand("build", "Filter and sample category pools");
  std::string bench_cfg, bench_out, bench_report;
  build->add_option("--config", bench_cfg, "Benchmark config file")->required();
  build->add_option("--out", bench_out, "Benchmark JSONL output");
  build->add_option("--report", bench_report, "Also write the stats report here");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string addr = "127.0.0.1:8080", datasets_cfg, table_dir = "tqk-tables";
  serve->add_option("--addr", addr, "host:port");
  serve->add_option("--datasets", datasets_cfg, "Dataset registry JSON");
  serve->add_option("--tables", table_dir, "Directory for uploaded tables");

  // ask
  auto* ask = app.add_subcommand("ask", "Ask one question through the configured LLM");
  std::string ask_table, ask_in, ask_delim, ask_question, ask_vocab;
  std::size_t ask_index = 0, ask_budget = 4096;
  std::string ask_scheme_s = "direct", ask_format_s = "markdown";
  std::optional<std::size_t> ask_topk;
  std::string ask_gran_s = "row";
  ask->add_option("--table", ask_table, "CSV/TSV table");
  ask->add_option("--in", ask_in, "Unified JSONL instead of --table");
  ask->add_option("--index", ask_index, "Example index within --in");
  ask->add_option("--delimiter", ask_delim, "Delimiter for --table");
  ask->add_option("--question", ask_question, "Question (overrides the example's)");
  ask->add_option("--scheme", ask_scheme_s, "direct, cot or pot")
      ->check(CLI::IsMember(kSchemes, CLI::ignore_case));
  ask->add_option("--format", ask_format_s, "markdown or flatten")
      ->check(CLI::IsMember(kFormats, CLI::ignore_case));
  ask->add_option("--budget", ask_budget, "Prompt token budget");
  ask->add_option("--vocab", ask_vocab, "Tokenizer vocabulary file");
  ask->add_option("--topk", ask_topk, "Retrieve this many units first");
  ask->add_option("--granularity", ask_gran_s, "Retrieval granularity")
      ->check(CLI::IsMember(kGranularities, CLI::ignore_case));

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsage;
  }

  // Values were checked by IsMember; lookups cannot miss.
  const InputFormat lin_format = kFormats.at(to_lower(lin_format_s));
  rcfg.granularity = kGranularities.at(to_lower(ret_gran_s));
  const Scheme ask_scheme = kSchemes.at(to_lower(ask_scheme_s));
  const InputFormat ask_format = kFormats.at(to_lower(ask_format_s));
  const Granularity ask_granularity = kGranularities.at(to_lower(ask_gran_s));

  try {
    if (*ingest) {
      AdapterSpec spec{adapter, {}};
      for (const auto& kv : adapter_opts) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
          err << "--opt expects key=value, got '" << kv << "'\n";
          return kUsage;
        }
        spec.options[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      auto n = convert(spec, ingest_in, ingest_out);
      out << Json{{"adapter", adapter}, {"written", n}, {"out", ingest_out}}.dump() << "\n";
      return kOk;
    }

    if (*linearize) {
      auto examples = load_inputs(lin_in, lin_table, lin_delim, "");
      Tokenizer tok = make_tokenizer(lin_vocab);
      for (const auto& ex : examples) {
        UnifiedTable t = lin_budget ? truncate_rows(ex.table, {lin_budget, tok}, lin_format) : ex.table;
        std::string text = render(t, lin_format);
        out << Json{{"id", ex.id},
                    {"format", to_string(lin_format)},
                    {"text", text},
                    {"tokens", tok.count(text)},
                    {"body_rows", t.body_rows()},
                    {"tokenizer", tok.label()}}
                   .dump()
            << "\n";
      }
      return kOk;
    }

    if (*retrieve_cmd) {
      validate(rcfg);
      auto examples = load_inputs(ret_in, ret_table, ret_delim, ret_question);
      std::optional<ExternalScorer> external;
      if (!ret_scores.empty()) external = ExternalScorer::from_file(ret_scores);
      std::vector<std::vector<Ranked>> ranked;
      if (external) {
        for (const auto& ex : examples) {
          ranked.push_back(retrieve(ex, rcfg, ex.question, external->for_example(ex.id)));
        }
      } else {
        ranked = retrieve_batch(examples, rcfg);
      }
      for (std::size_t i = 0; i < examples.size(); ++i) {
        Json units = Json::array();
        for (const auto& r : ranked[i]) {
          units.push_back({{"locator", locator_to_string(r.unit.locator)},
                           {"score", r.score},
                           {"text", r.unit.text}});
        }
        out << Json{{"id", examples[i].id}, {"granularity", to_string(rcfg.granularity)}, {"units", units}}
                   .dump()
            << "\n";
      }
      return kOk;
    }

    if (*eval) {
      std::vector<Metric> metrics;
      try {
        metrics = parse_metrics(metrics_list);
      } catch (const Error& e) {
        err << e.what() << "\n";
        return kUsage;
      }
      EvalReport report = evaluate_dataset(pred_path, gold_path, metrics);
      out << report_to_json(report, per_example).dump() << "\n";
      if (summary) err << report_to_text(report);
      return kOk;
    }

    if (*build) {
      BenchConfig cfg = load_bench_config(bench_cfg);
      Benchmark b = assemble(cfg);
      if (!bench_out.empty()) save_unified(b.examples, bench_out);
      Json report = stats_to_json(b.report);
      if (!bench_report.empty()) {
        std::ofstream r(bench_report);
        if (!r) throw Error("cannot write " + bench_report);
        r << report.dump(2) << "\n";
      }
      if (bench_out.empty()) {
        for (const auto& ex : b.examples) out << to_jsonl_line(ex) << "\n";
      } else {
        out << report.dump() << "\n";
      }
      return kOk;
    }

    if (*serve) {
      auto colon = addr.rfind(':');
      if (colon == std::string::npos) {
        err << "--addr expects host:port\n";
        return kUsage;
      }
      const std::string host = addr.substr(0, colon);
      int port = 0;
      try {
        port = std::stoi(addr.substr(colon + 1));
      } catch (const std::exception&) {
        err << "--addr expects host:port\n";
        return kUsage;
      }
      ServiceOptions opts;
      opts.table_dir = table_dir;
      if (!datasets_cfg.empty()) opts.datasets = load_dataset_config(datasets_cfg);
      opts.completer = hooks.completer;
      opts.endpoint = endpoint_from_env();
      if (!opts.endpoint && !opts.completer) err << "warning: no LLM endpoint configured; /ask will fail\n";
      Service service(std::move(opts));
      out << Json{{"listening", addr}}.dump() << std::endl;
      if (!service.listen(host, port)) throw Error("cannot listen on " + addr);
      return kOk;
    }

    if (*ask) {
      auto examples = load_inputs(ask_in, ask_table, ask_delim, ask_question);
      if (ask_index >= examples.size()) {
        throw Error("index " + std::to_string(ask_index) + " out of range 0.." +
                    std::to_string(examples.size() - 1));
      }
      QAExample ex = examples[ask_index];
      if (!ask_question.empty()) ex.question = ask_question;
      if (trim(ex.question).empty()) {
        err << "--question is required\n";
        return kUsage;
      }
      PromptSpec spec;
      spec.scheme = ask_scheme;
      spec.input_format = ask_format;
      spec.budget = TokenBudget{ask_budget, make_tokenizer(ask_vocab)};
      std::optional<RetrieverConfig> retriever;
      if (ask_topk) {
        RetrieverConfig cfg;
        cfg.granularity = ask_granularity;
        cfg.top_k = *ask_topk;
        validate(cfg);
        retriever = cfg;
      }
      std::shared_ptr<Completer> llm = hooks.completer;
      if (!llm) {
        auto ep = endpoint_from_env();
        if (!ep) throw StageError("auth", "endpoint not configured (set TQK_LLM_BASE_URL and TQK_LLM_API_KEY)");
        llm = std::make_shared<LlmClient>(*ep);
      }
      AskResult r = answer_question(ex, spec, retriever, *llm);
      Json j = {{"id", ex.id},
                {"answer", r.answer.value},
                {"format", to_string(r.answer.format)},
                {"prompt_id", r.prompt_id},
                {"flags", r.flags}};
      if (r.answer.derivation) j["derivation"] = *r.answer.derivation;
      out << j.dump() << "\n";
      return kOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  err << app.help();
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tqk::cli
