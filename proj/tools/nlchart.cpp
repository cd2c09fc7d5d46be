#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "nlchart/corpus.hpp"
#include "nlchart/error.hpp"
#include "nlchart/pipeline.hpp"
#include "nlchart/service.hpp"
#include "nlchart/suggest.hpp"

using namespace nlchart;

namespace {

std::shared_ptr<const Dataset> load_dataset(const std::string& path) {
  if (path.empty()) return std::make_shared<const Dataset>(Dataset::sample());
  return std::make_shared<const Dataset>(Dataset::load_csv(path));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(Errc::kIo, "cannot write " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void print_outcome(std::ostream& out, const Outcome& outcome) {
  for (const auto& r : outcome.results) {
    out << "  " << to_string(r.status) << "  " << serialize_action(r.action);
    if (!r.message.empty()) out << "  (" << r.message << ")";
    out << '\n';
  }
  for (const auto& r : outcome.recommendations) {
    out << "  " << to_string(r.status) << "  " << serialize_action(r.action) << "  (engine default)\n";
  }
}

struct ReplFlags {
  std::string data;
  std::string out;
  bool explain = false;
};

int run_repl(const ReplFlags& flags) {
  auto dataset = load_dataset(flags.data);
  auto ws = std::make_unique<Workspace>(dataset);
  auto save = [&] {
    if (flags.out.empty()) return;
    write_text(flags.out, ws->session().export_spec_text(ws->session().active_chart().id));
  };
  std::string line;
  while (std::getline(std::cin, line)) {
    auto cmd = trim(line);
    if (cmd.empty()) continue;
    if (cmd == ":quit" || cmd == ":q") return 0;
    try {
      if (cmd.starts_with(":replay")) {
        auto path = trim(cmd.substr(7));
        auto history = nlohmann::json::parse(read_text(path));
        ws = std::make_unique<Workspace>(dataset, Session::replay(dataset, history));
        std::cout << "replayed " << ws->session().history().size() << " entries, version "
                  << ws->session().version() << '\n';
        save();
      } else if (cmd.starts_with(":history")) {
        auto path = trim(cmd.substr(8));
        auto text = ws->session().history_json().dump(2) + "\n";
        if (path.empty()) std::cout << text;
        else write_text(path, text);
      } else if (cmd == ":spec") {
        std::cout << ws->session().export_spec_text(ws->session().active_chart().id);
      } else if (cmd.starts_with(":")) {
        std::cout << "commands: :quit  :replay <file>  :history [file]  :spec\n";
      } else {
        const auto before = ws->session().version();
        auto turn = ws->say(cmd);
        if (flags.explain) std::cout << turn.parse.explain();
        if (turn.outcome.results.empty()) std::cout << "  no editing action recognized\n";
        print_outcome(std::cout, turn.outcome);
        if (ws->session().version() != before) save();
      }
    } catch (const std::exception& e) {
      std::cout << "  error: " << e.what() << '\n';
    }
  }
  return 0;
}

std::atomic<httplib::Server*> g_server{nullptr};

extern "C" void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

int run_serve(const std::string& data_dir, const std::string& host, int port) {
  ServiceOptions options;
  options.data_dir = data_dir;
  Service service(options);
  httplib::Server server;
  service.mount(server);
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cerr << "listening on http://" << host << ":" << port << '\n';
  bool ok = server.listen(host, port);
  g_server = nullptr;
  service.snapshot();
  if (!ok && port != 0) {
    std::cerr << "could not listen on port " << port << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural-language chart editing: parse utterances into editing actions and apply them."};
  app.require_subcommand(1);

  ReplFlags repl;
  auto* repl_cmd = app.add_subcommand("repl", "Edit a chart interactively, one utterance per line");
  repl_cmd->add_option("--data", repl.data, "CSV file (default: bundled car sales)");
  repl_cmd->add_option("--out", repl.out, "Write the chart spec here after every change");
  repl_cmd->add_flag("--explain", repl.explain, "Print abstraction, tags and synthesis per line");

  std::string serve_dir, host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--data", serve_dir, "Directory for uploaded CSVs and session snapshots");
  serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "Bind address");

  std::string utterance, parse_data;
  bool parse_explain = false, parse_json = false;
  auto* parse_cmd = app.add_subcommand("parse", "Parse one utterance and print its actions");
  parse_cmd->add_option("utterance", utterance)->required();
  parse_cmd->add_option("--data", parse_data, "CSV file (default: bundled car sales)");
  parse_cmd->add_flag("--explain", parse_explain, "Print every pipeline stage");
  parse_cmd->add_flag("--json", parse_json, "Print the full parse as JSON");

  std::string corpus_data, corpus_out;
  std::size_t count = 2000;
  std::uint64_t seed = 42;
  auto* corpus_cmd = app.add_subcommand("corpus", "Expand the shipped templates into gold records (JSON lines)");
  corpus_cmd->add_option("--data", corpus_data, "CSV file (default: bundled car sales)");
  corpus_cmd->add_option("--out", corpus_out, "Output file (default: stdout)");
  corpus_cmd->add_option("--count", count, "Number of records");
  corpus_cmd->add_option("--seed", seed, "Expansion seed");

  std::string bench_data;
  auto* bench_cmd = app.add_subcommand("benchmark", "Score the reference tagger on an expanded corpus");
  bench_cmd->add_option("--data", bench_data, "CSV file (default: bundled car sales)");
  bench_cmd->add_option("--count", count, "Number of records");
  bench_cmd->add_option("--seed", seed, "Expansion seed");

  std::string prefix, phrases_out;
  std::size_t k = 10;
  auto* suggest_cmd = app.add_subcommand("suggest", "Complete a phrase prefix");
  suggest_cmd->add_option("prefix", prefix)->required();
  suggest_cmd->add_option("-k", k, "Maximum completions");
  auto* phrases_cmd = app.add_subcommand("phrases", "Rebuild the phrase list from the shipped templates");
  phrases_cmd->add_option("--out", phrases_out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*repl_cmd) return run_repl(repl);
    if (*serve_cmd) return run_serve(serve_dir, host, port);
    if (*parse_cmd) {
      Parser parser(load_dataset(parse_data));
      auto p = parser.parse(utterance);
      if (parse_json) {
        std::cout << p.to_json().dump(2) << '\n';
      } else if (parse_explain) {
        std::cout << p.explain();
      } else {
        for (const auto& a : p.sequence.serialized()) std::cout << a << '\n';
      }
      return 0;
    }
    if (*corpus_cmd) {
      auto dataset = load_dataset(corpus_data);
      auto records = expand(builtin_templates(), *dataset, RuleTable::builtin(), count, seed);
      std::ostringstream out;
      for (const auto& r : records) out << r.to_json().dump() << '\n';
      if (corpus_out.empty()) std::cout << out.str();
      else write_text(corpus_out, out.str());
      return 0;
    }
    if (*bench_cmd) {
      auto dataset = load_dataset(bench_data);
      auto records = expand(builtin_templates(), *dataset, RuleTable::builtin(), count, seed);
      auto report = run_benchmark(ReferenceTagger(), records, EntityIndex::build(*dataset));
      std::cout << report.to_json().dump(2) << '\n';
      return 0;
    }
    if (*suggest_cmd) {
      for (const auto& s : SuggestionIndex::builtin().suggest(prefix, k)) {
        std::cout << s.phrase << '\t' << s.frequency << '\n';
      }
      return 0;
    }
    if (*phrases_cmd) {
      auto index = SuggestionIndex::from_templates(builtin_templates(), RuleTable::builtin());
      // one entry per line keeps diffs of the shipped list readable
      std::ostringstream out;
      out << "{\"schema\": \"nlchart-phrases\", \"version\": \"1.0\", \"phrases\": [\n";
      auto ranked = index.ranked();
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        nlohmann::json e{{"frequency", ranked[i].frequency}, {"phrase", ranked[i].phrase}};
        out << "  " << e.dump(-1, ' ', false) << (i + 1 < ranked.size() ? "," : "") << '\n';
      }
      out << "]}\n";
      if (phrases_out.empty()) std::cout << out.str();
      else write_text(phrases_out, out.str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
