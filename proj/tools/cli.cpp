#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "sigcompose/classification_index.hpp"
#include "sigcompose/error.hpp"
#include "sigcompose/evaluation.hpp"
#include "sigcompose/ingestion.hpp"
#include "sigcompose/search_service.hpp"
#include "sigcompose/signal_composition.hpp"

namespace sigcompose::cli {

namespace {

// Input that could not be read or parsed; message already carries the path.
class DataFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string env_name(const std::string& long_flag) {
  std::string name = "SIGCOMPOSE_";
  for (char c : long_flag.substr(2)) {
    name.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return name;
}

// Every option takes a long name and a matching SIGCOMPOSE_* variable;
// an explicit flag wins over the environment, which wins over the default.
template <typename T>
CLI::Option* option(CLI::App* app, const std::string& flag, T& value, const std::string& help) {
  return app->add_option(flag, value, help)->envname(env_name(flag));
}

std::string fmt_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

Dataset load_dataset(const std::string& returns_path, const std::string& meta_path, Epoch epoch) {
  Dataset series;
  try {
    series = load_returns_file(returns_path, epoch);
  } catch (const Error& e) {
    throw DataFailure(e.what());
  }
  std::map<std::string, FundMeta> meta;
  if (!meta_path.empty()) {
    try {
      meta = load_meta_file(meta_path);
    } catch (const Error& e) {
      throw DataFailure(e.what());
    }
  }
  return merge(std::move(series), std::move(meta));
}

ClassificationTable load_table(const std::string& path) {
  try {
    return load_index_file(path);
  } catch (const IndexFormatError& e) {
    throw DataFailure(path + ": " + e.what());
  } catch (const IoError& e) {
    throw DataFailure(e.what());
  }
}

Epoch parse_epoch(const std::string& text) {
  const auto m = parse_month(text, Epoch{0, 1});
  return Epoch{m.value / 12, m.value % 12 + 1};
}

struct DataOptions {
  std::string returns;
  std::string meta;
  std::string epoch = "2000-01";

  void add(CLI::App* app, bool returns_required) {
    auto* r = option(app, "--returns", returns, "Returns file (fund_id,YYYY-MM,...)");
    if (returns_required) r->required();
    option(app, "--meta", meta, "Fund metadata file");
    option(app, "--epoch", epoch, "Month that month indices count from (YYYY-MM)")->capture_default_str();
  }
  Dataset load() const { return load_dataset(returns, meta, parse_epoch(epoch)); }
};

struct TreeOptions {
  TreeParams params;
  std::string split_mode = "threshold";
  int slice_length = 6;

  explicit TreeOptions(TreeParams defaults = {}) : params(defaults), split_mode(to_string(defaults.split_mode)) {}

  void add(CLI::App* app) {
    option(app, "--slice-length", slice_length, "Months per slice")->capture_default_str();
    option(app, "--complexity-penalty", params.complexity_penalty,
           "Minimum SSE reduction, as a fraction of root SSE, for a split")
        ->capture_default_str();
    option(app, "--min-support", params.min_support, "Minimum members per node (>= 2)")->capture_default_str();
    option(app, "--split-mode", split_mode, "threshold or interval")->capture_default_str();
    option(app, "--variability-threshold", params.variability_threshold,
           "Prune leaves whose label range exceeds this (percent points)")
        ->capture_default_str();
  }
  TreeParams resolve() {
    params.split_mode = parse_split_mode(split_mode);
    params.validate();
    return params;
  }
};

struct SpecOptions {
  SyntheticSpec spec;
  std::string start = "2000-01";

  void add(CLI::App* app) {
    option(app, "--clusters", spec.clusters, "Number of return factors")->capture_default_str();
    option(app, "--funds-per-cluster", spec.funds_per_cluster, "Funds per factor")->capture_default_str();
    option(app, "--months", spec.months, "Months of history")->capture_default_str();
    option(app, "--factor-volatility", spec.factor_volatility, "Factor return s.d. (percent)")
        ->capture_default_str();
    option(app, "--noise-volatility", spec.noise_volatility, "Idiosyncratic s.d. (percent)")
        ->capture_default_str();
    option(app, "--seed", spec.seed, "Random seed")->capture_default_str();
    option(app, "--start", start, "First month (YYYY-MM)")->capture_default_str();
  }
  SyntheticSpec resolve() {
    spec.start = parse_month(start, spec.epoch);
    spec.validate();
    return spec;
  }
};

void write_file(const std::string& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  writer(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

int cmd_ingest_check(const DataOptions& data, bool porcelain, std::ostream& out) {
  const auto dataset = data.load();
  std::size_t values = 0;
  for (const auto& [id, s] : dataset.series) values += s.returns.size();
  std::size_t meta_only = 0;
  for (const auto& [id, m] : dataset.meta) meta_only += dataset.series.count(id) ? 0 : 1;
  const auto fingerprint = dataset_fingerprint(dataset);
  const auto first = format_month(dataset.month_range.first, dataset.epoch);
  const auto last = format_month(dataset.month_range.last, dataset.epoch);
  if (porcelain) {
    out << "funds\t" << dataset.series.size() << '\n'
        << "meta_only\t" << meta_only << '\n'
        << "months\t" << dataset.month_range.length() << '\n'
        << "first\t" << first << '\n'
        << "last\t" << last << '\n'
        << "values\t" << values << '\n'
        << "fingerprint\t" << fingerprint << '\n';
  } else {
    out << "ok: " << dataset.series.size() << " funds with returns, " << meta_only
        << " metadata-only, " << dataset.month_range.length() << " months (" << first << ".." << last
        << "), " << values << " monthly values\n"
        << "fingerprint " << fingerprint << '\n';
  }
  return kSuccess;
}

int cmd_build(const DataOptions& data, TreeOptions& tree, const std::string& out_path, unsigned threads,
              const std::string& dump_path, bool porcelain, std::ostream& out) {
  const auto params = tree.resolve();
  const auto dataset = data.load();
  const auto plan = build_slice_plan(dataset.month_range, tree.slice_length);
  const auto trees = build_trees(dataset, plan, params, threads);
  const auto table = table_from_trees(trees, IndexManifest{plan, params, dataset_fingerprint(dataset)});
  save_index_file(table, out_path);
  if (!dump_path.empty()) {
    write_file(dump_path, [&](std::ostream& o) {
      for (const auto& t : trees) dump_tree(t, o);
    });
  }

  const auto stats = index_stats(table);
  if (porcelain) {
    out << "stats\t" << stats.row_count << '\t' << stats.slices_covered << '\t' << stats.funds_covered << '\n';
    for (const auto& [slice, leaves] : stats.leaves_per_slice) out << "slice\t" << slice << '\t' << leaves << '\n';
  } else {
    out << "built " << out_path << ": rows=" << stats.row_count << " slices=" << stats.slices_covered << "/"
        << plan.slices.size() << " funds=" << stats.funds_covered << '\n';
    for (const auto& [slice, leaves] : stats.leaves_per_slice) {
      out << "  slice " << slice << ": " << leaves << " retained leaves\n";
    }
  }
  return kSuccess;
}

int cmd_query(const DataOptions& data, const std::string& index_path, const std::string& fund,
              const std::string& from, const std::string& to, std::size_t k, bool porcelain, std::ostream& out) {
  const auto dataset = data.load();
  const auto table = load_table(index_path);
  check_fingerprint(table, dataset);

  const auto plan_range = table.manifest.plan.range();
  QueryRange range{plan_range.first, plan_range.last};
  if (!from.empty()) range.from = parse_month(from, dataset.epoch);
  if (!to.empty()) range.to = parse_month(to, dataset.epoch);
  if (range.to < range.from) throw InvalidArgument("--to precedes --from");

  const auto results = top_k(compose(table, dataset, fund, range), k);
  const auto* query_meta = dataset.find_meta(fund);

  const char* sep = porcelain ? "\t" : "  ";
  if (!porcelain) {
    out << "# similar to " << fund << " over " << format_month(range.from, dataset.epoch) << ".."
        << format_month(range.to, dataset.epoch) << " ("
        << slices_for_range(table.manifest.plan, range).size() << " slices)\n";
  }
  out << "rank" << sep << "fund_id" << sep << "name" << sep << "counter" << sep << "r" << sep << "benefits\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const auto* meta = dataset.find_meta(r.fund_id);
    std::string benefits;
    if (query_meta && meta) {
      for (const auto& b : compute_benefits(*query_meta, *meta)) {
        if (!benefits.empty()) benefits += "; ";
        benefits += b.display;
      }
    }
    out << (i + 1) << sep << r.fund_id << sep << (meta ? meta->name : r.fund_id) << sep << r.counter << sep
        << (r.tiebreak_correlation ? fmt_number(*r.tiebreak_correlation) : "-") << sep << benefits << '\n';
  }
  return kSuccess;
}

int cmd_eval(SpecOptions& spec, TreeOptions& tree, std::size_t k, const std::string& report_path,
             bool porcelain, std::ostream& out) {
  EvalConfig config;
  config.spec = spec.resolve();
  config.params = tree.resolve();
  config.slice_length = tree.slice_length;
  config.k = k;
  if (k < 1) throw InvalidArgument("--k must be at least 1");

  const auto report = run_evaluation(config);
  write_file(report_path, [&](std::ostream& o) { write_eval_report(report, o); });

  if (porcelain) {
    out << "precision_at_k\t" << k << '\t' << report.mean_precision << '\n'
        << "mean_r_top\t" << report.mean_r_top << '\n'
        << "mean_r_random\t" << report.mean_r_random << '\n'
        << "near_baseline\t" << (report.near_baseline ? "yes" : "no") << '\n';
  } else {
    out << "precision@" << k << " = " << fmt_number(report.mean_precision) << " (baseline "
        << fmt_number(report.baseline_precision) << ")\n"
        << "mean r top-" << config.correlation_top << " = " << fmt_number(report.mean_r_top)
        << ", random pairs = " << fmt_number(report.mean_r_random) << ", margin "
        << fmt_number(report.r_margin()) << '\n';
    if (report.near_baseline) out << "warning: precision is near the random baseline\n";
    out << "report written to " << report_path << '\n';
  }
  return kSuccess;
}

int cmd_gen(SpecOptions& spec, const std::string& returns_path, const std::string& meta_path, std::ostream& out) {
  const auto dataset = generate_synthetic(spec.resolve());
  write_file(returns_path, [&](std::ostream& o) { write_returns(dataset, o); });
  if (!meta_path.empty()) write_file(meta_path, [&](std::ostream& o) { write_meta(dataset.meta, o); });
  out << "wrote " << dataset.series.size() << " funds x " << dataset.month_range.length() << " months to "
      << returns_path << '\n';
  return kSuccess;
}

int cmd_serve(const DataOptions& data, const std::string& index_path, const std::string& bind,
              const ServiceConfig& config, std::ostream& out) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw InvalidArgument("--bind must be host:port");
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw InvalidArgument("--bind port is not a number");
  }
  const std::string host = bind.substr(0, colon);

  auto dataset = std::make_shared<const Dataset>(data.load());
  auto table = std::make_shared<const ClassificationTable>(load_table(index_path));
  auto service = std::make_shared<const SearchService>(dataset, table, config);

  // Block termination signals before the listener threads start so that
  // only the sigwait below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &signals, &previous);
  struct MaskRestore {
    sigset_t mask;
    ~MaskRestore() { pthread_sigmask(SIG_SETMASK, &mask, nullptr); }
  } restore{previous};

  auto handle = serve(service, host, port);
  out << "listening on " << host << ':' << handle->port() << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  spdlog::info("signal {} received, shutting down", received);
  handle->stop();
  handle->wait();
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hedge-fund similarity search: self-labelled slice trees and signal composition"};
  app.require_subcommand(1);
  app.fallthrough();
  bool porcelain = false;
  app.add_flag("--porcelain", porcelain, "Tab-separated, one record per line output");

  DataOptions check_data;
  auto* check = app.add_subcommand("ingest-check", "Parse and validate input files");
  check_data.add(check, true);

  DataOptions build_data;
  TreeOptions build_tree;
  std::string build_out;
  unsigned threads = 0;
  std::string dump_path;
  auto* build = app.add_subcommand("build", "Build the classification index");
  build_data.add(build, true);
  build_tree.add(build);
  option(build, "--out", build_out, "Index file to write")->required();
  option(build, "--threads", threads, "Worker threads (0 = hardware)")->capture_default_str();
  option(build, "--dump-trees", dump_path, "Also write every tree as indented text");

  DataOptions query_data;
  std::string query_index, query_fund, query_from, query_to;
  std::size_t query_k = 10;
  auto* query = app.add_subcommand("query", "Rank funds similar to one fund");
  query_data.add(query, true);
  option(query, "--index", query_index, "Index file")->required();
  option(query, "--fund", query_fund, "Query fund id")->required();
  option(query, "--from", query_from, "First month (YYYY-MM); default plan start");
  option(query, "--to", query_to, "Last month (YYYY-MM); default plan end");
  option(query, "--k", query_k, "Maximum results")->capture_default_str();

  DataOptions serve_data;
  std::string serve_index;
  std::string bind = "127.0.0.1:8080";
  ServiceConfig service_config;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP search API");
  serve_data.add(serve_cmd, true);
  option(serve_cmd, "--index", serve_index, "Index file")->required();
  option(serve_cmd, "--bind", bind, "host:port to listen on")->capture_default_str();
  option(serve_cmd, "--default-k", service_config.default_k, "Results when k is omitted")->capture_default_str();
  option(serve_cmd, "--page-size", service_config.page_size, "Funds per /funds page")->capture_default_str();
  option(serve_cmd, "--static-dir", service_config.static_dir, "Directory of UI assets served at /");

  SpecOptions eval_spec;
  TreeOptions eval_tree(default_eval_params());
  std::size_t eval_k = 5;
  std::string report_path = "eval_report.csv";
  auto* eval = app.add_subcommand("eval", "Generate synthetic funds, build, query all, and score");
  eval_spec.add(eval);
  eval_tree.add(eval);
  option(eval, "--k", eval_k, "Results per query scored by precision@k")->capture_default_str();
  option(eval, "--report", report_path, "Evaluation report path")->capture_default_str();

  SpecOptions gen_spec;
  std::string gen_returns, gen_meta;
  auto* gen = app.add_subcommand("gen", "Write a synthetic clustered dataset");
  gen_spec.add(gen);
  option(gen, "--out-returns", gen_returns, "Returns file to write")->required();
  option(gen, "--out-meta", gen_meta, "Metadata file to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*check) return cmd_ingest_check(check_data, porcelain, out);
    if (*build) return cmd_build(build_data, build_tree, build_out, threads, dump_path, porcelain, out);
    if (*query) return cmd_query(query_data, query_index, query_fund, query_from, query_to, query_k, porcelain, out);
    if (*serve_cmd) return cmd_serve(serve_data, serve_index, bind, service_config, out);
    if (*eval) return cmd_eval(eval_spec, eval_tree, eval_k, report_path, porcelain, out);
    if (*gen) return cmd_gen(gen_spec, gen_returns, gen_meta, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DataFailure& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const FingerprintMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const NotFound& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}

}  // namespace sigcompose::cli
