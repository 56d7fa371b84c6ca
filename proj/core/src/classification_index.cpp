#include "sigcompose/classification_index.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "sigcompose/error.hpp"

namespace sigcompose {

namespace {

std::string format_param(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return detail::format_number(value);
}

double parse_param(const std::string& key, const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  auto v = detail::parse_number(text);
  if (!v) throw IndexFormatError("manifest key '" + key + "' has non-numeric value '" + text + "'");
  return *v;
}

int parse_int(const std::string& what, std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw IndexFormatError(what + " is not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::vector<DecisionTree> build_trees(const Dataset& dataset, const SlicePlan& plan,
                                      const TreeParams& params, unsigned threads) {
  params.validate();
  const std::size_t count = plan.slices.size();
  std::vector<std::optional<DecisionTree>> built(count);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      const auto& slice = plan.slices[i];
      auto records = label_slice(dataset, slice);
      if (records.size() < static_cast<std::size_t>(params.min_support)) {
        spdlog::info("slice {} has {} complete records (min_support {}); no rows emitted",
                     slice.slice_id, records.size(), params.min_support);
        continue;
      }
      built[i] = prune_noisy(fit_tree(records, params), params.variability_threshold);
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::vector<DecisionTree> trees;
  for (auto& t : built) {
    if (t) trees.push_back(std::move(*t));
  }
  return trees;
}

ClassificationTable table_from_trees(const std::vector<DecisionTree>& trees, IndexManifest manifest) {
  ClassificationTable table;
  table.manifest = std::move(manifest);
  for (const auto& tree : trees) {
    for (const auto* leaf : tree.leaves()) {
      if (leaf->pruned) continue;
      for (const auto& m : leaf->members) table.rows.push_back({tree.slice_id, leaf->name, m.fund_id});
    }
  }
  std::sort(table.rows.begin(), table.rows.end());
  return table;
}

ClassificationTable build_index(const Dataset& dataset, const SlicePlan& plan,
                                const TreeParams& params, unsigned threads) {
  auto trees = build_trees(dataset, plan, params, threads);
  return table_from_trees(trees, IndexManifest{plan, params, dataset_fingerprint(dataset)});
}

void save_index(const ClassificationTable& table, std::ostream& out) {
  const auto& m = table.manifest;
  out << kIndexMagic << ' ' << kIndexVersion << '\n';
  for (const auto& s : m.plan.slices) {
    out << "plan=slice:" << s.slice_id << ':' << s.start.value << ':' << s.length << '\n';
  }
  out << "penalty=" << format_param(m.params.complexity_penalty) << '\n'
      << "min_support=" << m.params.min_support << '\n'
      << "split_mode=" << to_string(m.params.split_mode) << '\n'
      << "variability_threshold=" << format_param(m.params.variability_threshold) << '\n'
      << "fingerprint=" << m.fingerprint << '\n'
      << "rows=" << table.rows.size() << '\n'
      << '\n';
  for (const auto& r : table.rows) {
    out << r.slice_id << ',' << r.node_name << ',' << r.fund_id << '\n';
  }
}

ClassificationTable load_index(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw IndexFormatError("empty index file");
  {
    const std::string magic = std::string(kIndexMagic) + ' ';
    if (line.rfind(magic, 0) != 0) throw IndexFormatError("not a sigcompose index (bad magic line)");
    const auto version = line.substr(magic.size());
    if (version != kIndexVersion) {
      throw IndexFormatError("unsupported index version '" + version + "' (expected " +
                             kIndexVersion + ")");
    }
  }

  ClassificationTable table;
  auto& m = table.manifest;
  std::set<std::string> seen;
  std::optional<std::size_t> declared_rows;
  bool terminated = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      terminated = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IndexFormatError("manifest line " + std::to_string(line_no) + " is not key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key != "plan" && !seen.insert(key).second) {
      throw IndexFormatError("duplicate manifest key '" + key + "'");
    }
    if (key == "plan") {
      const auto parts = split(value, ':');
      if (parts.size() != 4 || parts[0] != "slice") {
        throw IndexFormatError("malformed plan entry '" + value + "'");
      }
      Slice s{parse_int("slice id", parts[1]), MonthIndex{parse_int("slice start", parts[2])},
              parse_int("slice length", parts[3])};
      if (!m.plan.slices.empty() && m.plan.slices.back().end() != s.start) {
        throw IndexFormatError("plan slices are not contiguous at slice " + std::to_string(s.slice_id));
      }
      m.plan.slices.push_back(s);
    } else if (key == "penalty") {
      m.params.complexity_penalty = parse_param(key, value);
    } else if (key == "min_support") {
      m.params.min_support = parse_int("min_support", value);
    } else if (key == "split_mode") {
      try {
        m.params.split_mode = parse_split_mode(value);
      } catch (const InvalidArgument& e) {
        throw IndexFormatError(e.what());
      }
    } else if (key == "variability_threshold") {
      m.params.variability_threshold = parse_param(key, value);
    } else if (key == "fingerprint") {
      m.fingerprint = value;
    } else if (key == "rows") {
      declared_rows = static_cast<std::size_t>(parse_int("rows", value));
    } else {
      throw IndexFormatError("unknown manifest key '" + key + "'");
    }
  }
  if (!terminated) throw IndexFormatError("unexpected end of manifest");
  for (const char* required : {"penalty", "min_support", "split_mode", "variability_threshold", "rows"}) {
    if (!seen.count(required)) throw IndexFormatError(std::string("manifest key '") + required + "' absent");
  }
  if (m.fingerprint.empty()) throw IndexFormatError("fingerprint absent from manifest");
  if (m.plan.slices.empty()) throw IndexFormatError("manifest declares no plan slices");
  try {
    m.params.validate();
  } catch (const InvalidArgument& e) {
    throw IndexFormatError(std::string("manifest params invalid: ") + e.what());
  }

  table.rows.reserve(*declared_rows);
  while (std::getline(in, line)) {
    ++line_no;
    if (in.eof()) {
      throw IndexFormatError("unexpected end of rows (line " + std::to_string(line_no) +
                             " is truncated)");
    }
    if (table.rows.size() == *declared_rows) {
      throw IndexFormatError("trailing data after " + std::to_string(*declared_rows) + " rows");
    }
    const auto first = line.find(',');
    const auto second = first == std::string::npos ? first : line.find(',', first + 1);
    if (second == std::string::npos) {
      throw IndexFormatError("corrupted row at line " + std::to_string(line_no));
    }
    ClassificationRow row{parse_int("row slice id", std::string_view(line).substr(0, first)),
                          line.substr(first + 1, second - first - 1), line.substr(second + 1)};
    if (row.node_name.empty() || row.fund_id.empty() || !m.plan.find(row.slice_id)) {
      throw IndexFormatError("corrupted row at line " + std::to_string(line_no));
    }
    if (!table.rows.empty() && !(table.rows.back() < row)) {
      throw IndexFormatError("rows out of order at line " + std::to_string(line_no));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.size() != *declared_rows) {
    throw IndexFormatError("unexpected end of rows (expected " + std::to_string(*declared_rows) +
                           ", got " + std::to_string(table.rows.size()) + ")");
  }
  return table;
}

void save_index_file(const ClassificationTable& table, const std::string& path) {
  // Write beside the target then rename, so readers never see a partial file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write index file " + tmp);
    save_index(table, out);
    out.flush();
    if (!out) throw IoError("failed writing index file " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move index into place at " + path + ": " + ec.message());
}

ClassificationTable load_index_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index file " + path);
  return load_index(in);
}

IndexStats index_stats(const ClassificationTable& table) {
  IndexStats stats;
  stats.row_count = table.rows.size();
  std::set<std::string> funds;
  std::map<int, std::set<std::string>> leaves;
  for (const auto& r : table.rows) {
    funds.insert(r.fund_id);
    leaves[r.slice_id].insert(r.node_name);
  }
  stats.funds_covered = funds.size();
  stats.slices_covered = leaves.size();
  for (const auto& [slice, names] : leaves) stats.leaves_per_slice[slice] = names.size();
  return stats;
}

void check_fingerprint(const ClassificationTable& table, const Dataset& dataset) {
  const auto actual = dataset_fingerprint(dataset);
  if (actual != table.manifest.fingerprint) {
    throw FingerprintMismatch("index fingerprint " + table.manifest.fingerprint +
                              " does not match dataset fingerprint " + actual);
  }
}

}  // namespace sigcompose
