#include "sigcompose/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "csv.hpp"
#include "sigcompose/error.hpp"

namespace sigcompose {

namespace {

// Gaussian draws from the standard-mandated mt19937_64 stream via
// Box-Muller, so output is identical across standard libraries.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(double sd) {
    const double u1 = uniform();
    const double u2 = uniform();
    return sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

double round_to(double value, double step) { return std::round(value / step) * step; }

double compounded(const std::vector<double>& tail) {
  double growth = 1.0;
  for (double r : tail) growth *= 1.0 + r / 100.0;
  return round_to((growth - 1.0) * 100.0, 0.01);
}

FundMeta synthetic_meta(const std::string& id, int cluster, int index, const std::vector<double>& returns,
                        GaussianSource& rng) {
  static const char* kCategories[] = {"Global Equity",     "Emerging Market Equity", "Global Debt",
                                      "Multi-strategy",    "Corporate Actions",      "Europe Equity",
                                      "U.S. Equity",       "Fund of Funds"};
  static const char* kDomiciles[] = {"United States", "Cayman Islands", "Jersey", "Cyprus",
                                     "Netherlands Antilles", "Luxembourg"};
  FundMeta m;
  m.fund_id = id;
  char name[64];
  std::snprintf(name, sizeof name, "Synthetic Cluster %d Fund %d", cluster, index);
  m.name = name;
  m.category = kCategories[rng.index(std::size(kCategories))];
  m.domicile = kDomiciles[rng.index(std::size(kDomiciles))];
  m.management_fee = 0.5 + 0.5 * static_cast<double>(rng.index(4));
  m.performance_fee = 10.0 + 5.0 * static_cast<double>(rng.index(3));
  if (rng.uniform() < 0.8) m.redemption_fee = static_cast<double>(rng.index(3));

  const auto tail = [&](std::size_t n) {
    n = std::min(n, returns.size());
    return std::vector<double>(returns.end() - static_cast<std::ptrdiff_t>(n), returns.end());
  };
  m.trailing_returns.m1 = round_to(returns.back(), 0.01);
  m.trailing_returns.m3 = compounded(tail(3));
  m.trailing_returns.m6 = compounded(tail(6));
  m.trailing_returns.y1 = compounded(tail(12));
  if (returns.size() >= 36) {
    const double total = compounded(tail(36));
    m.trailing_returns.y3 = round_to((std::cbrt(1.0 + total / 100.0) - 1.0) * 100.0, 0.01);
  }

  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(returns.size());
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  if (returns.size() > 1 && var > 0.0) {
    const double sd = std::sqrt(var / static_cast<double>(returns.size() - 1));
    m.sharpe_ratio = round_to(mean / sd * std::sqrt(12.0), 0.01);
  }
  m.extra_fields.emplace_back("Base Currency", "US Dollar");
  return m;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (clusters < 1 || funds_per_cluster < 1 || months < 1) {
    throw InvalidArgument("synthetic clusters, funds_per_cluster and months must be >= 1");
  }
  if (!(factor_volatility >= 0.0) || !(noise_volatility >= 0.0) || !std::isfinite(factor_volatility) ||
      !std::isfinite(noise_volatility)) {
    throw InvalidArgument("synthetic volatilities must be finite and >= 0");
  }
  if (start.value < 0) throw InvalidArgument("synthetic start month precedes epoch");
}

std::string synthetic_fund_id(int cluster, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "C%02dF%03d", cluster, index);
  return buf;
}

std::optional<int> synthetic_cluster_of(const std::string& fund_id) {
  int cluster = 0;
  int index = 0;
  char tail = 0;
  if (std::sscanf(fund_id.c_str(), "C%dF%d%c", &cluster, &index, &tail) != 2) return std::nullopt;
  return cluster;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  GaussianSource returns_rng(spec.seed);
  GaussianSource meta_rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);

  Dataset dataset;
  dataset.epoch = spec.epoch;
  dataset.month_range = {spec.start, spec.start + (spec.months - 1)};

  std::map<std::string, FundMeta> meta;
  const auto n_months = static_cast<std::size_t>(spec.months);
  for (int c = 1; c <= spec.clusters; ++c) {
    std::vector<double> factor(n_months);
    for (auto& f : factor) f = returns_rng.normal(spec.factor_volatility);
    for (int i = 1; i <= spec.funds_per_cluster; ++i) {
      const auto id = synthetic_fund_id(c, i);
      ReturnSeries series{id, {}};
      std::vector<double> values(n_months);
      for (std::size_t m = 0; m < n_months; ++m) {
        // Micro-percent precision keeps the returns file compact.
        values[m] = round_to(factor[m] + returns_rng.normal(spec.noise_volatility), 1e-6);
        series.returns.emplace(spec.start + static_cast<int>(m), values[m]);
      }
      dataset.series.emplace(id, std::move(series));
      meta.emplace(id, synthetic_meta(id, c, i, values, meta_rng));
    }
  }
  return merge(std::move(dataset), std::move(meta));
}

double precision_at_k(const std::vector<SimilarityResult>& results, const std::string& query_fund,
                      const ClusterOf& cluster_of, std::size_t k) {
  if (k < 1) throw InvalidArgument("precision_at_k needs k >= 1");
  const std::size_t n = std::min(k, results.size());
  if (n == 0) return 0.0;
  const auto target = cluster_of(query_fund);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = cluster_of(results[i].fund_id);
    if (target && c && *c == *target) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

TreeParams default_eval_params() {
  TreeParams p;
  p.complexity_penalty = 0.0;
  p.min_support = 2;
  p.split_mode = SplitMode::threshold;
  p.variability_threshold = 4.0;
  return p;
}

EvalReport run_evaluation(const EvalConfig& config) {
  EvalReport report;
  report.config = config;
  const auto dataset = generate_synthetic(config.spec);
  const auto plan = build_slice_plan(dataset.month_range, config.slice_length);
  const auto table = build_index(dataset, plan, config.params);
  report.stats = index_stats(table);

  const Composer composer(table, dataset);
  const QueryRange range{plan.range().first, plan.range().last};
  std::vector<std::string> ids;
  for (const auto& [id, s] : dataset.series) ids.push_back(id);

  GaussianSource pick(config.spec.seed + 1);
  double precision_sum = 0.0;
  double top_sum = 0.0;
  std::size_t top_count = 0;
  double random_sum = 0.0;
  std::size_t random_count = 0;

  for (std::size_t q = 0; q < ids.size(); ++q) {
    const auto& query = ids[q];
    QueryEvaluation eval;
    eval.query_fund = query;
    eval.results = top_k(composer.compose(query, range), config.k);
    eval.precision = precision_at_k(eval.results, query, synthetic_cluster_of, config.k);
    precision_sum += eval.precision;

    for (std::size_t i = 0; i < std::min(config.correlation_top, eval.results.size()); ++i) {
      if (const auto& r = eval.results[i].tiebreak_correlation) {
        top_sum += *r;
        ++top_count;
      }
    }

    if (ids.size() > 1) {
      const std::size_t draws = std::min(config.random_pairs, ids.size() - 1);
      std::vector<std::size_t> chosen;
      while (chosen.size() < draws) {
        const auto j = pick.index(ids.size());
        if (j == q || std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
        chosen.push_back(j);
        const auto r = pearson(dataset.series.at(query), dataset.series.at(ids[j]), range.months()).r;
        if (r) {
          random_sum += *r;
          ++random_count;
        }
      }
    }
    report.queries.push_back(std::move(eval));
  }

  report.mean_precision = ids.empty() ? 0.0 : precision_sum / static_cast<double>(ids.size());
  report.mean_r_top = top_count ? top_sum / static_cast<double>(top_count) : 0.0;
  report.mean_r_random = random_count ? random_sum / static_cast<double>(random_count) : 0.0;
  report.baseline_precision = 1.0 / static_cast<double>(config.spec.clusters);
  report.near_baseline = config.spec.clusters > 1 &&
                         report.mean_precision <
                             report.baseline_precision + 0.25 * (1.0 - report.baseline_precision);
  return report;
}

void write_eval_report(const EvalReport& report, std::ostream& out) {
  using detail::format_number;
  const auto& c = report.config;
  const auto& s = c.spec;
  out << "# sigcompose evaluation report\n"
      << "# clusters=" << s.clusters << " funds_per_cluster=" << s.funds_per_cluster
      << " months=" << s.months << " factor_volatility=" << format_number(s.factor_volatility)
      << " noise_volatility=" << format_number(s.noise_volatility) << " seed=" << s.seed
      << " generator=" << kSyntheticGenerator << '\n'
      << "# complexity_penalty=" << format_number(c.params.complexity_penalty)
      << " min_support=" << c.params.min_support << " split_mode=" << to_string(c.params.split_mode)
      << " variability_threshold=" << format_number(c.params.variability_threshold)
      << " slice_length=" << c.slice_length << " k=" << c.k << '\n'
      << "# index rows=" << report.stats.row_count << " slices=" << report.stats.slices_covered
      << " funds=" << report.stats.funds_covered << '\n'
      << "query,rank,fund_id,counter,r,cluster_match\n";
  for (const auto& q : report.queries) {
    const auto target = synthetic_cluster_of(q.query_fund);
    for (std::size_t i = 0; i < q.results.size(); ++i) {
      const auto& r = q.results[i];
      const auto cluster = synthetic_cluster_of(r.fund_id);
      out << q.query_fund << ',' << (i + 1) << ',' << r.fund_id << ',' << r.counter << ','
          << (r.tiebreak_correlation ? format_number(*r.tiebreak_correlation) : "") << ','
          << (target && cluster && *target == *cluster ? 1 : 0) << '\n';
    }
  }
  out << "# aggregate\n"
      << "precision@" << c.k << '=' << format_number(report.mean_precision) << '\n'
      << "mean_r_top" << c.correlation_top << '=' << format_number(report.mean_r_top) << '\n'
      << "mean_r_random=" << format_number(report.mean_r_random) << '\n'
      << "r_margin=" << format_number(report.r_margin()) << '\n'
      << "baseline_precision=" << format_number(report.baseline_precision) << '\n'
      << "near_baseline=" << (report.near_baseline ? "yes" : "no") << '\n';
}

}  // namespace sigcompose
