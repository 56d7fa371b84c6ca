#include "sigcompose/search_service.hpp"

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <thread>

#include "sigcompose/error.hpp"

namespace sigcompose {

using nlohmann::json;

namespace {

struct BenefitSpec {
  BenefitKind kind;
  const char* name;
  const char* display;
};

constexpr BenefitSpec kBenefits[] = {
    {BenefitKind::lower_management_fee, "lower_management_fee", "Lower Management Fee"},
    {BenefitKind::lower_performance_fee, "lower_performance_fee", "Lower Performance Fee"},
    {BenefitKind::lower_redemption_fee, "lower_redemption_fee", "Lower Redemption Fee"},
    {BenefitKind::higher_ret_1m, "higher_ret_1m", "Higher 1-Month Return"},
    {BenefitKind::higher_ret_3m, "higher_ret_3m", "Higher 3-Month Return"},
    {BenefitKind::higher_ret_6m, "higher_ret_6m", "Higher 6-Month Return"},
    {BenefitKind::higher_ret_1y, "higher_ret_1y", "Higher 1-Year Return"},
    {BenefitKind::higher_sharpe, "higher_sharpe", "Higher Sharpe Ratio"},
};

const BenefitSpec& spec_of(BenefitKind kind) { return kBenefits[static_cast<std::size_t>(kind)]; }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json summary_json(const Dataset& dataset, const std::string& id) {
  const auto* m = dataset.find_meta(id);
  return {{"id", id},
          {"name", m ? m->name : id},
          {"category", m ? m->category : ""},
          {"domicile", m ? m->domicile : ""}};
}

HttpResponse error_response(int status, std::string_view code, const std::string& message) {
  return {status, json{{"error", code}, {"message", message}}.dump()};
}

HttpResponse ok(const json& body) { return {200, body.dump()}; }

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::size_t> parse_count(const std::string& text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

const ClassificationTable& verified(const ClassificationTable& table, const Dataset& dataset) {
  check_fingerprint(table, dataset);
  return table;
}

}  // namespace

std::string_view benefit_kind_name(BenefitKind kind) { return spec_of(kind).name; }
std::string_view benefit_display(BenefitKind kind) { return spec_of(kind).display; }

std::vector<BenefitIndicator> compute_benefits(const FundMeta& query, const FundMeta& result) {
  std::vector<BenefitIndicator> out;
  auto add_if = [&](BenefitKind kind, const std::optional<double>& q, const std::optional<double>& r,
                    bool lower_is_better) {
    if (!q || !r) return;
    if (lower_is_better ? *r < *q : *r > *q) out.push_back({kind, spec_of(kind).display});
  };
  add_if(BenefitKind::lower_management_fee, query.management_fee, result.management_fee, true);
  add_if(BenefitKind::lower_performance_fee, query.performance_fee, result.performance_fee, true);
  add_if(BenefitKind::lower_redemption_fee, query.redemption_fee, result.redemption_fee, true);
  add_if(BenefitKind::higher_ret_1m, query.trailing_returns.m1, result.trailing_returns.m1, false);
  add_if(BenefitKind::higher_ret_3m, query.trailing_returns.m3, result.trailing_returns.m3, false);
  add_if(BenefitKind::higher_ret_6m, query.trailing_returns.m6, result.trailing_returns.m6, false);
  add_if(BenefitKind::higher_ret_1y, query.trailing_returns.y1, result.trailing_returns.y1, false);
  add_if(BenefitKind::higher_sharpe, query.sharpe_ratio, result.sharpe_ratio, false);
  return out;
}

SearchService::SearchService(std::shared_ptr<const Dataset> dataset,
                             std::shared_ptr<const ClassificationTable> table, ServiceConfig config)
    : dataset_(std::move(dataset)),
      table_(std::move(table)),
      config_(std::move(config)),
      composer_(verified(*table_, *dataset_), *dataset_) {
  for (const auto& [id, s] : dataset_->series) fund_ids_.push_back(id);
  for (const auto& [id, m] : dataset_->meta) fund_ids_.push_back(id);
  std::sort(fund_ids_.begin(), fund_ids_.end());
  fund_ids_.erase(std::unique(fund_ids_.begin(), fund_ids_.end()), fund_ids_.end());
}

HttpResponse SearchService::health() const {
  const auto& m = table_->manifest;
  const auto range = m.plan.range();
  return ok({{"status", "ok"},
             {"fingerprint", m.fingerprint},
             {"rows", table_->rows.size()},
             {"slices", m.plan.slices.size()},
             {"funds", fund_ids_.size()},
             {"range", {{"from", format_month(range.first, dataset_->epoch)},
                        {"to", format_month(range.last, dataset_->epoch)}}},
             {"params", {{"complexity_penalty", m.params.complexity_penalty},
                         {"min_support", m.params.min_support},
                         {"split_mode", to_string(m.params.split_mode)},
                         {"variability_threshold", optional_number(
                             std::isfinite(m.params.variability_threshold)
                                 ? std::optional<double>(m.params.variability_threshold)
                                 : std::nullopt)}}}});
}

HttpResponse SearchService::list_funds(const std::optional<std::string>& filter,
                                       const std::optional<std::string>& page) const {
  std::size_t offset = 0;
  if (page && !page->empty()) {
    auto parsed = parse_count(*page);
    if (!parsed) return error_response(400, "invalid_page", "page token '" + *page + "' is not valid");
    offset = *parsed;
  }
  const auto needle = lowercase(filter.value_or(""));

  json funds = json::array();
  std::size_t matched = 0;
  std::optional<std::size_t> next;
  for (const auto& id : fund_ids_) {
    if (!needle.empty()) {
      const auto* m = dataset_->find_meta(id);
      const bool hit = lowercase(id).find(needle) != std::string::npos ||
                       (m && lowercase(m->name).find(needle) != std::string::npos);
      if (!hit) continue;
    }
    if (matched >= offset) {
      if (funds.size() == config_.page_size) {
        next = matched;
        break;
      }
      funds.push_back(summary_json(*dataset_, id));
    }
    ++matched;
  }
  return ok({{"funds", funds}, {"next_page", next ? json(std::to_string(*next)) : json(nullptr)}});
}

HttpResponse SearchService::fund_detail(const std::string& fund_id) const {
  if (!dataset_->contains(fund_id)) return error_response(404, "fund_not_found", "unknown fund " + fund_id);
  json fund = summary_json(*dataset_, fund_id);
  if (const auto* m = dataset_->find_meta(fund_id)) {
    fund["management_fee"] = optional_number(m->management_fee);
    fund["performance_fee"] = optional_number(m->performance_fee);
    fund["redemption_fee"] = optional_number(m->redemption_fee);
    fund["sharpe_ratio"] = optional_number(m->sharpe_ratio);
    fund["trailing_returns"] = {{"1m", optional_number(m->trailing_returns.m1)},
                                {"3m", optional_number(m->trailing_returns.m3)},
                                {"6m", optional_number(m->trailing_returns.m6)},
                                {"1y", optional_number(m->trailing_returns.y1)},
                                {"3y", optional_number(m->trailing_returns.y3)}};
    json extra = json::array();
    for (const auto& [k, v] : m->extra_fields) extra.push_back({{"key", k}, {"value", v}});
    fund["extra_fields"] = extra;
  }
  json returns = nullptr;
  if (const auto* s = dataset_->find_series(fund_id)) {
    returns = json::array();
    for (const auto& [month, value] : s->returns) {
      returns.push_back({{"month", format_month(month, dataset_->epoch)}, {"return", value}});
    }
  }
  return ok({{"fund", fund}, {"classified", dataset_->find_series(fund_id) != nullptr}, {"returns", returns}});
}

HttpResponse SearchService::similar(const std::string& fund_id, const std::optional<std::string>& from,
                                    const std::optional<std::string>& to,
                                    const std::optional<std::string>& k) const {
  if (!dataset_->contains(fund_id)) return error_response(404, "fund_not_found", "unknown fund " + fund_id);

  const auto plan_range = table_->manifest.plan.range();
  QueryRange range{plan_range.first, plan_range.last};
  try {
    if (from && !from->empty()) range.from = parse_month(*from, dataset_->epoch);
    if (to && !to->empty()) range.to = parse_month(*to, dataset_->epoch);
  } catch (const InvalidArgument& e) {
    return error_response(400, "invalid_month", e.what());
  }
  if (range.to < range.from) return error_response(400, "invalid_range", "'to' precedes 'from'");

  std::size_t limit = config_.default_k;
  if (k && !k->empty()) {
    auto parsed = parse_count(*k);
    if (!parsed) return error_response(400, "invalid_k", "k must be a non-negative integer");
    limit = *parsed;
  }

  const auto results = top_k(composer_.compose(fund_id, range), limit);
  const auto* query_meta = dataset_->find_meta(fund_id);
  const int slices = static_cast<int>(slices_for_range(table_->manifest.plan, range).size());

  json items = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    json benefits = json::array();
    const auto* result_meta = dataset_->find_meta(r.fund_id);
    if (query_meta && result_meta) {
      for (const auto& b : compute_benefits(*query_meta, *result_meta)) {
        benefits.push_back({{"kind", benefit_kind_name(b.kind)}, {"display", b.display}});
      }
    }
    items.push_back({{"rank", i + 1},
                     {"fund", summary_json(*dataset_, r.fund_id)},
                     {"counter", r.counter},
                     {"slices_in_range", r.slices_in_range},
                     {"r", optional_number(r.tiebreak_correlation)},
                     {"benefits", benefits}});
  }
  json query = summary_json(*dataset_, fund_id);
  return ok({{"query", {{"fund", query},
                        {"from", format_month(range.from, dataset_->epoch)},
                        {"to", format_month(range.to, dataset_->epoch)},
                        {"slices_in_range", slices}}},
             {"results", items}});
}

struct ServiceHandle::Impl {
  std::shared_ptr<const SearchService> service;
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

ServiceHandle::ServiceHandle(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

ServiceHandle::~ServiceHandle() {
  stop();
  wait();
}

int ServiceHandle::port() const { return impl_->port; }

void ServiceHandle::stop() { impl_->server.stop(); }

void ServiceHandle::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

namespace {

std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

void reply(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

std::unique_ptr<ServiceHandle> serve(std::shared_ptr<const SearchService> service, const std::string& host,
                                     int port) {
  auto impl = std::make_unique<ServiceHandle::Impl>();
  impl->service = std::move(service);
  auto& server = impl->server;
  const SearchService& svc = *impl->service;

  // The library default also sets SO_REUSEPORT, which would let a second
  // instance share a port that is already taken.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });

  server.Get("/health", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.health()); });
  server.Get("/funds", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.list_funds(param(req, "filter"), param(req, "page")));
  });
  server.Get(R"(/funds/([^/]+)/similar)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.similar(req.matches[1], param(req, "from"), param(req, "to"), param(req, "k")));
  });
  server.Get(R"(/funds/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.fund_detail(req.matches[1]));
  });
  if (!svc.config().static_dir.empty() && !server.set_mount_point("/", svc.config().static_dir)) {
    throw IoError("static directory not found: " + svc.config().static_dir);
  }
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty()) {
      reply(res, error_response(res.status, res.status == 404 ? "not_found" : "http_error",
                                "no route for " + req.method + " " + req.path));
    }
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    spdlog::error("request failed: {}", what);
    reply(res, error_response(500, "internal", what));
  });
  server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
  });

  if (port == 0) {
    impl->port = server.bind_to_any_port(host);
  } else {
    impl->port = server.bind_to_port(host, port) ? port : -1;
  }
  if (impl->port < 0) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  impl->thread = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return std::unique_ptr<ServiceHandle>(new ServiceHandle(std::move(impl)));
}

}  // namespace sigcompose
