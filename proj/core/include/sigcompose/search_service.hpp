#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sigcompose/classification_index.hpp"
#include "sigcompose/ingestion.hpp"
#include "sigcompose/signal_composition.hpp"

namespace sigcompose {

// Ways a result fund can strictly beat the query fund. Declaration order is
// the display order.
enum class BenefitKind {
  lower_management_fee,
  lower_performance_fee,
  lower_redemption_fee,
  higher_ret_1m,
  higher_ret_3m,
  higher_ret_6m,
  higher_ret_1y,
  higher_sharpe,
};

struct BenefitIndicator {
  BenefitKind kind;
  std::string display;

  friend bool operator==(const BenefitIndicator&, const BenefitIndicator&) = default;
};

std::string_view benefit_kind_name(BenefitKind kind);  // e.g. "lower_performance_fee"
std::string_view benefit_display(BenefitKind kind);    // e.g. "Lower Performance Fee"

// One indicator per strict improvement; absent values on either side never
// produce an indicator.
std::vector<BenefitIndicator> compute_benefits(const FundMeta& query, const FundMeta& result);

struct ServiceConfig {
  std::size_t default_k = 10;
  std::size_t page_size = 50;
  std::string static_dir;  // optional directory served at "/"
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

// Request handling over immutable snapshots of the dataset and index. All
// handlers are const and safe to call concurrently.
class SearchService {
 public:
  // Throws FingerprintMismatch when the index was not built from `dataset`.
  SearchService(std::shared_ptr<const Dataset> dataset,
                std::shared_ptr<const ClassificationTable> table, ServiceConfig config = {});

  HttpResponse health() const;
  HttpResponse list_funds(const std::optional<std::string>& filter,
                          const std::optional<std::string>& page) const;
  HttpResponse fund_detail(const std::string& fund_id) const;
  HttpResponse similar(const std::string& fund_id, const std::optional<std::string>& from,
                       const std::optional<std::string>& to,
                       const std::optional<std::string>& k) const;

  const ServiceConfig& config() const { return config_; }
  const Dataset& dataset() const { return *dataset_; }
  const ClassificationTable& table() const { return *table_; }

 private:
  std::shared_ptr<const Dataset> dataset_;
  std::shared_ptr<const ClassificationTable> table_;
  ServiceConfig config_;
  Composer composer_;
  std::vector<std::string> fund_ids_;  // every known fund, sorted
};

// A running HTTP listener. Destruction stops and joins it.
class ServiceHandle {
 public:
  ~ServiceHandle();
  ServiceHandle(const ServiceHandle&) = delete;
  ServiceHandle& operator=(const ServiceHandle&) = delete;

  int port() const;
  void stop();
  void wait();  // blocks until the listener exits

 private:
  friend std::unique_ptr<ServiceHandle> serve(std::shared_ptr<const SearchService>, const std::string&, int);
  struct Impl;
  explicit ServiceHandle(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// Binds host:port (port 0 picks a free port) and serves on a background
// thread. Throws Error when binding fails.
std::unique_ptr<ServiceHandle> serve(std::shared_ptr<const SearchService> service,
                                     const std::string& host, int port);

}  // namespace sigcompose
