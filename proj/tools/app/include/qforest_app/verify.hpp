#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qforest/nystrom.hpp"
#include "qforest/qsim.hpp"

namespace qforest::app {

struct ProxyRow {
  std::uint64_t shots = 0;
  double median = 0.0;
  double mean = 0.0;
  std::vector<double> deviations;  // seed-major, probe-minor
};

/// |f - f~| between split functions trained on exact and on M-shot kernel
/// estimates (same inputs, labels, landmarks and C), evaluated on random
/// probe points with kernels estimated the same way. A shot count of 0
/// compares the exact split function with itself.
std::vector<ProxyRow> split_function_deviation(std::size_t n, std::size_t l, std::size_t probes,
                                               const std::vector<std::uint64_t>& shots, const EmbeddingSpec& spec,
                                               const std::vector<std::uint64_t>& seeds, double C = 1.0,
                                               std::size_t threads = 1);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::size_t points = 40;
  std::size_t landmarks = 10;
  std::size_t probes = 50;
  std::size_t seeds = 20;
  int qubits = 2;  // IQP width
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> shots{256, 1024, 4096};
  double delta = 0.1;
};

struct VerifyResult {
  std::vector<ErrorHarnessRow> harness;
  std::vector<ProxyRow> proxy;
  std::vector<VerifyCheck> checks;
  bool all_passed() const;
  nlohmann::json to_json() const;
};

VerifyResult cmd_verify(const VerifyOptions& options, std::size_t threads);

}  // namespace qforest::app
