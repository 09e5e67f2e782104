#include "qforest_app/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qforest/data.hpp"
#include "qforest/kernel.hpp"
#include "qforest/parallel.hpp"
#include "qforest/svm.hpp"

namespace qforest::app {

using nlohmann::json;

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Split function trained on an N x L block estimated with `plan`, evaluated on
// the probes with kernels estimated the same way.
std::vector<double> split_values(const Eigen::MatrixXd& X, const std::vector<double>& y_by_id,
                                 const std::vector<std::size_t>& landmarks, const Eigen::MatrixXd& probes,
                                 const EmbeddingSpec& spec, const ShotPlan& plan, double C) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  KernelCache cache;
  const GramBlock block = gram_block(X, rows, landmarks, spec, plan, cache);
  const NystromMap map = make_nystrom_map(block, X, spec, plan);
  const Eigen::MatrixXd features = map_rows(block.entries, map);
  std::vector<double> y;
  for (std::size_t id : block.row_ids) y.push_back(y_by_id[id]);
  const svm::LinearModel model = svm::train_linear(features, y, C);
  std::vector<double> out;
  for (Eigen::Index p = 0; p < probes.rows(); ++p) {
    const Eigen::VectorXd x = probes.row(p).transpose();
    out.push_back(svm::decision(model, map_point(landmark_kernels(x, map), map)));
  }
  return out;
}

}  // namespace

std::vector<ProxyRow> split_function_deviation(std::size_t n, std::size_t l, std::size_t probes,
                                               const std::vector<std::uint64_t>& shots, const EmbeddingSpec& spec,
                                               const std::vector<std::uint64_t>& seeds, double C,
                                               std::size_t threads) {
  std::vector<std::vector<std::vector<double>>> dev(seeds.size());  // [seed][shot][probe]
  parallel_for(seeds.size(), threads, [&](std::size_t s) {
    const StreamKey key = StreamKey(seeds[s]).derive("split-deviation");
    const Eigen::MatrixXd X = random_inputs(n, spec, key.derive("inputs"));
    const auto labels = relabel_qrf(X, spec, key.derive("labels"));
    std::vector<double> y;
    for (int v : labels) y.push_back(v == 1 ? 1.0 : -1.0);
    const auto landmarks = select_landmarks(n, l, key.derive("landmarks"));
    const Eigen::MatrixXd P = random_inputs(probes, spec, key.derive("probes"));
    const auto exact = split_values(X, y, landmarks, P, spec, ShotPlan::exact(), C);
    for (std::uint64_t m : shots) {
      const ShotPlan plan = m == 0 ? ShotPlan::exact() : ShotPlan::sampled(m, key.derive("shots"));
      const auto sampled = split_values(X, y, landmarks, P, spec, plan, C);
      std::vector<double> d;
      for (std::size_t p = 0; p < exact.size(); ++p) d.push_back(std::abs(exact[p] - sampled[p]));
      dev[s].push_back(std::move(d));
    }
  });

  std::vector<ProxyRow> rows;
  for (std::size_t m = 0; m < shots.size(); ++m) {
    ProxyRow row;
    row.shots = shots[m];
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      row.deviations.insert(row.deviations.end(), dev[s][m].begin(), dev[s][m].end());
    }
    row.median = median(row.deviations);
    row.mean = row.deviations.empty()
                   ? 0.0
                   : std::accumulate(row.deviations.begin(), row.deviations.end(), 0.0) /
                         static_cast<double>(row.deviations.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

bool VerifyResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

json VerifyResult::to_json() const {
  json h = json::array();
  for (const auto& r : harness) {
    h.push_back({{"M", r.shots}, {"L", r.landmarks}, {"N", r.points}, {"mean_error", r.mean_error},
                 {"std_error", r.std_error}, {"bound", r.bound}, {"errors", r.errors}});
  }
  json p = json::array();
  for (const auto& r : proxy) p.push_back({{"M", r.shots}, {"median_deviation", r.median}, {"mean_deviation", r.mean}});
  json c = json::array();
  for (const auto& k : checks) c.push_back({{"name", k.name}, {"passed", k.passed}, {"detail", k.detail}});
  return {{"nystrom_error", h}, {"split_deviation", p}, {"checks", c}, {"passed", all_passed()}};
}

VerifyResult cmd_verify(const VerifyOptions& options, std::size_t threads) {
  const EmbeddingSpec spec = EmbeddingSpec::iqp(options.qubits);
  std::vector<std::uint64_t> seeds(options.seeds);
  std::iota(seeds.begin(), seeds.end(), options.base_seed);

  VerifyResult result;
  std::vector<std::uint64_t> with_exact{0};
  with_exact.insert(with_exact.end(), options.shots.begin(), options.shots.end());
  result.harness = error_harness(options.points, options.landmarks, with_exact, spec, seeds, options.delta, threads);
  result.proxy = split_function_deviation(options.points, options.landmarks, options.probes, options.shots, spec, seeds,
                                          1.0, threads);

  {
    const auto& exact = result.harness.front();
    const auto within = std::count_if(exact.errors.begin(), exact.errors.end(),
                                      [&](double e) { return e <= exact.bound; });
    std::ostringstream d;
    d << within << "/" << exact.errors.size() << " seeds within " << exact.bound;
    result.checks.push_back({"nystrom error within bound (exact estimation)",
                             static_cast<std::size_t>(within) == exact.errors.size(), d.str()});
  }
  {
    bool ok = true;
    std::ostringstream d;
    for (std::size_t i = 1; i < result.harness.size(); ++i) {
      d << "M=" << result.harness[i].shots << ":" << result.harness[i].mean_error << " ";
      if (i > 1 && !(result.harness[i].mean_error < result.harness[i - 1].mean_error)) ok = false;
    }
    result.checks.push_back({"mean spectral error decreases with M", ok, d.str()});
  }
  {
    bool ok = true;
    std::ostringstream d;
    for (std::size_t i = 0; i < result.proxy.size(); ++i) {
      d << "M=" << result.proxy[i].shots << ":" << result.proxy[i].median << " ";
      if (i > 0 && !(result.proxy[i].median < result.proxy[i - 1].median)) ok = false;
    }
    result.checks.push_back({"median split-function deviation decreases with M", ok, d.str()});
  }
  return result;
}

}  // namespace qforest::app
