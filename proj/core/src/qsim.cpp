#include "qforest/qsim.hpp"

#include <cmath>
#include <numbers>
#include <algorithm>

#include "qforest/error.hpp"

namespace qforest {

namespace {

constexpr double kFidelityTolerance = 1e-9;

void check_qubits(int n) {
  if (n < 1) throw InvalidInput("number of qubits must be >= 1");
  if (n > 20) throw InvalidInput("more than 20 qubits is not supported");
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  check_qubits(n_qubits);
  amplitudes_.assign(std::size_t{1} << n_qubits, Amplitude{0.0, 0.0});
  amplitudes_[0] = 1.0;
}

StateVector::StateVector(int n_qubits, std::vector<Amplitude> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  check_qubits(n_qubits);
  if (amplitudes_.size() != (std::size_t{1} << n_qubits)) {
    throw InvalidInput("amplitude count must be 2^n_qubits");
  }
}

double StateVector::norm_squared() const {
  double sum = 0.0;
  for (const auto& a : amplitudes_) sum += std::norm(a);
  return sum;
}

void StateVector::apply_hadamard_all() {
  // In-place Walsh-Hadamard transform, one butterfly stage per qubit.
  const double scale = 1.0 / std::sqrt(2.0);
  const std::size_t dim = amplitudes_.size();
  for (std::size_t half = 1; half < dim; half <<= 1) {
    for (std::size_t block = 0; block < dim; block += 2 * half) {
      for (std::size_t i = block; i < block + half; ++i) {
        const Amplitude a = amplitudes_[i];
        const Amplitude b = amplitudes_[i + half];
        amplitudes_[i] = (a + b) * scale;
        amplitudes_[i + half] = (a - b) * scale;
      }
    }
  }
}

void StateVector::apply_ry(int qubit, double theta) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  const std::size_t bit = std::size_t{1} << qubit;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if (i & bit) continue;
    const Amplitude a0 = amplitudes_[i];
    const Amplitude a1 = amplitudes_[i | bit];
    amplitudes_[i] = c * a0 - s * a1;
    amplitudes_[i | bit] = s * a0 + c * a1;
  }
}

void StateVector::apply_rz(int qubit, double theta) {
  const Amplitude lower = std::polar(1.0, -theta / 2.0);
  const Amplitude upper = std::polar(1.0, theta / 2.0);
  const std::size_t bit = std::size_t{1} << qubit;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    amplitudes_[i] *= (i & bit) ? upper : lower;
  }
}

void StateVector::apply_cnot(int control, int target) {
  const std::size_t cbit = std::size_t{1} << control;
  const std::size_t tbit = std::size_t{1} << target;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(amplitudes_[i], amplitudes_[i | tbit]);
  }
}

bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t d = 2; d * d <= p; ++d) {
    if (p % d == 0) return false;
  }
  return true;
}

bool is_generator(std::int64_t p, std::int64_t g) {
  if (!is_prime(p) || g < 1 || g >= p) return false;
  // Brute force: the powers of g must visit every element of Z_p^*.
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  std::int64_t value = 1;
  for (std::int64_t e = 0; e < p - 1; ++e) {
    if (seen[static_cast<std::size_t>(value)]) return false;
    seen[static_cast<std::size_t>(value)] = true;
    value = (value * g) % p;
  }
  return true;
}

DiscreteLogTable::DiscreteLogTable(std::int64_t p, std::int64_t g) : p_(p), g_(g) {
  if (!is_prime(p)) throw InvalidInput("p must be prime");
  if (p > 1'000'003) throw InvalidInput("p is too large for a brute-force log table");
  if (!is_generator(p, g)) throw InvalidInput("g is not a generator of Z_p^*");
  logs_.assign(static_cast<std::size_t>(p), -1);
  powers_.resize(static_cast<std::size_t>(p - 1));
  std::int64_t value = 1;
  for (std::int64_t e = 0; e < p - 1; ++e) {
    logs_[static_cast<std::size_t>(value)] = e;
    powers_[static_cast<std::size_t>(e)] = value;
    value = (value * g) % p;
  }
}

std::int64_t DiscreteLogTable::log(std::int64_t x) const {
  if (x < 1 || x >= p_) throw InvalidInput("value " + std::to_string(x) + " is not in Z_p^*");
  return logs_[static_cast<std::size_t>(x)];
}

std::int64_t DiscreteLogTable::pow(std::int64_t exponent) const {
  const std::int64_t m = p_ - 1;
  return powers_[static_cast<std::size_t>(((exponent % m) + m) % m)];
}

EmbeddingSpec::EmbeddingSpec(Variant v) : variant_(std::move(v)), id_(0) {
  std::uint64_t h = 0;
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, IqpEmbedding>) {
          h = mix64(0x1001) ^ mix64(static_cast<std::uint64_t>(e.n_qubits));
        } else if constexpr (std::is_same_v<T, HardwareEfficientEmbedding>) {
          h = mix64(mix64(0x2002) ^ static_cast<std::uint64_t>(e.n_qubits)) ^ mix64(static_cast<std::uint64_t>(e.layers) + 7);
        } else {
          h = mix64(0x3003);
          for (std::uint64_t part : {static_cast<std::uint64_t>(e.p), static_cast<std::uint64_t>(e.g),
                                     static_cast<std::uint64_t>(e.q), static_cast<std::uint64_t>(e.dims)}) {
            h = mix64(h ^ part);
          }
        }
      },
      variant_);
  id_ = h;
}

EmbeddingSpec EmbeddingSpec::iqp(int n_qubits) {
  check_qubits(n_qubits);
  return EmbeddingSpec(IqpEmbedding{n_qubits});
}

EmbeddingSpec EmbeddingSpec::hardware_efficient(int n_qubits, int layers) {
  check_qubits(n_qubits);
  if (layers < 0) layers = n_qubits;
  if (layers < 1) throw InvalidInput("hardware-efficient embedding needs at least one layer");
  return EmbeddingSpec(HardwareEfficientEmbedding{n_qubits, layers});
}

EmbeddingSpec EmbeddingSpec::dlp_interval(std::int64_t p, std::int64_t g, int q, int dims) {
  if (dims != 1 && dims != 2) throw InvalidInput("DLP interval embedding supports 1 or 2 dimensions");
  auto table = std::make_shared<const DiscreteLogTable>(p, g);
  if (q < 0 || q > 62 || (std::int64_t{1} << q) > p - 1) throw InvalidInput("need 1 <= 2^q <= p - 1");
  return EmbeddingSpec(DlpIntervalEmbedding{p, g, q, dims, std::move(table)});
}

std::size_t EmbeddingSpec::input_dim() const {
  return std::visit(
      [](const auto& e) -> std::size_t {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, IqpEmbedding>) {
          return static_cast<std::size_t>(e.n_qubits);
        } else if constexpr (std::is_same_v<T, HardwareEfficientEmbedding>) {
          return 0;
        } else {
          return static_cast<std::size_t>(e.dims);
        }
      },
      variant_);
}

std::string EmbeddingSpec::describe() const {
  return std::visit(
      [](const auto& e) -> std::string {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, IqpEmbedding>) {
          return "iqp(n=" + std::to_string(e.n_qubits) + ")";
        } else if constexpr (std::is_same_v<T, HardwareEfficientEmbedding>) {
          return "hea(n=" + std::to_string(e.n_qubits) + ",layers=" + std::to_string(e.layers) + ")";
        } else {
          return "dlp(p=" + std::to_string(e.p) + ",g=" + std::to_string(e.g) + ",q=" + std::to_string(e.q) +
                 ",dims=" + std::to_string(e.dims) + ")";
        }
      },
      variant_);
}

ShotPlan ShotPlan::sampled(std::uint64_t shots, StreamKey key) {
  if (shots < 1) throw InvalidInput("sampled plan needs at least one shot");
  return {shots, key};
}

std::uint64_t ShotPlan::descriptor() const {
  return is_exact() ? 0 : mix64(shots) ^ mix64(key.value() + 0x5bd1e995ULL);
}

StateVector embed_iqp(std::span<const double> x, int n_qubits) {
  check_qubits(n_qubits);
  if (x.size() != static_cast<std::size_t>(n_qubits)) {
    throw InvalidInput("IQP embedding needs input dimension equal to the qubit count");
  }
  const std::size_t dim = std::size_t{1} << n_qubits;

  // Diagonal of U_Z: phase(b) = sum_j x_j z_j + sum_{j<k} x_j x_k z_j z_k,
  // z_j = +1 when bit j of b is 0 and -1 otherwise.
  std::vector<Amplitude> diagonal(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    double phase = 0.0;
    for (int j = 0; j < n_qubits; ++j) {
      const double zj = (b >> j) & 1U ? -1.0 : 1.0;
      phase += x[static_cast<std::size_t>(j)] * zj;
      for (int k = j + 1; k < n_qubits; ++k) {
        const double zk = (b >> k) & 1U ? -1.0 : 1.0;
        phase += x[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(k)] * zj * zk;
      }
    }
    diagonal[b] = std::polar(1.0, phase);
  }

  StateVector state(n_qubits);
  auto amps = state.amplitudes();
  for (int round = 0; round < 2; ++round) {
    state.apply_hadamard_all();
    for (std::size_t b = 0; b < dim; ++b) amps[b] *= diagonal[b];
  }
  return state;
}

namespace {

// CNOTs on (0,1), (2,3), ... then (1,2), (3,4), ...; pairs past the last
// qubit are skipped.
void apply_entangling_layer(StateVector& state) {
  const int n = state.n_qubits();
  for (int j = 0; j + 1 < n; j += 2) state.apply_cnot(j, j + 1);
  for (int j = 1; j + 1 < n; j += 2) state.apply_cnot(j, j + 1);
}

}  // namespace

StateVector embed_hea(std::span<const double> x, int n_qubits, int layers) {
  check_qubits(n_qubits);
  if (layers < 1) throw InvalidInput("hardware-efficient embedding needs at least one layer");
  if (x.empty()) throw InvalidInput("hardware-efficient embedding needs a non-empty input");
  const std::size_t d = x.size();
  const auto n = static_cast<std::size_t>(n_qubits);

  StateVector state(n_qubits);
  for (std::size_t l = 0; l < static_cast<std::size_t>(layers); ++l) {
    for (std::size_t j = 0; j < n; ++j) state.apply_ry(static_cast<int>(j), x[(2 * n * l + j) % d]);
    apply_entangling_layer(state);
    for (std::size_t j = 0; j < n; ++j) state.apply_rz(static_cast<int>(j), x[(2 * n * l + n + j) % d]);
    apply_entangling_layer(state);
  }
  return state;
}

StateVector embed(std::span<const double> x, const EmbeddingSpec& spec) {
  return std::visit(
      [&](const auto& e) -> StateVector {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, IqpEmbedding>) {
          return embed_iqp(x, e.n_qubits);
        } else if constexpr (std::is_same_v<T, HardwareEfficientEmbedding>) {
          return embed_hea(x, e.n_qubits, e.layers);
        } else {
          throw InvalidInput("DLP interval kernels are evaluated analytically, not simulated");
        }
      },
      spec.variant());
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.n_qubits() != b.n_qubits()) throw InvalidInput("fidelity of states with different qubit counts");
  Amplitude overlap{0.0, 0.0};
  const auto aa = a.amplitudes();
  const auto bb = b.amplitudes();
  for (std::size_t i = 0; i < aa.size(); ++i) overlap += std::conj(aa[i]) * bb[i];
  return std::norm(overlap);
}

double sample_fidelity(double f, const ShotPlan& plan) {
  if (!(f >= -kFidelityTolerance && f <= 1.0 + kFidelityTolerance)) {
    throw InvalidInput("fidelity outside [0, 1]");
  }
  f = std::clamp(f, 0.0, 1.0);
  if (plan.is_exact()) return f;
  Stream stream(plan.key);
  return static_cast<double>(stream.binomial(plan.shots, f)) / static_cast<double>(plan.shots);
}

}  // namespace qforest
