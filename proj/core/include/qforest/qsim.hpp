#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qforest/rng.hpp"

namespace qforest {

using Amplitude = std::complex<double>;

/// Pure state of n qubits. Qubit j is bit j of the basis index.
class StateVector {
 public:
  explicit StateVector(int n_qubits);  // |0...0>
  StateVector(int n_qubits, std::vector<Amplitude> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  std::span<Amplitude> amplitudes() { return amplitudes_; }
  const Amplitude& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm_squared() const;

  void apply_hadamard_all();
  void apply_ry(int qubit, double theta);
  void apply_rz(int qubit, double theta);
  void apply_cnot(int control, int target);

 private:
  int n_qubits_;
  std::vector<Amplitude> amplitudes_;
};

/// Discrete-log table of a prime field: log_g(x) for x in Z_p^*.
class DiscreteLogTable {
 public:
  /// Throws InvalidInput if p is not prime or g does not generate Z_p^*.
  DiscreteLogTable(std::int64_t p, std::int64_t g);

  std::int64_t p() const { return p_; }
  std::int64_t g() const { return g_; }
  std::int64_t order() const { return p_ - 1; }
  /// Throws InvalidInput if x is not in Z_p^* = {1, ..., p-1}.
  std::int64_t log(std::int64_t x) const;
  std::int64_t pow(std::int64_t exponent) const;

 private:
  std::int64_t p_;
  std::int64_t g_;
  std::vector<std::int64_t> logs_;   // indexed by x
  std::vector<std::int64_t> powers_; // indexed by exponent
};

bool is_prime(std::int64_t p);
bool is_generator(std::int64_t p, std::int64_t g);

struct IqpEmbedding {
  int n_qubits;
};

struct HardwareEfficientEmbedding {
  int n_qubits;
  int layers;
};

/// Interval states over the discrete log of each coordinate. Not simulated
/// as a circuit: the kernel has a closed form in log space.
struct DlpIntervalEmbedding {
  std::int64_t p;
  std::int64_t g;
  int q;
  int dims;
  std::shared_ptr<const DiscreteLogTable> table;
};

/// Which feature map a kernel uses. Construct through the factories, which
/// validate parameters.
class EmbeddingSpec {
 public:
  using Variant = std::variant<IqpEmbedding, HardwareEfficientEmbedding, DlpIntervalEmbedding>;

  static EmbeddingSpec iqp(int n_qubits);
  /// layers < 0 selects the default of one layer per qubit.
  static EmbeddingSpec hardware_efficient(int n_qubits, int layers = -1);
  static EmbeddingSpec dlp_interval(std::int64_t p, std::int64_t g, int q, int dims);

  const Variant& variant() const { return variant_; }
  bool is_circuit() const { return !std::holds_alternative<DlpIntervalEmbedding>(variant_); }
  /// Required input dimension, or 0 if any dimension >= 1 is accepted.
  std::size_t input_dim() const;
  /// Stable across runs and processes; distinct parameters give distinct ids.
  std::uint64_t id() const { return id_; }
  std::string describe() const;

  friend bool operator==(const EmbeddingSpec& a, const EmbeddingSpec& b) { return a.id_ == b.id_; }

 private:
  explicit EmbeddingSpec(Variant v);
  Variant variant_;
  std::uint64_t id_;
};

/// Exact evaluation or M-shot estimation of fidelities.
struct ShotPlan {
  std::uint64_t shots = 0;  // 0 means exact
  StreamKey key{};

  static ShotPlan exact() { return {}; }
  static ShotPlan sampled(std::uint64_t shots, StreamKey key);

  bool is_exact() const { return shots == 0; }
  ShotPlan with_key(StreamKey k) const { return {shots, k}; }
  /// Identifies the estimator (shot count and master key), for cache keying.
  std::uint64_t descriptor() const;
};

/// U_Z(x) H U_Z(x) H |0>, U_Z(x) = exp(i [sum_j x_j Z_j + sum_{j<k} x_j x_k Z_j Z_k]).
StateVector embed_iqp(std::span<const double> x, int n_qubits);

/// Layers of RY rotations, CNOT brick, RZ rotations, CNOT brick. Feature
/// indices cycle: RY on qubit j in layer l reads x[(2nl + j) mod D], RZ reads
/// x[(2nl + n + j) mod D].
StateVector embed_hea(std::span<const double> x, int n_qubits, int layers);

/// Dispatches on a circuit embedding. Throws InvalidInput for DLP specs.
StateVector embed(std::span<const double> x, const EmbeddingSpec& spec);

/// |<a|b>|^2.
double fidelity(const StateVector& a, const StateVector& b);

/// Exact plan returns f; sampled plan returns Binomial(M, f)/M drawn from
/// plan.key. f may exceed [0,1] by at most 1e-9 and is clamped.
double sample_fidelity(double f, const ShotPlan& plan);

}  // namespace qforest
