#pragma once

// Dense statevector simulation of few-qubit circuits.
//
// Conventions:
//   - qubit 0 is the least-significant bit of the amplitude index;
//   - bitstrings are written most-significant qubit first, so "01" means
//     qubit 0 = 1, qubit 1 = 0;
//   - H      = (1/sqrt2) [[1, 1], [1, -1]]
//     RY(t)  = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]
//     ZPhase(p)     = exp(+i p Z)       = diag(e^{ip}, e^{-ip})
//     ZZPhase(p)    = exp(+i p Z_a Z_b) = e^{ip} on even parity of (a, b),
//                                          e^{-ip} on odd parity
//     CNOT(c, t), CZ(a, b) as usual.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hqml/error.hpp"
#include "hqml/rng.hpp"

namespace hqml {

inline constexpr int kMaxQubits = 24;

enum class GateKind { H, RY, ZPhase, ZZPhase, CNOT, CZ };

struct GateOp {
  GateKind kind = GateKind::H;
  int q0 = 0;
  int q1 = -1;  // second qubit (CNOT target) or -1 for one-qubit gates
  double angle = 0.0;

  static GateOp h(int q) { return {GateKind::H, q, -1, 0.0}; }
  static GateOp ry(int q, double theta) { return {GateKind::RY, q, -1, theta}; }
  static GateOp zphase(int q, double phi) { return {GateKind::ZPhase, q, -1, phi}; }
  static GateOp zzphase(int a, int b, double phi) { return {GateKind::ZZPhase, a, b, phi}; }
  static GateOp cnot(int control, int target) { return {GateKind::CNOT, control, target, 0.0}; }
  static GateOp cz(int a, int b) { return {GateKind::CZ, a, b, 0.0}; }

  bool two_qubit() const {
    return kind == GateKind::ZZPhase || kind == GateKind::CNOT || kind == GateKind::CZ;
  }

  friend bool operator==(const GateOp&, const GateOp&) = default;
};

struct Circuit {
  int n_qubits = 1;
  std::vector<GateOp> gates;

  Circuit() = default;
  explicit Circuit(int n) : n_qubits(n) {}

  Circuit& add(const GateOp& g) {
    gates.push_back(g);
    return *this;
  }
  Circuit& append(const Circuit& other) {
    gates.insert(gates.end(), other.gates.begin(), other.gates.end());
    return *this;
  }
  std::size_t size() const { return gates.size(); }
};

/// Number of measurement repetitions; zero means exact probabilities.
struct Shots {
  std::int64_t count = 0;

  static constexpr Shots exact() { return {0}; }
  static constexpr Shots of(std::int64_t n) { return {n}; }
  constexpr bool is_exact() const { return count == 0; }
};

inline void check_qubit_count(int n) {
  if (n < 1 || n > kMaxQubits)
    throw ConfigError("qubit count " + std::to_string(n) + " outside [1, " +
                      std::to_string(kMaxQubits) + "]");
}

inline void check_gate(const GateOp& g, int n_qubits) {
  auto bad = [&](int q) { return q < 0 || q >= n_qubits; };
  if (bad(g.q0) || (g.two_qubit() && bad(g.q1)))
    throw IndexError("gate qubit index out of range for " + std::to_string(n_qubits) + " qubits");
  if (g.two_qubit() && g.q0 == g.q1) throw IndexError("two-qubit gate on identical qubits");
}

inline void validate(const Circuit& c) {
  check_qubit_count(c.n_qubits);
  for (const auto& g : c.gates) check_gate(g, c.n_qubits);
}

/// Adjoint of a gate: H, CNOT, CZ are self-inverse, rotations negate the angle.
inline GateOp adjoint(GateOp g) {
  if (g.kind == GateKind::RY || g.kind == GateKind::ZPhase || g.kind == GateKind::ZZPhase)
    g.angle = -g.angle;
  return g;
}

/// U^dagger for the circuit's unitary U.
inline Circuit inverse(const Circuit& c) {
  Circuit out(c.n_qubits);
  out.gates.reserve(c.gates.size());
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) out.gates.push_back(adjoint(*it));
  return out;
}

inline std::string to_bitstring(std::uint64_t index, int n_qubits) {
  std::string s(static_cast<std::size_t>(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q)
    if ((index >> q) & 1U) s[static_cast<std::size_t>(n_qubits - 1 - q)] = '1';
  return s;
}

inline std::uint64_t from_bitstring(std::string_view bits) {
  std::uint64_t index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ArgumentError("bitstring may contain only 0 and 1");
    index = (index << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return index;
}

inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "H";
    case GateKind::RY: return "RY";
    case GateKind::ZPhase: return "ZPHASE";
    case GateKind::ZZPhase: return "ZZPHASE";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
  }
  return "?";
}

/// One gate per line, e.g. "ZZPHASE 0 1 9.8696044010893580".
inline std::string format_circuit(const Circuit& c) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& g : c.gates) {
    os << gate_name(g.kind) << ' ' << g.q0;
    if (g.two_qubit()) os << ' ' << g.q1;
    if (g.kind == GateKind::RY || g.kind == GateKind::ZPhase || g.kind == GateKind::ZZPhase)
      os << ' ' << g.angle;
    os << '\n';
  }
  return os.str();
}

template <typename Real>
class BasicStateVector {
 public:
  using RealScalar = Real;
  using Scalar = std::complex<Real>;
  using Amplitudes = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// |0...0> on n qubits.
  explicit BasicStateVector(int n_qubits) : n_qubits_(n_qubits) {
    check_qubit_count(n_qubits);
    amps_ = Amplitudes::Zero(Eigen::Index{1} << n_qubits);
    amps_[0] = Scalar(1);
  }

  /// Takes ownership of explicit amplitudes; they must be normalized.
  static BasicStateVector from_amplitudes(Amplitudes amps, Real tolerance = Real(1e-10)) {
    const auto dim = amps.size();
    if (dim < 2 || !std::has_single_bit(static_cast<std::uint64_t>(dim)))
      throw ShapeError("amplitude count must be a power of two >= 2");
    BasicStateVector s(std::countr_zero(static_cast<std::uint64_t>(dim)));
    if (!amps.allFinite()) throw NumericError("non-finite amplitude");
    if (std::abs(amps.squaredNorm() - Real(1)) > tolerance)
      throw ArgumentError("amplitudes are not normalized");
    s.amps_ = std::move(amps);
    return s;
  }

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return amps_.size(); }
  const Amplitudes& amplitudes() const { return amps_; }
  const Scalar& operator[](Eigen::Index i) const { return amps_[i]; }
  Real norm_squared() const { return amps_.squaredNorm(); }

  void apply(const GateOp& g);
  void apply(const Circuit& c);

 private:
  void apply_single(int q, const Scalar& m00, const Scalar& m01, const Scalar& m10,
                    const Scalar& m11);

  int n_qubits_;
  Amplitudes amps_;
};

using StateVector = BasicStateVector<double>;

template <typename Real>
void BasicStateVector<Real>::apply_single(int q, const Scalar& m00, const Scalar& m01,
                                          const Scalar& m10, const Scalar& m11) {
  const Eigen::Index stride = Eigen::Index{1} << q;
  const Eigen::Index n = dim();
  for (Eigen::Index base = 0; base < n; base += 2 * stride) {
    for (Eigen::Index i = base; i < base + stride; ++i) {
      const Scalar a0 = amps_[i];
      const Scalar a1 = amps_[i + stride];
      amps_[i] = m00 * a0 + m01 * a1;
      amps_[i + stride] = m10 * a0 + m11 * a1;
    }
  }
}

template <typename Real>
void BasicStateVector<Real>::apply(const GateOp& g) {
  check_gate(g, n_qubits_);
  const auto angle = static_cast<Real>(g.angle);
  const Eigen::Index n = dim();
  switch (g.kind) {
    case GateKind::H: {
      const Scalar r(std::numbers::sqrt2_v<Real> / Real(2));
      apply_single(g.q0, r, r, r, -r);
      break;
    }
    case GateKind::RY: {
      const Scalar c(std::cos(angle / 2)), s(std::sin(angle / 2));
      apply_single(g.q0, c, -s, s, c);
      break;
    }
    case GateKind::ZPhase: {
      const Scalar plus = std::polar(Real(1), angle), minus = std::conj(plus);
      const auto mask = std::uint64_t{1} << g.q0;
      for (Eigen::Index i = 0; i < n; ++i)
        amps_[i] *= (static_cast<std::uint64_t>(i) & mask) ? minus : plus;
      break;
    }
    case GateKind::ZZPhase: {
      const Scalar even = std::polar(Real(1), angle), odd = std::conj(even);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::uint64_t>(i);
        const bool parity = (((u >> g.q0) ^ (u >> g.q1)) & 1U) != 0;
        amps_[i] *= parity ? odd : even;
      }
      break;
    }
    case GateKind::CNOT: {
      const auto c = std::uint64_t{1} << g.q0, t = std::uint64_t{1} << g.q1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::uint64_t>(i);
        if ((u & c) && !(u & t)) std::swap(amps_[i], amps_[static_cast<Eigen::Index>(u | t)]);
      }
      break;
    }
    case GateKind::CZ: {
      const auto both = (std::uint64_t{1} << g.q0) | (std::uint64_t{1} << g.q1);
      for (Eigen::Index i = 0; i < n; ++i)
        if ((static_cast<std::uint64_t>(i) & both) == both) amps_[i] = -amps_[i];
      break;
    }
  }
}

template <typename Real>
void BasicStateVector<Real>::apply(const Circuit& c) {
  if (c.n_qubits != n_qubits_)
    throw ShapeError("circuit has " + std::to_string(c.n_qubits) + " qubits, state has " +
                     std::to_string(n_qubits_));
  for (const auto& g : c.gates) apply(g);
}

// Free-function surface -------------------------------------------------------

inline StateVector new_zero_state(int n_qubits) { return StateVector(n_qubits); }

template <typename Real>
BasicStateVector<Real>& apply_gate(BasicStateVector<Real>& state, const GateOp& g) {
  state.apply(g);
  return state;
}

template <typename Real>
BasicStateVector<Real>& apply_circuit(BasicStateVector<Real>& state, const Circuit& c) {
  state.apply(c);
  return state;
}

/// |amp_i|^2 for every basis index.
template <typename Real>
Eigen::Matrix<Real, Eigen::Dynamic, 1> probability_vector(const BasicStateVector<Real>& s) {
  return s.amplitudes().cwiseAbs2();
}

/// Born-rule distribution keyed by bitstring; zero-probability outcomes omitted.
template <typename Real>
std::map<std::string, Real> probabilities(const BasicStateVector<Real>& s) {
  std::map<std::string, Real> out;
  const auto p = probability_vector(s);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > Real(0)) out.emplace(to_bitstring(static_cast<std::uint64_t>(i), s.n_qubits()), p[i]);
  return out;
}

/// Per-index outcome counts from `shots` i.i.d. draws (inverse-CDF on Rng::uniform()).
template <typename Real>
std::vector<std::int64_t> sample_counts(const BasicStateVector<Real>& s, std::int64_t shots,
                                        std::uint64_t seed) {
  if (shots < 1) throw ArgumentError("shots must be >= 1");
  const auto p = probability_vector(s);
  std::vector<double> cdf(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) cdf[static_cast<std::size_t>(i)] = acc += static_cast<double>(p[i]);
  std::vector<std::int64_t> counts(cdf.size(), 0);
  Rng rng(seed);
  for (std::int64_t k = 0; k < shots; ++k) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // rounding can leave u >= acc; it then belongs to the last nonzero outcome
    if (it == cdf.end()) --it;
    while (p[it - cdf.begin()] == Real(0) && it != cdf.begin()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return counts;
}

template <typename Real>
std::map<std::string, std::int64_t> sample(const BasicStateVector<Real>& s, std::int64_t shots,
                                           std::uint64_t seed) {
  const auto counts = sample_counts(s, shots, seed);
  std::map<std::string, std::int64_t> out;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) out.emplace(to_bitstring(i, s.n_qubits()), counts[i]);
  return out;
}

/// Sum over outcomes of f(bitstring) * p(bitstring), f mapping to +1 / -1.
template <typename Real, typename F>
Real expectation_pm1(const BasicStateVector<Real>& s, F&& f) {
  const auto p = probability_vector(s);
  Real e(0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] == Real(0)) continue;
    const int v = f(std::string_view(to_bitstring(static_cast<std::uint64_t>(i), s.n_qubits())));
    if (v != 1 && v != -1) throw ArgumentError("readout function must return +1 or -1");
    e += static_cast<Real>(v) * p[i];
  }
  return e;
}

/// <a|b> = sum conj(a_i) b_i.
template <typename Real>
std::complex<Real> inner_product(const BasicStateVector<Real>& a, const BasicStateVector<Real>& b) {
  if (a.n_qubits() != b.n_qubits()) throw ShapeError("inner product of states with different qubit counts");
  return a.amplitudes().dot(b.amplitudes());  // Eigen's dot conjugates the left operand
}

}  // namespace hqml
