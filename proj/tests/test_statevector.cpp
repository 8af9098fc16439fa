#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "hqml/error.hpp"
#include "hqml/statevector.hpp"
#include "hqml/vqc.hpp"
#include "oracle.hpp"

using namespace hqml;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

bool close(cd a, cd b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

StateVector basis(int n, std::uint64_t index) {
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(1 << n);
  amps[static_cast<Eigen::Index>(index)] = 1.0;
  return StateVector::from_amplitudes(amps);
}

}  // namespace

TEST_CASE("zero state") {
  auto s1 = new_zero_state(1);
  CHECK(s1.dim() == 2);
  CHECK(close(s1[0], 1.0));
  CHECK(close(s1[1], 0.0));

  auto s2 = new_zero_state(2);
  CHECK(s2.dim() == 4);
  CHECK(close(s2[0], 1.0));
  for (int i = 1; i < 4; ++i) CHECK(close(s2[i], 0.0));

  CHECK_THROWS_AS(new_zero_state(25), ConfigError);
  CHECK_THROWS_AS(new_zero_state(0), ConfigError);
  CHECK_NOTHROW(new_zero_state(kMaxQubits > 20 ? 20 : kMaxQubits));
}

TEST_CASE("single gates on basis states") {
  SUBCASE("H on |0>") {
    auto s = new_zero_state(1);
    apply_gate(s, GateOp::h(0));
    CHECK(close(s[0], kInvSqrt2));
    CHECK(close(s[1], kInvSqrt2));
    apply_gate(s, GateOp::h(0));
    CHECK(close(s[0], 1.0));
    CHECK(close(s[1], 0.0));
  }
  SUBCASE("CNOT on |01> gives |11>") {
    auto s = basis(2, from_bitstring("01"));
    apply_gate(s, GateOp::cnot(0, 1));
    CHECK(close(s[static_cast<Eigen::Index>(from_bitstring("11"))], 1.0));
    CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("CNOT leaves control=0 alone") {
    auto s = basis(2, from_bitstring("10"));
    apply_gate(s, GateOp::cnot(0, 1));
    CHECK(close(s[static_cast<Eigen::Index>(from_bitstring("10"))], 1.0));
  }
  SUBCASE("ZPhase(pi/3) on |0>") {
    auto s = new_zero_state(1);
    apply_gate(s, GateOp::zphase(0, kPi / 3));
    CHECK(close(s[0], std::exp(cd(0, kPi / 3))));
    CHECK(probabilities(s).at("0") == doctest::Approx(1.0));
  }
  SUBCASE("ZPhase on |1> takes the conjugate phase") {
    auto s = basis(1, 1);
    apply_gate(s, GateOp::zphase(0, 0.7));
    CHECK(close(s[1], std::exp(cd(0, -0.7))));
  }
  SUBCASE("ZZPhase sign follows parity") {
    for (std::uint64_t i = 0; i < 4; ++i) {
      auto s = basis(2, i);
      apply_gate(s, GateOp::zzphase(0, 1, 0.4));
      const bool even = std::popcount(i) % 2 == 0;
      CHECK(close(s[static_cast<Eigen::Index>(i)], std::exp(cd(0, even ? 0.4 : -0.4))));
    }
  }
  SUBCASE("RY(pi/2) on |0>") {
    auto s = new_zero_state(1);
    apply_gate(s, GateOp::ry(0, kPi / 2));
    CHECK(close(s[0], kInvSqrt2));
    CHECK(close(s[1], kInvSqrt2));
  }
  SUBCASE("CZ flips only |11>") {
    for (std::uint64_t i = 0; i < 4; ++i) {
      auto s = basis(2, i);
      apply_gate(s, GateOp::cz(0, 1));
      CHECK(close(s[static_cast<Eigen::Index>(i)], i == 3 ? -1.0 : 1.0));
    }
  }
  SUBCASE("qubit 0 is the least significant bit") {
    auto s = new_zero_state(3);
    apply_gate(s, GateOp::ry(0, kPi));
    CHECK(close(s[1], 1.0));
    CHECK(probabilities(s).count("001") == 1);
  }
}

TEST_CASE("gate index errors") {
  auto s = new_zero_state(2);
  CHECK_THROWS_AS(apply_gate(s, GateOp::h(2)), IndexError);
  CHECK_THROWS_AS(apply_gate(s, GateOp::h(-1)), IndexError);
  CHECK_THROWS_AS(apply_gate(s, GateOp::cnot(1, 1)), IndexError);
  CHECK_THROWS_AS(apply_gate(s, GateOp::zzphase(0, 3, 0.1)), IndexError);
  // the failed gates must not have touched the state
  CHECK(close(s[0], 1.0));
}

TEST_CASE("circuits") {
  SUBCASE("empty circuit") {
    auto s = new_zero_state(2);
    apply_gate(s, GateOp::h(1));
    const auto before = s.amplitudes();
    apply_circuit(s, Circuit(2));
    CHECK((s.amplitudes() - before).norm() == 0.0);
  }
  SUBCASE("H H") {
    auto s = new_zero_state(1);
    Circuit c(1);
    c.add(GateOp::h(0)).add(GateOp::h(0));
    apply_circuit(s, c);
    CHECK(close(s[0], 1.0));
  }
  SUBCASE("qubit mismatch") {
    auto s = new_zero_state(2);
    CHECK_THROWS_AS(apply_circuit(s, Circuit(3)), ShapeError);
  }
  SUBCASE("bell state") {
    auto s = new_zero_state(2);
    Circuit c(2);
    c.add(GateOp::h(0)).add(GateOp::cnot(0, 1));
    apply_circuit(s, c);
    const auto p = probabilities(s);
    CHECK(p.size() == 2);
    CHECK(p.at("00") == doctest::Approx(0.5));
    CHECK(p.at("11") == doctest::Approx(0.5));
  }
  SUBCASE("format") {
    Circuit c(2);
    c.add(GateOp::h(0)).add(GateOp::zzphase(0, 1, 0.5));
    const auto text = format_circuit(c);
    CHECK(text.find("H 0") != std::string::npos);
    CHECK(text.find("ZZPHASE 0 1") != std::string::npos);
  }
}

TEST_CASE("random circuits match the dense oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(3));
    const int len = static_cast<int>(rng.uniform_index(21));
    const auto c = oracle::random_circuit(n, len, rng);
    auto s = new_zero_state(n);
    apply_circuit(s, c);
    const auto ref = oracle::run(c);
    CHECK((s.amplitudes() - ref).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("norm is conserved") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = oracle::random_circuit(4, 40, rng);
    auto s = new_zero_state(4);
    for (const auto& g : c.gates) {
      apply_gate(s, g);
      CHECK(std::abs(s.norm_squared() - 1.0) <= 1e-12);
      CHECK(s.amplitudes().allFinite());
    }
  }
}

TEST_CASE("ZZPhase inverse restores the state") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = new_zero_state(3);
    apply_circuit(s, oracle::random_circuit(3, 12, rng));
    const auto before = s.amplitudes();
    const double phi = rng.uniform() * 10 - 5;
    apply_gate(s, GateOp::zzphase(0, 2, phi));
    apply_gate(s, GateOp::zzphase(0, 2, -phi));
    CHECK((s.amplitudes() - before).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("circuit inverse undoes the circuit") {
  Rng rng(8);
  auto c = oracle::random_circuit(3, 20, rng);
  auto s = new_zero_state(3);
  apply_circuit(s, c);
  apply_circuit(s, inverse(c));
  CHECK(std::abs(s[0] - 1.0) <= 1e-12);
}

TEST_CASE("probabilities") {
  CHECK(probabilities(new_zero_state(1)) == std::map<std::string, double>{{"0", 1.0}});

  Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
  bell[0] = bell[3] = kInvSqrt2;
  const auto p = probabilities(StateVector::from_amplitudes(bell));
  CHECK(p.at("00") == doctest::Approx(0.5));
  CHECK(p.at("11") == doctest::Approx(0.5));

  auto s = new_zero_state(1);
  apply_gate(s, GateOp::h(0));
  const auto q = probabilities(s);
  CHECK(q.at("0") == doctest::Approx(0.5));
  CHECK(q.at("1") == doctest::Approx(0.5));

  Rng rng(3);
  auto r = new_zero_state(3);
  apply_circuit(r, oracle::random_circuit(3, 15, rng));
  double total = 0.0;
  for (const auto& [bits, pb] : probabilities(r)) total += pb;
  CHECK(std::abs(total - 1.0) <= 1e-10);

  Eigen::VectorXcd bad = Eigen::VectorXcd::Constant(2, 1.0);
  CHECK_THROWS_AS(StateVector::from_amplitudes(bad), ArgumentError);
}

TEST_CASE("sampling") {
  SUBCASE("deterministic outcome") {
    const auto counts = sample(basis(1, 1), 100, 1);
    CHECK(counts == std::map<std::string, std::int64_t>{{"1", 100}});
  }
  SUBCASE("binomial concentration") {
    auto s = new_zero_state(1);
    apply_gate(s, GateOp::h(0));
    const auto counts = sample(s, 100000, 17);
    const double f = static_cast<double>(counts.at("0")) / 1e5;
    CHECK(f >= 0.49);
    CHECK(f <= 0.51);
  }
  SUBCASE("counts sum to shots and repeat under a seed") {
    Rng rng(12);
    auto s = new_zero_state(3);
    apply_circuit(s, oracle::random_circuit(3, 10, rng));
    const auto a = sample(s, 777, 42);
    const auto b = sample(s, 777, 42);
    CHECK(a == b);
    std::int64_t total = 0;
    for (const auto& [bits, c] : a) {
      total += c;
      CHECK(probabilities(s).count(bits) == 1);
    }
    CHECK(total == 777);
  }
  SUBCASE("frequency error shrinks with shots") {
    Rng rng(4);
    auto s = new_zero_state(2);
    apply_circuit(s, oracle::random_circuit(2, 10, rng));
    const auto p = probability_vector(s);
    double prev = 1.0;
    for (std::int64_t shots : {100, 10000, 1000000}) {
      double err = 0.0;
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto c = sample_counts(s, shots, seed);
        for (Eigen::Index i = 0; i < p.size(); ++i)
          err += std::abs(static_cast<double>(c[static_cast<std::size_t>(i)]) / static_cast<double>(shots) - p[i]);
      }
      err /= 10.0;
      CHECK(err < prev);
      CHECK(err <= 4.0 * 2.0 / std::sqrt(static_cast<double>(shots)));
      prev = err;
    }
  }
  SUBCASE("zero shots") {
    CHECK_THROWS_AS(sample(new_zero_state(1), 0, 1), ArgumentError);
  }
}

TEST_CASE("parity expectation") {
  auto plus = new_zero_state(1);
  apply_gate(plus, GateOp::h(0));
  CHECK(std::abs(expectation_pm1(plus, parity)) <= 1e-12);
  CHECK(expectation_pm1(basis(2, 3), parity) == doctest::Approx(1.0));

  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(4);
  amps[0] = amps[1] = kInvSqrt2;  // (|00> + |01>)/sqrt2
  CHECK(std::abs(expectation_pm1(StateVector::from_amplitudes(amps), parity)) <= 1e-12);
}

TEST_CASE("inner product") {
  Rng rng(6);
  auto s = new_zero_state(3);
  apply_circuit(s, oracle::random_circuit(3, 15, rng));
  CHECK(close(inner_product(s, s), 1.0, 1e-12));
  CHECK(close(inner_product(basis(1, 0), basis(1, 1)), 0.0));

  auto plus = new_zero_state(1);
  apply_gate(plus, GateOp::h(0));
  CHECK(close(inner_product(new_zero_state(1), plus), kInvSqrt2));

  // conjugate-linear in the first argument
  auto phased = new_zero_state(1);
  apply_gate(phased, GateOp::zphase(0, 0.3));
  CHECK(close(inner_product(phased, new_zero_state(1)), std::exp(cd(0, -0.3))));

  CHECK_THROWS_AS(inner_product(new_zero_state(1), new_zero_state(2)), ShapeError);
}

TEST_CASE("bitstrings") {
  CHECK(to_bitstring(1, 2) == "01");
  CHECK(to_bitstring(2, 2) == "10");
  CHECK(from_bitstring("110") == 6);
  for (std::uint64_t i = 0; i < 16; ++i) CHECK(from_bitstring(to_bitstring(i, 4)) == i);
}

TEST_CASE("single precision states") {
  BasicStateVector<float> s(2);
  s.apply(GateOp::h(0));
  s.apply(GateOp::cnot(0, 1));
  CHECK(std::abs(s.norm_squared() - 1.0f) < 1e-6f);
  CHECK(std::abs(s[3].real() - static_cast<float>(kInvSqrt2)) < 1e-6f);
}
