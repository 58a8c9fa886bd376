#include <doctest.h>

#include "support.hpp"

using namespace qpa;
using namespace qpa::testing;

TEST_SUITE_BEGIN("quantum");

TEST_CASE("bell states have the expected entries") {
  DensityMatrix b1 = DensityMatrix::bell_state(1);
  CHECK(b1.matrix()(0, 0).real() == doctest::Approx(0.5));
  CHECK(b1.matrix()(0, 3).real() == doctest::Approx(0.5));
  CHECK(b1.matrix()(3, 0).real() == doctest::Approx(0.5));
  CHECK(b1.matrix()(3, 3).real() == doctest::Approx(0.5));
  CHECK(std::abs(b1.matrix()(1, 1)) == doctest::Approx(0.0));

  DensityMatrix b4 = DensityMatrix::bell_state(4);
  CHECK(b4.matrix()(1, 1).real() == doctest::Approx(0.5));
  CHECK(b4.matrix()(2, 2).real() == doctest::Approx(0.5));
  CHECK(b4.matrix()(1, 2).real() == doctest::Approx(-0.5));
  CHECK(b4.matrix()(2, 1).real() == doctest::Approx(-0.5));

  for (int k = 1; k <= 4; ++k) {
    DensityMatrix b = DensityMatrix::bell_state(k);
    CHECK(b.trace_error() < 1e-12);
    // Purity tr(rho^2) = 1 for pure states.
    CHECK(std::abs((b.matrix() * b.matrix()).trace() - Cplx(1.0)) < 1e-12);
  }
  CHECK_THROWS_AS(DensityMatrix::bell_state(5), std::invalid_argument);
}

TEST_CASE("bit flip maps |0><0| to |1><1|") {
  DensityMatrix rho = DensityMatrix::zero_state({"q"});
  DensityMatrix out = apply_operation(builtin_gate("X", {"q"}), rho);
  CHECK(out.matrix()(1, 1).real() == doctest::Approx(1.0));
  CHECK(std::abs(out.matrix()(0, 0)) == doctest::Approx(0.0));
}

TEST_CASE("identity operation preserves the state exactly") {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    DensityMatrix rho = random_state(rng, {"q1", "q2"});
    DensityMatrix out = apply_operation(builtin_gate("I", {"q1"}), rho);
    CHECK((out.matrix() - rho.matrix()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
}

TEST_CASE("summed measurement of the first qubit of a bell pair") {
  // Oracle (worked by hand): M0 = P0 (x) I keeps rows/cols {00,01}; on b1
  // only the (00,00) entry of value 1/2 survives. M1 symmetric gives
  // (11,11). Sum: diag(1/2, 0, 0, 1/2).
  DensityMatrix b1 = DensityMatrix::bell_state(1, "qa", "qb");
  DensityMatrix out = apply_operation(builtin_gate("MeasZ", {"qa"}), b1);
  Matrix expect = Matrix::Zero(4, 4);
  expect(0, 0) = 0.5;
  expect(3, 3) = 0.5;
  CHECK((out.matrix() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trace preservation and positivity under random channels") {
  Rng rng(17);
  std::vector<QuantumOperationDef> ops = {
      builtin_gate("H", {"q1"}), builtin_gate("MeasZ", {"q2"}),
      builtin_gate("CNOT", {"q1", "q2"}), builtin_gate("Z", {"q2"})};
  for (int i = 0; i < 40; ++i) {
    DensityMatrix rho = random_state(rng, {"q1", "q2"});
    const auto& op = ops[i % ops.size()];
    DensityMatrix out = apply_operation(op, rho);
    CHECK(out.trace_error() < 1e-9);
    CHECK(out.min_eigenvalue() > -1e-9);
  }
}

TEST_CASE("unitary conjugation composed with its adjoint is the identity") {
  Rng rng(29);
  for (const char* g : {"X", "Z", "H"}) {
    QuantumOperationDef op = builtin_gate(g, {"q1"});
    QuantumOperationDef adj = op;
    adj.kraus[0] = op.kraus[0].adjoint().eval();
    for (int i = 0; i < 10; ++i) {
      DensityMatrix rho = random_state(rng, {"q1"});
      DensityMatrix out = apply_operation(adj, apply_operation(op, rho));
      CHECK(states_equal(out, rho, 1e-9));
    }
  }
}

TEST_CASE("tensor-product inner products factor over the components") {
  Rng rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_vec = [&](int d) {
    Eigen::VectorXcd v(d);
    for (int i = 0; i < d; ++i) v(i) = Cplx(gauss(rng), gauss(rng));
    return v;
  };
  for (int i = 0; i < 25; ++i) {
    Eigen::VectorXcd phi1 = random_vec(2), phi2 = random_vec(2);
    Eigen::VectorXcd psi1 = random_vec(2), psi2 = random_vec(2);
    Eigen::VectorXcd phi(4), psi(4);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        phi(2 * a + b) = phi1(a) * phi2(b);
        psi(2 * a + b) = psi1(a) * psi2(b);
      }
    Cplx direct = phi.dot(psi);  // Eigen dot conjugates the left argument
    Cplx factored = phi1.dot(psi1) * phi2.dot(psi2);
    CHECK(std::abs(direct - factored) < 1e-9);
  }
}

TEST_CASE("states_equal distinguishes registers and states") {
  DensityMatrix z1 = DensityMatrix::zero_state({"q"});
  DensityMatrix one = apply_operation(builtin_gate("X", {"q"}), z1);
  CHECK(states_equal(z1, z1, 1e-9));
  CHECK_FALSE(states_equal(z1, one, 1e-9));
  CHECK_FALSE(states_equal(DensityMatrix::bell_state(1), DensityMatrix::bell_state(2), 1e-9));
  CHECK_THROWS_AS((void)states_equal(z1, DensityMatrix::zero_state({"p"}), 1e-9),
                  std::invalid_argument);
}

TEST_CASE("register reordering is consistent") {
  Rng rng(37);
  DensityMatrix rho = random_state(rng, {"q1", "q2", "q3"});
  DensityMatrix perm = rho.reorder({"q3", "q1", "q2"});
  DensityMatrix back = perm.reorder({"q1", "q2", "q3"});
  CHECK((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(states_equal(perm, rho, 1e-9));  // states_equal reorders internally
}

TEST_CASE("partial trace of a product state recovers the factor") {
  DensityMatrix b1 = DensityMatrix::bell_state(1, "qa", "qb");
  DensityMatrix z = DensityMatrix::zero_state({"e"});
  DensityMatrix whole = b1.tensor(z);
  DensityMatrix reduced = whole.partial_trace_keep({"qa", "qb"});
  CHECK((reduced.matrix() - b1.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  // Tracing an entangled half yields the maximally mixed state.
  DensityMatrix half = b1.partial_trace_keep({"qa"});
  CHECK(half.matrix()(0, 0).real() == doctest::Approx(0.5));
  CHECK(half.matrix()(1, 1).real() == doctest::Approx(0.5));
}

TEST_CASE("kraus completeness and unknown qubits are rejected") {
  QuantumOperationDef bad;
  bad.name = "bad";
  bad.qubits = {"q"};
  Matrix half = Matrix::Zero(2, 2);
  half(0, 0) = 1.0;
  bad.kraus = {half};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  DensityMatrix rho = DensityMatrix::zero_state({"q"});
  CHECK_THROWS_AS((void)apply_operation(builtin_gate("X", {"other"}), rho),
                  std::invalid_argument);
}

TEST_SUITE_END();
