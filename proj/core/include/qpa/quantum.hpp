/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace qpa {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kDefaultTol = 1e-9;
inline constexpr int kMaxQubits = 12;

/// The quantum part of a configuration: a density operator over a named
/// qubit register. The register order is fixed at construction; qubit 0 is
/// the most significant bit of the computational-basis index.
class DensityMatrix {
 public:
  DensityMatrix();  // scalar state on an empty register (1x1 identity)

  static DensityMatrix zero_state(std::vector<std::string> qubits);
  /// |b_k><b_k| on two fresh qubits; k in 1..4.
  static DensityMatrix bell_state(int k, const std::string& q1 = "q1",
                                  const std::string& q2 = "q2");
  /// Validates hermiticity, unit trace and positivity at tolerance `tol`.
  static DensityMatrix from_matrix(std::vector<std::string> qubits, Matrix m,
                                   double tol = kDefaultTol);

  int num_qubits() const { return static_cast<int>(qubits_.size()); }
  Eigen::Index dim() const { return m_.rows(); }
  const std::vector<std::string>& qubits() const { return qubits_; }
  const Matrix& matrix() const { return m_; }
  int qubit_index(const std::string& name) const;  // -1 if absent

  DensityMatrix tensor(const DensityMatrix& other) const;
  /// Reorders the register; `order` must be a permutation of the qubits.
  DensityMatrix reorder(const std::vector<std::string>& order) const;
  /// Traces out every qubit not in `keep`; result register order is `keep`.
  DensityMatrix partial_trace_keep(const std::vector<std::string>& keep) const;

  double trace_error() const;     // |tr - 1|
  double hermiticity_error() const;
  double min_eigenvalue() const;
  void validate(double tol = kDefaultTol) const;

  /// FNV hash of the entries quantized at 1e-9; equal states collide.
  uint64_t digest() const;

 private:
  std::vector<std::string> qubits_;
  Matrix m_;
};

/// True iff both registers hold the same qubits and the max-norm of the
/// difference (after reordering b to a's register order) is <= tol.
/// Throws std::invalid_argument on register mismatch.
bool states_equal(const DensityMatrix& a, const DensityMatrix& b, double tol = kDefaultTol);

/// Max-norm distance; registers must match as in states_equal.
double state_distance(const DensityMatrix& a, const DensityMatrix& b);

/// A named quantum operation: a Kraus family acting on an ordered list of
/// qubits. Trace preservation (sum K^dag K = I) is checked by validate().
struct QuantumOperationDef {
  std::string name;
  std::vector<std::string> qubits;
  std::vector<Matrix> kraus;

  void validate(double tol = kDefaultTol) const;
};

/// Applies the operation to `rho`, embedding each Kraus operator on the
/// op's qubits through the tensor structure of the register.
DensityMatrix apply_operation(const QuantumOperationDef& op, const DensityMatrix& rho);

/// Built-in gates: I, X, Z, H, CNOT (2 qubits), MeasZ (outcome-summed
/// computational-basis measurement). Throws on unknown name or arity.
QuantumOperationDef builtin_gate(const std::string& gate, const std::vector<std::string>& qubits);
bool is_builtin_gate(const std::string& gate);

}  // namespace qpa
