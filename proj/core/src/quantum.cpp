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
#include "qpa/quantum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace qpa {

namespace {

void check_register(const std::vector<std::string>& qubits) {
  if (qubits.size() > static_cast<size_t>(kMaxQubits))
    throw std::invalid_argument("register exceeds " + std::to_string(kMaxQubits) + " qubits");
  std::unordered_set<std::string> seen;
  for (const auto& q : qubits)
    if (!seen.insert(q).second)
      throw std::invalid_argument("duplicate qubit name '" + q + "'");
}

}  // namespace

DensityMatrix::DensityMatrix() : m_(Matrix::Identity(1, 1)) {}

DensityMatrix DensityMatrix::zero_state(std::vector<std::string> qubits) {
  check_register(qubits);
  DensityMatrix d;
  d.qubits_ = std::move(qubits);
  Eigen::Index n = Eigen::Index(1) << d.qubits_.size();
  d.m_ = Matrix::Zero(n, n);
  d.m_(0, 0) = 1.0;
  return d;
}

DensityMatrix DensityMatrix::bell_state(int k, const std::string& q1, const std::string& q2) {
  if (k < 1 || k > 4) throw std::invalid_argument("bell_state: k must be in 1..4");
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  const double s = 1.0 / std::sqrt(2.0);
  switch (k) {
    case 1: v(0) = s; v(3) = s; break;   // (|00> + |11>)/sqrt(2)
    case 2: v(0) = s; v(3) = -s; break;  // (|00> - |11>)/sqrt(2)
    case 3: v(1) = s; v(2) = s; break;   // (|01> + |10>)/sqrt(2)
    case 4: v(1) = s; v(2) = -s; break;  // (|01> - |10>)/sqrt(2)
  }
  DensityMatrix d;
  d.qubits_ = {q1, q2};
  check_register(d.qubits_);
  d.m_ = v * v.adjoint();
  return d;
}

DensityMatrix DensityMatrix::from_matrix(std::vector<std::string> qubits, Matrix m, double tol) {
  check_register(qubits);
  Eigen::Index n = Eigen::Index(1) << qubits.size();
  if (m.rows() != n || m.cols() != n)
    throw std::invalid_argument("from_matrix: dimension does not match register size");
  DensityMatrix d;
  d.qubits_ = std::move(qubits);
  d.m_ = std::move(m);
  d.validate(tol);
  return d;
}

int DensityMatrix::qubit_index(const std::string& name) const {
  for (size_t i = 0; i < qubits_.size(); ++i)
    if (qubits_[i] == name) return static_cast<int>(i);
  return -1;
}

DensityMatrix DensityMatrix::tensor(const DensityMatrix& other) const {
  DensityMatrix d;
  d.qubits_ = qubits_;
  d.qubits_.insert(d.qubits_.end(), other.qubits_.begin(), other.qubits_.end());
  check_register(d.qubits_);
  const Eigen::Index ra = m_.rows(), rb = other.m_.rows();
  d.m_ = Matrix::Zero(ra * rb, ra * rb);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = 0; j < ra; ++j)
      d.m_.block(i * rb, j * rb, rb, rb) = m_(i, j) * other.m_;
  return d;
}

DensityMatrix DensityMatrix::reorder(const std::vector<std::string>& order) const {
  if (order == qubits_) return *this;
  if (order.size() != qubits_.size())
    throw std::invalid_argument("reorder: register size mismatch");
  const int n = num_qubits();
  std::vector<int> src_pos(n);  // position in the current register of order[i]
  for (int i = 0; i < n; ++i) {
    int p = qubit_index(order[i]);
    if (p < 0) throw std::invalid_argument("reorder: unknown qubit '" + order[i] + "'");
    src_pos[i] = p;
  }
  const Eigen::Index dimn = dim();
  auto map_index = [&](Eigen::Index j) {
    Eigen::Index out = 0;
    for (int i = 0; i < n; ++i) {
      Eigen::Index bit = (j >> (n - 1 - src_pos[i])) & 1;
      out |= bit << (n - 1 - i);
    }
    return out;
  };
  DensityMatrix d;
  d.qubits_ = order;
  d.m_ = Matrix::Zero(dimn, dimn);
  for (Eigen::Index r = 0; r < dimn; ++r) {
    Eigen::Index rr = map_index(r);
    for (Eigen::Index c = 0; c < dimn; ++c) d.m_(rr, map_index(c)) = m_(r, c);
  }
  return d;
}

DensityMatrix DensityMatrix::partial_trace_keep(const std::vector<std::string>& keep) const {
  std::vector<int> keep_pos;
  keep_pos.reserve(keep.size());
  for (const auto& q : keep) {
    int p = qubit_index(q);
    if (p < 0) throw std::invalid_argument("partial_trace: unknown qubit '" + q + "'");
    keep_pos.push_back(p);
  }
  const int n = num_qubits();
  std::vector<int> traced;
  for (int i = 0; i < n; ++i)
    if (std::find(keep_pos.begin(), keep_pos.end(), i) == keep_pos.end()) traced.push_back(i);

  const int k = static_cast<int>(keep_pos.size());
  const int t = static_cast<int>(traced.size());
  const Eigen::Index dk = Eigen::Index(1) << k;
  const Eigen::Index dt = Eigen::Index(1) << t;
  auto full_index = [&](Eigen::Index kept_bits, Eigen::Index traced_bits) {
    Eigen::Index idx = 0;
    for (int i = 0; i < k; ++i) {
      Eigen::Index bit = (kept_bits >> (k - 1 - i)) & 1;
      idx |= bit << (n - 1 - keep_pos[i]);
    }
    for (int i = 0; i < t; ++i) {
      Eigen::Index bit = (traced_bits >> (t - 1 - i)) & 1;
      idx |= bit << (n - 1 - traced[i]);
    }
    return idx;
  };
  DensityMatrix d;
  d.qubits_ = keep;
  d.m_ = Matrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r)
    for (Eigen::Index c = 0; c < dk; ++c) {
      Cplx acc = 0.0;
      for (Eigen::Index e = 0; e < dt; ++e) acc += m_(full_index(r, e), full_index(c, e));
      d.m_(r, c) = acc;
    }
  return d;
}

double DensityMatrix::trace_error() const { return std::abs(m_.trace() - Cplx(1.0)); }

double DensityMatrix::hermiticity_error() const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m_ + m_.adjoint()) / 2.0);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate(double tol) const {
  if (hermiticity_error() > tol)
    throw std::invalid_argument("density matrix is not hermitian within tolerance");
  if (trace_error() > tol)
    throw std::invalid_argument("density matrix trace differs from 1 beyond tolerance");
  if (min_eigenvalue() < -tol)
    throw std::invalid_argument("density matrix has a negative eigenvalue beyond tolerance");
}

uint64_t DensityMatrix::digest() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](int64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<unsigned char>(v >> (8 * i));
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<int64_t>(qubits_.size()));
  const double scale = 1e9;
  for (Eigen::Index r = 0; r < m_.rows(); ++r)
    for (Eigen::Index c = 0; c < m_.cols(); ++c) {
      mix(std::llround(m_(r, c).real() * scale));
      mix(std::llround(m_(r, c).imag() * scale));
    }
  return h;
}

bool states_equal(const DensityMatrix& a, const DensityMatrix& b, double tol) {
  return state_distance(a, b) <= tol;
}

double state_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.num_qubits() != b.num_qubits())
    throw std::invalid_argument("states_equal: register mismatch");
  for (const auto& q : a.qubits())
    if (b.qubit_index(q) < 0)
      throw std::invalid_argument("states_equal: register mismatch (qubit '" + q + "')");
  if (a.qubits() == b.qubits()) return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
  DensityMatrix bb = b.reorder(a.qubits());
  return (a.matrix() - bb.matrix()).cwiseAbs().maxCoeff();
}

void QuantumOperationDef::validate(double tol) const {
  if (qubits.empty()) throw std::invalid_argument("operation '" + name + "' acts on no qubits");
  check_register(qubits);
  if (kraus.empty()) throw std::invalid_argument("operation '" + name + "' has no Kraus terms");
  const Eigen::Index d = Eigen::Index(1) << qubits.size();
  Matrix acc = Matrix::Zero(d, d);
  for (const auto& k : kraus) {
    if (k.rows() != d || k.cols() != d)
      throw std::invalid_argument("operation '" + name + "': Kraus dimension mismatch");
    acc += k.adjoint() * k;
  }
  if ((acc - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("operation '" + name +
                                "': Kraus family is not trace-preserving");
}

DensityMatrix apply_operation(const QuantumOperationDef& op, const DensityMatrix& rho) {
  const int n = rho.num_qubits();
  std::vector<int> pos(op.qubits.size());
  for (size_t i = 0; i < op.qubits.size(); ++i) {
    int p = rho.qubit_index(op.qubits[i]);
    if (p < 0)
      throw std::invalid_argument("apply_operation: unknown qubit '" + op.qubits[i] + "'");
    pos[i] = p;
  }
  const int k = static_cast<int>(op.qubits.size());
  const Eigen::Index dimn = rho.dim();
  const Eigen::Index dk = Eigen::Index(1) << k;

  // Embed K on the op qubits: F[i,j] = K[sub(i),sub(j)] when the remaining
  // bits of i and j agree, 0 otherwise.
  auto sub_index = [&](Eigen::Index full) {
    Eigen::Index s = 0;
    for (int i = 0; i < k; ++i) {
      Eigen::Index bit = (full >> (n - 1 - pos[i])) & 1;
      s |= bit << (k - 1 - i);
    }
    return s;
  };
  Eigen::Index rest_mask = dimn - 1;
  for (int i = 0; i < k; ++i) rest_mask &= ~(Eigen::Index(1) << (n - 1 - pos[i]));

  Matrix out = Matrix::Zero(dimn, dimn);
  for (const auto& kr : op.kraus) {
    if (kr.rows() != dk)
      throw std::invalid_argument("apply_operation: Kraus dimension mismatch for '" + op.name +
                                  "'");
    Matrix full = Matrix::Zero(dimn, dimn);
    for (Eigen::Index i = 0; i < dimn; ++i) {
      Eigen::Index si = sub_index(i);
      Eigen::Index resti = i & rest_mask;
      for (Eigen::Index sj = 0; sj < dk; ++sj) {
        Cplx v = kr(si, sj);
        if (v == Cplx(0.0)) continue;
        // Rebuild the column index: same rest bits, op bits = sj.
        Eigen::Index j = resti;
        for (int b = 0; b < k; ++b) {
          Eigen::Index bit = (sj >> (k - 1 - b)) & 1;
          j |= bit << (n - 1 - pos[b]);
        }
        full(i, j) = v;
      }
    }
    out += full * rho.matrix() * full.adjoint();
  }
  return DensityMatrix::from_matrix(rho.qubits(), std::move(out), 1e-6);
}

namespace {

Matrix mat2(Cplx a, Cplx b, Cplx c, Cplx d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

bool is_builtin_gate(const std::string& gate) {
  return gate == "I" || gate == "X" || gate == "Z" || gate == "H" || gate == "CNOT" ||
         gate == "MeasZ";
}

QuantumOperationDef builtin_gate(const std::string& gate, const std::vector<std::string>& qubits) {
  QuantumOperationDef def;
  def.qubits = qubits;
  def.name = gate;
  auto need = [&](size_t n) {
    if (qubits.size() != n)
      throw std::invalid_argument("gate " + gate + " expects " + std::to_string(n) + " qubit(s)");
  };
  if (gate == "I") {
    need(1);
    def.kraus = {mat2(1, 0, 0, 1)};
  } else if (gate == "X") {
    need(1);
    def.kraus = {mat2(0, 1, 1, 0)};
  } else if (gate == "Z") {
    need(1);
    def.kraus = {mat2(1, 0, 0, -1)};
  } else if (gate == "H") {
    need(1);
    const double s = 1.0 / std::sqrt(2.0);
    def.kraus = {mat2(s, s, s, -s)};
  } else if (gate == "CNOT") {
    need(2);
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = 1;
    m(1, 1) = 1;
    m(2, 3) = 1;
    m(3, 2) = 1;
    def.kraus = {m};
  } else if (gate == "MeasZ") {
    need(1);
    def.kraus = {mat2(1, 0, 0, 0), mat2(0, 0, 0, 1)};
  } else {
    throw std::invalid_argument("unknown builtin gate '" + gate + "'");
  }
  return def;
}

}  // namespace qpa
