#pragma once

// Shared helpers for the test suites: dense-matrix reference implementations
// kept independent of the library's stride/permutation code paths.

#include <complex>
#include <cstdint>
#include <vector>

#include "qlam/quantum.hpp"

namespace testsupport {

using qlam::cx;
using Mat = std::vector<std::vector<cx>>;

inline Mat identity_mat(std::size_t n) {
  Mat m(n, std::vector<cx>(n, cx(0, 0)));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = cx(1, 0);
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  std::size_t ar = a.size(), br = b.size();
  Mat m(ar * br, std::vector<cx>(ar * br, cx(0, 0)));
  for (std::size_t i = 0; i < ar; ++i)
    for (std::size_t j = 0; j < ar; ++j)
      for (std::size_t k = 0; k < br; ++k)
        for (std::size_t l = 0; l < br; ++l) m[i * br + k][j * br + l] = a[i][j] * b[k][l];
  return m;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  std::size_t n = a.size();
  Mat m(n, std::vector<cx>(n, cx(0, 0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) m[i][j] += a[i][k] * b[k][j];
  return m;
}

inline std::vector<cx> matvec(const Mat& a, const std::vector<cx>& v) {
  std::vector<cx> out(v.size(), cx(0, 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) out[i] += a[i][j] * v[j];
  return out;
}

// Matrix of the operator |b1...bn> -> |b_t(1)...b_t(n)>, built by direct bit
// shuffling (independent of qlam::apply_permutation).
inline Mat perm_matrix(const std::vector<int>& target /*1-based*/) {
  int n = static_cast<int>(target.size());
  std::size_t dim = std::size_t(1) << n;
  Mat m(dim, std::vector<cx>(dim, cx(0, 0)));
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t o = 0;
    for (int k = 1; k <= n; ++k) {
      std::size_t bit = (i >> (n - target[k - 1])) & 1u;
      o |= bit << (n - k);
    }
    m[o][i] = cx(1, 0);
  }
  return m;
}

// Reference for lifted gate application: conjugate kron(G, I) with the
// permutation that brings the selected wires to the front.
inline Mat lifted_matrix(const qlam::Gate& g, const std::vector<int>& wires, int n) {
  int m = g.arity;
  std::vector<int> tau;  // tau[k-1] = source qubit for position k
  tau.insert(tau.end(), wires.begin(), wires.end());
  for (int q = 1; q <= n; ++q)
    if (std::find(wires.begin(), wires.end(), q) == wires.end()) tau.push_back(q);
  Mat front = kron(g.matrix, identity_mat(std::size_t(1) << (n - m)));
  std::vector<int> tau_inv(n);
  for (int k = 1; k <= n; ++k) tau_inv[tau[k - 1] - 1] = k;
  return matmul(perm_matrix(tau_inv), matmul(front, perm_matrix(tau)));
}

inline qlam::Register apply_oracle(const qlam::Gate& g, const std::vector<int>& wires,
                                   const qlam::Register& r) {
  qlam::Register out = r;
  out.amps = matvec(lifted_matrix(g, wires, r.qubits), r.amps);
  return out;
}

}  // namespace testsupport
