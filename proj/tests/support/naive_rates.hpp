// SPDX-License-Identifier: Apache-2.0
//
// Reference SINR evaluation with every product written as explicit scalar
// loops over elements and antennas. Shares no code with the library.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace naive {

using C = std::complex<double>;

struct Link {
  std::vector<std::vector<C>> H_br;  // K x N
  std::vector<C> h_r1, h_t2, h_re;   // K
  std::vector<C> h_b1, h_be;         // N
};

struct Surface {
  std::vector<double> beta_r, beta_t, beta_j;
  std::vector<C> phi_r, phi_t, phi_j;
};

struct Sinrs {
  double s11, s22, s12, se1;
};

/// sum_k conj(h_k) * beta_k * phi_k * sum_n H_br[k][n] * w[n]  (+ sum_n conj(d_n) w_n)
inline C response(const Link& L, const std::vector<C>& h, const std::vector<double>& beta,
                  const std::vector<C>& phi, const std::vector<C>* direct,
                  const std::vector<C>& w) {
  C acc = 0.0;
  const std::size_t K = h.size();
  const std::size_t N = w.size();
  for (std::size_t k = 0; k < K; ++k) {
    C hw = 0.0;
    for (std::size_t n = 0; n < N; ++n) hw += L.H_br[k][n] * w[n];
    acc += std::conj(h[k]) * (beta[k] * phi[k]) * hw;
  }
  if (direct != nullptr) {
    for (std::size_t n = 0; n < N; ++n) acc += std::conj((*direct)[n]) * w[n];
  }
  return acc;
}

inline double sq(C z) { return z.real() * z.real() + z.imag() * z.imag(); }

inline Sinrs sinrs(const Link& L, const Surface& S, const std::vector<C>& w1,
                   const std::vector<C>& w2, double sigma2) {
  const double g1w1 = sq(response(L, L.h_r1, S.beta_r, S.phi_r, &L.h_b1, w1));
  const double g1w2 = sq(response(L, L.h_r1, S.beta_r, S.phi_r, &L.h_b1, w2));
  const double j1w1 = sq(response(L, L.h_r1, S.beta_j, S.phi_j, nullptr, w1));
  const double g2w1 = sq(response(L, L.h_t2, S.beta_t, S.phi_t, nullptr, w1));
  const double g2w2 = sq(response(L, L.h_t2, S.beta_t, S.phi_t, nullptr, w2));
  const double gew1 = sq(response(L, L.h_re, S.beta_r, S.phi_r, &L.h_be, w1));
  const double jew1 = sq(response(L, L.h_re, S.beta_j, S.phi_j, nullptr, w1));
  const double jew2 = sq(response(L, L.h_re, S.beta_j, S.phi_j, nullptr, w2));
  return {g1w1 / (g1w2 + j1w1 + sigma2), g2w2 / (g2w1 + sigma2), g1w2 / (g1w1 + j1w1 + sigma2),
          gew1 / (jew1 + jew2 + sigma2)};
}

}  // namespace naive
