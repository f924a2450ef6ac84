// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "starsec/rates.hpp"
#include "support/naive_rates.hpp"

using namespace starsec;

namespace {

struct Instance {
  ChannelRealization ch;
  StarRisState state;
  CVector w1, w2;
};

CVector random_cvec(int n, Rng& rng) {
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.complex_normal();
  return v;
}

/// Random channel with unit-scale entries, random relaxed or binary state.
Instance random_instance(Rng& rng, bool binary) {
  const int K = 1 + static_cast<int>(rng.uniform() * 12);
  const int N = 1 + static_cast<int>(rng.uniform() * 4);
  Instance in;
  in.ch.H_br = draw_rayleigh(K, N, rng);
  in.ch.h_r1 = random_cvec(K, rng);
  in.ch.h_t2 = random_cvec(K, rng);
  in.ch.h_re = random_cvec(K, rng);
  in.ch.h_b1 = random_cvec(N, rng);
  in.ch.h_be = random_cvec(N, rng);
  in.state = StarRisState::zeros(K);
  for (int k = 0; k < K; ++k) {
    if (binary) {
      const int m = static_cast<int>(rng.uniform() * 3);
      in.state.beta(kModes[m])[k] = 1.0;
    } else {
      double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
      const double s = a + b + c;
      in.state.beta_r[k] = a / s;
      in.state.beta_t[k] = b / s;
      in.state.beta_j[k] = c / s;
    }
    for (Mode m : kModes) {
      in.state.phi(m)[k] = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
    }
  }
  in.w1 = random_cvec(N, rng);
  in.w2 = random_cvec(N, rng);
  return in;
}

std::vector<naive::C> to_std(const CVector& v) { return {v.data(), v.data() + v.size()}; }
std::vector<double> to_std(const RVector& v) { return {v.data(), v.data() + v.size()}; }

naive::Link to_naive(const ChannelRealization& ch) {
  naive::Link L;
  L.H_br.assign(ch.H_br.rows(), std::vector<naive::C>(ch.H_br.cols()));
  for (int k = 0; k < ch.H_br.rows(); ++k)
    for (int n = 0; n < ch.H_br.cols(); ++n) L.H_br[k][n] = ch.H_br(k, n);
  L.h_r1 = to_std(ch.h_r1);
  L.h_t2 = to_std(ch.h_t2);
  L.h_re = to_std(ch.h_re);
  L.h_b1 = to_std(ch.h_b1);
  L.h_be = to_std(ch.h_be);
  return L;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("assemble_theta") {
  StarRisState s = StarRisState::zeros(3);
  s.beta_r.setOnes();
  s.phi_r.setOnes();
  CHECK((assemble_theta(s, Mode::reflect) - CMatrix::Identity(3, 3)).norm() == 0.0);
  CHECK(assemble_theta(s, Mode::transmit).norm() == 0.0);
  CHECK(assemble_theta(s, Mode::jam).norm() == 0.0);

  s.beta_r[1] = 0.0;
  s.beta_j[1] = 1.0;
  s.phi_j[1] = std::polar(1.0, std::numbers::pi / 2);
  const CMatrix Tj = assemble_theta(s, Mode::jam);
  CHECK(std::abs(Tj(1, 1) - cplx(0.0, 1.0)) < 1e-15);
  CHECK(assemble_theta(s, Mode::reflect)(1, 1) == cplx(0.0, 0.0));

  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const Instance in = random_instance(rng, true);
    for (int k = 0; k < in.state.K(); ++k) {
      int active = 0;
      for (Mode m : kModes) {
        const double mag = std::abs(assemble_theta(in.state, m)(k, k));
        CHECK((std::abs(mag) < 1e-15 || std::abs(mag - 1.0) < 1e-12));
        active += mag > 0.5 ? 1 : 0;
      }
      CHECK(active == 1);
    }
  }
}

TEST_CASE("compute_rates trivial cases") {
  Rng rng(5);
  Instance in = random_instance(rng, true);
  const auto N = in.w1.size();
  auto zero = BeamformerSolution::from_vectors(CVector::Zero(N), CVector::Zero(N));
  const RateReport r = compute_rates(in.ch, zero, in.state, 1.0, 1.0);
  CHECK(r.sum_rate == 0.0);
  CHECK(r.sinr_11 == 0.0);
  CHECK(r.sinr_e1 == 0.0);

  in.ch.h_re.setZero();
  in.ch.h_be.setZero();
  const RateReport q =
      compute_rates(in.ch, BeamformerSolution::from_vectors(in.w1, in.w2), in.state, 1.0, 1e-3);
  CHECK(q.sinr_e1 == 0.0);
  CHECK(q.leakage_ok);

  CHECK_THROWS_AS(compute_rates(in.ch, BeamformerSolution::from_vectors(CVector::Zero(N + 1), CVector::Zero(N + 1)),
                                in.state, 1.0, 1.0),
                  DimensionError);
}

TEST_CASE("compute_rates matches the naive-loop oracle") {
  Rng rng(6);
  for (int t = 0; t < 1000; ++t) {
    const Instance in = random_instance(rng, t % 2 == 0);
    const double sigma2 = 0.1 + rng.uniform();
    const RateReport r = compute_rates(in.ch, BeamformerSolution::from_vectors(in.w1, in.w2),
                                       in.state, sigma2, 1.0);
    naive::Surface S{to_std(in.state.beta_r), to_std(in.state.beta_t), to_std(in.state.beta_j),
                     to_std(in.state.phi_r),  to_std(in.state.phi_t),  to_std(in.state.phi_j)};
    const naive::Sinrs o = naive::sinrs(to_naive(in.ch), S, to_std(in.w1), to_std(in.w2), sigma2);
    CHECK(rel(r.sinr_11, o.s11) <= 1e-10);
    CHECK(rel(r.sinr_22, o.s22) <= 1e-10);
    CHECK(rel(r.sinr_12, o.s12) <= 1e-10);
    CHECK(rel(r.sinr_e1, o.se1) <= 1e-10);
    CHECK(r.r_11 == std::log2(1.0 + r.sinr_11));
    CHECK(r.sum_rate == r.r_11 + r.r_22);
  }
}

TEST_CASE("effective channels") {
  ChannelRealization ch;
  ch.H_br = CMatrix::Ones(1, 1);
  ch.h_r1 = ch.h_t2 = ch.h_re = CVector::Ones(1);
  ch.h_b1 = ch.h_be = CVector::Ones(1);
  const auto e = build_effective_channels(ch);
  CHECK(e.H1 == CMatrix::Ones(2, 1));

  SystemConfig cfg;
  auto big = generate_channels(cfg, 1);
  auto eb = build_effective_channels(big);
  CHECK(eb.H1.rows() == 31);
  CHECK(eb.H1.cols() == 2);
  CHECK(eb.H2.rows() == 30);
  CHECK(eb.He.rows() == 31);
  CHECK((eb.H1.row(30) - big.h_b1.adjoint()).norm() == 0.0);
  CHECK((eb.He.row(30) - big.h_be.adjoint()).norm() == 0.0);
  CHECK((eb.H1.topRows(30) - big.h_r1.adjoint().asDiagonal() * big.H_br).norm() < 1e-30);
  big.h_b1.setZero();
  CHECK(build_effective_channels(big).H1.row(30).norm() == 0.0);
}

TEST_CASE("lifted trace identity") {
  Rng rng(7);
  CHECK(lifted_trace(CMatrix::Ones(3, 2), CMatrix::Zero(2, 2), CMatrix::Identity(3, 3)) == 0.0);
  CHECK_THROWS_AS(lifted_trace(CMatrix::Ones(3, 2), CMatrix::Zero(3, 3), CMatrix::Identity(3, 3)),
                  DimensionError);
  for (int t = 0; t < 1000; ++t) {
    const Instance in = random_instance(rng, false);
    const auto& ch = in.ch;
    const auto e = build_effective_channels(ch);
    const CMatrix W = outer(in.w1);
    const StarRisState& s = in.state;
    const CMatrix Tr = assemble_theta(s, Mode::reflect);
    const CMatrix Tt = assemble_theta(s, Mode::transmit);
    const CMatrix Tj = assemble_theta(s, Mode::jam);
    const CVector dr = Tr.diagonal();
    const CVector dt = Tt.diagonal();
    const CVector dj = Tj.diagonal();

    const double u1 = std::norm((cascade(ch.h_r1, Tr, ch.H_br, ch.h_b1) * in.w1).value());
    const double u2 = std::norm((cascade(ch.h_t2, Tt, ch.H_br) * in.w1).value());
    const double ev = std::norm((cascade(ch.h_re, Tr, ch.H_br, ch.h_be) * in.w1).value());
    const double jm = std::norm((cascade(ch.h_r1, Tj, ch.H_br) * in.w1).value());
    CHECK(rel(lifted_trace(e.H1, W, outer(lift_vector(dr, 1.0))), u1) <= 1e-9);
    CHECK(rel(lifted_trace(e.H2, W, outer(lift_vector(dt))), u2) <= 1e-9);
    CHECK(rel(lifted_trace(e.He, W, outer(lift_vector(dr, 1.0))), ev) <= 1e-9);
    CHECK(rel(lifted_trace(e.H1, W, outer(lift_vector(dj, 0.0))), jm) <= 1e-9);
  }
}

TEST_CASE("SINR_22 is invariant under common scaling of beams and noise amplitude") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const Instance in = random_instance(rng, true);
    const double c = 0.5 + 3.0 * rng.uniform();
    const double sigma2 = 0.3;
    const auto a = compute_rates(in.ch, BeamformerSolution::from_vectors(in.w1, in.w2), in.state, sigma2, 1.0);
    const auto b = compute_rates(in.ch, BeamformerSolution::from_vectors(c * in.w1, c * in.w2), in.state,
                                 c * c * sigma2, 1.0);
    CHECK(b.sinr_22 == doctest::Approx(a.sinr_22).epsilon(1e-12));
  }
}
