// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "starsec/passive.hpp"
#include "support/desk.hpp"

using namespace starsec;

namespace {

RMatrix column(double r, double t, double j) {
  RMatrix b(3, 1);
  b << r, t, j;
  return b;
}

CVector unit_phases(int K, Rng& rng) {
  CVector v(K);
  for (int k = 0; k < K; ++k) v[k] = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  return v;
}

bool accepted(conic::Status status, double violation) {
  return status == conic::Status::optimal ||
         (status == conic::Status::numerical_limit && violation <= 1e-6);
}

}  // namespace

TEST_CASE("one_hot_project picks the largest mode per element") {
  CHECK(one_hot_project(column(0.6, 0.3, 0.1)) == column(1, 0, 0));
  CHECK(one_hot_project(column(0.4, 0.4, 0.2)) == column(1, 0, 0));
  CHECK(one_hot_project(column(0.2, 0.4, 0.4)) == column(0, 1, 0));
  CHECK(one_hot_project(column(0, 0, 1)) == column(0, 0, 1));
  CHECK(one_hot_project(column(0.1, 0.2, 0.7)) == column(0, 0, 1));
  CHECK_THROWS_AS(one_hot_project(column(0.5, 0.3, 0.1)), DomainError);
  CHECK_NOTHROW(one_hot_project(column(0.5, 0.3, 0.2005)));
}

TEST_CASE("one_hot_project leaves near-binary columns unchanged") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int top = static_cast<int>(rng.uniform() * 3.0) % 3;
    RMatrix b = RMatrix::Zero(3, 1);
    const double rest = 1e-6 * rng.uniform();
    b(top, 0) = 1.0 - rest;
    b((top + 1) % 3, 0) = rest;
    RMatrix expected = RMatrix::Zero(3, 1);
    expected(top, 0) = 1.0;
    CHECK(one_hot_project(b) == expected);
  }
}

TEST_CASE("extract_phases recovers exact rank-one lifts") {
  Rng rng(3);
  const int K = 5;
  StarRisState s = StarRisState::zeros(K);
  RMatrix modes = RMatrix::Zero(3, K);
  for (int k = 0; k < K; ++k) {
    const Mode m = static_cast<Mode>(k % 3);
    s.beta(m)[k] = 1.0;
    s.phi(m)[k] = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
    modes(k % 3, k) = 1.0;
  }
  const PassiveLifted l = PassiveLifted::from_state(s);
  const StarRisState e = extract_phases(l.R, l.T, l.J, modes);
  for (int k = 0; k < K; ++k) {
    const Mode m = static_cast<Mode>(k % 3);
    // The augmented R slot fixes the global phase; T and J recover up to one.
    if (m == Mode::reflect) CHECK(std::abs(e.phi(m)[k] - s.phi(m)[k]) <= 1e-9);
    CHECK(std::abs(std::abs(e.phi(m)[k]) - 1.0) <= 1e-9);
    for (Mode other : kModes) {
      if (other != m) CHECK(e.phi(other)[k] == cplx(0.0));
    }
  }
  CHECK(e.modulus_deviation <= 1e-9);
}

TEST_CASE("extract_phases masks inactive modes and records modulus deviation") {
  Rng rng(8);
  const int K = 4;
  const CVector a = unit_phases(K, rng);
  const CVector b = unit_phases(K, rng);
  // Spectrum (1, 0.2) scaled so the diagonal is not unit modulus.
  const CMatrix T = (a * a.adjoint()) * 0.25 + (b * b.adjoint()) * 0.05;
  const CMatrix R = CMatrix::Zero(K + 1, K + 1);
  const CMatrix J = CMatrix::Zero(K + 1, K + 1);
  RMatrix modes = RMatrix::Zero(3, K);
  modes.row(1).setOnes();
  const StarRisState e = extract_phases(R, T, J, modes);
  for (int k = 0; k < K; ++k) {
    CHECK(e.phi(Mode::reflect)[k] == cplx(0.0));
    CHECK(e.phi(Mode::jam)[k] == cplx(0.0));
    CHECK(std::abs(std::abs(e.phi(Mode::transmit)[k]) - 1.0) <= 1e-12);
  }
  CHECK(e.modulus_deviation > 0.0);

  RMatrix reflect = RMatrix::Zero(3, K);
  reflect.row(0).setOnes();
  CHECK_THROWS_AS(extract_phases(R, T, J, reflect), DomainError);
}

TEST_CASE("update_penalties scales geometrically") {
  PenaltyState p{1e-4, 1e-4, {}};
  const PenaltyState q = update_penalties(p, 1.5, {});
  CHECK(q.zeta == doctest::Approx(1.5e-4).epsilon(1e-15));
  CHECK(q.xi == doctest::Approx(1.5e-4).epsilon(1e-15));
  const PenaltyState same = update_penalties(p, 1.0, {});
  CHECK(same.zeta == p.zeta);
  CHECK(same.xi == p.xi);
  PenaltyState r = p;
  for (int n = 1; n <= 12; ++n) {
    r = update_penalties(r, 1.5, {});
    CHECK(r.zeta == doctest::Approx(1e-4 * std::pow(1.5, n)).epsilon(1e-13));
  }
}

TEST_CASE("surrogates are tight at the linearization point") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 3 + trial % 4;
    RMatrix beta(3, K);
    for (int k = 0; k < K; ++k) {
      const double x = rng.uniform();
      const double y = (1.0 - x) * rng.uniform();
      beta.col(k) << x, y, 1.0 - x - y;
    }
    RMatrix exact = beta - beta.cwiseProduct(beta);
    CHECK(std::abs(binary_surrogate(beta, beta) - exact.sum()) <= 1e-9);

    CMatrix G = CMatrix::Random(K, K);
    const CMatrix Z = G * G.adjoint();
    const double nuclear = Z.trace().real();
    const double spectral = Eigen::SelfAdjointEigenSolver<CMatrix>(Z).eigenvalues().maxCoeff();
    const double gap = nuclear - spectral;
    CHECK(std::abs(rank_surrogate(Z, Z, RankSurrogate::difference_of_convex) - gap) <=
          1e-9 * nuclear);
    // The printed sign adds the spectral norm instead of subtracting it.
    CHECK(std::abs(rank_surrogate(Z, Z, RankSurrogate::as_printed) - (nuclear + spectral)) <=
          1e-9 * nuclear);
  }
  // Binary beta and rank-one Z: both penalties vanish.
  RMatrix binary = RMatrix::Zero(3, 2);
  binary(0, 0) = 1.0;
  binary(2, 1) = 1.0;
  CHECK(binary_surrogate(binary, binary) == doctest::Approx(0.0));
  Rng r2(2);
  const CVector v = unit_phases(4, r2);
  const CMatrix Z = v * v.adjoint();
  CHECK(std::abs(rank_surrogate(Z, Z, RankSurrogate::difference_of_convex)) <= 1e-9);
}

TEST_CASE("P3 without penalties returns a consistent relaxed state") {
  const SystemConfig cfg = desk::config(2, 2, 20.0, 4);
  const ChannelRealization ch = generate_channels(cfg, 4);
  const EffectiveChannels ech = desk::normalized(ch, cfg);
  SubproblemParams params = desk::params(cfg);
  Rng rng(4);
  const PassiveLifted start = PassiveLifted::from_state(desk::alternating_state(2, rng));

  BeamformerSolution beams;
  beams.W2 = CMatrix::Identity(2, 2) / 4.0;
  beams.W1 = CMatrix::Zero(2, 2);
  const double leak = std::exp2(params.tau) - 1.0;
  for (double a = 1.0; a > 1e-9; a *= 0.5) {
    const LiftedTerms t = evaluate_lifted(ech, a * beams.W2, beams.W2, start, 1.0);
    if (t.S11 <= t.S22 && t.sinr22() <= t.sinr12() &&
        t.eve_signal <= leak * t.eve_interference) {
      beams.W1 = a * beams.W2;
      break;
    }
  }
  const Linearization lin = linearize(evaluate_lifted(ech, beams.W1, beams.W2, start, 1.0));
  const PenaltyState pen{0.0, 0.0, start};
  const PassiveResult r = solve_p3(ech, beams, pen, params, lin, ModeMask::all(2));
  INFO("violation " << r.max_violation);
  REQUIRE(accepted(r.status, r.max_violation));
  const PassiveLifted& l = r.lifted;
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(l.R(k, k).real() - l.beta_r[k]) <= 1e-6);
    CHECK(std::abs(l.T(k, k).real() - l.beta_t[k]) <= 1e-6);
    CHECK(std::abs(l.J(k, k).real() - l.beta_j[k]) <= 1e-6);
    CHECK(std::abs(l.beta_r[k] + l.beta_t[k] + l.beta_j[k] - 1.0) <= 1e-6);
    for (Mode m : kModes) {
      CHECK(l.beta(m)[k] >= -1e-7);
      CHECK(l.beta(m)[k] <= 1.0 + 1e-7);
    }
  }
  CHECK(std::abs(l.R(2, 2) - 1.0) <= 1e-6);
  CHECK(std::abs(l.J(2, 2)) <= 1e-6);
  CHECK(min_eigenvalue(l.R) >= -1e-6);
  CHECK(min_eigenvalue(l.T) >= -1e-6);
  CHECK(min_eigenvalue(l.J) >= -1e-6);
  CHECK(r.s >= 1.0 - 1e-6);
}

TEST_CASE("P3 is infeasible when Eve hears User1 directly and jamming cannot reach her") {
  SystemConfig cfg = desk::config(3, 1, 20.0, 6);
  ChannelRealization ch = generate_channels(cfg, 6);
  ch.h_re.setZero();
  ch.h_be *= 1e3;
  const EffectiveChannels ech = desk::normalized(ch, cfg);
  SubproblemParams params = desk::params(cfg);
  params.tau = 1e-9;
  params.algo.sic_trace_order = false;
  Rng rng(6);
  const PassiveLifted start = PassiveLifted::from_state(desk::alternating_state(3, rng));
  BeamformerSolution beams;
  beams.W1 = CMatrix::Identity(1, 1) * 0.5;
  beams.W2 = CMatrix::Zero(1, 1);
  const PenaltyState pen{1e-4, 1e-4, start};
  const PassiveResult r = solve_p3(ech, beams, pen, params, Linearization{}, ModeMask::all(3));
  CHECK(r.status == conic::Status::infeasible);
}

TEST_CASE("build_p3 rejects malformed inputs") {
  const SystemConfig cfg = desk::config(3, 2, 20.0, 1);
  const ChannelRealization ch = generate_channels(cfg, 1);
  const EffectiveChannels ech = desk::normalized(ch, cfg);
  const SubproblemParams params = desk::params(cfg);
  Rng rng(1);
  const PassiveLifted start = PassiveLifted::from_state(desk::alternating_state(3, rng));
  BeamformerSolution beams;
  beams.W1 = CMatrix::Identity(2, 2) * 0.1;
  beams.W2 = CMatrix::Identity(2, 2) * 0.1;
  const PenaltyState pen{1e-4, 1e-4, start};
  CHECK_THROWS_AS(build_p3(ech, beams, pen, params, Linearization{}, ModeMask::all(4)),
                  DimensionError);
  BeamformerSolution bad = beams;
  bad.W1 = CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(build_p3(ech, bad, pen, params, Linearization{}, ModeMask::all(3)),
                  DimensionError);
  PenaltyState bad_pen = pen;
  bad_pen.iterate.T(0, 0) = -1.0;
  CHECK_THROWS_AS(build_p3(ech, beams, bad_pen, params, Linearization{}, ModeMask::all(3)),
                  DomainError);
}

TEST_CASE("binary_residual measures distance to the nearest vertex") {
  CHECK(binary_residual(column(1, 0, 0)) == 0.0);
  CHECK(binary_residual(column(0.5, 0.5, 0)) == doctest::Approx(0.5));
  RMatrix b(3, 2);
  b << 0.7, 1.0, 0.2, 0.0, 0.1, 0.0;
  CHECK(binary_residual(b) == doctest::Approx(0.3));
}
