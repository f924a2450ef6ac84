// SPDX-License-Identifier: Apache-2.0

#include "starsec/oracle.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "starsec/optimizer.hpp"

namespace starsec {

namespace {

CVector matched(const Eigen::RowVectorXcd& g, int N) {
  const double n = g.norm();
  if (n <= 0.0) {
    CVector e = CVector::Zero(N);
    e[0] = 1.0;
    return e;
  }
  return g.adjoint() / n;
}

std::vector<CVector> directions(const CVector& u1, const CVector& u2, int n) {
  if (u1.size() == 1) return {CVector::Ones(1)};
  std::vector<CVector> out;
  for (int i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / (n - 1);
    const CVector d = (1.0 - a) * u1 + a * u2;
    const double norm = d.norm();
    out.push_back(norm > 0.0 ? CVector(d / norm) : u1);
  }
  return out;
}

}  // namespace

bool oracle_feasible(const ChannelRealization& ch, const BeamformerSolution& beams,
                     const StarRisState& state, const SystemConfig& cfg, const RateReport& r) {
  if (!r.leakage_ok || !r.sic_ok || r.power_used > cfg.pmax() * (1.0 + 1e-9)) return false;
  if (!cfg.algo.sic_trace_order) return true;
  const auto g1 = cascade(ch.h_r1, assemble_theta(state, Mode::reflect), ch.H_br, ch.h_b1);
  const auto g2 = cascade(ch.h_t2, assemble_theta(state, Mode::transmit), ch.H_br);
  const double s11 = std::norm((g1 * beams.w1).value());
  const double s22 = std::norm((g2 * beams.w2).value());
  return s11 <= s22 * (1.0 + 1e-9) + 1e-12 * cfg.sigma2;
}

OracleResult brute_force_best(const ChannelRealization& ch, const SystemConfig& cfg,
                              const GridSpec& grid) {
  const int K = ch.K();
  const int N = ch.N();
  if (K > 3 || N > 2) throw ValidationError("brute_force_best: requires K <= 3 and N <= 2");
  if (grid.phase_grid < 2) throw ValidationError("brute_force_best: phase_grid must be >= 2");
  if (grid.power_split_grid < 2) {
    throw ValidationError("brute_force_best: power_split_grid must be >= 2");
  }
  const int P = grid.phase_grid;
  const int n = grid.power_split_grid;
  const double pmax = cfg.pmax();

  OracleResult best;
  best.state = StarRisState::zeros(K);
  best.beams = BeamformerSolution::from_vectors(CVector::Zero(N), CVector::Zero(N));
  best.report = evaluate_solution(ch, best.beams, best.state, cfg);
  best.sum_rate = best.report.sum_rate;
  bool found = false;

  const int options = 3 * P;
  std::vector<int> digit(K, 0);
  StarRisState state = StarRisState::zeros(K);
  for (;;) {
    for (int k = 0; k < K; ++k) {
      for (Mode m : kModes) {
        state.beta(m)[k] = 0.0;
        state.phi(m)[k] = 1.0;
      }
      const Mode m = static_cast<Mode>(digit[k] / P);
      state.beta(m)[k] = 1.0;
      state.phi(m)[k] = std::polar(1.0, 2.0 * std::numbers::pi * (digit[k] % P) / P);
    }
    const auto g1 = cascade(ch.h_r1, assemble_theta(state, Mode::reflect), ch.H_br, ch.h_b1);
    const auto g2 = cascade(ch.h_t2, assemble_theta(state, Mode::transmit), ch.H_br);
    const std::vector<CVector> dirs = directions(matched(g1, N), matched(g2, N), n);

    for (int i = 0; i < n; ++i) {
      for (int j = 0; i + j < n; ++j) {
        const double p1 = pmax * i / (n - 1);
        const double p2 = pmax * j / (n - 1);
        for (std::size_t a = 0; a < dirs.size(); ++a) {
          for (std::size_t b = 0; b < dirs.size(); ++b) {
            const BeamformerSolution beams =
                BeamformerSolution::from_vectors(std::sqrt(p1) * dirs[a], std::sqrt(p2) * dirs[b]);
            const RateReport r = evaluate_solution(ch, beams, state, cfg);
            ++best.evaluated;
            if (!oracle_feasible(ch, beams, state, cfg, r)) continue;
            ++best.feasible;
            if (!found || r.sum_rate > best.sum_rate) {
              found = true;
              best.sum_rate = r.sum_rate;
              best.state = state;
              best.beams = beams;
              best.report = r;
            }
          }
        }
      }
    }

    int k = 0;
    while (k < K && ++digit[k] == options) digit[k++] = 0;
    if (k == K) break;
  }
  return best;
}

}  // namespace starsec
