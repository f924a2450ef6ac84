// SPDX-License-Identifier: Apache-2.0

#include "starsec/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace starsec {

const char* record_status_name(RecordStatus s) {
  switch (s) {
    case RecordStatus::converged:
      return "converged";
    case RecordStatus::iteration_cap:
      return "iteration-cap";
    case RecordStatus::infeasible:
      return "infeasible";
  }
  return "?";
}

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::active:
      return "active";
    case Stage::passive:
      return "passive";
    case Stage::outer:
      return "outer";
  }
  return "?";
}

std::string SolutionRecord::to_text() const {
  std::ostringstream os;
  os << "starsec-record 1\n";
  os << "status " << record_status_name(status) << ' '
     << (failed_stage.empty() ? "-" : failed_stage) << ' ' << outer_iterations << ' '
     << numerical_stops << '\n';
  os << "trace " << trace.size() << '\n';
  char buf[256];
  for (const auto& t : trace) {
    std::snprintf(buf, sizeof buf, "%s %d %d %.17g %.17g %.17g\n", stage_name(t.stage), t.outer,
                  t.index, t.s, t.rate, t.physical);
    os << buf;
  }
  os << RateReport::header() << '\n' << report.row() << '\n';
  return os.str();
}

std::vector<TraceRow> SolutionRecord::outer_trace() const {
  std::vector<TraceRow> out;
  std::copy_if(trace.begin(), trace.end(), std::back_inserter(out),
               [](const TraceRow& t) { return t.stage == Stage::outer; });
  return out;
}

RateReport evaluate_solution(const ChannelRealization& ch, const BeamformerSolution& beams,
                             const StarRisState& state, const SystemConfig& cfg) {
  return compute_rates(ch, beams, state, cfg.sigma2, cfg.tau, cfg.algo.jamming_full_leakage);
}

RateReport repair_beams(const ChannelRealization& ch, const StarRisState& state,
                        const SystemConfig& cfg, CVector& w1, CVector& w2) {
  const double pmax = cfg.pmax();
  const double total = w1.squaredNorm() + w2.squaredNorm();
  if (total > pmax) {
    const double f = total > 0.0 ? std::sqrt(pmax / total) : 0.0;
    w1 *= f;
    w2 *= f;
  }
  auto eval = [&](const CVector& a, const CVector& b) {
    return evaluate_solution(ch, BeamformerSolution::from_vectors(a, b), state, cfg);
  };
  auto ok = [&](const RateReport& r) {
    return r.leakage_ok && r.sic_ok && r.power_used <= pmax * (1.0 + 1e-9);
  };
  RateReport r = eval(w1, w2);
  if (ok(r)) return r;

  for (int pass = 0; pass < 2; ++pass) {
    if (pass == 1) w2.setZero();
    const CVector zero = CVector::Zero(w1.size());
    if (!ok(eval(zero, w2))) continue;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (ok(eval(mid * w1, w2))) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    w1 *= lo;
    return eval(w1, w2);
  }
  w1.setZero();
  return eval(w1, w2);
}

namespace {

bool usable(conic::Status s, double violation, double limit = 1e-5) {
  return s == conic::Status::optimal ||
         (s == conic::Status::numerical_limit && violation <= limit);
}

/// Nearest PSD matrix in Frobenius norm.
CMatrix psd_part(const CMatrix& W) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (W + W.adjoint()));
  const RVector ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Uniform relaxed modes with random phases. When `jam` marks elements, those
/// start as jammers and the rest split over reflection and transmission.
StarRisState initial_state(const ModeMask& mask, Rng& rng, const std::vector<bool>& jam) {
  const int K = mask.K();
  const bool retry = std::any_of(jam.begin(), jam.end(), [](bool b) { return b; });
  StarRisState s = StarRisState::zeros(K);
  for (int k = 0; k < K; ++k) {
    for (Mode m : kModes) s.phi(m)[k] = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
    std::vector<Mode> pool;
    if (retry && jam[k]) {
      pool.push_back(Mode::jam);
    } else {
      for (Mode m : kModes) {
        if (mask.allows(k, m) && !(retry && m == Mode::jam)) pool.push_back(m);
      }
      if (pool.empty() && mask.allows(k, Mode::jam)) pool.push_back(Mode::jam);
    }
    for (Mode m : pool) s.beta(m)[k] = 1.0 / static_cast<double>(pool.size());
  }
  return s;
}

/// Elements with the strongest cascaded path toward Eve.
std::vector<bool> jamming_elements(const ChannelRealization& ch, const ModeMask& mask) {
  const int K = ch.K();
  std::vector<int> order;
  for (int k = 0; k < K; ++k) {
    if (mask.allows(k, Mode::jam)) order.push_back(k);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(ch.h_re[a]) * ch.H_br.row(a).norm() >
           std::abs(ch.h_re[b]) * ch.H_br.row(b).norm();
  });
  std::vector<bool> jam(K, false);
  const int count = std::min<int>((K + 3) / 4, static_cast<int>(order.size()));
  for (int i = 0; i < count; ++i) jam[order[i]] = true;
  return jam;
}

double max_rank_ratio(const PassiveLifted& l, const RMatrix& modes) {
  double worst = 0.0;
  const CMatrix* mats[3] = {&l.R, &l.T, &l.J};
  for (int z = 0; z < 3; ++z) {
    if (modes.row(z).sum() > 0.0) worst = std::max(worst, rank_ratio(*mats[z]));
  }
  return worst;
}

double masked_binary_residual(const PassiveLifted& l, const ModeMask& mask) {
  const RMatrix b = l.beta_matrix();
  double worst = 0.0;
  for (int k = 0; k < mask.K(); ++k) {
    if (mask.count(k) > 0) worst = std::max(worst, binary_residual(b.col(k)));
  }
  return worst;
}

class Runner {
 public:
  Runner(const ChannelRealization& ch, const SystemConfig& cfg, const OptimizeOptions& options)
      : ch_(ch), cfg_(cfg), rng_(cfg.seed) {
    mask_ = options.mask.value_or(ModeMask::all(ch.K()));
    if (mask_.K() != ch.K()) throw DimensionError("optimize: mode mask does not match K");
    pmax_ = cfg.pmax();
    const double g = std::sqrt(pmax_ / cfg.sigma2);
    ech_ = build_effective_channels(ch);
    ech_.H1 *= g;
    ech_.H2 *= g;
    ech_.He *= g;
    params_.pmax = 1.0;
    params_.sigma2 = 1.0;
    params_.tau = cfg.tau;
    params_.algo = cfg.algo;
    params_.user2 = options.user2;
    passive_ = std::any_of(mask_.allowed.begin(), mask_.allowed.end(),
                           [](const auto& a) { return a[0] || a[1] || a[2]; });
  }

  SolutionRecord run();

 private:
  LiftedTerms terms() const {
    return evaluate_lifted(ech_, W1_, W2_, lifted_, 1.0, cfg_.algo.jamming_full_leakage);
  }

  Linearization relinearize(const LiftedTerms& t) const {
    return linearize(t, cfg_.algo.mu_update, cfg_.tau);
  }

  std::optional<ActiveResult> active_solve() {
    Linearization lin = lin_;
    for (int attempt = 0; attempt < 4; ++attempt) {
      ActiveResult r = solve_p2(ech_, lifted_, params_, lin, cfg_.algo.solver_tol);
      if (r.status == conic::Status::numerical_limit && r.max_violation > 1e-5) {
        r = solve_p2(ech_, lifted_, params_, lin, 10.0 * cfg_.algo.solver_tol);
      }
      if (usable(r.status, r.max_violation, kRepairable)) return r;
      lin.mu11 /= 10.0;
      lin.mu22 /= 10.0;
      lin.mu12 /= 10.0;
    }
    return std::nullopt;
  }

  std::optional<PassiveResult> passive_solve(const PenaltyState& pen, const ModeMask& mask) {
    BeamformerSolution fixed;
    fixed.W1 = W1_;
    fixed.W2 = W2_;
    Linearization lin = lin_;
    for (int attempt = 0; attempt < 4; ++attempt) {
      PassiveResult r = solve_p3(ech_, fixed, pen, params_, lin, mask, cfg_.algo.solver_tol);
      if (r.status == conic::Status::numerical_limit && r.max_violation > 1e-5) {
        r = solve_p3(ech_, fixed, pen, params_, lin, mask, 10.0 * cfg_.algo.solver_tol);
      }
      if (usable(r.status, r.max_violation, kRepairable)) return r;
      lin.mu11 /= 10.0;
      lin.mu22 /= 10.0;
      lin.mu12 /= 10.0;
    }
    return std::nullopt;
  }

  bool lifted_feasible(const CMatrix& W1, const CMatrix& W2) const {
    const LiftedTerms t =
        evaluate_lifted(ech_, W1, W2, lifted_, 1.0, cfg_.algo.jamming_full_leakage);
    const double leak = std::exp2(cfg_.tau) - 1.0;
    if (t.eve_signal > leak * t.eve_interference) return false;
    if (!params_.user2) return true;
    if (cfg_.algo.sic_trace_order && t.S11 > t.S22) return false;
    return t.sinr22() <= t.sinr12();
  }

  /// Moves (W1, W2) to a point where every convex restriction is feasible:
  /// W1 is scaled down by bisection; when even W1 = 0 fails, W2 is replaced
  /// by a direction that User1 receives at least as strongly as User2.
  void make_feasible() {
    if (lifted_feasible(W1_, W2_)) return;
    auto gram = [](const CMatrix& H, const CMatrix& M) -> CMatrix {
      return H.adjoint() * M * H;
    };
    const int N = ch_.N();
    const CMatrix zero = CMatrix::Zero(N, N);
    if (params_.user2 && !lifted_feasible(zero, W2_)) {
      const CMatrix D = gram(ech_.H1, lifted_.R) - gram(ech_.H2, lifted_.T);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (D + D.adjoint()));
      const double p2 = W2_.trace().real() > 0.0 ? W2_.trace().real() : 0.5;
      const CVector u = es.eigenvectors().col(N - 1);
      W2_ = es.eigenvalues()[N - 1] > 0.0 ? CMatrix(p2 * u * u.adjoint()) : zero;
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (lifted_feasible(mid * W1_, W2_)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    W1_ *= lo;
  }

  void start(const std::vector<bool>& jam) {
    lifted_ = PassiveLifted::from_state(initial_state(mask_, rng_, jam));
    const int N = ch_.N();
    if (params_.user2) {
      W1_ = CMatrix::Identity(N, N) / (2.0 * N);
      W2_ = CMatrix::Identity(N, N) / (2.0 * N);
    } else {
      W1_ = CMatrix::Identity(N, N) / static_cast<double>(N);
      W2_ = CMatrix::Zero(N, N);
    }
    make_feasible();
    lin_ = relinearize(terms());
    pen_ = PenaltyState{cfg_.algo.zeta0, cfg_.algo.xi0, lifted_};
  }

  void escalate(PenaltyState& pen, const PassiveLifted& current) {
    pen = update_penalties(pen, cfg_.algo.omega, current);
    pen.zeta = std::min(pen.zeta, kPenaltyCap);
    pen.xi = std::min(pen.xi, kPenaltyCap);
  }

  void consider(SolutionRecord& rec, const RMatrix& modes, double bound, int outer);

  static constexpr double kPenaltyCap = 1e3;
  /// Largest relative violation of a numerical-limit P2 or P3 point that is
  /// still accepted; make_feasible then restores exact feasibility.
  static constexpr double kRepairable = 1e-3;

  const ChannelRealization& ch_;
  const SystemConfig& cfg_;
  Rng rng_;
  ModeMask mask_;
  double pmax_ = 0.0;
  EffectiveChannels ech_;
  SubproblemParams params_;
  bool passive_ = true;

  PassiveLifted lifted_;
  CMatrix W1_, W2_;
  Linearization lin_;
  PenaltyState pen_;
  bool have_best_ = false;
};

void Runner::consider(SolutionRecord& rec, const RMatrix& modes, double bound, int outer) {
  StarRisState state = StarRisState::zeros(ch_.K());
  if (passive_) {
    try {
      state = extract_phases(lifted_.R, lifted_.T, lifted_.J, modes);
    } catch (const DomainError&) {
      rec.trace.push_back({Stage::outer, outer, outer, std::sqrt(std::exp2(bound)), bound, 0.0});
      return;
    }
  }
  const BeamScorer scorer = [&](CVector& w1, CVector& w2) {
    return repair_beams(ch_, state, cfg_, w1, w2).sum_rate;
  };
  ExtractionOptions opt;
  opt.rank_tol = cfg_.algo.rank_tol;
  opt.samples = cfg_.algo.randomization_samples;
  opt.scorer = &scorer;
  opt.rng = &rng_;
  BeamformerSolution beams = extract_beamformers(pmax_ * W1_, pmax_ * W2_, opt);
  const RateReport report = repair_beams(ch_, state, cfg_, beams.w1, beams.w2);
  rec.trace.push_back(
      {Stage::outer, outer, outer, std::sqrt(std::exp2(bound)), bound, report.sum_rate});
  if (!have_best_ || report.sum_rate > rec.report.sum_rate) {
    have_best_ = true;
    rec.beams = beams;
    rec.state = state;
    rec.lifted = lifted_;
    rec.report = report;
  }
}

SolutionRecord Runner::run() {
  const int K = ch_.K();
  const int N = ch_.N();
  const auto& algo = cfg_.algo;
  SolutionRecord rec;
  rec.state = StarRisState::zeros(K);
  rec.beams = BeamformerSolution::from_vectors(CVector::Zero(N), CVector::Zero(N));
  rec.lifted = PassiveLifted::from_state(rec.state);
  rec.report = evaluate_solution(ch_, rec.beams, rec.state, cfg_);

  start(std::vector<bool>(K, false));
  bool jam_retry = std::none_of(mask_.allowed.begin(), mask_.allowed.end(),
                                [](const auto& a) { return a[2]; });
  double s_last = std::numeric_limits<double>::quiet_NaN();
  RMatrix modes = RMatrix::Zero(3, K);

  for (int outer = 1; outer <= algo.max_outer; ++outer) {
    rec.outer_iterations = outer;
    // Active stage.
    double s_active = 0.0;
    for (int i = 1; i <= algo.max_inner; ++i) {
      auto r = active_solve();
      if (!r && outer == 1 && i == 1 && !jam_retry) {
        jam_retry = true;
        start(jamming_elements(ch_, mask_));
        r = active_solve();
      }
      if (!r && (outer > 1 || i > 1)) {
        ++rec.numerical_stops;
        const LiftedTerms t = terms();
        s_active = std::sqrt((1.0 + t.sinr11()) * (1.0 + (params_.user2 ? t.sinr22() : 0.0)));
        break;
      }
      if (!r) {
        rec.status = RecordStatus::infeasible;
        rec.failed_stage = "active";
        return rec;
      }
      W1_ = psd_part(r->W1);
      W2_ = psd_part(r->W2);
      make_feasible();
      lin_ = relinearize(terms());
      s_active = r->slack.s;
      const double rate = std::log2(s_active * s_active);
      rec.trace.push_back({Stage::active, outer, i, s_active, rate, 0.0});
      const bool done = std::abs(s_active - s_last) <= algo.epsilon;
      s_last = s_active;
      if (done) break;
    }
    const double R1 = std::log2(s_active * s_active);

    double R2 = R1;
    if (passive_) {
      params_.objective_scale = 1.0 / std::max(s_active, 1.0);
      // Passive stage on relaxed modes.
      for (int j = 1; j <= algo.max_inner; ++j) {
        auto r = passive_solve(pen_, mask_);
        if (!r) {
          ++rec.numerical_stops;
          break;
        }
        lifted_ = r->lifted;
        make_feasible();
        lin_ = relinearize(terms());
        rec.trace.push_back({Stage::passive, outer, j, r->s, std::log2(r->s * r->s), 0.0});
        const bool settled = std::abs(r->s - s_last) <= algo.epsilon &&
                             masked_binary_residual(lifted_, mask_) <= 1e-2;
        s_last = r->s;
        if (algo.penalty_per_inner) {
          escalate(pen_, lifted_);
        } else {
          pen_.iterate = lifted_;
        }
        if (settled) break;
      }
      if (!algo.penalty_per_inner) escalate(pen_, lifted_);

      // One-hot projection and polish on the binary modes.
      RMatrix beta = lifted_.beta_matrix();
      for (int k = 0; k < K; ++k) {
        const double sum = beta.col(k).sum();
        if (sum > 0.0) beta.col(k) /= sum;
      }
      modes = one_hot_project(beta);
      const ModeMask fixed = ModeMask::from_binary(modes);
      PenaltyState pol{pen_.zeta, std::max(pen_.xi, algo.xi_polish), lifted_};
      std::optional<PassiveResult> best;
      for (int q = 1; q <= algo.max_polish; ++q) {
        auto r = passive_solve(pol, fixed);
        if (!r) break;
        best = r;
        lifted_ = r->lifted;
        make_feasible();
        lin_ = relinearize(terms());
        if (max_rank_ratio(lifted_, modes) <= algo.rank_tol) break;
        pol = update_penalties(pol, algo.omega, lifted_);
      }
      double s_polish = 0.0;
      if (best) {
        s_polish = best->s;
      } else {
        try {
          lifted_ = PassiveLifted::from_state(extract_phases(lifted_.R, lifted_.T, lifted_.J, modes));
        } catch (const DomainError&) {
          rec.status = RecordStatus::infeasible;
          rec.failed_stage = "polish";
          return rec;
        }
        make_feasible();
        const LiftedTerms t = terms();
        lin_ = relinearize(t);
        s_polish = std::sqrt((1.0 + t.sinr11()) * (1.0 + (params_.user2 ? t.sinr22() : 0.0)));
      }
      s_last = s_polish;
      pen_.iterate = lifted_;
      R2 = std::log2(s_polish * s_polish);
    }

    consider(rec, modes, R2, outer);
    if (std::abs(R2 - R1) <= algo.epsilon) {
      rec.status = RecordStatus::converged;
      return rec;
    }
  }
  rec.status = RecordStatus::iteration_cap;
  return rec;
}

}  // namespace

SolutionRecord optimize(const ChannelRealization& ch, const SystemConfig& cfg,
                        const OptimizeOptions& options) {
  require_valid(cfg);
  if (ch.K() != cfg.K || ch.N() != cfg.N) {
    throw DimensionError("optimize: channel dimensions differ from the configuration");
  }
  if (cfg.pmax() <= 0.0) {
    SolutionRecord rec;
    rec.state = StarRisState::zeros(ch.K());
    rec.beams = BeamformerSolution::from_vectors(CVector::Zero(ch.N()), CVector::Zero(ch.N()));
    rec.lifted = PassiveLifted::from_state(rec.state);
    rec.report = evaluate_solution(ch, rec.beams, rec.state, cfg);
    rec.trace.push_back({Stage::outer, 1, 1, 1.0, 0.0, 0.0});
    rec.status = RecordStatus::converged;
    rec.outer_iterations = 1;
    return rec;
  }
  return Runner(ch, cfg, options).run();
}

}  // namespace starsec
