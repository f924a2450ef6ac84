// SPDX-License-Identifier: Apache-2.0
//
// Path loss, small-scale fading and per-realization channel generation.
//
// Random numbers come from std::mt19937_64. Uniform variates use the top 53
// bits of each draw, u = (x >> 11) * 2^-53, and circularly-symmetric complex
// Gaussians use the polar Box-Muller form sqrt(-ln(1 - u1)) * exp(2 pi i u2).
// Both steps are spelled out here rather than delegated to <random>
// distributions so realizations are identical across standard libraries.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "starsec/config.hpp"
#include "starsec/types.hpp"

namespace starsec {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  /// Standard circularly-symmetric complex Gaussian, E|g|^2 = 1.
  cplx complex_normal();
  /// Real standard normal.
  double normal();

 private:
  std::mt19937_64 engine_;
};

struct ChannelRealization {
  CMatrix H_br;  ///< K x N, BS -> STAR-RIS
  CVector h_r1;  ///< K, STAR-RIS -> User1
  CVector h_t2;  ///< K, STAR-RIS -> User2
  CVector h_re;  ///< K, STAR-RIS -> Eve
  CVector h_b1;  ///< N, BS -> User1
  CVector h_be;  ///< N, BS -> Eve
  std::uint64_t seed_used = 0;

  int K() const { return static_cast<int>(H_br.rows()); }
  int N() const { return static_cast<int>(H_br.cols()); }
};

/// lambda0 * distance^-exponent. Throws DomainError for distance <= 0.
double path_loss(double distance, double exponent, double lambda0);

/// Far-field uniform linear array response, entries exp(-i pi m sin(angle)).
CVector ula_response(int size, double sin_angle);

/// Rician entries sqrt(k/(1+k)) * los + sqrt(1/(1+k)) * g. An infinite
/// k_factor returns `los` unchanged.
CMatrix draw_rician(const CMatrix& los, double k_factor, Rng& rng);
/// Rician draw with an all-ones LoS component.
CMatrix draw_rician(int rows, int cols, double k_factor, Rng& rng);
CMatrix draw_rayleigh(int rows, int cols, Rng& rng);

/// Rician links: BS -> RIS and every RIS-side link. Rayleigh links: BS -> User1
/// and BS -> Eve. BS -> User2 is absent. Links are drawn in the order
/// h_b1, h_be, H_br, h_r1, h_t2, h_re from a single generator seeded by `seed`,
/// so the direct links of a seed do not depend on K.
ChannelRealization generate_channels(const SystemConfig& cfg, std::uint64_t seed);

/// Text dump: a `starsec-channel 1` line, a `seed` line, then per link a
/// `<name> <rows> <cols>` line followed by one line per row of interleaved
/// real/imaginary values in %.17g.
std::string dump_channels(const ChannelRealization& ch);
ChannelRealization parse_channels(const std::string& text);
void save_channels(const ChannelRealization& ch, const std::filesystem::path& path);
ChannelRealization load_channels(const std::filesystem::path& path);

}  // namespace starsec
