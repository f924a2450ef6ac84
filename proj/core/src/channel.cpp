// SPDX-License-Identifier: Apache-2.0

#include "starsec/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace starsec {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

cplx Rng::complex_normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double Rng::normal() { return std::sqrt(2.0) * complex_normal().real(); }

double path_loss(double distance, double exponent, double lambda0) {
  if (!(distance > 0.0)) {
    throw DomainError("path_loss: distance must be > 0");
  }
  return lambda0 * std::pow(distance, -exponent);
}

CVector ula_response(int size, double sin_angle) {
  CVector a(size);
  for (int m = 0; m < size; ++m) {
    a[m] = std::polar(1.0, -std::numbers::pi * m * sin_angle);
  }
  return a;
}

CMatrix draw_rician(const CMatrix& los, double k_factor, Rng& rng) {
  if (!(k_factor >= 0.0)) {
    throw DomainError("draw_rician: k_factor must be >= 0");
  }
  if (std::isinf(k_factor)) {
    return los;
  }
  CMatrix out(los.rows(), los.cols());
  const double w_los = std::sqrt(k_factor / (1.0 + k_factor));
  const double w_nlos = std::sqrt(1.0 / (1.0 + k_factor));
  for (Eigen::Index i = 0; i < los.rows(); ++i) {
    for (Eigen::Index j = 0; j < los.cols(); ++j) {
      out(i, j) = w_los * los(i, j) + w_nlos * rng.complex_normal();
    }
  }
  return out;
}

CMatrix draw_rician(int rows, int cols, double k_factor, Rng& rng) {
  return draw_rician(CMatrix::Ones(rows, cols), k_factor, rng);
}

CMatrix draw_rayleigh(int rows, int cols, Rng& rng) {
  CMatrix out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      out(i, j) = rng.complex_normal();
    }
  }
  return out;
}

namespace {

/// Sine of the angle between the array broadside (x axis) and the direction
/// from `from` to `to`; both arrays lie along the y axis.
double sin_angle(const Point2& from, const Point2& to) {
  return (to.y - from.y) / distance(from, to);
}

}  // namespace

ChannelRealization generate_channels(const SystemConfig& cfg, std::uint64_t seed) {
  require_valid(cfg);
  const auto& g = cfg.geometry;
  const auto& p = cfg.channel;
  const int K = cfg.K;
  const int N = cfg.N;
  Rng rng(seed);

  auto amplitude = [&](const Point2& a, const Point2& b, double exponent) {
    return std::sqrt(path_loss(distance(a, b), exponent, p.lambda0));
  };

  ChannelRealization ch;
  ch.seed_used = seed;
  ch.h_b1 = amplitude(g.bs, g.user1, p.alpha_direct) * draw_rayleigh(N, 1, rng).col(0);
  ch.h_be = amplitude(g.bs, g.eve, p.alpha_direct) * draw_rayleigh(N, 1, rng).col(0);

  const CMatrix los_br =
      ula_response(K, sin_angle(g.ris, g.bs)) * ula_response(N, sin_angle(g.bs, g.ris)).transpose();
  ch.H_br = amplitude(g.bs, g.ris, p.alpha_los) * draw_rician(los_br, p.rician_k, rng);

  auto ris_link = [&](const Point2& node, double exponent) -> CVector {
    const CMatrix los = ula_response(K, sin_angle(g.ris, node));
    return amplitude(g.ris, node, exponent) * draw_rician(los, p.rician_k, rng).col(0);
  };
  ch.h_r1 = ris_link(g.user1, p.alpha_nlos_r);
  ch.h_t2 = ris_link(g.user2, p.alpha_nlos_t);
  ch.h_re = ris_link(g.eve, p.alpha_nlos_r);
  return ch;
}

namespace {

void dump_matrix(std::ostringstream& out, const char* name, const CMatrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      std::snprintf(buf, sizeof buf, "%.17g %.17g", m(i, j).real(), m(i, j).imag());
      out << buf;
    }
    out << '\n';
  }
}

CMatrix read_matrix(std::istringstream& in, const std::string& expected) {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  if (!(in >> name >> rows >> cols) || name != expected || rows < 0 || cols < 0) {
    throw ParseError("channel dump: expected link '" + expected + "'");
  }
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double re = 0.0;
      double im = 0.0;
      if (!(in >> re >> im)) {
        throw ParseError("channel dump: truncated values for link '" + expected + "'");
      }
      m(i, j) = {re, im};
    }
  }
  return m;
}

}  // namespace

std::string dump_channels(const ChannelRealization& ch) {
  std::ostringstream out;
  out << "starsec-channel 1\n";
  out << "seed " << ch.seed_used << '\n';
  dump_matrix(out, "H_br", ch.H_br);
  dump_matrix(out, "h_r1", ch.h_r1);
  dump_matrix(out, "h_t2", ch.h_t2);
  dump_matrix(out, "h_re", ch.h_re);
  dump_matrix(out, "h_b1", ch.h_b1);
  dump_matrix(out, "h_be", ch.h_be);
  return out.str();
}

ChannelRealization parse_channels(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "starsec-channel" || version != 1) {
    throw ParseError("channel dump: missing 'starsec-channel 1' header");
  }
  std::string key;
  ChannelRealization ch;
  if (!(in >> key >> ch.seed_used) || key != "seed") {
    throw ParseError("channel dump: missing seed line");
  }
  ch.H_br = read_matrix(in, "H_br");
  ch.h_r1 = read_matrix(in, "h_r1").col(0);
  ch.h_t2 = read_matrix(in, "h_t2").col(0);
  ch.h_re = read_matrix(in, "h_re").col(0);
  ch.h_b1 = read_matrix(in, "h_b1").col(0);
  ch.h_be = read_matrix(in, "h_be").col(0);
  const auto K = ch.H_br.rows();
  const auto N = ch.H_br.cols();
  if (ch.h_r1.size() != K || ch.h_t2.size() != K || ch.h_re.size() != K ||
      ch.h_b1.size() != N || ch.h_be.size() != N) {
    throw DimensionError("channel dump: link dimensions disagree with H_br");
  }
  return ch;
}

void save_channels(const ChannelRealization& ch, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write channel dump '" + path.string() + "'");
  }
  out << dump_channels(ch);
}

ChannelRealization load_channels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open channel dump '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_channels(buffer.str());
}

}  // namespace starsec
