// SPDX-License-Identifier: Apache-2.0
#include "isac/channel.hpp"

#include <cmath>

#include "isac/kernels.hpp"
#include "isac/parallel.hpp"

namespace isac::channel {

HermitianMatrix BeamformerSet::gain_matrix() const {
  int m = sensing_cov.dim();
  for (const auto& w : info_beams) m = std::max<int>(m, static_cast<int>(w.size()));
  HermitianMatrix g = sensing_cov.dim() == m ? sensing_cov : HermitianMatrix::Zero(m);
  for (const auto& w : info_beams) g += HermitianMatrix::RankOne(w);
  return g;
}

double aod_cosine(const Position& q, const Position& p, double altitude) {
  const double horiz2 = (q - p).squaredNorm();
  return altitude / std::sqrt(horiz2 + altitude * altitude);
}

ComplexVector steering_vector(const Position& q, const Position& p, const UavConfig& uav) {
  const double cos_theta = aod_cosine(q, p, uav.altitude);
  const double phase_step = 2.0 * M_PI * uav.antenna_spacing_ratio * cos_theta;
  ComplexVector a(uav.num_antennas);
  for (int m = 0; m < uav.num_antennas; ++m)
    a(m) = std::polar(1.0, phase_step * static_cast<double>(m));
  return a;
}

ComplexVector channel_vector(const Position& q, const Position& u, const UavConfig& uav) {
  const double d2 = uav.altitude * uav.altitude + (q - u).squaredNorm();
  return std::sqrt(uav.channel_gain_ref / d2) * steering_vector(q, u, uav);
}

RateReport sinr_and_rates(const Position& q, const BeamformerSet& beams, const Scenario& sc) {
  const int k_users = sc.num_users();
  RateReport rep;
  rep.per_user_sinr.resize(k_users);
  rep.per_user_rate.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    const ComplexVector h = channel_vector(q, sc.users[k].position, sc.uav);
    double signal = 0.0;
    double interference = 0.0;
    for (std::size_t i = 0; i < beams.info_beams.size(); ++i) {
      const double p = std::norm(h.dot(beams.info_beams[i]));
      if (static_cast<int>(i) == k)
        signal = p;
      else
        interference += p;
    }
    if (beams.sensing_cov.dim() > 0) interference += num::quadratic_form(beams.sensing_cov, h);
    const double sinr = signal / (interference + sc.users[k].noise_power);
    rep.per_user_sinr[k] = sinr;
    rep.per_user_rate[k] = std::log2(1.0 + sinr);
    rep.weighted_sum += sc.users[k].weight * rep.per_user_rate[k];
  }
  return rep;
}

double beampattern_gain(const Position& q, const Position& m, const BeamformerSet& beams,
                        const UavConfig& uav) {
  const ComplexVector a = steering_vector(q, m, uav);
  return num::quadratic_form(beams.gain_matrix(), a);
}

double trace_gain_expansion(const HermitianMatrix& x, double dist, const UavConfig& uav) {
  const kernels::UlaProfile prof = kernels::make_profile(x.mat());
  return kernels::gain(prof, steering_kappa(uav, dist));
}

BeampatternMap beampattern_map(const Position& q, const BeamformerSet& beams, const Scenario& sc,
                               double resolution) {
  if (!(resolution > 0.0)) throw ConfigError("beampattern_map: resolution must be > 0");
  BeampatternMap map;
  for (double x = sc.search_area.min.x(); x <= sc.search_area.max.x() + 1e-9; x += resolution)
    map.xs.push_back(x);
  for (double y = sc.search_area.min.y(); y <= sc.search_area.max.y() + 1e-9; y += resolution)
    map.ys.push_back(y);

  const kernels::UlaProfile prof = kernels::make_profile(beams.gain_matrix().mat());
  const double h2 = sc.uav.altitude * sc.uav.altitude;
  const std::size_t nx = map.xs.size(), ny = map.ys.size();
  map.tx_gain.resize(nx * ny);
  map.rx_gain.resize(nx * ny);

  parallel_for(ny, 0, [&](std::size_t iy) {
    std::vector<double> kappa(nx), d2(nx), gain(nx);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const Position p(map.xs[ix], map.ys[iy]);
      d2[ix] = h2 + (q - p).squaredNorm();
      kappa[ix] = steering_kappa(sc.uav, std::sqrt(d2[ix]));
    }
    kernels::gain_batch(prof, kappa.data(), gain.data(), nx);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      map.tx_gain[iy * nx + ix] = gain[ix];
      map.rx_gain[iy * nx + ix] = gain[ix] * sc.uav.channel_gain_ref / d2[ix];
    }
  });
  return map;
}

}  // namespace isac::channel
