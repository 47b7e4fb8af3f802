#include "saddle/mixture.hpp"

#include "saddle/rng.hpp"

namespace saddle {

namespace {

template <typename Comps>
size_t pick_component(const Comps& comps, Rng& rng) {
  double u = rng.next_uniform();
  double acc = 0;
  for (size_t i = 0; i < comps.size(); ++i) {
    acc += comps[i].weight;
    if (u <= acc) return i;
  }
  return comps.size() - 1;
}

}  // namespace

double Mixture1D::sample(Rng& rng) const {
  const auto& c = comps_[pick_component(comps_, rng)];
  if (c.var == 0.0) return c.mean;
  return c.mean + std::sqrt(c.var) * rng.next_normal();
}

Vec2 Mixture2D::sample(Rng& rng) const {
  const auto& c = comps_[pick_component(comps_, rng)];
  if (c.point_mass) return c.mean;
  Mat2 chol = cholesky_psd(c.cov);
  double z1, z2;
  rng.next_normal_pair(z1, z2);
  return c.mean + Vec2{chol(0, 0) * z1, chol(1, 0) * z1 + chol(1, 1) * z2};
}

}  // namespace saddle
