#include "flab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "flab/channels.hpp"
#include "flab/info_geometry.hpp"
#include "flab/operators.hpp"
#include "flab/random.hpp"

namespace flab::fock {

double beta_bound_value(const BetaBound& b) {
  if (!(b.y > 1.0) || !std::isfinite(b.y)) throw DomainError("beta_bound_value: needs y > 1");
  if (b.d < 2) throw DomainError("beta_bound_value: needs d >= 2");
  if (b.k < 0) throw DomainError("beta_bound_value: needs k >= 0");
  const double per = static_cast<double>(b.d) / (b.y * b.y * (1.0 - 1.0 / b.y));
  return std::pow(per, b.k);
}

bool beta_decreasing(int d, double y) { return y * (y - 1.0) > static_cast<double>(d); }

namespace {

struct PanelState {
  ops::DensityMatrix full;
  std::vector<ops::SectorBasis> sectors;  // all sectors of size >= k
};

CMat random_combination(const std::vector<ops::SectorBasis>& sectors, int exact_size,
                        rng::Engine& eng, std::size_t dim) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  CMat a = CMat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  if (exact_size >= 0) {
    std::vector<std::size_t> pick;
    for (std::size_t i = 0; i < sectors.size(); ++i) {
      if (static_cast<int>(sectors[i].support.size()) == exact_size) pick.push_back(i);
    }
    std::uniform_int_distribution<std::size_t> which(0, pick.size() - 1);
    const auto& sec = sectors[pick[which(eng)]];
    for (const auto& op : sec.operators) a += nd(eng) * op.matrix();
    return a;
  }
  for (const auto& sec : sectors) {
    const double u = uni(eng);
    const double w = u * u;
    for (const auto& op : sec.operators) a += (w * nd(eng)) * op.matrix();
  }
  return a;
}

}  // namespace

BetaBoundReport beta_bound_test(int n, int d, double y, int k, int samples, std::uint64_t seed,
                                bool per_sector, double tol, int panel_size) {
  if (n < 1 || n > 4) throw DomainError("beta_bound_test: needs 1 <= n <= 4");
  if (k < 1) throw DomainError("beta_bound_test: needs k >= 1");
  if (k - 1 >= n) throw DomainError("beta_bound_test: T_{k-1}-perp is empty for k - 1 >= n");
  if (samples < 0 || panel_size < 1) throw DomainError("beta_bound_test: bad sample counts");
  BetaBoundReport rep;
  rep.n = n;
  rep.d = d;
  rep.y = y;
  rep.k = k;
  rep.beta = beta_bound_value({d, y, k});

  const channels::DepolarizingChannel dep(y, d);
  const auto chan = channels::product_channel(dep, n);
  const ops::QuditSystem sys(d, n);
  const ops::QuditSystem site(d, 1);

  std::vector<PanelState> panel;
  for (int p = 0; p < panel_size; ++p) {
    auto eng = rng::make_engine(seed, 0x5EED0000ULL + static_cast<std::uint64_t>(p));
    ops::DensityMatrix s1 = p == 0 ? ops::DensityMatrix::basis_state(d, 0) : rng::random_density(site, eng, 0.1);
    panel.push_back({ops::product_power(s1, n), ops::sector_bases(sys, s1, k, n)});
  }

  auto ratio_of = [&](const PanelState& ps, const CMat& a) {
    const double base = geometry::bures_norm(ps.full.matrix(), a);
    if (base <= 1e-12) return 0.0;
    const double c = geometry::contracted_norm(chan, ps.full, a);
    return (c * c) / (base * base);
  };

  for (int s = 0; s < samples; ++s) {
    const auto& ps = panel[static_cast<std::size_t>(s % panel_size)];
    auto eng = rng::make_engine(seed, static_cast<std::uint64_t>(s));
    const double r = ratio_of(ps, random_combination(ps.sectors, -1, eng, sys.dim()));
    rep.max_ratio = std::max(rep.max_ratio, r);
    if (r > rep.beta * (1.0 + tol)) ++rep.violations;
    ++rep.samples;
    if (per_sector) {
      const double rs = ratio_of(ps, random_combination(ps.sectors, k, eng, sys.dim()));
      rep.per_sector_max_ratio = std::max(rep.per_sector_max_ratio, rs);
      if (rs > rep.beta * (1.0 + tol)) ++rep.per_sector_violations;
      ++rep.per_sector_samples;
    }
  }
  return rep;
}

}  // namespace flab::fock
