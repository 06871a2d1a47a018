#include "flab/cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "flab/bounds.hpp"
#include "flab/channels.hpp"
#include "flab/contraction.hpp"
#include "flab/diffusion.hpp"
#include "flab/fock.hpp"
#include "flab/lattice.hpp"
#include "flab/operators.hpp"
#include "flab/random.hpp"

#ifndef FLAB_VERSION
#define FLAB_VERSION "unknown"
#endif

namespace flab::cli {

namespace {

using Check = ParamReader;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const std::string& key, const std::string& message) { Check::require(ok, key, message); }

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Rejects configs whose dense operators would not fit the budget.
void require_dense(int d, int n, int cap, const std::string& key) {
  double dim = std::pow(static_cast<double>(d), n);
  require(dim <= cap && dim <= static_cast<double>(ops::dense_budget()), key,
          "d^n = " + num(dim) + " exceeds the dense budget for this experiment");
}

ops::DensityMatrix site_state(const std::string& name, int d, std::uint64_t seed) {
  if (name == "zero") return ops::DensityMatrix::basis_state(d, 0);
  if (name == "mixed") {
    auto eng = rng::make_engine(seed, 0);
    return rng::random_density(ops::QuditSystem(d, 1), eng, 0.05);
  }
  throw ConfigError("parameters.state", "unknown state '" + name + "' (expected zero or mixed)");
}

// ---- spectrum ----

void spectrum(const RunConfig& cfg, Report& rep) {
  Check p(cfg.parameters, cfg.experiment);
  const int d = p.integer("d", 2);
  const int n = p.integer("n", 2);
  const double y = p.number("y", 2.0);
  const int kmax = p.integer("k", n);
  const std::string channel = p.text("channel", "homogeneous");
  const std::string state = p.text("state", "zero");
  p.finish();
  require(d >= 2, "d", "d must be >= 2");
  require(n >= 1 && n <= 6, "n", "n must lie in [1, 6]");
  require_dense(d, n, 64, "n");
  require(y >= 1.0, "y", "y must be >= 1");
  require(kmax >= 1 && kmax <= n, "k", "k must lie in [1, n]");
  require(channel == "homogeneous" || channel == "product" || channel == "identity", "channel",
          "channel must be homogeneous, product or identity");
  require(state == "zero" || state == "mixed", "state", "state must be zero or mixed");

  const auto rho = site_state(state, d, cfg.seed);
  const ops::QuditSystem sys(d, n);
  const channels::DepolarizingChannel dep(y, d);
  channels::SuperoperatorChannel ch = channels::SuperoperatorChannel::identity(sys);
  ops::DensityMatrix out_site = rho;
  if (channel != "identity") {
    ch = channel == "homogeneous" ? channels::homogeneous_channel(dep, n) : channels::product_channel(dep, n);
    out_site = channels::depolarize_apply(dep, rho);
  }
  const auto in_space = geometry::sector_space(sys, rho, 1, kmax);
  const auto out_space = geometry::sector_space(sys, out_site, 1, kmax);
  const auto sp = geometry::contraction_spectrum(ch, out_space, in_space, {}, true);

  auto& t = rep.table("spectrum", {"index", "eta2", "eta", "degree"});
  double top = 0.0;
  double unit_dev = 0.0;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const double e = sp.eigenvalues[i];
    t.add({static_cast<int>(i), e, std::sqrt(std::max(0.0, e)), sp.labels[i].degree});
    top = std::max(top, e);
    unit_dev = std::max(unit_dev, std::abs(e - 1.0));
  }
  auto& s = rep.table("summary", {"dimension", "null_dimension", "out_null_dimension"});
  s.add({static_cast<int>(sp.size()), sp.null_dimension, sp.out_null_dimension});
  rep.check("contraction_bounded", top <= 1.0 + 1e-10, top, 1.0 + 1e-10, "max eta^2 <= 1");
  if (channel == "identity") rep.check("identity_unit_spectrum", unit_dev <= 1e-10, unit_dev, 1e-10);
}

// ---- fock ----

void fock_experiment(const RunConfig& cfg, Report& rep) {
  Check p(cfg.parameters, cfg.experiment);
  const int d = p.integer("d", 2);
  const double y = p.number("y", 2.0);
  const int kmax = p.integer("k", 2);
  const std::string sector = p.text("sector", "ordered");
  p.finish();
  require(d >= 2 && d <= 4, "d", "d must lie in [2, 4]");
  require(y >= 1.0, "y", "y must be >= 1");
  require(kmax >= 1 && kmax <= fock::max_degree, "k", "k must lie in [1, " + std::to_string(fock::max_degree) + "]");
  require(sector == "ordered" || sector == "symmetric", "sector", "sector must be ordered or symmetric");
  const auto mode = sector == "ordered" ? fock::TensorSector::ordered : fock::TensorSector::symmetric;

  const auto rho = ops::DensityMatrix::basis_state(d, 0);
  const channels::DepolarizingChannel dep(y, d);
  const auto in = fock::SingleParticleSpace::from_state(rho);
  const auto out = fock::SingleParticleSpace::from_state(channels::depolarize_apply(dep, rho));
  const CMat m = fock::single_particle_map(dep, out, in);

  auto& t = rep.table("eigenvalues", {"k", "index", "eta2", "null", "polynomial"});
  for (int k = 1; k <= kmax; ++k) {
    const auto sp = fock::fock_block_spectrum(out, in, m, k, mode);
    for (std::size_t i = 0; i < sp.size(); ++i) {
      t.add({k, static_cast<int>(i), sp.eigenvalues[i], sp.labels[i].null, sp.labels[i].polynomial});
    }
    if (d != 2 || k > 2) continue;
    const double a = 1.0 / (y * y);
    std::vector<double> expect;
    if (k == 1) expect = {a, a};
    else if (mode == fock::TensorSector::ordered) expect = {2 * a / (1 + y * y), 2 * a / (1 + y * y), 0.0, 0.0};
    else expect = {2 * a / (1 + y * y), 2 * a / (1 + y * y), 0.0};
    double dev = expect.size() == sp.size() ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < std::min(expect.size(), sp.size()); ++i) dev = std::max(dev, std::abs(sp.eigenvalues[i] - expect[i]));
    rep.check("worked_example_k" + std::to_string(k), dev <= 1e-10, dev, 1e-10,
              "block spectrum against the closed-form pure-qubit values");
  }
}

// ---- compare ----

struct CompareCell {
  int k;
  double y;
  std::vector<int> n;
  std::vector<std::vector<double>> finite;
  std::vector<double> limit;
  std::vector<double> deviation;
};

std::vector<double> sector_eigenvalues(const fock::SingleParticleSpace& out, const fock::SingleParticleSpace& in,
                                       const CMat& m, int k, int n) {
  const auto pb = fock::symmetric_sector_problem(out, in, m, k, n);
  geometry::SolveOptions opts;
  opts.report_null_as_zero = true;
  return geometry::solve_contraction(pb.problem, opts).eigenvalues;
}

}  // namespace

Report compare(const RunConfig& cfg) {
  Report rep;
  rep.experiment = cfg.experiment;
  Check p(cfg.parameters, cfg.experiment);
  const int d = p.integer("d", 2);
  const std::vector<double> ys = p.has("y") ? std::vector<double>{p.number("y", 2.0)} : p.numbers("y_grid", {2.0});
  const std::vector<int> ks = p.has("k") ? std::vector<int>{p.integer("k", 1)} : p.integers("k_list", {1, 2});
  const std::vector<int> ns = p.integers("n_list", {4, 8, 16});
  p.finish();
  require(d >= 2 && d <= 4, "d", "d must lie in [2, 4]");
  for (double y : ys) require(y >= 1.0, "y", "y must be >= 1");
  for (int k : ks) require(k >= 1 && k <= fock::max_degree, "k", "k must lie in [1, 4]");
  require(std::is_sorted(ns.begin(), ns.end()) && std::adjacent_find(ns.begin(), ns.end()) == ns.end(), "n_list",
          "n_list must be strictly ascending");
  for (int k : ks) require(ns.front() >= k, "n_list", "every n must be >= k");
  require(ns.back() <= 4096, "n_list", "n above the symmetric-sector budget (4096)");

  const auto rho = ops::DensityMatrix::basis_state(d, 0);
  auto& rows = rep.table("compare", {"k", "y", "n", "index", "finite", "limit", "deviation"});
  auto& rates = rep.table("rates", {"k", "y", "final_deviation", "strictly_decreasing", "rate"});
  for (int k : ks) {
    for (double y : ys) {
      const channels::DepolarizingChannel dep(y, d);
      const auto in = fock::SingleParticleSpace::from_state(rho);
      const auto out = fock::SingleParticleSpace::from_state(channels::depolarize_apply(dep, rho));
      const CMat m = fock::single_particle_map(dep, out, in);
      const auto lim = sector_eigenvalues(out, in, m, k, 0);
      std::vector<double> devs, nn;
      for (int n : ns) {
        const auto fin = sector_eigenvalues(out, in, m, k, n);
        double dev = fin.size() == lim.size() ? 0.0 : std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < std::min(fin.size(), lim.size()); ++i) {
          dev = std::max(dev, std::abs(fin[i] - lim[i]));
          rows.add({k, y, n, static_cast<int>(i), fin[i], lim[i], std::abs(fin[i] - lim[i])});
        }
        devs.push_back(dev);
        nn.push_back(n);
      }
      bool decreasing = true;
      for (std::size_t i = 1; i < devs.size(); ++i) decreasing = decreasing && devs[i] < devs[i - 1];
      // Deviations at rounding level carry no rate information.
      const bool resolved = std::all_of(devs.begin(), devs.end(), [](double v) { return v > 1e-12; });
      const double rate = resolved ? geometry::loglog_slope(nn, devs) : kNaN;
      rates.add({k, y, devs.back(), decreasing, rate});
      const std::string tag = "_k" + std::to_string(k) + "_y" + num(y);
      if (y == 1.0) {
        const double worst = *std::max_element(devs.begin(), devs.end());
        rep.check("identity_zero_deviation" + tag, worst <= 1e-12, worst, 1e-12);
      } else {
        const bool ok = decreasing && devs.back() <= 0.05 && resolved && std::abs(rate + 1.0) <= 0.3;
        rep.check("finite_n_convergence" + tag, ok, rate, 0.3,
                  "strictly decreasing deviations, final <= 0.05, rate within 0.3 of -1; final deviation " +
                      num(devs.back()));
      }
    }
  }
  return rep;
}

namespace {

// ---- bound-check ----

void bound_check(const RunConfig& cfg, Report& rep) {
  Check p(cfg.parameters, cfg.experiment);
  const int d = p.integer("d", 2);
  const int n = p.integer("n", 3);
  const double y = p.number("y", 3.0);
  const int k = p.integer("k", 1);
  const int samples = p.integer("samples", 1000);
  const bool per_sector = p.boolean("per_sector", false);
  const double tol = p.number("tolerance", 1e-10);
  p.finish();
  require(d >= 2, "d", "d must be >= 2");
  require(n >= 1 && n <= 4, "n", "n must lie in [1, 4]");
  require_dense(d, n, 81, "n");
  require(y > 1.0, "y", "y must be > 1 (the bound is undefined at y = 1)");
  require(k >= 1 && k <= n, "k", "k must lie in [1, n]");
  require(samples >= 1, "samples", "samples must be >= 1");
  require(tol >= 0.0, "tolerance", "tolerance must be >= 0");

  const auto r = fock::beta_bound_test(n, d, y, k, samples, cfg.seed, per_sector, tol);
  auto& t = rep.table("bound", {"n", "d", "y", "k", "beta", "beta_decreasing", "samples", "violations", "max_ratio",
                                "per_sector_samples", "per_sector_violations", "per_sector_max_ratio"});
  t.add({r.n, r.d, r.y, r.k, r.beta, fock::beta_decreasing(d, y), r.samples, r.violations, r.max_ratio,
         r.per_sector_samples, r.per_sector_violations, r.per_sector_max_ratio});
  rep.check("beta_bound", r.violations == 0 && r.per_sector_violations == 0,
            static_cast<double>(r.violations + r.per_sector_violations), 0.0,
            "violations of |A|^2_N <= beta_k |A|^2; max ratio/beta " + num(r.max_ratio / r.beta));
}

// ---- lattice ----

void lattice_experiment(const RunConfig& cfg, Report& rep) {
  Check p(cfg.parameters, cfg.experiment);
  const int L = p.integer("L", 32);
  const double eps = p.number("eps", 1.0);
  const auto ratios = p.numbers("sigma_over_eps", {1.0, 2.0, 4.0});
  const double y = p.number("y", 2.0);
  const double cutoff = p.number("cutoff", 0.5 * std::numbers::pi / eps);
  const int samples = p.integer("samples", 20);
  const auto probe_k = p.integers("probe_k", {1, 2});
  const int probe_L = p.integer("probe_L", 16);
  const double length = p.number("length", 1.0);
  const double sigma = p.number("sigma", 0.25);
  const auto scan = p.numbers("scan_sigma_over_eps", {2.0, 4.0, 8.0});
  const int l0 = p.integer("continuum_L0", 16);
  const int refinements = p.integer("refinements", 4);
  p.finish();
  require(L >= 8 && L % 2 == 0 && L <= channels::SwapDiffusion::max_sites_k1, "L", "L must be even in [8, 64]");
  require(eps > 0.0, "eps", "eps must be > 0");
  for (double r : ratios) require(r >= 0.0, "sigma_over_eps", "ratios must be >= 0");
  require(y >= 1.0, "y", "y must be >= 1");
  require(samples >= 1, "samples", "samples must be >= 1");
  require(probe_L >= 8 && probe_L % 2 == 0 && probe_L <= channels::SwapDiffusion::max_sites_k2, "probe_L",
          "probe_L must be even in [8, 32]");
  require(cutoff > 0.0 && cutoff <= std::numbers::pi / eps, "cutoff", "cutoff must lie in (0, pi/eps]");
  for (int k : probe_k) require(k == 1 || k == 2, "probe_k", "probe k must be 1 or 2");
  require(length > 0.0, "length", "length must be > 0");
  require(sigma > 0.0, "sigma", "sigma must be > 0");
  for (double r : scan) {
    const double lr = r * length / sigma;
    const auto li = std::llround(lr);
    require(std::abs(lr - li) < 1e-9 * lr && li >= 8 && li % 2 == 0 && li <= channels::SwapDiffusion::max_sites_k2,
            "scan_sigma_over_eps", "each ratio must give an even ring size in [8, 32] (L = ratio * length / sigma)");
  }
  require(l0 >= 8 && l0 % 2 == 0, "continuum_L0", "continuum_L0 must be even and >= 8");
  require(refinements >= 1 && refinements <= 10, "refinements", "refinements must lie in [1, 10]");

  // Spin waves against the closed form.
  const lattice::RingLattice lat(L, eps);
  auto& modes = rep.table("modes", {"sigma_over_eps", "m", "p", "eta", "closed_form", "exponent_lattice",
                                    "exponent_continuum"});
  double worst = 0.0;
  double worst_rel = 0.0;
  for (double r : ratios) {
    const double s = r * eps;
    for (int m : lat.modes()) {
      const double pm = lat.momentum(m);
      const double eta = lattice::mode_contraction_k1(lat, s, y, pm);
      const double closed = std::exp(-r * r * (1.0 - std::cos(pm * eps))) / y;
      worst = std::max(worst, std::abs(eta - closed));
      const double el = std::log(eta * y);
      const double ec = -0.5 * s * s * pm * pm;
      if (m != 0 && std::abs(pm * eps) <= 0.5 && r > 0.0) worst_rel = std::max(worst_rel, std::abs(el - ec) / std::abs(ec));
      modes.add({r, m, pm, eta, closed, el, ec});
    }
  }
  rep.check("mode_contraction_k1", worst <= 1e-10, worst, 1e-10, "against y^-1 e^{-(sigma/eps)^2 (1 - cos p eps)}");
  rep.check("continuum_exponent", worst_rel <= 0.1, worst_rel, 0.1, "relative exponent mismatch for p eps <= 0.5");

  auto& u1 = rep.table("unproven1", {"k", "L", "sigma", "cutoff", "samples", "max_eta", "sup_eta", "lattice_bound",
                                     "continuum_bound", "site_factor", "asserted"});
  const lattice::RingLattice plat(probe_L, eps);
  const double psig = ratios.back() * eps;
  for (int k : probe_k) {
    const auto r = lattice::unproven1_probe(plat, psig, y, std::min(cutoff, plat.nyquist()), k, samples,
                                            rng::split_seed(cfg.seed, 100 + static_cast<std::uint64_t>(k)));
    u1.add({r.k, probe_L, psig, r.cutoff, r.samples, r.max_eta, r.asserted ? r.sup_eta : kNaN, r.lattice_bound,
            r.continuum_bound, r.site_factor, r.asserted});
    if (r.asserted) rep.check("unproven1_k1", r.pass, std::max(r.max_eta, r.sup_eta), r.lattice_bound);
  }

  // Continuum inner product under eps halving.
  const lattice::RingLattice base(l0, length / l0);
  CMat t1(2, 2);
  t1 << 0, 1, 1, 0;
  const auto f = lattice::cosine_mode(base, base.nyquist(), 1, t1);
  std::vector<double> eps_list;
  for (int r = 0; r <= refinements; ++r) eps_list.push_back(length / (l0 * std::pow(2.0, r)));
  const auto cont = lattice::continuum_inner_convergence(f, f, ops::DensityMatrix::basis_state(2, 0), eps_list);
  auto& ct = rep.table("continuum", {"L", "eps", "product_re", "product_im", "limit_re", "deviation", "quadrature"});
  for (const auto& r : cont.rows) {
    ct.add({r.L, r.eps, r.product.real(), r.product.imag(), r.limit.real(), r.deviation, r.quadrature});
  }
  rep.check("continuum_strict_decrease", cont.strictly_decreasing, cont.rate, 0.0, "fitted rate in eps " + num(cont.rate));
  rep.check("continuum_final_deviation", cont.rows.back().deviation <= 1e-3, cont.rows.back().deviation, 1e-3);

  auto& u2 = rep.table("unproven2", {"degree", "L", "eps", "sigma_over_eps", "deviation", "bound", "dev_independent",
                                     "dev_dynamics", "dev_continuum"});
  for (int j : {1, 2}) {
    const auto sc = lattice::unproven2_scan(length, sigma, j, scan, ops::DensityMatrix::basis_state(2, 0));
    for (const auto& r : sc.rows) {
      u2.add({j, r.L, r.eps, r.sigma_over_eps, r.deviation, j == 1 ? r.bound : kNaN, j == 2 ? r.dev_independent : kNaN,
              j == 2 ? r.dev_dynamics : kNaN, j == 2 ? r.dev_continuum : kNaN});
    }
    if (j == 1) {
      double worst_excess = -std::numeric_limits<double>::infinity();
      for (const auto& r : sc.rows) worst_excess = std::max(worst_excess, r.deviation - r.bound);
      rep.check("unproven2_j1_dispersion_bound", sc.pass, worst_excess, 0.0, "deviation minus dispersion bound");
    } else {
      rep.check("unproven2_j2_monotone", sc.pass, sc.rows.back().dev_independent, 0.0,
                "two-walker vs independent diffusions decreasing in sigma/eps");
    }
  }
}

// ---- clt ----

SymmetricWord parse_word(const std::string& s, int alphabet, const std::string& key) {
  if (s == "vac" || s.empty()) return SymmetricWord{};
  std::vector<int> letters;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, '.')) {
    require(!part.empty() && part.find_first_not_of("0123456789") == std::string::npos, key,
            "word must be 'vac' or letter indices joined by '.', e.g. 0.1");
    const int l = std::stoi(part);
    require(l < alphabet, key, "letter " + part + " outside the single-particle basis (size " + std::to_string(alphabet) + ")");
    letters.push_back(l);
  }
  require(letters.size() <= 8, key, "words are limited to degree 8");
  return SymmetricWord(std::move(letters));
}

void clt_experiment(const RunConfig& cfg, Report& rep) {
  Check p(cfg.parameters, cfg.experiment);
  const int d = p.integer("d", 2);
  const std::string us = p.text("u", "0.0");
  const std::string vs = p.text("v", "0.0");
  const auto ns = p.integers("n_list", {4, 8, 16, 32});
  p.finish();
  require(d >= 2 && d <= 4, "d", "d must lie in [2, 4]");
  const auto sp = fock::SingleParticleSpace::from_state(ops::DensityMatrix::basis_state(d, 0));
  const auto u = parse_word(us, sp.size(), "u");
  const auto v = parse_word(vs, sp.size(), "v");
  require(std::is_sorted(ns.begin(), ns.end()) && std::adjacent_find(ns.begin(), ns.end()) == ns.end(), "n_list",
          "n_list must be strictly ascending");
  require(ns.front() >= std::max(u.degree(), v.degree()), "n_list", "every n must be at least the word degree");

  const auto r = fock::clt_convergence(sp.kernel(), single_word(u), single_word(v), ns);
  auto& t = rep.table("clt", {"n", "finite_re", "finite_im", "limit_re", "limit_im", "deviation"});
  for (const auto& row : r.rows) {
    t.add({row.n, row.finite.real(), row.finite.imag(), row.limit.real(), row.limit.imag(), row.deviation});
  }
  rep.check("clt_monotone", r.monotone, r.rows.back().deviation, 0.0, "deviation non-increasing in n");
  if (r.all_zero) {
    rep.check("clt_rate", true, kNaN, 0.2, "finite-n value equals the limit");
  } else {
    rep.check("clt_rate", std::abs(r.rate + 1.0) <= 0.2, r.rate, 0.2, "log-log rate within 0.2 of -1");
  }
}

}  // namespace

json config_echo(const RunConfig& cfg) {
  json out = {{"experiment", cfg.experiment}, {"parameters", cfg.parameters}, {"seed", cfg.seed}};
  json o = {{"format", to_string(cfg.format)}};
  if (cfg.output_path) o["path"] = *cfg.output_path;
  out["output"] = o;
  return out;
}

Report run(const RunConfig& cfg) {
  static const std::map<std::string, std::function<void(const RunConfig&, Report&)>> table{
      {"spectrum", spectrum},
      {"fock", fock_experiment},
      {"bound-check", bound_check},
      {"lattice", lattice_experiment},
      {"clt", clt_experiment},
  };
  Report rep;
  if (cfg.experiment == "compare") {
    rep = compare(cfg);
  } else {
    auto it = table.find(cfg.experiment);
    if (it == table.end()) throw ConfigError("experiment", "unknown experiment '" + cfg.experiment + "'");
    rep.experiment = cfg.experiment;
    it->second(cfg, rep);
  }
  rep.seed = cfg.seed;
  rep.version = FLAB_VERSION;
  rep.config = config_echo(cfg);
  return rep;
}

}  // namespace flab::cli
