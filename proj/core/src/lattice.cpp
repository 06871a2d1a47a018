#include "flab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "flab/channels.hpp"
#include "flab/contraction.hpp"
#include "flab/diffusion.hpp"
#include "flab/fock.hpp"
#include "flab/random.hpp"
#include "linalg.hpp"

namespace flab::lattice {

namespace {

constexpr double kPi = std::numbers::pi;

RMat kron_real(const RMat& a, const RMat& b) {
  RMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

// e^{2 pi i m j / L} with the exponent reduced mod L first.
cplx ring_phase(int m, int j, int L) {
  const long long r = ((static_cast<long long>(m) * j) % L + L) % L;
  const double angle = 2.0 * kPi * static_cast<double>(r) / static_cast<double>(L);
  return {std::cos(angle), std::sin(angle)};
}

double dispersion(double p, double eps) { return 1.0 - std::cos(p * eps); }

// Letters of the zero-mean basis with non-vanishing norm.
std::vector<CMat> live_letters(const ops::DensityMatrix& state) {
  const auto all = ops::zero_mean_basis(state.matrix());
  std::vector<double> w;
  for (const auto& a : all) w.push_back((state.matrix() * a * a).trace().real());
  const double top = *std::max_element(w.begin(), w.end());
  std::vector<CMat> out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (w[i] > 1e-10 * top) out.push_back(all[i]);
  }
  return out;
}

CMat letter_kernel(const ops::DensityMatrix& state, const std::vector<CMat>& letters) {
  const auto n = static_cast<Eigen::Index>(letters.size());
  CMat k(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      k(a, b) = (state.matrix() * letters[static_cast<std::size_t>(a)] * letters[static_cast<std::size_t>(b)]).trace();
    }
  }
  return k;
}

// Single-site data of D at `state`: Re K, Re K', and the Heisenberg coefficients m (in x out).
struct SiteData {
  RMat gram_in;
  RMat gram_out;
  RMat m;
};

SiteData site_data(const channels::DepolarizingChannel& ch, const fock::SingleParticleSpace& in) {
  const auto out = fock::SingleParticleSpace::from_state(channels::depolarize_apply(ch, in.state()));
  return {in.gram_real(), out.gram_real(), fock::single_particle_map(ch, out, in).real()};
}

double top_eta(const geometry::ContractionProblem& pb) {
  const auto sp = geometry::solve_contraction(pb);
  if (sp.eigenvalues.empty()) return 0.0;
  return std::sqrt(std::max(0.0, sp.eigenvalues.front()));
}

}  // namespace

// ---- RingLattice ----

RingLattice::RingLattice(int L, double eps) : L_(L), eps_(eps) {
  if (L < 8 || L % 2 != 0) throw DomainError("RingLattice: L must be even and >= 8 (got " + std::to_string(L) + ")");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("RingLattice: spacing eps must be > 0");
}

double RingLattice::momentum(int m) const { return 2.0 * kPi * m / (L_ * eps_); }

double RingLattice::nyquist() const { return kPi / eps_; }

std::vector<int> RingLattice::modes() const {
  std::vector<int> out;
  for (int m = -L_ / 2 + 1; m <= L_ / 2; ++m) out.push_back(m);
  return out;
}

int RingLattice::wrap(int m) const {
  int r = ((m % L_) + L_) % L_;
  return r > L_ / 2 ? r - L_ : r;
}

int RingLattice::mode_of(double p) const {
  if (!std::isfinite(p)) throw DomainError("RingLattice: momentum must be finite");
  const double x = p * L_ * eps_ / (2.0 * kPi);
  const auto m = static_cast<int>(std::llround(x));
  if (std::abs(momentum(m) - p) > 1e-9 * (1.0 + std::abs(p))) {
    throw DomainError("RingLattice: p = " + std::to_string(p) + " is not a ring momentum");
  }
  return wrap(m);
}

// ---- BandlimitedField ----

BandlimitedField::BandlimitedField(RingLattice lattice, double cutoff, std::map<int, CMat> coefficients)
    : lattice_(lattice), cutoff_(cutoff), coeffs_(std::move(coefficients)), d_(0) {
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw DomainError("BandlimitedField: cutoff must be > 0");
  if (coeffs_.empty()) throw DomainError("BandlimitedField: at least one coefficient is required");
  double scale = 1.0;
  for (const auto& [m, c] : coeffs_) {
    if (c.rows() != c.cols() || c.rows() < 1) throw DomainError("BandlimitedField: coefficients must be square");
    if (d_ == 0) d_ = static_cast<int>(c.rows());
    if (c.rows() != d_) throw DomainError("BandlimitedField: coefficient dimensions differ");
    if (lattice_.wrap(m) != m) throw DomainError("BandlimitedField: mode index " + std::to_string(m) + " outside (-L/2, L/2]");
    if (!(std::abs(lattice_.momentum(m)) < cutoff)) {
      throw DomainError("BandlimitedField: momentum " + std::to_string(lattice_.momentum(m)) +
                        " is not strictly below the cutoff " + std::to_string(cutoff));
    }
    scale = std::max(scale, c.norm());
  }
  for (const auto& [m, c] : coeffs_) {
    const int mm = lattice_.wrap(-m);
    auto it = coeffs_.find(mm);
    const CMat partner = it == coeffs_.end() ? CMat::Zero(d_, d_) : it->second;
    if ((partner - c.adjoint()).norm() > 1e-12 * scale) {
      throw DomainError("BandlimitedField: coefficient at -p must be the adjoint of the one at p (mode " +
                        std::to_string(m) + ")");
    }
  }
}

CMat BandlimitedField::value(double x) const {
  CMat out = CMat::Zero(d_, d_);
  for (const auto& [m, c] : coeffs_) out += std::polar(1.0, lattice_.momentum(m) * x) * c;
  return out;
}

BandlimitedField BandlimitedField::on_lattice(const RingLattice& finer) const {
  if (std::abs(finer.length() - lattice_.length()) > 1e-12 * lattice_.length()) {
    throw DomainError("BandlimitedField::on_lattice: physical ring length must agree");
  }
  return BandlimitedField(finer, cutoff_, coeffs_);
}

BandlimitedField BandlimitedField::scaled(double s) const {
  std::map<int, CMat> c;
  for (const auto& [m, v] : coeffs_) c.emplace(m, s * v);
  return BandlimitedField(lattice_, cutoff_, std::move(c));
}

BandlimitedField cosine_mode(const RingLattice& lattice, double cutoff, int m, const CMat& a) {
  if ((a - a.adjoint()).norm() > 1e-12 * std::max(1.0, a.norm())) throw DomainError("cosine_mode: amplitude must be Hermitian");
  std::map<int, CMat> c;
  const int mm = lattice.wrap(-m);
  if (mm == m) {
    c.emplace(m, a);
  } else {
    c.emplace(m, 0.5 * a);
    c.emplace(mm, 0.5 * a);
  }
  return BandlimitedField(lattice, cutoff, std::move(c));
}

std::vector<CMat> sample_field(const BandlimitedField& f) {
  const auto& lat = f.lattice();
  if (f.cutoff() > lat.nyquist() * (1.0 + 1e-15)) {
    throw DomainError("sample_field: cutoff " + std::to_string(f.cutoff()) + " exceeds the Nyquist momentum " +
                      std::to_string(lat.nyquist()));
  }
  std::vector<CMat> out(static_cast<std::size_t>(lat.sites()), CMat::Zero(f.d(), f.d()));
  for (int j = 0; j < lat.sites(); ++j) {
    for (const auto& [m, c] : f.coefficients()) out[static_cast<std::size_t>(j)] += ring_phase(m, j, lat.sites()) * c;
  }
  return out;
}

BandlimitedField shannon_reconstruct(const RingLattice& lattice, const std::vector<CMat>& samples, double cutoff) {
  const int L = lattice.sites();
  if (static_cast<int>(samples.size()) != L) throw DomainError("shannon_reconstruct: expected one sample per site");
  if (cutoff > lattice.nyquist() * (1.0 + 1e-15)) throw DomainError("shannon_reconstruct: cutoff above Nyquist");
  const auto d = samples.front().rows();
  double scale = 0.0;
  for (const auto& s : samples) {
    if (s.rows() != d || s.cols() != d) throw DomainError("shannon_reconstruct: samples must share one square shape");
    scale = std::max(scale, s.norm());
  }
  for (const auto& s : samples) {
    if ((s - s.adjoint()).norm() > 1e-12 * std::max(scale, 1.0)) throw DomainError("shannon_reconstruct: samples must be Hermitian");
  }
  std::map<int, CMat> raw;
  for (int m : lattice.modes()) {
    CMat c = CMat::Zero(d, d);
    for (int j = 0; j < L; ++j) c += std::conj(ring_phase(m, j, L)) * samples[static_cast<std::size_t>(j)];
    raw.emplace(m, c / static_cast<double>(L));
  }
  std::map<int, CMat> kept;
  for (const auto& [m, c] : raw) {
    const CMat sym = 0.5 * (c + raw.at(lattice.wrap(-m)).adjoint());
    const double nrm = sym.norm();
    if (!(std::abs(lattice.momentum(m)) < cutoff)) {
      if (nrm > 1e-10 * std::max(scale, 1e-300)) {
        throw DomainError("shannon_reconstruct: samples carry momentum " + std::to_string(lattice.momentum(m)) +
                          " at or above the cutoff");
      }
      continue;
    }
    if (nrm > 1e-14 * scale) kept.emplace(m, sym);
  }
  if (kept.empty()) kept.emplace(0, CMat::Zero(d, d));
  return BandlimitedField(lattice, cutoff, std::move(kept));
}

// ---- smoothing ----

SmoothingKernel::SmoothingKernel(RingLattice lattice, double sigma) : lattice_(lattice), sigma_(sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("SmoothingKernel: sigma must be >= 0");
}

double SmoothingKernel::multiplier(double p) const { return std::exp(-0.5 * sigma_ * sigma_ * p * p); }

BandlimitedField smoother_apply(const SmoothingKernel& k, const BandlimitedField& f) {
  if (std::abs(k.lattice().length() - f.lattice().length()) > 1e-12 * f.lattice().length()) {
    throw DomainError("smoother_apply: kernel and field live on rings of different length");
  }
  std::map<int, CMat> c;
  for (const auto& [m, v] : f.coefficients()) c.emplace(m, k.multiplier(f.lattice().momentum(m)) * v);
  return BandlimitedField(f.lattice(), f.cutoff(), std::move(c));
}

CMat smoother_convolve_at(const SmoothingKernel& k, const BandlimitedField& f, double x, int quadrature_points) {
  if (quadrature_points < 2) throw DomainError("smoother_convolve_at: need at least 2 quadrature points");
  if (k.sigma() == 0.0) return f.value(x);
  const double ell = f.lattice().length();
  const double s = k.sigma();
  const int images = static_cast<int>(std::ceil(10.0 * s / ell)) + 1;
  const double h = ell / quadrature_points;
  const double norm = 1.0 / (std::sqrt(2.0 * kPi) * s);
  CMat out = CMat::Zero(f.d(), f.d());
  for (int q = 0; q < quadrature_points; ++q) {
    const double xp = q * h;
    double g = 0.0;
    for (int n = -images; n <= images; ++n) {
      const double u = x - xp + n * ell;
      g += norm * std::exp(-0.5 * u * u / (s * s));
    }
    out += (g * h) * f.value(xp);
  }
  return out;
}

// ---- k = 1 spin waves ----

namespace {

struct K1Problem {
  geometry::ContractionProblem pb;
  int letters;
};

K1Problem k1_problem(const RingLattice& lat, double sigma, double y, const ops::DensityMatrix& site_state) {
  channels::DepolarizingChannel ch(y, site_state.system().d());
  const auto in = fock::SingleParticleSpace::from_state(site_state);
  const SiteData sd = site_data(ch, in);
  const channels::SwapDiffusion diff(lat.sites(), lat.eps(), sigma);
  const RMat s = diff.sector_semigroup(1);
  const RMat id = RMat::Identity(lat.sites(), lat.sites());
  return {{kron_real(id, sd.gram_in), kron_real(id, sd.gram_out), kron_real(s, sd.m)}, in.size()};
}

RVec spin_wave(const RingLattice& lat, int m, bool sine, int letter, int letters) {
  RVec c = RVec::Zero(static_cast<Eigen::Index>(lat.sites()) * letters);
  for (int j = 0; j < lat.sites(); ++j) {
    const cplx ph = ring_phase(m, j, lat.sites());
    c(static_cast<Eigen::Index>(j) * letters + letter) = sine ? ph.imag() : ph.real();
  }
  return c;
}

}  // namespace

double mode_contraction_k1(const RingLattice& lattice, double sigma, double y, double p,
                           const ops::DensityMatrix& site_state, int letter) {
  if (site_state.system().n() != 1) throw DomainError("mode_contraction_k1: site_state must be single-site");
  const int m = lattice.mode_of(p);
  const auto k1 = k1_problem(lattice, sigma, y, site_state);
  if (letter < 0 || letter >= k1.letters) throw DomainError("mode_contraction_k1: letter index out of range");
  return geometry::contraction_ratio(k1.pb, spin_wave(lattice, m, false, letter, k1.letters));
}

double mode_contraction_k1(const RingLattice& lattice, double sigma, double y, double p) {
  return mode_contraction_k1(lattice, sigma, y, p, ops::DensityMatrix::basis_state(2, 0), 0);
}

// ---- bandlimited decay probe ----

namespace {

std::vector<int> high_modes(const RingLattice& lat, double cutoff) {
  std::vector<int> out;
  for (int m : lat.modes()) {
    if (std::abs(lat.momentum(m)) >= cutoff * (1.0 - 1e-12)) out.push_back(m);
  }
  return out;
}

std::vector<int> low_modes(const RingLattice& lat, double cutoff) {
  std::vector<int> out;
  for (int m : lat.modes()) {
    if (std::abs(lat.momentum(m)) < cutoff * (1.0 - 1e-12)) out.push_back(m);
  }
  return out;
}

Unproven1Report probe_k1(const RingLattice& lat, double sigma, double y, double cutoff, int samples,
                         std::uint64_t seed, const ops::DensityMatrix& rho) {
  Unproven1Report rep;
  rep.k = 1;
  rep.samples = samples;
  rep.cutoff = cutoff;
  const auto k1 = k1_problem(lat, sigma, y, rho);
  const int nl = k1.letters;

  channels::DepolarizingChannel ch(y, rho.system().d());
  const SiteData sd = site_data(ch, fock::SingleParticleSpace::from_state(rho));
  rep.site_factor = top_eta({sd.gram_in, sd.gram_out, sd.m});

  // Real cos/sin modes at or above the cutoff, one column per (mode, letter).
  std::vector<RVec> cols;
  for (int m : high_modes(lat, cutoff)) {
    if (m < 0 && lat.wrap(-m) != m) continue;
    for (int a = 0; a < nl; ++a) {
      cols.push_back(spin_wave(lat, m, false, a, nl));
      if (m != 0 && m != lat.sites() / 2) cols.push_back(spin_wave(lat, m, true, a, nl));
    }
  }
  RMat q(k1.pb.gram_in.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) q.col(static_cast<Eigen::Index>(i)) = cols[i];

  const RMat gq = k1.pb.gram_in * q;
  const RMat gr = q.transpose() * gq;
  const RMat mr = detail::psd_pinv(gr, 1e-10) * (gq.transpose() * k1.pb.channel);
  rep.sup_eta = top_eta({gr, k1.pb.gram_out, mr});

  const RMat gout_pinv = detail::psd_pinv(k1.pb.gram_out, 1e-10);
  for (int s = 0; s < samples; ++s) {
    auto eng = rng::make_engine(seed, static_cast<std::uint64_t>(s));
    const RVec w = rng::gaussian_vector(q.cols(), eng);
    const RVec c = q * w;
    const RVec gc = k1.pb.gram_in * c;
    const double den = c.dot(gc);
    if (!(den > 0.0)) continue;
    const RVec v = k1.pb.channel.transpose() * gc;
    rep.max_eta = std::max(rep.max_eta, std::sqrt(std::max(0.0, v.dot(gout_pinv * v)) / den));
  }
  const double r = sigma / lat.eps();
  rep.lattice_bound = rep.site_factor * std::exp(-r * r * dispersion(cutoff, lat.eps()));
  rep.continuum_bound = rep.site_factor * std::exp(-0.5 * sigma * sigma * cutoff * cutoff);
  rep.asserted = true;
  const double slack = 1e-9 * rep.lattice_bound + 1e-14;
  rep.pass = rep.max_eta <= rep.lattice_bound + slack && rep.sup_eta <= rep.lattice_bound + slack;
  return rep;
}

// Two-walker sector in unordered-pair coordinates: rows index pairs i < j,
// columns letter pairs (a on i, b on j). The real Gram is I (x) Re(K (x) K).
Unproven1Report probe_k2(const RingLattice& lat, double sigma, double y, double cutoff, int samples,
                         std::uint64_t seed, const ops::DensityMatrix& rho) {
  Unproven1Report rep;
  rep.k = 2;
  rep.samples = samples;
  rep.cutoff = cutoff;
  const int L = lat.sites();
  const channels::SwapDiffusion diff(L, lat.eps(), sigma);
  const RMat s2 = diff.sector_semigroup(2);
  const channels::PairIndex pidx{L};

  channels::DepolarizingChannel ch(y, rho.system().d());
  const auto in = fock::SingleParticleSpace::custom(rho, live_letters(rho));
  const SiteData sd = site_data(ch, in);
  const auto nl = sd.m.rows();
  const RMat b_in = kron_real(sd.gram_in, sd.gram_in);
  const RMat b_out_pinv = detail::psd_pinv(kron_real(sd.gram_out, sd.gram_out), 1e-10);
  const RMat m2 = kron_real(sd.m, sd.m);
  rep.site_factor = top_eta({b_in, kron_real(sd.gram_out, sd.gram_out), m2});

  // Euclidean projector onto restrictions of low x low plane waves to distinct ordered pairs.
  const auto lows = low_modes(lat, cutoff);
  const auto highs = high_modes(lat, cutoff);
  if (highs.empty()) throw DomainError("unproven1_probe: no ring momentum at or above the cutoff");
  const auto np = static_cast<Eigen::Index>(pidx.size());
  auto plane_pairs = [&](const std::vector<int>& ms) {
    CMat phi(np, static_cast<Eigen::Index>(ms.size() * ms.size()));
    for (Eigen::Index r = 0; r < np; ++r) {
      const auto [i, j] = pidx.pair(static_cast<std::size_t>(r));
      Eigen::Index col = 0;
      for (int p : ms) {
        for (int q : ms) phi(r, col++) = ring_phase(p, i, L) * ring_phase(q, j, L);
      }
    }
    return phi;
  };
  CMat low_basis;
  if (!lows.empty()) {
    const CMat phi = plane_pairs(lows);
    Eigen::JacobiSVD<CMat> svd(phi, Eigen::ComputeThinU);
    const RVec sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * sv(0)) ++rank;
    low_basis = svd.matrixU().leftCols(rank);
  }
  const CMat phi_high = plane_pairs(highs);
  const auto nh = static_cast<Eigen::Index>(highs.size());

  for (int smp = 0; smp < samples; ++smp) {
    auto eng = rng::make_engine(seed, static_cast<std::uint64_t>(smp));
    // Symmetric ordered representation F(i, j)_{ab} = F(j, i)_{ba}.
    RMat f(np, nl * nl);
    for (Eigen::Index lp = 0; lp < nl * nl; ++lp) {
      const RVec re = rng::gaussian_vector(nh * nh, eng);
      const RVec im = rng::gaussian_vector(nh * nh, eng);
      CMat z(nh * nh, 1);
      z.col(0) = re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>();
      f.col(lp) = (phi_high * z).real();
    }
    RMat fs(np, nl * nl);
    for (Eigen::Index r = 0; r < np; ++r) {
      const auto [i, j] = pidx.pair(static_cast<std::size_t>(r));
      const auto rs = static_cast<Eigen::Index>(pidx(j, i));
      for (Eigen::Index a = 0; a < nl; ++a) {
        for (Eigen::Index b = 0; b < nl; ++b) fs(r, a * nl + b) = f(r, a * nl + b) + f(rs, b * nl + a);
      }
    }
    if (low_basis.cols() > 0) {
      const CMat proj = low_basis * (low_basis.adjoint() * fs.cast<cplx>());
      fs -= proj.real();
    }
    // Unordered coefficients c_u = F(i, j) for i < j; w = G c expanded back to ordered pairs.
    RMat w(np, nl * nl);
    double den = 0.0;
    for (Eigen::Index r = 0; r < np; ++r) {
      const auto [i, j] = pidx.pair(static_cast<std::size_t>(r));
      if (i > j) continue;
      const RVec cu = fs.row(r).transpose();
      const RVec wu = b_in * cu;
      den += cu.dot(wu);
      const auto rs = static_cast<Eigen::Index>(pidx(j, i));
      w.row(r) = wu.transpose();
      for (Eigen::Index a = 0; a < nl; ++a) {
        for (Eigen::Index b = 0; b < nl; ++b) w(rs, b * nl + a) = wu(a * nl + b);
      }
    }
    if (!(den > 0.0)) continue;
    const RMat moved = s2.transpose() * (w * m2);
    double num = 0.0;
    for (Eigen::Index r = 0; r < np; ++r) {
      const auto [i, j] = pidx.pair(static_cast<std::size_t>(r));
      if (i > j) continue;
      const RVec v = moved.row(r).transpose();
      num += v.dot(b_out_pinv * v);
    }
    rep.max_eta = std::max(rep.max_eta, std::sqrt(std::max(0.0, num) / den));
  }
  const double r = sigma / lat.eps();
  rep.lattice_bound = rep.site_factor * std::exp(-2.0 * r * r * dispersion(cutoff, lat.eps()));
  rep.continuum_bound = rep.site_factor * std::exp(-sigma * sigma * cutoff * cutoff);
  rep.asserted = false;
  rep.pass = true;
  return rep;
}

}  // namespace

Unproven1Report unproven1_probe(const RingLattice& lattice, double sigma, double y, double cutoff, int k, int samples,
                                std::uint64_t seed) {
  if (k != 1 && k != 2) throw DomainError("unproven1_probe: unsupported k = " + std::to_string(k) + " (expected 1 or 2)");
  if (!(cutoff > 0.0) || cutoff > lattice.nyquist() * (1.0 + 1e-15)) {
    throw DomainError("unproven1_probe: cutoff must lie in (0, pi/eps]");
  }
  if (samples < 1) throw DomainError("unproven1_probe: samples must be >= 1");
  if (!(sigma >= 0.0)) throw DomainError("unproven1_probe: sigma must be >= 0");
  const auto rho = ops::DensityMatrix::basis_state(2, 0);
  if (high_modes(lattice, cutoff).empty()) throw DomainError("unproven1_probe: no ring momentum at or above the cutoff");
  return k == 1 ? probe_k1(lattice, sigma, y, cutoff, samples, seed, rho)
                : probe_k2(lattice, sigma, y, cutoff, samples, seed, rho);
}

// ---- continuum inner product ----

ContinuumReport continuum_inner_convergence(const BandlimitedField& f, const BandlimitedField& g,
                                            const ops::DensityMatrix& site_state,
                                            const std::vector<double>& eps_list) {
  if (f.d() != g.d() || site_state.system().n() != 1 || site_state.system().d() != f.d()) {
    throw DomainError("continuum_inner_convergence: fields and state must share the site dimension");
  }
  const double ell = f.lattice().length();
  if (std::abs(g.lattice().length() - ell) > 1e-12 * ell) {
    throw DomainError("continuum_inner_convergence: fields live on rings of different length");
  }
  if (eps_list.empty()) throw DomainError("continuum_inner_convergence: eps_list is empty");
  const CMat& rho = site_state.matrix();

  ContinuumReport rep;
  rep.inner = 0.0;
  for (const auto& [m, c] : f.coefficients()) {
    // \int e^{i (p_m + p_m') x} dx over the ring is ell when m' = -m.
    const double p = f.lattice().momentum(m);
    for (const auto& [mg, cg] : g.coefficients()) {
      if (std::abs(p + g.lattice().momentum(mg)) < 1e-12 * (1.0 + std::abs(p))) rep.inner += ell * (rho * c * cg).trace();
    }
  }
  const cplx limit = std::exp(-rep.inner);

  std::vector<double> eps_used;
  std::vector<double> devs;
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw DomainError("continuum_inner_convergence: eps must be > 0");
    const auto L = static_cast<int>(std::llround(ell / eps));
    if (std::abs(L * eps - ell) > 1e-9 * ell) {
      throw DomainError("continuum_inner_convergence: eps = " + std::to_string(eps) + " does not divide the ring length");
    }
    const RingLattice lat(L, eps);
    const auto fs = sample_field(f.on_lattice(lat));
    const auto gs = sample_field(g.on_lattice(lat));
    ContinuumRow row;
    row.L = L;
    row.eps = eps;
    row.product = 1.0;
    cplx quad = 0.0;
    for (int j = 0; j < L; ++j) {
      const cplx t = (rho * fs[static_cast<std::size_t>(j)] * gs[static_cast<std::size_t>(j)]).trace();
      if (std::abs(eps * t) >= 1.0) {
        throw DomainError("continuum_inner_convergence: |eps tr(rho f g)| >= 1 at site " + std::to_string(j) +
                          "; rescale the fields or refine the lattice");
      }
      row.product *= 1.0 - eps * t;
      quad += eps * t;
    }
    row.limit = limit;
    row.deviation = std::abs(row.product - limit);
    row.quadrature = std::abs(quad - rep.inner);
    if (row.quadrature > 1e-10 * (1.0 + std::abs(rep.inner))) {
      throw NumericalError("continuum_inner_convergence", "lattice quadrature disagrees with the Parseval sum by " +
                                                              std::to_string(row.quadrature));
    }
    if (!rep.rows.empty() && !(row.deviation < rep.rows.back().deviation)) rep.strictly_decreasing = false;
    eps_used.push_back(eps);
    devs.push_back(row.deviation);
    rep.rows.push_back(row);
  }
  const bool positive = std::all_of(devs.begin(), devs.end(), [](double v) { return v > 0.0; });
  rep.rate = (positive && devs.size() >= 2) ? geometry::loglog_slope(eps_used, devs) : 0.0;
  return rep;
}

// ---- smoothed-field comparison ----

namespace {

struct Mode {
  int m;
  int letter;
};

std::vector<Mode> mode_panel(const RingLattice& lat, int panel, int letters) {
  if (panel < 0) throw DomainError("unproven2_probe: panel must be >= 0");
  if (lat.momentum(panel) >= 0.5 * lat.nyquist()) {
    throw DomainError("unproven2_probe: panel momenta must stay below half the Nyquist momentum");
  }
  std::vector<Mode> out;
  for (int m = -panel; m <= panel; ++m) {
    for (int a = 0; a < letters; ++a) out.push_back({m, a});
  }
  return out;
}

// Gram of ordered-pair coefficient tensors (rows pairs, columns letter pairs):
// sum_r A(r)^H K2 B(r) + A(r)^H Q2 B(swap r).
CMat pair_gram(const std::vector<CMat>& a, const std::vector<CMat>& b, const std::vector<Eigen::Index>& swap,
               const CMat& k2, const CMat& q2) {
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  CMat out(na, nb);
  for (Eigen::Index v = 0; v < nb; ++v) {
    const CMat& bv = b[static_cast<std::size_t>(v)];
    CMat bs(bv.rows(), bv.cols());
    for (Eigen::Index r = 0; r < bv.rows(); ++r) bs.row(r) = bv.row(swap[static_cast<std::size_t>(r)]);
    const CMat t = bv * k2.transpose() + bs * q2.transpose();
    for (Eigen::Index u = 0; u < na; ++u) out(u, v) = a[static_cast<std::size_t>(u)].conjugate().cwiseProduct(t).sum();
  }
  return out;
}

}  // namespace

Unproven2Row unproven2_probe(const RingLattice& lattice, double sigma, int degree, const ops::DensityMatrix& site_state,
                             int panel) {
  if (degree != 1 && degree != 2) throw DomainError("unproven2_probe: unsupported degree " + std::to_string(degree));
  if (site_state.system().n() != 1) throw DomainError("unproven2_probe: site_state must be single-site");
  const int L = lattice.sites();
  const double eps = lattice.eps();
  const double ell = lattice.length();
  const auto letters = live_letters(site_state);
  const CMat kern = letter_kernel(site_state, letters);
  const auto nl = static_cast<Eigen::Index>(letters.size());
  const auto modes = mode_panel(lattice, panel, static_cast<int>(nl));
  const channels::SwapDiffusion diff(L, eps, sigma);
  const SmoothingKernel smooth(lattice, sigma);

  Unproven2Row row;
  row.L = L;
  row.eps = eps;
  row.sigma_over_eps = sigma / eps;
  // <f_u, X f_v> for plane-wave letters on the ring.
  auto smoothed = [&](const Mode& u, const Mode& v) -> cplx {
    if (u.m != v.m) return 0.0;
    return ell * smooth.multiplier(lattice.momentum(u.m)) * kern(u.letter, v.letter);
  };

  if (degree == 1) {
    const RMat s = diff.sector_semigroup(1);
    const auto nm = static_cast<Eigen::Index>(modes.size());
    CMat waves(L, nm);
    for (Eigen::Index u = 0; u < nm; ++u) {
      for (int j = 0; j < L; ++j) waves(j, u) = std::sqrt(eps) * ring_phase(modes[static_cast<std::size_t>(u)].m, j, L);
    }
    const CMat exact_sites = waves.adjoint() * s.cast<cplx>() * waves;
    const double r = sigma / eps;
    for (Eigen::Index u = 0; u < nm; ++u) {
      for (Eigen::Index v = 0; v < nm; ++v) {
        const auto& mu = modes[static_cast<std::size_t>(u)];
        const auto& mv = modes[static_cast<std::size_t>(v)];
        const cplx exact = exact_sites(u, v) * kern(mu.letter, mv.letter);
        row.deviation = std::max(row.deviation, std::abs(exact - smoothed(mu, mv)));
        if (mu.m == mv.m) {
          const double p = lattice.momentum(mu.m);
          const double b = ell * std::abs(kern(mu.letter, mv.letter)) * sigma * sigma * std::pow(p, 4) * eps * eps / 24.0 *
                           std::exp(-r * r * dispersion(p, eps));
          row.bound = std::max(row.bound, b);
        }
      }
    }
    return row;
  }

  // Degree 2: words are multisets {u1, u2} of panel modes.
  std::vector<std::pair<Mode, Mode>> words;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = i; j < modes.size(); ++j) words.emplace_back(modes[i], modes[j]);
  }
  const channels::PairIndex pidx{L};
  const auto np = static_cast<Eigen::Index>(pidx.size());
  const Eigen::Index lp = nl * nl;

  CMat k2(lp, lp), q2(lp, lp);
  for (Eigen::Index a = 0; a < nl; ++a) {
    for (Eigen::Index b = 0; b < nl; ++b) {
      for (Eigen::Index c = 0; c < nl; ++c) {
        for (Eigen::Index e = 0; e < nl; ++e) {
          k2(a * nl + b, c * nl + e) = kern(a, c) * kern(b, e);
          q2(a * nl + b, c * nl + e) = kern(a, e) * kern(b, c);
        }
      }
    }
  }

  std::vector<Eigen::Index> swap_off(static_cast<std::size_t>(np));
  for (Eigen::Index r = 0; r < np; ++r) {
    const auto [i, j] = pidx.pair(static_cast<std::size_t>(r));
    swap_off[static_cast<std::size_t>(r)] = static_cast<Eigen::Index>(pidx(j, i));
  }
  const auto nf = static_cast<Eigen::Index>(L) * L;
  std::vector<Eigen::Index> swap_full(static_cast<std::size_t>(nf));
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) swap_full[static_cast<std::size_t>(i * L + j)] = static_cast<Eigen::Index>(j) * L + i;
  }

  std::vector<CMat> off, full;
  for (const auto& [u1, u2] : words) {
    CMat t = CMat::Zero(np, lp);
    CMat tf = CMat::Zero(nf, lp);
    const Eigen::Index col = u1.letter * nl + u2.letter;
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        const cplx v = eps * ring_phase(u1.m, i, L) * ring_phase(u2.m, j, L);
        tf(static_cast<Eigen::Index>(i) * L + j, col) = v;
        if (i != j) t(static_cast<Eigen::Index>(pidx(i, j)), col) = v;
      }
    }
    off.push_back(std::move(t));
    full.push_back(std::move(tf));
  }

  const RMat s2 = diff.sector_semigroup(2);
  const RMat ind = channels::independent_pair_semigroup(diff);
  std::vector<CMat> moved2, moved_ind_full, moved_ind_off;
  for (std::size_t w = 0; w < words.size(); ++w) {
    moved2.push_back(s2.cast<cplx>() * off[w]);
    moved_ind_full.push_back(ind.cast<cplx>() * full[w]);
    CMat embedded = CMat::Zero(nf, lp);
    for (Eigen::Index r = 0; r < np; ++r) {
      const auto [i, j] = pidx.pair(static_cast<std::size_t>(r));
      embedded.row(static_cast<Eigen::Index>(i) * L + j) = off[w].row(r);
    }
    const CMat ev = ind.cast<cplx>() * embedded;
    CMat restricted(np, lp);
    for (Eigen::Index r = 0; r < np; ++r) {
      const auto [i, j] = pidx.pair(static_cast<std::size_t>(r));
      restricted.row(r) = ev.row(static_cast<Eigen::Index>(i) * L + j);
    }
    moved_ind_off.push_back(std::move(restricted));
  }
  const CMat two_walker = pair_gram(off, moved2, swap_off, k2, q2);
  const CMat independent = pair_gram(full, moved_ind_full, swap_full, k2, q2);
  const CMat dynamics = pair_gram(off, moved_ind_off, swap_off, k2, q2);

  for (std::size_t u = 0; u < words.size(); ++u) {
    for (std::size_t v = 0; v < words.size(); ++v) {
      const auto& [a1, a2] = words[u];
      const auto& [b1, b2] = words[v];
      const cplx cont = smoothed(a1, b1) * smoothed(a2, b2) + smoothed(a1, b2) * smoothed(a2, b1);
      const auto iu = static_cast<Eigen::Index>(u);
      const auto iv = static_cast<Eigen::Index>(v);
      row.dev_independent = std::max(row.dev_independent, std::abs(two_walker(iu, iv) - independent(iu, iv)));
      row.dev_dynamics = std::max(row.dev_dynamics, std::abs(two_walker(iu, iv) - dynamics(iu, iv)));
      row.dev_continuum = std::max(row.dev_continuum, std::abs(two_walker(iu, iv) - cont));
    }
  }
  row.deviation = row.dev_independent;
  return row;
}

Unproven2Report unproven2_scan(double length, double sigma, int degree, const std::vector<double>& sigma_over_eps,
                               const ops::DensityMatrix& site_state, int panel) {
  if (degree != 1 && degree != 2) throw DomainError("unproven2_probe: unsupported degree " + std::to_string(degree));
  if (!(length > 0.0) || !(sigma > 0.0)) throw DomainError("unproven2_scan: length and sigma must be > 0");
  Unproven2Report rep;
  rep.degree = degree;
  rep.length = length;
  rep.sigma = sigma;
  for (double ratio : sigma_over_eps) {
    const double eps = sigma / ratio;
    const auto L = static_cast<int>(std::llround(length / eps));
    if (std::abs(L * eps - length) > 1e-9 * length) {
      throw DomainError("unproven2_scan: sigma/eps = " + std::to_string(ratio) + " gives a non-integer ring size");
    }
    rep.rows.push_back(unproven2_probe(RingLattice(L, eps), sigma, degree, site_state, panel));
  }
  if (degree == 1) {
    for (const auto& r : rep.rows) {
      if (r.deviation > r.bound + 1e-10 * r.L * r.eps) rep.pass = false;
    }
  } else {
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      if (!(rep.rows[i].dev_independent < rep.rows[i - 1].dev_independent)) rep.pass = false;
    }
  }
  return rep;
}

}  // namespace flab::lattice
