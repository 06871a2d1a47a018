#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "flab/operators.hpp"
#include "flab/types.hpp"

namespace flab::lattice {

/// Periodic 1D lattice of L sites with spacing eps; momenta p_m = 2 pi m / (L eps)
/// for m in (-L/2, L/2].
class RingLattice {
 public:
  RingLattice(int L, double eps);

  int sites() const { return L_; }
  double eps() const { return eps_; }
  double length() const { return L_ * eps_; }
  double momentum(int m) const;
  double nyquist() const;
  /// Mode indices in (-L/2, L/2], ascending.
  std::vector<int> modes() const;
  /// Index m with |p_m - p| <= 1e-9 (|p| + 1); throws if p is not a ring momentum.
  int mode_of(double p) const;
  /// m brought into (-L/2, L/2].
  int wrap(int m) const;

 private:
  int L_;
  double eps_;
};

/// f(x) = sum_m c_m e^{i p_m x} with every carried |p_m| < cutoff and
/// c_{-m} = c_m^dagger, so f(x) is Hermitian.
class BandlimitedField {
 public:
  BandlimitedField(RingLattice lattice, double cutoff, std::map<int, CMat> coefficients);

  const RingLattice& lattice() const { return lattice_; }
  double cutoff() const { return cutoff_; }
  const std::map<int, CMat>& coefficients() const { return coeffs_; }
  int d() const { return d_; }

  /// Value at a continuous position.
  CMat value(double x) const;
  /// The same field on a lattice of equal physical length.
  BandlimitedField on_lattice(const RingLattice& finer) const;
  BandlimitedField scaled(double s) const;

 private:
  RingLattice lattice_;
  double cutoff_;
  std::map<int, CMat> coeffs_;
  int d_;
};

/// Single mode a cos(p_m x): coefficients a/2 at +-m (a at m = 0).
BandlimitedField cosine_mode(const RingLattice& lattice, double cutoff, int m, const CMat& a);

/// f(j eps) for j = 0..L-1. Requires cutoff <= pi / eps.
std::vector<CMat> sample_field(const BandlimitedField& f);

/// Discrete Fourier inverse of sample_field. Throws DomainError if the samples
/// carry weight (above 1e-10 relative) on momenta at or beyond the cutoff.
BandlimitedField shannon_reconstruct(const RingLattice& lattice, const std::vector<CMat>& samples, double cutoff);

/// Normalized Gaussian g_sigma (standard deviation sigma) on the ring.
class SmoothingKernel {
 public:
  SmoothingKernel(RingLattice lattice, double sigma);
  const RingLattice& lattice() const { return lattice_; }
  double sigma() const { return sigma_; }
  /// e^{-sigma^2 p^2 / 2}
  double multiplier(double p) const;

 private:
  RingLattice lattice_;
  double sigma_;
};

/// Gaussian convolution: each coefficient scaled by e^{-sigma^2 p^2 / 2}.
BandlimitedField smoother_apply(const SmoothingKernel& k, const BandlimitedField& f);

/// Direct periodic Gaussian convolution of a sampled field by quadrature on a
/// fine grid; used as an independent check of smoother_apply.
CMat smoother_convolve_at(const SmoothingKernel& k, const BandlimitedField& f, double x, int quadrature_points);

/// eta of the degree-1 spin wave cos(p x) a under P o D^{(x)L} at the product of
/// `site_state`, from the k = 1 swap semigroup and the GNS contraction ratio.
/// `letter` indexes ops::zero_mean_basis(site_state).
double mode_contraction_k1(const RingLattice& lattice, double sigma, double y, double p,
                           const ops::DensityMatrix& site_state, int letter = 0);
double mode_contraction_k1(const RingLattice& lattice, double sigma, double y, double p);

struct Unproven1Report {
  int k = 1;
  int samples = 0;
  double cutoff = 0.0;
  double max_eta = 0.0;           ///< over samples
  double sup_eta = 0.0;           ///< exact supremum over the sampled space (k = 1)
  double lattice_bound = 0.0;     ///< eta_site e^{-k (sigma/eps)^2 (1 - cos(cutoff eps))}
  double continuum_bound = 0.0;   ///< eta_site^k e^{-k sigma^2 cutoff^2 / 2}
  double site_factor = 0.0;       ///< eta_site, the homogeneous k = 1 value
  bool asserted = false;          ///< whether `pass` is a hard check (k = 1 only)
  bool pass = true;
};

/// Directions orthogonal to the bandlimited k-local sector (all carried momenta
/// >= cutoff) sampled at random; k = 1 asserts the lattice bound, k = 2 reports.
Unproven1Report unproven1_probe(const RingLattice& lattice, double sigma, double y, double cutoff, int k,
                                int samples, std::uint64_t seed);

struct ContinuumRow {
  int L = 0;
  double eps = 0.0;
  cplx product;
  cplx limit;
  double deviation = 0.0;
  double quadrature = 0.0;  ///< |eps sum tr(rho f g) - Parseval sum|
};

struct ContinuumReport {
  cplx inner;  ///< <f, g> from the Parseval sum
  std::vector<ContinuumRow> rows;
  bool strictly_decreasing = true;
  double rate = 0.0;  ///< log-log slope of deviation against eps
};

/// prod_j (1 - eps tr(rho f(j eps) g(j eps))) against e^{-<f, g>} on refinements
/// of f's lattice with equal physical length; `eps_list` must refine it.
ContinuumReport continuum_inner_convergence(const BandlimitedField& f, const BandlimitedField& g,
                                            const ops::DensityMatrix& site_state,
                                            const std::vector<double>& eps_list);

struct Unproven2Row {
  int L = 0;
  double eps = 0.0;
  double sigma_over_eps = 0.0;
  /// degree 1: |exact - smoothed| and its dispersion bound
  double deviation = 0.0;
  double bound = 0.0;
  /// degree 2: two-walker against independent diffusions (coincident sites
  /// included), against independent diffusions on distinct pairs only, and
  /// against the continuum permanent prediction
  double dev_independent = 0.0;
  double dev_dynamics = 0.0;
  double dev_continuum = 0.0;
};

struct Unproven2Report {
  int degree = 1;
  double length = 0.0;
  double sigma = 0.0;
  std::vector<Unproven2Row> rows;
  bool pass = true;  ///< degree 1: bound holds; degree 2: dev_independent strictly decreasing
};

/// Sup-norm comparison of the lattice P-action on degree-j spin-wave Gram
/// entries (mode panel |m| <= panel) against the smoothed-field prediction.
Unproven2Row unproven2_probe(const RingLattice& lattice, double sigma, int degree,
                             const ops::DensityMatrix& site_state, int panel = 1);

/// The probe over sigma/eps ratios at fixed physical length and sigma
/// (L = ratio * length / sigma).
Unproven2Report unproven2_scan(double length, double sigma, int degree, const std::vector<double>& sigma_over_eps,
                               const ops::DensityMatrix& site_state, int panel = 1);

}  // namespace flab::lattice
