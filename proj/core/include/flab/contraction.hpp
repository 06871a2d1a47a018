#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flab/channels.hpp"
#include "flab/info_geometry.hpp"
#include "flab/types.hpp"

namespace flab::geometry {

/// Real data of the eigenproblem for N N^*: Gram of the input space G, Gram of
/// the output space G', channel coefficients M (in x out).
struct ContractionProblem {
  RMat gram_in;
  RMat gram_out;
  RMat channel;
};

struct SolveOptions {
  double null_threshold = 1e-10;  ///< relative to the largest Gram eigenvalue
  bool report_null_as_zero = false;
  double tie_tolerance = 1e-12;
};

struct SpectrumLabel {
  int degree = -1;       ///< locality / Fock degree when known
  std::string symmetry;  ///< e.g. "symmetric", "full"
  std::optional<double> momentum;
  std::string polynomial;  ///< mode-operator form, when available
  bool null = false;       ///< a quotiented (zero-norm) direction
};

struct ContractionSpectrum {
  std::vector<double> eigenvalues;  ///< eta^2, descending; reported nulls last
  RMat eigenvectors;                ///< G-orthonormal columns over the input basis
  std::vector<SpectrumLabel> labels;
  int null_dimension = 0;
  int out_null_dimension = 0;

  std::size_t size() const { return eigenvalues.size(); }
};

/// Diagonalizes M G'^+ M^T G on the non-null part of G via symmetric whitening.
ContractionSpectrum solve_contraction(const ContractionProblem& problem, const SolveOptions& opts = {});

/// eta(c) = |N^* c|' / |c| for a coefficient vector over the input basis; 0 for null c.
double contraction_ratio(const ContractionProblem& problem, const RVec& c,
                         double null_threshold = 1e-10);

/// Locality labels from per-basis-element degrees: the degree carrying the
/// most G-weight of each eigenvector.
void label_degrees(ContractionSpectrum& spectrum, const RMat& gram_in, const std::vector<int>& degrees);

ContractionProblem contraction_problem(const channels::SuperoperatorChannel& n, const GnsSpace& out_space,
                                       const GnsSpace& in_space, bool allow_singular_output = false);

ContractionSpectrum contraction_spectrum(const channels::SuperoperatorChannel& n, const GnsSpace& out_space,
                                         const GnsSpace& in_space, const SolveOptions& opts = {},
                                         bool allow_singular_output = false);

/// Zero-mean sector operators of support size in [min_size, max_size] at a
/// single-site state, flattened, with their sizes as degrees.
GnsSpace sector_space(ops::QuditSystem system, const ops::DensityMatrix& site_state, int min_size,
                      int max_size, bool include_identity = false);

struct DecayRow {
  int k = 0;
  double y = 1.0;
  double max_eta_sampled = 0.0;
  double sup_eta = 0.0;  ///< exact supremum over T_k-perp from the spectrum
  double bound = 0.0;    ///< sqrt(beta_{k+1}); infinity where undefined
};

struct DecayReport {
  int n = 0;
  int d = 0;
  int samples = 0;
  std::vector<DecayRow> rows;
  std::vector<double> slope_sampled;  ///< per k, over y > 1
  std::vector<double> slope_sup;
  int bound_violations = 0;
};

/// Contraction of directions orthogonal to all k-local operators under
/// P o D^{(x)n} at |0><0|^{(x)n}, for k = 0..k_max and each y.
DecayReport klocal_decay_check(int n, int d, const std::vector<double>& y_grid, int k_max, int samples,
                               std::uint64_t seed);

struct DataProcessingReport {
  int samples = 0;
  int violations = 0;
  double max_ratio = 0.0;  ///< max |A|_N / |A|
};

/// |A|_N <= |A| (1 + tol) on random full-rank states, random Kraus channels
/// and random zero-mean Hermitian A.
DataProcessingReport data_processing_check(int samples, std::uint64_t seed, double tol = 1e-10);

/// Least-squares slope of log(values) against log(xs); skips non-positive values.
double loglog_slope(const std::vector<double>& xs, const std::vector<double>& values);

}  // namespace flab::geometry
