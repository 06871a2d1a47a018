#include "flab/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "flab/bounds.hpp"
#include "flab/random.hpp"
#include "linalg.hpp"

namespace flab::geometry {

namespace {

// first entry above 1e-12 in magnitude made positive
void normalize_sign(RVec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

bool lex_less(const RVec& a, const RVec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i) - b(i)) > 1e-12) return a(i) < b(i);
  }
  return false;
}

}  // namespace

ContractionSpectrum solve_contraction(const ContractionProblem& pb, const SolveOptions& opts) {
  const Eigen::Index p = pb.gram_in.rows();
  const Eigen::Index q = pb.gram_out.rows();
  if (pb.gram_in.cols() != p || pb.gram_out.cols() != q || pb.channel.rows() != p || pb.channel.cols() != q) {
    throw DomainError("solve_contraction: inconsistent matrix shapes");
  }
  ContractionSpectrum out;
  if (p == 0) return out;

  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (pb.gram_in + pb.gram_in.transpose()));
  const RVec& lam = es.eigenvalues();
  const double top = lam.maxCoeff();
  if (lam.minCoeff() < -1e-10 * std::max(1.0, top)) {
    throw NumericalError("solve_contraction", "input Gram matrix is not positive semidefinite");
  }
  std::vector<Eigen::Index> keep, drop;
  for (Eigen::Index i = 0; i < p; ++i) {
    (top > 0.0 && lam(i) > opts.null_threshold * top ? keep : drop).push_back(i);
  }
  out.null_dimension = static_cast<int>(drop.size());

  if (q > 0) {
    Eigen::SelfAdjointEigenSolver<RMat> eo(0.5 * (pb.gram_out + pb.gram_out.transpose()), Eigen::EigenvaluesOnly);
    const double otop = eo.eigenvalues().maxCoeff();
    if (eo.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, otop)) {
      throw NumericalError("solve_contraction", "output Gram matrix is not positive semidefinite");
    }
    for (Eigen::Index i = 0; i < q; ++i) {
      if (!(otop > 0.0 && eo.eigenvalues()(i) > opts.null_threshold * otop)) ++out.out_null_dimension;
    }
  }

  const auto r = static_cast<Eigen::Index>(keep.size());
  RMat w(p, r), winv(p, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    const double l = lam(keep[static_cast<std::size_t>(c)]);
    w.col(c) = es.eigenvectors().col(keep[static_cast<std::size_t>(c)]) * std::sqrt(l);
    winv.col(c) = es.eigenvectors().col(keep[static_cast<std::size_t>(c)]) / std::sqrt(l);
  }
  const RMat gout_pinv = q > 0 ? detail::psd_pinv(pb.gram_out, opts.null_threshold) : RMat(0, 0);
  RMat s = RMat::Zero(r, r);
  if (q > 0 && r > 0) {
    const RMat mw = pb.channel.transpose() * w;  // q x r
    s = mw.transpose() * gout_pinv * mw;
    s = 0.5 * (s + s.transpose()).eval();
  }

  std::vector<double> mu;
  std::vector<RVec> z;
  if (r > 0) {
    Eigen::SelfAdjointEigenSolver<RMat> ss(s);
    for (Eigen::Index i = 0; i < r; ++i) {
      mu.push_back(ss.eigenvalues()(i));
      RVec v = ss.eigenvectors().col(i);
      normalize_sign(v);
      z.push_back(std::move(v));
    }
  }
  std::vector<std::size_t> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mu[a] > mu[b]; });
  // deterministic order inside groups of equal eigenvalues
  for (std::size_t g = 0; g < order.size();) {
    std::size_t e = g + 1;
    while (e < order.size() &&
           std::abs(mu[order[e]] - mu[order[g]]) <= opts.tie_tolerance * std::max(1.0, std::abs(mu[order[g]]))) {
      ++e;
    }
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(g), order.begin() + static_cast<std::ptrdiff_t>(e),
              [&](std::size_t a, std::size_t b) { return lex_less(z[a], z[b]); });
    g = e;
  }

  const Eigen::Index total = r + (opts.report_null_as_zero ? static_cast<Eigen::Index>(drop.size()) : 0);
  out.eigenvectors.resize(p, total);
  Eigen::Index col = 0;
  for (std::size_t i : order) {
    out.eigenvalues.push_back(mu[i]);
    out.eigenvectors.col(col++) = winv * z[i];
    out.labels.push_back({});
  }
  if (opts.report_null_as_zero) {
    for (Eigen::Index i : drop) {
      out.eigenvalues.push_back(0.0);
      RVec v = es.eigenvectors().col(i);
      normalize_sign(v);
      out.eigenvectors.col(col++) = v;
      SpectrumLabel l;
      l.null = true;
      out.labels.push_back(l);
    }
  }
  return out;
}

double contraction_ratio(const ContractionProblem& pb, const RVec& c, double null_threshold) {
  if (c.size() != pb.gram_in.rows()) throw DomainError("contraction_ratio: coefficient size mismatch");
  const RVec gc = pb.gram_in * c;
  const double nrm2 = c.dot(gc);
  Eigen::SelfAdjointEigenSolver<RMat> es(pb.gram_in, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (!(nrm2 > null_threshold * top * c.squaredNorm())) return 0.0;
  const RVec v = pb.channel.transpose() * gc;
  const double num = v.dot(detail::psd_pinv(pb.gram_out, null_threshold) * v);
  return std::sqrt(std::max(0.0, num) / nrm2);
}

void label_degrees(ContractionSpectrum& sp, const RMat& gram_in, const std::vector<int>& degrees) {
  if (degrees.empty()) return;
  if (static_cast<Eigen::Index>(degrees.size()) != gram_in.rows()) {
    throw DomainError("label_degrees: one degree per basis element required");
  }
  for (Eigen::Index c = 0; c < sp.eigenvectors.cols(); ++c) {
    const RVec v = sp.eigenvectors.col(c);
    const RVec gv = (sp.labels[static_cast<std::size_t>(c)].null ? RVec(v) : RVec(gram_in * v));
    std::map<int, double> weight;
    for (Eigen::Index i = 0; i < v.size(); ++i) weight[degrees[static_cast<std::size_t>(i)]] += v(i) * gv(i);
    int best = -1;
    double bw = -std::numeric_limits<double>::infinity();
    for (const auto& [deg, wgt] : weight) {
      if (wgt > bw + 1e-12) {
        bw = wgt;
        best = deg;
      }
    }
    sp.labels[static_cast<std::size_t>(c)].degree = best;
  }
}

ContractionProblem contraction_problem(const channels::SuperoperatorChannel& n, const GnsSpace& out_space,
                                       const GnsSpace& in_space, bool allow_singular_output) {
  const auto cm = channel_gns_matrix(n, out_space, in_space, allow_singular_output);
  return {in_space.gram_real, out_space.gram_real, cm.m};
}

ContractionSpectrum contraction_spectrum(const channels::SuperoperatorChannel& n, const GnsSpace& out_space,
                                         const GnsSpace& in_space, const SolveOptions& opts,
                                         bool allow_singular_output) {
  auto pb = contraction_problem(n, out_space, in_space, allow_singular_output);
  auto sp = solve_contraction(pb, opts);
  label_degrees(sp, in_space.gram_real, in_space.degrees);
  return sp;
}

GnsSpace sector_space(ops::QuditSystem system, const ops::DensityMatrix& site_state, int min_size, int max_size,
                      bool include_identity) {
  const auto sectors = ops::sector_bases(system, site_state, min_size, max_size);
  std::vector<ops::DenseOperator> basis;
  std::vector<int> degrees;
  if (include_identity && min_size > 0) {
    basis.push_back(ops::DenseOperator::identity(system));
    degrees.push_back(0);
  }
  for (const auto& s : sectors) {
    for (const auto& op : s.operators) {
      basis.push_back(op);
      degrees.push_back(static_cast<int>(s.support.size()));
    }
  }
  auto sp = gns_build(ops::product_power(site_state, system.n()), std::move(basis));
  sp.degrees = std::move(degrees);
  return sp;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& values) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size() && i < values.size(); ++i) {
    if (xs[i] > 0.0 && values[i] > 0.0) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(values[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

DecayReport klocal_decay_check(int n, int d, const std::vector<double>& y_grid, int k_max, int samples,
                               std::uint64_t seed) {
  if (n < 1 || n > 4) throw DomainError("klocal_decay_check: needs 1 <= n <= 4");
  if (k_max < 0 || k_max >= n) throw DomainError("klocal_decay_check: needs 0 <= k_max < n");
  if (samples < 1) throw DomainError("klocal_decay_check: needs at least one sample");
  for (double y : y_grid) {
    if (!(y >= 1.0)) throw DomainError("klocal_decay_check: every y must be >= 1");
  }
  DecayReport rep;
  rep.n = n;
  rep.d = d;
  rep.samples = samples;
  const ops::QuditSystem sys(d, n);
  const auto rho1 = ops::DensityMatrix::basis_state(d, 0);
  const auto rho = ops::product_power(rho1, n);

  for (int k = 0; k <= k_max; ++k) {
    const auto in = sector_space(sys, rho1, k + 1, n);
    std::vector<double> ys, sampled, sup;
    for (double y : y_grid) {
      const channels::DepolarizingChannel dep(y, d);
      const auto chan = channels::homogeneous_channel(dep, n);
      const auto out = sector_space(sys, channels::depolarize_apply(dep, rho1), k + 1, n);
      const bool singular = y == 1.0;
      const auto pb = contraction_problem(chan, out, in, singular);
      const auto spec = solve_contraction(pb);
      DecayRow row;
      row.k = k;
      row.y = y;
      row.sup_eta = spec.eigenvalues.empty() ? 0.0 : std::sqrt(std::max(0.0, spec.eigenvalues.front()));
      row.bound = (y > 1.0 && fock::beta_decreasing(d, y))
                      ? std::sqrt(fock::beta_bound_value({d, y, k + 1}))
                      : std::numeric_limits<double>::infinity();
      for (int s = 0; s < samples; ++s) {
        auto eng = rng::make_engine(seed, static_cast<std::uint64_t>(k) * 1000003ULL + static_cast<std::uint64_t>(s));
        std::normal_distribution<double> nd(0.0, 1.0);
        RVec c(static_cast<Eigen::Index>(in.size()));
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = nd(eng);
        double eta = 0.0;
        if (singular) {
          eta = contraction_ratio(pb, c);
        } else {
          CMat a = CMat::Zero(static_cast<Eigen::Index>(sys.dim()), static_cast<Eigen::Index>(sys.dim()));
          for (Eigen::Index i = 0; i < c.size(); ++i) a += c(i) * in.basis[static_cast<std::size_t>(i)].matrix();
          const double base = bures_norm(rho.matrix(), a);
          eta = base > 0.0 ? contracted_norm(chan, rho, a) / base : 0.0;
        }
        row.max_eta_sampled = std::max(row.max_eta_sampled, eta);
      }
      if (row.max_eta_sampled > row.bound * (1.0 + 1e-10) || row.sup_eta > row.bound * (1.0 + 1e-10)) {
        ++rep.bound_violations;
      }
      if (y > 1.0) {
        ys.push_back(y);
        sampled.push_back(row.max_eta_sampled);
        sup.push_back(row.sup_eta);
      }
      rep.rows.push_back(row);
    }
    rep.slope_sampled.push_back(loglog_slope(ys, sampled));
    rep.slope_sup.push_back(loglog_slope(ys, sup));
  }
  return rep;
}

DataProcessingReport data_processing_check(int samples, std::uint64_t seed, double tol) {
  DataProcessingReport rep;
  const std::pair<int, int> shapes[] = {{2, 1}, {3, 1}, {2, 2}, {4, 1}};
  for (int s = 0; s < samples; ++s) {
    auto eng = rng::make_engine(seed, static_cast<std::uint64_t>(s));
    const auto [d, n] = shapes[s % 4];
    const ops::QuditSystem sys(d, n);
    const auto dim = static_cast<Eigen::Index>(sys.dim());
    std::uniform_int_distribution<int> rank_dist(1, 4);
    const auto rho = rng::random_density(sys, eng, 0.05);
    const auto chan = channels::SuperoperatorChannel::from_kraus(sys, rng::random_kraus(dim, rank_dist(eng), eng));
    CMat a = rng::random_hermitian(dim, eng);
    a -= (rho.matrix() * a).trace() * CMat::Identity(dim, dim);
    a = 0.5 * (a + a.adjoint()).eval();
    const double base = bures_norm(rho.matrix(), a);
    const double ratio = contracted_norm(chan, rho, a) / base;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (ratio > 1.0 + tol) ++rep.violations;
    ++rep.samples;
  }
  return rep;
}

}  // namespace flab::geometry
