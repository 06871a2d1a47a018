#include "flab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>

namespace flab::fock {

using geometry::ContractionProblem;
using geometry::ContractionSpectrum;

SingleParticleSpace::SingleParticleSpace(ops::DensityMatrix state, std::vector<CMat> basis)
    : state_(std::move(state)), basis_(std::move(basis)) {
  const int d = state_.system().d();
  if (state_.system().n() != 1) throw DomainError("SingleParticleSpace: expected a single-site state");
  const auto n = static_cast<Eigen::Index>(basis_.size());
  k_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const CMat& f = basis_[static_cast<std::size_t>(i)];
    if (f.rows() != d || f.cols() != d) throw DomainError("SingleParticleSpace: basis element is not d x d");
    if ((f - f.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, f.norm())) {
      throw DomainError("SingleParticleSpace: basis element " + std::to_string(i) + " is not Hermitian");
    }
    if (std::abs((state_.matrix() * f).trace()) > 1e-12 * std::max(1.0, f.norm())) {
      throw DomainError("SingleParticleSpace: basis element " + std::to_string(i) + " has non-zero mean");
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k_(i, j) = (state_.matrix() * basis_[static_cast<std::size_t>(i)] * basis_[static_cast<std::size_t>(j)]).trace();
    }
  }
  k_ = 0.5 * (k_ + k_.adjoint()).eval();
}

SingleParticleSpace SingleParticleSpace::from_state(const ops::DensityMatrix& site_state) {
  return SingleParticleSpace(site_state, ops::zero_mean_basis(site_state.matrix()));
}

SingleParticleSpace SingleParticleSpace::custom(const ops::DensityMatrix& site_state, std::vector<CMat> basis) {
  return SingleParticleSpace(site_state, std::move(basis));
}

RMat reduce_null(const SingleParticleSpace& sp, double threshold) {
  const RMat g = sp.gram_real();
  const Eigen::Index n = g.rows();
  if (n == 0) return RMat(0, 0);
  const double top = g.diagonal().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (g(i, i) > threshold * top) keep.push_back(i);
  }
  RMat r = RMat::Zero(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) r(keep[c], static_cast<Eigen::Index>(c)) = 1.0;
  const RMat gr = r.transpose() * g * r;
  Eigen::SelfAdjointEigenSolver<RMat> es(gr);
  const double gtop = es.eigenvalues().size() ? es.eigenvalues().maxCoeff() : 0.0;
  if (es.eigenvalues().size() == 0 || es.eigenvalues().minCoeff() > threshold * gtop) return r;
  std::vector<Eigen::Index> range;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > threshold * gtop) range.push_back(i);
  }
  RMat out(n, static_cast<Eigen::Index>(range.size()));
  for (std::size_t c = 0; c < range.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = r * es.eigenvectors().col(range[c]);
  return out;
}

namespace {

CMat expand_images(const std::vector<CMat>& images, const SingleParticleSpace& in) {
  const int d = in.d();
  const auto nb = static_cast<Eigen::Index>(in.basis().size());
  CMat x(static_cast<Eigen::Index>(d) * d, nb);
  for (Eigen::Index b = 0; b < nb; ++b) {
    x.col(b) = Eigen::Map<const CVec>(in.basis()[static_cast<std::size_t>(b)].data(), d * d);
  }
  Eigen::CompleteOrthogonalDecomposition<CMat> solver(x);
  CMat m(nb, static_cast<Eigen::Index>(images.size()));
  for (std::size_t a = 0; a < images.size(); ++a) {
    const CVec v = Eigen::Map<const CVec>(images[a].data(), d * d);
    m.col(static_cast<Eigen::Index>(a)) = solver.solve(v);
  }
  return m;
}

}  // namespace

CMat single_particle_map(const channels::DepolarizingChannel& ch, const SingleParticleSpace& out,
                         const SingleParticleSpace& in) {
  if (ch.d() != in.d() || ch.d() != out.d()) throw DomainError("single_particle_map: dimension mismatch");
  std::vector<CMat> images;
  for (const auto& f : out.basis()) images.push_back(ch.apply(f));
  return expand_images(images, in);
}

CMat single_particle_map(const channels::SuperoperatorChannel& site_channel, const SingleParticleSpace& out,
                         const SingleParticleSpace& in) {
  if (site_channel.system().n() != 1 || site_channel.system().d() != in.d() || out.d() != in.d()) {
    throw DomainError("single_particle_map: expected a single-site channel of matching dimension");
  }
  std::vector<CMat> images;
  for (const auto& f : out.basis()) images.push_back(site_channel.adjoint_apply(f));
  return expand_images(images, in);
}

double finite_n_factor(int n, int j) {
  if (j < 0 || n < j) return 0.0;
  double c = 1.0;
  for (int i = 0; i < j; ++i) c *= static_cast<double>(n - i) / static_cast<double>(n);
  return c;
}

namespace {

void check_letters(const CMat& kernel, const SymmetricWord& w) {
  for (int l : w.letters()) {
    if (l >= kernel.rows()) throw DomainError("word letter " + std::to_string(l) + " outside the single-particle basis");
  }
}

// Coefficient of s_1..s_j t_1..t_j in X^j with X = sum_il s_i t_l K(u_i, v_l),
// accumulated over subsets of the t variables already used.
cplx multilinear_power_coefficient(const CMat& kernel, const std::vector<int>& u, const std::vector<int>& v) {
  const std::size_t j = u.size();
  std::vector<cplx> dp(std::size_t{1} << j, cplx(0.0));
  dp[0] = 1.0;
  for (std::size_t mask = 0; mask < dp.size(); ++mask) {
    if (dp[mask] == cplx(0.0)) continue;
    const auto i = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (i >= j) continue;
    for (std::size_t l = 0; l < j; ++l) {
      if (mask & (std::size_t{1} << l)) continue;
      dp[mask | (std::size_t{1} << l)] += dp[mask] * kernel(u[i], v[l]);
    }
  }
  // dp counts each matching once with s variables taken in a fixed order; the
  // power X^j orders its j factors in j! ways.
  double fact = 1.0;
  for (std::size_t i = 2; i <= j; ++i) fact *= static_cast<double>(i);
  return fact * dp.back();
}

}  // namespace

cplx finite_n_inner(const CMat& kernel, const SymmetricWord& u, const SymmetricWord& v, int n) {
  check_letters(kernel, u);
  check_letters(kernel, v);
  if (n < 1) throw DomainError("finite_n_inner: needs n >= 1");
  if (u.degree() > n || v.degree() > n) throw DomainError("finite_n_inner: word degree exceeds n");
  if (u.degree() != v.degree()) return cplx(0.0);
  const int j = u.degree();
  if (j == 0) return cplx(1.0);
  if (j > 16) throw DomainError("finite_n_inner: degree too large for the symbolic expansion");
  // (1 - X/n)^n contributes C(n, j) (-1/n)^j X^j at multilinear order j; the
  // (-1)^j sign convention cancels the alternating sign.
  double binom = 1.0;
  for (int i = 0; i < j; ++i) binom = binom * static_cast<double>(n - i) / static_cast<double>(i + 1);
  const double scale = binom * std::pow(static_cast<double>(n), -j);
  return scale * multilinear_power_coefficient(kernel, u.letters(), v.letters());
}

cplx finite_n_inner(const CMat& kernel, const WordCombination& u, const WordCombination& v, int n) {
  cplx acc(0.0);
  for (const auto& [cu, wu] : u) {
    for (const auto& [cv, wv] : v) acc += std::conj(cu) * cv * finite_n_inner(kernel, wu, wv, n);
  }
  return acc;
}

cplx limiting_inner(const CMat& kernel, const SymmetricWord& u, const SymmetricWord& v) {
  check_letters(kernel, u);
  check_letters(kernel, v);
  if (u.degree() != v.degree()) return cplx(0.0);
  if (u.degree() == 0) return cplx(1.0);
  if (u.degree() > 8) throw DomainError("limiting_inner: permanent enumeration limited to degree 8");
  return permanent(kernel, u.letters(), v.letters());
}

cplx limiting_inner(const CMat& kernel, const WordCombination& u, const WordCombination& v) {
  cplx acc(0.0);
  for (const auto& [cu, wu] : u) {
    for (const auto& [cv, wv] : v) acc += std::conj(cu) * cv * limiting_inner(kernel, wu, wv);
  }
  return acc;
}

CltReport clt_convergence(const CMat& kernel, const WordCombination& u, const WordCombination& v,
                          const std::vector<int>& n_list) {
  CltReport rep;
  const cplx lim = limiting_inner(kernel, u, v);
  std::vector<double> ns, devs;
  for (int n : n_list) {
    CltRow row;
    row.n = n;
    row.finite = finite_n_inner(kernel, u, v, n);
    row.limit = lim;
    row.deviation = std::abs(row.finite - lim);
    if (!rep.rows.empty() && row.deviation > rep.rows.back().deviation * (1.0 + 1e-12) + 1e-15) rep.monotone = false;
    if (row.deviation > 1e-12) rep.all_zero = false;
    ns.push_back(n);
    devs.push_back(row.deviation);
    rep.rows.push_back(row);
  }
  rep.rate = rep.all_zero ? std::numeric_limits<double>::quiet_NaN() : geometry::loglog_slope(ns, devs);
  return rep;
}

namespace {

RMat real_channel(const CMat& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (m.size() > 0 && m.imag().cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("fock block: channel matrix is complex in this basis; choose bases in which it is real");
  }
  return m.real();
}

std::vector<std::vector<int>> ordered_tuples(int r, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> t(static_cast<std::size_t>(k), 0);
  if (r == 0) return k == 0 ? std::vector<std::vector<int>>{{}} : out;
  while (true) {
    out.push_back(t);
    int pos = k - 1;
    while (pos >= 0 && ++t[static_cast<std::size_t>(pos)] == r) {
      t[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

CMat kron_power(const CMat& a, int k) {
  CMat out = CMat::Identity(1, 1);
  for (int i = 0; i < k; ++i) out = ops::kron(out, a);
  return out;
}

}  // namespace

RMat word_channel_matrix(const RMat& m, const std::vector<SymmetricWord>& out_words,
                         const std::vector<SymmetricWord>& in_words) {
  std::map<SymmetricWord, Eigen::Index> in_index;
  for (std::size_t i = 0; i < in_words.size(); ++i) in_index[in_words[i]] = static_cast<Eigen::Index>(i);
  RMat out = RMat::Zero(static_cast<Eigen::Index>(in_words.size()), static_cast<Eigen::Index>(out_words.size()));
  for (std::size_t a = 0; a < out_words.size(); ++a) {
    const auto& letters = out_words[a].letters();
    const int j = static_cast<int>(letters.size());
    for (const auto& seq : ordered_tuples(static_cast<int>(m.rows()), j)) {
      double coef = 1.0;
      for (int l = 0; l < j && coef != 0.0; ++l) coef *= m(seq[static_cast<std::size_t>(l)], letters[static_cast<std::size_t>(l)]);
      if (coef == 0.0) continue;
      auto it = in_index.find(SymmetricWord(seq));
      if (it == in_index.end()) throw DomainError("word_channel_matrix: image word missing from the input words");
      out(it->second, static_cast<Eigen::Index>(a)) += coef;
    }
  }
  return out;
}

FockBlock fock_block(const SingleParticleSpace& out, const SingleParticleSpace& in, const CMat& m, int k,
                     TensorSector sector) {
  if (k < 0 || k > max_degree) throw DomainError("fock_block: degree must lie in [0, 4]");
  if (m.rows() != in.size() || m.cols() != out.size()) throw DomainError("fock_block: channel matrix shape mismatch");
  const RMat mr = real_channel(m);
  const RMat r_in = reduce_null(in);
  const RMat r_out = reduce_null(out);
  const RMat g_in = in.gram_real();
  const RMat gr = r_in.transpose() * g_in * r_in;
  // GNS projection of the images onto the reduced input basis
  const RMat proj = gr.ldlt().solve(r_in.transpose() * g_in);
  const RMat mt = proj * mr * r_out;
  const CMat kin = r_in.cast<cplx>().transpose() * in.kernel() * r_in.cast<cplx>();
  const CMat kout = r_out.cast<cplx>().transpose() * out.kernel() * r_out.cast<cplx>();

  FockBlock blk;
  blk.k = k;
  blk.sector = sector;
  const int rin = static_cast<int>(r_in.cols());
  const int rout = static_cast<int>(r_out.cols());
  if (sector == TensorSector::ordered) {
    blk.tuples = ordered_tuples(rin, k);
    blk.gram_in = kron_power(kin, k).real();
    blk.gram_out = kron_power(kout, k).real();
    blk.channel = kron_power(mt.cast<cplx>(), k).real();
    return blk;
  }
  const auto in_words = words_of_degree(std::max(rin, 1), k);
  const auto out_words = words_of_degree(std::max(rout, 1), k);
  auto gram = [](const CMat& kern, const std::vector<SymmetricWord>& ws) {
    RMat g(static_cast<Eigen::Index>(ws.size()), static_cast<Eigen::Index>(ws.size()));
    for (std::size_t a = 0; a < ws.size(); ++a) {
      for (std::size_t b = 0; b < ws.size(); ++b) {
        g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = limiting_inner(kern, ws[a], ws[b]).real();
      }
    }
    return g;
  };
  for (const auto& w : in_words) blk.tuples.push_back(w.letters());
  blk.gram_in = gram(kin, in_words);
  blk.gram_out = gram(kout, out_words);
  blk.channel = word_channel_matrix(mt, out_words, in_words);
  return blk;
}

namespace {

// Row echelon form with unit pivots; rows are the returned canonical vectors.
RMat rref(RMat a, double tol = 1e-9) {
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < a.cols() && row < a.rows(); ++col) {
    Eigen::Index piv = row;
    for (Eigen::Index r = row + 1; r < a.rows(); ++r) {
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    }
    if (std::abs(a(piv, col)) <= tol) continue;
    a.row(row).swap(a.row(piv));
    a.row(row) /= a(row, col);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      if (r != row) a.row(r) -= a(r, col) * a.row(row);
    }
    ++row;
  }
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (std::abs(a(r, c)) <= tol) a(r, c) = 0.0;
    }
  }
  return a;
}

std::string format_coefficient(double c, bool first) {
  std::ostringstream os;
  const double a = std::abs(c);
  if (first) {
    if (c < 0) os << '-';
  } else {
    os << (c < 0 ? " - " : " + ");
  }
  if (std::abs(a - 1.0) > 1e-9) os << a << ' ';
  return os.str();
}

std::string polynomial(const RVec& coef, const std::vector<std::vector<int>>& tuples,
                       const std::vector<std::string>& names) {
  std::ostringstream os;
  bool first = true;
  for (Eigen::Index i = 0; i < coef.size(); ++i) {
    if (std::abs(coef(i)) <= 1e-9) continue;
    os << format_coefficient(coef(i), first);
    first = false;
    const auto& t = tuples[static_cast<std::size_t>(i)];
    if (t.empty()) os << '1';
    for (std::size_t l = 0; l < t.size(); ++l) {
      const bool generic = names.empty();
      if (generic && l > 0) os << '*';
      os << (generic ? "f" + std::to_string(t[l]) : names[static_cast<std::size_t>(t[l])]);
    }
  }
  return first ? "0" : os.str();
}

}  // namespace

ContractionSpectrum fock_block_spectrum(const SingleParticleSpace& out, const SingleParticleSpace& in,
                                        const CMat& m, int k, TensorSector sector) {
  const FockBlock blk = fock_block(out, in, m, k, sector);
  geometry::SolveOptions opts;
  opts.report_null_as_zero = true;
  ContractionSpectrum sp = geometry::solve_contraction({blk.gram_in, blk.gram_out, blk.channel}, opts);

  // x, p names only where they are canonical: a pure qubit whose reduced basis
  // is the first two letters.
  std::vector<std::string> names;
  const RMat r_in = reduce_null(in);
  if (in.d() == 2 && in.state().is_pure() && r_in.cols() == 2 && r_in.rows() >= 2 &&
      (r_in.topRows(2) - RMat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0) {
    names = {"x", "p"};
  }

  const std::size_t total = sp.eigenvalues.size();
  for (std::size_t g = 0; g < total;) {
    std::size_t e = g + 1;
    auto same = [&](std::size_t a, std::size_t b) {
      return sp.labels[a].null == sp.labels[b].null &&
             std::abs(sp.eigenvalues[a] - sp.eigenvalues[b]) <= 1e-9 * std::max(1.0, std::abs(sp.eigenvalues[a]));
    };
    while (e < total && same(g, e)) ++e;
    const auto cnt = static_cast<Eigen::Index>(e - g);
    const RMat block = sp.eigenvectors.middleCols(static_cast<Eigen::Index>(g), cnt);
    const RMat canon = rref(block.transpose()).transpose();
    const bool null = sp.labels[g].null;
    RMat ortho = canon;
    if (!null) {
      for (Eigen::Index c = 0; c < cnt; ++c) {
        for (Eigen::Index p = 0; p < c; ++p) ortho.col(c) -= ortho.col(p).dot(blk.gram_in * ortho.col(c)) * ortho.col(p);
        const double nrm = std::sqrt(std::max(0.0, ortho.col(c).dot(blk.gram_in * ortho.col(c))));
        if (nrm > 0.0) ortho.col(c) /= nrm;
      }
    }
    sp.eigenvectors.middleCols(static_cast<Eigen::Index>(g), cnt) = ortho;
    for (Eigen::Index c = 0; c < cnt; ++c) {
      auto& lab = sp.labels[g + static_cast<std::size_t>(c)];
      lab.degree = k;
      lab.symmetry = sector == TensorSector::ordered ? "ordered" : "symmetric";
      lab.polynomial = polynomial(canon.col(c), blk.tuples, names);
    }
    g = e;
  }
  return sp;
}

SymmetricSectorProblem symmetric_sector_problem(const SingleParticleSpace& out, const SingleParticleSpace& in,
                                                const CMat& m, int degree, int n) {
  if (degree < 0 || degree > max_degree) throw DomainError("symmetric_sector_problem: degree must lie in [0, 4]");
  if (n < 0) throw DomainError("symmetric_sector_problem: n must be >= 0 (0 selects the limit)");
  if (n > 0 && degree > n) throw DomainError("symmetric_sector_problem: degree exceeds n");
  const RMat mr = real_channel(m);
  SymmetricSectorProblem sp;
  sp.in_words = words_of_degree(in.size(), degree);
  sp.out_words = words_of_degree(out.size(), degree);
  auto gram = [&](const CMat& kern, const std::vector<SymmetricWord>& ws) {
    RMat g(static_cast<Eigen::Index>(ws.size()), static_cast<Eigen::Index>(ws.size()));
    for (std::size_t a = 0; a < ws.size(); ++a) {
      for (std::size_t b = 0; b < ws.size(); ++b) {
        const cplx v = n == 0 ? limiting_inner(kern, ws[a], ws[b]) : finite_n_inner(kern, ws[a], ws[b], n);
        g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v.real();
      }
    }
    return g;
  };
  sp.problem.gram_in = gram(in.kernel(), sp.in_words);
  sp.problem.gram_out = gram(out.kernel(), sp.out_words);
  sp.problem.channel = word_channel_matrix(mr, sp.out_words, sp.in_words);
  return sp;
}

}  // namespace flab::fock
