#include "flab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

namespace flab::ops {

std::size_t dense_budget() {
  constexpr std::size_t fallback = std::size_t{1} << 14;
  const char* env = std::getenv("FLAB_MAX_DIM");
  if (env == nullptr || *env == '\0') return fallback;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) return fallback;
  return static_cast<std::size_t>(v);
}

QuditSystem::QuditSystem(int d, int n) : d_(d), n_(n), dim_(1) {
  if (d < 2) throw DomainError("QuditSystem: local dimension must be >= 2");
  if (n < 1) throw DomainError("QuditSystem: number of sites must be >= 1");
  const std::size_t budget = dense_budget();
  for (int i = 0; i < n; ++i) {
    dim_ *= static_cast<std::size_t>(d);
    if (dim_ > budget) {
      throw DomainError("QuditSystem: d^n = " + std::to_string(d) + "^" + std::to_string(n) +
                        " exceeds dense budget " + std::to_string(budget) +
                        " (set FLAB_MAX_DIM to raise it)");
    }
  }
}

DenseOperator::DenseOperator(QuditSystem system, CMat entries)
    : system_(system), entries_(std::move(entries)) {
  const auto dim = static_cast<Eigen::Index>(system_.dim());
  if (entries_.rows() != dim || entries_.cols() != dim) {
    throw DomainError("DenseOperator: matrix is " + std::to_string(entries_.rows()) + "x" +
                      std::to_string(entries_.cols()) + ", expected " + std::to_string(dim));
  }
  if (!entries_.allFinite()) throw DomainError("DenseOperator: non-finite entries");
}

DenseOperator DenseOperator::identity(QuditSystem system) {
  const auto dim = static_cast<Eigen::Index>(system.dim());
  return DenseOperator(system, CMat::Identity(dim, dim));
}

DenseOperator DenseOperator::zero(QuditSystem system) {
  const auto dim = static_cast<Eigen::Index>(system.dim());
  return DenseOperator(system, CMat::Zero(dim, dim));
}

bool DenseOperator::is_hermitian(double rel_tol) const {
  const double scale = entries_.norm();
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

DenseOperator DenseOperator::adjoint() const { return DenseOperator(system_, entries_.adjoint()); }

DenseOperator& DenseOperator::operator+=(const DenseOperator& other) {
  if (!(system_ == other.system_)) throw DomainError("DenseOperator: system mismatch in +");
  entries_ += other.entries_;
  return *this;
}

DenseOperator& DenseOperator::operator-=(const DenseOperator& other) {
  if (!(system_ == other.system_)) throw DomainError("DenseOperator: system mismatch in -");
  entries_ -= other.entries_;
  return *this;
}

DenseOperator& DenseOperator::operator*=(cplx s) {
  entries_ *= s;
  return *this;
}

DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
  if (!(a.system() == b.system())) throw DomainError("DenseOperator: system mismatch in *");
  return DenseOperator(a.system(), a.matrix() * b.matrix());
}

DensityMatrix::DensityMatrix(DenseOperator op) : op_(std::move(op)) {
  if (!op_.is_hermitian()) throw DomainError("DensityMatrix: operator is not Hermitian");
  const cplx tr = op_.trace();
  if (std::abs(tr - cplx(1.0)) > 1e-12) {
    throw DomainError("DensityMatrix: trace " + std::to_string(tr.real()) + " != 1");
  }
  if (min_eigenvalue() < -1e-12) throw DomainError("DensityMatrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::pure(QuditSystem system, const CVec& ket) {
  if (ket.size() != static_cast<Eigen::Index>(system.dim())) {
    throw DomainError("DensityMatrix::pure: ket dimension mismatch");
  }
  const double nrm = ket.norm();
  if (nrm == 0.0) throw DomainError("DensityMatrix::pure: zero vector");
  CVec v = ket / nrm;
  CMat m = v * v.adjoint();
  m = (m + m.adjoint()).eval() * 0.5;
  return DensityMatrix(DenseOperator(system, m));
}

DensityMatrix DensityMatrix::basis_state(int d, int index) {
  if (index < 0 || index >= d) throw DomainError("DensityMatrix::basis_state: index out of range");
  CVec v = CVec::Zero(d);
  v(index) = 1.0;
  return pure(QuditSystem(d, 1), v);
}

DensityMatrix DensityMatrix::maximally_mixed(QuditSystem system) {
  const auto dim = static_cast<Eigen::Index>(system.dim());
  return DensityMatrix(
      DenseOperator(system, CMat::Identity(dim, dim) / static_cast<double>(system.dim())));
}

RVec DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMat> es(op_.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double DensityMatrix::min_eigenvalue() const { return eigenvalues().minCoeff(); }

bool DensityMatrix::is_pure(double tol) const {
  return std::abs((op_.matrix() * op_.matrix()).trace() - cplx(1.0)) <= tol;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

DenseOperator tensor_product(const DenseOperator& a, const DenseOperator& b) {
  if (a.system().d() != b.system().d()) {
    throw DomainError("tensor_product: local dimensions differ");
  }
  QuditSystem sys(a.system().d(), a.system().n() + b.system().n());
  return DenseOperator(sys, kron(a.matrix(), b.matrix()));
}

DensityMatrix product_power(const DensityMatrix& site_state, int n) {
  if (site_state.system().n() != 1) throw DomainError("product_power: expected a single-site state");
  QuditSystem sys(site_state.system().d(), n);
  CMat m = site_state.matrix();
  for (int i = 1; i < n; ++i) m = kron(m, site_state.matrix());
  return DensityMatrix(DenseOperator(sys, m));
}

namespace {

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

void check_site(int site, const QuditSystem& system, const char* op) {
  if (site < 0 || site >= system.n()) {
    throw DomainError(std::string(op) + ": site " + std::to_string(site) + " out of range [0, " +
                      std::to_string(system.n()) + ")");
  }
}

void check_local(const CMat& a, const QuditSystem& system, const char* op) {
  if (a.rows() != system.d() || a.cols() != system.d()) {
    throw DomainError(std::string(op) + ": single-site operator must be d x d");
  }
}

}  // namespace

CMat partial_trace_to_site(const DenseOperator& op, int site) {
  const auto& sys = op.system();
  check_site(site, sys, "partial_trace_to_site");
  const std::size_t d = static_cast<std::size_t>(sys.d());
  const std::size_t inner = ipow(d, sys.n() - 1 - site);
  const std::size_t outer = ipow(d, site);
  CMat out = CMat::Zero(sys.d(), sys.d());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
          const auto r = static_cast<Eigen::Index>((o * d + a) * inner + in);
          const auto c = static_cast<Eigen::Index>((o * d + b) * inner + in);
          out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += op.matrix()(r, c);
        }
      }
    }
  }
  return out;
}

std::optional<DensityMatrix> as_product_power(const DensityMatrix& state) {
  const auto& sys = state.system();
  CMat sigma = partial_trace_to_site(state.op(), 0);
  sigma = (sigma + sigma.adjoint()).eval() * 0.5;
  std::optional<DensityMatrix> site;
  try {
    site.emplace(DenseOperator(QuditSystem(sys.d(), 1), sigma));
  } catch (const DomainError&) {
    return std::nullopt;
  }
  if (sys.n() == 1) return site;
  CMat prod = sigma;
  for (int i = 1; i < sys.n(); ++i) prod = kron(prod, sigma);
  if ((prod - state.matrix()).cwiseAbs().maxCoeff() > 1e-10) return std::nullopt;
  return site;
}

DenseOperator embed_at_site(const CMat& a, int site, QuditSystem system) {
  check_site(site, system, "embed_at_site");
  check_local(a, system, "embed_at_site");
  const auto left = static_cast<Eigen::Index>(ipow(system.d(), site));
  const auto right = static_cast<Eigen::Index>(ipow(system.d(), system.n() - 1 - site));
  CMat m = kron(kron(CMat::Identity(left, left), a), CMat::Identity(right, right));
  return DenseOperator(system, std::move(m));
}

DenseOperator embed_sites(std::span<const std::pair<int, CMat>> factors, QuditSystem system) {
  std::vector<const CMat*> slot(static_cast<std::size_t>(system.n()), nullptr);
  for (const auto& [site, a] : factors) {
    check_site(site, system, "embed_sites");
    check_local(a, system, "embed_sites");
    if (slot[static_cast<std::size_t>(site)] != nullptr) {
      throw DomainError("embed_sites: site " + std::to_string(site) + " given twice");
    }
    slot[static_cast<std::size_t>(site)] = &a;
  }
  // Group runs of identities so the Kronecker chain stays cheap.
  CMat m = CMat::Identity(1, 1);
  Eigen::Index pending = 1;
  for (const CMat* f : slot) {
    if (f == nullptr) {
      pending *= system.d();
      continue;
    }
    if (pending > 1) m = kron(m, CMat::Identity(pending, pending));
    pending = 1;
    m = kron(m, *f);
  }
  if (pending > 1) m = kron(m, CMat::Identity(pending, pending));
  return DenseOperator(system, std::move(m));
}

bool is_permutation(const Permutation& perm) {
  std::vector<char> seen(perm.size(), 0);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= perm.size() || seen[static_cast<std::size_t>(p)]) {
      return false;
    }
    seen[static_cast<std::size_t>(p)] = 1;
  }
  return true;
}

Permutation compose(const Permutation& pi, const Permutation& sigma) {
  if (pi.size() != sigma.size()) throw DomainError("compose: size mismatch");
  Permutation out(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) out[i] = pi[static_cast<std::size_t>(sigma[i])];
  return out;
}

Permutation inverse(const Permutation& pi) {
  Permutation out(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) out[static_cast<std::size_t>(pi[i])] = static_cast<int>(i);
  return out;
}

namespace {

// index of the basis vector obtained by moving the digit at site s to site pi(s)
std::vector<std::size_t> permuted_indices(const Permutation& pi, const QuditSystem& system) {
  if (static_cast<int>(pi.size()) != system.n() || !is_permutation(pi)) {
    throw DomainError("permutation: not a permutation of the system's sites");
  }
  const int n = system.n();
  const std::size_t d = static_cast<std::size_t>(system.d());
  std::vector<std::size_t> weight(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) weight[static_cast<std::size_t>(s)] = ipow(d, n - 1 - s);
  std::vector<std::size_t> map(system.dim());
  std::vector<std::size_t> digits(static_cast<std::size_t>(n));
  for (std::size_t idx = 0; idx < system.dim(); ++idx) {
    std::size_t rem = idx;
    for (int s = n - 1; s >= 0; --s) {
      digits[static_cast<std::size_t>(s)] = rem % d;
      rem /= d;
    }
    std::size_t j = 0;
    for (int s = 0; s < n; ++s) {
      j += digits[static_cast<std::size_t>(s)] * weight[static_cast<std::size_t>(pi[static_cast<std::size_t>(s)])];
    }
    map[idx] = j;
  }
  return map;
}

}  // namespace

DenseOperator permutation_unitary(const Permutation& pi, QuditSystem system) {
  const auto map = permuted_indices(pi, system);
  const auto dim = static_cast<Eigen::Index>(system.dim());
  CMat u = CMat::Zero(dim, dim);
  for (std::size_t i = 0; i < map.size(); ++i) {
    u(static_cast<Eigen::Index>(map[i]), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return DenseOperator(system, std::move(u));
}

DenseOperator conjugate_by_permutation(const DenseOperator& a, const Permutation& pi) {
  const auto map = permuted_indices(pi, a.system());
  const auto dim = static_cast<Eigen::Index>(a.system().dim());
  CMat out(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const auto pc = static_cast<Eigen::Index>(map[static_cast<std::size_t>(c)]);
    for (Eigen::Index r = 0; r < dim; ++r) {
      out(static_cast<Eigen::Index>(map[static_cast<std::size_t>(r)]), pc) = a.matrix()(r, c);
    }
  }
  return DenseOperator(a.system(), std::move(out));
}

DenseOperator fluctuation_operator(const CMat& a, QuditSystem system,
                                   const DensityMatrix& site_state) {
  check_local(a, system, "fluctuation_operator");
  if (site_state.system().n() != 1 || site_state.system().d() != system.d()) {
    throw DomainError("fluctuation_operator: site state must be a single d-level state");
  }
  const cplx mean = (site_state.matrix() * a).trace();
  if (std::abs(mean) > 1e-12 * std::max(1.0, a.norm())) {
    throw DomainError("fluctuation_operator: tr(rho a) = " + std::to_string(std::abs(mean)) +
                      " is not zero; subtract the mean first");
  }
  DenseOperator f = DenseOperator::zero(system);
  for (int i = 0; i < system.n(); ++i) f += embed_at_site(a, i, system);
  f *= cplx(1.0 / std::sqrt(static_cast<double>(system.n())));
  return f;
}

std::vector<CMat> zero_mean_basis(const CMat& state) {
  const Eigen::Index d = state.rows();
  if (d < 2 || state.cols() != d) throw DomainError("zero_mean_basis: expected a square d x d state");

  // Eigenbasis ordered by descending eigenvalue; the computational basis is kept
  // when the state is already diagonal so the basis matches the usual Paulis.
  CMat vecs(d, d);
  const double offdiag = (state - CMat(state.diagonal().asDiagonal())).cwiseAbs().maxCoeff();
  if (offdiag <= 1e-14) {
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return state(a, a).real() > state(b, b).real() + 1e-14;
    });
    vecs.setZero();
    for (Eigen::Index c = 0; c < d; ++c) vecs(order[static_cast<std::size_t>(c)], c) = 1.0;
  } else {
    Eigen::SelfAdjointEigenSolver<CMat> es(state);
    for (Eigen::Index c = 0; c < d; ++c) vecs.col(c) = es.eigenvectors().col(d - 1 - c);
  }

  std::vector<CMat> out;
  out.reserve(static_cast<std::size_t>(d * d - 1));
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a + 1; b < d; ++b) {
      CMat ab = vecs.col(a) * vecs.col(b).adjoint();
      out.push_back(ab + ab.adjoint());
      out.push_back(cplx(0, -1) * (ab - ab.adjoint()));
    }
  }
  for (Eigen::Index l = 1; l < d; ++l) {
    CMat g = CMat::Zero(d, d);
    for (Eigen::Index m = 0; m < l; ++m) g += vecs.col(m) * vecs.col(m).adjoint();
    g -= static_cast<double>(l) * vecs.col(l) * vecs.col(l).adjoint();
    g *= std::sqrt(2.0 / static_cast<double>(l * (l + 1)));
    out.push_back(g);
  }
  const CMat id = CMat::Identity(d, d);
  for (auto& g : out) {
    g -= (state * g).trace() * id;
    g = (g + g.adjoint()).eval() * 0.5;
  }
  return out;
}

namespace {

void subsets_of_size(int n, int size, int start, std::vector<int>& cur,
                     std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == size) {
    out.push_back(cur);
    return;
  }
  for (int s = start; s < n; ++s) {
    cur.push_back(s);
    subsets_of_size(n, size, s + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<SectorBasis> sector_bases(QuditSystem system, const DensityMatrix& site_state,
                                      int min_size, int max_size) {
  if (site_state.system().n() != 1 || site_state.system().d() != system.d()) {
    throw DomainError("sector_bases: site state must be a single d-level state");
  }
  if (min_size < 0 || max_size > system.n() || min_size > max_size) {
    throw DomainError("sector_bases: sector sizes out of range");
  }
  const auto letters = zero_mean_basis(site_state.matrix());
  const int nl = static_cast<int>(letters.size());
  std::vector<SectorBasis> out;
  for (int size = min_size; size <= max_size; ++size) {
    std::vector<std::vector<int>> supports;
    std::vector<int> cur;
    subsets_of_size(system.n(), size, 0, cur, supports);
    for (const auto& support : supports) {
      SectorBasis sb{system, support, {}, site_state};
      if (size == 0) {
        sb.operators.push_back(DenseOperator::identity(system));
        out.push_back(std::move(sb));
        continue;
      }
      std::vector<int> digit(static_cast<std::size_t>(size), 0);
      while (true) {
        std::vector<std::pair<int, CMat>> factors;
        for (int i = 0; i < size; ++i) {
          factors.emplace_back(support[static_cast<std::size_t>(i)],
                               letters[static_cast<std::size_t>(digit[static_cast<std::size_t>(i)])]);
        }
        sb.operators.push_back(embed_sites(factors, system));
        int pos = size - 1;
        while (pos >= 0 && ++digit[static_cast<std::size_t>(pos)] == nl) {
          digit[static_cast<std::size_t>(pos)] = 0;
          --pos;
        }
        if (pos < 0) break;
      }
      out.push_back(std::move(sb));
    }
  }
  return out;
}

std::vector<SectorBasis> klocal_basis_for_site_state(int k, QuditSystem system,
                                                     const DensityMatrix& site_state) {
  if (k < 0 || k > system.n()) throw DomainError("klocal_basis: need 0 <= k <= n");
  return sector_bases(system, site_state, 0, k);
}

std::vector<SectorBasis> klocal_basis(int k, QuditSystem system, const DensityMatrix& state) {
  if (!(state.system() == system)) throw DomainError("klocal_basis: state/system mismatch");
  auto site = as_product_power(state);
  if (!site) {
    throw DomainError("klocal_basis: state is not a product state rho^{(x)n}; zero-mean "
                      "factorization is undefined");
  }
  return klocal_basis_for_site_state(k, system, *site);
}

DenseOperator symmetric_word_operator(const SymmetricWord& word, QuditSystem system,
                                      const std::vector<CMat>& letters) {
  const int j = word.degree();
  if (j == 0) return DenseOperator::identity(system);
  if (j > system.n()) return DenseOperator::zero(system);
  for (int l : word.letters()) {
    if (l >= static_cast<int>(letters.size())) throw DomainError("symmetric_word_operator: letter out of range");
  }
  DenseOperator acc = DenseOperator::zero(system);
  // enumerate ordered tuples of distinct sites
  std::vector<int> sites(static_cast<std::size_t>(j), 0);
  std::vector<char> used(static_cast<std::size_t>(system.n()), 0);
  std::vector<std::pair<int, CMat>> factors(static_cast<std::size_t>(j));
  auto rec = [&](auto&& self, int pos) -> void {
    if (pos == j) {
      for (int i = 0; i < j; ++i) {
        factors[static_cast<std::size_t>(i)] = {sites[static_cast<std::size_t>(i)],
                                                letters[static_cast<std::size_t>(word.letters()[static_cast<std::size_t>(i)])]};
      }
      acc += embed_sites(factors, system);
      return;
    }
    for (int s = 0; s < system.n(); ++s) {
      if (used[static_cast<std::size_t>(s)]) continue;
      used[static_cast<std::size_t>(s)] = 1;
      sites[static_cast<std::size_t>(pos)] = s;
      self(self, pos + 1);
      used[static_cast<std::size_t>(s)] = 0;
    }
  };
  rec(rec, 0);
  acc *= cplx(std::pow(static_cast<double>(system.n()), -0.5 * j));
  return acc;
}

std::vector<std::size_t> independent_subset(std::span<const DenseOperator> ops, double threshold) {
  std::vector<CVec> ortho;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const CMat& m = ops[i].matrix();
    CVec v = Eigen::Map<const CVec>(m.data(), m.size());
    const double nrm2 = v.squaredNorm();
    if (nrm2 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : ortho) v -= q.dot(v) * q;
    }
    const double res2 = v.squaredNorm();
    if (res2 > threshold * nrm2) {
      ortho.push_back(v / std::sqrt(res2));
      kept.push_back(i);
    }
  }
  return kept;
}

SymmetricBasis symmetric_klocal_basis_from_letters(int k, QuditSystem system,
                                                   const std::vector<CMat>& letters) {
  if (k < 0 || k > system.n()) throw DomainError("symmetric_klocal_basis: need 0 <= k <= n");
  const auto words = words_up_to_degree(static_cast<int>(letters.size()), k);
  std::vector<DenseOperator> ops;
  ops.reserve(words.size());
  for (const auto& w : words) ops.push_back(symmetric_word_operator(w, system, letters));
  const auto keep = independent_subset(ops);
  SymmetricBasis out;
  for (std::size_t i : keep) {
    out.operators.push_back(ops[i]);
    out.words.push_back(words[i]);
  }
  return out;
}

SymmetricBasis symmetric_klocal_basis(int k, QuditSystem system, const DensityMatrix& state) {
  if (!(state.system() == system)) throw DomainError("symmetric_klocal_basis: state/system mismatch");
  auto site = as_product_power(state);
  if (!site) throw DomainError("symmetric_klocal_basis: state is not a product state");
  return symmetric_klocal_basis_from_letters(k, system, zero_mean_basis(site->matrix()));
}

}  // namespace flab::ops
