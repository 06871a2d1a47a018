#include "flab/channels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "flab/random.hpp"

namespace flab::channels {

using ops::DenseOperator;
using ops::DensityMatrix;
using ops::QuditSystem;

DepolarizingChannel::DepolarizingChannel(double y, int d) : y_(y), d_(d) {
  if (!(y >= 1.0) || !std::isfinite(y)) {
    throw DomainError("DepolarizingChannel: resolution y must be finite and >= 1");
  }
  if (d < 2) throw DomainError("DepolarizingChannel: local dimension must be >= 2");
}

CMat DepolarizingChannel::apply(const CMat& a) const {
  if (a.rows() != d_ || a.cols() != d_) throw DomainError("DepolarizingChannel: dimension mismatch");
  CMat out = a / y_;
  out.diagonal().array() += (1.0 - 1.0 / y_) * a.trace() / static_cast<double>(d_);
  return out;
}

CMat DepolarizingChannel::transfer_matrix() const {
  const Eigen::Index d2 = static_cast<Eigen::Index>(d_) * d_;
  CMat t = CMat::Identity(d2, d2) / y_;
  CVec vid = CVec::Zero(d2);
  for (Eigen::Index i = 0; i < d_; ++i) vid(i + i * d_) = 1.0;
  t += ((1.0 - 1.0 / y_) / d_) * vid * vid.transpose();
  return t;
}

DensityMatrix depolarize_apply(const DepolarizingChannel& ch, const DensityMatrix& rho) {
  if (rho.system().n() != 1 || rho.system().d() != ch.d()) {
    throw DomainError("depolarize_apply: state must be a single site of dimension d");
  }
  CMat out = ch.apply(rho.matrix());
  out = (out + out.adjoint()).eval() * 0.5;
  return DensityMatrix(DenseOperator(rho.system(), out));
}

struct SuperoperatorChannel::Impl {
  explicit Impl(std::string l) : label(std::move(l)) {}
  virtual ~Impl() = default;
  virtual CMat apply(const CMat& a) const = 0;
  virtual CMat adjoint(const CMat& a) const = 0;
  virtual bool identity() const { return false; }
  std::string label;
};

namespace {

using Impl = SuperoperatorChannel::Impl;

struct IdentityImpl final : Impl {
  IdentityImpl() : Impl("identity") {}
  CMat apply(const CMat& a) const override { return a; }
  CMat adjoint(const CMat& a) const override { return a; }
  bool identity() const override { return true; }
};

struct KrausImpl final : Impl {
  explicit KrausImpl(std::vector<CMat> k) : Impl("kraus"), kraus(std::move(k)) {}
  CMat apply(const CMat& a) const override {
    CMat out = CMat::Zero(a.rows(), a.cols());
    for (const auto& k : kraus) out.noalias() += k * a * k.adjoint();
    return out;
  }
  CMat adjoint(const CMat& a) const override {
    CMat out = CMat::Zero(a.rows(), a.cols());
    for (const auto& k : kraus) out.noalias() += k.adjoint() * a * k;
    return out;
  }
  std::vector<CMat> kraus;
};

struct SuperopImpl final : Impl {
  explicit SuperopImpl(CMat s) : Impl("superoperator"), superop(std::move(s)) {}
  static CMat act(const CMat& s, const CMat& a) {
    CVec v = Eigen::Map<const CVec>(a.data(), a.size());
    CVec w = s * v;
    return Eigen::Map<const CMat>(w.data(), a.rows(), a.cols());
  }
  CMat apply(const CMat& a) const override { return act(superop, a); }
  CMat adjoint(const CMat& a) const override { return act(superop.adjoint(), a); }
  CMat superop;
};

// Applies a d^2 x d^2 transfer matrix to every site of a d^n x d^n matrix.
CMat apply_site_product(const CMat& t, const CMat& a, int d, int n) {
  CMat cur = a;
  const Eigen::Index dim = a.rows();
  std::vector<cplx> in(static_cast<std::size_t>(d) * d), out(in.size());
  for (int s = 0; s < n; ++s) {
    Eigen::Index stride = 1;
    for (int i = s + 1; i < n; ++i) stride *= d;
    for (Eigen::Index c0 = 0; c0 < dim; ++c0) {
      if ((c0 / stride) % d != 0) continue;
      for (Eigen::Index r0 = 0; r0 < dim; ++r0) {
        if ((r0 / stride) % d != 0) continue;
        for (int b = 0; b < d; ++b) {
          for (int r = 0; r < d; ++r) in[static_cast<std::size_t>(r + b * d)] = cur(r0 + r * stride, c0 + b * stride);
        }
        for (int i = 0; i < d * d; ++i) {
          cplx acc(0.0);
          for (int j = 0; j < d * d; ++j) acc += t(i, j) * in[static_cast<std::size_t>(j)];
          out[static_cast<std::size_t>(i)] = acc;
        }
        for (int b = 0; b < d; ++b) {
          for (int r = 0; r < d; ++r) cur(r0 + r * stride, c0 + b * stride) = out[static_cast<std::size_t>(r + b * d)];
        }
      }
    }
  }
  return cur;
}

struct SiteProductImpl final : Impl {
  SiteProductImpl(CMat t, int d_, int n_, std::string l)
      : Impl(std::move(l)), transfer(std::move(t)), transfer_adj(transfer.adjoint()), d(d_), n(n_) {}
  CMat apply(const CMat& a) const override { return apply_site_product(transfer, a, d, n); }
  CMat adjoint(const CMat& a) const override { return apply_site_product(transfer_adj, a, d, n); }
  bool identity() const override {
    return (transfer - CMat::Identity(transfer.rows(), transfer.cols())).cwiseAbs().maxCoeff() == 0.0;
  }
  CMat transfer;
  CMat transfer_adj;
  int d;
  int n;
};

struct PermImpl final : Impl {
  explicit PermImpl(PermutationAverage p) : Impl("permutation-average"), avg(std::move(p)) {}
  CMat apply(const CMat& a) const override { return avg.apply(a); }
  CMat adjoint(const CMat& a) const override { return avg.apply(a); }
  PermutationAverage avg;
};

struct ComposeImpl final : Impl {
  ComposeImpl(std::shared_ptr<const Impl> o, std::shared_ptr<const Impl> i)
      : Impl(o->label + " o " + i->label), outer(std::move(o)), inner(std::move(i)) {}
  CMat apply(const CMat& a) const override { return outer->apply(inner->apply(a)); }
  CMat adjoint(const CMat& a) const override { return inner->adjoint(outer->adjoint(a)); }
  bool identity() const override { return outer->identity() && inner->identity(); }
  std::shared_ptr<const Impl> outer;
  std::shared_ptr<const Impl> inner;
};

void check_shape(const QuditSystem& sys, const CMat& a, const char* op) {
  const auto dim = static_cast<Eigen::Index>(sys.dim());
  if (a.rows() != dim || a.cols() != dim) {
    throw DomainError(std::string(op) + ": operator dimension does not match the channel");
  }
}

}  // namespace

SuperoperatorChannel::SuperoperatorChannel(QuditSystem system, std::shared_ptr<const Impl> impl)
    : system_(system), impl_(std::move(impl)) {}

SuperoperatorChannel SuperoperatorChannel::identity(QuditSystem system) {
  return SuperoperatorChannel(system, std::make_shared<IdentityImpl>());
}

SuperoperatorChannel SuperoperatorChannel::from_kraus(QuditSystem system, std::vector<CMat> kraus) {
  if (kraus.empty()) throw DomainError("from_kraus: empty Kraus set");
  const auto dim = static_cast<Eigen::Index>(system.dim());
  CMat sum = CMat::Zero(dim, dim);
  for (const auto& k : kraus) {
    if (k.rows() != dim || k.cols() != dim) throw DomainError("from_kraus: Kraus operator has wrong shape");
    sum += k.adjoint() * k;
  }
  const double defect = (sum - CMat::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (defect > 1e-10) {
    throw DomainError("from_kraus: not trace preserving, |sum K^dagger K - 1| = " + std::to_string(defect));
  }
  return SuperoperatorChannel(system, std::make_shared<KrausImpl>(std::move(kraus)));
}

SuperoperatorChannel SuperoperatorChannel::from_superoperator(QuditSystem system, CMat superop,
                                                              bool check_cp) {
  const auto dim2 = static_cast<Eigen::Index>(system.dim() * system.dim());
  if (superop.rows() != dim2 || superop.cols() != dim2) {
    throw DomainError("from_superoperator: matrix must be dim^2 x dim^2");
  }
  SuperoperatorChannel ch(system, std::make_shared<SuperopImpl>(std::move(superop)));
  const double defect = ch.trace_preservation_defect();
  if (defect > 1e-10) {
    throw DomainError("from_superoperator: not trace preserving (defect " + std::to_string(defect) + ")");
  }
  if (check_cp) {
    const double lmin = ch.choi_min_eigenvalue();
    if (lmin < -1e-10) {
      throw DomainError("from_superoperator: not completely positive (Choi eigenvalue " +
                        std::to_string(lmin) + ")");
    }
  }
  return ch;
}

SuperoperatorChannel SuperoperatorChannel::site_product(QuditSystem system, CMat transfer,
                                                        std::string label) {
  const Eigen::Index d2 = static_cast<Eigen::Index>(system.d()) * system.d();
  if (transfer.rows() != d2 || transfer.cols() != d2) {
    throw DomainError("site_product: transfer matrix must be d^2 x d^2");
  }
  return SuperoperatorChannel(system, std::make_shared<SiteProductImpl>(std::move(transfer), system.d(),
                                                                        system.n(), std::move(label)));
}

const std::string& SuperoperatorChannel::label() const { return impl_->label; }

CMat SuperoperatorChannel::apply(const CMat& a) const {
  check_shape(system_, a, "channel apply");
  return impl_->apply(a);
}

CMat SuperoperatorChannel::adjoint_apply(const CMat& a) const {
  check_shape(system_, a, "channel adjoint_apply");
  return impl_->adjoint(a);
}

DenseOperator SuperoperatorChannel::apply(const DenseOperator& a) const {
  return DenseOperator(a.system(), apply(a.matrix()));
}

DenseOperator SuperoperatorChannel::adjoint_apply(const DenseOperator& a) const {
  return DenseOperator(a.system(), adjoint_apply(a.matrix()));
}

DensityMatrix SuperoperatorChannel::apply(const DensityMatrix& rho) const {
  CMat out = apply(rho.matrix());
  out = (out + out.adjoint()).eval() * 0.5;
  return DensityMatrix(DenseOperator(rho.system(), out));
}

bool SuperoperatorChannel::is_identity() const { return impl_->identity(); }

CMat SuperoperatorChannel::superoperator_matrix() const {
  const auto dim = static_cast<Eigen::Index>(system_.dim());
  CMat s(dim * dim, dim * dim);
  CMat e = CMat::Zero(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      e(r, c) = 1.0;
      CMat img = impl_->apply(e);
      s.col(r + c * dim) = Eigen::Map<const CVec>(img.data(), img.size());
      e(r, c) = 0.0;
    }
  }
  return s;
}

CMat SuperoperatorChannel::choi_matrix() const {
  const auto dim = static_cast<Eigen::Index>(system_.dim());
  CMat choi = CMat::Zero(dim * dim, dim * dim);
  CMat e = CMat::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      e(i, j) = 1.0;
      choi.block(i * dim, j * dim, dim, dim) = impl_->apply(e);
      e(i, j) = 0.0;
    }
  }
  return choi;
}

double SuperoperatorChannel::choi_min_eigenvalue() const {
  CMat c = choi_matrix();
  c = (c + c.adjoint()).eval() * 0.5;
  Eigen::SelfAdjointEigenSolver<CMat> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double SuperoperatorChannel::trace_preservation_defect() const {
  const auto dim = static_cast<Eigen::Index>(system_.dim());
  const CMat id = CMat::Identity(dim, dim);
  return (impl_->adjoint(id) - id).cwiseAbs().maxCoeff();
}

SuperoperatorChannel compose(const SuperoperatorChannel& outer, const SuperoperatorChannel& inner) {
  if (!(outer.system() == inner.system())) throw DomainError("compose: channels act on different systems");
  return SuperoperatorChannel(outer.system(), std::make_shared<ComposeImpl>(outer.impl_, inner.impl_));
}

SuperoperatorChannel product_channel(const DepolarizingChannel& ch, int n) {
  QuditSystem sys(ch.d(), n);
  return SuperoperatorChannel::site_product(sys, ch.transfer_matrix(), "depolarizing^n");
}

SuperoperatorChannel product_channel(const SuperoperatorChannel& site, int n) {
  if (site.system().n() != 1) throw DomainError("product_channel: expected a single-site channel");
  if (n == 1) return site;
  QuditSystem sys(site.system().d(), n);
  return SuperoperatorChannel::site_product(sys, site.superoperator_matrix(), site.label() + "^n");
}

PermutationAverage::PermutationAverage(QuditSystem system)
    : PermutationAverage(system, system.n() <= 6 ? Mode::exact_sum : Mode::symmetric_projector) {}

PermutationAverage::PermutationAverage(QuditSystem system, Mode mode) : system_(system), mode_(mode) {
  if (mode_ == Mode::exact_sum && system_.n() > 6) {
    throw DomainError("PermutationAverage: exact_sum mode requires n <= 6");
  }
}

namespace {

CMat exact_average(const QuditSystem& sys, const CMat& a) {
  ops::Permutation pi(static_cast<std::size_t>(sys.n()));
  std::iota(pi.begin(), pi.end(), 0);
  CMat acc = CMat::Zero(a.rows(), a.cols());
  ops::DenseOperator op(sys, a);
  long count = 0;
  do {
    acc += ops::conjugate_by_permutation(op, pi).matrix();
    ++count;
  } while (std::next_permutation(pi.begin(), pi.end()));
  return acc / static_cast<double>(count);
}

// U_pi A U_pi^dagger only relabels matrix elements, so the group average of an
// element is the mean over its orbit. Orbits of (row, col) under simultaneous
// site permutations are labelled by how many sites carry each local pair (r_s, c_s).
CMat orbit_average(const QuditSystem& sys, const CMat& a) {
  const int d = sys.d();
  const int n = sys.n();
  const Eigen::Index dim = a.rows();
  std::vector<std::vector<int>> digits(static_cast<std::size_t>(dim), std::vector<int>(static_cast<std::size_t>(n)));
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    Eigen::Index rem = idx;
    for (int s = n - 1; s >= 0; --s) {
      digits[static_cast<std::size_t>(idx)][static_cast<std::size_t>(s)] = static_cast<int>(rem % d);
      rem /= d;
    }
  }
  std::map<std::vector<int>, int> orbit_id;
  std::vector<int> label(static_cast<std::size_t>(dim * dim));
  std::vector<int> counts(static_cast<std::size_t>(d) * d);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      std::fill(counts.begin(), counts.end(), 0);
      const auto& dr = digits[static_cast<std::size_t>(r)];
      const auto& dc = digits[static_cast<std::size_t>(c)];
      for (int s = 0; s < n; ++s) ++counts[static_cast<std::size_t>(dr[static_cast<std::size_t>(s)] * d + dc[static_cast<std::size_t>(s)])];
      auto [it, inserted] = orbit_id.try_emplace(counts, static_cast<int>(orbit_id.size()));
      label[static_cast<std::size_t>(r + c * dim)] = it->second;
    }
  }
  std::vector<cplx> sum(orbit_id.size(), cplx(0.0));
  std::vector<long> size(orbit_id.size(), 0);
  for (Eigen::Index i = 0; i < dim * dim; ++i) {
    sum[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])] += a.data()[i];
    ++size[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])];
  }
  CMat out(dim, dim);
  for (Eigen::Index i = 0; i < dim * dim; ++i) {
    const auto l = static_cast<std::size_t>(label[static_cast<std::size_t>(i)]);
    out.data()[i] = sum[l] / static_cast<double>(size[l]);
  }
  return out;
}

}  // namespace

CMat PermutationAverage::apply(const CMat& a) const {
  check_shape(system_, a, "PermutationAverage");
  if (system_.n() == 1) return a;
  return mode_ == Mode::exact_sum ? exact_average(system_, a) : orbit_average(system_, a);
}

DenseOperator PermutationAverage::apply(const DenseOperator& a) const {
  if (!(a.system() == system_)) throw DomainError("PermutationAverage: system mismatch");
  return DenseOperator(system_, apply(a.matrix()));
}

SuperoperatorChannel PermutationAverage::as_channel() const {
  return SuperoperatorChannel(system_, std::make_shared<PermImpl>(*this));
}

DenseOperator permutation_average_apply(const PermutationAverage& p, const DenseOperator& a) {
  return p.apply(a);
}

SuperoperatorChannel homogeneous_channel(const DepolarizingChannel& ch, int n,
                                         PermutationAverage::Mode mode) {
  auto prod = product_channel(ch, n);
  return compose(PermutationAverage(prod.system(), mode).as_channel(), prod);
}

SuperoperatorChannel homogeneous_channel(const DepolarizingChannel& ch, int n) {
  auto prod = product_channel(ch, n);
  return compose(PermutationAverage(prod.system()).as_channel(), prod);
}

CommutationReport commutation_check(const SuperoperatorChannel& product, const PermutationAverage& p,
                                    int samples, std::uint64_t seed) {
  if (!(product.system() == p.system())) throw DomainError("commutation_check: system mismatch");
  auto eng = rng::make_engine(seed, 0);
  CommutationReport rep;
  rep.samples = samples;
  const auto dim = static_cast<Eigen::Index>(p.system().dim());
  for (int s = 0; s < samples; ++s) {
    CMat a = rng::ginibre(dim, dim, eng);
    CMat lhs = product.apply(p.apply(a));
    CMat rhs = p.apply(product.apply(a));
    rep.max_residual = std::max(rep.max_residual, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return rep;
}

}  // namespace flab::channels
