#include "formcalc/friedrichs.hpp"

#include <algorithm>
#include <cmath>

#include "formcalc/factorization.hpp"

namespace formcalc {
namespace {

FriedrichsResult sequence_friedrichs(const DenseOperator& a, const DualityPair& pair) {
  const DiagonalStructure& d = *a.diagonal();
  require(d.coefficients.is_real(), ErrorCode::NotSymmetric, "diagonal coefficients must be real");
  const Index n = a.domain_dimension();
  FriedrichsResult fr;
  const SesquilinearForm t = SesquilinearForm::diagonal(d.coefficients, n, d.domain);
  fr.gamma_input = lower_bound(t, pair);
  require(fr.gamma_input.gamma > 0.0, ErrorCode::NoLowerBound, "coefficients have no positive lower bound");
  fr.A_F = DenseOperator::diagonal(d.coefficients, n, DomainRule::Maximal, a.mapping());
  fr.energy_space = SesquilinearForm::diagonal(d.coefficients, n, DomainRule::Maximal);
  fr.gamma_preserved = lower_bound(form_of(fr.A_F), pair);
  const ExtensionResiduals ext = extension_residuals(a, fr.A_F);
  fr.extension_residual = std::max(ext.subspace, ext.action);
  const DenseOperator star = adjoint(fr.A_F);
  const ExtensionResiduals fwd = extension_residuals(fr.A_F, star), back = extension_residuals(star, fr.A_F);
  fr.selfadjoint_residual = std::max({fwd.subspace, fwd.action, back.subspace, back.action});
  // [e_k, y]_H = a_k conj(y_k) against (a e_k, I_a y) on the stored section
  double worst = 0.0;
  for (Index k = 0; k < n; ++k) {
    const CVector ek = CMatrix::Identity(n, n).col(k);
    const Vector y = Vector::generated(SeqRule::geometric(0.5) + SeqRule::power(-2.0, cplx(0.0, 1.0)), n);
    const cplx energy = t(ek, y.coords());
    const cplx pairing = pair_certified(Functional::finite(a.action().col(k)), y).value;
    worst = std::max(worst, std::abs(energy - pairing) / std::max(1.0, std::abs(energy)));
  }
  fr.embedding_residual = worst;
  fr.embedding_injectivity = 1.0;
  return fr;
}

}  // namespace

FriedrichsResult friedrichs(const DenseOperator& a, const DualityPair& pair) {
  require(a.backend() == pair.backend(), ErrorCode::BackendMismatch, "operator and pair backends differ");
  if (a.diagonal()) return sequence_friedrichs(a, pair);
  require(a.backend() == Backend::Dense, ErrorCode::Unsupported,
          "sequence-backend Friedrichs extensions need a diagonal generator");
  require(symmetry_residual(a) <= 1e-10, ErrorCode::NotSymmetric, "operator is not symmetric");

  FriedrichsResult fr;
  fr.energy_space = form_of(a);
  fr.gamma_input = lower_bound(fr.energy_space, pair);
  require(fr.gamma_input.gamma > 0.0, ErrorCode::NoLowerBound, "operator has no positive lower bound");
  const RepresentationResult rep = associated_operator(fr.energy_space, pair);
  fr.A_F = rep.A;
  fr.gamma_preserved = lower_bound(form_of(fr.A_F), pair);
  const ExtensionResiduals ext = extension_residuals(a, fr.A_F);
  fr.extension_residual = std::max(ext.subspace, ext.action);
  fr.selfadjoint_residual = rep.selfadjoint_residual;

  // I_a maps the energy space into X; on span(Z) it is the inclusion.
  const CMatrix& z = a.domain_basis();
  Eigen::JacobiSVD<CMatrix> svd(z);
  fr.embedding_injectivity = svd.singularValues().minCoeff() / std::max(1e-300, svd.singularValues().maxCoeff());
  double worst = 0.0;
  for (Index j = 0; j < z.cols(); ++j)
    for (Index k = 0; k < z.cols(); ++k) {
      const cplx energy = fr.energy_space(z.col(j), z.col(k));
      const cplx pairing = z.col(k).dot(a.action().col(j));  // (a z_j, z_k)
      worst = std::max(worst, std::abs(energy - pairing) / std::max(1.0, std::abs(energy)));
    }
  fr.embedding_residual = worst;
  return fr;
}

Report verify_friedrichs(const DenseOperator& a, const FriedrichsResult& fr) {
  Report rep("Thm2");
  rep.check("A_F extends a", fr.extension_residual, 1e-9);
  rep.check("A_F self-adjoint", fr.selfadjoint_residual, 1e-10);
  rep.check("lower bound preserved", std::max(0.0, fr.gamma_input.gamma - fr.gamma_preserved.gamma), 1e-10);
  rep.check("energy identity [t,y] = (at, I_a y)", fr.embedding_residual, 1e-10);
  rep.require_true("I_a injective", fr.embedding_injectivity > 1e-12);
  rep.data()["gamma"] = fr.gamma_input.gamma;
  rep.data()["gamma_A_F"] = fr.gamma_preserved.gamma;
  if (fr.A_F.diagonal()) {
    rep.data()["generator"] = fr.A_F.diagonal()->coefficients.describe();
    rep.data()["domain_rule"] = to_string(fr.A_F.diagonal()->domain);
  }
  (void)a;
  return rep;
}

bool in_domain(const DenseOperator& op, const Vector& y) {
  if (!op.diagonal()) {
    require(y.size() == op.ambient_dimension(), ErrorCode::BackendMismatch, "vector does not match the ambient space");
    return linalg::fit_in_span(op.domain_basis(), y.coords()).residual <= 1e-9;
  }
  require(y.backend() == Backend::Sequence, ErrorCode::BackendMismatch, "sequence operator needs a sequence vector");
  if (!y.tail_rule() || y.tail_rule()->is_zero()) return true;
  if (op.diagonal()->domain == DomainRule::FinitelySupported) return false;
  const SeqRule image = op.diagonal()->coefficients * (*y.tail_rule());
  const SeriesCertificate cert = certify_series(image.squared_modulus(), y.size() + 1);
  require(cert.verdict != SeriesVerdict::Uncertified, ErrorCode::Uncertified,
          "domain membership undecided: " + cert.reason);
  return cert.verdict == SeriesVerdict::Converges;
}

namespace {

// sum_{n > N} a_n |y_n|^2 for a diagonal A_F.
double energy_tail(const SeqRule& a, const Vector& y, long n_cut) {
  long double head = 0.0L;
  for (long n = n_cut + 1; n <= y.size(); ++n) head += a(n).real() * std::norm(y.at(n));
  double tail = 0.0;
  if (y.tail_rule() && !y.tail_rule()->is_zero()) {
    const long from = std::max<long>(n_cut, y.size());
    tail = tail_estimate(a * y.tail_rule()->squared_modulus(), from).upper_bound();
  }
  return static_cast<double>(head) + tail;
}

}  // namespace

Report core_check(const DenseOperator& a, const FriedrichsResult& fr, const std::vector<Vector>& samples) {
  Report rep("Thm3");
  nlohmann::json witnesses = nlohmann::json::array();
  for (const auto& y : samples) {
    const FormValue total = form_on_X(fr.A_F, y);
    require(total.finite(), ErrorCode::OutOfDomain, "sample is outside dom J_F*");
    nlohmann::json w;
    w["energy"] = total.value;
    if (!fr.A_F.diagonal()) {
      require(in_domain(a, y), ErrorCode::OutOfDomain, "sample is outside the effective ambient space");
      w["truncations"] = nlohmann::json::array({{{"N", y.size()}, {"tail", 0.0}}});
      witnesses.push_back(w);
      continue;
    }
    const bool finite_support = !y.tail_rule() || y.tail_rule()->is_zero();
    const double target = 1e-8 * std::max(1.0, total.value);
    const SeqRule& coeff = fr.A_F.diagonal()->coefficients;
    nlohmann::json trunc = nlohmann::json::array();
    double prev = INFINITY, first = NAN, last = INFINITY;
    bool monotone = true;
    long n = finite_support ? std::max<long>(1, y.size()) : 1;
    constexpr long kMax = 1L << 50;
    while (true) {
      const double t = finite_support && n >= y.size() ? 0.0 : energy_tail(coeff, y, n);
      trunc.push_back({{"N", n}, {"tail", t}});
      if (std::isnan(first)) first = t;
      monotone = monotone && t <= prev * (1 + 1e-12);
      prev = last = t;
      if (t <= target || n >= kMax) break;
      n = n < 64 ? n + 1 : 2 * n;
    }
    w["truncations"] = trunc;
    w["final_tail"] = last;
    witnesses.push_back(w);
    rep.require_true("energy tails non-increasing", monotone);
    if (first > 0.0) rep.check("tail contraction last/first", last / first, 1.0 - 1e-15);
    rep.check("final energy tail", last, target);
  }
  rep.data()["witnesses"] = witnesses;
  return rep;
}

}  // namespace formcalc
