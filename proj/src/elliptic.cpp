#include "formcalc/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "formcalc/random.hpp"

namespace formcalc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Index kDenseSolveLimit = 1024;

void validate(const EllipticProblem& pr) {
  require(pr.length > 0.0 && std::isfinite(pr.length), ErrorCode::InvalidArgument, "interval length must be positive");
  require(pr.gamma > 0.0, ErrorCode::InvalidArgument, "ellipticity constant must be positive");
  require(pr.p >= 1.0, ErrorCode::InvalidArgument, "p must be >= 1");
}

void validate(const Mesh& mesh) {
  require(mesh.nodes.size() >= 3, ErrorCode::InvalidArgument, "mesh needs at least two elements");
  require(mesh.nodes.front() == 0.0, ErrorCode::InvalidArgument, "mesh must start at 0");
  for (std::size_t i = 1; i < mesh.nodes.size(); ++i)
    require(mesh.nodes[i] > mesh.nodes[i - 1], ErrorCode::InvalidArgument, "mesh nodes must increase strictly");
  require(mesh.quadrature_order >= 1, ErrorCode::InvalidArgument, "quadrature order must be >= 1");
}

SparseMatrix block(const SparseMatrix& m, Index first, Index size) { return m.block(first, first, size, size); }

CMatrix dense_complex(const SparseMatrix& m) { return CMatrix(Eigen::MatrixXd(m).cast<cplx>()); }

double max_row_sum(const SparseMatrix& m) {
  RVector rows = RVector::Zero(m.rows());
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

Mesh Mesh::uniform(double length, int elements, int quadrature_order) {
  return graded(length, elements, 1.0, quadrature_order);
}

Mesh Mesh::graded(double length, int elements, double grading, int quadrature_order) {
  require(elements >= 2, ErrorCode::InvalidArgument, "mesh needs at least two elements");
  require(grading > 0.0, ErrorCode::InvalidArgument, "grading must be positive");
  Mesh m;
  m.quadrature_order = quadrature_order;
  m.nodes.resize(static_cast<std::size_t>(elements) + 1);
  for (int i = 0; i <= elements; ++i)
    m.nodes[static_cast<std::size_t>(i)] = length * std::pow(static_cast<double>(i) / elements, grading);
  m.nodes.back() = length;
  return m;
}

double Mesh::max_step() const {
  double h = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) h = std::max(h, nodes[i] - nodes[i - 1]);
  return h;
}

GaussRule GaussRule::of_order(int order) {
  require(order >= 1 && order <= 64, ErrorCode::InvalidArgument, "quadrature order must be in 1..64");
  // Golub-Welsch: eigenpairs of the Legendre Jacobi matrix.
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  GaussRule g;
  for (int i = 0; i < order; ++i) {
    g.nodes.push_back(es.eigenvalues()(i));
    g.weights.push_back(2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i));
  }
  return g;
}

// ---- assembly ----

SparseMatrix AssembledForm::stiffness() const {
  const SparseMatrix s = gradient + potential;
  return block(s, first_active(), active_size());
}

SparseMatrix AssembledForm::active_mass() const { return block(mass, first_active(), active_size()); }

Index AssembledForm::active_size() const {
  const Index all = static_cast<Index>(mesh.nodes.size());
  return boundary == Boundary::Dirichlet ? all - 2 : all;
}

SesquilinearForm AssembledForm::form() const { return SesquilinearForm::on_standard_basis(dense_complex(stiffness())); }

AssembledForm assemble(const EllipticProblem& problem, const Mesh& mesh, Boundary boundary) {
  validate(problem);
  validate(mesh);
  const GaussRule rule = GaussRule::of_order(mesh.quadrature_order);
  const Index n = static_cast<Index>(mesh.nodes.size());
  std::vector<Eigen::Triplet<double>> tg, tb, tm;
  AssembledForm out;
  out.mesh = mesh;
  out.boundary = boundary;
  for (double x : mesh.nodes)
    if (!std::isfinite(problem.b(x))) out.singular_b_at_node = true;

  for (int e = 0; e < mesh.elements(); ++e) {
    const double x0 = mesh.nodes[e], x1 = mesh.nodes[e + 1], h = x1 - x0;
    double kg = 0.0, kb[2][2] = {{0, 0}, {0, 0}}, km[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = 0.5 * (rule.nodes[q] + 1.0);
      const double x = x0 + t * h;
      const double w = 0.5 * h * rule.weights[q];
      const double a = problem.a(x), b = problem.b(x);
      if (!(a >= problem.gamma)) {
        std::ostringstream os;
        os << "ellipticity violated: a(" << x << ") = " << a << " < gamma = " << problem.gamma;
        throw Error(ErrorCode::InvalidArgument, os.str());
      }
      if (!(b >= 0.0) || !std::isfinite(b)) {
        std::ostringstream os;
        os << "potential must be finite and non-negative at quadrature nodes: b(" << x << ") = " << b;
        throw Error(ErrorCode::InvalidArgument, os.str());
      }
      const double phi[2] = {1.0 - t, t};
      kg += w * a / (h * h);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          kb[i][j] += w * b * phi[i] * phi[j];
          km[i][j] += w * phi[i] * phi[j];
        }
    }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        tg.emplace_back(e + i, e + j, (i == j ? 1.0 : -1.0) * kg);
        tb.emplace_back(e + i, e + j, kb[i][j]);
        tm.emplace_back(e + i, e + j, km[i][j]);
      }
  }
  out.gradient.resize(n, n);
  out.potential.resize(n, n);
  out.mass.resize(n, n);
  out.gradient.setFromTriplets(tg.begin(), tg.end());
  out.potential.setFromTriplets(tb.begin(), tb.end());
  out.mass.setFromTriplets(tm.begin(), tm.end());
  return out;
}

// ---- norms and evaluation ----

double evaluate_p1(const Mesh& mesh, const RVector& nodal, double x) {
  const auto it = std::upper_bound(mesh.nodes.begin(), mesh.nodes.end(), x);
  std::size_t e = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - mesh.nodes.begin() - 1, 0));
  e = std::min(e, mesh.nodes.size() - 2);
  const double t = (x - mesh.nodes[e]) / (mesh.nodes[e + 1] - mesh.nodes[e]);
  return (1.0 - t) * nodal(static_cast<Index>(e)) + t * nodal(static_cast<Index>(e + 1));
}

double lp_norm_p1(const Mesh& mesh, const RVector& nodal, double p) {
  const GaussRule rule = GaussRule::of_order(10);
  double acc = 0.0;
  for (int e = 0; e < mesh.elements(); ++e) {
    const double x0 = mesh.nodes[e], h = mesh.nodes[e + 1] - x0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = 0.5 * (rule.nodes[q] + 1.0);
      const double v = (1.0 - t) * nodal(e) + t * nodal(e + 1);
      acc += 0.5 * h * rule.weights[q] * std::pow(std::abs(v), p);
    }
  }
  return std::pow(acc, 1.0 / p);
}

double l2_error(const Mesh& mesh, const RVector& nodal, const DataRule& exact) {
  const GaussRule rule = GaussRule::of_order(mesh.quadrature_order);
  double acc = 0.0;
  for (int e = 0; e < mesh.elements(); ++e) {
    const double x0 = mesh.nodes[e], h = mesh.nodes[e + 1] - x0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = 0.5 * (rule.nodes[q] + 1.0);
      const double d = (1.0 - t) * nodal(e) + t * nodal(e + 1) - exact(x0 + t * h);
      acc += 0.5 * h * rule.weights[q] * d * d;
    }
  }
  return std::sqrt(acc);
}

// ---- lower bounds ----

double discrete_poincare_constant(const Mesh& mesh) {
  EllipticProblem unit;
  unit.length = mesh.nodes.back();
  const AssembledForm f = assemble(unit, mesh, Boundary::Dirichlet);
  const Index n = f.active_size();
  const CMatrix k = dense_complex(block(f.gradient, 1, n));
  const CMatrix m = dense_complex(block(f.mass, 1, n));
  return linalg::generalized_hermitian_eigen(k, m).values(0);
}

EllipticLowerBound sobolev_lower_bound(const EllipticProblem& problem, const Mesh& mesh, int samples,
                                       std::uint64_t seed) {
  const AssembledForm f = assemble(problem, mesh, Boundary::Dirichlet);
  const double L = problem.length, p = problem.p;
  EllipticLowerBound out;
  out.certificate.p = p;
  out.certificate.kind = p == 2.0 ? LowerBoundKind::ExactP2 : LowerBoundKind::EquivalenceScaled;
  if (p <= 2.0) {
    out.route = "poincare";
    out.certificate.gamma = problem.gamma * kPi * kPi / std::pow(L, 1.0 + 2.0 / p);
  } else {
    out.route = "sup-norm";
    out.certificate.gamma = problem.gamma / std::pow(L, 1.0 + 2.0 / p);
  }
  const double c = out.certificate.gamma;
  const SparseMatrix s = f.stiffness();
  const Index n = f.active_size();
  random::Engine rng(seed);
  out.min_sampled_ratio = INFINITY;
  for (int i = 0; i < samples; ++i) {
    RVector nodal = RVector::Zero(n + 2);
    if (i == 0) {
      for (Index j = 1; j <= n; ++j) nodal(j) = std::sin(kPi * mesh.nodes[static_cast<std::size_t>(j)] / L);
    } else {
      for (Index j = 1; j <= n; ++j) nodal(j) = random::uniform(rng, -1.0, 1.0);
    }
    const RVector x = nodal.segment(1, n);
    const double energy = x.dot(s * x);
    const double norm = lp_norm_p1(mesh, nodal, p);
    const double ratio = energy / (norm * norm);
    out.min_sampled_ratio = std::min(out.min_sampled_ratio, ratio);
    if (ratio < c * (1.0 - 1e-10)) ++out.violations;
    ++out.samples;
  }
  out.certificate.slack = out.min_sampled_ratio - c;
  return out;
}

// ---- weak solve ----

WeakSolution weak_solve(const EllipticProblem& problem, const Mesh& mesh, const DataRule& g) {
  const AssembledForm f = assemble(problem, mesh, Boundary::Dirichlet);
  const Index n = f.active_size();
  const GaussRule rule = GaussRule::of_order(mesh.quadrature_order);
  RVector load = RVector::Zero(n + 2);
  for (int e = 0; e < mesh.elements(); ++e) {
    const double x0 = mesh.nodes[e], h = mesh.nodes[e + 1] - x0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = 0.5 * (rule.nodes[q] + 1.0);
      const double gv = g(x0 + t * h);
      require(std::isfinite(gv), ErrorCode::InvalidArgument, "data is not finite at a quadrature node");
      const double w = 0.5 * h * rule.weights[q];
      load(e) += w * gv * (1.0 - t);
      load(e + 1) += w * gv * t;
    }
  }
  const RVector rhs = load.segment(1, n);
  const SparseMatrix s = f.stiffness();

  WeakSolution out;
  out.q_admissible = problem.q() >= 2.0 / 3.0;
  RVector c;
  if (n <= kDenseSolveLimit) {
    out.solver = "riesz";
    const Vector sol = riesz_solve(f.form(), Functional::dense(rhs.cast<cplx>()));
    c = sol.coords().real();
  } else {
    out.solver = "sparse-ldlt";
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(s);
    require(ldlt.info() == Eigen::Success, ErrorCode::Singular, "stiffness factorization failed");
    c = ldlt.solve(rhs);
    require(ldlt.info() == Eigen::Success, ErrorCode::Singular, "stiffness solve failed");
    c += ldlt.solve(RVector(rhs - s * c));  // one refinement step
  }
  require(c.allFinite(), ErrorCode::Singular, "singular stiffness");
  out.nodal = RVector::Zero(n + 2);
  out.nodal.segment(1, n) = c;
  // normwise backward error with ||S||_inf; ||S c - F|| / ||F|| alone is of order cond(S) * eps
  const double denom = max_row_sum(s) * c.norm() + rhs.norm();
  out.residual = denom > 0.0 ? (s * c - rhs).norm() / denom : 0.0;
  out.energy_norm = std::sqrt(std::max(0.0, c.dot(s * c)));
  out.lp_norm = lp_norm_p1(mesh, out.nodal, problem.p);
  return out;
}

std::vector<ConvergenceRow> convergence_study(const EllipticProblem& problem, const DataRule& g,
                                              const DataRule& exact, const std::vector<int>& elements) {
  std::vector<ConvergenceRow> rows;
  for (int m : elements) {
    const Mesh mesh = Mesh::uniform(problem.length, m);
    const WeakSolution s = weak_solve(problem, mesh, g);
    ConvergenceRow r;
    r.elements = m;
    r.h = mesh.max_step();
    r.l2_error = l2_error(mesh, s.nodal, exact);
    if (!rows.empty()) r.ratio = rows.back().l2_error / r.l2_error;
    rows.push_back(r);
  }
  return rows;
}

// ---- Dirichlet vs Neumann ----

std::vector<RVector> standard_probes(const Mesh& mesh, int random, std::uint64_t seed) {
  const Index n = static_cast<Index>(mesh.nodes.size());
  const double L = mesh.nodes.back();
  std::vector<RVector> out;
  out.push_back(RVector::Ones(n));
  RVector lin(n), sine(n), bump = RVector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const double x = mesh.nodes[static_cast<std::size_t>(i)];
    lin(i) = x / L;
    sine(i) = i == 0 || i == n - 1 ? 0.0 : std::sin(kPi * x / L);
  }
  bump(n / 2) = 1.0;
  out.push_back(lin);
  out.push_back(sine);
  out.push_back(bump);
  random::Engine rng(seed);
  for (int k = 0; k < random; ++k) {
    RVector v(n);
    for (Index i = 0; i < n; ++i) v(i) = random::uniform(rng, -1.0, 1.0);
    if (k % 2 == 1) v(0) = v(n - 1) = 0.0;
    out.push_back(v);
  }
  return out;
}

DirichletNeumannReport dirichlet_vs_neumann(const EllipticProblem& problem, const Mesh& mesh,
                                            const std::vector<RVector>& probes, double slack) {
  const AssembledForm neu = assemble(problem, mesh, Boundary::Neumann);
  require(neu.potential.norm() > 0.0, ErrorCode::InvalidArgument,
          "Neumann comparison needs b > 0 somewhere; with b = 0 constants are in the kernel");
  const Index n = static_cast<Index>(mesh.nodes.size());
  const CMatrix sn = dense_complex(neu.stiffness());
  CMatrix penalty = CMatrix::Zero(n, n);
  penalty(0, 0) = 1.0;
  penalty(n - 1, n - 1) = 1.0;

  DirichletNeumannReport rep;
  rep.kappa = 1e3 * sn.diagonal().real().maxCoeff();
  rep.note = "Galerkin shadow: Dirichlet form = limit of the Neumann form plus kappa (|f(0)|^2 + |f(L)|^2)";
  const FormEvaluator a_n(DenseOperator::from_matrix(sn));
  std::vector<FormEvaluator> penalized;
  for (int i = 0; i < 3; ++i)
    penalized.emplace_back(DenseOperator::from_matrix(sn + rep.kappa * std::pow(10.0, i) * penalty));

  OrderingReport& ord = rep.ordering;
  ord.slack = slack;
  ord.a_geq_b = ord.b_geq_a = true;
  int idx = 0;
  for (const RVector& y : probes) {
    require(y.size() == n, ErrorCode::InvalidArgument, "probe length must equal the node count");
    DirichletNeumannProbe pr;
    pr.origin = "probe " + std::to_string(idx++);
    pr.nodal = y;
    const Vector yv = Vector::dense(y.cast<cplx>());
    pr.neumann = a_n(yv).value;
    for (const FormEvaluator& op : penalized) pr.penalized.push_back(op(yv).value);
    const double boundary = y(0) * y(0) + y(n - 1) * y(n - 1);
    const double spread = std::abs(pr.penalized[2] - pr.penalized[0]);
    if (spread <= 1e-9 * std::max(1.0, std::abs(pr.penalized[0]))) {
      pr.dirichlet = pr.penalized[0];
    } else {
      // growth certificate: both increments match kappa |boundary|^2
      const double s1 = (pr.penalized[1] - pr.penalized[0]) / (9.0 * rep.kappa);
      const double s2 = (pr.penalized[2] - pr.penalized[1]) / (90.0 * rep.kappa);
      require(boundary > 0.0 && std::abs(s1 - boundary) <= 1e-6 * boundary &&
                  std::abs(s2 - boundary) <= 1e-6 * boundary,
              ErrorCode::Uncertified, pr.origin + ": penalized form values do not grow linearly in kappa");
      pr.dirichlet = INFINITY;
    }
    const double tol = slack * std::max(1.0, std::abs(pr.neumann));
    if (!(pr.dirichlet >= pr.neumann - tol)) ord.a_geq_b = false;
    if (!(pr.neumann >= pr.dirichlet - tol)) ord.b_geq_a = false;
    if (std::isfinite(pr.dirichlet) && !std::isfinite(pr.neumann)) ord.a_domain_in_b = false;
    if (std::isfinite(pr.neumann) && !std::isfinite(pr.dirichlet)) ord.b_domain_in_a = false;
    ord.probes.push_back(ProbeValue{yv, pr.dirichlet, pr.neumann, pr.origin});
    rep.probes.push_back(std::move(pr));
  }
  ord.a_geq_b = ord.a_geq_b && ord.a_domain_in_b;
  ord.b_geq_a = ord.b_geq_a && ord.b_domain_in_a;
  ord.verdict = ord.a_geq_b && ord.b_geq_a ? Order::Equal
                : ord.a_geq_b             ? Order::AGeqB
                : ord.b_geq_a             ? Order::BGeqA
                                          : Order::Incomparable;
  return rep;
}

// ---- CSV ----

std::string solution_csv(const Mesh& mesh, const RVector& nodal) {
  std::ostringstream os;
  os.precision(17);
  os << "x,f_h\n";
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) os << mesh.nodes[i] << ',' << nodal(static_cast<Index>(i)) << '\n';
  return os.str();
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "elements,h,l2_error,ratio\n";
  for (const ConvergenceRow& r : rows) {
    os << r.elements << ',' << r.h << ',' << r.l2_error << ',';
    if (std::isfinite(r.ratio)) os << r.ratio;
    os << '\n';
  }
  return os.str();
}

}  // namespace formcalc
