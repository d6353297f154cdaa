#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "formcalc/expression.hpp"
#include "formcalc/factorization.hpp"
#include "formcalc/forms.hpp"

namespace formcalc {

/// -(a f')' + b f = g on (0, L).
struct EllipticProblem {
  double length = 1.0;
  Expression a = Expression::constant(1.0);
  Expression b = Expression::constant(0.0);
  double gamma = 1.0;  // claimed ellipticity constant, a >= gamma
  double p = 2.0;      // solution space L_p; data space L_q
  double q() const { return p / (p - 1.0); }
};

struct Mesh {
  std::vector<double> nodes;  // strictly increasing, nodes.front() = 0
  int quadrature_order = 4;

  static Mesh uniform(double length, int elements, int quadrature_order = 4);
  /// x_i = L (i / m)^grading.
  static Mesh graded(double length, int elements, double grading, int quadrature_order = 4);

  int elements() const { return static_cast<int>(nodes.size()) - 1; }
  double max_step() const;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes, weights;
  static GaussRule of_order(int order);
};

enum class Boundary { Dirichlet, Neumann };

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Hat-function matrices over all m + 1 nodes; Dirichlet keeps the interior block.
struct AssembledForm {
  Mesh mesh;
  Boundary boundary = Boundary::Dirichlet;
  SparseMatrix gradient;   // int a phi_i' phi_j'
  SparseMatrix potential;  // int b phi_i phi_j
  SparseMatrix mass;       // int phi_i phi_j
  bool singular_b_at_node = false;

  /// Stiffness on the active space (interior hats or all hats).
  SparseMatrix stiffness() const;
  SparseMatrix active_mass() const;
  Index active_size() const;
  Index first_active() const { return boundary == Boundary::Dirichlet ? 1 : 0; }

  /// Dense form on coefficient coordinates of the active hats.
  SesquilinearForm form() const;
};

/// Gauss quadrature per element; throws InvalidArgument when a < gamma or
/// b < 0 (or not finite) at a quadrature node.
AssembledForm assemble(const EllipticProblem& problem, const Mesh& mesh, Boundary boundary = Boundary::Dirichlet);

/// ||f||_p of the P1 function with nodal values f (boundary values included).
double lp_norm_p1(const Mesh& mesh, const RVector& nodal, double p);

struct EllipticLowerBound {
  LowerBoundCertificate certificate;  // (Af, f) >= c ||f||_p^2
  std::string route;                   // "poincare" or "sup-norm"
  double min_sampled_ratio = 0.0;      // min (Af, f) / ||f||_p^2 over the samples
  int samples = 0;
  int violations = 0;                  // ratio below c (1 - 1e-10)
};

/// c = gamma pi^2 / L^{1 + 2/p} for p <= 2 (Poincare and Hoelder) and
/// c = gamma / L^{1 + 2/p} for p > 2 (||f||_inf <= sqrt(L) ||f'||_2).
EllipticLowerBound sobolev_lower_bound(const EllipticProblem& problem, const Mesh& mesh, int samples = 100,
                                       std::uint64_t seed = 1);

/// lambda_min of int f'^2 against int f^2 over interior hats.
double discrete_poincare_constant(const Mesh& mesh);

struct WeakSolution {
  RVector nodal;            // all nodes, zero on the boundary
  double residual = 0.0;    // ||S c - F|| / (||S||_inf ||c|| + ||F||)
  double energy_norm = 0.0;
  double lp_norm = 0.0;     // ||f_h||_p
  bool q_admissible = true; // q >= 2n / (n + 2) with n = 1
  std::string solver;       // "riesz" or "sparse-ldlt"
};

using DataRule = std::function<double(double)>;

/// Galerkin solve with interior hats; dense Riesz solve up to 1024 unknowns,
/// sparse LDLT beyond.
WeakSolution weak_solve(const EllipticProblem& problem, const Mesh& mesh, const DataRule& g);

/// ||f_h - u||_2 by Gauss quadrature of the configured order.
double l2_error(const Mesh& mesh, const RVector& nodal, const DataRule& exact);

/// P1 interpolation of nodal values at x.
double evaluate_p1(const Mesh& mesh, const RVector& nodal, double x);

struct ConvergenceRow {
  int elements = 0;
  double h = 0.0;
  double l2_error = 0.0;
  double ratio = NAN;  // error(previous h) / error(h)
};

std::vector<ConvergenceRow> convergence_study(const EllipticProblem& problem, const DataRule& g,
                                              const DataRule& exact, const std::vector<int>& elements);

struct DirichletNeumannProbe {
  std::string origin;
  RVector nodal;
  double dirichlet = 0.0;  // +inf when the penalized values grow without bound
  double neumann = 0.0;
  std::vector<double> penalized;  // form values at kappa, 10 kappa, 100 kappa
};

struct DirichletNeumannReport {
  OrderingReport ordering;  // A = Dirichlet (Friedrichs), B = Neumann
  std::vector<DirichletNeumannProbe> probes;
  double kappa = 0.0;
  std::string note;
};

/// Dirichlet form values as the limit of the Neumann form plus a boundary
/// penalty kappa; probes are nodal vectors over all nodes. Throws
/// InvalidArgument when b vanishes on every quadrature node.
DirichletNeumannReport dirichlet_vs_neumann(const EllipticProblem& problem, const Mesh& mesh,
                                            const std::vector<RVector>& probes, double slack = 1e-9);

/// Standard probe set: constant 1, x, sin(pi x / L), interior bumps and random vectors.
std::vector<RVector> standard_probes(const Mesh& mesh, int random = 6, std::uint64_t seed = 1);

std::string solution_csv(const Mesh& mesh, const RVector& nodal);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

}  // namespace formcalc
