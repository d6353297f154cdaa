#include <cmath>
#include <cstdio>

#include "formcalc/random.hpp"
#include "formcalc/scenario.hpp"
#include "formcalc/serialize.hpp"

namespace formcalc::scenario {

namespace {

using io::to_json;

class Builder {
 public:
  Builder(std::string suite, std::uint64_t seed, std::uint64_t salt)
      : suite_(std::move(suite)), seed_(seed), rng_(seed * 1000003ULL + salt) {}

  random::Engine& rng() { return rng_; }

  void add(const std::string& name, const std::string& op, json operands, Verdict expect = Verdict::Pass) {
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%02d-", static_cast<int>(out_.size()) + 1);
    Scenario s;
    s.id = suite_ + "/" + prefix + name;
    s.op = op;
    s.operands = std::move(operands);
    s.seed = seed_ + out_.size();
    s.expect = expect;
    out_.push_back(std::move(s));
  }

  std::vector<Scenario> take() { return std::move(out_); }

 private:
  std::string suite_;
  std::uint64_t seed_;
  random::Engine rng_;
  std::vector<Scenario> out_;
};

json matrix_op(const CMatrix& m, const char* mapping = nullptr) {
  json j{{"matrix", to_json(m)}};
  if (mapping) j["mapping"] = mapping;
  return j;
}

json diagonal_op(const json& rule, int truncation = 12, const char* domain = "finite") {
  return {{"diagonal", rule}, {"truncation", truncation}, {"domain", domain}};
}

json power(double a, double c = 1.0) { return {{"power", a}, {"coeff", c}}; }
json generated(const json& rule, int truncation = 4) { return {{"generated", rule}, {"truncation", truncation}}; }

CMatrix diag(std::initializer_list<double> d) {
  CMatrix m = CMatrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index i = 0;
  for (double v : d) m(i, i) = v, ++i;
  return m;
}

// E = A^{-1} K with K Hermitian satisfies E* A = K = A E.
CMatrix commuting(random::Engine& rng, const CMatrix& a) {
  CMatrix k = random::gaussian_matrix(rng, a.rows(), a.cols());
  k = (k + k.adjoint()).eval();
  return a.inverse() * k;
}

std::vector<Scenario> representation(std::uint64_t seed) {
  Builder b("representation", seed, 1);
  for (int i = 0; i < 6; ++i) {
    const Index n = 2 + (i * 2) % 11;
    b.add("random-pd-n" + std::to_string(n), "representation", {{"gram", to_json(random::hermitian_pd(b.rng(), n))}});
  }
  const CMatrix basis = random::gaussian_matrix(b.rng(), 6, 3);
  b.add("subspace", "representation",
        {{"gram", to_json(random::hermitian_pd(b.rng(), 3))}, {"basis", to_json(basis)}});
  b.add("p4", "representation", {{"gram", to_json(random::hermitian_pd(b.rng(), 4))}, {"p", 4.0}});
  b.add("indefinite-gram", "representation", {{"gram", to_json(diag({1.0, -1.0, 2.0}))}}, Verdict::Fail);
  return b.take();
}

std::vector<Scenario> friedrichs(std::uint64_t seed) {
  Builder b("friedrichs", seed, 2);
  const auto probe = [](const json& v, bool in) { return json{{"vector", v}, {"in_domain", in}}; };
  b.add("diag-n2", "friedrichs",
        {{"operator", diagonal_op(power(2.0))},
         {"probes",
          {probe(generated(power(-3.0)), true), probe(generated(power(-2.6)), true),
           probe(generated(power(-2.0)), false), probe(generated(power(-2.4)), false),
           probe(json::array({1.0, -2.0, 0.5}), true)}}});
  b.add("diag-exp", "friedrichs",
        {{"operator", diagonal_op({{"exponential", 1.0}})},
         {"probes",
          {probe(generated({{"exponential", -2.0}}), true), probe(generated({{"exponential", -1.5}}), true),
           probe(generated({{"exponential", -1.0}}), false), probe(generated(power(-4.0)), false)}}});
  b.add("diag-geometric", "friedrichs",
        {{"operator", diagonal_op({{"geometric", 1.5}})},
         {"probes",
          {probe(generated({{"geometric", 0.5}}), true), probe(generated({{"geometric", 1.0 / 1.5}}), false),
           probe(generated({{"geometric", 0.6}}), true)}}});
  const CMatrix p = random::hermitian_pd(b.rng(), 5);
  const CMatrix z = random::gaussian_matrix(b.rng(), 5, 3);
  b.add("dense-subspace", "friedrichs", {{"operator", {{"basis", to_json(z)}, {"action", to_json(CMatrix(p * z))}}}});
  b.add("dense-full", "friedrichs", {{"operator", matrix_op(random::hermitian_pd(b.rng(), 4))}});
  b.add("core-n2", "core_check",
        {{"operator", diagonal_op(power(2.0))},
         {"samples", {generated(power(-3.0)), generated({{"geometric", 0.5}}), json::array({1.0, 2.0})}}});
  b.add("core-dense", "core_check",
        {{"operator", matrix_op(random::hermitian_pd(b.rng(), 3))},
         {"samples", {to_json(random::gaussian_vector(b.rng(), 3))}}});
  b.add("indefinite-operator", "friedrichs", {{"operator", matrix_op(diag({1.0, -2.0}))}}, Verdict::Fail);
  return b.take();
}

std::vector<Scenario> ordering(std::uint64_t seed) {
  Builder b("ordering", seed, 3);
  for (int i = 0; i < 3; ++i) {
    const Index n = 3 + 2 * i;
    b.add("factorize-rank-deficient-n" + std::to_string(n), "factorize",
          {{"operator", matrix_op(random::hermitian_psd_rank(b.rng(), n, n - 1 - i))}, {"hilbert_samples", 20}});
  }
  for (int i = 0; i < 3; ++i) {
    const Index n = 2 + 2 * i;
    b.add("form-on-x-dense-n" + std::to_string(n), "form_on_X",
          {{"operator", matrix_op(random::hermitian_pd(b.rng(), n))},
           {"vector", to_json(random::gaussian_vector(b.rng(), n))},
           {"expect", "finite"}});
  }
  b.add("form-on-x-n2-in", "form_on_X",
        {{"operator", diagonal_op(power(2.0), 8)}, {"vector", generated(power(-2.0), 8)}, {"expect", "finite"}});
  b.add("form-on-x-n2-out", "form_on_X",
        {{"operator", diagonal_op(power(2.0), 8)}, {"vector", generated(power(-1.0), 8)}, {"expect", "infinite"}});
  const CMatrix lo = random::hermitian_pd(b.rng(), 4);
  const CMatrix hi = lo + random::hermitian_psd_rank(b.rng(), 4, 2);
  b.add("compare-dense", "compare", {{"a", matrix_op(hi)}, {"b", matrix_op(lo)}, {"expect", "A>=B"}});
  b.add("compare-equal", "compare", {{"a", matrix_op(lo)}, {"b", matrix_op(lo)}, {"expect", "equal"}});
  b.add("compare-sequence", "compare",
        {{"a", diagonal_op(power(2.0, 3.0), 10)},
         {"b", diagonal_op(power(2.0), 10)},
         {"samples", {generated(power(-2.0))}},
         {"expect", "A>=B"}});
  b.add("antisymmetry", "antisymmetry", {{"a", matrix_op(lo)}, {"b", matrix_op(lo)}});
  b.add("reversed-order", "compare", {{"a", matrix_op(hi)}, {"b", matrix_op(lo)}, {"expect", "B>=A"}},
        Verdict::Fail);
  return b.take();
}

std::vector<Scenario> formsum(std::uint64_t seed) {
  Builder b("formsum", seed, 4);
  for (int i = 0; i < 4; ++i) {
    const Index n = 2 + i;
    const CMatrix a = random::hermitian_pd(b.rng(), n);
    const CMatrix c = i % 2 ? random::hermitian_psd_rank(b.rng(), n, n / 2 + 1) : random::hermitian_pd(b.rng(), n);
    b.add("dense-n" + std::to_string(n), "form_sum", {{"a", matrix_op(a)}, {"b", matrix_op(c)}});
  }
  b.add("diag-collapse", "form_sum", {{"a", matrix_op(diag({1, 2}))}, {"b", matrix_op(diag({3, 4}))}});
  b.add("sequence-n2-n4", "form_sum", {{"a", diagonal_op(power(2.0), 10)}, {"b", diagonal_op(power(4.0), 10)}});
  {
    const CMatrix a = random::hermitian_pd(b.rng(), 5), c = random::hermitian_pd(b.rng(), 5);
    const CMatrix z = random::gaussian_matrix(b.rng(), 5, 3);
    b.add("restricted-domain", "form_sum",
          {{"a", {{"basis", to_json(z)}, {"action", to_json(CMatrix(a * z))}}},
           {"b", {{"basis", to_json(z)}, {"action", to_json(CMatrix(c * z))}}}});
  }
  for (int i = 0; i < 2; ++i) {
    const Index n = 3 + i;
    const CMatrix a = random::hermitian_pd(b.rng(), n);
    const CMatrix e = commuting(b.rng(), a);
    const double rho = linalg::spectral_radius(e);
    const double scale = random::uniform(b.rng(), 0.5, 3.0);
    const json ea = matrix_op(e, "X->X");
    b.add("lift-n" + std::to_string(n), "lift_commutant",
          {{"a", matrix_op(a)}, {"e", ea}, {"resolvent_points", {rho + 1.0, -rho - 1.0, rho + 2.5}}});
    b.add("commutation-n" + std::to_string(n), "commutation_formsum",
          {{"a", matrix_op(a)}, {"b", matrix_op(scale * a)}, {"e", ea}});
    b.add("spectrum-n" + std::to_string(n), "spectrum_inclusion", {{"a", matrix_op(a)}, {"e", ea}});
  }
  CMatrix broken(2, 2);
  broken << 1, 2, 0, 1;
  b.add("broken-eq7", "lift_commutant", {{"a", matrix_op(diag({1, 2}))}, {"e", matrix_op(broken, "X->X")}},
        Verdict::Fail);
  return b.take();
}

std::vector<Scenario> covariance(std::uint64_t seed) {
  Builder b("covariance", seed, 5);
  const json space{{"exponential", 1.5}};
  const json xi{{"power_factorial", 1.0}};
  json units = json::array();
  for (int k = 0; k < 3; ++k) {
    json e = json::array({0.0, 0.0, 0.0});
    e[k] = 1.0;
    units.push_back(e);
  }
  b.add("exponential-example", "covariance",
        {{"space", space},
         {"variable", xi},
         {"basis", units},
         {"closedness", {generated({{"geometric", 0.5}}, 2), json::array({1.0, -1.0})}}});
  b.add("exponential-centered", "covariance", {{"space", space}, {"variable", xi}, {"basis", units}, {"centered", true}});
  b.add("head-in", "second_moment",
        {{"space", space}, {"variable", xi}, {"functional", to_json(random::gaussian_vector(b.rng(), 6))}, {"expect", "in"}});
  b.add("geometric-in", "second_moment",
        {{"space", space}, {"variable", xi}, {"functional", generated({{"geometric", 0.5}})}, {"expect", "in"}});
  b.add("harmonic-out", "second_moment",
        {{"space", space}, {"variable", xi}, {"functional", generated(power(-1.0))}, {"expect", "out"}});
  b.add("pettis-mean", "weak_expectation", {{"space", space}, {"variable", xi}, {"coords", 6}});
  {
    const Index d = 3, atoms = 6;
    std::vector<double> w(atoms);
    for (auto& x : w) x = random::uniform(b.rng(), 0.5, 2.0);
    double total = 0.0;
    for (double x : w) total += x;
    for (auto& x : w) x /= total;
    b.add("table-operator", "covariance",
          {{"space", {{"finite", w}}},
           {"variable", {{"table", to_json(random::gaussian_matrix(b.rng(), d, atoms))}}},
           {"basis", {json::array({1.0, 0.0, 0.0}), json::array({0.0, 1.0, 0.0}), json::array({0.0, 0.0, 1.0})}},
           {"centered", true},
           {"operator", true}});
  }
  for (int i = 0; i < 3; ++i) {
    const Index d = 2 + i % 2;
    const auto weights = [&](Index n) {
      std::vector<double> w(n);
      double total = 0.0;
      for (auto& x : w) total += (x = random::uniform(b.rng(), 0.5, 2.0));
      for (auto& x : w) x /= total;
      return w;
    };
    const Index na = d + 1 + i, nb = d + 2;
    const auto mu = weights(na), nu = weights(nb);
    b.add("independent-sum-d" + std::to_string(d), "independent_sum",
          {{"mu", {{"finite", mu}}},
           {"xi", {{"table", to_json(random::gaussian_matrix(b.rng(), d, na))}}},
           {"nu", {{"finite", nu}}},
           {"eta", {{"table", to_json(random::gaussian_matrix(b.rng(), d, nb))}}}});
  }
  b.add("independent-sum-diagonal", "independent_sum_diagonal",
        {{"var_xi", {{"geometric", 0.5}}}, {"var_eta", {{"geometric", 1.0 / 3.0}}}, {"coords", 5}});
  b.add("harmonic-claimed-in", "second_moment",
        {{"space", space}, {"variable", xi}, {"functional", generated(power(-1.0))}, {"expect", "in"}}, Verdict::Fail);
  b.add("harmonic-closedness", "covariance",
        {{"space", space}, {"variable", xi}, {"basis", units}, {"closedness", {generated(power(-1.0), 2)}}},
        Verdict::Fail);
  return b.take();
}

std::vector<Scenario> elliptic(std::uint64_t seed) {
  Builder b("elliptic", seed, 6);
  const json laplace{{"a", "1"}, {"b", "0"}};
  const json reaction{{"a", "1"}, {"b", "1"}};
  b.add("convergence-order", "elliptic_convergence",
        {{"problem", laplace}, {"g", "pi^2 * sin(pi * x)"}, {"exact", "sin(pi * x)"}, {"elements", {16, 32, 64, 128}}});
  b.add("constant-load", "elliptic_solve",
        {{"problem", laplace}, {"elements", 64}, {"g", "1"}, {"exact", "x * (1 - x) / 2"}, {"max_error", 1e-4}});
  b.add("variable-coefficient", "elliptic_solve", {{"problem", {{"a", "1 + x"}, {"b", "0"}}}, {"elements", 64}, {"g", "1"}});
  b.add("singular-potential", "elliptic_solve",
        {{"problem", {{"a", "1"}, {"b", "x^(-0.5)"}}}, {"elements", 64}, {"g", "exp(x)"}});
  b.add("graded-mesh", "elliptic_solve",
        {{"problem", {{"a", "2 + sin(x)"}, {"b", "x"}, {"length", 2.0}}}, {"elements", 40}, {"grading", 1.5}, {"g", "cos(x)"}});
  b.add("sobolev-p2", "sobolev_lower_bound", {{"problem", laplace}, {"elements", 32}});
  b.add("sobolev-p4", "sobolev_lower_bound", {{"problem", {{"a", "1"}, {"b", "0"}, {"p", 4.0}}}, {"elements", 32}});
  b.add("poincare-h64", "discrete_poincare", {{"elements", 64}});
  for (int m : {16, 32, 64})
    b.add("dirichlet-neumann-m" + std::to_string(m), "dirichlet_vs_neumann", {{"problem", reaction}, {"elements", m}});
  b.add("ellipticity-violated", "elliptic_solve",
        {{"problem", {{"a", "1 - 2 * x"}, {"b", "0"}, {"gamma", 0.5}}}, {"elements", 16}, {"g", "1"}}, Verdict::Fail);
  b.add("reversed-dirichlet-neumann", "dirichlet_vs_neumann",
        {{"problem", reaction}, {"elements", 16}, {"expect", "B>=A"}}, Verdict::Fail);
  return b.take();
}

}  // namespace

std::vector<Scenario> suite(const std::string& name, std::uint64_t seed) {
  using Generator = std::vector<Scenario> (*)(std::uint64_t);
  const std::vector<std::pair<std::string, Generator>> generators{
      {"representation", representation}, {"friedrichs", friedrichs}, {"ordering", ordering},
      {"formsum", formsum},               {"covariance", covariance}, {"elliptic", elliptic}};
  std::vector<Scenario> out;
  for (const auto& [suite_name, gen] : generators)
    if (name == "all" || name == suite_name) {
      auto part = gen(seed);
      out.insert(out.end(), part.begin(), part.end());
    }
  if (out.empty()) throw io::SchemaError("unknown suite '" + name + "'");
  return out;
}

}  // namespace formcalc::scenario
