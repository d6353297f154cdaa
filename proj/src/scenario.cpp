#include "formcalc/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "formcalc/covariance.hpp"
#include "formcalc/elliptic.hpp"
#include "formcalc/factorization.hpp"
#include "formcalc/formsum.hpp"
#include "formcalc/friedrichs.hpp"
#include "formcalc/random.hpp"
#include "formcalc/serialize.hpp"
#include "formcalc/tolerances.hpp"

namespace formcalc::scenario {

namespace {

using io::SchemaError;

json number(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

struct Context {
  const Scenario& s;
  Result& out;

  double tol(double base) const { return base * s.tolerance_scale * Tolerances::scale(); }
  bool has(const char* key) const { return s.operands.contains(key); }
  const json& at(const char* key) const {
    if (!has(key)) throw SchemaError(s.id + ": missing operand '" + key + "'");
    return s.operands.at(key);
  }
  template <class T>
  T get(const char* key, T fallback) const {
    return has(key) ? at(key).get<T>() : fallback;
  }
  DenseOperator op(const char* key) const { return io::operator_from(at(key)); }

  std::vector<Vector> vectors(const char* key, Backend backend) const {
    std::vector<Vector> out;
    if (!has(key)) return out;
    for (const auto& v : at(key)) out.push_back(io::element_from(v, backend));
    return out;
  }
  Mesh mesh() const {
    const double length = s.operands.contains("problem") ? at("problem").value("length", 1.0) : get("length", 1.0);
    const int m = get("elements", 32);
    const int quad = get("quadrature", 4);
    if (has("grading")) return Mesh::graded(length, m, at("grading").get<double>(), quad);
    return Mesh::uniform(length, m, quad);
  }
  DataRule rule(const char* key) const {
    const Expression e = io::expression_from(at(key));
    return [e](double x) { return e(x); };
  }
};

DualityPair pair_for(const DenseOperator& a, double p) {
  return a.backend() == Backend::Dense ? DualityPair::dense(a.ambient_dimension(), p)
                                       : DualityPair::sequence(a.domain_dimension(), p);
}

Order order_from(const std::string& s) {
  for (Order o : {Order::AGeqB, Order::BGeqA, Order::Equal, Order::Incomparable})
    if (s == to_string(o)) return o;
  throw SchemaError("unknown order '" + s + "'");
}

std::string gram_csv(const CMatrix& g) {
  std::ostringstream os;
  os.precision(17);
  os << "i,j,re,im\n";
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j) os << i << ',' << j << ',' << g(i, j).real() << ',' << g(i, j).imag() << '\n';
  return os.str();
}

// --- operations -----------------------------------------------------------

void op_representation(Context& c, Report& rep) {
  const CMatrix gram = io::matrix_from(c.at("gram"));
  const SesquilinearForm t = c.has("basis") ? SesquilinearForm::dense(io::matrix_from(c.at("basis")), gram)
                                            : SesquilinearForm::on_standard_basis(gram);
  const RepresentationResult r = associated_operator(t, DualityPair::dense(t.ambient_dimension(), c.get("p", 2.0)));
  rep.check("AB = I", r.ab_residual, c.tol(1e-10));
  rep.check("BA = I", r.ba_residual, c.tol(1e-10));
  rep.check("A self-adjoint", r.selfadjoint_residual, c.tol(1e-12));
  rep.check("||B|| - 1/gamma", std::max(0.0, r.b_norm - r.b_norm_bound), c.tol(1e-8));
  rep.data()["gamma"] = r.gamma.gamma;
  rep.data()["gamma_kind"] = to_string(r.gamma.kind);
  rep.data()["b_norm"] = r.b_norm;
}

void op_friedrichs(Context& c, Report& rep) {
  const DenseOperator a = c.op("operator");
  const FriedrichsResult fr = friedrichs(a, pair_for(a, c.get("p", 2.0)));
  rep.merge(verify_friedrichs(a, fr));
  rep.data()["gamma"] = fr.gamma_preserved.gamma;
  if (!c.has("probes")) return;
  int i = 0;
  for (const auto& probe : c.at("probes")) {
    const Vector y = io::element_from(probe.at("vector"), a.backend());
    const bool expected = probe.at("in_domain").get<bool>();
    rep.require_true("probe " + std::to_string(i++) + " domain membership", in_domain(fr.A_F, y) == expected);
  }
}

void op_core_check(Context& c, Report& rep) {
  const DenseOperator a = c.op("operator");
  const FriedrichsResult fr = friedrichs(a, pair_for(a, c.get("p", 2.0)));
  rep.merge(core_check(a, fr, c.vectors("samples", a.backend())));
}

void op_factorize(Context& c, Report& rep) {
  const DenseOperator a = c.op("operator");
  const FactorizationResult fr = factorize(a);
  rep.check("JJ* = A", fr.identity_residual, c.tol(1e-10));
  rep.check("kernel quotient", fr.well_defined_residual, c.tol(1e-10));
  rep.data()["rank"] = fr.rank;
  const int samples = c.get("hilbert_samples", 0);
  if (samples > 0) {
    random::Engine rng(c.s.seed);
    std::vector<CVector> ys;
    for (int i = 0; i < samples; ++i) ys.push_back(random::gaussian_vector(rng, a.ambient_dimension()));
    rep.merge(hilbert_consistency(a, ys));
  }
}

void op_form_on_x(Context& c, Report& rep) {
  const DenseOperator a = c.op("operator");
  const FormEvaluator eval(a);
  const FormValue fv = eval(io::element_from(c.at("vector"), a.backend()));
  if (c.has("expect")) {
    const std::string e = c.at("expect").get<std::string>();
    if (e != "finite" && e != "infinite") throw SchemaError(c.s.id + ": expect must be 'finite' or 'infinite'");
    rep.require_true("finiteness", fv.finite() == (e == "finite"));
  }
  if (c.has("value")) {
    const double v = c.at("value").get<double>();
    rep.check("value", std::abs(fv.value - v) / std::max(1.0, std::abs(v)), c.tol(1e-6));
  }
  if (fv.finite() && std::isfinite(fv.cross_check)) rep.check("constrained maximum", fv.cross_check_residual, c.tol(1e-6));
  rep.data()["value"] = number(fv.value);
  rep.data()["kind"] = to_string(fv.kind);
}

void op_compare(Context& c, Report& rep) {
  const DenseOperator a = c.op("a"), b = c.op("b");
  CompareOptions opts;
  opts.seed = c.s.seed;
  const OrderingReport o = compare(a, b, c.vectors("samples", a.backend()), opts);
  if (c.has("expect")) rep.require_true("order", o.verdict == order_from(c.at("expect").get<std::string>()));
  rep.data()["order"] = to_string(o.verdict);
  rep.data()["probes"] = o.probes.size();
}

void op_antisymmetry(Context& c, Report& rep) {
  CompareOptions opts;
  opts.seed = c.s.seed;
  rep.merge(antisymmetry_check(c.op("a"), c.op("b"), opts));
}

void op_form_sum(Context& c, Report& rep) {
  FormSumOptions opts;
  opts.allow_zero_lower_bound = c.get("allow_zero_lower_bound", false);
  opts.seed = c.s.seed;
  const FormSumResult r = form_sum(c.op("a"), c.op("b"), opts);
  rep.check("[J*y, J*y] = ((A+B)y, y)", r.joint_residual, c.tol(1e-9));
  rep.check("A + B inside form sum", r.extension_residual, c.tol(1e-9));
  if (!std::isnan(r.collapse_residual)) rep.check("collapse to A + B", r.collapse_residual, c.tol(1e-12));
  rep.data()["gamma_a"] = r.gamma_a.gamma;
  if (r.AB.backend() == Backend::Dense) rep.data()["dim_hab"] = r.dim_hab;
}

void op_lift_commutant(Context& c, Report& rep) {
  const DenseOperator a = c.op("a");
  const CommutantLift l = lift_commutant(a, c.op("e"), c.s.seed);
  rep.check("E* A inside A E", l.commutation_residual, c.tol(1e-9));
  rep.check("E(dom A) inside dom A", l.invariance_residual, c.tol(1e-9));
  rep.check("lift well defined", l.well_defined_residual, c.tol(1e-9));
  rep.check("[E^ h] / ([h] r(E^2)^(1/2)) - 1", std::max(0.0, l.bound_ratio - 1.0), c.tol(1e-8));
  rep.check("||E^|| / r(E^2)^(1/2) - 1", std::max(0.0, l.bound_exact - 1.0), c.tol(1e-8));
  rep.check("E^ Hermitian", l.selfadjoint_residual, c.tol(1e-10));
  rep.data()["r_E2"] = l.r_E2;
  if (c.has("resolvent_points"))
    for (const auto& p : c.at("resolvent_points")) {
      const double lambda = p.get<double>();
      rep.check("resolvent at " + std::to_string(lambda), resolvent_residual(a, l, lambda), c.tol(1e-8));
    }
}

void op_commutation_formsum(Context& c, Report& rep) {
  rep.merge(commutation_formsum(c.op("a"), c.op("b"), c.op("e")));
}

void op_spectrum_inclusion(Context& c, Report& rep) { rep.merge(spectrum_inclusion(c.op("a"), c.op("e"))); }

struct Probability {
  DiscreteProbabilitySpace mu;
  RandomVariable xi;
  Backend backend;
};

Probability probability(const Context& c, const char* space = "space", const char* variable = "variable") {
  RandomVariable xi = io::variable_from(c.at(variable));
  const Backend b = xi.kind() == RandomVariable::Kind::Table ? Backend::Dense : Backend::Sequence;
  return {io::space_from(c.at(space)), std::move(xi), b};
}

std::vector<Functional> functionals(const Context& c, const char* key, Backend backend) {
  std::vector<Functional> out;
  if (c.has(key))
    for (const auto& f : c.at(key)) out.push_back(io::functional_from(f, backend));
  return out;
}

void op_covariance(Context& c, Report& rep) {
  const Probability pr = probability(c);
  const std::vector<Functional> basis = functionals(c, "basis", pr.backend);
  const bool centered = c.get("centered", false);
  const SesquilinearForm t = covariance_form(pr.mu, pr.xi, basis, centered);
  const double scale = std::max(1.0, t.gram().norm());
  rep.check("Gram Hermitian", linalg::hermitian_residual(t.gram()), c.tol(1e-12));
  rep.check("Gram positive", std::max(0.0, -t.min_gram_eigenvalue()) / scale, c.tol(1e-12));
  c.out.tables["covariance_gram"] = gram_csv(t.gram());
  rep.data()["min_eigenvalue"] = t.min_gram_eigenvalue();

  const std::vector<Functional> limits = functionals(c, "closedness", pr.backend);
  if (!limits.empty()) {
    const ClosednessWitness w = covariance_closedness(pr.mu, pr.xi, limits);
    for (std::size_t i = 0; i < w.runs.size(); ++i) {
      const ClosednessRun& run = w.runs[i];
      rep.check("closedness run " + std::to_string(i), run.tails.back() / std::max(1.0, run.limit_energy), c.tol(1e-10));
      rep.data()["closedness"].push_back({{"truncations", run.truncations}, {"tails", run.tails}});
    }
  }
  if (c.get("operator", false)) {
    const DualityPair pair = DualityPair::dense(basis.empty() ? 1 : basis.front().size(), c.get("p", 2.0));
    const RepresentationResult r = covariance_operator(pr.mu, pr.xi, basis, pair, centered);
    rep.check("covariance operator AB = I", r.ab_residual, c.tol(1e-10));
    rep.check("covariance operator self-adjoint", r.selfadjoint_residual, c.tol(1e-12));
    rep.data()["gamma"] = r.gamma.gamma;
  }
}

void op_second_moment(Context& c, Report& rep) {
  const Probability pr = probability(c);
  const SecondMomentCertificate cert = second_moment(pr.mu, pr.xi, io::functional_from(c.at("functional"), pr.backend));
  const char* verdict = cert.verdict == Membership::In ? "in" : cert.verdict == Membership::Out ? "out" : "uncertified";
  rep.data()["membership"] = verdict;
  if (!cert.reason.empty()) rep.data()["reason"] = cert.reason;
  for (const auto& [n, s] : cert.growth) rep.data()["growth"].push_back({n, number(s)});
  if (cert.verdict == Membership::Uncertified) {
    rep.mark_uncertified(cert.reason);
    return;
  }
  if (c.has("expect")) rep.require_true("membership", c.at("expect").get<std::string>() == verdict);
}

void op_weak_expectation(Context& c, Report& rep) {
  const Probability pr = probability(c);
  const WeakExpectation w = weak_expectation(pr.mu, pr.xi, c.get("coords", Index{8}), c.s.seed);
  rep.check("f(E xi) = E f(xi)", w.spot_check_residual, c.tol(1e-10));
  rep.check("coordinate tails", w.tail_bound, c.tol(1e-10));
  rep.data()["mean"] = io::to_json(w.mean.coords());
}

void op_independent_sum(Context& c, Report& rep) {
  const Probability a = probability(c, "mu", "xi"), b = probability(c, "nu", "eta");
  rep.merge(independent_sum(a.mu, a.xi, b.mu, b.xi));
}

void op_independent_sum_diagonal(Context& c, Report& rep) {
  rep.merge(independent_sum_diagonal(io::rule_from(c.at("var_xi")), io::rule_from(c.at("var_eta")),
                                     c.get("coords", Index{6})));
}

void op_elliptic_solve(Context& c, Report& rep) {
  const EllipticProblem pr = io::problem_from(c.at("problem"));
  const Mesh mesh = c.mesh();
  const WeakSolution s = weak_solve(pr, mesh, c.rule("g"));
  rep.check("Galerkin residual", s.residual, c.tol(1e-10));
  rep.require_true("data exponent admissible", s.q_admissible);
  if (c.has("exact")) {
    const double err = l2_error(mesh, s.nodal, c.rule("exact"));
    rep.check("L2 error", err, c.tol(c.get("max_error", 1e-2)));
    rep.data()["l2_error"] = err;
  }
  rep.data()["solver"] = s.solver;
  rep.data()["energy_norm"] = s.energy_norm;
  rep.data()["lp_norm"] = s.lp_norm;
  c.out.tables["solution"] = solution_csv(mesh, s.nodal);
}

void op_elliptic_convergence(Context& c, Report& rep) {
  const EllipticProblem pr = io::problem_from(c.at("problem"));
  const auto elements = c.get("elements", std::vector<int>{16, 32, 64, 128});
  const auto range = c.get("ratio_range", std::vector<double>{3.6, 4.4});
  if (range.size() != 2) throw SchemaError(c.s.id + ": ratio_range needs two numbers");
  const std::vector<ConvergenceRow> rows = convergence_study(pr, c.rule("g"), c.rule("exact"), elements);
  for (const auto& row : rows) {
    rep.data()["table"].push_back(
        {{"elements", row.elements}, {"h", row.h}, {"l2_error", row.l2_error}, {"ratio", std::isnan(row.ratio) ? json(nullptr) : json(row.ratio)}});
    if (std::isnan(row.ratio)) continue;
    const double outside = std::max({0.0, range[0] - row.ratio, row.ratio - range[1]});
    rep.check("order ratio at m = " + std::to_string(row.elements), outside, 0.0);
  }
  c.out.tables["convergence"] = convergence_csv(rows);
}

void op_sobolev_lower_bound(Context& c, Report& rep) {
  const EllipticProblem pr = io::problem_from(c.at("problem"));
  const EllipticLowerBound lb = sobolev_lower_bound(pr, c.mesh(), c.get("samples", 100), c.s.seed);
  rep.check("sampled ratio violations", lb.violations, 0.0);
  rep.data()["gamma"] = lb.certificate.gamma;
  rep.data()["route"] = lb.route;
  rep.data()["min_sampled_ratio"] = lb.min_sampled_ratio;
}

void op_discrete_poincare(Context& c, Report& rep) {
  const Mesh mesh = c.mesh();
  const double length = mesh.nodes.back();
  const double lambda = discrete_poincare_constant(mesh);
  const double continuum = std::numbers::pi * std::numbers::pi / (length * length);
  rep.check("relative gap to pi^2 / L^2", std::abs(lambda / continuum - 1.0), c.get("relative_tolerance", 0.02));
  rep.data()["lambda_min"] = lambda;
}

void op_dirichlet_vs_neumann(Context& c, Report& rep) {
  const EllipticProblem pr = io::problem_from(c.at("problem"));
  const Mesh mesh = c.mesh();
  const DirichletNeumannReport r =
      dirichlet_vs_neumann(pr, mesh, standard_probes(mesh, c.get("random_probes", 6), c.s.seed));
  rep.require_true("order", r.ordering.verdict == order_from(c.get<std::string>("expect", "A>=B")));
  rep.data()["order"] = to_string(r.ordering.verdict);
  rep.data()["kappa"] = r.kappa;
  for (const auto& p : r.probes)
    rep.data()["probes"].push_back({{"origin", p.origin}, {"dirichlet", number(p.dirichlet)}, {"neumann", p.neumann}});
}

struct Operation {
  std::vector<std::string> claims;
  std::function<void(Context&, Report&)> fn;
};

const std::map<std::string, Operation>& registry() {
  static const std::map<std::string, Operation> ops{
      {"representation", {{"Thm1", "Lem1"}, op_representation}},
      {"friedrichs", {{"Thm2"}, op_friedrichs}},
      {"core_check", {{"Thm3"}, op_core_check}},
      {"factorize", {{"Lem2"}, op_factorize}},
      {"form_on_X", {{"Lem3"}, op_form_on_x}},
      {"compare", {{"Def-Order"}, op_compare}},
      {"antisymmetry", {{"Def-Order"}, op_antisymmetry}},
      {"form_sum", {{"Thm4"}, op_form_sum}},
      {"lift_commutant", {{"Eq7", "Lem4", "Lem5"}, op_lift_commutant}},
      {"commutation_formsum", {{"Thm5", "Eq7"}, op_commutation_formsum}},
      {"spectrum_inclusion", {{"Thm6"}, op_spectrum_inclusion}},
      {"covariance", {{"Thm7"}, op_covariance}},
      {"second_moment", {{"Thm7"}, op_second_moment}},
      {"weak_expectation", {{"Thm7"}, op_weak_expectation}},
      {"independent_sum", {{"Thm8"}, op_independent_sum}},
      {"independent_sum_diagonal", {{"Thm8"}, op_independent_sum_diagonal}},
      {"elliptic_solve", {{"Elliptic"}, op_elliptic_solve}},
      {"elliptic_convergence", {{"Elliptic"}, op_elliptic_convergence}},
      {"sobolev_lower_bound", {{"Elliptic"}, op_sobolev_lower_bound}},
      {"discrete_poincare", {{"Elliptic"}, op_discrete_poincare}},
      {"dirichlet_vs_neumann", {{"Elliptic", "Thm3"}, op_dirichlet_vs_neumann}},
  };
  return ops;
}

Verdict verdict_from(const std::string& s) {
  for (Verdict v : {Verdict::Pass, Verdict::Fail, Verdict::Uncertified})
    if (s == to_string(v)) return v;
  throw SchemaError("unknown verdict '" + s + "'");
}

}  // namespace

std::vector<std::string> operations() {
  std::vector<std::string> names;
  for (const auto& [name, op] : registry()) names.push_back(name);
  return names;
}

std::vector<std::string> claims_of(const std::string& op) {
  const auto it = registry().find(op);
  if (it == registry().end()) throw SchemaError("unknown operation '" + op + "'");
  return it->second.claims;
}

json Result::to_json(bool timing) const {
  json j = report.to_json();
  j["schema"] = kReportSchema;
  j["id"] = scenario.id;
  j["op"] = scenario.op;
  j["seed"] = scenario.seed;
  j["expect"] = to_string(scenario.expect);
  if (!error.empty()) j["error"] = error;
  if (!tables.empty()) {
    j["tables"] = json::array();
    for (const auto& [name, csv] : tables) j["tables"].push_back(name);
  }
  if (timing) j["wall_time"] = wall_time;
  return j;
}

std::vector<Scenario> parse(const json& doc) {
  try {
    if (!doc.is_object()) throw SchemaError("scenario file must be a JSON object");
    if (doc.value("schema", std::string()) != kScenarioSchema)
      throw SchemaError(std::string("schema must be '") + kScenarioSchema + "'");
    std::vector<Scenario> out;
    std::set<std::string> ids;
    for (const auto& j : doc.at("scenarios")) {
      Scenario s;
      s.id = j.at("id").get<std::string>();
      s.op = j.at("op").get<std::string>();
      if (!registry().count(s.op)) throw SchemaError(s.id + ": unknown operation '" + s.op + "'");
      if (!ids.insert(s.id).second) throw SchemaError("duplicate scenario id '" + s.id + "'");
      s.operands = j.value("operands", json::object());
      if (!s.operands.is_object()) throw SchemaError(s.id + ": operands must be an object");
      s.seed = j.value("seed", std::uint64_t{1});
      if (j.contains("tolerances")) s.tolerance_scale = j["tolerances"].value("scale", 1.0);
      if (!(s.tolerance_scale > 0.0)) throw SchemaError(s.id + ": tolerance scale must be positive");
      s.expect = verdict_from(j.value("expect", std::string("pass")));
      out.push_back(std::move(s));
    }
    return out;
  } catch (const json::exception& e) {
    throw SchemaError(e.what());
  }
}

json to_json(const std::vector<Scenario>& scenarios) {
  json list = json::array();
  for (const auto& s : scenarios) {
    json j{{"id", s.id}, {"op", s.op}, {"operands", s.operands}, {"seed", s.seed}, {"expect", to_string(s.expect)}};
    if (s.tolerance_scale != 1.0) j["tolerances"] = {{"scale", s.tolerance_scale}};
    list.push_back(std::move(j));
  }
  return {{"schema", kScenarioSchema}, {"scenarios", list}};
}

Result run(const Scenario& s) {
  const auto it = registry().find(s.op);
  if (it == registry().end()) throw SchemaError(s.id + ": unknown operation '" + s.op + "'");
  Result out;
  out.scenario = s;
  Report rep;
  for (const auto& tag : it->second.claims) rep.add_claim(tag);
  const auto start = std::chrono::steady_clock::now();
  try {
    Context ctx{s, out};
    it->second.fn(ctx, rep);
  } catch (const Error& e) {
    out.error = e.what();
    if (e.uncertified())
      rep.mark_uncertified(e.what());
    else
      rep.require_true(std::string("raised ") + to_string(e.code()), false);
  } catch (const json::exception& e) {
    throw SchemaError(s.id + ": " + e.what());
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.report = std::move(rep);
  return out;
}

std::vector<Result> run_all(const std::vector<Scenario>& scenarios, int jobs) {
  std::vector<Result> results(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < scenarios.size();) {
      try {
        results[i] = run(scenarios[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, scenarios.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::sort(results.begin(), results.end(),
            [](const Result& a, const Result& b) { return a.scenario.id < b.scenario.id; });
  return results;
}

int exit_code(const std::vector<Result>& results) {
  bool uncertified = false;
  for (const auto& r : results) {
    if (r.verdict() == Verdict::Fail) return 2;
    uncertified |= r.verdict() == Verdict::Uncertified;
  }
  return uncertified ? 3 : 0;
}

int suite_exit_code(const std::vector<Result>& results) {
  bool uncertified = false;
  for (const auto& r : results) {
    if (r.matched()) continue;
    if (r.verdict() != Verdict::Uncertified) return 2;
    uncertified = true;
  }
  return uncertified ? 3 : 0;
}

json summary(const std::vector<Result>& results, const json& header, bool timing) {
  json j = header;
  j["schema"] = kReportSchema;
  json list = json::array();
  json coverage = json::object();
  std::map<std::string, int> counts{{"pass", 0}, {"fail", 0}, {"uncertified", 0}};
  json unexpected = json::array();
  double total = 0.0;
  for (const auto& r : results) {
    json entry{{"id", r.scenario.id},
               {"op", r.scenario.op},
               {"claims", r.report.claims()},
               {"verdict", to_string(r.verdict())},
               {"expect", to_string(r.scenario.expect)},
               {"max_residual", number(r.report.max_residual())}};
    if (!r.error.empty()) entry["error"] = r.error;
    if (timing) entry["wall_time"] = r.wall_time;
    list.push_back(std::move(entry));
    ++counts[to_string(r.verdict())];
    if (!r.matched()) unexpected.push_back(r.scenario.id);
    if (r.verdict() == Verdict::Pass)
      for (const auto& tag : r.report.claims()) coverage[tag].push_back(r.scenario.id);
    for (const auto& [name, csv] : r.tables)
      if (name == "convergence") j["convergence_tables"][r.scenario.id] = r.report.data().value("table", json::array());
    total += r.wall_time;
  }
  j["scenarios"] = list;
  j["counts"] = counts;
  j["coverage"] = coverage;
  j["unexpected"] = unexpected;
  if (timing) j["wall_time"] = total;
  return j;
}

}  // namespace formcalc::scenario
