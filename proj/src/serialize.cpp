#include "formcalc/serialize.hpp"

#include <cmath>

namespace formcalc::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw SchemaError(what); }

double number(const json& j, const char* what) {
  if (!j.is_number()) bad(std::string(what) + " must be a number");
  return j.get<double>();
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

json real_or_pair(double re, double im) {
  if (im == 0.0) return re;
  return json::array({re, im});
}

}  // namespace

json to_json(cplx z) { return real_or_pair(z.real(), z.imag()); }

cplx complex_from(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], "real part"), number(j[1], "imaginary part")};
  bad("complex values are numbers or [re, im]");
}

json to_json(const CVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

CVector vector_from(const json& j) {
  if (!j.is_array()) bad("vector must be an array");
  CVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = complex_from(j[i]);
  return v;
}

json to_json(const CMatrix& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(to_json(CVector(m.row(i).transpose())));
  return out;
}

CMatrix matrix_from(const json& j) {
  if (!j.is_array() || j.empty()) bad("matrix must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) bad("matrix rows must be non-empty arrays");
  CMatrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) bad("matrix rows must have equal length");
    for (std::size_t k = 0; k < cols; ++k) m(static_cast<Index>(i), static_cast<Index>(k)) = complex_from(j[i][k]);
  }
  return m;
}

json to_json(const SeqRule& r) {
  json terms = json::array();
  for (const auto& t : r.terms()) terms.push_back({{"coeff", to_json(t.coeff)}, {"power", t.power}, {"ratio", t.ratio}});
  return {{"terms", terms}};
}

SeqRule rule_from(const json& j) {
  if (!j.is_object()) bad("rule must be an object");
  const cplx c = j.contains("coeff") ? complex_from(j["coeff"]) : cplx(1.0);
  if (j.contains("terms")) {
    std::vector<SeqTerm> terms;
    for (const auto& t : j["terms"]) {
      SeqTerm term;
      if (t.contains("coeff")) term.coeff = complex_from(t["coeff"]);
      if (t.contains("power")) term.power = number(t["power"], "power");
      if (t.contains("ratio")) term.ratio = number(t["ratio"], "ratio");
      terms.push_back(term);
    }
    return SeqRule(std::move(terms));
  }
  if (j.contains("power")) return SeqRule::power(number(j["power"], "power"), c);
  if (j.contains("geometric")) return SeqRule::geometric(number(j["geometric"], "geometric"), c);
  if (j.contains("exponential")) return SeqRule::exponential(number(j["exponential"], "exponential"), c);
  if (j.contains("constant")) return SeqRule::constant(complex_from(j["constant"]));
  bad("rule needs 'terms', 'power', 'geometric', 'exponential' or 'constant'");
}

json to_json(const Vector& x) {
  if (x.backend() == Backend::Dense) return to_json(x.coords());
  json out{{"head", to_json(x.coords())}};
  if (x.tail_rule()) out["tail"] = to_json(*x.tail_rule());
  return out;
}

template <class E>
E element_impl(const json& j, Backend backend) {
  if (backend == Backend::Dense) return E::dense(vector_from(j));
  if (j.is_array()) return E::finite(vector_from(j));
  if (j.is_object() && j.contains("generated")) {
    const Index n = j.contains("truncation") ? j["truncation"].get<Index>() : 1;
    return E::generated(rule_from(j["generated"]), n);
  }
  std::optional<SeqRule> tail;
  if (j.contains("tail")) tail = rule_from(j["tail"]);
  const CVector head = j.contains("head") ? vector_from(j["head"]) : CVector();
  return E::sequence(head, tail);
}

Vector element_from(const json& j, Backend backend) { return element_impl<Vector>(j, backend); }
Functional functional_from(const json& j, Backend backend) { return element_impl<Functional>(j, backend); }

Mapping mapping_from(const std::string& s) {
  for (Mapping m : {Mapping::PrimalToDual, Mapping::DualToPrimal, Mapping::PrimalToPrimal, Mapping::DualToDual})
    if (s == to_string(m)) return m;
  bad("unknown mapping '" + s + "'");
}

json to_json(const DenseOperator& op) {
  if (op.diagonal()) {
    return {{"diagonal", to_json(op.diagonal()->coefficients)},
            {"truncation", op.domain_dimension()},
            {"domain", op.diagonal()->domain == DomainRule::Maximal ? "maximal" : "finite"},
            {"mapping", to_string(op.mapping())}};
  }
  return {{"basis", to_json(op.domain_basis())}, {"action", to_json(op.action())}, {"mapping", to_string(op.mapping())}};
}

DenseOperator operator_from(const json& j) {
  if (!j.is_object()) bad("operator must be an object");
  const Mapping mapping = j.contains("mapping") ? mapping_from(j["mapping"].get<std::string>()) : Mapping::PrimalToDual;
  if (j.contains("matrix")) return DenseOperator::from_matrix(matrix_from(j["matrix"]), mapping);
  if (j.contains("basis")) return DenseOperator::on_domain(matrix_from(j["basis"]), matrix_from(field(j, "action")), mapping);
  if (j.contains("diagonal")) {
    const std::string domain = j.value("domain", "finite");
    if (domain != "finite" && domain != "maximal") bad("domain must be 'finite' or 'maximal'");
    return DenseOperator::diagonal(rule_from(j["diagonal"]), j.value("truncation", 16),
                                   domain == "maximal" ? DomainRule::Maximal : DomainRule::FinitelySupported, mapping);
  }
  bad("operator needs 'matrix', 'basis'/'action' or 'diagonal'");
}

DiscreteProbabilitySpace space_from(const json& j) {
  if (j.contains("finite")) return DiscreteProbabilitySpace::finite(j["finite"].get<std::vector<double>>());
  if (j.contains("exponential")) return DiscreteProbabilitySpace::exponential(number(j["exponential"], "rate"));
  if (j.contains("generated")) return DiscreteProbabilitySpace::generated(rule_from(j["generated"]));
  bad("space needs 'finite', 'exponential' or 'generated'");
}

RandomVariable variable_from(const json& j) {
  if (j.contains("table")) return RandomVariable::table(matrix_from(j["table"]));
  if (j.contains("power_factorial")) {
    RandomVariable xi = RandomVariable::power_factorial(number(j["power_factorial"], "scale"));
    if (j.contains("offset")) xi = xi.with_offset(vector_from(j["offset"]));
    return xi;
  }
  bad("variable needs 'table' or 'power_factorial'");
}

Expression expression_from(const json& j) {
  if (j.is_number()) return Expression::constant(j.get<double>());
  if (j.is_string()) {
    try {
      return Expression::parse(j.get<std::string>());
    } catch (const std::exception& e) {
      bad(e.what());
    }
  }
  bad("expression must be a string or a number");
}

EllipticProblem problem_from(const json& j) {
  if (!j.is_object()) bad("problem must be an object");
  EllipticProblem pr;
  pr.length = j.value("length", 1.0);
  if (j.contains("a")) pr.a = expression_from(j["a"]);
  if (j.contains("b")) pr.b = expression_from(j["b"]);
  pr.gamma = j.value("gamma", 1.0);
  pr.p = j.value("p", 2.0);
  if (!(pr.length > 0.0) || !(pr.p > 1.0)) bad("problem needs length > 0 and p > 1");
  return pr;
}

}  // namespace formcalc::io
