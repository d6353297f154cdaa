#pragma once

#include <stdexcept>

#include <json.hpp>

#include "formcalc/covariance.hpp"
#include "formcalc/duality.hpp"
#include "formcalc/elliptic.hpp"
#include "formcalc/operator.hpp"
#include "formcalc/series.hpp"

namespace formcalc::io {

using json = nlohmann::json;

/// Malformed operands; distinct from mathematical failures of the library.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Complex numbers are [re, im]; a bare number reads as real.
json to_json(cplx z);
cplx complex_from(const json& j);

json to_json(const CVector& v);
CVector vector_from(const json& j);

/// Matrices are arrays of rows.
json to_json(const CMatrix& m);
CMatrix matrix_from(const json& j);

/// {"terms": [{"coeff", "power", "ratio"}]}, or one of the shorthands
/// {"power": a, "coeff": c}, {"geometric": r, "coeff": c}, {"exponential": s, "coeff": c}.
json to_json(const SeqRule& r);
SeqRule rule_from(const json& j);

/// Dense elements are plain arrays; sequence elements are {"head", "tail"?}
/// (a plain array is a finitely supported sequence).
json to_json(const Vector& x);
Vector element_from(const json& j, Backend backend);
Functional functional_from(const json& j, Backend backend);

/// {"matrix", "mapping"?}, {"basis", "action", "mapping"?} or
/// {"diagonal": rule, "truncation", "domain": "finite" | "maximal"}.
json to_json(const DenseOperator& op);
DenseOperator operator_from(const json& j);

Mapping mapping_from(const std::string& s);

/// {"finite": [weights]}, {"exponential": rate} or {"generated": rule}.
DiscreteProbabilitySpace space_from(const json& j);
/// {"table": matrix} or {"power_factorial": scale, "offset"?: vector}.
RandomVariable variable_from(const json& j);

/// {"length"?, "a", "b", "gamma"?, "p"?}; a and b are expressions or numbers.
EllipticProblem problem_from(const json& j);
Expression expression_from(const json& j);

}  // namespace formcalc::io
