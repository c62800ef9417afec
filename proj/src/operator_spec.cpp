#include "rkhs_dpp/operator_spec.hpp"

#include <cmath>
#include <string>

#include "rkhs_dpp/errors.hpp"

namespace rdpp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double checked(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::FamilyEvaluation, std::string(what) + " returned a non-finite value");
  }
  return v;
}

void validate_toeplitz(const ToeplitzRule& rule) {
  if (rule.coeffs.empty()) {
    throw Error(ErrorKind::InvalidArgument, "toeplitz rule needs at least c0");
  }
  if (rule.band < 0) throw Error(ErrorKind::InvalidArgument, "toeplitz band must be >= 0");
  for (double c : rule.coeffs) checked(c, "toeplitz coefficient");
}

}  // namespace

DiagonalRule DiagonalRule::power(double k, double scale) {
  DiagonalRule r;
  r.kind = Kind::Power;
  r.exponent = k;
  r.scale = scale;
  return r;
}

DiagonalRule DiagonalRule::constant(double value) {
  DiagonalRule r;
  r.kind = Kind::Constant;
  r.scale = value;
  return r;
}

DiagonalRule DiagonalRule::from_table(std::map<SiteIndex, double> values) {
  DiagonalRule r;
  r.kind = Kind::Table;
  r.table = std::move(values);
  return r;
}

double DiagonalRule::value(SiteIndex x) const {
  double v = 0.0;
  switch (kind) {
    case Kind::Power:
      v = scale * std::pow(1.0 + std::abs(static_cast<double>(x)), -exponent);
      break;
    case Kind::Constant:
      v = scale;
      break;
    case Kind::Table: {
      auto it = table.find(x);
      if (it == table.end()) {
        throw Error(ErrorKind::FamilyEvaluation,
                    "diagonal table has no value for site " + std::to_string(x));
      }
      v = it->second;
      break;
    }
  }
  if (!std::isfinite(v) || v <= 0.0) {
    throw Error(ErrorKind::FamilyEvaluation,
                "diagonal value at site " + std::to_string(x) + " is not finite and positive");
  }
  return v;
}

double ToeplitzRule::coefficient(std::int64_t d) const {
  const std::int64_t a = d < 0 ? -d : d;
  if (a > band || a >= static_cast<std::int64_t>(coeffs.size())) return 0.0;
  return coeffs[static_cast<std::size_t>(a)];
}

int ToeplitzRule::reach() const {
  return std::min(band, static_cast<int>(coeffs.size()) - 1);
}

double ToeplitzRule::tail_bound() const {
  double tail = 0.0;
  for (std::size_t d = static_cast<std::size_t>(band) + 1; d < coeffs.size(); ++d) {
    tail += 2.0 * std::abs(coeffs[d]);
  }
  return tail;
}

OperatorSpec::OperatorSpec(Family family) : family_(std::move(family)) {
  std::visit(Overloaded{
                 [](const ExplicitKernel& e) {
                   const auto n = static_cast<Eigen::Index>(e.sites.size());
                   if (e.matrix.rows() != n || e.matrix.cols() != n) {
                     throw Error(ErrorKind::InvalidArgument,
                                 "explicit matrix does not match its site list");
                   }
                   const double scale = std::max(1.0, e.matrix.cwiseAbs().maxCoeff());
                   if ((e.matrix - e.matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
                     throw Error(ErrorKind::InvalidArgument, "explicit matrix is not symmetric");
                   }
                 },
                 [](const DiagonalRule&) {},
                 [](const ToeplitzRule& t) { validate_toeplitz(t); },
                 [](const ConjugatedDiagonal& c) { validate_toeplitz(c.c); },
             },
             family_);
}

OperatorSpec OperatorSpec::identity() { return diagonal(DiagonalRule::constant(1.0)); }

OperatorSpec OperatorSpec::diagonal(DiagonalRule rule) { return OperatorSpec(std::move(rule)); }

OperatorSpec OperatorSpec::toeplitz(std::vector<double> coeffs, int band) {
  ToeplitzRule rule;
  rule.band = band < 0 ? static_cast<int>(coeffs.size()) - 1 : band;
  rule.coeffs = std::move(coeffs);
  return OperatorSpec(std::move(rule));
}

OperatorSpec OperatorSpec::conjugated(ToeplitzRule c, DiagonalRule d) {
  return OperatorSpec(ConjugatedDiagonal{std::move(c), std::move(d)});
}

OperatorSpec OperatorSpec::explicit_matrix(Window sites, Eigen::MatrixXd matrix) {
  return OperatorSpec(ExplicitKernel{std::move(sites), std::move(matrix)});
}

OperatorSpec OperatorSpec::conjugated_power(double k, double rho) {
  return conjugated(ToeplitzRule{{1.0, rho}, 1}, DiagonalRule::power(k));
}

double OperatorSpec::entry(SiteIndex x, SiteIndex y) const {
  return std::visit(
      Overloaded{
          [&](const ExplicitKernel& e) {
            const auto i = e.sites.index_of(x);
            const auto j = e.sites.index_of(y);
            if (!i || !j) {
              throw Error(ErrorKind::FamilyEvaluation,
                          "explicit kernel undefined at (" + std::to_string(x) + "," +
                              std::to_string(y) + ")");
            }
            return checked(e.matrix(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j)),
                           "explicit kernel");
          },
          [&](const DiagonalRule& d) { return x == y ? d.value(x) : 0.0; },
          [&](const ToeplitzRule& t) { return checked(t.coefficient(x - y), "toeplitz rule"); },
          [&](const ConjugatedDiagonal& cd) {
            // A(x,y) = sum_z C(z,x) alpha_z C(z,y), z within band reach of both.
            const SiteIndex r = cd.c.reach();
            const SiteIndex lo = std::max(x, y) - r;
            const SiteIndex hi = std::min(x, y) + r;
            double sum = 0.0;
            for (SiteIndex z = lo; z <= hi; ++z) {
              sum += cd.c.coefficient(z - x) * cd.d.value(z) * cd.c.coefficient(z - y);
            }
            return checked(sum, "conjugated rule");
          },
      },
      family_);
}

std::string_view OperatorSpec::family_name() const {
  return std::visit(Overloaded{
                        [](const ExplicitKernel&) { return std::string_view("explicit"); },
                        [](const DiagonalRule&) { return std::string_view("diagonal"); },
                        [](const ToeplitzRule&) { return std::string_view("toeplitz"); },
                        [](const ConjugatedDiagonal&) { return std::string_view("conjugated"); },
                    },
                    family_);
}

bool OperatorSpec::is_diagonal() const {
  if (std::holds_alternative<DiagonalRule>(family_)) return true;
  if (const auto* t = std::get_if<ToeplitzRule>(&family_)) return t->reach() == 0;
  if (const auto* c = std::get_if<ConjugatedDiagonal>(&family_)) return c->c.reach() == 0;
  const auto& e = std::get<ExplicitKernel>(family_);
  return e.matrix.isDiagonal(0.0);
}

// JSON

namespace {

nlohmann::json diagonal_to_json(const DiagonalRule& d) {
  switch (d.kind) {
    case DiagonalRule::Kind::Power: {
      nlohmann::json j{{"kind", "power"}, {"k", d.exponent}};
      if (d.scale != 1.0) j["scale"] = d.scale;
      return j;
    }
    case DiagonalRule::Kind::Constant:
      return {{"kind", "constant"}, {"value", d.scale}};
    case DiagonalRule::Kind::Table: {
      nlohmann::json values = nlohmann::json::object();
      for (const auto& [site, v] : d.table) values[std::to_string(site)] = v;
      return {{"kind", "table"}, {"values", values}};
    }
  }
  return {};
}

nlohmann::json toeplitz_to_json(const ToeplitzRule& t) {
  return {{"coeffs", t.coeffs}, {"band", t.band}};
}

DiagonalRule diagonal_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "power") {
    return DiagonalRule::power(j.at("k").get<double>(), j.value("scale", 1.0));
  }
  if (kind == "constant") return DiagonalRule::constant(j.at("value").get<double>());
  if (kind == "table") {
    std::map<SiteIndex, double> values;
    for (const auto& [key, v] : j.at("values").items()) {
      std::size_t used = 0;
      const long long site = std::stoll(key, &used);
      if (used != key.size()) {
        throw Error(ErrorKind::ConfigParse, "table key '" + key + "' is not a site");
      }
      values[site] = v.get<double>();
    }
    return DiagonalRule::from_table(std::move(values));
  }
  throw Error(ErrorKind::ConfigParse, "unknown diagonal kind '" + kind + "'");
}

ToeplitzRule toeplitz_from_json(const nlohmann::json& j) {
  ToeplitzRule t;
  t.coeffs = j.at("coeffs").get<std::vector<double>>();
  t.band = j.value("band", static_cast<int>(t.coeffs.size()) - 1);
  return t;
}

}  // namespace

nlohmann::json to_json(const OperatorSpec& spec) {
  return std::visit(
      Overloaded{
          [](const ExplicitKernel& e) {
            nlohmann::json rows = nlohmann::json::array();
            for (Eigen::Index i = 0; i < e.matrix.rows(); ++i) {
              std::vector<double> row(static_cast<std::size_t>(e.matrix.cols()));
              for (Eigen::Index k = 0; k < e.matrix.cols(); ++k) {
                row[static_cast<std::size_t>(k)] = e.matrix(i, k);
              }
              rows.push_back(row);
            }
            return nlohmann::json{{"family", "explicit"},
                                  {"sites", e.sites.site_vector()},
                                  {"matrix", rows}};
          },
          [](const DiagonalRule& d) {
            auto j = diagonal_to_json(d);
            j["family"] = "diagonal";
            return j;
          },
          [](const ToeplitzRule& t) {
            auto j = toeplitz_to_json(t);
            j["family"] = "toeplitz";
            return j;
          },
          [](const ConjugatedDiagonal& c) {
            return nlohmann::json{{"family", "conjugated"},
                                  {"c", toeplitz_to_json(c.c)},
                                  {"d", diagonal_to_json(c.d)}};
          },
      },
      spec.family());
}

OperatorSpec spec_from_json(const nlohmann::json& j) {
  try {
    const auto family = j.at("family").get<std::string>();
    if (family == "diagonal") return OperatorSpec::diagonal(diagonal_from_json(j));
    if (family == "toeplitz") return OperatorSpec(toeplitz_from_json(j));
    if (family == "conjugated") {
      return OperatorSpec::conjugated(toeplitz_from_json(j.at("c")), diagonal_from_json(j.at("d")));
    }
    if (family == "explicit") {
      auto sites = j.at("sites").get<std::vector<SiteIndex>>();
      const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) {
          throw Error(ErrorKind::ConfigParse, "explicit matrix must be square");
        }
        for (std::size_t k = 0; k < rows.size(); ++k) {
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
      }
      return OperatorSpec::explicit_matrix(Window(std::move(sites)), std::move(m));
    }
    throw Error(ErrorKind::ConfigParse, "unknown operator family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigParse, std::string("operator spec: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorKind::ConfigParse, std::string("operator spec: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigParse) throw;
    throw Error(ErrorKind::ConfigParse, e.what());
  }
}

}  // namespace rdpp
