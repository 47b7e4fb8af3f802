#include "saddle/system.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace saddle {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ExitDomain geometry
// ---------------------------------------------------------------------------

bool ExitDomain::contains(Vec2 p) const {
  size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = vertices[i], b = vertices[(i + 1) % n];
    if (cross(b - a, p - a) <= 0.0) return false;  // strict interior, CCW polygon
  }
  return true;
}

Vec2 ExitDomain::outward_normal(size_t i) const {
  Vec2 a = vertices[i], b = vertices[(i + 1) % vertices.size()];
  Vec2 e = b - a;
  double len = e.norm();
  return {e.y / len, -e.x / len};
}

std::optional<ExitDomain::Crossing> ExitDomain::first_crossing(Vec2 a, Vec2 b) const {
  std::optional<Crossing> best;
  size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 p = vertices[i], q = vertices[(i + 1) % n];
    Vec2 d = b - a, e = q - p;
    double denom = cross(d, e);
    if (denom == 0.0) continue;
    double s = cross(p - a, e) / denom;  // along a->b
    double t = cross(p - a, d) / denom;  // along edge
    if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0) continue;
    if (!best || s < best->s) best = Crossing{s, i, a + s * d};
  }
  return best;
}

// ---------------------------------------------------------------------------
// SaddleSystem evaluation
// ---------------------------------------------------------------------------

Mat2 SaddleSystem::drift_jacobian(Vec2 x) const {
  Mat2 j = Mat2::diag(lp(), -lm());
  j(0, 0) += Q.c1.derivative(1).eval(x.x, x.y);
  j(0, 1) += Q.c1.derivative(2).eval(x.x, x.y);
  j(1, 0) += Q.c2.derivative(1).eval(x.x, x.y);
  j(1, 1) += Q.c2.derivative(2).eval(x.x, x.y);
  return j;
}

Mat2 SaddleSystem::sigma_at(Vec2 x) const {
  Mat2 s;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s(i, j) = sigma.m[i][j].eval(x.x, x.y);
  return s;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

ValidationReport validate_system(const SaddleSystem& sys) {
  ValidationReport rep;

  if (sys.A_entries[0][1] != 0 || sys.A_entries[1][0] != 0)
    rep.fail("A must be diagonal in input coordinates");
  if (sys.A_entries[0][0] <= 0)
    rep.fail("not a hyperbolic saddle: A11 must be strictly positive");
  if (sys.A_entries[1][1] >= 0)
    rep.fail("not a hyperbolic saddle: A22 must be strictly negative");
  rep.lambda_plus = to_double(sys.A_entries[0][0]);
  rep.lambda_minus = -to_double(sys.A_entries[1][1]);

  // Q(0) = 0 and DQ(0) = 0: decidable on the polynomial representation.
  for (const Poly* q : {&sys.Q.c1, &sys.Q.c2}) {
    int d = q->min_degree();
    if (d >= 0 && d < 2)
      rep.fail("Q has terms of degree < 2 (violates |Q(x)| = O(|x|^2))");
  }

  if (sys.domain_V.vertices.size() < 3) {
    rep.fail("exit domain needs at least 3 vertices");
  } else {
    if (!sys.domain_V.contains({0, 0})) rep.fail("origin not strictly inside domain V");
    size_t n = sys.domain_V.vertices.size();
    for (size_t i = 0; i < n; ++i) {
      Vec2 a = sys.domain_V.vertices[i];
      Vec2 b = sys.domain_V.vertices[(i + 1) % n];
      Vec2 c = sys.domain_V.vertices[(i + 2) % n];
      if (cross(b - a, c - b) <= 0) {
        rep.fail("domain polygon is not convex counterclockwise");
        break;
      }
    }
  }

  // Transversality of the drift at the declared exit points.
  for (const auto& [q, label] :
       {std::pair{sys.q_plus, "q_plus"}, std::pair{sys.q_minus, "q_minus"}}) {
    if (!q) continue;
    Vec2 inside = 0.999999 * (*q);
    auto crossing = sys.domain_V.first_crossing(inside, 1.000001 * (*q));
    if (!crossing) {
      rep.fail(std::string(label) + " does not lie on the domain boundary");
      continue;
    }
    Vec2 nrm = sys.domain_V.outward_normal(crossing->edge);
    if (std::abs(dot(sys.drift(*q), nrm)) <= 1e-8)
      rep.fail(std::string(label) + ": drift not transversal to the boundary");
  }

  // Sampled boundedness check of b and sigma on the guard box.
  double r = sys.guard_radius;
  const int grid = 9;
  for (int i = 0; i < grid && rep.valid; ++i) {
    for (int j = 0; j < grid; ++j) {
      Vec2 x{-r + 2 * r * i / (grid - 1.0), -r + 2 * r * j / (grid - 1.0)};
      if (sys.drift(x).norm() > sys.lipschitz_bound ||
          sys.sigma_at(x).frobenius() > sys.lipschitz_bound) {
        rep.fail("drift or diffusion exceeds the declared bound L on the guard box");
        break;
      }
    }
  }

  if (sys.initial_law.alpha <= 0 || sys.initial_law.alpha > 1)
    rep.fail("alpha must lie in (0, 1]");
  if (sys.initial_law.alpha != 1.0) {
    // For point-mass mixtures the collinearity condition is checked exactly.
    if (sys.initial_law.xi_law.has_atom_on_line(sys.drift(sys.x0)))
      rep.fail("initial law has an atom collinear with b(x0)");
    else if (!sys.initial_law.collinearity_declared_ok)
      rep.fail("alpha != 1 requires collinearity_declared_ok");
  }

  return rep;
}

// ---------------------------------------------------------------------------
// JSON loading
// ---------------------------------------------------------------------------

namespace {

Rational json_rational(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  throw std::invalid_argument("rational entries must be integers or \"p/q\" strings");
}

Poly json_poly(const json& terms) {
  Poly p;
  for (const auto& t : terms)
    p.add_term(json_rational(t.at("coef")), t.at("a1").get<int>(), t.at("a2").get<int>());
  return p;
}

Vec2 json_vec2(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Mixture2D json_mixture(const json& j) {
  std::vector<MixtureComponent2> comps;
  for (const auto& c : j.at("components")) {
    MixtureComponent2 mc;
    mc.weight = c.value("weight", 1.0);
    mc.mean = json_vec2(c.at("mean"));
    std::string type = c.at("type").get<std::string>();
    if (type == "point_mass") {
      mc.point_mass = true;
    } else if (type == "gaussian") {
      const auto& cov = c.at("cov");
      mc.cov = Mat2{{cov.at(0).at(0).get<double>(), cov.at(0).at(1).get<double>(),
                     cov.at(1).at(0).get<double>(), cov.at(1).at(1).get<double>()}};
    } else {
      throw std::invalid_argument("unknown mixture component type: " + type);
    }
    comps.push_back(mc);
  }
  return Mixture2D(comps);
}

}  // namespace

SaddleSystem parse_system(const std::string& text) {
  json j = json::parse(text);
  SaddleSystem sys;
  sys.name = j.value("name", "");

  const auto& a = j.at("A");
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) sys.A_entries[r][c] = json_rational(a.at(r).at(c));
  sys.lambda_plus = sys.A_entries[0][0];
  sys.lambda_minus = -sys.A_entries[1][1];

  if (j.contains("Q")) {
    for (const auto& t : j.at("Q")) {
      int target = t.at("target").get<int>();
      Poly& comp = target == 1 ? sys.Q.c1 : sys.Q.c2;
      comp.add_term(json_rational(t.at("coef")), t.at("a1").get<int>(), t.at("a2").get<int>());
    }
  }

  if (j.contains("sigma")) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) sys.sigma.m[r][c] = json_poly(j.at("sigma").at(r).at(c));
  } else {
    sys.sigma.m[0][0] = Poly(Rational(1));
    sys.sigma.m[1][1] = Poly(Rational(1));
  }

  sys.lipschitz_bound = j.value("lipschitz_bound", 10.0);
  sys.guard_radius = j.value("guard_radius", 4.0);

  const auto& dom = j.at("domain");
  if (dom.contains("box")) {
    sys.domain_V = ExitDomain::box(dom.at("box").at(0).get<double>(),
                                   dom.at("box").at(1).get<double>());
  } else {
    for (const auto& v : dom.at("vertices")) sys.domain_V.vertices.push_back(json_vec2(v));
  }

  if (j.contains("q_plus")) sys.q_plus = json_vec2(j.at("q_plus"));
  if (j.contains("q_minus")) sys.q_minus = json_vec2(j.at("q_minus"));
  if (j.contains("x0")) sys.x0 = json_vec2(j.at("x0"));

  if (j.contains("initial_law")) {
    const auto& il = j.at("initial_law");
    sys.initial_law.alpha = il.value("alpha", 1.0);
    if (il.contains("xi")) sys.initial_law.xi_law = json_mixture(il.at("xi"));
    sys.initial_law.collinearity_declared_ok = il.value("collinearity_ok", false);
  }

  return sys;
}

SaddleSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str());
}

}  // namespace saddle
