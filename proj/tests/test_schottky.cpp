#include "weyl/schottky.hpp"

#include "doctest.h"
#include "weyl/presets.hpp"

#include <cmath>
#include <random>

using namespace weyl;

namespace {

nlohmann::json simple_cfg() {
  nlohmann::json cfg;
  cfg["dimension"] = 2;
  cfg["generators"] = {std::vector<double>{2.0, 0.0, 0.0, 0.5},
                       std::vector<double>{1.0, 1.0, 1.0, 2.0}};
  return cfg;
}

nlohmann::json sl2_pair_cfg(double lambda, int power, double radius) {
  // diag(lambda, 1/lambda) and its conjugate by a quarter turn
  const double s = (lambda + 1.0 / lambda) / 2.0;
  const double t = (lambda - 1.0 / lambda) / 2.0;
  nlohmann::json cfg;
  cfg["dimension"] = 2;
  cfg["generators"] = {std::vector<double>{lambda, 0.0, 0.0, 1.0 / lambda},
                       std::vector<double>{s, t, t, s}};
  cfg["power"] = power;
  cfg["ball_radius"] = radius;
  cfg["sample_count"] = 500;
  cfg["seed"] = 7;
  return cfg;
}

Mat rot3(double a, double b, double c) {
  Mat Rz(3, 3), Ry(3, 3), Rx(3, 3);
  Rz << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  Ry << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
  Rx << 1, 0, 0, 0, std::cos(c), -std::sin(c), 0, std::sin(c), std::cos(c);
  return Rz * Ry * Rx;
}

nlohmann::json sl3_cfg(double a, double b, double c, int power) {
  Mat D = Mat::Zero(3, 3);
  D.diagonal() << 4.0, 1.0, 0.25;
  Mat R = rot3(a, b, c);
  Mat g2 = R * D * R.transpose();
  std::vector<double> v1 = {4, 0, 0, 0, 1, 0, 0, 0, 0.25}, v2;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v2.push_back(g2(i, j));
  nlohmann::json cfg;
  cfg["dimension"] = 3;
  cfg["generators"] = {v1, v2};
  cfg["power"] = power;
  cfg["ball_radius"] = 0.2;
  cfg["sample_count"] = 500;
  cfg["seed"] = 3;
  return cfg;
}

// Independent ping-pong oracle on the projective line. Lines are angles in
// [0, pi); the flag ball of radius r around angle t is |sin(theta - t)| <= r.
// Checks that every letter maps each admissible arc into its target arc and
// that the four arcs are pairwise disjoint.
bool arcs_oracle(double lambda, int power, double radius) {
  const double quarter = M_PI / 4.0;
  // fixed lines per letter code: a+, a-, b+, b-
  const double center[4] = {0.0, M_PI / 2.0, quarter, quarter + M_PI / 2.0};
  const double halfwidth = std::asin(radius);

  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      double gap = std::abs(std::remainder(center[i] - center[j], M_PI));
      if (gap < 2.0 * halfwidth) return false;
    }
  }

  const double lp = std::pow(lambda, power);
  auto apply = [&](int code, double theta) {
    double x = std::cos(theta), y = std::sin(theta);
    if (code < 2) {  // diag(lp, 1/lp) or inverse
      double f = (code == 0) ? lp : 1.0 / lp;
      return std::atan2(y / f, x * f);
    }
    double xr = std::cos(theta - quarter), yr = std::sin(theta - quarter);
    double f = (code == 2) ? lp : 1.0 / lp;
    return std::atan2(yr / f, xr * f) + quarter;
  };

  for (int s = 0; s < 4; ++s) {
    for (int j = 0; j < 4; ++j) {
      if (j == (s ^ 1)) continue;
      for (int g = 0; g <= 100; ++g) {
        double theta = center[j] - halfwidth + (2.0 * halfwidth * g) / 100.0;
        double image = apply(s, theta);
        if (std::abs(std::sin(image - center[s])) > radius) return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("load_system basics") {
  SchottkySystem sys = load_system(simple_cfg());
  CHECK(sys.dim == 2);
  CHECK(sys.num_generators == 2);
  CHECK(sys.power == 1);  // default when omitted
  CHECK(sys.ball_radius == doctest::Approx(0.2));
  CHECK_FALSE(sys.validated);
  CHECK(sys.letter(0)(0, 0) == doctest::Approx(2.0));
  // letter displacements symmetric under inversion
  for (int i = 0; i < sys.num_generators; ++i) {
    CHECK(sys.letter_displacement[2 * i] ==
          doctest::Approx(sys.letter_displacement[2 * i + 1]).epsilon(1e-12));
  }

  nlohmann::json bad = simple_cfg();
  bad["generators"][0] = std::vector<double>{2.0, 0.0, 0.0, 1.0};  // det = 2
  CHECK_THROWS_AS(load_system(bad), NotUnimodular);

  nlohmann::json wrong = simple_cfg();
  wrong["generators"][0] = std::vector<double>{1.0, 0.0, 0.0};
  CHECK_THROWS_AS(load_system(wrong), DimensionMismatch);

  CHECK_THROWS_AS(load_system(nlohmann::json::object()), ParseError);
  CHECK_THROWS_AS(load_system_file("/nonexistent/path.json"), ParseError);
}

TEST_CASE("validate demo pair against the arc oracle") {
  // the classical pair: both the oracle and the numerical certificate pass
  CHECK(arcs_oracle(4.0, 2, 0.2));
  SchottkySystem sys = load_system(sl2_pair_cfg(4.0, 2, 0.2));
  ValidationReport rep = validate(sys);
  CHECK(rep.passed);
  CHECK(sys.validated);
  for (const auto& c : rep.checks) CHECK(c.margin > 0.0);

  // overlapping balls: both reject
  CHECK_FALSE(arcs_oracle(4.0, 2, 0.45));
  SchottkySystem wide = load_system(sl2_pair_cfg(4.0, 2, 0.45));
  CHECK_FALSE(validate(wide).passed);

  // too weak a contraction: both reject
  CHECK_FALSE(arcs_oracle(1.3, 1, 0.2));
  SchottkySystem weak = load_system(sl2_pair_cfg(1.3, 1, 0.2));
  CHECK_FALSE(validate(weak).passed);
  CHECK_THROWS_AS(validate_or_throw(weak), PingPongFailed);
}

TEST_CASE("validate rejects degenerate systems") {
  // duplicate generators share fixed flags
  nlohmann::json dup;
  dup["dimension"] = 2;
  dup["generators"] = {std::vector<double>{4.0, 0.0, 0.0, 0.25},
                       std::vector<double>{4.0, 0.0, 0.0, 0.25}};
  SchottkySystem sys = load_system(dup);
  CHECK_FALSE(validate(sys).passed);
  CHECK_THROWS_AS(validate_or_throw(sys), NotTransverse);

  // a rotation is not regular axial
  nlohmann::json rot;
  rot["dimension"] = 2;
  rot["generators"] = {std::vector<double>{0.0, -1.0, 1.0, 0.0}};
  SchottkySystem rsys = load_system(rot);
  CHECK_FALSE(validate(rsys).passed);
  CHECK_THROWS_AS(validate_or_throw(rsys), NotRegular);
}

TEST_CASE("presets validate") {
  for (const std::string& name : preset_names()) {
    SchottkySystem sys = load_system(preset_config(name));
    CAPTURE(name);
    CHECK(validate(sys).passed);
  }
}

TEST_CASE("suggest_power") {
  SchottkySystem good = load_system(sl2_pair_cfg(4.0, 1, 0.2));
  CHECK(suggest_power(good, 8) == 1);  // minimality on an already-valid system

  // this rotated SL(3) pair fails at powers 1 and 2 and validates at 3
  SchottkySystem stiff = load_system(sl3_cfg(0.8, 0.6, 2.1, 1));
  {
    SchottkySystem p1 = with_power(stiff, 1);
    SchottkySystem p2 = with_power(stiff, 2);
    SchottkySystem p3 = with_power(stiff, 3);
    CHECK_FALSE(validate(p1).passed);
    CHECK_FALSE(validate(p2).passed);
    CHECK(validate(p3).passed);
  }
  CHECK(suggest_power(stiff, 6) == 3);

  CHECK_THROWS_AS(suggest_power(good, 0), NoPowerFound);
}

TEST_CASE("element evaluation") {
  SchottkySystem sys = load_system(simple_cfg());

  CHECK(element(sys, Word()).matrix.isApprox(Mat::Identity(2, 2)));

  // hand product: diag(2, 1/2) * [[1,1],[1,2]] = [[2,2],[0.5,1]]
  Word ab = parse_word("a b", 2);
  Mat expect(2, 2);
  expect << 2.0, 2.0, 0.5, 1.0;
  CHECK(element(sys, ab).matrix.isApprox(expect, 1e-12));

  std::mt19937_64 rng(99);
  SchottkySystem demo = load_system(preset_config("sl2"));
  auto random_word = [&](int len) {
    std::vector<Letter> ls;
    int prev = -1;
    for (int i = 0; i < len; ++i) {
      int c;
      do {
        c = static_cast<int>(rng() % 4);
      } while (prev >= 0 && c == inverse_code(prev));
      ls.push_back(Letter::from_code(c));
      prev = c;
    }
    return Word(std::move(ls));
  };

  for (int trial = 0; trial < 100; ++trial) {
    Word w1 = random_word(static_cast<int>(rng() % 11));
    Word w2 = random_word(static_cast<int>(rng() % 11));
    if (concat(w1, w2).size() != w1.size() + w2.size()) continue;  // keep w1.w2 reduced
    Mat lhs = element(demo, concat(w1, w2)).matrix;
    Mat rhs = element(demo, w1).matrix * element(demo, w2).matrix;
    CHECK((lhs - rhs).norm() <= 1e-7 * std::max(1.0, rhs.norm()));

    Mat ident = element(demo, w1).matrix * element(demo, w1.inverse()).matrix;
    double cond = element(demo, w1).matrix.norm();
    CHECK((ident - Mat::Identity(2, 2)).norm() <= 1e-8 * cond * cond);
  }
}

TEST_CASE("every word of the validated demo up to length 10 is regular axial") {
  SchottkySystem demo = load_system(preset_config("sl2"));
  REQUIRE(validate(demo).passed);
  std::size_t checked = 0;
  for_each_word(2, 10, [&](const Word& w) {
    if (w.empty()) return;
    WeylVector jv = evaluate(demo, w).jordan();
    if (jv.min_gap() > demo.tol.gap) ++checked;
  });
  CHECK(checked == count_reduced_words(2, 10) - 1);
}

TEST_CASE("sampled ping pong holds on the validated demo") {
  SchottkySystem demo = load_system(preset_config("sl2"));
  REQUIRE(validate(demo).passed);
  // direct restatement of the certificate on fresh samples
  std::mt19937_64 rng(424242);
  for (int s = 0; s < demo.alphabet_size(); ++s) {
    for (int k = 0; k < 250; ++k) {
      int j = static_cast<int>(rng() % demo.alphabet_size());
      if (j == inverse_code(s)) continue;
      Flag f = sample_flag_in_ball(demo.fixed_flag[j], demo.ball_radius, rng);
      CHECK(flag_distance(act(demo.letter(s), f), demo.fixed_flag[s]) <= demo.ball_radius);
    }
  }
}

TEST_CASE("overflow guard") {
  SchottkySystem demo = load_system(preset_config("sl2"));
  // the letter matrix is diag(16, 1/16); entries pass 1e300 near n = 250
  std::vector<Letter> ls(260, Letter{0, false});
  CHECK_THROWS_AS(evaluate(demo, Word(std::move(ls))), Overflow);
}
