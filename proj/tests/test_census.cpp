#include "weyl/census.hpp"

#include "doctest.h"
#include "necklace_oracle.hpp"
#include "weyl/census_io.hpp"
#include "weyl/presets.hpp"

#include <cstdio>
#include <set>

using namespace weyl;

namespace {

SchottkySystem validated_preset(const std::string& name) {
  SchottkySystem sys = load_system(preset_config(name));
  REQUIRE(validate(sys).passed);
  return sys;
}

}  // namespace

TEST_CASE("census record counts and order") {
  SchottkySystem sys = validated_preset("sl2");

  CensusTable t0 = build_census(sys, 0);
  CHECK(t0.size() == 1);
  CHECK(t0.distance[0] == doctest::Approx(0.0));
  CHECK(t0.class_id[0] == -1);

  CensusTable t3 = build_census(sys, 3);
  CHECK(t3.size() == 53);
  // length-lex order: identity, a, A, b, B, aa, ab, ...
  CHECK(t3.word_codes[0].empty());
  CHECK(to_string(Word::from_codes(t3.word_codes[1]), 2) == "a");
  CHECK(to_string(Word::from_codes(t3.word_codes[2]), 2) == "A");
  CHECK(to_string(Word::from_codes(t3.word_codes[5]), 2) == "a a");
  for (std::size_t i = 1; i < t3.size(); ++i) {
    CHECK(Word::from_codes(t3.word_codes[i - 1]) < Word::from_codes(t3.word_codes[i]));
  }

  // budget guard
  CHECK_THROWS_AS(build_census(sys, 8, BuildOptions{100, 0}), BudgetExceeded);

  // unvalidated system is rejected
  SchottkySystem raw = load_system(preset_config("sl2"));
  CHECK_THROWS_AS(build_census(raw, 2), Error);
}

TEST_CASE("census per-record invariants") {
  SchottkySystem sys = validated_preset("sl2");
  CensusTable table = build_census(sys, 6);
  CHECK(table.size() == count_reduced_words(2, 6));

  for (std::size_t i = 0; i < table.size(); ++i) {
    // translation length never exceeds the orbit distance
    CHECK(table.length_of(i) <= table.distance[i] + 1e-9);
    // the very_reduced bit matches the word predicate
    Word w = Word::from_codes(table.word_codes[i]);
    CHECK(table.very_reduced(i) == is_very_reduced(w));
    // cyclic core length bounds the translation length
    if (table.class_id[i] >= 0) {
      const auto& cls = table.classes[table.class_id[i]];
      CHECK(cls.canonical_len >= table.length_of(i) / table.max_displacement - 2.0);
    }
  }

  // horizons match their defining minima
  double hr = std::numeric_limits<double>::infinity();
  double ht = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.word_len[i] != table.max_len) continue;
    hr = std::min(hr, table.distance[i]);
    if (table.very_reduced(i)) ht = std::min(ht, table.length_of(i));
  }
  CHECK(table.horizon_R == doctest::Approx(hr));
  CHECK(table.horizon_t == doctest::Approx(ht));

  // class coherence: class length and record-oriented translation vector
  // agree with a direct evaluation of the record's own matrix
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.word_len[i] > 5 || table.class_id[i] < 0) continue;
    const Mat m = element(sys, Word::from_codes(table.word_codes[i])).matrix;
    CHECK(std::abs(translation_length(m) - table.length_of(i)) <= 1e-6);
    const Vec direct = jordan_projection(m).coords;
    CHECK((direct - table.jordan_of(i)).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("orbit counter") {
  SchottkySystem sys = validated_preset("sl2");
  CensusTable table = build_census(sys, 3);

  CHECK(count_orbit(table, 0.0).count == 0);  // strict inequality excludes the identity
  CHECK(count_orbit(table, 1e-6).count == 1);
  auto all = count_orbit(table, std::numeric_limits<double>::infinity());
  CHECK(all.count == 53);
  CHECK(all.incomplete);
  CHECK_FALSE(count_orbit(table, table.horizon_R).incomplete);

  // monotone in R
  std::uint64_t prev = 0;
  for (double r = 0.0; r < table.horizon_R; r += table.horizon_R / 37.0) {
    auto c = count_orbit(table, r);
    CHECK(c.count >= prev);
    prev = c.count;
  }
}

TEST_CASE("primitive class counter against the necklace oracle") {
  SchottkySystem sys = validated_preset("sl2");
  CensusTable table = build_census(sys, 4);

  CHECK(count_primitive_classes(table, 0.0).count == 0);

  // distinct primitive roots per cyclic word length vs brute force
  for (int k = 1; k <= 4; ++k) {
    std::set<std::string> roots;
    for (const ClassInfo& c : table.classes) {
      if (c.root_len == k) roots.insert(c.key.substr(0, c.root_len));
    }
    CHECK(roots.size() == oracle::primitive_class_count(2, k));
  }

  // monotone in t
  std::uint64_t prev = 0;
  for (double t = 0.0; t < table.horizon_t; t += table.horizon_t / 23.0) {
    auto c = count_primitive_classes(table, t);
    CHECK(c.count >= prev);
    prev = c.count;
  }
}

TEST_CASE("directional counter") {
  SchottkySystem sys = validated_preset("sl2");
  CensusTable table = build_census(sys, 4);

  const double R = table.horizon_R;
  FlagBall whole_a{sys.fixed_flag[0], 1.0};
  FlagBall whole_b{sys.fixed_flag[1], 1.0};
  auto full = count_directional(table, R, whole_a, whole_b);
  auto orbit = count_orbit(table, R);
  CHECK(full.count + full.excluded == orbit.count);
  CHECK(full.excluded >= 1);  // the identity has no defined flags

  // a shrinking ball around a flag hit by no record
  Mat off(2, 2);
  const double th = 0.9;
  off << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  auto none = count_directional(table, R, FlagBall{Flag{off}, 1e-6}, whole_b);
  CHECK(none.count == 0);

  CHECK_THROWS_AS(count_directional(table, R, FlagBall{Flag{off}, 0.0}, whole_b), Error);

  // words starting with a and ending with a land in the (xi_a+, xi_a-) balls
  FlagBall ball_a{sys.fixed_flag[0], 0.2};
  FlagBall ball_A{sys.fixed_flag[1], 0.2};
  auto dir = count_directional(table, R, ball_a, ball_A);
  CHECK(dir.count >= 1);
  std::uint64_t undefined = 0;
  auto profile = directional_distances(table, ball_a, ball_A, &undefined);
  CHECK(profile.size() + 0 >= dir.count);
  CHECK(count_directional(table, R, ball_a, ball_A).count ==
        static_cast<std::uint64_t>(std::lower_bound(profile.begin(), profile.end(), R) -
                                   profile.begin()));
}

TEST_CASE("census determinism across thread counts") {
  SchottkySystem sys = validated_preset("sl2");
  CensusTable t1 = build_census(sys, 5, BuildOptions{100000000ULL, 1});
  CensusTable t2 = build_census(sys, 5, BuildOptions{100000000ULL, 2});
  REQUIRE(t1.size() == t2.size());
  CHECK(t1.word_codes == t2.word_codes);
  CHECK(t1.distance == t2.distance);
  CHECK(t1.cartan == t2.cartan);
  CHECK(t1.flag_frames == t2.flag_frames);
  CHECK(t1.class_id == t2.class_id);
  CHECK(t1.bits == t2.bits);
}

TEST_CASE("census csv round trip") {
  SchottkySystem sys = validated_preset("sl2");
  CensusTable table = build_census(sys, 4);

  const std::string csv = "/tmp/weyl_test_census.csv";
  const std::string side = "/tmp/weyl_test_census.json";
  save_census(table, sys, csv, side);

  CensusTable back = load_census(csv, side, sys);
  CHECK(back.size() == table.size());
  CHECK(back.word_codes == table.word_codes);
  CHECK(back.distance == table.distance);
  CHECK(back.cartan == table.cartan);
  CHECK(back.flag_frames == table.flag_frames);
  CHECK(back.inv_flag_frames == table.inv_flag_frames);
  CHECK(back.bits == table.bits);
  CHECK(back.class_id == table.class_id);
  CHECK(back.horizon_R == doctest::Approx(table.horizon_R).epsilon(1e-15));
  REQUIRE(back.classes.size() == table.classes.size());
  for (std::size_t c = 0; c < table.classes.size(); ++c) {
    CHECK(back.classes[c].key == table.classes[c].key);
    CHECK(back.classes[c].length == table.classes[c].length);  // bitwise: same arithmetic
  }

  // a different config must be rejected
  nlohmann::ordered_json other_cfg = preset_config("sl2");
  other_cfg["seed"] = 999;
  SchottkySystem other = load_system(other_cfg);
  CHECK_THROWS_AS(load_census(csv, side, other), FingerprintMismatch);

  std::remove(csv.c_str());
  std::remove(side.c_str());
}

TEST_CASE("sl3 census smoke") {
  SchottkySystem sys = validated_preset("sl3");
  CensusTable table = build_census(sys, 3);
  CHECK(table.size() == 53);
  for (std::size_t i = 1; i < table.size(); ++i) {
    CHECK(table.length_of(i) <= table.distance[i] + 1e-9);
    CHECK(table.has_flag(i));  // every nonempty word here is Cartan-regular
  }
}
