#include "weyl/words.hpp"

#include "doctest.h"
#include "necklace_oracle.hpp"

#include <random>
#include <set>
#include <string>
#include <vector>

using namespace weyl;

namespace {

Letter a{0, false}, A{0, true}, b{1, false}, B{1, true};

Word w(std::initializer_list<Letter> ls) { return Word(std::vector<Letter>(ls)); }

Word random_reduced_word(std::mt19937_64& rng, int l, int len) {
  std::vector<Letter> ls;
  int prev = -1;
  for (int i = 0; i < len; ++i) {
    int c;
    do {
      c = static_cast<int>(rng() % (2 * l));
    } while (prev >= 0 && c == inverse_code(prev));
    ls.push_back(Letter::from_code(c));
    prev = c;
  }
  return Word(std::move(ls));
}

}  // namespace

TEST_CASE("free reduction") {
  CHECK(w({a, A}).empty());
  CHECK(w({a, b, B, a}) == w({a, a}));
  CHECK(w({a, b}) == w({a, b}));
  // idempotence and parity
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Letter> raw;
    int len = static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i) raw.push_back(Letter::from_code(static_cast<int>(rng() % 4)));
    Word red = reduce(raw);
    CHECK(Word(red.letters()) == red);
    CHECK((raw.size() - red.size()) % 2 == 0);
  }
}

TEST_CASE("cyclic reduction") {
  auto [core1, conj1] = cyclic_reduce(w({a, b, A}));
  CHECK(core1 == w({b}));
  CHECK(conj1 == w({a}));

  auto [core2, conj2] = cyclic_reduce(w({a, b}));
  CHECK(core2 == w({a, b}));
  CHECK(conj2.empty());

  auto [core3, conj3] = cyclic_reduce(w({A, b, a, a}));
  CHECK(core3 == w({b, a}));
  CHECK(conj3 == w({A}));

  // round trip: conjugator . core . conjugator^-1 reduces back to the input
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 400; ++trial) {
    Word word = random_reduced_word(rng, 2, 1 + static_cast<int>(rng() % 12));
    auto [core, conj] = cyclic_reduce(word);
    CHECK(is_very_reduced(core));
    CHECK(concat(concat(conj, core), conj.inverse()) == word);
  }
}

TEST_CASE("rotations") {
  auto r1 = rotations(w({a, b}));
  CHECK(r1.size() == 2);
  auto r2 = rotations(w({a, a}));
  CHECK(r2.size() == 1);
  auto r3 = rotations(w({a, b, a, b}));
  CHECK(r3.size() == 2);
  CHECK_THROWS_AS(rotations(w({a, b, A})), NotVeryReduced);
  CHECK_THROWS_AS(rotations(Word()), NotVeryReduced);

  // |rotations(w)| divides |w|, with equality iff primitive
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    Word word = random_reduced_word(rng, 2, 1 + static_cast<int>(rng() % 10));
    if (!is_very_reduced(word)) continue;
    auto rs = rotations(word);
    CHECK(word.size() % rs.size() == 0);
    CHECK((rs.size() == word.size()) == is_primitive(word));
  }
}

TEST_CASE("primitivity") {
  CHECK_FALSE(is_primitive(w({a, b, a, b})));
  CHECK(is_primitive(w({a, b})));
  CHECK(is_primitive(w({a, a, b, a, b})));
}

TEST_CASE("canonical classes") {
  CHECK(canonical_class(w({b, a})).canonical == canonical_class(w({a, b})).canonical);
  CHECK(canonical_class(w({a, b, A})).canonical == canonical_class(w({b})).canonical);
  CHECK(canonical_class(w({a, b})).canonical == canonical_class(w({B, A})).canonical);
  CHECK_THROWS_AS(canonical_class(Word()), EmptyCore);

  ConjClass sq = canonical_class(w({a, b, a, b}));
  CHECK(sq.power == 2);
  CHECK(sq.primitive_root == w({a, b}));
  CHECK(sq.canonical == w({a, b, a, b}));

  // class key invariance under rotation of the core and under inversion
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    Word word = random_reduced_word(rng, 2, 1 + static_cast<int>(rng() % 10));
    ConjClass cls = canonical_class(word);
    CHECK(is_very_reduced(cls.canonical));
    CHECK(cls.canonical.size() % cls.primitive_root.size() == 0);
    CHECK(canonical_class(word.inverse()).canonical == cls.canonical);
    auto [core, conj] = cyclic_reduce(word);
    for (const Word& rot : rotations(core)) {
      CHECK(canonical_class(rot).canonical == cls.canonical);
    }
    // conjugation by a random element
    Word phi = random_reduced_word(rng, 2, static_cast<int>(rng() % 6));
    Word conjted = concat(concat(phi, word), phi.inverse());
    if (!conjted.empty()) CHECK(canonical_class(conjted).canonical == cls.canonical);
  }
}

TEST_CASE("enumeration counts and order") {
  CHECK(count_reduced_words(2, 3) == 53);
  CHECK(count_reduced_words(1, 2) == 5);
  CHECK(count_reduced_words(2, 1) == 5);

  for (int l = 1; l <= 3; ++l) {
    for (int max_len = 0; max_len <= (l == 3 ? 6 : 8); ++max_len) {
      WordEnumerator en(l, max_len);
      Word cur, prev;
      std::set<std::string> seen;
      std::uint64_t n = 0;
      bool first = true;
      while (en.next(cur)) {
        CHECK(seen.insert(cur.codes()).second);  // no duplicates
        if (!first) CHECK(prev < cur);           // strict length-lex order
        prev = cur;
        first = false;
        ++n;
      }
      CHECK(n == count_reduced_words(l, max_len));
    }
  }

  // brute-force set comparison against raw strings filtered for reduction
  for (const int l : {1, 2, 3}) {
    const int max_len = 8;
    std::set<std::string> brute;
    std::vector<int> digits;
    for (int len = 0; len <= max_len; ++len) {
      digits.assign(len, 0);
      while (true) {
        bool reduced = true;
        for (int i = 0; i + 1 < len && reduced; ++i) reduced = (digits[i + 1] != (digits[i] ^ 1));
        if (reduced) {
          std::string s(len, '\0');
          for (int i = 0; i < len; ++i) s[i] = static_cast<char>(digits[i]);
          brute.insert(s);
        }
        int pos = len - 1;
        while (pos >= 0 && digits[pos] == 2 * l - 1) digits[pos--] = 0;
        if (pos < 0) break;
        ++digits[pos];
      }
    }
    std::set<std::string> enumerated;
    for_each_word(l, max_len, [&](const Word& word) { enumerated.insert(word.codes()); });
    CHECK(brute == enumerated);
  }
}

TEST_CASE("serialization") {
  CHECK(to_string(w({a, b, A}), 2) == "a b A");
  CHECK(to_string(Word(), 2) == "");
  CHECK(parse_word("a b A", 2) == w({a, b, A}));
  CHECK(parse_word("", 2).empty());

  Word big(std::vector<Letter>{Letter{0, false}, Letter{27, true}, Letter{0, false}});
  CHECK(to_string(big, 30) == "g0 g27' g0");
  CHECK(parse_word("g0 g27' g0", 30) == big);

  CHECK_THROWS_AS(parse_word("z9", 2), ParseError);
  CHECK_THROWS_AS(parse_word("c", 2), ParseError);
}

TEST_CASE("necklace oracle sanity") {
  // Independent brute-force counts of primitive classes per cyclic length.
  CHECK(oracle::primitive_class_count(2, 1) == 2);
  CHECK(oracle::primitive_class_count(2, 2) == 2);
  // longer lengths exercised in the acceptance suite against the census
}
