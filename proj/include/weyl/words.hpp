#pragma once

// Exact combinatorics of the free group on l generators: freely reduced
// words, cyclic reduction, rotation classes, primitivity and a canonical
// conjugacy-class key. Everything in this header is tolerance-free.
//
// Letters carry a total order h1 < h1^-1 < h2 < h2^-1 < ... encoded as
// code = 2*index + inverted. Canonical forms are lexicographic minima in
// this order, so class keys are stable across runs and platforms.

#include "weyl/core.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace weyl {

struct Letter {
  int index = 0;
  bool inverted = false;

  int code() const { return 2 * index + (inverted ? 1 : 0); }
  Letter inverse() const { return Letter{index, !inverted}; }

  static Letter from_code(int c) { return Letter{c / 2, (c & 1) != 0}; }

  friend bool operator==(const Letter& a, const Letter& b) {
    return a.index == b.index && a.inverted == b.inverted;
  }
  friend bool operator!=(const Letter& a, const Letter& b) { return !(a == b); }
  friend bool operator<(const Letter& a, const Letter& b) { return a.code() < b.code(); }
};

inline int inverse_code(int code) { return code ^ 1; }

// A freely reduced word. Construction reduces; the invariant (no adjacent
// inverse pair) holds for every instance.
class Word {
 public:
  Word() = default;

  explicit Word(std::vector<Letter> letters) {
    letters_.reserve(letters.size());
    for (const Letter& s : letters) push(s);
  }

  // Appends a letter, cancelling against the current last letter if inverse.
  void push(Letter s) {
    if (!letters_.empty() && letters_.back() == s.inverse()) {
      letters_.pop_back();
    } else {
      letters_.push_back(s);
    }
  }

  bool empty() const { return letters_.empty(); }
  std::size_t size() const { return letters_.size(); }
  const Letter& operator[](std::size_t i) const { return letters_[i]; }
  const std::vector<Letter>& letters() const { return letters_; }

  Word inverse() const {
    Word w;
    w.letters_.reserve(letters_.size());
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) {
      w.letters_.push_back(it->inverse());  // already reduced, no cancellation
    }
    return w;
  }

  // Compact byte string of letter codes; used as hash/class key.
  std::string codes() const {
    std::string s(letters_.size(), '\0');
    for (std::size_t i = 0; i < letters_.size(); ++i) s[i] = static_cast<char>(letters_[i].code());
    return s;
  }

  static Word from_codes(std::string_view codes) {
    std::vector<Letter> ls;
    ls.reserve(codes.size());
    for (char c : codes) ls.push_back(Letter::from_code(static_cast<unsigned char>(c)));
    return Word(std::move(ls));
  }

  friend bool operator==(const Word& a, const Word& b) { return a.letters_ == b.letters_; }
  friend bool operator!=(const Word& a, const Word& b) { return !(a == b); }

  // Length-then-lexicographic order, the enumeration order of the library.
  friend bool operator<(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.letters_.begin(), a.letters_.end(),
                                        b.letters_.begin(), b.letters_.end());
  }

 private:
  std::vector<Letter> letters_;
};

inline Word reduce(const std::vector<Letter>& raw) { return Word(raw); }

inline Word concat(const Word& a, const Word& b) {
  Word w = a;
  for (const Letter& s : b.letters()) w.push(s);
  return w;
}

inline bool is_very_reduced(const Word& w) {
  if (w.empty()) return true;
  return w[0] != w[w.size() - 1].inverse();
}

// Strips matching first/last letters until the core is very reduced.
// Identity: input = conjugator . core . conjugator^-1 (freely reduced).
inline std::pair<Word, Word> cyclic_reduce(const Word& w) {
  std::size_t lo = 0, hi = w.size();
  std::vector<Letter> conj;
  while (hi - lo >= 2 && w[lo] == w[hi - 1].inverse()) {
    conj.push_back(w[lo]);
    ++lo;
    --hi;
  }
  std::vector<Letter> core(w.letters().begin() + lo, w.letters().begin() + hi);
  return {Word(std::move(core)), Word(std::move(conj))};
}

// Smallest q such that w is the (|w|/q)-th power of its length-q prefix.
inline std::size_t smallest_period(const Word& w) {
  const std::size_t n = w.size();
  for (std::size_t q = 1; q <= n; ++q) {
    if (n % q != 0) continue;
    bool ok = true;
    for (std::size_t i = q; i < n && ok; ++i) ok = (w[i] == w[i % q]);
    if (ok) return q;
  }
  return n;
}

// Distinct cyclic rotations of a very reduced word. The set has exactly
// smallest_period(w) elements (rotating by the period fixes the word).
inline std::vector<Word> rotations(const Word& w) {
  if (w.empty() || !is_very_reduced(w)) {
    throw NotVeryReduced("rotations: word must be nonempty and very reduced");
  }
  const std::size_t n = w.size();
  std::vector<Word> out;
  std::vector<std::string> seen;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Letter> rot;
    rot.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rot.push_back(w[(j + i) % n]);
    Word r(std::move(rot));
    std::string key = r.codes();
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
      seen.push_back(std::move(key));
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline bool is_primitive(const Word& w) {
  if (w.empty() || !is_very_reduced(w)) {
    throw NotVeryReduced("is_primitive: word must be nonempty and very reduced");
  }
  return smallest_period(w) == w.size();
}

// Conjugacy class data. canonical is the lexicographic minimum over all
// rotations of the cyclic core and of its inverse, so words conjugate up to
// inversion of the primitive root share one canonical key.
struct ConjClass {
  Word canonical;
  Word primitive_root;
  int power = 1;
};

inline ConjClass canonical_class(const Word& w) {
  auto [core, conj] = cyclic_reduce(w);
  (void)conj;
  if (core.empty()) throw EmptyCore("canonical_class: word is conjugate to the identity");
  const std::size_t n = core.size();

  auto min_rotation_codes = [n](const Word& u) {
    std::string codes = u.codes();
    std::string best = codes;
    std::string cur(n, '\0');
    for (std::size_t j = 1; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) cur[i] = codes[(j + i) % n];
      if (cur < best) best = cur;
    }
    return best;
  };

  std::string best = min_rotation_codes(core);
  std::string besti = min_rotation_codes(core.inverse());
  if (besti < best) best = besti;

  Word canonical = Word::from_codes(best);
  const std::size_t q = smallest_period(canonical);
  std::vector<Letter> root(canonical.letters().begin(), canonical.letters().begin() + q);
  return ConjClass{canonical, Word(std::move(root)), static_cast<int>(n / q)};
}

// --- enumeration ---------------------------------------------------------

inline std::uint64_t count_reduced_words(int l, int max_len) {
  std::uint64_t total = 1;
  std::uint64_t shell = 2 * static_cast<std::uint64_t>(l);
  for (int k = 1; k <= max_len; ++k) {
    total += shell;
    shell *= (2 * static_cast<std::uint64_t>(l) - 1);
  }
  return total;
}

// Streams every freely reduced word of length <= max_len exactly once, in
// length-then-lexicographic order.
class WordEnumerator {
 public:
  WordEnumerator(int l, int max_len) : l_(l), max_len_(max_len) {}

  bool next(Word& out) {
    if (!started_) {
      started_ = true;
      out = Word();
      return max_len_ >= 0;
    }
    if (advance()) {
      std::vector<Letter> ls;
      ls.reserve(codes_.size());
      for (int c : codes_) ls.push_back(Letter::from_code(c));
      out = Word(std::move(ls));
      return true;
    }
    return false;
  }

 private:
  bool admissible(std::size_t pos, int code) const {
    return pos == 0 || code != inverse_code(codes_[pos - 1]);
  }

  int first_admissible(std::size_t pos, int from) const {
    for (int c = from; c < 2 * l_; ++c) {
      if (admissible(pos, c)) return c;
    }
    return -1;
  }

  bool advance() {
    // Odometer over letter codes; falls through to the next length when the
    // current length is exhausted.
    if (static_cast<int>(codes_.size()) < 1) {
      if (max_len_ < 1) return false;
      codes_.assign(1, 0);
      return true;
    }
    std::size_t pos = codes_.size();
    while (pos > 0) {
      --pos;
      int c = first_admissible(pos, codes_[pos] + 1);
      if (c >= 0) {
        codes_[pos] = c;
        for (std::size_t p = pos + 1; p < codes_.size(); ++p) codes_[p] = first_admissible(p, 0);
        return true;
      }
    }
    if (static_cast<int>(codes_.size()) >= max_len_) return false;
    codes_.assign(codes_.size() + 1, 0);
    for (std::size_t p = 1; p < codes_.size(); ++p) codes_[p] = first_admissible(p, 0);
    return true;
  }

  int l_;
  int max_len_;
  bool started_ = false;
  std::vector<int> codes_;
};

inline void for_each_word(int l, int max_len, const std::function<void(const Word&)>& fn) {
  WordEnumerator en(l, max_len);
  Word w;
  while (en.next(w)) fn(w);
}

// --- serialization -------------------------------------------------------
//
// l <= 26: "a b A" with capitals marking inverses. Larger alphabets fall
// back to "g0 g1' g0" with an apostrophe marking inverses.

inline std::string letter_name(const Letter& s, int l) {
  if (l <= 26) {
    char c = static_cast<char>((s.inverted ? 'A' : 'a') + s.index);
    return std::string(1, c);
  }
  return "g" + std::to_string(s.index) + (s.inverted ? "'" : "");
}

inline std::string to_string(const Word& w, int l) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += letter_name(w[i], l);
  }
  return out;
}

inline Word parse_word(std::string_view text, int l) {
  std::vector<Letter> ls;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == ' ') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    std::string_view tok = text.substr(i, j - i);
    Letter s;
    if (tok.size() >= 2 && tok[0] == 'g') {
      bool inv = tok.back() == '\'';
      std::string_view num = tok.substr(1, tok.size() - 1 - (inv ? 1 : 0));
      int idx = 0;
      for (char c : num) {
        if (c < '0' || c > '9') throw ParseError("parse_word: bad token '" + std::string(tok) + "'");
        idx = idx * 10 + (c - '0');
      }
      s = Letter{idx, inv};
    } else if (tok.size() == 1 && tok[0] >= 'a' && tok[0] <= 'z') {
      s = Letter{tok[0] - 'a', false};
    } else if (tok.size() == 1 && tok[0] >= 'A' && tok[0] <= 'Z') {
      s = Letter{tok[0] - 'A', true};
    } else {
      throw ParseError("parse_word: bad token '" + std::string(tok) + "'");
    }
    if (s.index >= l) throw ParseError("parse_word: letter index out of range");
    ls.push_back(s);
    i = j;
  }
  return Word(std::move(ls));
}

}  // namespace weyl
