#pragma once

// Exhaustive sweep over all reduced words up to a length bound. Every
// counter and estimator downstream reads from the resulting table.
//
// The word tree is partitioned by first letter; each worker runs a
// depth-first sweep of its subtree, carrying the running product and its
// compound chain along the path, and emits one record per word. Blocks are
// merged in (length, subtree, preorder) order, which is exactly
// length-then-lexicographic order, so the table is identical at any worker
// count.
//
// Translation data is per conjugacy class: the Jordan projection is a class
// function, so it is evaluated once on the canonical (cyclically reduced)
// representative, whose product chain is short and well aligned.

#include "weyl/schottky.hpp"

#include <atomic>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

namespace weyl {

struct BuildOptions {
  std::uint64_t budget = 100000000ULL;  // record cap
  int threads = 0;                      // 0 = hardware concurrency
};

struct ClassInfo {
  std::string key;      // canonical core, letter-code bytes
  int canonical_len = 0;
  int root_len = 0;     // length of the primitive root
  int power = 1;        // canonical_len / root_len
  Vec jordan;           // translation vector of the class
  double length = 0.0;  // ||jordan||
  double root_length = 0.0;
};

class CensusTable {
 public:
  // system + sweep metadata
  int dim = 0;
  int num_generators = 0;
  int max_len = 0;
  std::uint64_t seed = 0;
  std::string fingerprint;
  double horizon_R = 0.0;
  double horizon_t = 0.0;
  double max_displacement = 0.0;
  double gap_tol = 0.0;

  // per-record columns
  std::vector<std::string> word_codes;
  std::vector<std::uint8_t> word_len;
  std::vector<double> distance;
  std::vector<std::int32_t> class_id;  // -1 for the identity record
  std::vector<std::uint8_t> bits;      // bit0 very_reduced, bit1 flag, bit2 inv flag,
                                       // bit3 class key names the record's inverse
  std::vector<double> cartan;          // dim-strided
  std::vector<double> flag_frames;     // dim*dim-strided, row-major
  std::vector<double> inv_flag_frames;

  std::vector<ClassInfo> classes;

  // derived, rebuilt by finalize()
  std::vector<double> sorted_distances;
  std::vector<double> sorted_root_lengths;  // one entry per distinct primitive root

  std::size_t size() const { return distance.size(); }

  bool very_reduced(std::size_t i) const { return bits[i] & 1; }
  bool has_flag(std::size_t i) const { return bits[i] & 2; }
  bool has_inv_flag(std::size_t i) const { return bits[i] & 4; }
  bool class_inverted(std::size_t i) const { return bits[i] & 8; }

  double length_of(std::size_t i) const {
    return class_id[i] < 0 ? 0.0 : classes[class_id[i]].length;
  }
  // Translation vector of the record's own element. The class stores the
  // canonical orientation; records on the inverse side get the negated
  // reverse, which is the translation vector of the inverse element.
  Vec jordan_of(std::size_t i) const {
    if (class_id[i] < 0) return Vec::Zero(dim);
    const Vec& j = classes[class_id[i]].jordan;
    if (!class_inverted(i)) return j;
    Vec out(dim);
    for (int k = 0; k < dim; ++k) out(k) = -j(dim - 1 - k);
    return out;
  }
  bool primitive(std::size_t i) const {
    return class_id[i] >= 0 && classes[class_id[i]].power == 1;
  }

  Eigen::Map<const Vec> cartan_of(std::size_t i) const {
    return Eigen::Map<const Vec>(cartan.data() + i * dim, dim);
  }
  // Normalized Cartan direction; false when the record sits at the origin.
  bool cartan_dir(std::size_t i, Vec& out) const {
    if (distance[i] < 1e-9) return false;
    out = cartan_of(i) / distance[i];
    return true;
  }
  Flag flag_of(std::size_t i) const {
    return Flag{Eigen::Map<const Mat>(flag_frames.data() + i * dim * dim, dim, dim)};
  }
  Flag inv_flag_of(std::size_t i) const {
    return Flag{Eigen::Map<const Mat>(inv_flag_frames.data() + i * dim * dim, dim, dim)};
  }

  void finalize() {
    sorted_distances = distance;
    std::sort(sorted_distances.begin(), sorted_distances.end());
    std::unordered_map<std::string, double> roots;
    for (const ClassInfo& c : classes) {
      roots.emplace(c.key.substr(0, c.root_len), c.root_length);
    }
    sorted_root_lengths.clear();
    sorted_root_lengths.reserve(roots.size());
    for (const auto& [k, v] : roots) sorted_root_lengths.push_back(v);
    std::sort(sorted_root_lengths.begin(), sorted_root_lengths.end());
  }
};

namespace census_detail {

inline std::string cyclic_core_codes(const std::string& w) {
  std::size_t lo = 0, hi = w.size();
  while (hi - lo >= 2 && (static_cast<unsigned char>(w[lo]) ^ 1) == static_cast<unsigned char>(w[hi - 1])) {
    ++lo;
    --hi;
  }
  return w.substr(lo, hi - lo);
}

inline std::string invert_codes(const std::string& w) {
  std::string r(w.rbegin(), w.rend());
  for (char& c : r) c = static_cast<char>(c ^ 1);
  return r;
}

inline std::size_t smallest_period_codes(const std::string& w) {
  const std::size_t n = w.size();
  for (std::size_t q = 1; q <= n; ++q) {
    if (n % q != 0) continue;
    bool ok = true;
    for (std::size_t i = q; i < n && ok; ++i) ok = (w[i] == w[i % q]);
    if (ok) return q;
  }
  return n;
}

inline std::string min_rotation(const std::string& w) {
  const std::size_t n = w.size();
  std::string best = w;
  std::string cand(n, '\0');
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) cand[i] = w[(j + i) % n];
    if (cand < best) best = cand;
  }
  return best;
}

// Lexicographic minimum over rotations of the core and of its inverse.
// `inverted` reports that the minimum sits on the inverse side, i.e. the
// canonical word represents the inverse of the given core. The two sides
// never tie: no nontrivial element of a free group is conjugate to its own
// inverse.
inline std::string canonical_key_codes(const std::string& core, bool* inverted = nullptr) {
  std::string own = min_rotation(core);
  std::string inv = min_rotation(invert_codes(core));
  const bool flip = inv < own;
  if (inverted) *inverted = flip;
  return flip ? inv : own;
}

struct Block {
  std::vector<std::string> word_codes;
  std::vector<std::string> class_keys;
  std::vector<std::uint8_t> word_len;
  std::vector<double> distance;
  std::vector<std::uint8_t> bits;
  std::vector<double> cartan;
  std::vector<double> flag_frames;
  std::vector<double> inv_flag_frames;
  std::vector<std::vector<std::uint32_t>> by_len;  // local row ids per length
};

struct Sweeper {
  const SchottkySystem& sys;
  int max_len;
  Block& blk;

  std::string codes;
  std::vector<ChainedProduct> stack;
  Eigen::JacobiSVD<Mat> svd_main;
  std::vector<Eigen::JacobiSVD<Mat>> svd_comp;

  Sweeper(const SchottkySystem& s, int L, Block& b) : sys(s), max_len(L), blk(b) {
    stack.reserve(L + 1);
    stack.push_back(ChainedProduct::identity(sys));
    for (int k = 2; k <= sys.dim - 1; ++k) {
      svd_comp.emplace_back();
    }
  }

  void emit() {
    const int d = sys.dim;
    const ChainedProduct& p = stack.back();

    svd_main.compute(p.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    std::vector<double> s(d - 1);
    s[0] = std::log(svd_main.singularValues()(0));
    for (int k = 2; k <= d - 1; ++k) {
      svd_comp[k - 2].compute(p.chain[k - 1]);
      s[k - 1] = std::log(svd_comp[k - 2].singularValues()(0));
    }
    const WeylVector h = detail::from_partial_log_sums(s);
    const double dist = h.norm();

    std::uint8_t b = 0;
    const std::size_t n = codes.size();
    const bool vr = n == 0 || ((static_cast<unsigned char>(codes[0]) ^ 1) !=
                               static_cast<unsigned char>(codes[n - 1]));
    if (vr) b |= 1;
    const bool regular = h.min_gap() > sys.tol.gap;
    if (regular) b |= 2 | 4;

    bool inverted = false;
    blk.word_codes.push_back(codes);
    blk.class_keys.push_back(
        n == 0 ? std::string() : canonical_key_codes(cyclic_core_codes(codes), &inverted));
    if (inverted) b |= 8;
    blk.word_len.push_back(static_cast<std::uint8_t>(n));
    blk.distance.push_back(dist);
    blk.bits.push_back(b);
    for (int i = 0; i < d; ++i) blk.cartan.push_back(h.coords(i));
    if (regular) {
      const Mat& u = svd_main.matrixU();
      const Mat& v = svd_main.matrixV();
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) blk.flag_frames.push_back(u(i, j));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) blk.inv_flag_frames.push_back(v(i, d - 1 - j));
    } else {
      blk.flag_frames.insert(blk.flag_frames.end(), d * d, 0.0);
      blk.inv_flag_frames.insert(blk.inv_flag_frames.end(), d * d, 0.0);
    }
    blk.by_len[n].push_back(static_cast<std::uint32_t>(blk.word_len.size() - 1));
  }

  void descend() {
    emit();
    const int depth = static_cast<int>(codes.size());
    if (depth >= max_len) return;
    const int forbidden = depth == 0 ? -1 : inverse_code(static_cast<unsigned char>(codes.back()));
    for (int c = 0; c < sys.alphabet_size(); ++c) {
      if (c == forbidden) continue;
      codes.push_back(static_cast<char>(c));
      stack.push_back(stack.back());
      stack.back().multiply(sys, c);
      descend();
      stack.pop_back();
      codes.pop_back();
    }
  }
};

}  // namespace census_detail

inline CensusTable build_census(const SchottkySystem& sys, int L, BuildOptions opt = {}) {
  if (!sys.validated) throw Error("build_census: system has not passed validation");
  if (L < 0) throw Error("build_census: negative word length bound");

  {
    // projected record count against the budget, computed without overflow
    double projected = 1.0, shell = 2.0 * sys.num_generators;
    for (int k = 1; k <= L; ++k) {
      projected += shell;
      shell *= 2.0 * sys.num_generators - 1.0;
      if (projected > static_cast<double>(opt.budget)) {
        throw BudgetExceeded("build_census: projected record count exceeds budget");
      }
    }
  }

  using census_detail::Block;
  using census_detail::Sweeper;

  CensusTable table;
  table.dim = sys.dim;
  table.num_generators = sys.num_generators;
  table.max_len = L;
  table.seed = sys.seed;
  table.fingerprint = sys.fingerprint;
  table.max_displacement = sys.max_displacement;
  table.gap_tol = sys.tol.gap;

  const int n_tasks = L >= 1 ? sys.alphabet_size() : 0;
  std::vector<Block> blocks(n_tasks);
  for (Block& b : blocks) b.by_len.assign(L + 1, {});

  int threads = opt.threads > 0 ? opt.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n_tasks == 0 ? 1 : n_tasks));

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mu;

  auto work = [&]() {
    try {
      while (!failed.load(std::memory_order_relaxed)) {
        const int t = next.fetch_add(1);
        if (t >= n_tasks) break;
        Sweeper sweep(sys, L, blocks[t]);
        sweep.codes.push_back(static_cast<char>(t));
        sweep.stack.push_back(sweep.stack.back());
        sweep.stack.back().multiply(sys, t);
        sweep.descend();
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(failure_mu);
      failed = true;
      if (failure.empty()) failure = e.what();
    }
  };

  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failed) throw Error("build_census: " + failure);

  // identity record
  const int d = sys.dim;
  std::size_t total = 1;
  for (const Block& b : blocks) total += b.word_len.size();

  table.word_codes.reserve(total);
  table.word_len.reserve(total);
  table.distance.reserve(total);
  table.class_id.reserve(total);
  table.bits.reserve(total);
  table.cartan.reserve(total * d);
  table.flag_frames.reserve(total * d * d);
  table.inv_flag_frames.reserve(total * d * d);

  std::vector<std::string> class_keys;
  class_keys.reserve(total);

  table.word_codes.emplace_back();
  table.word_len.push_back(0);
  table.distance.push_back(0.0);
  table.bits.push_back(1);  // identity is trivially very reduced, flags absent
  table.cartan.insert(table.cartan.end(), d, 0.0);
  table.flag_frames.insert(table.flag_frames.end(), d * d, 0.0);
  table.inv_flag_frames.insert(table.inv_flag_frames.end(), d * d, 0.0);
  class_keys.emplace_back();

  for (int len = 1; len <= L; ++len) {
    for (Block& b : blocks) {
      for (std::uint32_t r : b.by_len[len]) {
        table.word_codes.push_back(std::move(b.word_codes[r]));
        table.word_len.push_back(b.word_len[r]);
        table.distance.push_back(b.distance[r]);
        table.bits.push_back(b.bits[r]);
        table.cartan.insert(table.cartan.end(), b.cartan.begin() + r * d,
                            b.cartan.begin() + (r + 1) * d);
        table.flag_frames.insert(table.flag_frames.end(), b.flag_frames.begin() + r * d * d,
                                 b.flag_frames.begin() + (r + 1) * d * d);
        table.inv_flag_frames.insert(table.inv_flag_frames.end(),
                                     b.inv_flag_frames.begin() + r * d * d,
                                     b.inv_flag_frames.begin() + (r + 1) * d * d);
        class_keys.push_back(std::move(b.class_keys[r]));
      }
    }
  }
  blocks.clear();
  blocks.shrink_to_fit();

  // conjugacy classes, ids in first-occurrence order
  std::unordered_map<std::string, std::int32_t> key_to_id;
  key_to_id.reserve(total / 4);
  table.class_id.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    if (class_keys[i].empty()) {
      table.class_id[i] = -1;
      continue;
    }
    auto [it, inserted] = key_to_id.emplace(class_keys[i], static_cast<std::int32_t>(table.classes.size()));
    if (inserted) {
      ClassInfo info;
      info.key = class_keys[i];
      info.canonical_len = static_cast<int>(info.key.size());
      info.root_len = static_cast<int>(census_detail::smallest_period_codes(info.key));
      info.power = info.canonical_len / info.root_len;
      table.classes.push_back(std::move(info));
    }
    table.class_id[i] = it->second;
  }
  class_keys.clear();
  class_keys.shrink_to_fit();

  // translation data per class from the canonical representative
  for (ClassInfo& c : table.classes) {
    ChainedProduct p = evaluate(sys, Word::from_codes(c.key));
    const WeylVector jv = jordan_from_compounds(p.chain);
    c.jordan = jv.coords;
    c.length = jv.norm();
    c.root_length = c.length / c.power;
  }

  // horizons: completeness radii read off the top word length
  table.horizon_R = 0.0;
  table.horizon_t = 0.0;
  if (L >= 1) {
    double hr = std::numeric_limits<double>::infinity();
    double ht = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < total; ++i) {
      if (table.word_len[i] != L) continue;
      hr = std::min(hr, table.distance[i]);
      if (table.very_reduced(i)) ht = std::min(ht, table.length_of(i));
    }
    table.horizon_R = hr;
    table.horizon_t = ht;
  }

  table.finalize();
  return table;
}

// --- counters ---------------------------------------------------------------

struct OrbitCount {
  std::uint64_t count = 0;
  bool incomplete = false;  // R lies beyond the census horizon
};

inline OrbitCount count_orbit(const CensusTable& table, double R) {
  const auto& v = table.sorted_distances;
  const auto it = std::lower_bound(v.begin(), v.end(), R);
  return OrbitCount{static_cast<std::uint64_t>(it - v.begin()), R > table.horizon_R};
}

struct ClassCount {
  std::uint64_t count = 0;
  bool incomplete = false;
};

// Distinct primitive-root classes with translation length < t. A class and
// its inverse share one canonical key, so each unordered pair counts once.
inline ClassCount count_primitive_classes(const CensusTable& table, double t) {
  const auto& v = table.sorted_root_lengths;
  const auto it = std::lower_bound(v.begin(), v.end(), t);
  return ClassCount{static_cast<std::uint64_t>(it - v.begin()), t > table.horizon_t};
}

struct FlagBall {
  Flag center;
  double radius = 0.2;
};

struct DirectionalCount {
  std::uint64_t count = 0;
  std::uint64_t excluded = 0;  // records below R with undefined flags
  bool incomplete = false;
};

// Sorted distances of records whose orbit flag lies in ball A and whose
// inverse flag lies in ball B; the grid queries of the reports reuse this.
inline std::vector<double> directional_distances(const CensusTable& table, const FlagBall& a,
                                                 const FlagBall& b,
                                                 std::uint64_t* undefined_flags = nullptr) {
  std::vector<double> out;
  std::uint64_t undefined = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!table.has_flag(i) || !table.has_inv_flag(i)) {
      ++undefined;
      continue;
    }
    if (flag_distance(table.flag_of(i), a.center) <= a.radius &&
        flag_distance(table.inv_flag_of(i), b.center) <= b.radius) {
      out.push_back(table.distance[i]);
    }
  }
  std::sort(out.begin(), out.end());
  if (undefined_flags) *undefined_flags = undefined;
  return out;
}

inline DirectionalCount count_directional(const CensusTable& table, double R, const FlagBall& a,
                                          const FlagBall& b) {
  if (!(a.radius > 0.0) || a.radius > 1.0 || !(b.radius > 0.0) || b.radius > 1.0) {
    throw Error("count_directional: ball radius must lie in (0, 1]");
  }
  DirectionalCount res;
  res.incomplete = R > table.horizon_R;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table.distance[i] < R)) continue;
    if (!table.has_flag(i) || !table.has_inv_flag(i)) {
      ++res.excluded;
      continue;
    }
    if (flag_distance(table.flag_of(i), a.center) <= a.radius &&
        flag_distance(table.inv_flag_of(i), b.center) <= b.radius) {
      ++res.count;
    }
  }
  return res;
}

}  // namespace weyl
