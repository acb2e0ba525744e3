#pragma once

// Schottky generator systems: loading from a JSON config, numerical
// validation (regularity, flag transversality, disjoint flag balls and a
// sampled ping-pong certificate), generator powering, and word evaluation.
//
// Word products are evaluated together with their compound chains so that
// every log-singular-value of a long product is read off the top singular
// value of some chain member (see symmetric_space.hpp for why).

#include "weyl/core.hpp"
#include "weyl/symmetric_space.hpp"
#include "weyl/words.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace weyl {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct SchottkySystem {
  int dim = 0;
  int num_generators = 0;  // l
  int power = 1;
  double ball_radius = 0.2;
  int sample_count = 1000;
  std::uint64_t seed = 1;
  Tolerances tol;

  std::vector<Mat> seeds;                      // l normalized generator matrices
  std::vector<std::vector<Mat>> letter_chain;  // 2l chains; chain[0] is the letter matrix
  std::vector<double> letter_displacement;     // d(o, s.o) per letter code
  double max_displacement = 0.0;
  std::vector<Flag> fixed_flag;                // attracting flag per letter code
  std::vector<bool> flag_defined;              // per letter code
  bool validated = false;

  nlohmann::ordered_json config;  // canonical echo of the effective config
  std::string fingerprint;        // hash of config + library version

  int alphabet_size() const { return 2 * num_generators; }
  const Mat& letter(int code) const { return letter_chain[code][0]; }
  std::string letter_str(int code) const {
    return letter_name(Letter::from_code(code), num_generators);
  }
};

// --- word evaluation ------------------------------------------------------

// Running product of letter matrices plus its compound chain. Every 8
// multiplications each chain member is rescaled by det^{-1/n} to damp
// rounding drift of the determinant.
struct ChainedProduct {
  std::vector<Mat> chain;
  int length = 0;

  static ChainedProduct identity(const SchottkySystem& sys) {
    ChainedProduct p;
    p.chain.reserve(sys.dim - 1);
    p.chain.push_back(Mat::Identity(sys.dim, sys.dim));
    for (int k = 2; k <= sys.dim - 1; ++k) {
      const auto n = sys.letter_chain.empty() ? 0 : sys.letter_chain[0][k - 1].rows();
      p.chain.push_back(Mat::Identity(n, n));
    }
    return p;
  }

  void multiply(const SchottkySystem& sys, int code) {
    const auto& letter = sys.letter_chain[code];
    for (std::size_t k = 0; k < chain.size(); ++k) {
      chain[k] = chain[k] * letter[k];
      if (chain[k].cwiseAbs().maxCoeff() > 1e300) {
        throw Overflow("word product entry exceeds 1e300");
      }
    }
    ++length;
    if (length % 8 == 0) {
      for (Mat& m : chain) {
        // The determinant of the stored matrix is only recoverable while the
        // cancellation noise of the minor expansion, ~ d! * eps * maxabs^d,
        // stays far below 1. Outside that regime rescaling would inject the
        // noise into the product, so drift damping is skipped.
        const int n = static_cast<int>(m.rows());
        double fact = 1.0;
        for (int i = 2; i <= n; ++i) fact *= i;
        const double maxabs = m.cwiseAbs().maxCoeff();
        if (fact * 2.3e-16 * std::pow(maxabs, n) <= 1e-9) {
          const double det = m.determinant();
          m *= std::pow(det, -1.0 / static_cast<double>(n));
        }
      }
    }
  }

  WeylVector cartan() const { return cartan_from_compounds(chain); }
  WeylVector jordan() const { return jordan_from_compounds(chain); }
  const Mat& matrix() const { return chain[0]; }
};

inline ChainedProduct evaluate(const SchottkySystem& sys, const Word& w) {
  ChainedProduct p = ChainedProduct::identity(sys);
  for (const Letter& s : w.letters()) p.multiply(sys, s.code());
  return p;
}

struct GroupElement {
  Word word;
  Mat matrix;
};

inline GroupElement element(const SchottkySystem& sys, const Word& w) {
  return GroupElement{w, evaluate(sys, w).matrix()};
}

// --- loading --------------------------------------------------------------

namespace detail {

inline Mat matrix_power(const Mat& m, int p) {
  Mat out = Mat::Identity(m.rows(), m.cols());
  for (int i = 0; i < p; ++i) out = out * m;
  return out;
}

inline void rebuild_letters(SchottkySystem& sys) {
  const int l = sys.num_generators;
  sys.letter_chain.assign(2 * l, {});
  sys.letter_displacement.assign(2 * l, 0.0);
  sys.fixed_flag.assign(2 * l, Flag{});
  sys.flag_defined.assign(2 * l, false);

  for (int i = 0; i < l; ++i) {
    // Chain the seed first (its entries are modest, so minors are accurate),
    // then power and invert chainwise.
    std::vector<Mat> seed_chain = compound_chain(sys.seeds[i]);
    std::vector<Mat> fwd(seed_chain.size()), bwd(seed_chain.size());
    for (std::size_t k = 0; k < seed_chain.size(); ++k) {
      fwd[k] = matrix_power(seed_chain[k], sys.power);
      bwd[k] = fwd[k].inverse();
    }
    sys.letter_chain[2 * i] = std::move(fwd);
    sys.letter_chain[2 * i + 1] = std::move(bwd);
  }

  sys.max_displacement = 0.0;
  for (int c = 0; c < 2 * l; ++c) {
    sys.letter_displacement[c] = cartan_from_compounds(sys.letter_chain[c]).norm();
    sys.max_displacement = std::max(sys.max_displacement, sys.letter_displacement[c]);
    try {
      sys.fixed_flag[c] = fixed_flags(sys.letter(c), sys.tol.gap).first;
      sys.flag_defined[c] = true;
    } catch (const NotRegular&) {
      sys.flag_defined[c] = false;  // reported by validate()
    }
  }
  sys.validated = false;
}

inline nlohmann::ordered_json tolerances_json(const Tolerances& t) {
  nlohmann::ordered_json j;
  j["det"] = t.det;
  j["orth"] = t.orth;
  j["gap"] = t.gap;
  j["transversal"] = t.transversal;
  j["recon"] = t.recon;
  return j;
}

}  // namespace detail

// Parses and determinant-normalizes a generator system. Validation is a
// separate step; the returned system has validated == false.
inline SchottkySystem load_system(const nlohmann::json& cfg) {
  SchottkySystem sys;
  try {
    if (!cfg.contains("dimension") || !cfg["dimension"].is_number_integer()) {
      throw ParseError("config: missing integer field 'dimension'");
    }
    sys.dim = cfg["dimension"].get<int>();
    if (sys.dim < 2) throw ParseError("config: dimension must be >= 2");

    if (!cfg.contains("generators") || !cfg["generators"].is_array() || cfg["generators"].empty()) {
      throw ParseError("config: missing nonempty array 'generators'");
    }
    const int d = sys.dim;
    for (const auto& row : cfg["generators"]) {
      if (!row.is_array() || static_cast<int>(row.size()) != d * d) {
        throw DimensionMismatch("config: each generator needs dimension^2 row-major entries");
      }
      Mat g(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = row[i * d + j].get<double>();
      if (!all_finite(g)) throw ParseError("config: non-finite generator entry");
      const double det = g.determinant();
      if (std::abs(det - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "generator determinant " << det << " is not 1 within 1e-6";
        throw NotUnimodular(os.str());
      }
      g *= std::pow(det, -1.0 / d);
      sys.seeds.push_back(std::move(g));
    }
    sys.num_generators = static_cast<int>(sys.seeds.size());

    sys.power = cfg.value("power", 1);
    if (sys.power < 1) throw ParseError("config: power must be >= 1");
    sys.ball_radius = cfg.value("ball_radius", 0.2);
    if (!(sys.ball_radius > 0.0) || sys.ball_radius > 1.0) {
      throw ParseError("config: ball_radius must lie in (0, 1]");
    }
    sys.sample_count = cfg.value("sample_count", 1000);
    if (sys.sample_count < 0) throw ParseError("config: sample_count must be >= 0");
    sys.seed = cfg.value("seed", std::uint64_t{1});

    if (cfg.contains("tolerances")) {
      const auto& t = cfg["tolerances"];
      sys.tol.det = t.value("det", sys.tol.det);
      sys.tol.orth = t.value("orth", sys.tol.orth);
      sys.tol.gap = t.value("gap", sys.tol.gap);
      sys.tol.transversal = t.value("transversal", sys.tol.transversal);
      sys.tol.recon = t.value("recon", sys.tol.recon);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }

  detail::rebuild_letters(sys);

  nlohmann::ordered_json echo;
  echo["dimension"] = sys.dim;
  echo["generators"] = cfg["generators"];
  echo["power"] = sys.power;
  echo["ball_radius"] = sys.ball_radius;
  echo["sample_count"] = sys.sample_count;
  echo["seed"] = sys.seed;
  echo["tolerances"] = detail::tolerances_json(sys.tol);
  sys.config = std::move(echo);
  sys.fingerprint = [&] {
    std::uint64_t h = fnv1a(sys.config.dump());
    h = fnv1a(std::string(kLibraryVersion), h);
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
  }();
  return sys;
}

inline SchottkySystem load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return load_system(cfg);
}

// Rebuilds the same system with a different generator power.
inline SchottkySystem with_power(const SchottkySystem& sys, int p) {
  nlohmann::ordered_json cfg = sys.config;
  cfg["power"] = p;
  return load_system(cfg);
}

// --- validation -----------------------------------------------------------

enum class CheckKind { Regular, Transverse, BallsDisjoint, PingPong };

struct ValidationCheck {
  CheckKind kind;
  std::string name;
  bool pass = false;
  double margin = 0.0;  // positive iff the check passes
  std::string detail;
};

struct ValidationReport {
  bool passed = false;
  std::vector<ValidationCheck> checks;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["passed"] = passed;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
      nlohmann::ordered_json cj;
      cj["name"] = c.name;
      cj["pass"] = c.pass;
      cj["margin"] = c.margin;
      if (!c.detail.empty()) cj["detail"] = c.detail;
      j["checks"].push_back(cj);
    }
    return j;
  }
};

// Worst margin over the d-1 span conditions defining transversality.
inline double transversality_margin(const Flag& f1, const Flag& f2, double tol) {
  const int d = f1.dim();
  double worst = std::numeric_limits<double>::infinity();
  Mat joint(d, d);
  for (int i = 1; i <= d - 1; ++i) {
    joint.leftCols(i) = f1.frame.leftCols(i);
    joint.rightCols(d - i) = f2.frame.leftCols(d - i);
    Eigen::JacobiSVD<Mat> svd(joint);
    worst = std::min(worst, svd.singularValues().minCoeff() - tol);
  }
  return worst;
}

// Deterministic sample in the flag ball of the given radius: Gaussian
// perturbation of the frame, shrunk until it lands inside the ball.
inline Flag sample_flag_in_ball(const Flag& center, double radius, std::mt19937_64& rng) {
  const int d = center.dim();
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat noise(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) noise(i, j) = gauss(rng);
  double eps = radius * (0.05 + 0.95 * unif(rng));
  for (int tries = 0; tries < 80; ++tries) {
    Flag f{orthonormalize_columns(center.frame + eps * noise)};
    if (flag_distance(f, center) <= radius) return f;
    eps *= 0.5;
  }
  return center;
}

// Runs all system checks and marks the system validated iff every check
// passes. The ping-pong certificate is numerical: the 2l fixed flags are
// checked exactly, plus sample_count sampled flags per letter spread over
// the admissible source balls.
inline ValidationReport validate(SchottkySystem& sys) {
  ValidationReport rep;
  const int l = sys.num_generators;
  const int n = sys.alphabet_size();

  for (int i = 0; i < l; ++i) {
    ValidationCheck c{CheckKind::Regular, "regular_axial(" + sys.letter_str(2 * i) + ")", false, 0.0, ""};
    try {
      const WeylVector jv = jordan_projection(sys.letter(2 * i));
      c.margin = jv.min_gap() - sys.tol.gap;
      c.pass = c.margin > 0.0;
      if (!c.pass) c.detail = "eigenvalue moduli not separated at gap tolerance";
    } catch (const Error& e) {
      c.detail = e.what();
    }
    rep.checks.push_back(std::move(c));
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      ValidationCheck c{CheckKind::Transverse,
                        "transverse(" + sys.letter_str(i) + "," + sys.letter_str(j) + ")",
                        false, 0.0, ""};
      if (!sys.flag_defined[i] || !sys.flag_defined[j]) {
        c.detail = "fixed flag undefined (generator not regular axial)";
      } else {
        c.margin = transversality_margin(sys.fixed_flag[i], sys.fixed_flag[j], sys.tol.transversal);
        c.pass = c.margin > 0.0;
      }
      rep.checks.push_back(std::move(c));
    }
  }

  {
    ValidationCheck c{CheckKind::BallsDisjoint, "flag_balls_disjoint", false, 0.0, ""};
    double worst = std::numeric_limits<double>::infinity();
    std::string worst_pair;
    bool defined = true;
    for (int i = 0; i < n && defined; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (!sys.flag_defined[i] || !sys.flag_defined[j]) {
          defined = false;
          break;
        }
        const double m = flag_distance(sys.fixed_flag[i], sys.fixed_flag[j]) - 2.0 * sys.ball_radius;
        if (m < worst) {
          worst = m;
          worst_pair = sys.letter_str(i) + "," + sys.letter_str(j);
        }
      }
    }
    if (!defined) {
      c.detail = "fixed flag undefined (generator not regular axial)";
    } else {
      c.margin = worst;
      c.pass = worst > 0.0;
      c.detail = "tightest pair: " + worst_pair;
    }
    rep.checks.push_back(std::move(c));
  }

  for (int s = 0; s < n; ++s) {
    ValidationCheck c{CheckKind::PingPong, "ping_pong(" + sys.letter_str(s) + ")", false, 0.0, ""};
    if (!sys.flag_defined[s]) {
      c.detail = "fixed flag undefined (generator not regular axial)";
      rep.checks.push_back(std::move(c));
      continue;
    }
    const int forbidden = inverse_code(s);
    std::vector<int> admissible;
    for (int j = 0; j < n; ++j) {
      if (j != forbidden) admissible.push_back(j);
    }
    bool defined = true;
    double worst_dist = 0.0;
    std::string worst_src;
    // exact checks at the fixed flags themselves
    for (int j : admissible) {
      if (!sys.flag_defined[j]) {
        defined = false;
        break;
      }
      const double dist = flag_distance(act(sys.letter(s), sys.fixed_flag[j]), sys.fixed_flag[s]);
      if (dist > worst_dist) {
        worst_dist = dist;
        worst_src = "fixed flag " + sys.letter_str(j);
      }
    }
    if (!defined) {
      c.detail = "fixed flag undefined (generator not regular axial)";
      rep.checks.push_back(std::move(c));
      continue;
    }
    for (int k = 0; k < sys.sample_count; ++k) {
      const int j = admissible[k % admissible.size()];
      std::mt19937_64 rng(mix_seed(sys.seed, static_cast<std::uint64_t>(s) * 1000003ULL + k, j));
      Flag f = sample_flag_in_ball(sys.fixed_flag[j], sys.ball_radius, rng);
      const double dist = flag_distance(act(sys.letter(s), f), sys.fixed_flag[s]);
      if (dist > worst_dist) {
        worst_dist = dist;
        worst_src = "sample " + std::to_string(k) + " in ball " + sys.letter_str(j);
      }
    }
    c.margin = sys.ball_radius - worst_dist;
    c.pass = c.margin > 0.0;
    if (!worst_src.empty()) c.detail = "worst image from " + worst_src;
    rep.checks.push_back(std::move(c));
  }

  rep.passed = true;
  for (const auto& c : rep.checks) rep.passed = rep.passed && c.pass;
  sys.validated = rep.passed;
  return rep;
}

// validate() variant that throws a typed error for the first failing check.
inline ValidationReport validate_or_throw(SchottkySystem& sys) {
  ValidationReport rep = validate(sys);
  if (!rep.passed) {
    for (const auto& c : rep.checks) {
      if (c.pass) continue;
      const std::string msg = c.name + (c.detail.empty() ? "" : ": " + c.detail);
      switch (c.kind) {
        case CheckKind::Regular: throw NotRegular(msg);
        case CheckKind::Transverse: throw NotTransverse(msg);
        case CheckKind::BallsDisjoint: throw NotTransverse(msg);
        case CheckKind::PingPong: throw PingPongFailed(msg);
      }
    }
  }
  return rep;
}

// Least power <= max_power at which the system validates.
inline int suggest_power(const SchottkySystem& sys, int max_power) {
  for (int p = 1; p <= max_power; ++p) {
    SchottkySystem cand = with_power(sys, p);
    if (validate(cand).passed) return p;
  }
  throw NoPowerFound("no power <= " + std::to_string(max_power) + " validates this system");
}

}  // namespace weyl
