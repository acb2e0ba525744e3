#pragma once

// Estimators and report assembly on top of a census table: the critical
// exponent fit, limit-cone statistics, the Jordan/Cartan gap table, class
// multiplicities, and the normalized growth-ratio tables.

#include "weyl/census.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace weyl {

namespace detail {

struct LineFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  std::vector<double> residuals;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateWindow("regression grid has no spread");
  LineFit fit;
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double ss = 0;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - (intercept + fit.slope * x[i]);
    ss += fit.residuals[i] * fit.residuals[i];
  }
  fit.stderr_slope = n > 2 ? std::sqrt(ss / (static_cast<double>(n - 2) * sxx)) : 0.0;
  return fit;
}

}  // namespace detail

struct DeltaEstimate {
  double delta_hat = 0.0;
  double std_error = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<double> grid_R;
  std::vector<double> grid_logN;
  std::vector<double> residuals;
};

// Least-squares slope of log N(R) on an even grid inside the window.
inline DeltaEstimate estimate_delta(const CensusTable& table, double R1, double R2, int bins = 16) {
  if (R2 > table.horizon_R) {
    throw WindowBeyondHorizon("estimate_delta: window end exceeds the census horizon");
  }
  if (!(R2 > R1) || bins < 2) throw DegenerateWindow("estimate_delta: empty window");
  std::vector<double> xs, ys;
  for (int i = 0; i < bins; ++i) {
    const double r = R1 + (R2 - R1) * static_cast<double>(i) / (bins - 1);
    const auto c = count_orbit(table, r);
    if (c.count == 0) continue;
    xs.push_back(r);
    ys.push_back(std::log(static_cast<double>(c.count)));
  }
  if (xs.size() < 5) {
    throw DegenerateWindow("estimate_delta: fewer than 5 grid points carry counts");
  }
  detail::LineFit fit = detail::least_squares(xs, ys);
  DeltaEstimate est;
  est.delta_hat = fit.slope;
  est.std_error = fit.stderr_slope;
  est.window_lo = R1;
  est.window_hi = R2;
  est.grid_R = std::move(xs);
  est.grid_logN = std::move(ys);
  est.residuals = std::move(fit.residuals);
  return est;
}

struct ConeReport {
  bool rank_one = false;  // dimension 2: the chamber is a half-line
  double alpha_hat = 0.0;
  double min_wall_gap = 0.0;
  std::size_t samples = 0;
  std::map<int, double> per_length_min_gap;
};

// Spread and wall clearance of the normalized Cartan directions of all
// words of length >= min_len.
inline ConeReport limit_cone(const CensusTable& table, int min_len) {
  ConeReport rep;
  rep.rank_one = table.dim == 2;
  double min_gap = std::numeric_limits<double>::infinity();
  std::vector<Vec> dirs;
  Vec dir;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.word_len[i] < min_len) continue;
    if (!table.cartan_dir(i, dir)) continue;
    ++rep.samples;
    const double gap = WeylVector{dir}.min_gap();
    min_gap = std::min(min_gap, gap);
    auto [it, fresh] = rep.per_length_min_gap.emplace(table.word_len[i], gap);
    if (!fresh) it->second = std::min(it->second, gap);
    if (!rep.rank_one) dirs.push_back(dir);
  }
  rep.min_wall_gap = rep.samples ? min_gap : 0.0;
  if (rep.rank_one || dirs.empty()) return rep;

  if (table.dim == 3) {
    // directions live in a 2-plane: the spread of polar angles is exact
    Vec u1(3), u2(3);
    u1 << 1.0 / std::sqrt(2.0), 0.0, -1.0 / std::sqrt(2.0);
    u2 << 1.0 / std::sqrt(6.0), -2.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Vec& v : dirs) {
      const double phi = std::atan2(v.dot(u2), v.dot(u1));
      lo = std::min(lo, phi);
      hi = std::max(hi, phi);
    }
    rep.alpha_hat = hi - lo;
  } else {
    // higher rank: max pairwise angle over a deterministic subsample
    const std::size_t cap = 2048;
    const std::size_t stride = std::max<std::size_t>(1, dirs.size() / cap);
    std::vector<const Vec*> sub;
    for (std::size_t i = 0; i < dirs.size(); i += stride) sub.push_back(&dirs[i]);
    for (std::size_t i = 0; i < sub.size(); ++i) {
      for (std::size_t j = i + 1; j < sub.size(); ++j) {
        rep.alpha_hat = std::max(rep.alpha_hat,
                                 chamber_angle(WeylVector{*sub[i]}, WeylVector{*sub[j]}));
      }
    }
  }
  return rep;
}

struct BenoistReport {
  std::vector<double> per_length_max;  // index = word length; -1 where no very reduced word
  double m_hat = 0.0;
};

// Per word length, the largest || L(w) - H(o, w.o) || over very reduced
// records; m_hat is the overall maximum.
inline BenoistReport benoist_gap(const CensusTable& table) {
  BenoistReport rep;
  rep.per_length_max.assign(table.max_len + 1, -1.0);
  Vec diff(table.dim);
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!table.very_reduced(i)) continue;
    diff = table.jordan_of(i) - table.cartan_of(i);
    const double gap = diff.norm();
    double& slot = rep.per_length_max[table.word_len[i]];
    slot = std::max(slot, gap);
    rep.m_hat = std::max(rep.m_hat, gap);
  }
  return rep;
}

struct MultiplicityReport {
  double t = 0.0;
  std::uint64_t max_count = 0;
  std::vector<std::string> root_keys;          // letter-code strings
  std::vector<std::uint64_t> per_root_class;   // aligned with root_keys
};

// Census records per primitive-root class with translation length <= t.
inline MultiplicityReport class_multiplicity(const CensusTable& table, double t) {
  MultiplicityReport rep;
  rep.t = t;
  std::unordered_map<std::string, std::size_t> root_id;
  std::vector<std::size_t> class_to_root(table.classes.size());
  for (std::size_t c = 0; c < table.classes.size(); ++c) {
    std::string rk = table.classes[c].key.substr(0, table.classes[c].root_len);
    auto [it, fresh] = root_id.emplace(std::move(rk), rep.root_keys.size());
    if (fresh) {
      rep.root_keys.push_back(it->first);
      rep.per_root_class.push_back(0);
    }
    class_to_root[c] = it->second;
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.class_id[i] < 0) continue;
    if (table.length_of(i) <= t) ++rep.per_root_class[class_to_root[table.class_id[i]]];
  }
  for (std::uint64_t c : rep.per_root_class) rep.max_count = std::max(rep.max_count, c);
  return rep;
}

struct MultiplicitySlope {
  std::vector<double> grid_t;
  std::vector<std::uint64_t> max_counts;
  double slope = 0.0;  // log max_count against log t
};

inline MultiplicitySlope multiplicity_slope(const CensusTable& table, int points = 8,
                                            double lo_frac = 0.5) {
  MultiplicitySlope rep;
  std::vector<double> xs, ys;
  for (int i = 0; i < points; ++i) {
    const double t = table.horizon_t * (lo_frac + (1.0 - lo_frac) * i / (points - 1));
    const auto m = class_multiplicity(table, t);
    rep.grid_t.push_back(t);
    rep.max_counts.push_back(m.max_count);
    if (m.max_count > 0 && t > 0) {
      xs.push_back(std::log(t));
      ys.push_back(std::log(static_cast<double>(m.max_count)));
    }
  }
  if (xs.size() >= 3) rep.slope = detail::least_squares(xs, ys).slope;
  return rep;
}

struct RatioRow {
  double x = 0.0;
  std::uint64_t count = 0;
  double ratio_lower = 0.0;
  double ratio_upper = 0.0;
};

struct ReportOptions {
  double orbit_lo_frac = 0.4;  // orbit grid spans [lo_frac * H_R, H_R]
  int orbit_bins = 16;
  double class_lo_frac = 0.5;  // class grid spans [lo_frac * H_t, H_t]
  int class_bins = 12;
  int cone_min_len = 6;
  int multiplicity_points = 8;
};

struct GrowthReport {
  std::string fingerprint;
  int rank = 1;  // r = dim - 1
  DeltaEstimate delta;
  std::vector<RatioRow> orbit_ratios;  // ratio = N(R) e^{-delta R} in both columns
  std::vector<RatioRow> class_ratios;  // lower = P t^r e^{-dt}, upper = P t e^{-dt}
  double p_slope = 0.0;
  double p_slope_stderr = 0.0;
  BenoistReport benoist;
  ConeReport cone;
  MultiplicitySlope multiplicity;

  nlohmann::ordered_json to_json() const;
};

// Normalized growth tables at the fitted exponent, plus the per-length gap
// table, cone statistics and class multiplicities.
inline GrowthReport theorem_report(const CensusTable& table, const DeltaEstimate& delta,
                                   const ReportOptions& opt = {}) {
  GrowthReport rep;
  rep.fingerprint = table.fingerprint;
  rep.rank = table.dim - 1;
  rep.delta = delta;

  const double dh = delta.delta_hat;
  for (int i = 0; i < opt.orbit_bins; ++i) {
    const double R = table.horizon_R *
                     (opt.orbit_lo_frac + (1.0 - opt.orbit_lo_frac) * i / (opt.orbit_bins - 1));
    const auto c = count_orbit(table, R);
    const double ratio = static_cast<double>(c.count) * std::exp(-dh * R);
    rep.orbit_ratios.push_back(RatioRow{R, c.count, ratio, ratio});
  }

  std::vector<double> xs, ys;
  for (int i = 0; i < opt.class_bins; ++i) {
    const double t = table.horizon_t *
                     (opt.class_lo_frac + (1.0 - opt.class_lo_frac) * i / (opt.class_bins - 1));
    const auto c = count_primitive_classes(table, t);
    const double p = static_cast<double>(c.count);
    rep.class_ratios.push_back(RatioRow{t, c.count, p * std::pow(t, rep.rank) * std::exp(-dh * t),
                                        p * t * std::exp(-dh * t)});
    if (c.count > 0) {
      xs.push_back(t);
      ys.push_back(std::log(p));
    }
  }
  if (xs.size() >= 3) {
    detail::LineFit fit = detail::least_squares(xs, ys);
    rep.p_slope = fit.slope;
    rep.p_slope_stderr = fit.stderr_slope;
  }

  rep.benoist = benoist_gap(table);
  rep.cone = limit_cone(table, std::min(opt.cone_min_len, table.max_len));
  rep.multiplicity = multiplicity_slope(table, opt.multiplicity_points);
  return rep;
}

inline nlohmann::ordered_json GrowthReport::to_json() const {
  nlohmann::ordered_json j;
  j["fingerprint"] = fingerprint;
  j["rank"] = rank;
  j["delta_hat"] = delta.delta_hat;
  j["delta_stderr"] = delta.std_error;
  j["delta_window"] = {delta.window_lo, delta.window_hi};
  j["delta_residuals"] = delta.residuals;
  j["p_slope"] = p_slope;
  j["p_slope_stderr"] = p_slope_stderr;
  j["benoist_m_hat"] = benoist.m_hat;
  j["benoist_per_length"] = benoist.per_length_max;
  j["alpha_hat"] = cone.alpha_hat;
  j["min_wall_gap"] = cone.min_wall_gap;
  j["cone_rank_one"] = cone.rank_one;
  j["cone_samples"] = cone.samples;
  {
    nlohmann::ordered_json per;
    for (const auto& [len, gap] : cone.per_length_min_gap) per[std::to_string(len)] = gap;
    j["cone_per_length_min_gap"] = per;
  }
  auto rows = [](const std::vector<RatioRow>& v) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : v) {
      arr.push_back({{"x", r.x}, {"count", r.count}, {"ratio_lower", r.ratio_lower},
                     {"ratio_upper", r.ratio_upper}});
    }
    return arr;
  };
  j["orbit_ratios"] = rows(orbit_ratios);
  j["class_ratios"] = rows(class_ratios);
  j["multiplicity_grid_t"] = multiplicity.grid_t;
  j["multiplicity_max_counts"] = multiplicity.max_counts;
  j["multiplicity_slope"] = multiplicity.slope;
  return j;
}

}  // namespace weyl
