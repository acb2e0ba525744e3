#pragma once

// Census persistence: a CSV of per-word records plus a JSON sidecar carrying
// the fingerprint, horizons and config echo. Doubles are written in
// shortest round-trip form, so a reload reproduces the table exactly and
// identical runs produce byte-identical files.

#include "weyl/census.hpp"
#include "weyl/reports.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace weyl {

namespace io_detail {

inline void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw ParseError("census csv: bad numeric field '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw ParseError("census csv: bad integer field '" + std::string(s) + "'");
  return v;
}

// Streams chunks to disk while folding the FNV hash of the byte stream.
struct HashedWriter {
  std::ofstream out;
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  std::string buffer;

  explicit HashedWriter(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw Error("cannot open for writing: " + path);
    buffer.reserve(1 << 20);
  }
  void append(std::string_view s) {
    buffer.append(s);
    if (buffer.size() > (1 << 20) - 4096) flush_chunk();
  }
  void flush_chunk() {
    hash = fnv1a(buffer.data(), buffer.size(), hash);
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    buffer.clear();
  }
  std::uint64_t finish() {
    flush_chunk();
    out.close();
    if (!out) throw Error("write failed while closing census csv");
    return hash;
  }
};

}  // namespace io_detail

inline std::string census_csv_header(int d) {
  std::string h = "word,word_len,distance,length,very_reduced,class_key,primitive";
  for (int i = 0; i < d; ++i) h += ",cartan_" + std::to_string(i);
  h += ",flag_ok";
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h += ",flag_" + std::to_string(i) + std::to_string(j);
  h += ",inv_flag_ok";
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h += ",inv_flag_" + std::to_string(i) + std::to_string(j);
  return h;
}

// Writes the CSV and returns the FNV-1a hash of its bytes.
inline std::uint64_t save_census_csv(const CensusTable& table, const std::string& path) {
  io_detail::HashedWriter w(path);
  const int d = table.dim;
  const int l = table.num_generators;
  w.append(census_csv_header(d));
  w.append("\n");
  std::string line;
  for (std::size_t i = 0; i < table.size(); ++i) {
    line.clear();
    line += to_string(Word::from_codes(table.word_codes[i]), l);
    line += ',';
    line += std::to_string(static_cast<int>(table.word_len[i]));
    line += ',';
    io_detail::append_double(line, table.distance[i]);
    line += ',';
    io_detail::append_double(line, table.length_of(i));
    line += ',';
    line += table.very_reduced(i) ? '1' : '0';
    line += ',';
    if (table.class_id[i] >= 0) {
      line += to_string(Word::from_codes(table.classes[table.class_id[i]].key), l);
    }
    line += ',';
    line += table.primitive(i) ? '1' : '0';
    for (int k = 0; k < d; ++k) {
      line += ',';
      io_detail::append_double(line, table.cartan[i * d + k]);
    }
    line += ',';
    line += table.has_flag(i) ? '1' : '0';
    for (int k = 0; k < d * d; ++k) {
      line += ',';
      io_detail::append_double(line, table.flag_frames[i * d * d + k]);
    }
    line += ',';
    line += table.has_inv_flag(i) ? '1' : '0';
    for (int k = 0; k < d * d; ++k) {
      line += ',';
      io_detail::append_double(line, table.inv_flag_frames[i * d * d + k]);
    }
    line += '\n';
    w.append(line);
  }
  return w.finish();
}

inline nlohmann::ordered_json census_sidecar(const CensusTable& table, const SchottkySystem& sys,
                                             std::uint64_t csv_hash) {
  nlohmann::ordered_json j;
  j["fingerprint"] = table.fingerprint;
  j["version"] = kLibraryVersion;
  j["max_word_length"] = table.max_len;
  j["dimension"] = table.dim;
  j["num_generators"] = table.num_generators;
  j["record_count"] = table.size();
  j["horizon_R"] = table.horizon_R;
  j["horizon_t"] = table.horizon_t;
  j["max_displacement"] = table.max_displacement;
  j["gap_tol"] = table.gap_tol;
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(csv_hash));
  j["csv_fnv1a"] = hex;
  j["config"] = sys.config;
  return j;
}

inline void save_census(const CensusTable& table, const SchottkySystem& sys,
                        const std::string& csv_path, const std::string& sidecar_path) {
  const std::uint64_t h = save_census_csv(table, csv_path);
  std::ofstream side(sidecar_path, std::ios::binary);
  if (!side) throw Error("cannot open for writing: " + sidecar_path);
  side << census_sidecar(table, sys, h).dump(2) << "\n";
}

// Reloads a census written by save_census. The sidecar fingerprint must
// match the system the caller parsed from its config.
inline CensusTable load_census(const std::string& csv_path, const std::string& sidecar_path,
                               const SchottkySystem& sys) {
  nlohmann::json side;
  {
    std::ifstream in(sidecar_path);
    if (!in) throw ParseError("cannot open census sidecar: " + sidecar_path);
    try {
      in >> side;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("census sidecar: ") + e.what());
    }
  }
  const std::string fp = side.value("fingerprint", "");
  if (fp != sys.fingerprint) {
    throw FingerprintMismatch("census was built from a different config (fingerprint " + fp +
                              " vs " + sys.fingerprint + ")");
  }

  CensusTable table;
  table.dim = side.at("dimension").get<int>();
  table.num_generators = side.at("num_generators").get<int>();
  table.max_len = side.at("max_word_length").get<int>();
  table.seed = sys.seed;
  table.fingerprint = fp;
  table.horizon_R = side.at("horizon_R").get<double>();
  table.horizon_t = side.at("horizon_t").get<double>();
  table.max_displacement = side.at("max_displacement").get<double>();
  table.gap_tol = side.value("gap_tol", Tolerances{}.gap);
  const std::size_t expected = side.at("record_count").get<std::size_t>();

  if (table.dim != sys.dim || table.num_generators != sys.num_generators) {
    throw FingerprintMismatch("census sidecar shape disagrees with the config");
  }

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw ParseError("cannot open census csv: " + csv_path);
  std::string header;
  if (!std::getline(in, header) || header != census_csv_header(table.dim)) {
    throw ParseError("census csv: unexpected header");
  }

  const int d = table.dim;
  const int l = table.num_generators;
  std::unordered_map<std::string, std::int32_t> key_to_id;
  std::string line;
  std::vector<std::string_view> fields;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    for (std::size_t pos = 0; pos <= line.size(); ++pos) {
      if (pos == line.size() || line[pos] == ',') {
        fields.emplace_back(line.data() + start, pos - start);
        start = pos + 1;
      }
    }
    const std::size_t want = 7 + d + 1 + d * d + 1 + d * d;
    if (fields.size() != want) throw ParseError("census csv: wrong field count");

    table.word_codes.push_back(parse_word(std::string(fields[0]), l).codes());
    table.word_len.push_back(static_cast<std::uint8_t>(io_detail::parse_u64(fields[1])));
    table.distance.push_back(io_detail::parse_double(fields[2]));
    // fields[3] (length) and fields[6] (primitive) are re-derived from the class
    std::uint8_t b = 0;
    if (fields[4] == "1") b |= 1;
    if (!table.word_codes.back().empty()) {
      bool inverted = false;
      census_detail::canonical_key_codes(census_detail::cyclic_core_codes(table.word_codes.back()),
                                         &inverted);
      if (inverted) b |= 8;
    }

    if (fields[5].empty()) {
      table.class_id.push_back(-1);
    } else {
      std::string key = parse_word(std::string(fields[5]), l).codes();
      auto [it, fresh] = key_to_id.emplace(std::move(key), static_cast<std::int32_t>(table.classes.size()));
      if (fresh) {
        ClassInfo info;
        info.key = it->first;
        info.canonical_len = static_cast<int>(info.key.size());
        info.root_len = static_cast<int>(census_detail::smallest_period_codes(info.key));
        info.power = info.canonical_len / info.root_len;
        table.classes.push_back(std::move(info));
      }
      table.class_id.push_back(it->second);
    }

    std::size_t f = 7;
    for (int k = 0; k < d; ++k) table.cartan.push_back(io_detail::parse_double(fields[f++]));
    if (fields[f++] == "1") b |= 2;
    for (int k = 0; k < d * d; ++k) table.flag_frames.push_back(io_detail::parse_double(fields[f++]));
    if (fields[f++] == "1") b |= 4;
    for (int k = 0; k < d * d; ++k)
      table.inv_flag_frames.push_back(io_detail::parse_double(fields[f++]));
    table.bits.push_back(b);
  }
  if (table.size() != expected) {
    throw ParseError("census csv: record count disagrees with the sidecar");
  }

  // translation data recomputed exactly as at build time
  for (ClassInfo& c : table.classes) {
    ChainedProduct p = evaluate(sys, Word::from_codes(c.key));
    const WeylVector jv = jordan_from_compounds(p.chain);
    c.jordan = jv.coords;
    c.length = jv.norm();
    c.root_length = c.length / c.power;
  }
  table.finalize();
  return table;
}

inline void save_ratio_csv(const std::vector<RatioRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  std::string buf = "R_or_t,count,ratio_lower,ratio_upper\n";
  for (const auto& r : rows) {
    io_detail::append_double(buf, r.x);
    buf += ',';
    buf += std::to_string(r.count);
    buf += ',';
    io_detail::append_double(buf, r.ratio_lower);
    buf += ',';
    io_detail::append_double(buf, r.ratio_upper);
    buf += '\n';
  }
  out << buf;
}

inline void save_json(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace weyl
