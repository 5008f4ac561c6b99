#include "cbcl/datastore.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "binary_io.hpp"
#include "cbcl/error.hpp"
#include "cbcl/fileio.hpp"

namespace cbcl {

namespace {

constexpr std::string_view kFeatureMagic = "CBF1";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Calls fn(line_number, line) for each nonblank line; line numbers are 1-based.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    const auto line = trim(text.substr(start, nl - start));
    if (!line.empty()) fn(line_no, line);
    start = nl + 1;
  }
}

SampleId parse_id(std::string_view field, std::size_t line_no) {
  SampleId id = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), id);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorCode::bad_format, "line " + std::to_string(line_no) + ": invalid sample id '" +
                                           std::string(field) + "'");
  return id;
}

float parse_value(std::string_view field, std::size_t line_no, SampleId id) {
  float v = 0.0f;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec == std::errc::result_out_of_range)
    throw Error(ErrorCode::non_finite, "line " + std::to_string(line_no) + ": sample " +
                                           std::to_string(id) + " value '" + std::string(field) +
                                           "' overflows f32");
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorCode::bad_format, "line " + std::to_string(line_no) + ": sample " +
                                           std::to_string(id) + " has invalid value '" +
                                           std::string(field) + "'");
  return v;
}

void append_float(std::string& out, float v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

std::string_view to_string(Modality m) { return m == Modality::rgb ? "rgb" : "depth"; }

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

void FeatureFile::validate() const {
  if (dim == 0) throw Error(ErrorCode::bad_format, "feature file declares dimension 0");
  std::unordered_set<SampleId> seen;
  seen.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.values.size() != dim)
      throw Error(ErrorCode::dimension_mismatch,
                  "record " + std::to_string(i) + " (sample " + std::to_string(r.id) + ") has " +
                      std::to_string(r.values.size()) + " values, expected " + std::to_string(dim));
    check_finite(r.values, r.id, to_string(modality));
    if (!seen.insert(r.id).second)
      throw Error(ErrorCode::duplicate_id, "duplicate sample id " + std::to_string(r.id));
  }
}

std::vector<std::uint8_t> encode_features(const FeatureFile& f) {
  f.validate();
  detail::ByteWriter w;
  w.reserve(4 + 2 + 1 + 4 + 8 + f.records.size() * (8 + 4 * std::size_t{f.dim}) + 4);
  w.put_bytes(kFeatureMagic);
  w.put<std::uint16_t>(kFeatureFormatVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(f.modality));
  w.put<std::uint32_t>(f.dim);
  w.put<std::uint64_t>(f.records.size());
  for (const auto& r : f.records) {
    w.put<std::uint64_t>(r.id);
    for (float v : r.values) w.put<float>(v);
  }
  w.put_crc();
  return w.take();
}

FeatureFile decode_features(std::span<const std::uint8_t> bytes) {
  constexpr std::string_view what = "feature file";
  detail::ByteReader r(bytes, what);
  detail::expect_magic(r, kFeatureMagic, what);
  const auto version = r.get<std::uint16_t>();
  if (version != kFeatureFormatVersion)
    throw Error(ErrorCode::unsupported_version,
                "feature file: unsupported format version " + std::to_string(version) +
                    " (this build reads version " + std::to_string(kFeatureFormatVersion) + ")");
  FeatureFile f;
  const auto tag = r.get<std::uint8_t>();
  if (tag > 1)
    throw Error(ErrorCode::bad_format, "feature file: unknown modality tag " + std::to_string(tag));
  f.modality = static_cast<Modality>(tag);
  f.dim = r.get<std::uint32_t>();
  if (f.dim == 0) throw Error(ErrorCode::bad_format, "feature file declares dimension 0");
  const auto count = r.get<std::uint64_t>();
  const std::size_t record_bytes = 8 + 4 * std::size_t{f.dim};
  if (count > r.remaining() / record_bytes)
    throw Error(ErrorCode::truncated, "feature file: header declares " + std::to_string(count) +
                                          " records but only " + std::to_string(r.remaining()) +
                                          " bytes follow");
  f.records.resize(count);
  for (auto& rec : f.records) {
    rec.id = r.get<std::uint64_t>();
    rec.values.resize(f.dim);
    for (auto& v : rec.values) v = r.get<float>();
  }
  r.require(4);
  if (r.remaining() != 4)
    throw Error(ErrorCode::bad_format, "feature file: " + std::to_string(r.remaining() - 4) +
                                           " unexpected trailing bytes");
  detail::verify_crc(bytes, what);
  f.validate();
  return f;
}

std::string features_to_csv(const FeatureFile& f) {
  f.validate();
  std::string out = "id";
  for (std::uint32_t i = 0; i < f.dim; ++i) out += ",v" + std::to_string(i);
  out += '\n';
  for (const auto& r : f.records) {
    out += std::to_string(r.id);
    for (float v : r.values) {
      out += ',';
      append_float(out, v);
    }
    out += '\n';
  }
  return out;
}

FeatureFile features_from_csv(std::string_view text, Modality modality) {
  FeatureFile f;
  f.modality = modality;
  bool header_seen = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "id")
        throw Error(ErrorCode::bad_format, "feature CSV: header must be id,v0,...");
      for (std::size_t i = 1; i < fields.size(); ++i) {
        if (fields[i] != "v" + std::to_string(i - 1))
          throw Error(ErrorCode::bad_format, "feature CSV: unexpected header column '" +
                                                 std::string(fields[i]) + "'");
      }
      f.dim = static_cast<std::uint32_t>(fields.size() - 1);
      header_seen = true;
      return;
    }
    FeatureRecord rec;
    rec.id = parse_id(fields[0], line_no);
    if (fields.size() - 1 != f.dim)
      throw Error(ErrorCode::dimension_mismatch,
                  "feature CSV line " + std::to_string(line_no) + " (sample " +
                      std::to_string(rec.id) + "): " + std::to_string(fields.size() - 1) +
                      " values, header declares " + std::to_string(f.dim));
    rec.values.reserve(f.dim);
    for (std::size_t i = 1; i < fields.size(); ++i)
      rec.values.push_back(parse_value(fields[i], line_no, rec.id));
    f.records.push_back(std::move(rec));
  });
  if (!header_seen) throw Error(ErrorCode::bad_format, "feature CSV: missing header");
  f.validate();
  return f;
}

void write_features(const std::filesystem::path& path, const FeatureFile& f, FeatureEncoding enc) {
  if (enc == FeatureEncoding::cbf)
    write_file_atomic(path, encode_features(f));
  else
    write_file_atomic(path, features_to_csv(f));
}

FeatureFile read_features(const std::filesystem::path& path, Modality csv_modality) {
  const auto bytes = read_file_bytes(path);
  const bool binary = bytes.size() >= kFeatureMagic.size() &&
                      std::equal(kFeatureMagic.begin(), kFeatureMagic.end(), bytes.begin());
  try {
    if (binary) return decode_features(bytes);
    return features_from_csv(
        std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), csv_modality);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void LabelManifest::validate() const {
  std::unordered_set<SampleId> seen;
  for (const auto& r : rows) {
    if (r.category.empty())
      throw Error(ErrorCode::invalid_argument,
                  "manifest: sample " + std::to_string(r.id) + " has an empty category");
    if (!seen.insert(r.id).second)
      throw Error(ErrorCode::duplicate_id, "manifest: duplicate sample id " + std::to_string(r.id));
  }
}

std::string manifest_to_csv(const LabelManifest& m) {
  m.validate();
  std::ostringstream out;
  out << "id,category,split\n";
  for (const auto& r : m.rows) out << r.id << ',' << r.category << ',' << to_string(r.split) << '\n';
  return out.str();
}

LabelManifest manifest_from_csv(std::string_view text) {
  LabelManifest m;
  bool header_seen = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "id" || fields[1] != "category" ||
          fields[2] != "split")
        throw Error(ErrorCode::bad_format, "manifest: header must be id,category,split");
      header_seen = true;
      return;
    }
    if (fields.size() != 3)
      throw Error(ErrorCode::bad_format, "manifest line " + std::to_string(line_no) +
                                             ": expected 3 fields, got " +
                                             std::to_string(fields.size()));
    ManifestRow row;
    row.id = parse_id(fields[0], line_no);
    row.category = std::string(fields[1]);
    if (fields[2] == "train")
      row.split = Split::train;
    else if (fields[2] == "test")
      row.split = Split::test;
    else
      throw Error(ErrorCode::bad_format, "manifest line " + std::to_string(line_no) +
                                             ": split must be train or test, got '" +
                                             std::string(fields[2]) + "'");
    m.rows.push_back(std::move(row));
  });
  if (!header_seen) throw Error(ErrorCode::bad_format, "manifest: missing header");
  m.validate();
  return m;
}

void write_manifest(const std::filesystem::path& path, const LabelManifest& m) {
  write_file_atomic(path, manifest_to_csv(m));
}

LabelManifest read_manifest(const std::filesystem::path& path) {
  try {
    return manifest_from_csv(read_file_text(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Dataset join_dataset(const FeatureFile& rgb, const FeatureFile& depth,
                     const LabelManifest& labels) {
  labels.validate();
  std::unordered_map<SampleId, std::size_t> rgb_at;
  std::unordered_map<SampleId, std::size_t> depth_at;
  for (std::size_t i = 0; i < rgb.records.size(); ++i) rgb_at.emplace(rgb.records[i].id, i);
  for (std::size_t i = 0; i < depth.records.size(); ++i) depth_at.emplace(depth.records[i].id, i);

  std::set<SampleId> offending;
  std::unordered_set<SampleId> in_manifest;
  for (const auto& row : labels.rows) {
    in_manifest.insert(row.id);
    if (!rgb_at.contains(row.id) || !depth_at.contains(row.id)) offending.insert(row.id);
  }
  for (const auto& r : rgb.records)
    if (!in_manifest.contains(r.id) || !depth_at.contains(r.id)) offending.insert(r.id);
  for (const auto& r : depth.records)
    if (!in_manifest.contains(r.id) || !rgb_at.contains(r.id)) offending.insert(r.id);

  if (!offending.empty()) {
    std::string msg = std::to_string(offending.size()) +
                      " sample id(s) missing from at least one of rgb/depth/manifest:";
    std::size_t shown = 0;
    for (SampleId id : offending) {
      if (shown++ == 10) {
        msg += " ...";
        break;
      }
      msg += " " + std::to_string(id);
    }
    throw Error(ErrorCode::missing_id, msg);
  }

  Dataset ds;
  for (const auto& row : labels.rows) {
    LabeledPair p{{row.id, rgb.records[rgb_at[row.id]].values,
                   depth.records[depth_at[row.id]].values},
                  row.category};
    if (row.split == Split::train) {
      ds.train.push_back(std::move(p));
      ++ds.train_counts[row.category];
    } else {
      ds.test.push_back(std::move(p));
      ++ds.test_counts[row.category];
    }
  }
  return ds;
}

SampleId sample_id_for_path(std::string_view relative_path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : relative_path) {
    if (c == '\\') c = '/';
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cbcl
