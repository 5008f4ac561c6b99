#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbcl/model.hpp"

namespace cbcl {

enum class Modality : std::uint8_t { rgb = 0, depth = 1 };

std::string_view to_string(Modality m);

struct FeatureRecord {
  SampleId id = 0;
  FeatureVector values;

  bool operator==(const FeatureRecord&) const = default;
};

struct FeatureFile {
  Modality modality = Modality::rgb;
  std::uint32_t dim = 0;
  std::vector<FeatureRecord> records;

  /// Throws on zero dim, wrong-length rows, non-finite values or duplicate
  /// ids.
  void validate() const;
  bool operator==(const FeatureFile&) const = default;
};

enum class FeatureEncoding { cbf, csv };

// CBF binary feature file (version 1).
inline constexpr std::uint16_t kFeatureFormatVersion = 1;

std::vector<std::uint8_t> encode_features(const FeatureFile& f);
FeatureFile decode_features(std::span<const std::uint8_t> bytes);

/// CSV encoding: header `id,v0,...,v{dim-1}`. CSV carries no modality tag,
/// so the caller supplies it.
std::string features_to_csv(const FeatureFile& f);
FeatureFile features_from_csv(std::string_view text, Modality modality);

void write_features(const std::filesystem::path& path, const FeatureFile& f,
                    FeatureEncoding enc = FeatureEncoding::cbf);

/// Detects the encoding from the leading magic bytes. `csv_modality` is
/// used only for CSV input.
FeatureFile read_features(const std::filesystem::path& path, Modality csv_modality);

enum class Split { train, test };

std::string_view to_string(Split s);

struct ManifestRow {
  SampleId id = 0;
  std::string category;
  Split split = Split::train;

  bool operator==(const ManifestRow&) const = default;
};

struct LabelManifest {
  std::vector<ManifestRow> rows;

  void validate() const;
  bool operator==(const LabelManifest&) const = default;
};

std::string manifest_to_csv(const LabelManifest& m);
LabelManifest manifest_from_csv(std::string_view text);
void write_manifest(const std::filesystem::path& path, const LabelManifest& m);
LabelManifest read_manifest(const std::filesystem::path& path);

struct Dataset {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> test;
  std::map<std::string, std::size_t> train_counts;
  std::map<std::string, std::size_t> test_counts;
};

/// Pairs rgb and depth records by id in manifest order. The three id sets
/// must coincide; the error lists up to 10 offending ids.
Dataset join_dataset(const FeatureFile& rgb, const FeatureFile& depth,
                     const LabelManifest& labels);

/// Sample id for a dataset-relative image path: 64-bit FNV-1a over the UTF-8
/// bytes with '\\' normalized to '/'. The feature extractor uses the same
/// rule.
SampleId sample_id_for_path(std::string_view relative_path);

}  // namespace cbcl
