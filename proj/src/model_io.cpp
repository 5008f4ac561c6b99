#include <limits>
#include <string>

#include "binary_io.hpp"
#include "cbcl/error.hpp"
#include "cbcl/fileio.hpp"
#include "cbcl/model.hpp"

namespace cbcl {

namespace {

constexpr std::string_view kMagic = "CBM1";
constexpr std::string_view kWhat = "model file";

}  // namespace

std::vector<std::uint8_t> encode_model(const ConceptModel& m) {
  m.validate();
  detail::ByteWriter w;
  w.reserve(64 + m.total_centroids() * (8 + 4 * (m.rgb_dim + m.depth_dim)));
  w.put_bytes(kMagic);
  w.put<std::uint16_t>(kModelFormatVersion);
  w.put<std::uint32_t>(m.rgb_dim);
  w.put<std::uint32_t>(m.depth_dim);
  w.put<double>(m.fusion.rgb);
  w.put<double>(m.fusion.depth);
  w.put<double>(m.distance_threshold);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.categories.size()));
  for (const auto& cat : m.categories) {
    if (cat.label.size() > std::numeric_limits<std::uint16_t>::max())
      throw Error(ErrorCode::invalid_argument, "category label longer than 65535 bytes");
    w.put<std::uint16_t>(static_cast<std::uint16_t>(cat.label.size()));
    w.put_bytes(cat.label);
    w.put<std::uint64_t>(cat.train_count);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cat.centroids.size()));
    for (const auto& c : cat.centroids) {
      w.put<std::uint64_t>(c.weight);
      for (double x : c.rgb) w.put<float>(static_cast<float>(x));
      for (double x : c.depth) w.put<float>(static_cast<float>(x));
    }
  }
  w.put_crc();
  return w.take();
}

ConceptModel decode_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, kWhat);
  detail::expect_magic(r, kMagic, kWhat);
  const auto version = r.get<std::uint16_t>();
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::unsupported_version,
                "model file: unsupported format version " + std::to_string(version) +
                    " (this build reads version " + std::to_string(kModelFormatVersion) + ")");

  ConceptModel m;
  m.rgb_dim = r.get<std::uint32_t>();
  m.depth_dim = r.get<std::uint32_t>();
  m.fusion.rgb = r.get<double>();
  m.fusion.depth = r.get<double>();
  m.distance_threshold = r.get<double>();
  const auto n_categories = r.get<std::uint32_t>();
  const std::size_t centroid_bytes = 8 + 4 * (std::size_t{m.rgb_dim} + m.depth_dim);
  for (std::uint32_t j = 0; j < n_categories; ++j) {
    CategoryModel cat;
    cat.label = r.get_string(r.get<std::uint16_t>());
    cat.train_count = r.get<std::uint64_t>();
    const auto n_centroids = r.get<std::uint32_t>();
    r.require(n_centroids * centroid_bytes);
    cat.centroids.resize(n_centroids);
    for (auto& c : cat.centroids) {
      c.weight = r.get<std::uint64_t>();
      c.rgb.resize(m.rgb_dim);
      c.depth.resize(m.depth_dim);
      for (auto& x : c.rgb) x = r.get<float>();
      for (auto& x : c.depth) x = r.get<float>();
    }
    m.categories.push_back(std::move(cat));
  }
  r.require(4);
  if (r.remaining() != 4)
    throw Error(ErrorCode::bad_format, "model file: " + std::to_string(r.remaining() - 4) +
                                           " unexpected trailing bytes");
  detail::verify_crc(bytes, kWhat);
  m.validate();
  return m;
}

void save_model(const ConceptModel& m, const std::filesystem::path& path) {
  write_file_atomic(path, encode_model(m));
}

ConceptModel load_model(const std::filesystem::path& path) {
  return decode_model(read_file_bytes(path));
}

}  // namespace cbcl
