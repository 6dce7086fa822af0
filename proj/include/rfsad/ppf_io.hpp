#pragma once

#include "rfsad/point_pattern.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rfsad {

// PPF layout (little-endian):
//   "RFSP" | u16 version | u16 flags | u32 D | u32 N
//   [flags bit0] N x {f32 x, f32 y, f32 scale, f32 score}
//   N x D f32 descriptors, row-major
inline constexpr std::array<std::uint8_t, 4> kPpfMagic{0x52, 0x46, 0x53, 0x50};
inline constexpr std::uint16_t kPpfVersion = 1;
inline constexpr std::uint16_t kPpfFlagKeypoints = 0x1;
inline constexpr std::size_t kPpfHeaderBytes = 16;

struct PpfHeader {
    std::uint16_t version = kPpfVersion;
    std::uint16_t flags = 0;
    std::uint32_t dim = 0;
    std::uint32_t count = 0;
};

[[nodiscard]] std::uint64_t ppf_file_size(const PpfHeader& header);

[[nodiscard]] PpfHeader read_ppf_header(const std::filesystem::path& path);
[[nodiscard]] PointPatternSet read_ppf(const std::filesystem::path& path);
void write_ppf(const PointPatternSet& set, const std::filesystem::path& path);

[[nodiscard]] std::string encode_ppf(const PointPatternSet& set);
[[nodiscard]] PointPatternSet decode_ppf(std::string_view bytes, const std::string& source_id = {});

/// Sets backed by PPF files, loaded on each visit.
class PpfFileSets final : public SetSource {
public:
    explicit PpfFileSets(std::vector<std::filesystem::path> paths) : paths_(std::move(paths)) {}

    [[nodiscard]] std::size_t size() const override { return paths_.size(); }
    void visit(std::size_t i, const std::function<void(const PointPatternSet&)>& fn) const override;
    [[nodiscard]] std::string id(std::size_t i) const override { return paths_[i].string(); }
    [[nodiscard]] std::uint32_t dim(std::size_t i) const override;
    [[nodiscard]] std::size_t cardinality(std::size_t i) const override;

private:
    std::vector<std::filesystem::path> paths_;
};

enum class Split { train, test };

struct ManifestItem {
    std::string path;
    int label = 0;  // 0 normal, 1 anomalous
    Split split = Split::train;
    std::optional<std::string> defect_type;
};

struct Manifest {
    std::string category;
    std::vector<ManifestItem> items;

    [[nodiscard]] std::vector<ManifestItem> train_items() const;
    [[nodiscard]] std::vector<ManifestItem> test_items() const;
};

/// Parses a manifest and resolves relative item paths against the manifest's
/// directory. Throws ValidationError on invariant violations.
[[nodiscard]] Manifest read_manifest(const std::filesystem::path& path);

/// Writes item paths verbatim.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Checks label/split values, train-only-normal and unique paths.
void validate_manifest(const Manifest& manifest);

/// Throws ValidationError unless the manifest has at least one train item.
void require_trainable(const Manifest& manifest);

[[nodiscard]] std::vector<std::filesystem::path> item_paths(const std::vector<ManifestItem>& items);
[[nodiscard]] std::vector<int> item_labels(const std::vector<ManifestItem>& items);

[[nodiscard]] const char* to_string(Split split);

} // namespace rfsad
