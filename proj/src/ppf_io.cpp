#include "rfsad/ppf_io.hpp"

#include "rfsad/errors.hpp"
#include "rfsad/fileutil.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace rfsad {
namespace {

void put_u16(std::string& out, std::uint16_t v)
{
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v)
{
    for (int shift = 0; shift < 32; shift += 8)
        out.push_back(static_cast<char>((v >> shift) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint16_t get_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t get_u32(const unsigned char* p)
{
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

PpfHeader parse_header(const unsigned char* p, std::size_t available, const std::string& where)
{
    if (available < kPpfHeaderBytes) {
        if (available >= 4 && std::memcmp(p, kPpfMagic.data(), 4) == 0)
            throw TruncationError(where + ": header truncated");
        throw FormatError(where + ": not a PPF file (too short)");
    }
    if (std::memcmp(p, kPpfMagic.data(), 4) != 0)
        throw FormatError(where + ": bad magic");
    PpfHeader h;
    h.version = get_u16(p + 4);
    h.flags = get_u16(p + 6);
    h.dim = get_u32(p + 8);
    h.count = get_u32(p + 12);
    if (h.version != kPpfVersion)
        throw FormatError(where + ": unsupported PPF version " + std::to_string(h.version));
    if ((h.flags & ~kPpfFlagKeypoints) != 0)
        throw FormatError(where + ": unknown flag bits set");
    if (h.dim == 0)
        throw FormatError(where + ": descriptor dimension must be positive");
    return h;
}

std::string read_all(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

Split parse_split(const std::string& s, const std::string& where)
{
    if (s == "train")
        return Split::train;
    if (s == "test")
        return Split::test;
    throw ValidationError(where + ": split must be \"train\" or \"test\", got \"" + s + "\"");
}

} // namespace

std::uint64_t ppf_file_size(const PpfHeader& h)
{
    const std::uint64_t n = h.count;
    return kPpfHeaderBytes + ((h.flags & kPpfFlagKeypoints) ? n * 16 : 0) + n * h.dim * 4;
}

std::string encode_ppf(const PointPatternSet& set)
{
    set.validate();
    const auto n = set.size();
    PpfHeader h;
    h.flags = set.keypoints ? kPpfFlagKeypoints : 0;
    h.dim = set.dim;
    h.count = static_cast<std::uint32_t>(n);
    if (h.count != n)
        throw DataError(set.source_id + ": too many descriptors for PPF");

    std::string out;
    out.reserve(ppf_file_size(h));
    out.append(reinterpret_cast<const char*>(kPpfMagic.data()), kPpfMagic.size());
    put_u16(out, h.version);
    put_u16(out, h.flags);
    put_u32(out, h.dim);
    put_u32(out, h.count);
    if (set.keypoints) {
        for (const auto& kp : *set.keypoints) {
            put_f32(out, kp.x);
            put_f32(out, kp.y);
            put_f32(out, kp.scale);
            put_f32(out, kp.detection_score);
        }
    }
    for (float v : set.descriptors)
        put_f32(out, v);
    return out;
}

PointPatternSet decode_ppf(std::string_view bytes, const std::string& source_id)
{
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const auto h = parse_header(p, bytes.size(), source_id);
    const auto expected = ppf_file_size(h);
    if (bytes.size() < expected)
        throw TruncationError(source_id + ": declares " + std::to_string(h.count) + " x " + std::to_string(h.dim) +
                              " descriptors but holds only " + std::to_string(bytes.size()) + " bytes");
    if (bytes.size() > expected)
        throw FormatError(source_id + ": " + std::to_string(bytes.size() - expected) + " trailing bytes");

    PointPatternSet set;
    set.dim = h.dim;
    set.source_id = source_id;
    p += kPpfHeaderBytes;
    if (h.flags & kPpfFlagKeypoints) {
        std::vector<Keypoint> kps(h.count);
        for (auto& kp : kps) {
            kp = {get_f32(p), get_f32(p + 4), get_f32(p + 8), get_f32(p + 12)};
            p += 16;
        }
        set.keypoints = std::move(kps);
    }
    const std::size_t values = static_cast<std::size_t>(h.count) * h.dim;
    set.descriptors.resize(values);
    for (std::size_t i = 0; i < values; ++i, p += 4)
        set.descriptors[i] = get_f32(p);
    set.validate();
    return set;
}

PpfHeader read_ppf_header(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    unsigned char buf[kPpfHeaderBytes];
    in.read(reinterpret_cast<char*>(buf), kPpfHeaderBytes);
    return parse_header(buf, static_cast<std::size_t>(in.gcount()), path.string());
}

PointPatternSet read_ppf(const std::filesystem::path& path)
{
    return decode_ppf(read_all(path), path.string());
}

void write_ppf(const PointPatternSet& set, const std::filesystem::path& path)
{
    write_file_atomic(path, encode_ppf(set));
}

void PpfFileSets::visit(std::size_t i, const std::function<void(const PointPatternSet&)>& fn) const
{
    const auto set = read_ppf(paths_[i]);
    fn(set);
}

std::uint32_t PpfFileSets::dim(std::size_t i) const { return read_ppf_header(paths_[i]).dim; }

std::size_t PpfFileSets::cardinality(std::size_t i) const { return read_ppf_header(paths_[i]).count; }

const char* to_string(Split split) { return split == Split::train ? "train" : "test"; }

std::vector<ManifestItem> Manifest::train_items() const
{
    std::vector<ManifestItem> out;
    for (const auto& item : items)
        if (item.split == Split::train)
            out.push_back(item);
    return out;
}

std::vector<ManifestItem> Manifest::test_items() const
{
    std::vector<ManifestItem> out;
    for (const auto& item : items)
        if (item.split == Split::test)
            out.push_back(item);
    return out;
}

void validate_manifest(const Manifest& manifest)
{
    std::set<std::string> seen;
    for (std::size_t i = 0; i < manifest.items.size(); ++i) {
        const auto& item = manifest.items[i];
        const auto where = "manifest item " + std::to_string(i) + " (" + item.path + ")";
        if (item.path.empty())
            throw ValidationError(where + ": empty path");
        if (item.label != 0 && item.label != 1)
            throw ValidationError(where + ": label must be 0 or 1");
        if (item.split == Split::train && item.label != 0)
            throw ValidationError(where + ": train items must be normal (label 0)");
        auto key = std::filesystem::path(item.path).lexically_normal().string();
        if (!seen.insert(key).second)
            throw ValidationError(where + ": duplicate path");
    }
}

void require_trainable(const Manifest& manifest)
{
    for (const auto& item : manifest.items)
        if (item.split == Split::train)
            return;
    throw ValidationError("manifest for category '" + manifest.category + "' has no train items");
}

Manifest read_manifest(const std::filesystem::path& path)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_all(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    const auto where = path.string();
    if (!doc.is_object() || !doc.contains("items") || !doc["items"].is_array())
        throw ValidationError(where + ": manifest needs an \"items\" array");

    Manifest m;
    m.category = doc.value("category", std::string{});
    const auto base = path.parent_path();
    for (std::size_t i = 0; i < doc["items"].size(); ++i) {
        const auto& j = doc["items"][i];
        const auto item_where = where + ": item " + std::to_string(i);
        if (!j.is_object() || !j.contains("path") || !j.contains("label") || !j.contains("split"))
            throw ValidationError(item_where + ": needs path, label and split");
        if (!j["path"].is_string() || !j["label"].is_number_integer() || !j["split"].is_string())
            throw ValidationError(item_where + ": path/split must be strings and label an integer");
        ManifestItem item;
        std::filesystem::path p = j["path"].get<std::string>();
        item.path = (p.is_relative() ? base / p : p).lexically_normal().string();
        item.label = j["label"].get<int>();
        item.split = parse_split(j["split"].get<std::string>(), item_where);
        if (j.contains("defect_type") && !j["defect_type"].is_null()) {
            if (!j["defect_type"].is_string())
                throw ValidationError(item_where + ": defect_type must be a string");
            item.defect_type = j["defect_type"].get<std::string>();
        }
        m.items.push_back(std::move(item));
    }
    validate_manifest(m);
    return m;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path)
{
    validate_manifest(manifest);
    nlohmann::json doc;
    doc["category"] = manifest.category;
    doc["items"] = nlohmann::json::array();
    for (const auto& item : manifest.items) {
        nlohmann::json j{{"path", item.path}, {"label", item.label}, {"split", to_string(item.split)}};
        if (item.defect_type)
            j["defect_type"] = *item.defect_type;
        doc["items"].push_back(std::move(j));
    }
    write_file_atomic(path, doc.dump(2) + "\n");
}

std::vector<std::filesystem::path> item_paths(const std::vector<ManifestItem>& items)
{
    std::vector<std::filesystem::path> out;
    out.reserve(items.size());
    for (const auto& item : items)
        out.emplace_back(item.path);
    return out;
}

std::vector<int> item_labels(const std::vector<ManifestItem>& items)
{
    std::vector<int> out;
    out.reserve(items.size());
    for (const auto& item : items)
        out.push_back(item.label);
    return out;
}

} // namespace rfsad
