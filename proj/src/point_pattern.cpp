#include "rfsad/point_pattern.hpp"

#include "rfsad/errors.hpp"

#include <cmath>
#include <cstring>

namespace rfsad {

void PointPatternSet::push_back(std::span<const float> descriptor)
{
    if (descriptor.size() != dim)
        throw DataError("descriptor has " + std::to_string(descriptor.size()) + " components, expected " +
                        std::to_string(dim));
    descriptors.insert(descriptors.end(), descriptor.begin(), descriptor.end());
}

void PointPatternSet::push_back(std::span<const double> descriptor)
{
    if (descriptor.size() != dim)
        throw DataError("descriptor has " + std::to_string(descriptor.size()) + " components, expected " +
                        std::to_string(dim));
    for (double v : descriptor)
        descriptors.push_back(static_cast<float>(v));
}

void PointPatternSet::validate() const
{
    if (dim == 0)
        throw DataError(source_id + ": descriptor dimension must be positive");
    if (descriptors.size() % dim != 0)
        throw DataError(source_id + ": descriptor payload is not a multiple of dim");
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        if (!std::isfinite(descriptors[i]))
            throw DataError(source_id + ": non-finite descriptor value in point " + std::to_string(i / dim));
    }
    if (keypoints) {
        if (keypoints->size() != size())
            throw DataError(source_id + ": keypoint count " + std::to_string(keypoints->size()) +
                            " differs from descriptor count " + std::to_string(size()));
        for (const auto& kp : *keypoints) {
            if (!std::isfinite(kp.x) || !std::isfinite(kp.y) || !std::isfinite(kp.scale) ||
                !std::isfinite(kp.detection_score))
                throw DataError(source_id + ": non-finite keypoint value");
        }
    }
}

bool PointPatternSet::same_payload(const PointPatternSet& other) const
{
    auto bitwise_equal = [](const auto& a, const auto& b) {
        return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(a[0])) == 0);
    };
    if (dim != other.dim || !bitwise_equal(descriptors, other.descriptors))
        return false;
    if (keypoints.has_value() != other.keypoints.has_value())
        return false;
    return !keypoints || bitwise_equal(*keypoints, *other.keypoints);
}

std::string SetSource::id(std::size_t i) const { return "#" + std::to_string(i); }

std::uint32_t SetSource::dim(std::size_t i) const
{
    std::uint32_t d = 0;
    visit(i, [&](const PointPatternSet& s) { d = s.dim; });
    return d;
}

std::size_t SetSource::cardinality(std::size_t i) const
{
    std::size_t n = 0;
    visit(i, [&](const PointPatternSet& s) { n = s.size(); });
    return n;
}

void InMemorySets::visit(std::size_t i, const std::function<void(const PointPatternSet&)>& fn) const
{
    fn(sets_[i]);
}

std::string InMemorySets::id(std::size_t i) const
{
    return sets_[i].source_id.empty() ? SetSource::id(i) : sets_[i].source_id;
}

} // namespace rfsad
