#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rfsad {

struct Keypoint {
    float x = 0.0f;      // pixels
    float y = 0.0f;      // pixels
    float scale = 0.0f;
    float detection_score = 0.0f;

    bool operator==(const Keypoint&) const = default;
};

/// One image's unordered set of descriptors, stored row-major as 32-bit floats.
/// Storage order carries no meaning; duplicates are kept as extracted.
struct PointPatternSet {
    std::uint32_t dim = 0;
    std::vector<float> descriptors;
    std::optional<std::vector<Keypoint>> keypoints;
    std::string source_id;

    [[nodiscard]] std::size_t size() const { return dim == 0 ? 0 : descriptors.size() / dim; }
    [[nodiscard]] bool empty() const { return descriptors.empty(); }

    [[nodiscard]] std::span<const float> row(std::size_t i) const
    {
        return {descriptors.data() + i * dim, dim};
    }

    void push_back(std::span<const float> descriptor);
    void push_back(std::span<const double> descriptor);

    /// Throws DataError when dim is zero, the payload is ragged, a value is
    /// non-finite, or the keypoint count disagrees with the descriptor count.
    void validate() const;

    /// Compares payloads bitwise; source_id is not part of the value.
    [[nodiscard]] bool same_payload(const PointPatternSet& other) const;
};

/// Indexed, possibly lazily loaded collection of sets. Estimators and batch
/// scorers traverse it in index order (or in fixed index chunks when parallel),
/// so file-backed sources never need to be fully materialized.
class SetSource {
public:
    virtual ~SetSource() = default;

    [[nodiscard]] virtual std::size_t size() const = 0;
    virtual void visit(std::size_t i, const std::function<void(const PointPatternSet&)>& fn) const = 0;
    [[nodiscard]] virtual std::string id(std::size_t i) const;
    /// Descriptor dimension of item i. The default loads the item.
    [[nodiscard]] virtual std::uint32_t dim(std::size_t i) const;
    /// Number of descriptors in item i. The default loads the item.
    [[nodiscard]] virtual std::size_t cardinality(std::size_t i) const;
};

class InMemorySets final : public SetSource {
public:
    explicit InMemorySets(std::span<const PointPatternSet> sets) : sets_(sets) {}

    [[nodiscard]] std::size_t size() const override { return sets_.size(); }
    void visit(std::size_t i, const std::function<void(const PointPatternSet&)>& fn) const override;
    [[nodiscard]] std::string id(std::size_t i) const override;
    [[nodiscard]] std::uint32_t dim(std::size_t i) const override { return sets_[i].dim; }
    [[nodiscard]] std::size_t cardinality(std::size_t i) const override { return sets_[i].size(); }

private:
    std::span<const PointPatternSet> sets_;
};

/// View of selected indices of another source. The base must outlive it.
class SubsetSets final : public SetSource {
public:
    SubsetSets(const SetSource& base, std::vector<std::size_t> indices)
        : base_(base), indices_(std::move(indices)) {}

    [[nodiscard]] std::size_t size() const override { return indices_.size(); }
    void visit(std::size_t i, const std::function<void(const PointPatternSet&)>& fn) const override
    {
        base_.visit(indices_[i], fn);
    }
    [[nodiscard]] std::string id(std::size_t i) const override { return base_.id(indices_[i]); }
    [[nodiscard]] std::uint32_t dim(std::size_t i) const override { return base_.dim(indices_[i]); }
    [[nodiscard]] std::size_t cardinality(std::size_t i) const override { return base_.cardinality(indices_[i]); }

private:
    const SetSource& base_;
    std::vector<std::size_t> indices_;
};

} // namespace rfsad
