#pragma once

#include <compare>
#include <string>
#include <vector>

#include "coneshap/errors.hpp"
#include "coneshap/image.hpp"
#include "coneshap/label_map.hpp"
#include "coneshap/models.hpp"

namespace coneshap {

struct SegmentRef {
    std::string image_id;
    int level = 0;
    int segment_id = 0;

    auto operator<=>(const SegmentRef&) const = default;
};

struct Embedding {
    SegmentRef ref;
    std::vector<double> vector;
};

// Representation of one segment: crop its bounding box, replace pixels
// outside the segment with the policy baseline of the source image, and feed
// the crop to the model's representation layer (which resizes bicubically to
// its own input size).
inline Embedding extract_embedding(const Model& model, const Image& image, const LabelMap& map,
                                   const Segment& segment, const MaskingPolicy& policy,
                                   const std::string& image_id) {
    if (!model.has_representation())
        throw CapabilityError(model.kind() + " model has no representation layer");
    if (image.height != map.height || image.width != map.width)
        throw PreconditionError("segment does not belong to this image");
    if (segment.id < 0 || segment.id >= map.segment_count)
        throw PreconditionError("segment id outside the label map");

    const auto base = policy.baseline_for(image);
    const PixelRect box = segment.bbox;
    Image crop;
    crop.height = box.y1 - box.y0 + 1;
    crop.width = box.x1 - box.x0 + 1;
    crop.rgb.resize(static_cast<std::size_t>(crop.height) * crop.width * 3);
    for (int y = box.y0; y <= box.y1; ++y) {
        for (int x = box.x0; x <= box.x1; ++x) {
            const std::size_t dst = (static_cast<std::size_t>(y - box.y0) * crop.width + (x - box.x0)) * 3;
            if (map.at(y, x) == segment.id) {
                for (int c = 0; c < 3; ++c) crop.rgb[dst + static_cast<std::size_t>(c)] = image.at(y, x, c);
            } else {
                for (int c = 0; c < 3; ++c) crop.rgb[dst + static_cast<std::size_t>(c)] = base[static_cast<std::size_t>(c)];
            }
        }
    }
    Embedding out;
    out.ref = {image_id, segment.level, segment.id};
    out.vector = model.representation(crop);
    for (double v : out.vector)
        if (!std::isfinite(v)) throw DomainError("non-finite embedding for segment " + std::to_string(segment.id));
    return out;
}

// Representation of a whole input image (the h(x | c) side of coherency).
inline std::vector<double> embed_image(const Model& model, const Image& image) {
    if (!model.has_representation())
        throw CapabilityError(model.kind() + " model has no representation layer");
    return model.representation(image);
}

} // namespace coneshap
