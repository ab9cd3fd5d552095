#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "coneshap/coalition.hpp"
#include "coneshap/errors.hpp"
#include "coneshap/game.hpp"
#include "coneshap/image.hpp"
#include "coneshap/label_map.hpp"

namespace coneshap {

// Black-box scorers and the pixel-replacement rule that realizes "absence"
// of a segment. The characteristic function of an image game is
//   v(S) = g_k(x) - g_k(x with S masked out)
// so v(empty) = 0 by construction; keep_only flips the reading for ablation:
//   v(S) = g_k(only S visible) - g_k(everything masked).

enum class MaskingMode { zero, mean_color, constant };

struct MaskingPolicy {
    MaskingMode mode = MaskingMode::mean_color;
    std::array<std::uint8_t, 3> constant_rgb{0, 0, 0};

    static MaskingPolicy zero() { return {MaskingMode::zero, {0, 0, 0}}; }
    static MaskingPolicy mean() { return {MaskingMode::mean_color, {0, 0, 0}}; }
    static MaskingPolicy constant(std::array<std::uint8_t, 3> rgb) {
        return {MaskingMode::constant, rgb};
    }

    // Replacement color; the mean is taken over the original (unmasked)
    // image, so the baseline is constant no matter what else is masked.
    std::array<std::uint8_t, 3> baseline_for(const Image& image) const {
        switch (mode) {
            case MaskingMode::zero: return {0, 0, 0};
            case MaskingMode::mean_color: return mean_color(image);
            case MaskingMode::constant: return constant_rgb;
        }
        return {0, 0, 0};
    }

    std::string name() const {
        switch (mode) {
            case MaskingMode::zero: return "zero";
            case MaskingMode::mean_color: return "mean";
            case MaskingMode::constant:
                return "constant(" + std::to_string(constant_rgb[0]) + "," +
                       std::to_string(constant_rgb[1]) + "," + std::to_string(constant_rgb[2]) + ")";
        }
        return "?";
    }
};

inline MaskingPolicy masking_policy_from_name(const std::string& name) {
    if (name == "zero") return MaskingPolicy::zero();
    if (name == "mean" || name == "mean_color") return MaskingPolicy::mean();
    throw FormatError("unknown masking policy '" + name + "'");
}

struct Prediction {
    std::vector<double> logits;

    int argmax() const {
        if (logits.empty()) throw DomainError("empty prediction");
        return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    }
};

enum class CoalitionSemantics { remove, keep_only };

// Replaces the pixels of the listed segments with the policy baseline;
// everything else stays byte-identical.
inline Image mask(const Image& image, const LabelMap& map, const std::vector<int>& remove,
                  const MaskingPolicy& policy) {
    if (image.height != map.height || image.width != map.width)
        throw PreconditionError("mask: image and label map dimensions differ");
    std::vector<char> removed(static_cast<std::size_t>(map.segment_count), 0);
    for (int id : remove) {
        if (id < 0 || id >= map.segment_count)
            throw DomainError("mask: unknown segment id " + std::to_string(id));
        removed[static_cast<std::size_t>(id)] = 1;
    }
    const auto base = policy.baseline_for(image);
    Image out = image;
    for (std::size_t p = 0; p < out.pixel_count(); ++p) {
        if (removed[static_cast<std::size_t>(map.labels[p])]) {
            out.rgb[p * 3 + 0] = base[0];
            out.rgb[p * 3 + 1] = base[1];
            out.rgb[p * 3 + 2] = base[2];
        }
    }
    return out;
}

inline Image mask(const Image& image, const LabelMap& map, const Coalition& remove,
                  const MaskingPolicy& policy) {
    std::vector<int> ids;
    ids.reserve(remove.size());
    for (PlayerId i : remove.members()) ids.push_back(static_cast<int>(i));
    return mask(image, map, ids, policy);
}

class Model {
public:
    virtual ~Model() = default;
    virtual std::string kind() const = 0;
    virtual int class_count() const = 0;
    virtual int input_size() const = 0; // 0 = consumes any resolution directly
    virtual Prediction predict(const Image& image) const = 0;
    virtual bool has_representation() const { return false; }
    virtual std::vector<double> representation(const Image&) const {
        throw CapabilityError(kind() + " model has no representation layer");
    }
    // Exact shortcut for the image game; empty when only mask-and-predict
    // is available. Both routes compute the same value.
    virtual GameValueFn coalition_value_fn(const Image&, const LabelMap&, int,
                                           const MaskingPolicy&, CoalitionSemantics) const {
        return {};
    }
};

// logit_k = sum over pixels of <w_k, rgb/255> + b_k. Pixel-additive, so every
// estimator should recover each segment's closed-form contribution exactly;
// its representation is the mean RGB of the input (scaled to [0,1]).
class LinearColorModel : public Model {
public:
    LinearColorModel(std::vector<std::array<double, 3>> weights, std::vector<double> bias)
        : weights_(std::move(weights)), bias_(std::move(bias)) {
        if (weights_.empty() || weights_.size() != bias_.size())
            throw FormatError("linear_color weights and bias disagree");
        for (const auto& w : weights_)
            for (double v : w)
                if (!std::isfinite(v)) throw FormatError("linear_color weights must be finite");
    }

    std::string kind() const override { return "linear_color"; }
    int class_count() const override { return static_cast<int>(weights_.size()); }
    int input_size() const override { return 0; }

    Prediction predict(const Image& image) const override {
        Prediction out;
        out.logits.assign(weights_.size(), 0.0);
        double sum[3] = {0.0, 0.0, 0.0};
        for (std::size_t p = 0; p < image.pixel_count(); ++p)
            for (int c = 0; c < 3; ++c) sum[c] += image.rgb[p * 3 + c];
        for (std::size_t k = 0; k < weights_.size(); ++k) {
            out.logits[k] = bias_[k] + (weights_[k][0] * sum[0] + weights_[k][1] * sum[1] +
                                        weights_[k][2] * sum[2]) / 255.0;
        }
        return out;
    }

    bool has_representation() const override { return true; }

    std::vector<double> representation(const Image& image) const override {
        double sum[3] = {0.0, 0.0, 0.0};
        for (std::size_t p = 0; p < image.pixel_count(); ++p)
            for (int c = 0; c < 3; ++c) sum[c] += image.rgb[p * 3 + c];
        const double n = static_cast<double>(image.pixel_count()) * 255.0;
        return {sum[0] / n, sum[1] / n, sum[2] / n};
    }

    GameValueFn coalition_value_fn(const Image& image, const LabelMap& map, int class_k,
                                   const MaskingPolicy& policy,
                                   CoalitionSemantics) const override {
        // Per-segment mass difference: masking is pixel replacement, so the
        // game is additive for both coalition semantics.
        const auto base = policy.baseline_for(image);
        std::vector<double> contribution(static_cast<std::size_t>(map.segment_count), 0.0);
        const auto& w = weights_[static_cast<std::size_t>(class_k)];
        for (std::size_t p = 0; p < image.pixel_count(); ++p) {
            const auto seg = static_cast<std::size_t>(map.labels[p]);
            for (int c = 0; c < 3; ++c)
                contribution[seg] += w[c] * (static_cast<double>(image.rgb[p * 3 + c]) - base[c]) / 255.0;
        }
        return [contribution](const Coalition& s) {
            double total = 0.0;
            for (PlayerId i : s.members()) total += contribution[i];
            return total;
        };
    }

    const std::vector<std::array<double, 3>>& weights() const { return weights_; }
    const std::vector<double>& bias() const { return bias_; }

private:
    std::vector<std::array<double, 3>> weights_;
    std::vector<double> bias_;
};

// Two affine layers with tanh between, on a bicubic downsample of the input.
// The representation layer is the hidden affine output (pre-activation).
class TinyMlpModel : public Model {
public:
    TinyMlpModel(int input_size, int hidden, int classes, std::vector<double> w1,
                 std::vector<double> b1, std::vector<double> w2, std::vector<double> b2)
        : input_(input_size), hidden_(hidden), classes_(classes), w1_(std::move(w1)),
          b1_(std::move(b1)), w2_(std::move(w2)), b2_(std::move(b2)) {
        const std::size_t d = feature_dim();
        if (w1_.size() != static_cast<std::size_t>(hidden_) * d ||
            b1_.size() != static_cast<std::size_t>(hidden_) ||
            w2_.size() != static_cast<std::size_t>(classes_) * hidden_ ||
            b2_.size() != static_cast<std::size_t>(classes_))
            throw FormatError("tiny_mlp weight shapes do not match the declared sizes");
        for (const auto* vec : {&w1_, &b1_, &w2_, &b2_})
            for (double v : *vec)
                if (!std::isfinite(v)) throw FormatError("tiny_mlp weights must be finite");
    }

    std::string kind() const override { return "tiny_mlp"; }
    int class_count() const override { return classes_; }
    int input_size() const override { return input_; }
    int hidden_size() const { return hidden_; }

    Prediction predict(const Image& image) const override {
        return logits_from_hidden(hidden_pre(image));
    }

    bool has_representation() const override { return true; }

    std::vector<double> representation(const Image& image) const override {
        return hidden_pre(image);
    }

    GameValueFn coalition_value_fn(const Image& image, const LabelMap& map, int class_k,
                                   const MaskingPolicy& policy,
                                   CoalitionSemantics semantics) const override {
        // The downsample and the first affine layer are both linear in the
        // source bytes, so masking segment i shifts the hidden vector by a
        // fixed delta; coalitions then cost |S| vector adds plus one tanh.
        const auto base = policy.baseline_for(image);
        const std::size_t n = static_cast<std::size_t>(map.segment_count);
        const auto h = static_cast<std::size_t>(hidden_);

        std::vector<double> full_hidden = hidden_pre(image);
        std::vector<std::vector<double>> delta(n);
        {
            ImageF diff;
            diff.height = image.height;
            diff.width = image.width;
            for (std::size_t seg = 0; seg < n; ++seg) {
                diff.rgb.assign(image.pixel_count() * 3, 0.0);
                for (std::size_t p = 0; p < image.pixel_count(); ++p) {
                    if (static_cast<std::size_t>(map.labels[p]) != seg) continue;
                    for (int c = 0; c < 3; ++c)
                        diff.rgb[p * 3 + c] = static_cast<double>(image.rgb[p * 3 + c]) - base[c];
                }
                delta[seg] = hidden_linear(resize_imagef(diff, input_, input_));
            }
        }

        const int k = class_k;
        if (semantics == CoalitionSemantics::remove) {
            return [this, full_hidden, delta, h, k](const Coalition& s) {
                std::vector<double> hid = full_hidden;
                for (PlayerId i : s.members())
                    for (std::size_t j = 0; j < h; ++j) hid[j] -= delta[i][j];
                return logit_at(full_hidden, k) - logit_at(hid, k);
            };
        }
        // keep_only: start from the fully masked hidden state and add back.
        std::vector<double> masked_hidden = full_hidden;
        for (std::size_t seg = 0; seg < n; ++seg)
            for (std::size_t j = 0; j < h; ++j) masked_hidden[j] -= delta[seg][j];
        return [this, masked_hidden, delta, h, k](const Coalition& s) {
            std::vector<double> hid = masked_hidden;
            for (PlayerId i : s.members())
                for (std::size_t j = 0; j < h; ++j) hid[j] += delta[i][j];
            return logit_at(hid, k) - logit_at(masked_hidden, k);
        };
    }

    const std::vector<double>& w1() const { return w1_; }
    const std::vector<double>& b1() const { return b1_; }
    const std::vector<double>& w2() const { return w2_; }
    const std::vector<double>& b2() const { return b2_; }

private:
    std::size_t feature_dim() const {
        return static_cast<std::size_t>(input_) * input_ * 3;
    }

    static ImageF resize_imagef(const ImageF& src, int out_h, int out_w) {
        // Same separable Catmull-Rom as resize_bicubic, over doubles.
        ImageF out;
        out.height = out_h;
        out.width = out_w;
        out.rgb.assign(static_cast<std::size_t>(out_h) * out_w * 3, 0.0);
        const double sy = static_cast<double>(src.height) / out_h;
        const double sx = static_cast<double>(src.width) / out_w;
        std::vector<double> mid(static_cast<std::size_t>(src.height) * out_w * 3, 0.0);
        for (int ox = 0; ox < out_w; ++ox) {
            const double fx = (ox + 0.5) * sx - 0.5;
            const int x0 = static_cast<int>(std::floor(fx)) - 1;
            double wx[4];
            for (int t = 0; t < 4; ++t) wx[t] = detail::cubic_weight(fx - (x0 + t));
            for (int y = 0; y < src.height; ++y) {
                double acc[3] = {0.0, 0.0, 0.0};
                for (int t = 0; t < 4; ++t) {
                    const int x = detail::clamp_index(x0 + t, src.width);
                    for (int c = 0; c < 3; ++c) acc[c] += wx[t] * src.at(y, x, c);
                }
                const std::size_t basei = (static_cast<std::size_t>(y) * out_w + ox) * 3;
                for (int c = 0; c < 3; ++c) mid[basei + c] = acc[c];
            }
        }
        for (int oy = 0; oy < out_h; ++oy) {
            const double fy = (oy + 0.5) * sy - 0.5;
            const int y0 = static_cast<int>(std::floor(fy)) - 1;
            double wy[4];
            for (int t = 0; t < 4; ++t) wy[t] = detail::cubic_weight(fy - (y0 + t));
            for (int ox = 0; ox < out_w; ++ox) {
                double acc[3] = {0.0, 0.0, 0.0};
                for (int t = 0; t < 4; ++t) {
                    const int y = detail::clamp_index(y0 + t, src.height);
                    const std::size_t basei = (static_cast<std::size_t>(y) * out_w + ox) * 3;
                    for (int c = 0; c < 3; ++c) acc[c] += wy[t] * mid[basei + c];
                }
                const std::size_t obase = (static_cast<std::size_t>(oy) * out_w + ox) * 3;
                for (int c = 0; c < 3; ++c) out.rgb[obase + c] = acc[c];
            }
        }
        return out;
    }

    // W1 * flatten(x)/255, no bias.
    std::vector<double> hidden_linear(const ImageF& x) const {
        const std::size_t d = feature_dim();
        std::vector<double> h(static_cast<std::size_t>(hidden_), 0.0);
        for (std::size_t j = 0; j < static_cast<std::size_t>(hidden_); ++j) {
            const double* row = w1_.data() + j * d;
            double acc = 0.0;
            for (std::size_t f = 0; f < d; ++f) acc += row[f] * x.rgb[f];
            h[j] = acc / 255.0;
        }
        return h;
    }

    std::vector<double> hidden_pre(const Image& image) const {
        const ImageF resized = resize_bicubic(image, input_, input_);
        std::vector<double> h = hidden_linear(resized);
        for (std::size_t j = 0; j < h.size(); ++j) h[j] += b1_[j];
        return h;
    }

    double logit_at(const std::vector<double>& hidden, int k) const {
        const double* row = w2_.data() + static_cast<std::size_t>(k) * hidden_;
        double acc = b2_[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < static_cast<std::size_t>(hidden_); ++j)
            acc += row[j] * std::tanh(hidden[j]);
        return acc;
    }

    Prediction logits_from_hidden(const std::vector<double>& hidden) const {
        Prediction out;
        out.logits.resize(static_cast<std::size_t>(classes_));
        for (int k = 0; k < classes_; ++k) out.logits[static_cast<std::size_t>(k)] = logit_at(hidden, k);
        return out;
    }

    int input_;
    int hidden_;
    int classes_;
    std::vector<double> w1_, b1_, w2_, b2_;
};

// Builds the image game of a (model, image, label map, class) quadruple.
// Players are the map's segments; v(S) masks S (or the complement under
// keep_only) and reads the class-k logit difference.
inline Game build_game_naive(std::shared_ptr<const Model> model, Image image, LabelMap map,
                             int class_k, MaskingPolicy policy,
                             CoalitionSemantics semantics = CoalitionSemantics::remove) {
    if (class_k < 0 || class_k >= model->class_count())
        throw DomainError("class " + std::to_string(class_k) + " out of range");
    const auto n = static_cast<std::uint32_t>(map.segment_count);
    auto shared_image = std::make_shared<const Image>(std::move(image));
    auto shared_map = std::make_shared<const LabelMap>(std::move(map));
    if (semantics == CoalitionSemantics::remove) {
        const double base = model->predict(*shared_image).logits[static_cast<std::size_t>(class_k)];
        return Game(n, [model, shared_image, shared_map, class_k, policy, base](const Coalition& s) {
            const Image masked = mask(*shared_image, *shared_map, s, policy);
            return base - model->predict(masked).logits[static_cast<std::size_t>(class_k)];
        });
    }
    const double base = model->predict(mask(*shared_image, *shared_map,
                                            Coalition::full(n), policy))
                            .logits[static_cast<std::size_t>(class_k)];
    return Game(n, [model, shared_image, shared_map, class_k, policy, base, n](const Coalition& s) {
        Coalition complement = Coalition::full(n);
        for (PlayerId i : s.members()) complement.remove(i);
        const Image masked = mask(*shared_image, *shared_map, complement, policy);
        return model->predict(masked).logits[static_cast<std::size_t>(class_k)] - base;
    });
}

inline Game build_game(std::shared_ptr<const Model> model, const Image& image, const LabelMap& map,
                       int class_k, const MaskingPolicy& policy,
                       CoalitionSemantics semantics = CoalitionSemantics::remove) {
    if (class_k < 0 || class_k >= model->class_count())
        throw DomainError("class " + std::to_string(class_k) + " out of range");
    if (GameValueFn fast = model->coalition_value_fn(image, map, class_k, policy, semantics))
        return Game(static_cast<std::uint32_t>(map.segment_count), std::move(fast));
    return build_game_naive(std::move(model), image, map, class_k, policy, semantics);
}

} // namespace coneshap
