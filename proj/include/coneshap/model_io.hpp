#pragma once

#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "coneshap/adapter.hpp"
#include "coneshap/errors.hpp"
#include "coneshap/models.hpp"

namespace coneshap {

// Weight files are JSON {"kind": ..., "shapes": [...], "data": [flat]} with
// the tensors concatenated row-major in shape order.
//   linear_color: shapes [[K,3],[K]]           (class weights, bias)
//   tiny_mlp:     shapes [[H,D],[H],[K,H],[K]] (affine1, affine2), D = input^2*3
// Adapter references skip shapes/data:
//   {"kind": "adapter", "class_count": 2, "command": ["python3", "echo.py"]}

namespace detail {

inline std::vector<std::vector<std::size_t>> parse_shapes(const nlohmann::json& j) {
    std::vector<std::vector<std::size_t>> shapes;
    for (const auto& s : j.at("shapes")) shapes.push_back(s.get<std::vector<std::size_t>>());
    return shapes;
}

inline std::size_t shape_elems(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

inline std::vector<std::vector<double>> split_data(const nlohmann::json& j,
                                                   const std::vector<std::vector<std::size_t>>& shapes) {
    const auto flat = j.at("data").get<std::vector<double>>();
    std::size_t expected = 0;
    for (const auto& s : shapes) expected += shape_elems(s);
    if (flat.size() != expected)
        throw FormatError("weight data has " + std::to_string(flat.size()) + " values, shapes need " +
                          std::to_string(expected));
    std::vector<std::vector<double>> out;
    std::size_t off = 0;
    for (const auto& s : shapes) {
        const std::size_t n = shape_elems(s);
        out.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(off),
                         flat.begin() + static_cast<std::ptrdiff_t>(off + n));
        off += n;
    }
    return out;
}

} // namespace detail

inline std::shared_ptr<Model> model_from_json(const nlohmann::json& j) {
    std::string kind;
    try {
        kind = j.at("kind").get<std::string>();
        if (kind == "linear_color") {
            const auto shapes = detail::parse_shapes(j);
            if (shapes.size() != 2 || shapes[0].size() != 2 || shapes[0][1] != 3 ||
                shapes[1].size() != 1 || shapes[1][0] != shapes[0][0])
                throw FormatError("linear_color expects shapes [[K,3],[K]]");
            const auto tensors = detail::split_data(j, shapes);
            const std::size_t classes = shapes[0][0];
            std::vector<std::array<double, 3>> w(classes);
            for (std::size_t k = 0; k < classes; ++k)
                w[k] = {tensors[0][k * 3], tensors[0][k * 3 + 1], tensors[0][k * 3 + 2]};
            return std::make_shared<LinearColorModel>(std::move(w), tensors[1]);
        }
        if (kind == "tiny_mlp") {
            const int input = j.value("input_size", 16);
            const auto shapes = detail::parse_shapes(j);
            if (shapes.size() != 4 || shapes[0].size() != 2 || shapes[1].size() != 1 ||
                shapes[2].size() != 2 || shapes[3].size() != 1)
                throw FormatError("tiny_mlp expects shapes [[H,D],[H],[K,H],[K]]");
            const std::size_t hidden = shapes[0][0];
            const std::size_t feat = shapes[0][1];
            const std::size_t classes = shapes[2][0];
            if (feat != static_cast<std::size_t>(input) * input * 3)
                throw FormatError("tiny_mlp feature dim does not match input_size");
            if (shapes[1][0] != hidden || shapes[2][1] != hidden || shapes[3][0] != classes)
                throw FormatError("tiny_mlp shapes are inconsistent");
            auto tensors = detail::split_data(j, shapes);
            return std::make_shared<TinyMlpModel>(input, static_cast<int>(hidden),
                                                  static_cast<int>(classes), std::move(tensors[0]),
                                                  std::move(tensors[1]), std::move(tensors[2]),
                                                  std::move(tensors[3]));
        }
        if (kind == "adapter") {
            return std::make_shared<AdapterModel>(j.at("command").get<std::vector<std::string>>(),
                                                  j.at("class_count").get<int>(),
                                                  j.value("timeout_ms", 10000), j.value("pool", 1));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad model file: ") + e.what());
    }
    throw FormatError("unknown model kind '" + kind + "'");
}

inline std::shared_ptr<Model> load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("cannot parse model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

inline nlohmann::json model_to_json(const LinearColorModel& model) {
    nlohmann::json j;
    j["kind"] = "linear_color";
    j["class_count"] = model.class_count();
    const std::size_t classes = model.weights().size();
    j["shapes"] = {{classes, 3}, {classes}};
    std::vector<double> data;
    for (const auto& w : model.weights()) data.insert(data.end(), w.begin(), w.end());
    data.insert(data.end(), model.bias().begin(), model.bias().end());
    j["data"] = data;
    return j;
}

inline nlohmann::json model_to_json(const TinyMlpModel& model) {
    nlohmann::json j;
    j["kind"] = "tiny_mlp";
    j["class_count"] = model.class_count();
    j["input_size"] = model.input_size();
    j["hidden"] = model.hidden_size();
    const auto h = static_cast<std::size_t>(model.hidden_size());
    const auto k = static_cast<std::size_t>(model.class_count());
    const auto d = static_cast<std::size_t>(model.input_size()) * model.input_size() * 3;
    j["shapes"] = {{h, d}, {h}, {k, h}, {k}};
    std::vector<double> data;
    data.insert(data.end(), model.w1().begin(), model.w1().end());
    data.insert(data.end(), model.b1().begin(), model.b1().end());
    data.insert(data.end(), model.w2().begin(), model.w2().end());
    data.insert(data.end(), model.b2().begin(), model.b2().end());
    j["data"] = data;
    return j;
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

} // namespace coneshap
