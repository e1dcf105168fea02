#include "saldet/detections_io.hpp"

#include <nlohmann/json.hpp>

#include "saldet/errors.hpp"
#include "saldet/io.hpp"

namespace saldet {

using ordered_json = nlohmann::ordered_json;

namespace {

Detection parse_detection(const ordered_json& obj, std::size_t index) {
    const std::string context = "detection #" + std::to_string(index);
    if (!obj.is_object()) {
        throw SchemaError(context + " must be an object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (key != "image_id" && key != "box" && key != "score") {
            throw SchemaError("unknown field '" + key + "' in " + context);
        }
    }
    const auto require = [&](const char* key) -> const ordered_json& {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            throw SchemaError("missing field '" + std::string(key) + "' in " + context);
        }
        return *it;
    };

    const auto& id = require("image_id");
    if (!id.is_string()) {
        throw SchemaError("field 'image_id' must be a string in " + context);
    }
    const auto& box = require("box");
    if (!box.is_array() || box.size() != 4) {
        throw SchemaError("field 'box' must be an array [x_min, y_min, x_max, y_max] in " +
                          context);
    }
    double c[4];
    for (int i = 0; i < 4; ++i) {
        if (!box[i].is_number()) {
            throw SchemaError("box coordinates must be numbers in " + context);
        }
        c[i] = box[i].get<double>();
    }
    const auto& score = require("score");
    if (!score.is_number()) {
        throw SchemaError("field 'score' must be a number in " + context);
    }

    Detection det{id.get<std::string>(), Box(c[0], c[1], c[2], c[3]), score.get<double>()};
    validate(det);
    return det;
}

} // namespace

std::vector<Detection> parse_detections(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw SchemaError("detections file must be a JSON object");
    }
    for (const auto& [key, _] : doc.items()) {
        if (key != "detections") {
            throw SchemaError("unknown top-level field '" + key + "' in detections file");
        }
    }
    const auto it = doc.find("detections");
    if (it == doc.end() || !it->is_array()) {
        throw SchemaError("detections file needs a top-level 'detections' array");
    }

    std::vector<Detection> out;
    out.reserve(it->size());
    for (std::size_t i = 0; i < it->size(); ++i) {
        out.push_back(parse_detection((*it)[i], i));
    }
    return out;
}

std::vector<Detection> load_detections(const std::filesystem::path& path) {
    return parse_detections(read_text_file(path));
}

std::string serialize_detections(std::span<const Detection> detections) {
    ordered_json arr = ordered_json::array();
    for (const auto& det : detections) {
        validate(det);
        ordered_json j;
        j["image_id"] = det.image_id;
        j["box"] = ordered_json::array(
            {det.box.x_min(), det.box.y_min(), det.box.x_max(), det.box.y_max()});
        j["score"] = det.score;
        arr.push_back(std::move(j));
    }
    ordered_json doc;
    doc["detections"] = std::move(arr);
    return doc.dump(2) + "\n";
}

void save_detections(std::span<const Detection> detections, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_detections(detections));
}

} // namespace saldet
