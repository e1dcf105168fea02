#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "saldet/matching.hpp"

namespace saldet {

/// Detection list files look like
///   {"detections": [{"image_id": ..., "box": [x0, y0, x1, y1], "score": ...}, ...]}
/// Order is preserved on both paths.

std::vector<Detection> parse_detections(const std::string& text);
std::vector<Detection> load_detections(const std::filesystem::path& path);

std::string serialize_detections(std::span<const Detection> detections);
void save_detections(std::span<const Detection> detections, const std::filesystem::path& path);

} // namespace saldet
