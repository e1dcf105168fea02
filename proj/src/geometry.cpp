#include "saldet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "saldet/errors.hpp"

namespace saldet {

Box::Box(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
    if (!(std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
          std::isfinite(y_max))) {
        throw ValidationError("box has non-finite coordinates");
    }
    if (!(x_min < x_max && y_min < y_max)) {
        throw ValidationError("box has non-positive extent: " + to_string());
    }
}

std::string Box::to_string() const {
    std::ostringstream os;
    os << "[" << x_min_ << ", " << y_min_ << ", " << x_max_ << ", " << y_max_ << "]";
    return os.str();
}

double area(const Box& b) {
    return b.width() * b.height();
}

double intersection_area(const Box& a, const Box& b) {
    const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
    const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
    if (w <= 0.0 || h <= 0.0) {
        return 0.0;
    }
    return w * h;
}

double iou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) {
        return 0.0;
    }
    const double uni = area(a) + area(b) - inter;
    return inter / uni;
}

double center_distance(const Box& a, const Box& b) {
    return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

} // namespace saldet
