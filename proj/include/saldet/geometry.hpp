#pragma once

#include <string>

namespace saldet {

/// Axis-aligned rectangle in continuous image pixel coordinates,
/// origin at the top-left corner. Invariants (strictly positive area,
/// finite coordinates) are enforced at construction; instances are
/// immutable values.
class Box {
public:
    Box(double x_min, double y_min, double x_max, double y_max);

    double x_min() const { return x_min_; }
    double y_min() const { return y_min_; }
    double x_max() const { return x_max_; }
    double y_max() const { return y_max_; }

    double width() const { return x_max_ - x_min_; }
    double height() const { return y_max_ - y_min_; }
    double center_x() const { return 0.5 * (x_min_ + x_max_); }
    double center_y() const { return 0.5 * (y_min_ + y_max_); }

    bool operator==(const Box& other) const = default;

    std::string to_string() const;

private:
    double x_min_;
    double y_min_;
    double x_max_;
    double y_max_;
};

/// Box area in px^2; strictly positive for any valid Box.
double area(const Box& b);

/// Overlap area of two boxes; zero when they are disjoint.
double intersection_area(const Box& a, const Box& b);

/// Intersection-over-union in [0, 1]; 1 iff the boxes coincide.
double iou(const Box& a, const Box& b);

/// Euclidean distance between the box centers, in px.
double center_distance(const Box& a, const Box& b);

} // namespace saldet
