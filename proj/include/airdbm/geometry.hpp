#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace airdbm {

// Fixed-length y-coordinate vector of a chord-normalized airfoil.
//
// Entry j sits at arc parameter s_j = 2j/F with x(s_j) = |1 - s_j|: index 0 is
// the upper trailing edge, F/2 the leading edge and F the lower trailing edge.
// F is even and at least 2; all entries are finite.
class SeligVector {
public:
    SeligVector() = default;
    explicit SeligVector(std::vector<double> y);

    static SeligVector zeros(int resolution);

    [[nodiscard]] int resolution() const noexcept { return static_cast<int>(y_.size()) - 1; }
    [[nodiscard]] std::size_t size() const noexcept { return y_.size(); }
    [[nodiscard]] bool empty() const noexcept { return y_.empty(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return y_; }
    [[nodiscard]] const std::vector<double>& vector() const noexcept { return y_; }
    [[nodiscard]] double operator[](std::size_t j) const { return y_[j]; }

    // x coordinate of station j.
    [[nodiscard]] double x(std::size_t j) const noexcept { return station_x(j, resolution()); }

    // Paired stations i = 0..F/2 ordered from the leading edge to the trailing
    // edge; both share x = 2i/F.
    [[nodiscard]] double upper_at(int i) const { return y_[static_cast<std::size_t>(resolution() / 2 - i)]; }
    [[nodiscard]] double lower_at(int i) const { return y_[static_cast<std::size_t>(resolution() / 2 + i)]; }
    [[nodiscard]] double thickness_at(int i) const { return upper_at(i) - lower_at(i); }

    static double station_x(std::size_t j, int resolution) noexcept;

    friend bool operator==(const SeligVector&, const SeligVector&) = default;

private:
    std::vector<double> y_;
};

// Scaled l1 distance (2/F)·Σ|a_j - b_j| over all F+1 stations.
double similarity(const SeligVector& a, const SeligVector& b);

// Sign-change self-intersection check on the paired upper/lower stations.
// Thickness within 1e-12 of zero counts as contact: at an interior station it
// is reported as intersecting, at the trailing edge it is a sealed edge.
bool detect_self_intersection(const SeligVector& shape);

struct RepairOptions {
    double epsilon = 1e-3;
    int smooth_halfwidth = 3;
};

// Stiffens every interior station whose thickness is below epsilon to exactly
// epsilon (symmetric about the local midline), then applies a centered moving
// average to both surfaces over the affected stations plus a margin.
// Feasible shapes are returned unchanged. The leading edge is never modified;
// the trailing-edge pair is only touched when it is itself crossed, in which
// case both ends move to their midpoint. Throws InfeasibleShape if the result
// still intersects.
SeligVector repair_self_intersection(const SeligVector& shape, const RepairOptions& options = {});

// (x, y) polyline in Selig traversal order.
std::vector<std::pair<double, double>> to_points(const SeligVector& shape);

// Coordinate file text: name line followed by one "x y" pair per line.
std::string to_coordinate_text(const SeligVector& shape, const std::string& name);

} // namespace airdbm
