#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace leaky {

/// Dense square grid centered at the origin.
///
/// Cells are indexed by lattice coordinates (x, y) with |x| <= radius and
/// |y| <= radius; cell (0, 0) is the grid center. Storage is row-major in y.
template <class T>
class Grid {
public:
    Grid() = default;

    explicit Grid(int radius, const T& fill = T())
        : radius_(radius),
          side_(2 * radius + 1),
          cells_(static_cast<std::size_t>(side_) * static_cast<std::size_t>(side_), fill) {
        if (radius < 0) throw std::invalid_argument("Grid: radius must be >= 0");
    }

    int radius() const { return radius_; }
    int side() const { return side_; }
    std::size_t size() const { return cells_.size(); }

    bool contains(int x, int y) const {
        return x >= -radius_ && x <= radius_ && y >= -radius_ && y <= radius_;
    }
    bool on_edge(int x, int y) const {
        return x == -radius_ || x == radius_ || y == -radius_ || y == radius_;
    }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y + radius_) * side_ + static_cast<std::size_t>(x + radius_);
    }
    int x_of(std::size_t i) const { return static_cast<int>(i % side_) - radius_; }
    int y_of(std::size_t i) const { return static_cast<int>(i / side_) - radius_; }

    T& operator()(int x, int y) { return cells_[index(x, y)]; }
    const T& operator()(int x, int y) const { return cells_[index(x, y)]; }
    T& operator[](std::size_t i) { return cells_[i]; }
    const T& operator[](std::size_t i) const { return cells_[i]; }

    std::vector<T>& cells() { return cells_; }
    const std::vector<T>& cells() const { return cells_; }

    /// Same contents recentered in a larger grid.
    Grid<T> grown(int new_radius, const T& fill = T()) const {
        if (new_radius < radius_) throw std::invalid_argument("Grid::grown: cannot shrink");
        Grid<T> g(new_radius, fill);
        for (int y = -radius_; y <= radius_; ++y)
            for (int x = -radius_; x <= radius_; ++x) g(x, y) = (*this)(x, y);
        return g;
    }

    bool operator==(const Grid&) const = default;

private:
    int radius_ = 0;
    int side_ = 1;
    std::vector<T> cells_ = std::vector<T>(1);
};

}  // namespace leaky
