#pragma once

#include <cstdint>
#include <vector>

#include "fraccaloric/geometry.hpp"
#include "fraccaloric/point.hpp"

namespace fc {

// Uniform lattice of cell centers covering the bounding box of a domain;
// nodes are the centers lying inside the domain.
class Grid {
  public:
    Grid() = default;
    Grid(const Domain& dom, double h);

    int dim() const { return d_; }
    double h() const { return h_; }
    double cell_volume() const;
    int size() const { return static_cast<int>(pts_.size()); }
    const std::vector<Pt>& points() const { return pts_; }
    const Pt& point(int i) const { return pts_[i]; }

    // lattice coordinates of node i
    const std::array<int, 3>& cell(int i) const { return cells_[i]; }

    // node index at lattice coordinates, -1 if exterior/out of range
    int node_at(int ix, int iy = 0, int iz = 0) const;
    // node whose cell contains x (or -1)
    int node_near(const Pt& x) const;
    // d-linear interpolation of a node field at x, zero extension outside
    double interpolate(const std::vector<double>& f, const Pt& x) const;

    const std::array<int, 3>& shape() const { return n_; }
    const Pt& origin() const { return origin_; }  // center of cell (0,0,0)

  private:
    int d_ = 2;
    double h_ = 0.1;
    Pt origin_{0, 0, 0};
    std::array<int, 3> n_{1, 1, 1};
    std::vector<std::int32_t> node_of_cell_;
    std::vector<Pt> pts_;
    std::vector<std::array<int, 3>> cells_;
};

// A sampled function with attached uncertainty.
struct ScalarField {
    std::vector<Pt> pts;
    std::vector<double> value;
    std::vector<double> stderr_;
    std::vector<std::uint8_t> unreliable;  // set when a cell had too few hits
    double cell_volume = 0.0;
};

}  // namespace fc
