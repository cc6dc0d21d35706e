#include "fraccaloric/grid.hpp"

#include <cmath>

#include "fraccaloric/errors.hpp"

namespace fc {

Grid::Grid(const Domain& dom, double h) : d_(dom.dim()), h_(h) {
    if (h <= 0) throw ConfigError("grid spacing must be positive");
    Pt lo = dom.bbox_lo(), hi = dom.bbox_hi();
    for (int i = 0; i < d_; ++i) {
        n_[i] = std::max(1, static_cast<int>(std::ceil((hi[i] - lo[i]) / h - 1e-12)));
        origin_[i] = lo[i] + 0.5 * h;
    }
    for (int i = d_; i < 3; ++i) n_[i] = 1;
    node_of_cell_.assign(static_cast<size_t>(n_[0]) * n_[1] * n_[2], -1);
    for (int iz = 0; iz < n_[2]; ++iz)
        for (int iy = 0; iy < n_[1]; ++iy)
            for (int ix = 0; ix < n_[0]; ++ix) {
                Pt p = pt(origin_[0] + ix * h_, d_ >= 2 ? origin_[1] + iy * h_ : 0.0,
                          d_ == 3 ? origin_[2] + iz * h_ : 0.0);
                if (dom.contains(p)) {
                    size_t lin = (static_cast<size_t>(iz) * n_[1] + iy) * n_[0] + ix;
                    node_of_cell_[lin] = static_cast<std::int32_t>(pts_.size());
                    pts_.push_back(p);
                    cells_.push_back({ix, iy, iz});
                }
            }
    if (pts_.empty()) throw ConfigError("grid resolves no interior point; h too coarse");
}

double Grid::cell_volume() const {
    double v = h_;
    for (int i = 1; i < d_; ++i) v *= h_;
    return v;
}

int Grid::node_at(int ix, int iy, int iz) const {
    if (ix < 0 || ix >= n_[0] || iy < 0 || iy >= n_[1] || iz < 0 || iz >= n_[2]) return -1;
    return node_of_cell_[(static_cast<size_t>(iz) * n_[1] + iy) * n_[0] + ix];
}

int Grid::node_near(const Pt& x) const {
    int c[3] = {0, 0, 0};
    for (int i = 0; i < d_; ++i) {
        c[i] = static_cast<int>(std::lround((x[i] - origin_[i]) / h_));
        if (c[i] < 0 || c[i] >= n_[i]) return -1;
    }
    return node_at(c[0], c[1], c[2]);
}

double Grid::interpolate(const std::vector<double>& f, const Pt& x) const {
    int base[3] = {0, 0, 0};
    double w[3] = {0, 0, 0};
    for (int i = 0; i < d_; ++i) {
        double s = (x[i] - origin_[i]) / h_;
        base[i] = static_cast<int>(std::floor(s));
        w[i] = s - base[i];
    }
    double acc = 0.0;
    int corners = 1 << d_;
    for (int c = 0; c < corners; ++c) {
        double wt = 1.0;
        int idx[3] = {base[0], base[1], base[2]};
        for (int i = 0; i < d_; ++i) {
            if (c & (1 << i)) {
                idx[i] += 1;
                wt *= w[i];
            } else {
                wt *= 1.0 - w[i];
            }
        }
        int nd = node_at(idx[0], d_ >= 2 ? idx[1] : 0, d_ == 3 ? idx[2] : 0);
        if (nd >= 0) acc += wt * f[nd];
    }
    return acc;
}

}  // namespace fc
