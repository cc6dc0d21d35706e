#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fraccaloric/geometry.hpp"
#include "fraccaloric/grid.hpp"
#include "fraccaloric/stable.hpp"

namespace fc {

// Dense symmetric collocation matrix for the restricted fractional Laplacian
// with zero exterior condition.  Off-diagonal entries carry hat-function
// quadrature weights of nu on the lattice; the diagonal carries the exact
// exterior mass kappa_D plus the interior row sum, and a Taylor-corrected
// finite-difference term covers the singular cell.
struct GridOperator {
    GridOperator(StableModel m, Domain dom, Grid g)
        : model(std::move(m)), domain(std::move(dom)), grid(std::move(g)) {}

    StableModel model;
    Domain domain;
    Grid grid;
    Eigen::MatrixXd A;
    std::vector<double> kappa;  // true-domain killing intensity at the nodes
    double scheme_order = 1.0;  // empirical convergence order of lambda_1 in h
    double h = 0.0;
    double near_correction = 0.0;   // FD weight on axis neighbors
    std::vector<int> parent_nodes;  // nonempty for restricted operators

    // discrete jump weight between nodes i and j (the -A_ij coupling)
    double jump_weight(int i, int j) const;
};

GridOperator assemble_operator(const StableModel& m, const Domain& dom, double h);

// Principal-submatrix operator: killing on exiting the node subset.  The
// discrete Duhamel and mean-value identities against the parent are exact.
GridOperator restrict_operator(const GridOperator& parent, const std::vector<int>& nodes);

struct EigenSystem {
    Grid grid;
    double h = 0.0;
    int n_max = 0;                  // default truncation for heat kernels
    Eigen::VectorXd lambda;         // all discrete eigenvalues, ascending
    Eigen::MatrixXd phi;            // nodes x modes, <phi_m, phi_n> h^d = delta
    std::vector<double> sup_phi;    // max |phi_n| per mode
    std::vector<int> parent_nodes;  // nonempty when built from a restriction

    double cell_volume() const { return grid.cell_volume(); }
    int modes() const { return static_cast<int>(lambda.size()); }

    // p_t^D(x_i, x_j) truncated at nm modes (nm < 0 -> n_max, 0 -> all)
    double heat_kernel(double t, int i, int j, int nm = -1) const;
    Eigen::VectorXd heat_field(double t, int i, int nm = -1) const;
    Eigen::VectorXd apply_heat(double t, const Eigen::VectorXd& f, int nm = 0) const;
    Eigen::VectorXd survival(double t) const;  // P^x(tau > t) on the grid

    // sum_{n > nm} e^{-lambda_n t} ||phi_n||_inf^2 : truncation estimate
    double heat_truncation(double t, int nm = -1) const;

    double green(int i, int j) const;  // all modes
    Eigen::VectorXd green_field(int i) const;
    Eigen::VectorXd apply_green(const Eigen::VectorXd& f) const;

    // |d/dt p_t^D + (A p_t^D(.,j))(i)| evaluated with the spectral derivative
    double heat_residual(const GridOperator& op, double t, int i, int j) const;

    void save(const std::string& path) const;
    static EigenSystem load(const std::string& path, const Domain& dom);
};

EigenSystem eigensystem(const GridOperator& op, int n_max);

// Solve A u = f (SPD dense); used for Green potentials without a full
// eigendecomposition.
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& A, const Eigen::VectorXd& f);

// Crank-Nicolson march of dV/dt = -A V (columns marched together) with a
// Rannacher start, for grids too large to eigendecompose.  Returns the fields
// at each requested time (strictly ascending; snapped to the step grid).
// One factorization total, done in place.
std::vector<Eigen::MatrixXd> march_heat(const Eigen::MatrixXd& A, const Eigen::MatrixXd& v0,
                                        const std::vector<double>& times, double dt);

}  // namespace fc
