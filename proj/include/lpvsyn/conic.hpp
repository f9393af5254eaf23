#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "lpvsyn/errors.hpp"

namespace lpvsyn {

// Second-order cone block over variable indices: x[idx[0]] >= ||x[idx[1..]]||.
struct ConeBlock {
    std::vector<int> indices;
    int dim() const { return static_cast<int>(indices.size()); }
};

// min objective . x  s.t.  Aeq x = beq,  each cone block satisfied.
// Variables not referenced by any cone block are free.
struct ConicProgram {
    int num_vars = 0;
    Eigen::VectorXd objective;
    Eigen::SparseMatrix<double, Eigen::RowMajor> Aeq;
    Eigen::VectorXd beq;
    std::vector<ConeBlock> cones;

    void validate() const;

    // Plain-text dump (one line per nonzero) for external cross-checks.
    void dump(const std::string& path) const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

const char* status_name(SolveStatus s);

struct ConicSolution {
    SolveStatus status = SolveStatus::MaxIter;
    Eigen::VectorXd primal;    // x, all program variables
    Eigen::VectorXd dual_eq;   // multiplier per equality row
    Eigen::VectorXd dual_cone; // multiplier per cone slot, blocks concatenated
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;
    int iterations = 0;
};

// Primal-dual interior-point solve (homogeneous self-dual embedding).
// Deterministic; status certified by residuals.
ConicSolution solve(const ConicProgram& program, double tol = 1e-9, int maxiter = 100);

struct FeasibilityResult {
    bool feasible = false;
    double slack = 0.0;            // maximized interior margin (capped)
    Eigen::VectorXd witness;       // strictly feasible point when feasible
    Eigen::VectorXd certificate;   // equality multipliers bounding the slack otherwise
};

// Maximizes a uniform slack shifted into every cone head; feasible when the
// optimum is at least tol. The program's objective is ignored.
FeasibilityResult check_feasible(const ConicProgram& program, double tol = 0.0);

}  // namespace lpvsyn
