#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "leapgrid/actions.hpp"
#include "leapgrid/grid.hpp"

namespace leapgrid {

// Active/reactive power per injection, in the injection order of the
// GridCase. q entries are meaningful for loads; generator entries stay 0
// (PV/slack reactive power is an output of the AC solve).
struct InjectionSample {
    std::vector<double> p_mw;
    std::vector<double> q_mvar;
};

// Per-branch from-end active power in MW, branch order of the GridCase.
// Out-of-service branches carry exactly 0.
using FlowVector = std::vector<double>;

struct AcSolution {
    std::vector<double> vm;  // per-unit voltage magnitude per bus
    std::vector<double> va;  // radians, slack at 0
    FlowVector flows_mw;
    int iterations = 0;        // mismatch evaluations (1 = converged at start)
    double max_mismatch_pu = 0.0;
};

// The case's own injections as a sample.
InjectionSample nominal_injection(const GridCase& grid);

// Rebuilds a full InjectionSample from active power alone: load reactive
// power follows the nominal power factor (q = p * q_nom/p_nom, with q_nom
// kept as-is for loads whose nominal p is zero). This is the canonical
// x -> (p, q) mapping, so stored datasets replay bit-identically from p.
InjectionSample injection_from_p(const GridCase& grid, const std::vector<double>& p_mw);

// DC approximation: solves B'theta = P with the slack angle fixed at 0 and
// the net imbalance rebalanced onto the slack bus. Flow on branch (i,j) is
// (theta_i - theta_j)/x * base_MVA.
FlowVector dc_solve(const GridCase& grid, const InjectionSample& x);

// Full Newton-Raphson on the polar power-mismatch equations, flat start.
AcSolution ac_solve(const GridCase& grid, const InjectionSample& x,
                    double tol = 1e-8, int max_iter = 20);

// y = S(x, tau): apply_topology then ac_solve, flows in the reference
// branch ordering (splits never add branches).
FlowVector oracle(const GridCase& grid, const TopologyVector& tau,
                  const ActionDictionary& dict, const InjectionSample& x);

// Indices of in-service branches whose |flow| exceeds their thermal limit.
std::vector<int> overloaded_branches(const GridCase& grid, const FlowVector& flows);

namespace pf {

// Prepared per-unit bus model for the NR iteration. Unknown vector layout:
// [va(angle_vars...), vm(pq...)].
struct AcModel {
    int n = 0;
    Eigen::MatrixXcd ybus;
    Eigen::VectorXd p_spec;   // pu net injection per bus
    Eigen::VectorXd q_spec;
    Eigen::VectorXd v_fixed;  // setpoints at PV/slack, 1.0 elsewhere
    int slack = -1;
    std::vector<int> pv;
    std::vector<int> pq;
    std::vector<int> angle_vars;  // all non-slack buses, ascending
};

AcModel build_ac_model(const GridCase& grid, const InjectionSample& x);

// Mismatch f = [P_spec - P_calc (non-slack); Q_spec - Q_calc (PQ)].
Eigen::VectorXd mismatch(const AcModel& m, const Eigen::VectorXd& vm, const Eigen::VectorXd& va);

// Analytic d(mismatch)/d[va(angle_vars), vm(pq)].
Eigen::MatrixXd jacobian(const AcModel& m, const Eigen::VectorXd& vm, const Eigen::VectorXd& va);

// From-end MW flows from a converged voltage profile.
FlowVector flows_from_voltages(const GridCase& grid, const std::vector<double>& vm,
                               const std::vector<double>& va);

}  // namespace pf

}  // namespace leapgrid
