#include "leapgrid/powerflow.hpp"

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/LU>

#include "leapgrid/errors.hpp"

namespace leapgrid {

InjectionSample nominal_injection(const GridCase& grid) {
    InjectionSample x;
    x.p_mw.reserve(grid.injections.size());
    x.q_mvar.reserve(grid.injections.size());
    for (const Injection& inj : grid.injections) {
        x.p_mw.push_back(inj.p_mw);
        x.q_mvar.push_back(inj.kind == InjectionKind::load ? inj.q_mvar : 0.0);
    }
    return x;
}

InjectionSample injection_from_p(const GridCase& grid, const std::vector<double>& p_mw) {
    if (p_mw.size() != grid.injections.size()) {
        throw ShapeError("injection vector has size " + std::to_string(p_mw.size()) +
                         ", grid has " + std::to_string(grid.injections.size()) + " injections");
    }
    InjectionSample x;
    x.p_mw = p_mw;
    x.q_mvar.assign(p_mw.size(), 0.0);
    for (std::size_t i = 0; i < grid.injections.size(); ++i) {
        const Injection& inj = grid.injections[i];
        if (inj.kind != InjectionKind::load) continue;
        if (inj.p_mw != 0.0) {
            x.q_mvar[i] = p_mw[i] * (inj.q_mvar / inj.p_mw);
        } else {
            x.q_mvar[i] = inj.q_mvar;
        }
    }
    return x;
}

namespace {

void check_sample_dims(const GridCase& grid, const InjectionSample& x) {
    if (x.p_mw.size() != grid.injections.size() || x.q_mvar.size() != grid.injections.size()) {
        throw ShapeError("injection sample dimensions (" + std::to_string(x.p_mw.size()) + ", " +
                         std::to_string(x.q_mvar.size()) + ") do not match injection count " +
                         std::to_string(grid.injections.size()));
    }
    for (double v : x.p_mw) {
        if (!std::isfinite(v)) throw NumericsError("non-finite injection p");
    }
    for (double v : x.q_mvar) {
        if (!std::isfinite(v)) throw NumericsError("non-finite injection q");
    }
}

}  // namespace

FlowVector dc_solve(const GridCase& grid, const InjectionSample& x) {
    check_sample_dims(grid, x);
    if (!is_connected(grid)) {
        throw SolveError("DC solve on a disconnected grid");
    }
    const int n = static_cast<int>(grid.buses.size());
    const int slack = grid.slack_index();

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < grid.injections.size(); ++i) {
        p[grid.bus_index(grid.injections[i].bus)] += x.p_mw[i] / grid.base_mva;
    }
    // Net imbalance lands on the slack bus.
    double others = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i != slack) others += p[i];
    }
    p[slack] = -others;

    // Reduced susceptance matrix over non-slack buses.
    std::vector<int> red(n, -1);
    int m = 0;
    for (int i = 0; i < n; ++i) {
        if (i != slack) red[i] = m++;
    }
    Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(m, m);
    for (const Branch& br : grid.branches) {
        if (br.status == 0) continue;
        const int f = grid.bus_index(br.from_bus);
        const int t = grid.bus_index(br.to_bus);
        const double w = 1.0 / br.x;
        if (red[f] >= 0) bmat(red[f], red[f]) += w;
        if (red[t] >= 0) bmat(red[t], red[t]) += w;
        if (red[f] >= 0 && red[t] >= 0) {
            bmat(red[f], red[t]) -= w;
            bmat(red[t], red[f]) -= w;
        }
    }
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < n; ++i) {
        if (red[i] >= 0) rhs[red[i]] = p[i];
    }
    Eigen::VectorXd theta_red = Eigen::PartialPivLU<Eigen::MatrixXd>(bmat).solve(rhs);
    if (!theta_red.allFinite() || (bmat * theta_red - rhs).lpNorm<Eigen::Infinity>() >
                                      1e-8 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) {
        throw SolveError("singular DC susceptance matrix");
    }

    std::vector<double> theta(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (red[i] >= 0) theta[i] = theta_red[red[i]];
    }
    FlowVector flows(grid.branches.size(), 0.0);
    for (std::size_t bi = 0; bi < grid.branches.size(); ++bi) {
        const Branch& br = grid.branches[bi];
        if (br.status == 0) continue;
        const int f = grid.bus_index(br.from_bus);
        const int t = grid.bus_index(br.to_bus);
        flows[bi] = (theta[f] - theta[t]) / br.x * grid.base_mva;
    }
    return flows;
}

namespace pf {

AcModel build_ac_model(const GridCase& grid, const InjectionSample& x) {
    check_sample_dims(grid, x);
    AcModel m;
    m.n = static_cast<int>(grid.buses.size());
    m.ybus = Eigen::MatrixXcd::Zero(m.n, m.n);
    for (const Branch& br : grid.branches) {
        if (br.status == 0) continue;
        const int f = grid.bus_index(br.from_bus);
        const int t = grid.bus_index(br.to_bus);
        const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
        const std::complex<double> bc(0.0, br.b_charging / 2.0);
        m.ybus(f, f) += ys + bc;
        m.ybus(t, t) += ys + bc;
        m.ybus(f, t) -= ys;
        m.ybus(t, f) -= ys;
    }

    m.p_spec = Eigen::VectorXd::Zero(m.n);
    m.q_spec = Eigen::VectorXd::Zero(m.n);
    for (std::size_t i = 0; i < grid.injections.size(); ++i) {
        const int bi = grid.bus_index(grid.injections[i].bus);
        m.p_spec[bi] += x.p_mw[i] / grid.base_mva;
        m.q_spec[bi] += x.q_mvar[i] / grid.base_mva;
    }

    m.v_fixed = Eigen::VectorXd::Ones(m.n);
    for (int i = 0; i < m.n; ++i) {
        const Bus& bus = grid.buses[i];
        switch (bus.kind) {
            case BusKind::slack:
                m.slack = i;
                m.v_fixed[i] = bus.voltage_setpoint;
                break;
            case BusKind::pv:
                m.pv.push_back(i);
                m.v_fixed[i] = bus.voltage_setpoint;
                break;
            case BusKind::pq:
                m.pq.push_back(i);
                break;
        }
    }
    for (int i = 0; i < m.n; ++i) {
        if (i != m.slack) m.angle_vars.push_back(i);
    }
    return m;
}

namespace {

struct CalcPower {
    Eigen::VectorXd p;
    Eigen::VectorXd q;
};

CalcPower calc_power(const AcModel& m, const Eigen::VectorXd& vm, const Eigen::VectorXd& va) {
    Eigen::VectorXcd vc(m.n);
    for (int i = 0; i < m.n; ++i) {
        vc[i] = std::polar(vm[i], va[i]);
    }
    const Eigen::VectorXcd s = vc.cwiseProduct((m.ybus * vc).conjugate());
    return {s.real(), s.imag()};
}

}  // namespace

Eigen::VectorXd mismatch(const AcModel& m, const Eigen::VectorXd& vm, const Eigen::VectorXd& va) {
    const CalcPower s = calc_power(m, vm, va);
    const auto na = static_cast<int>(m.angle_vars.size());
    const auto nq = static_cast<int>(m.pq.size());
    Eigen::VectorXd f(na + nq);
    for (int k = 0; k < na; ++k) {
        f[k] = m.p_spec[m.angle_vars[k]] - s.p[m.angle_vars[k]];
    }
    for (int k = 0; k < nq; ++k) {
        f[na + k] = m.q_spec[m.pq[k]] - s.q[m.pq[k]];
    }
    return f;
}

Eigen::MatrixXd jacobian(const AcModel& m, const Eigen::VectorXd& vm, const Eigen::VectorXd& va) {
    const CalcPower s = calc_power(m, vm, va);
    const auto na = static_cast<int>(m.angle_vars.size());
    const auto nq = static_cast<int>(m.pq.size());
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(na + nq, na + nq);

    auto g = [&](int a, int b) { return m.ybus(a, b).real(); };
    auto bsus = [&](int a, int b) { return m.ybus(a, b).imag(); };

    // d(calc)/dx first; the mismatch is spec - calc, so negate at the end.
    for (int row = 0; row < na + nq; ++row) {
        const bool p_row = row < na;
        const int i = p_row ? m.angle_vars[row] : m.pq[row - na];
        for (int col = 0; col < na + nq; ++col) {
            const bool angle_col = col < na;
            const int jbus = angle_col ? m.angle_vars[col] : m.pq[col - na];
            const double tij = va[i] - va[jbus];
            const double gij = g(i, jbus);
            const double bij = bsus(i, jbus);
            double d;
            if (p_row && angle_col) {
                d = (i == jbus) ? -s.q[i] - bij * vm[i] * vm[i]
                                : vm[i] * vm[jbus] * (gij * std::sin(tij) - bij * std::cos(tij));
            } else if (p_row) {
                d = (i == jbus) ? s.p[i] / vm[i] + gij * vm[i]
                                : vm[i] * (gij * std::cos(tij) + bij * std::sin(tij));
            } else if (angle_col) {
                d = (i == jbus) ? s.p[i] - gij * vm[i] * vm[i]
                                : -vm[i] * vm[jbus] * (gij * std::cos(tij) + bij * std::sin(tij));
            } else {
                d = (i == jbus) ? s.q[i] / vm[i] - bij * vm[i]
                                : vm[i] * (gij * std::sin(tij) - bij * std::cos(tij));
            }
            j(row, col) = -d;
        }
    }
    return j;
}

FlowVector flows_from_voltages(const GridCase& grid, const std::vector<double>& vm,
                               const std::vector<double>& va) {
    FlowVector flows(grid.branches.size(), 0.0);
    for (std::size_t bi = 0; bi < grid.branches.size(); ++bi) {
        const Branch& br = grid.branches[bi];
        if (br.status == 0) continue;
        const int f = grid.bus_index(br.from_bus);
        const int t = grid.bus_index(br.to_bus);
        const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
        const std::complex<double> bc(0.0, br.b_charging / 2.0);
        const std::complex<double> vf = std::polar(vm[f], va[f]);
        const std::complex<double> vt = std::polar(vm[t], va[t]);
        const std::complex<double> current = ys * (vf - vt) + bc * vf;
        flows[bi] = (vf * std::conj(current)).real() * grid.base_mva;
    }
    return flows;
}

}  // namespace pf

AcSolution ac_solve(const GridCase& grid, const InjectionSample& x, double tol, int max_iter) {
    if (tol <= 0) throw ValidationError("ac_solve tolerance must be positive");
    if (!is_connected(grid)) {
        throw SolveError("AC solve on a disconnected grid");
    }
    const pf::AcModel model = pf::build_ac_model(grid, x);

    // Flat start: fixed magnitudes at their setpoints, PQ magnitudes 1, all
    // angles 0.
    Eigen::VectorXd vm = model.v_fixed;
    Eigen::VectorXd va = Eigen::VectorXd::Zero(model.n);

    const auto na = static_cast<int>(model.angle_vars.size());
    int evals = 0;
    int updates = 0;
    for (;;) {
        const Eigen::VectorXd f = pf::mismatch(model, vm, va);
        ++evals;
        const double mm = f.lpNorm<Eigen::Infinity>();
        if (mm <= tol) {
            AcSolution sol;
            sol.vm.assign(vm.data(), vm.data() + model.n);
            sol.va.assign(va.data(), va.data() + model.n);
            sol.flows_mw = pf::flows_from_voltages(grid, sol.vm, sol.va);
            sol.iterations = evals;
            sol.max_mismatch_pu = mm;
            return sol;
        }
        if (updates >= max_iter) {
            throw ConvergenceError("AC power flow did not converge in " +
                                       std::to_string(max_iter) + " iterations (mismatch " +
                                       std::to_string(mm) + " pu)",
                                   max_iter, mm);
        }
        const Eigen::MatrixXd jac = pf::jacobian(model, vm, va);
        const Eigen::VectorXd dx = Eigen::PartialPivLU<Eigen::MatrixXd>(jac).solve(f);
        if (!dx.allFinite() || (jac * dx - f).lpNorm<Eigen::Infinity>() >
                                   1e-6 * std::max(1.0, f.lpNorm<Eigen::Infinity>())) {
            throw SolveError("singular Jacobian in AC power flow");
        }
        for (int k = 0; k < na; ++k) va[model.angle_vars[k]] -= dx[k];
        for (std::size_t k = 0; k < model.pq.size(); ++k) vm[model.pq[k]] -= dx[na + k];
        ++updates;
    }
}

FlowVector oracle(const GridCase& grid, const TopologyVector& tau, const ActionDictionary& dict,
                  const InjectionSample& x) {
    const GridCase modified = apply_topology(grid, tau, dict);
    // Splits only append buses and reassign endpoints, so branch order (and
    // with it the flow indexing) matches the reference grid.
    return ac_solve(modified, x).flows_mw;
}

std::vector<int> overloaded_branches(const GridCase& grid, const FlowVector& flows) {
    if (flows.size() != grid.branches.size()) {
        throw ShapeError("flow vector does not match branch count");
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < grid.branches.size(); ++i) {
        const Branch& br = grid.branches[i];
        if (br.status != 0 && br.thermal_limit_mw && std::abs(flows[i]) > *br.thermal_limit_mw) {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

}  // namespace leapgrid
