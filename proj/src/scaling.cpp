#include "qcr/scaling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace qcr {

QuantityKind quantity_kind_from_string(const std::string& s) {
    if (s == "position") return QuantityKind::position;
    if (s == "momentum") return QuantityKind::momentum;
    if (s == "time") return QuantityKind::time;
    if (s == "mass") return QuantityKind::mass;
    if (s == "energy") return QuantityKind::energy;
    if (s == "planck") return QuantityKind::planck;
    throw InvalidArgument("unknown quantity kind '" + s + "'");
}

std::string to_string(QuantityKind k) {
    switch (k) {
        case QuantityKind::position: return "position";
        case QuantityKind::momentum: return "momentum";
        case QuantityKind::time: return "time";
        case QuantityKind::mass: return "mass";
        case QuantityKind::energy: return "energy";
        case QuantityKind::planck: return "planck";
    }
    return "position";
}

double scale_value(QuantityKind kind, double value, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("scale_value: lambda must be positive");
    switch (kind) {
        case QuantityKind::position:
        case QuantityKind::momentum: return std::sqrt(lambda) * value;
        case QuantityKind::time:
        case QuantityKind::mass: return value;
        case QuantityKind::energy:
        case QuantityKind::planck: return lambda * value;
    }
    throw InvalidArgument("scale_value: unknown kind");
}

Polynomial rescale_polynomial(const Polynomial& p, double argument_factor, double overall) {
    Polynomial out(p.dim());
    for (const auto& [pw, c] : p.terms()) out.add_term(pw, overall * c * std::pow(argument_factor, total_degree(pw)));
    return out;
}

ScaledHamiltonians scale_hamiltonian(const HamiltonianSpec& spec, double lambda) {
    if (!(lambda > 0.0)) throw InvalidArgument("scale_hamiltonian: lambda must be positive");
    if (!spec.potential.is_polynomial()) throw Unsupported("scale_hamiltonian: needs a polynomial potential");
    if (!spec.separable()) throw Unsupported("scale_hamiltonian: vector potentials are not scaled");
    const double r = std::sqrt(lambda);
    ScaledHamiltonians out;
    // The kinetic term p^2/2m is invariant in both families.
    out.h_lambda = HamiltonianSpec(spec.mass, PotentialModel::polynomial(rescale_polynomial(spec.potential.poly(), 1.0 / r, lambda)));
    out.g_lambda = HamiltonianSpec(spec.mass, PotentialModel::polynomial(rescale_polynomial(spec.potential.poly(), r, 1.0 / lambda)));
    out.h_lambda.dimension = out.g_lambda.dimension = spec.dimension;
    return out;
}

CoherentScalingCheck coherent_scaling_check(const PhasePoint& alpha_lambda, double lambda, const GridSpec& grid) {
    if (!(lambda > 0.0)) throw InvalidArgument("coherent_scaling_check: lambda must be positive");
    if (alpha_lambda.dim() != grid.n) throw InvalidArgument("coherent_scaling_check: dimension mismatch");
    const int n = grid.n;
    const double r = std::sqrt(lambda);
    const GridWavefunction vac = GridWavefunction::from_function(grid, [&](const Vec& x) {
        return cplx(std::pow(std::numbers::pi, -n / 4.0) * std::exp(-0.5 * x.squaredNorm()), 0.0);
    });
    // U_lambda(alpha_l) = U(lambda^{-1/2} alpha_l), a_lambda = lambda^{1/2} a.
    const GridWavefunction g = weyl_displace(vac, (1.0 / r) * alpha_lambda);
    CoherentScalingCheck out;
    out.lhs = r * expectation_a(g);
    out.rhs = r * expectation_a(vac) + alpha_lambda.stacked();
    out.residual = (out.lhs - out.rhs).cwiseAbs().maxCoeff();
    out.var_q = position_covariance(vac)(0, 0);
    out.var_q_scaled = lambda * out.var_q;
    out.var_q_dilated = position_covariance(dilate(vac, 1.0 / lambda))(0, 0);
    return out;
}

std::string to_string(HeppReading r) {
    return r == HeppReading::scaled_family ? "scaled-family" : "decreasing-planck (rejected reading)";
}

HeppTable hepp_experiment(const ReductionProblem& problem, const std::vector<double>& lambdas, HeppReading reading) {
    if (lambdas.empty()) throw InvalidArgument("hepp_experiment: empty lambda list");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw InvalidArgument("hepp_experiment: lambdas must be positive");
        if (i && !(lambdas[i] < lambdas[i - 1])) throw InvalidArgument("hepp_experiment: lambdas must decrease");
    }
    HeppTable table;
    table.reading = reading;
    table.rows.resize(lambdas.size());

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < lambdas.size(); i = next++) {
            HeppRow& row = table.rows[i];
            row.lambda = lambdas[i];
            try {
                ReductionProblem p = problem;
                p.spec = scale_hamiltonian(problem.spec, lambdas[i]).g_lambda;
                if (!p.E) p.E = 1.0;  // bounds are not reported here
                const RunReport r = run_pipeline(p, problem.alpha0);
                row.max_error = r.max_error;
                row.max_duhamel = *std::max_element(r.duhamel.begin(), r.duhamel.end());
                row.ok = true;
            } catch (const Error& e) {
                row.failure = e.what();
            }
        }
    };
    const int threads = std::min<int>(worker_count(), static_cast<int>(lambdas.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    table.error_decreasing = table.duhamel_decreasing = true;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (!table.rows[i].ok) table.error_decreasing = table.duhamel_decreasing = false;
        if (i == 0) continue;
        if (!(table.rows[i].max_error < table.rows[i - 1].max_error)) table.error_decreasing = false;
        if (!(table.rows[i].max_duhamel < table.rows[i - 1].max_duhamel)) table.duhamel_decreasing = false;
    }
    return table;
}

}  // namespace qcr
