#pragma once

#include <optional>
#include <vector>

#include "qcr/polynomial.hpp"
#include "qcr/types.hpp"

namespace qcr {

// Potential energy V(xi). Internal units have hbar = 1.
//
// Polynomial potentials: pure per-axis powers up to degree 8, mixed (cross)
// monomials up to total degree 4. Derivatives of every order are exact.
//
// Tabulated potentials are one-dimensional natural cubic splines through the
// sample points. They expose value, first and second derivative only; third
// derivatives are refused rather than differentiating interpolation noise.
class PotentialModel {
public:
    enum class Kind { polynomial, tabulated };

    static PotentialModel polynomial(Polynomial p);
    static PotentialModel polynomial_1d(const std::vector<double>& coeffs) {
        return polynomial(Polynomial::univariate(coeffs));
    }
    static PotentialModel tabulated(std::vector<double> x, std::vector<double> v);
    static PotentialModel zero(int n) { return polynomial(Polynomial(n)); }

    Kind kind() const { return kind_; }
    int dim() const { return n_; }
    bool is_polynomial() const { return kind_ == Kind::polynomial; }
    // Polynomial of degree <= 2 (remainder vanishes identically).
    bool is_quadratic() const;
    const Polynomial& poly() const;
    const std::vector<double>& table_x() const { return tx_; }
    const std::vector<double>& table_v() const { return tv_; }

    double value(const Vec& xi) const;
    Vec gradient(const Vec& xi) const;
    Mat hessian(const Vec& xi) const;
    Vec third_derivative(const Vec& xi) const;

    // Pointwise Taylor remainder r(x) = V(xi+x) - V(xi) - V'(xi).x - x.V''(xi).x / 2.
    double taylor_remainder(const Vec& xi, const Vec& x) const;
    // Same remainder as a polynomial in x (polynomial potentials only).
    Polynomial remainder_polynomial(const Vec& xi) const;

    // Evaluate on many 1D points (grid use); tabulated values outside the
    // table throw DomainError.
    double value_1d(double x) const;

private:
    void check_table_range(double x) const;
    int locate(double x) const;

    Kind kind_ = Kind::polynomial;
    int n_ = 1;
    Polynomial poly_;
    std::vector<double> tx_, tv_, m2_;  // knots, values, spline second derivatives
};

// h(xi, pi) = |pi - A(xi)|^2 / 2m + V(xi).
// A vector potential is honoured by the classical flow only; specs carrying one
// must be flagged classical_only and are rejected by the quantum modules.
struct HamiltonianSpec {
    double mass = 1.0;
    int dimension = 1;
    PotentialModel potential = PotentialModel::zero(1);
    std::optional<std::vector<PotentialModel>> vector_potential;
    bool classical_only = false;

    HamiltonianSpec() = default;
    HamiltonianSpec(double m, PotentialModel v);
    HamiltonianSpec(double m, PotentialModel v, std::vector<PotentialModel> a);

    void validate() const;
    // Standard form p^2/2m + V(q) (no vector potential).
    bool separable() const { return !vector_potential.has_value(); }
    void require_quantum() const;
};

double eval_h(const HamiltonianSpec& spec, const PhasePoint& alpha);
// (d_xi h, d_pi h) stacked into a 2n vector.
Vec gradient_h(const HamiltonianSpec& spec, const PhasePoint& alpha);
// 2n x 2n matrix with blocks [[h_xixi, h_xipi], [h_pixi, h_pipi]].
Mat hessian_h(const HamiltonianSpec& spec, const PhasePoint& alpha);
double taylor_remainder_V(const HamiltonianSpec& spec, const Vec& xi_center, const Vec& x);

// Hamiltonian vector field J . h^(1)(alpha).
PhasePoint hamiltonian_field(const HamiltonianSpec& spec, const PhasePoint& alpha);

}  // namespace qcr
