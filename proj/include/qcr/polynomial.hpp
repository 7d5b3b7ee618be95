#pragma once

#include <array>
#include <map>

#include "qcr/types.hpp"

namespace qcr {

// Exponent vector of a monomial in up to three variables.
using Powers = std::array<int, 3>;

inline int total_degree(const Powers& p) { return p[0] + p[1] + p[2]; }

// Sparse multivariate polynomial sum_k c_k x^{p_k} in n <= 3 variables.
// Derivatives are exact (coefficient shift-and-scale).
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(int n) : n_(n) {
        if (n < 1 || n > 3) throw InvalidArgument("Polynomial: dimension must be 1, 2 or 3");
    }

    // Univariate polynomial from dense coefficients c0 + c1 x + c2 x^2 + ...
    static Polynomial univariate(const std::vector<double>& coeffs);

    int dim() const { return n_; }
    int degree() const;
    const std::map<Powers, double>& terms() const { return terms_; }

    void add_term(const Powers& p, double c);
    double coefficient(const Powers& p) const;

    template <typename Scalar>
    Scalar evaluate(const VecX<Scalar>& x) const {
        Scalar acc(0);
        for (const auto& [p, c] : terms_) {
            Scalar term(c);
            for (int j = 0; j < n_; ++j)
                for (int e = 0; e < p[j]; ++e) term *= x(j);
            acc += term;
        }
        return acc;
    }
    double operator()(const Vec& x) const { return evaluate<double>(x); }

    Polynomial derivative(int axis) const;
    Vec gradient(const Vec& x) const;
    Mat hessian(const Vec& x) const;
    // Third-derivative tensor flattened as index (i*n + j)*n + k.
    Vec third_derivative(const Vec& x) const;

    // p(center + y) re-expanded as a polynomial in y.
    Polynomial shifted(const Vec& center) const;
    // Terms of total degree >= min_degree only.
    Polynomial truncated_below(int min_degree) const;

    Polynomial operator*(const Polynomial& other) const;
    Polynomial operator+(const Polynomial& other) const;
    Polynomial scaled(double c) const;
    bool is_zero(double tol = 0.0) const;

private:
    int n_ = 1;
    std::map<Powers, double> terms_;
};

}  // namespace qcr
