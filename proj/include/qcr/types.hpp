#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcr {

using cplx = std::complex<double>;

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Error hierarchy. Every numerical failure derives from qcr::Error so the CLI
// can map it onto exit code 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : Error {
    using Error::Error;
};
struct InvalidArgument : Error {
    using Error::Error;
};
struct RangeError : Error {
    using Error::Error;
};
struct Unsupported : Error {
    using Error::Error;
};
struct DivergedError : Error {
    DivergedError(const std::string& what, double last_valid)
        : Error(what), last_valid_time(last_valid) {}
    double last_valid_time;
};
struct WraparoundError : Error {
    WraparoundError(const std::string& what, double t, double mass)
        : Error(what), time(t), boundary_mass(mass) {}
    double time;
    double boundary_mass;
};
struct CausticError : Error {
    CausticError(const std::string& what, double t) : Error(what), time(t) {}
    double time;
};

// Classical phase-space point alpha = (xi, pi).
struct PhasePoint {
    Vec xi;
    Vec pi;

    PhasePoint() = default;
    PhasePoint(Vec position, Vec momentum) : xi(std::move(position)), pi(std::move(momentum)) {
        if (xi.size() != pi.size()) throw InvalidArgument("PhasePoint: xi and pi differ in dimension");
    }
    static PhasePoint origin(int n) { return {Vec::Zero(n), Vec::Zero(n)}; }
    static PhasePoint from_stacked(const Vec& a) {
        const Eigen::Index n = a.size() / 2;
        return {a.head(n), a.tail(n)};
    }

    int dim() const { return static_cast<int>(xi.size()); }
    Vec stacked() const {
        Vec a(2 * xi.size());
        a << xi, pi;
        return a;
    }
    bool finite() const { return xi.allFinite() && pi.allFinite(); }
    // ||alpha||_S^2 = |xi|^2 + |pi|^2
    double phase_norm() const { return std::sqrt(xi.squaredNorm() + pi.squaredNorm()); }
};

inline PhasePoint operator+(const PhasePoint& a, const PhasePoint& b) { return {a.xi + b.xi, a.pi + b.pi}; }
inline PhasePoint operator-(const PhasePoint& a, const PhasePoint& b) { return {a.xi - b.xi, a.pi - b.pi}; }
inline PhasePoint operator*(double c, const PhasePoint& a) { return {c * a.xi, c * a.pi}; }

// Symplectic form omega(alpha, beta) = xi_a . pi_b - pi_a . xi_b.
inline double symplectic_form(const PhasePoint& a, const PhasePoint& b) {
    return a.xi.dot(b.pi) - a.pi.dot(b.xi);
}

}  // namespace qcr
