#include "qcr/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

namespace qcr {

// ---------------------------------------------------------------- Polynomial

Polynomial Polynomial::univariate(const std::vector<double>& coeffs) {
    Polynomial p(1);
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        if (coeffs[k] != 0.0) p.add_term({static_cast<int>(k), 0, 0}, coeffs[k]);
    return p;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [p, c] : terms_) d = std::max(d, total_degree(p));
    return d;
}

void Polynomial::add_term(const Powers& p, double c) {
    for (int j = n_; j < 3; ++j)
        if (p[j] != 0) throw InvalidArgument("Polynomial: exponent on axis beyond dimension");
    for (int j = 0; j < 3; ++j)
        if (p[j] < 0) throw InvalidArgument("Polynomial: negative exponent");
    if (c == 0.0) return;
    auto& slot = terms_[p];
    slot += c;
    if (slot == 0.0) terms_.erase(p);
}

double Polynomial::coefficient(const Powers& p) const {
    auto it = terms_.find(p);
    return it == terms_.end() ? 0.0 : it->second;
}

Polynomial Polynomial::derivative(int axis) const {
    Polynomial d(n_);
    for (const auto& [p, c] : terms_) {
        if (p[axis] == 0) continue;
        Powers q = p;
        q[axis] -= 1;
        d.add_term(q, c * p[axis]);
    }
    return d;
}

Vec Polynomial::gradient(const Vec& x) const {
    Vec g(n_);
    for (int j = 0; j < n_; ++j) g(j) = derivative(j)(x);
    return g;
}

Mat Polynomial::hessian(const Vec& x) const {
    Mat h(n_, n_);
    for (int i = 0; i < n_; ++i) {
        const Polynomial di = derivative(i);
        for (int j = i; j < n_; ++j) {
            h(i, j) = di.derivative(j)(x);
            h(j, i) = h(i, j);
        }
    }
    return h;
}

Vec Polynomial::third_derivative(const Vec& x) const {
    Vec t(n_ * n_ * n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                t((i * n_ + j) * n_ + k) = derivative(i).derivative(j).derivative(k)(x);
    return t;
}

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

Polynomial Polynomial::shifted(const Vec& center) const {
    Polynomial out(n_);
    for (const auto& [p, c] : terms_) {
        // prod_j (center_j + y_j)^{p_j}, expanded axis by axis
        std::map<Powers, double> partial{{Powers{0, 0, 0}, c}};
        for (int j = 0; j < n_; ++j) {
            std::map<Powers, double> next;
            for (const auto& [q, a] : partial) {
                for (int k = 0; k <= p[j]; ++k) {
                    Powers r = q;
                    r[j] += k;
                    next[r] += a * binomial(p[j], k) * std::pow(center(j), p[j] - k);
                }
            }
            partial = std::move(next);
        }
        for (const auto& [q, a] : partial) out.add_term(q, a);
    }
    return out;
}

Polynomial Polynomial::truncated_below(int min_degree) const {
    Polynomial out(n_);
    for (const auto& [p, c] : terms_)
        if (total_degree(p) >= min_degree) out.add_term(p, c);
    return out;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
    if (other.n_ != n_) throw InvalidArgument("Polynomial: dimension mismatch");
    Polynomial out(n_);
    for (const auto& [p, a] : terms_)
        for (const auto& [q, b] : other.terms_)
            out.add_term({p[0] + q[0], p[1] + q[1], p[2] + q[2]}, a * b);
    return out;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    if (other.n_ != n_) throw InvalidArgument("Polynomial: dimension mismatch");
    Polynomial out = *this;
    for (const auto& [q, b] : other.terms_) out.add_term(q, b);
    return out;
}

Polynomial Polynomial::scaled(double c) const {
    Polynomial out(n_);
    for (const auto& [p, a] : terms_) out.add_term(p, a * c);
    return out;
}

bool Polynomial::is_zero(double tol) const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [tol](const auto& t) { return std::abs(t.second) <= tol; });
}

// ------------------------------------------------------------ PotentialModel

PotentialModel PotentialModel::polynomial(Polynomial p) {
    const int n = p.dim();
    for (const auto& [pw, c] : p.terms()) {
        int axes = 0;
        for (int j = 0; j < n; ++j) axes += pw[j] > 0 ? 1 : 0;
        if (axes <= 1 && total_degree(pw) > 8)
            throw InvalidArgument("PotentialModel: per-axis degree above 8");
        if (axes > 1 && total_degree(pw) > 4)
            throw InvalidArgument("PotentialModel: cross term above total degree 4");
    }
    PotentialModel m;
    m.kind_ = Kind::polynomial;
    m.n_ = n;
    m.poly_ = std::move(p);
    return m;
}

PotentialModel PotentialModel::tabulated(std::vector<double> x, std::vector<double> v) {
    if (x.size() != v.size() || x.size() < 3)
        throw InvalidArgument("PotentialModel: tabulated potential needs >= 3 matching samples");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw InvalidArgument("PotentialModel: table abscissae must increase");

    // Natural cubic spline, tridiagonal solve for second derivatives.
    const std::size_t n = x.size();
    std::vector<double> m2(n, 0.0), u(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        const double p = sig * m2[i - 1] + 2.0;
        m2[i] = (sig - 1.0) / p;
        const double d = (v[i + 1] - v[i]) / (x[i + 1] - x[i]) - (v[i] - v[i - 1]) / (x[i] - x[i - 1]);
        u[i] = (6.0 * d / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
    }
    m2[n - 1] = 0.0;
    for (std::size_t k = n - 1; k-- > 0;) m2[k] = m2[k] * m2[k + 1] + u[k];

    PotentialModel m;
    m.kind_ = Kind::tabulated;
    m.n_ = 1;
    m.tx_ = std::move(x);
    m.tv_ = std::move(v);
    m.m2_ = std::move(m2);
    return m;
}

bool PotentialModel::is_quadratic() const { return is_polynomial() && poly_.degree() <= 2; }

const Polynomial& PotentialModel::poly() const {
    if (!is_polynomial()) throw Unsupported("PotentialModel: tabulated potential has no polynomial form");
    return poly_;
}

void PotentialModel::check_table_range(double x) const {
    if (!(x >= tx_.front() && x <= tx_.back()))
        throw DomainError("PotentialModel: point outside tabulated range");
}

int PotentialModel::locate(double x) const {
    auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
    int hi = static_cast<int>(it - tx_.begin());
    hi = std::clamp(hi, 1, static_cast<int>(tx_.size()) - 1);
    return hi - 1;
}

double PotentialModel::value_1d(double x) const {
    if (is_polynomial()) {
        Vec v(1);
        v(0) = x;
        return poly_(v);
    }
    check_table_range(x);
    const int k = locate(x);
    const double h = tx_[k + 1] - tx_[k];
    const double a = (tx_[k + 1] - x) / h, b = (x - tx_[k]) / h;
    return a * tv_[k] + b * tv_[k + 1] + ((a * a * a - a) * m2_[k] + (b * b * b - b) * m2_[k + 1]) * h * h / 6.0;
}

double PotentialModel::value(const Vec& xi) const {
    if (xi.size() != n_) throw InvalidArgument("PotentialModel: dimension mismatch");
    if (is_polynomial()) return poly_(xi);
    return value_1d(xi(0));
}

Vec PotentialModel::gradient(const Vec& xi) const {
    if (xi.size() != n_) throw InvalidArgument("PotentialModel: dimension mismatch");
    if (is_polynomial()) return poly_.gradient(xi);
    const double x = xi(0);
    check_table_range(x);
    const int k = locate(x);
    const double h = tx_[k + 1] - tx_[k];
    const double a = (tx_[k + 1] - x) / h, b = (x - tx_[k]) / h;
    Vec g(1);
    g(0) = (tv_[k + 1] - tv_[k]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m2_[k] +
           (3.0 * b * b - 1.0) / 6.0 * h * m2_[k + 1];
    return g;
}

Mat PotentialModel::hessian(const Vec& xi) const {
    if (xi.size() != n_) throw InvalidArgument("PotentialModel: dimension mismatch");
    if (is_polynomial()) return poly_.hessian(xi);
    const double x = xi(0);
    check_table_range(x);
    const int k = locate(x);
    const double h = tx_[k + 1] - tx_[k];
    const double a = (tx_[k + 1] - x) / h, b = (x - tx_[k]) / h;
    Mat m(1, 1);
    m(0, 0) = a * m2_[k] + b * m2_[k + 1];
    return m;
}

Vec PotentialModel::third_derivative(const Vec& xi) const {
    if (!is_polynomial())
        throw Unsupported("PotentialModel: third derivative not available for tabulated potentials");
    return poly_.third_derivative(xi);
}

double PotentialModel::taylor_remainder(const Vec& xi, const Vec& x) const {
    if (is_polynomial()) return remainder_polynomial(xi)(x);
    const Vec y = xi + x;
    const double lin = gradient(xi).dot(x);
    const double quad = 0.5 * x.dot(hessian(xi) * x);
    return value(y) - value(xi) - lin - quad;
}

Polynomial PotentialModel::remainder_polynomial(const Vec& xi) const {
    return poly().shifted(xi).truncated_below(3);
}

// ----------------------------------------------------------- HamiltonianSpec

HamiltonianSpec::HamiltonianSpec(double m, PotentialModel v)
    : mass(m), dimension(v.dim()), potential(std::move(v)) {
    validate();
}

HamiltonianSpec::HamiltonianSpec(double m, PotentialModel v, std::vector<PotentialModel> a)
    : mass(m), dimension(v.dim()), potential(std::move(v)), vector_potential(std::move(a)),
      classical_only(true) {
    validate();
}

void HamiltonianSpec::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidArgument("HamiltonianSpec: mass must be positive");
    if (dimension < 1 || dimension > 3) throw InvalidArgument("HamiltonianSpec: dimension must be 1, 2 or 3");
    if (potential.dim() != dimension) throw InvalidArgument("HamiltonianSpec: potential dimension mismatch");
    if (vector_potential) {
        if (!classical_only)
            throw InvalidArgument("HamiltonianSpec: vector potential requires the classical-only flag");
        if (static_cast<int>(vector_potential->size()) != dimension)
            throw InvalidArgument("HamiltonianSpec: vector potential needs one component per axis");
        for (const auto& c : *vector_potential)
            if (c.dim() != dimension) throw InvalidArgument("HamiltonianSpec: vector potential dimension mismatch");
    }
}

void HamiltonianSpec::require_quantum() const {
    if (classical_only || vector_potential)
        throw Unsupported("HamiltonianSpec: classical-only Hamiltonian used in a quantum computation");
}

namespace {

void check_alpha(const HamiltonianSpec& spec, const PhasePoint& alpha) {
    if (alpha.dim() != spec.dimension) throw InvalidArgument("phase point dimension mismatch");
    if (!alpha.finite()) throw DomainError("phase point has non-finite entries");
}

Vec kinetic_momentum(const HamiltonianSpec& spec, const PhasePoint& alpha) {
    Vec k = alpha.pi;
    if (spec.vector_potential)
        for (int i = 0; i < spec.dimension; ++i) k(i) -= (*spec.vector_potential)[i].value(alpha.xi);
    return k;
}

}  // namespace

double eval_h(const HamiltonianSpec& spec, const PhasePoint& alpha) {
    check_alpha(spec, alpha);
    const Vec k = kinetic_momentum(spec, alpha);
    return k.squaredNorm() / (2.0 * spec.mass) + spec.potential.value(alpha.xi);
}

Vec gradient_h(const HamiltonianSpec& spec, const PhasePoint& alpha) {
    check_alpha(spec, alpha);
    const int n = spec.dimension;
    const Vec k = kinetic_momentum(spec, alpha);
    Vec g(2 * n);
    g.head(n) = spec.potential.gradient(alpha.xi);
    g.tail(n) = k / spec.mass;
    if (spec.vector_potential)
        for (int i = 0; i < n; ++i)
            g.head(n) -= k(i) / spec.mass * (*spec.vector_potential)[i].gradient(alpha.xi);
    return g;
}

Mat hessian_h(const HamiltonianSpec& spec, const PhasePoint& alpha) {
    check_alpha(spec, alpha);
    const int n = spec.dimension;
    Mat h = Mat::Zero(2 * n, 2 * n);
    h.topLeftCorner(n, n) = spec.potential.hessian(alpha.xi);
    h.bottomRightCorner(n, n) = Mat::Identity(n, n) / spec.mass;
    if (spec.vector_potential) {
        const Vec k = kinetic_momentum(spec, alpha);
        Mat jac(n, n);  // jac(i, j) = d_j A_i
        for (int i = 0; i < n; ++i) jac.row(i) = (*spec.vector_potential)[i].gradient(alpha.xi).transpose();
        Mat xx = jac.transpose() * jac / spec.mass;
        for (int i = 0; i < n; ++i) xx -= k(i) / spec.mass * (*spec.vector_potential)[i].hessian(alpha.xi);
        h.topLeftCorner(n, n) += xx;
        // d^2 h / d xi_j d pi_k = -d_j A_k / m
        h.topRightCorner(n, n) = -jac.transpose() / spec.mass;
        h.bottomLeftCorner(n, n) = -jac / spec.mass;
    }
    return h;
}

double taylor_remainder_V(const HamiltonianSpec& spec, const Vec& xi_center, const Vec& x) {
    if (xi_center.size() != spec.dimension || x.size() != spec.dimension)
        throw InvalidArgument("taylor_remainder_V: dimension mismatch");
    return spec.potential.taylor_remainder(xi_center, x);
}

PhasePoint hamiltonian_field(const HamiltonianSpec& spec, const PhasePoint& alpha) {
    const Vec g = gradient_h(spec, alpha);
    const int n = spec.dimension;
    return {g.tail(n), -g.head(n)};
}

}  // namespace qcr
