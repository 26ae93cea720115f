#include "ngd/objectives.hpp"

#include <cmath>
#include <string>

#include "ngd/errors.hpp"

namespace ngd {

namespace {

// Grid on which user-supplied transforms are checked for strict monotonicity.
void check_increasing(const std::function<double(double)>& fn, const std::string& name) {
    double prev = fn(0.0);
    for (int k = -12; k <= 12; ++k) {
        for (double mant : {1.0, 2.5, 5.0}) {
            const double q = mant * std::pow(10.0, k);
            const double v = fn(q);
            if (!(v > prev))
                throw InvalidInput("transform '" + name + "' is not strictly increasing near " + std::to_string(q));
            prev = v;
        }
    }
}

}  // namespace

MonotoneTransform MonotoneTransform::power(double p) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidInput("power transform needs a finite exponent > 0");
    return MonotoneTransform(Kind::power, p, {});
}

MonotoneTransform MonotoneTransform::custom(std::function<double(double)> fn, std::string name) {
    if (!fn) throw InvalidInput("custom transform: empty function");
    check_increasing(fn, name);
    MonotoneTransform t(Kind::custom, 0.0, std::move(fn));
    t.custom_name_ = std::move(name);
    return t;
}

MonotoneTransform MonotoneTransform::parse(const std::string& text) {
    if (text == "identity") return identity();
    if (text == "log1p") return log1p();
    if (text.rfind("power:", 0) == 0) {
        std::size_t pos = 0;
        double p = 0.0;
        try {
            p = std::stod(text.substr(6), &pos);
        } catch (const std::exception&) {
            throw InvalidInput("bad power exponent in '" + text + "'");
        }
        if (pos != text.size() - 6) throw InvalidInput("bad power exponent in '" + text + "'");
        return power(p);
    }
    throw InvalidInput("unknown transform '" + text + "' (expected identity, log1p or power:<p>)");
}

std::string MonotoneTransform::name() const {
    switch (kind_) {
        case Kind::identity: return "identity";
        case Kind::power: return "power:" + std::to_string(exponent_);
        case Kind::log1p: return "log1p";
        case Kind::custom: return custom_name_;
    }
    return "?";
}

Vector Objective::evaluate_columns(const Matrix& X) const {
    Vector out(X.cols());
    for (Eigen::Index i = 0; i < X.cols(); ++i) out[i] = evaluate(X.col(i));
    return out;
}

QuadraticComposite::QuadraticComposite(Matrix A, MonotoneTransform g) : A_(std::move(A)), g_(std::move(g)) {
    if (A_.rows() != A_.cols() || A_.rows() == 0) throw InvalidInput("QuadraticComposite: A must be square");
    if (!A_.allFinite()) throw InvalidInput("QuadraticComposite: non-finite entry in A");
    if (!is_symmetric(A_, 1e-12)) throw InvalidInput("QuadraticComposite: A is not symmetric");
    A_ = symmetrize(A_);
    if (min_eigenvalue(A_) <= 0.0) throw DomainError("QuadraticComposite: A is not positive definite");
}

double QuadraticComposite::quadratic_form(const Vector& x) const {
    if (x.size() != A_.rows()) throw InvalidInput("evaluate: dimension mismatch");
    return x.dot(A_ * x);
}

double QuadraticComposite::evaluate(const Vector& x) const { return g_(quadratic_form(x)); }

Vector QuadraticComposite::evaluate_columns(const Matrix& X) const {
    if (X.rows() != A_.rows()) throw InvalidInput("evaluate: dimension mismatch");
    Vector q = (X.array() * (A_ * X).array()).colwise().sum().transpose();
    if (g_.kind() != MonotoneTransform::Kind::identity)
        for (auto& v : q) v = g_(v);
    return q;
}

AffineWrappedObjective::AffineWrappedObjective(QuadraticComposite base, Matrix B, Vector shift)
    : base_(std::move(base)), B_(std::move(B)), shift_(std::move(shift)) {
    const auto d = base_.dim();
    if (B_.rows() != d || B_.cols() != d || shift_.size() != d)
        throw InvalidInput("affine_wrap: dimension mismatch");
    const double scale = std::max(1.0, std::pow(B_.cwiseAbs().maxCoeff(), static_cast<double>(d)));
    if (!(std::abs(B_.determinant()) > 1e-12 * scale)) throw DomainError("affine_wrap: B is singular");
}

Matrix AffineWrappedObjective::induced_form() const {
    return symmetrize(B_.transpose() * base_.A() * B_);
}

double AffineWrappedObjective::evaluate(const Vector& x) const {
    if (x.size() != B_.cols()) throw InvalidInput("evaluate: dimension mismatch");
    return base_.evaluate(B_ * x + shift_);
}

Vector AffineWrappedObjective::evaluate_columns(const Matrix& X) const {
    if (X.rows() != B_.cols()) throw InvalidInput("evaluate: dimension mismatch");
    return base_.evaluate_columns((B_ * X).colwise() + shift_);
}

QuadraticComposite build_ellipsoid(int d) {
    if (d < 2) throw InvalidInput("build_ellipsoid: d must be >= 2");
    Vector diag(d);
    for (int i = 0; i < d; ++i) diag[i] = std::pow(10.0, 6.0 * i / (d - 1));
    return QuadraticComposite(diag.asDiagonal().toDenseMatrix());
}

double evaluate(const Objective& obj, const Vector& x) { return obj.evaluate(x); }

double expected_objective(const GaussianParams& params, const Matrix& A) {
    const auto d = params.dim();
    if (A.rows() != d || A.cols() != d || params.covariance.rows() != d || params.covariance.cols() != d)
        throw InvalidInput("expected_objective: dimension mismatch");
    return params.mean.dot(A * params.mean) + (A.cwiseProduct(params.covariance.transpose())).sum();
}

double exact_invariant_cost(const QuadraticComposite& obj, const Vector& x) { return obj.quadratic_form(x); }

AffineWrappedObjective affine_wrap(const QuadraticComposite& obj, const Matrix& B, const Vector& shift) {
    return AffineWrappedObjective(obj, B, shift);
}

}  // namespace ngd
