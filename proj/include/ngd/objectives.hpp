#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "ngd/model_core.hpp"

namespace ngd {

/// Strictly increasing map g applied on top of the quadratic form.
class MonotoneTransform {
public:
    enum class Kind { identity, power, log1p, custom };

    static MonotoneTransform identity() { return MonotoneTransform(Kind::identity, 1.0, {}); }
    static MonotoneTransform power(double p);
    static MonotoneTransform log1p() { return MonotoneTransform(Kind::log1p, 0.0, {}); }
    /// `fn` must be strictly increasing on [0, inf); spot-checked on a grid.
    static MonotoneTransform custom(std::function<double(double)> fn, std::string name = "custom");

    /// Parses "identity", "log1p", "power:<p>".
    static MonotoneTransform parse(const std::string& text);

    double operator()(double q) const {
        switch (kind_) {
            case Kind::identity: return q;
            case Kind::power: return std::pow(q, exponent_);
            case Kind::log1p: return std::log1p(q);
            case Kind::custom: return fn_(q);
        }
        return q;
    }

    Kind kind() const { return kind_; }
    double exponent() const { return exponent_; }
    std::string name() const;

private:
    MonotoneTransform(Kind kind, double exponent, std::function<double(double)> fn)
        : kind_(kind), exponent_(exponent), fn_(std::move(fn)) {}

    Kind kind_;
    double exponent_;
    std::function<double(double)> fn_;
    std::string custom_name_;
};

/// Black-box objective as seen by the optimizers.
class Objective {
public:
    virtual ~Objective() = default;
    virtual Eigen::Index dim() const = 0;
    virtual double evaluate(const Vector& x) const = 0;
    /// One value per column of `X`.
    virtual Vector evaluate_columns(const Matrix& X) const;
};

/// f(x) = g(x^T A x).
class QuadraticComposite : public Objective {
public:
    explicit QuadraticComposite(Matrix A, MonotoneTransform g = MonotoneTransform::identity());

    const Matrix& A() const { return A_; }
    const MonotoneTransform& transform() const { return g_; }
    QuadraticComposite with_transform(MonotoneTransform g) const { return QuadraticComposite(A_, std::move(g)); }

    Eigen::Index dim() const override { return A_.rows(); }
    double evaluate(const Vector& x) const override;
    Vector evaluate_columns(const Matrix& X) const override;

    /// x^T A x, independent of the transform.
    double quadratic_form(const Vector& x) const;

private:
    Matrix A_;
    MonotoneTransform g_;
};

/// x -> base(B x + shift).
class AffineWrappedObjective : public Objective {
public:
    AffineWrappedObjective(QuadraticComposite base, Matrix B, Vector shift);

    const QuadraticComposite& base() const { return base_; }
    const Matrix& B() const { return B_; }
    const Vector& shift() const { return shift_; }

    /// B^T A B, the quadratic form seen in the wrapped coordinates when shift = 0.
    Matrix induced_form() const;

    Eigen::Index dim() const override { return B_.cols(); }
    double evaluate(const Vector& x) const override;
    Vector evaluate_columns(const Matrix& X) const override;

private:
    QuadraticComposite base_;
    Matrix B_;
    Vector shift_;
};

/// diag(10^{6 (i-1)/(d-1)}), i = 1..d.
QuadraticComposite build_ellipsoid(int d);

/// Same as obj.evaluate(x).
double evaluate(const Objective& obj, const Vector& x);

/// E[X^T A X] = m^T A m + Tr(A C) for X ~ N(m, C).
double expected_objective(const GaussianParams& params, const Matrix& A);

/// Invariant cost on a quadratic composite, proportionality constant dropped:
/// returns x^T A x regardless of the transform.
double exact_invariant_cost(const QuadraticComposite& obj, const Vector& x);

AffineWrappedObjective affine_wrap(const QuadraticComposite& obj, const Matrix& B, const Vector& shift);

}  // namespace ngd
