#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "ngd/model_core.hpp"

namespace ngd {

/// Seeded standard-normal stream.
///
/// Uniform bits come from std::mt19937_64, whose output sequence is fixed by
/// the C++ standard. Normals use Box-Muller on 53-bit uniforms:
///   u1 = ((b1 >> 11) + 1) * 2^-53  in (0, 1]
///   u2 =  (b2 >> 11)      * 2^-53  in [0, 1)
///   z  = sqrt(-2 ln u1) * (cos(2 pi u2), sin(2 pi u2))
/// Both variates of a pair are used, cosine first. std::normal_distribution is
/// avoided because its algorithm is implementation-defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draws() const { return draws_; }

    double uniform() {
        ++draws_;
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        draws_ += 2;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    /// d x n matrix of standard normals, filled column by column.
    Matrix normal_matrix(Eigen::Index d, Eigen::Index n) {
        Matrix z(d, n);
        double* p = z.data();
        for (Eigen::Index k = 0; k < d * n; ++k) p[k] = normal();
        return z;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::uint64_t draws_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ngd
