#pragma once

#include <cmath>

#include "rsma/common.hpp"

namespace rsma {

/// Upper-tail probability of the standard normal.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Standard normal quantile (inverse CDF), Wichura's AS241 PPND16 rational
/// approximations, polished with one Newton step on erfc. Relative accuracy
/// well below 1e-10 over (0,1).
inline double standard_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("standard_normal_quantile: p outside (0,1)");
    static constexpr double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e2,
                                    1.9715909503065514427e3, 1.3731693765509461125e4,
                                    4.5921953931549871457e4, 6.7265770927008700853e4,
                                    3.3430575583588128105e4, 2.5090809287301226727e3};
    static constexpr double b[8] = {1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
                                    5.3941960214247511077e3, 2.1213794301586595867e4,
                                    3.9307895800092710610e4, 2.8729085735721942674e4,
                                    5.2264952788528545610e3};
    static constexpr double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                    5.76949722146069140550e0, 3.64784832476320460504e0,
                                    1.27045825245236838258e0, 2.41780725177450611770e-1,
                                    2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[8] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
                                    6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                    1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                    1.05075007164441684324e-9};
    static constexpr double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                    1.78482653991729133580e0, 2.96560571828504891230e-1,
                                    2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                    2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[8] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                    1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                    1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                    2.04426310338993978564e-15};
    auto poly = [](const double* k, double r) {
        return ((((((k[7] * r + k[6]) * r + k[5]) * r + k[4]) * r + k[3]) * r + k[2]) * r + k[1]) * r + k[0];
    };
    const double q = p - 0.5;
    double x;
    if (std::abs(q) <= 0.425) {
        double r = 0.180625 - q * q;
        x = q * poly(a, r) / poly(b, r);
    } else {
        double r = q < 0 ? p : 1.0 - p;
        r = std::sqrt(-std::log(r));
        if (r <= 5.0) {
            r -= 1.6;
            x = poly(c, r) / poly(d, r);
        } else {
            r -= 5.0;
            x = poly(e, r) / poly(f, r);
        }
        if (q < 0) x = -x;
    }
    if (x != 0.0) {
        // Newton step on Phi(x) = p using the stable tail form.
        double cdf_err = q_function(-x) - p;
        double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        if (pdf > 0) x -= cdf_err / pdf;
    }
    return x;
}

/// B = Q^{-1}(epsilon) * log2(e), the FBL penalty coefficient below Eq. (5b)-style
/// normal-approximation rate expressions.
inline double fbl_penalty_coefficient(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("fbl_penalty_coefficient: epsilon outside (0,1)");
    const double qinv = -standard_normal_quantile(epsilon);
    return qinv * std::log2(std::exp(1.0));
}

/// Channel dispersion V(gamma) = 1 - (1+gamma)^-2.
inline double dispersion(double gamma) {
    const double s = 1.0 + gamma;
    return 1.0 - 1.0 / (s * s);
}

inline double sqrt_dispersion(double gamma) { return std::sqrt(std::max(0.0, dispersion(gamma))); }

/// d sqrt(V)/d gamma = (1+g)^-3 * V^{-1/2}. Diverges at gamma = 0.
inline double sqrt_dispersion_slope(double gamma) {
    const double s = 1.0 + gamma;
    return 1.0 / (s * s * s * sqrt_dispersion(gamma));
}

/// Blocklength/error-probability pair with the cached penalty coefficient.
struct FblParams {
    int N = 500;
    double epsilon = 1e-5;
    double B = 0.0;

    static FblParams make(int blocklength, double epsilon) {
        FblParams p;
        p.N = blocklength;
        p.epsilon = epsilon;
        p.B = fbl_penalty_coefficient(epsilon);
        return p;
    }
    /// B / sqrt(N), the per-stream dispersion multiplier.
    double penalty_scale() const { return B / std::sqrt(static_cast<double>(N)); }
};

/// Normal-approximation rate of one stream, clamped at zero from below.
inline double stream_rate(double gamma, const FblParams& fbl) {
    if (!(gamma > 0.0)) return 0.0;
    const double r = std::log2(1.0 + gamma) - fbl.penalty_scale() * sqrt_dispersion(gamma);
    return std::max(0.0, r);
}

/// Rate of one symbol vector: sum over streams of the clamped per-stream rate.
inline double symbol_vector_rate(const std::vector<double>& gammas, const FblParams& fbl) {
    double r = 0.0;
    for (double g : gammas) r += stream_rate(g, fbl);
    return r;
}

}  // namespace rsma
