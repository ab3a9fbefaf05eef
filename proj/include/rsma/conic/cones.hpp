#pragma once

#include "rsma/conic/program.hpp"

namespace rsma::conic {

enum class ConeKind { Nonneg, Soc, Exp };

struct ConeBlock {
    ConeKind kind;
    int offset;  // first row in the stacked slack vector
    int dim;
};

inline double cone_nu(const ConeBlock& c) {
    switch (c.kind) {
        case ConeKind::Nonneg: return 1.0;
        case ConeKind::Soc: return 2.0;
        case ConeKind::Exp: return 3.0;
    }
    return 0.0;
}

// Exponential cone K = cl{(x,y,z): y>0, y*exp(x/y) <= z} with the standard
// 3-logarithmically-homogeneous barrier -log(y*log(z/y)-x) - log y - log z.

inline bool exp_primal_interior(const Eigen::Ref<const VecD>& s) {
    const double x = s[0], y = s[1], z = s[2];
    if (!(y > 0.0) || !(z > 0.0)) return false;
    return y * std::log(z / y) - x > 0.0;
}

inline bool exp_dual_interior(const Eigen::Ref<const VecD>& q) {
    const double u = q[0], v = q[1], w = q[2];
    if (!(u < 0.0) || !(w > 0.0)) return false;
    return v - u - u * std::log(w / (-u)) > 0.0;
}

inline bool cone_primal_interior(const ConeBlock& c, const Eigen::Ref<const VecD>& s) {
    switch (c.kind) {
        case ConeKind::Nonneg: return s[0] > 0.0;
        case ConeKind::Soc: return s[0] > (c.dim > 1 ? s.tail(c.dim - 1).norm() : 0.0);
        case ConeKind::Exp: return exp_primal_interior(s);
    }
    return false;
}

inline bool cone_dual_interior(const ConeBlock& c, const Eigen::Ref<const VecD>& z) {
    switch (c.kind) {
        case ConeKind::Nonneg: return z[0] > 0.0;
        case ConeKind::Soc: return z[0] > (c.dim > 1 ? z.tail(c.dim - 1).norm() : 0.0);
        case ConeKind::Exp: return exp_dual_interior(z);
    }
    return false;
}

inline void cone_init_point(const ConeBlock& c, Eigen::Ref<VecD> s) {
    switch (c.kind) {
        case ConeKind::Nonneg: s[0] = 1.0; break;
        case ConeKind::Soc:
            s.setZero();
            s[0] = 1.0;
            break;
        case ConeKind::Exp:
            s[0] = -1.0;
            s[1] = 1.0;
            s[2] = 3.0;
            break;
    }
}

/// Barrier gradient at an interior s.
inline void cone_grad(const ConeBlock& c, const Eigen::Ref<const VecD>& s, Eigen::Ref<VecD> g) {
    switch (c.kind) {
        case ConeKind::Nonneg: g[0] = -1.0 / s[0]; break;
        case ConeKind::Soc: {
            const double det = s[0] * s[0] - (c.dim > 1 ? s.tail(c.dim - 1).squaredNorm() : 0.0);
            g[0] = -2.0 * s[0] / det;
            if (c.dim > 1) g.tail(c.dim - 1) = (2.0 / det) * s.tail(c.dim - 1);
            break;
        }
        case ConeKind::Exp: {
            const double x = s[0], y = s[1], z = s[2];
            const double lzy = std::log(z / y);
            const double r = y * lzy - x;
            // grad r = (-1, lzy - 1, y/z)
            g[0] = 1.0 / r;
            g[1] = -(lzy - 1.0) / r - 1.0 / y;
            g[2] = -(y / z) / r - 1.0 / z;
            break;
        }
    }
}

/// Dense barrier Hessian at an interior s.
inline void cone_hess(const ConeBlock& c, const Eigen::Ref<const VecD>& s, Eigen::Ref<MatD> H) {
    switch (c.kind) {
        case ConeKind::Nonneg: H(0, 0) = 1.0 / (s[0] * s[0]); break;
        case ConeKind::Soc: {
            // F = -log(t^2 - ||u||^2); H = (4/det^2)(Js)(Js)' - (2/det)J, J = diag(1,-I).
            const int d = c.dim;
            const double det = s[0] * s[0] - (d > 1 ? s.tail(d - 1).squaredNorm() : 0.0);
            VecD js(d);
            js[0] = s[0];
            if (d > 1) js.tail(d - 1) = -s.tail(d - 1);
            H = (4.0 / (det * det)) * (js * js.transpose());
            H(0, 0) -= 2.0 / det;
            for (int i = 1; i < d; ++i) H(i, i) += 2.0 / det;
            break;
        }
        case ConeKind::Exp: {
            const double x = s[0], y = s[1], z = s[2];
            const double lzy = std::log(z / y);
            const double r = y * lzy - x;
            VecD gr(3);
            gr << -1.0, lzy - 1.0, y / z;
            MatD hr = MatD::Zero(3, 3);
            hr(1, 1) = -1.0 / y;
            hr(1, 2) = hr(2, 1) = 1.0 / z;
            hr(2, 2) = -y / (z * z);
            H = (gr * gr.transpose()) / (r * r) - hr / r;
            H(1, 1) += 1.0 / (y * y);
            H(2, 2) += 1.0 / (z * z);
            break;
        }
    }
}

}  // namespace rsma::conic
