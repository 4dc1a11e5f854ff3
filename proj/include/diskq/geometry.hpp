#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "diskq/grassform.hpp"

namespace diskq {

using Complex = std::complex<double>;
inline constexpr double PI = std::numbers::pi;

// Components of the disk propagator
//   omega(z,w) = (1/2pi)[ d arg((z-w)(1 - z wbar)) - (x_z dy_z - y_z dx_z) ]
// with respect to (dx_z, dy_z, dx_w, dy_w). It vanishes when pulled back to
// |z| = 1 and satisfies d omega = -(1/pi) dx_z dy_z,
// iota_v omega = 1 - |z|^2 for the rotation generator v of S^1 = R/Z.
struct PropagatorComps {
    double dxz, dyz, dxw, dyw;
};

inline PropagatorComps propagator_disk(Complex z, Complex w) {
    if (z == w) throw std::invalid_argument("propagator_disk: coincident points");
    Complex A = 1.0 / (z - w) - std::conj(w) / (1.0 - z * std::conj(w));
    Complex B = -1.0 / (z - w);
    Complex C = -z / (1.0 - z * std::conj(w));
    const double c = 1.0 / (2.0 * PI);
    PropagatorComps out;
    out.dxz = c * (A.imag() + z.imag());
    out.dyz = c * (A.real() - z.real());
    out.dxw = c * (B + C).imag();
    out.dyw = c * (B - C).real();
    return out;
}

// Zero-mode form phi(z,u) = (1/pi) dx dy + u (1 - |z|^2); the dx dy part is
// (i/2pi) dz dzbar.
inline double zero_mode_scalar(Complex z) { return 1.0 - std::norm(z); }
inline constexpr double zero_mode_area_density = 1.0 / PI;

// Kontsevich half-plane propagator components
//   omega_K(x,y) = (1/2pi) d[arg(x-y) - arg(xbar-y)]
// with respect to (dxx, dyx, dxy, dyy).
inline PropagatorComps propagator_halfplane(Complex x, Complex y) {
    if (x == y) throw std::invalid_argument("propagator_halfplane: coincident points");
    if (x.imag() <= 0.0) throw std::invalid_argument("propagator_halfplane: Im x > 0 required");
    Complex z1 = x - y;
    Complex z2 = std::conj(x) - y;
    Complex A1 = 1.0 / z1, A2 = 1.0 / z2;
    const double c = 1.0 / (2.0 * PI);
    PropagatorComps out;
    out.dxz = c * (A1.imag() - A2.imag());
    out.dyz = c * (A1.real() + A2.real());
    out.dxw = c * (-A1.imag() + A2.imag());
    out.dyw = c * (-A1.real() + A2.real());
    return out;
}

// Generator layout on C^0_{n,m}(D): (dphi_1 .. dphi_{m-1}, dx_1, dy_1, ...,
// dx_n, dy_n) in the orientation order. Boundary point t_j = e^{i phi_j},
// phi_0 = 0 fixed.
struct DiskChart {
    int n;
    int m; // all boundary points including the base point
    int gen_count() const { return (m - 1) + 2 * n; }
    int gen_phi(int j) const { return j - 1; } // j >= 1
    int gen_x(int i) const { return (m - 1) + 2 * i; }
    int gen_y(int i) const { return (m - 1) + 2 * i + 1; }
    std::uint16_t volume_mask() const { return std::uint16_t((1u << gen_count()) - 1); }
};

struct DiskConfig {
    std::vector<Complex> z;      // interior points
    std::vector<double> phi;     // boundary angles phi_1..phi_{m-1}, increasing
    Complex boundary(int j) const {
        if (j == 0) return {1.0, 0.0};
        return std::polar(1.0, phi[j - 1]);
    }
};

// omega(z_i, target) pulled back to the chart.
inline GrassNum edge_form_disk(const DiskChart& ch, const DiskConfig& cfg, int i, bool to_interior,
                               int target_index) {
    Complex zi = cfg.z[i];
    GrassNum g;
    if (to_interior) {
        Complex zk = cfg.z[target_index];
        PropagatorComps p = propagator_disk(zi, zk);
        g.add(std::uint16_t(1u << ch.gen_x(i)), p.dxz);
        g.add(std::uint16_t(1u << ch.gen_y(i)), p.dyz);
        g.add(std::uint16_t(1u << ch.gen_x(target_index)), p.dxw);
        g.add(std::uint16_t(1u << ch.gen_y(target_index)), p.dyw);
    } else {
        int j = target_index;
        Complex t = cfg.boundary(j);
        PropagatorComps p = propagator_disk(zi, t);
        g.add(std::uint16_t(1u << ch.gen_x(i)), p.dxz);
        g.add(std::uint16_t(1u << ch.gen_y(i)), p.dyz);
        if (j >= 1) {
            // pullback along t = e^{i phi}
            double c = p.dxw * (-t.imag()) + p.dyw * t.real();
            g.add(std::uint16_t(1u << ch.gen_phi(j)), c);
        }
    }
    return g;
}

// phi(z_i, u)^r expanded in u: u^r B^r + r u^{r-1} B^{r-1} A, B = 1 - |z|^2,
// A = (1/pi) dx_i dy_i (A^2 = 0 kills everything else).
inline UGrass zero_mode_power(const DiskChart& ch, const DiskConfig& cfg, int i, int r) {
    UGrass out;
    if (r == 0) {
        out.coeff.push_back(GrassNum(1.0));
        return out;
    }
    double B = zero_mode_scalar(cfg.z[i]);
    out.coeff.resize(r + 1);
    GrassNum A;
    A.add(std::uint16_t((1u << ch.gen_x(i)) | (1u << ch.gen_y(i))), zero_mode_area_density);
    double Bp = 1.0;
    for (int j = 0; j < r - 1; ++j) Bp *= B;
    // u^{r-1} coefficient
    GrassNum a2form;
    for (const auto& t : A.terms) a2form.add(t.mask, t.coeff * r * Bp);
    out.coeff[r - 1] = a2form;
    out.coeff[r] = GrassNum(Bp * B);
    return out;
}

} // namespace diskq
