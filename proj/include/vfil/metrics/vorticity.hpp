#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "vfil/gp/field.hpp"
#include "vfil/vec2.hpp"

namespace vfil::metrics {

using gp::Complex;
using gp::GpField;

/// Horizontal momentum j = Im(conj(u) grad_x u) on one slice, centred
/// differences with mirrored (Neumann) ghost cells. Index i + nx j.
inline std::vector<Vec2> momentum_slice(const GpField& f, int k) {
    const int nx = f.nx(), ny = f.ny();
    const double ix = 0.5 / f.geom.dx(), iy = 0.5 / f.geom.dy();
    const Complex* s = f.slice(k);
    auto at = [&](int i, int j) {
        i = std::clamp(i, 0, nx - 1);
        j = std::clamp(j, 0, ny - 1);
        return s[i + std::size_t(nx) * j];
    };
    std::vector<Vec2> out(f.slice_size());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Complex c = std::conj(at(i, j));
            out[i + std::size_t(nx) * j] = {(c * (at(i + 1, j) - at(i - 1, j))).imag() * ix,
                                            (c * (at(i, j + 1) - at(i, j - 1))).imag() * iy};
        }
    return out;
}

/// j on every slice, same layout as the field.
inline std::vector<Vec2> momentum_j(const GpField& f) {
    std::vector<Vec2> out;
    out.reserve(f.u.size());
    for (int k = 0; k < f.nz(); ++k) {
        const auto s = momentum_slice(f, k);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

/// Scalar field on the (nx-1) x (ny-1) plaquettes between cell centres.
struct PlaquetteField {
    int px = 0, py = 0;
    double dx = 1.0, dy = 1.0;
    double x0 = 0.0, y0 = 0.0;  // centre of plaquette (0, 0)
    std::vector<double> value;

    std::size_t index(int p, int q) const { return std::size_t(p) + std::size_t(px) * q; }
    double operator()(int p, int q) const { return value[index(p, q)]; }
    Vec2 centre(int p, int q) const { return {x0 + p * dx, y0 + q * dy}; }
    double area() const { return dx * dy; }
    double total() const {
        double s = 0.0;
        for (double v : value) s += v;
        return s * area();
    }
};

inline PlaquetteField empty_plaquettes(const GpField& f) {
    PlaquetteField J;
    J.px = f.nx() - 1;
    J.py = f.ny() - 1;
    J.dx = f.geom.dx();
    J.dy = f.geom.dy();
    J.x0 = f.geom.x_at(0) + 0.5 * J.dx;
    J.y0 = f.geom.y_at(0) + 0.5 * J.dy;
    J.value.assign(std::size_t(J.px) * J.py, 0.0);
    return J;
}

/// Circulation of j along the straight edge between two cell centres,
/// trapezoidal in the edge direction.
inline double edge_circulation(Vec2 ja, Vec2 jb, Vec2 step) { return 0.5 * dot(ja + jb, step); }

/// J = (1/2) curl j per plaquette: half the counter-clockwise circulation of j
/// around the plaquette divided by its area. Sums over plaquette rectangles
/// telescope to half the boundary circulation.
inline PlaquetteField jacobian_J(const GpField& f, int k) {
    const auto j = momentum_slice(f, k);
    PlaquetteField J = empty_plaquettes(f);
    const int nx = f.nx();
    const Vec2 ex{J.dx, 0.0}, ey{0.0, J.dy};
    auto at = [&](int i, int jj) { return j[i + std::size_t(nx) * jj]; };
    for (int q = 0; q < J.py; ++q)
        for (int p = 0; p < J.px; ++p) {
            const double circ = edge_circulation(at(p, q), at(p + 1, q), ex) +
                                edge_circulation(at(p + 1, q), at(p + 1, q + 1), ey) -
                                edge_circulation(at(p, q + 1), at(p + 1, q + 1), ex) -
                                edge_circulation(at(p, q), at(p, q + 1), ey);
            J.value[J.index(p, q)] = 0.5 * circ / J.area();
        }
    return J;
}

/// Half the counter-clockwise circulation of j around the plaquette
/// rectangle [p0, p1) x [q0, q1), using the same edge rule as jacobian_J.
inline double half_boundary_circulation(const GpField& f, int k, int p0, int p1, int q0, int q1) {
    const auto j = momentum_slice(f, k);
    const int nx = f.nx();
    const Vec2 ex{f.geom.dx(), 0.0}, ey{0.0, f.geom.dy()};
    auto at = [&](int i, int jj) { return j[i + std::size_t(nx) * jj]; };
    double c = 0.0;
    for (int p = p0; p < p1; ++p) c += edge_circulation(at(p, q0), at(p + 1, q0), ex);
    for (int q = q0; q < q1; ++q) c += edge_circulation(at(p1, q), at(p1, q + 1), ey);
    for (int p = p0; p < p1; ++p) c -= edge_circulation(at(p, q1), at(p + 1, q1), ex);
    for (int q = q0; q < q1; ++q) c -= edge_circulation(at(p0, q), at(p0, q + 1), ey);
    return 0.5 * c;
}

/// Mass of J over the plaquettes whose centres lie within radius r of c.
inline double jacobian_mass_in_disk(const PlaquetteField& J, Vec2 c, double r) {
    double s = 0.0;
    for (int q = 0; q < J.py; ++q)
        for (int p = 0; p < J.px; ++p)
            if (norm(J.centre(p, q) - c) <= r) s += J(p, q);
    return s * J.area();
}

struct Vortex {
    Vec2 centre;
    int charge = 0;
};

struct SliceVortexSet {
    double z = 0.0;
    std::vector<Vortex> vortices;

    int total_charge() const {
        int s = 0;
        for (const auto& v : vortices) s += v.charge;
        return s;
    }
    std::vector<Vec2> centres() const {
        std::vector<Vec2> c;
        for (const auto& v : vortices) c.push_back(v.centre);
        return c;
    }
};

/// Integer phase winding around every plaquette (counter-clockwise).
inline std::vector<int> plaquette_winding(const GpField& f, int k) {
    const int nx = f.nx(), ny = f.ny();
    const Complex* s = f.slice(k);
    std::vector<int> w(std::size_t(nx - 1) * (ny - 1));
    auto at = [&](int i, int j) { return s[i + std::size_t(nx) * j]; };
    for (int q = 0; q + 1 < ny; ++q)
        for (int p = 0; p + 1 < nx; ++p) {
            const Complex c[4] = {at(p, q), at(p + 1, q), at(p + 1, q + 1), at(p, q + 1)};
            double sum = 0.0;
            for (int e = 0; e < 4; ++e) sum += std::arg(c[(e + 1) % 4] * std::conj(c[e]));
            w[p + std::size_t(nx - 1) * q] = int(std::lround(sum / (2.0 * std::numbers::pi)));
        }
    return w;
}

/// Charged plaquettes grouped by 8-connectivity; each cluster with nonzero net
/// winding becomes a vortex. Its centre is found by mean shift on |J| with an
/// Epanechnikov kernel of radius `window` plaquettes (2.5 gives the 5 x 5
/// neighbourhood), started from the cluster centroid.
inline SliceVortexSet detect_vortices(const GpField& f, int k, double window = 2.5) {
    SliceVortexSet out;
    out.z = f.geom.z_at(k);
    const auto w = plaquette_winding(f, k);
    const int px = f.nx() - 1, py = f.ny() - 1;
    std::vector<int> label(w.size(), -1);
    std::vector<std::vector<int>> clusters;
    for (int start = 0; start < int(w.size()); ++start) {
        if (w[start] == 0 || label[start] >= 0) continue;
        std::vector<int> members{start}, stack{start};
        label[start] = int(clusters.size());
        while (!stack.empty()) {
            const int c = stack.back();
            stack.pop_back();
            const int cp = c % px, cq = c / px;
            for (int dq = -1; dq <= 1; ++dq)
                for (int dp = -1; dp <= 1; ++dp) {
                    const int p = cp + dp, q = cq + dq;
                    if (p < 0 || q < 0 || p >= px || q >= py) continue;
                    const int id = p + px * q;
                    if (w[id] != 0 && label[id] < 0) {
                        label[id] = label[start];
                        members.push_back(id);
                        stack.push_back(id);
                    }
                }
        }
        clusters.push_back(std::move(members));
    }
    if (clusters.empty()) return out;

    const PlaquetteField J = jacobian_J(f, k);
    const double hx = J.dx, hy = J.dy, radius = window * std::max(hx, hy);
    for (const auto& members : clusters) {
        int charge = 0;
        Vec2 c;
        for (int id : members) {
            charge += w[id];
            c += J.centre(id % px, id / px);
        }
        if (charge == 0) continue;
        c = c / double(members.size());
        for (int it = 0; it < 50; ++it) {
            const int p0 = std::max(0, int(std::floor((c.x - radius - J.x0) / hx)));
            const int p1 = std::min(px - 1, int(std::ceil((c.x + radius - J.x0) / hx)));
            const int q0 = std::max(0, int(std::floor((c.y - radius - J.y0) / hy)));
            const int q1 = std::min(py - 1, int(std::ceil((c.y + radius - J.y0) / hy)));
            Vec2 acc;
            double wsum = 0.0;
            for (int q = q0; q <= q1; ++q)
                for (int p = p0; p <= p1; ++p) {
                    const Vec2 x = J.centre(p, q);
                    const double r2 = norm2(x - c) / (radius * radius);
                    if (r2 >= 1.0) continue;
                    const double wt = std::abs(J(p, q)) * (1.0 - r2);
                    acc += wt * x;
                    wsum += wt;
                }
            if (wsum <= 0.0) break;
            const Vec2 next = acc / wsum;
            const double moved = norm(next - c);
            c = next;
            if (moved < 1e-9 * hx) break;
        }
        out.vortices.push_back({c, charge});
    }
    return out;
}

}  // namespace vfil::metrics
