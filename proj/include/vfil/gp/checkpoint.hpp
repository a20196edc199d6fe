#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "vfil/gp/field.hpp"

namespace vfil::gp {

// "GPF1" | u32 nx ny nz | f64 dx dy dz L eps t_phys | u8 shape | f64 shape_param
// | nx*ny*nz (f64 re, f64 im), x fastest. Little-endian throughout.
namespace detail {

template <class T>
void put_le(std::vector<unsigned char>& out, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    out.insert(out.end(), b, b + sizeof(T));
}

template <class T>
T get_le(const std::vector<unsigned char>& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw FormatError("checkpoint truncated");
    unsigned char b[sizeof(T)];
    std::memcpy(b, in.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    pos += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const GpField& f) {
    std::vector<unsigned char> out{'G', 'P', 'F', '1'};
    const auto& g = f.geom;
    detail::put_le<std::uint32_t>(out, g.nx);
    detail::put_le<std::uint32_t>(out, g.ny);
    detail::put_le<std::uint32_t>(out, g.nz);
    for (double v : {g.dx(), g.dy(), g.dz(), g.L, f.epsilon, f.t_phys}) detail::put_le<double>(out, v);
    detail::put_le<std::uint8_t>(out, g.is_disk() ? 1 : 0);
    detail::put_le<double>(out, g.is_disk() ? g.radius : g.half_x);
    out.reserve(out.size() + 16 * f.u.size());
    for (const Complex& c : f.u) {
        detail::put_le<double>(out, c.real());
        detail::put_le<double>(out, c.imag());
    }
    return out;
}

inline GpField decode_checkpoint(const std::vector<unsigned char>& in) {
    if (in.size() < 4 || in[0] != 'G' || in[1] != 'P' || in[2] != 'F') throw FormatError("not a GPF checkpoint");
    if (in[3] != '1') throw VersionMismatch(std::string("unsupported checkpoint version ") + char(in[3]));
    std::size_t pos = 4;
    const auto nx = detail::get_le<std::uint32_t>(in, pos);
    const auto ny = detail::get_le<std::uint32_t>(in, pos);
    const auto nz = detail::get_le<std::uint32_t>(in, pos);
    const double dx = detail::get_le<double>(in, pos), dy = detail::get_le<double>(in, pos);
    const double dz = detail::get_le<double>(in, pos), L = detail::get_le<double>(in, pos);
    const double eps = detail::get_le<double>(in, pos), t = detail::get_le<double>(in, pos);
    const auto shape = detail::get_le<std::uint8_t>(in, pos);
    const double param = detail::get_le<double>(in, pos);
    if (shape != 0) throw FormatError("checkpoint shape tag is not a rectangle");
    if (nx < 8 || ny < 8 || nz < 8 || nx > 1u << 14 || ny > 1u << 14 || nz > 1u << 14)
        throw FormatError("checkpoint grid counts out of range");
    const std::size_t count = std::size_t(nx) * ny * nz;
    if (in.size() - pos != 16 * count) throw FormatError("checkpoint sample count does not match the header grid");
    const double half_x = 0.5 * dx * nx;
    // half_y is not stored; pick the double that reproduces dy exactly
    double half_y = 0.5 * dy * ny;
    for (int s = 0; s < 4 && 2.0 * half_y / ny != dy; ++s)
        half_y = std::nextafter(half_y, 2.0 * half_y / ny < dy ? INFINITY : 0.0);
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
    if (!close(half_x, param) || !close(dz * nz, L)) throw FormatError("checkpoint spacings inconsistent with the header");
    GpField f(DomainGeometry::rectangle(param, half_y, L, int(nx), int(ny), int(nz)), eps);
    f.t_phys = t;
    for (auto& c : f.u) {
        const double re = detail::get_le<double>(in, pos);
        const double im = detail::get_le<double>(in, pos);
        c = {re, im};
    }
    return f;
}

inline void checkpoint_save(const GpField& f, const std::string& path) {
    const auto bytes = encode_checkpoint(f);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!os) throw FormatError("write failed for " + path);
}

inline GpField checkpoint_load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace vfil::gp
