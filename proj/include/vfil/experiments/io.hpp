#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vfil/domain/filaments.hpp"
#include "vfil/errors.hpp"
#include "vfil/experiments/config.hpp"

namespace vfil::experiments {

/// Comma-separated writer with shortest round-trip number formatting, so
/// equal inputs give byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : os_(path), path_(path) {
        if (!os_) throw FormatError("cannot open " + path + " for writing");
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << "\n";
    }

    template <class... Ts>
    void row(const Ts&... values) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(values), first = false), ...);
        os_ << "\n";
        os_.flush();
    }

    const std::string& path() const { return path_; }

private:
    static std::string cell(double v) {
        if (std::isnan(v)) return "nan";
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return fmt(v);
    }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(unsigned v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }

    std::ofstream os_;
    std::string path_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return int(i);
        throw FormatError("missing CSV column " + name);
    }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw FormatError(path + " is empty");
    {
        std::stringstream ss(line);
        std::string h;
        while (std::getline(ss, h, ',')) t.header.push_back(detail::trim(h));
    }
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            row.push_back(item == "nan" ? NAN : detail::parse_number(item, line_no));
        }
        if (row.size() != t.header.size()) throw FormatError(path + ": row width differs from header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Filament configurations at a sequence of (rescaled) times.
struct Trajectory {
    std::vector<double> t;
    std::vector<FilamentConfiguration> f;
};

inline const std::vector<std::string>& trajectory_header() {
    static const std::vector<std::string> h{"t", "j", "k", "z", "x", "y"};
    return h;
}

inline void write_trajectory_rows(CsvWriter& w, double t, const FilamentConfiguration& f) {
    for (int j = 0; j < f.n(); ++j)
        for (int k = 0; k < f.nz(); ++k) w.row(t, j, k, f.z_at(k), f(j, k).x, f(j, k).y);
}

/// Reads a t,j,k,z,x,y file; L is recovered from the z spacing.
inline Trajectory read_trajectory(const std::string& path) {
    const CsvTable tab = read_csv(path);
    const int ct = tab.column("t"), cj = tab.column("j"), ck = tab.column("k"), cz = tab.column("z"),
              cx = tab.column("x"), cy = tab.column("y");
    int n = 0, nz = 0;
    double dz = 0.0;
    for (const auto& r : tab.rows) {
        n = std::max(n, int(r[cj]) + 1);
        nz = std::max(nz, int(r[ck]) + 1);
        if (int(r[ck]) == 1) dz = r[cz];
    }
    if (n == 0 || nz < 2 || dz <= 0.0) throw FormatError(path + ": not a trajectory file");
    Trajectory out;
    std::map<double, std::size_t> index;
    for (const auto& r : tab.rows) {
        auto it = index.find(r[ct]);
        if (it == index.end()) {
            it = index.emplace(r[ct], out.t.size()).first;
            out.t.push_back(r[ct]);
            out.f.emplace_back(n, nz, dz * nz);
        }
        out.f[it->second](int(r[cj]), int(r[ck])) = {r[cx], r[cy]};
    }
    return out;
}

}  // namespace vfil::experiments
