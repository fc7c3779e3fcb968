#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "trinmf/image_io.hpp"
#include "trinmf/matrix.hpp"
#include "trinmf/quantize.hpp"
#include "trinmf/trifactor.hpp"

namespace trinmf {

// Sparse text archive of a truncated tri-factorization. Only the kept sigma
// triples and the U/V columns they reference are stored, all values on the
// quantization lattice:
//
//   TRIFACT M N p p_tilde quant_step
//   U <count> <M>
//   i q_1 ... q_M         (one line per referenced U column, q integer level)
//   SIGMA <p_tilde>
//   i j q                 (one line per kept triple)
//   V <count> <N>
//   j q_1 ... q_N

inline void write_trifact_archive(const std::string& path, const TruncatedTriFactor& ttf,
                                  double quant_step) {
    std::ofstream out(path);
    if (!out) throw IoError("archive: cannot write " + path);
    const std::size_t m = ttf.base.U.rows(), n = ttf.base.V.rows();
    out << "TRIFACT " << m << " " << n << " " << ttf.base.rank_p << " " << ttf.kept.size()
        << " ";
    out.precision(17);
    out << quant_step << "\n";
    std::set<std::size_t> u_cols, v_cols;
    for (const auto& e : ttf.kept) {
        u_cols.insert(e.i);
        v_cols.insert(e.j);
    }
    out << "U " << u_cols.size() << " " << m << "\n";
    for (std::size_t c : u_cols) {
        out << c;
        for (std::size_t i = 0; i < m; ++i)
            out << " " << quantize_value(ttf.base.U(i, c), quant_step);
        out << "\n";
    }
    out << "SIGMA " << ttf.kept.size() << "\n";
    for (const auto& e : ttf.kept)
        out << e.i << " " << e.j << " " << quantize_value(e.sigma, quant_step) << "\n";
    out << "V " << v_cols.size() << " " << n << "\n";
    for (std::size_t c : v_cols) {
        out << c;
        for (std::size_t i = 0; i < n; ++i)
            out << " " << quantize_value(ttf.base.V(i, c), quant_step);
        out << "\n";
    }
    if (!out) throw IoError("archive: write failed for " + path);
}

/// Rebuild the truncated factorization from an archive; unreferenced U/V
/// columns come back as zero.
inline TruncatedTriFactor read_trifact_archive(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("archive: cannot open " + path);
    std::string tag;
    std::size_t m = 0, n = 0, p = 0, p_tilde = 0;
    double step = 0.0;
    in >> tag >> m >> n >> p >> p_tilde >> step;
    if (tag != "TRIFACT" || !in || p == 0 || step <= 0.0)
        throw IoError("archive: bad header in " + path);
    TruncatedTriFactor ttf;
    ttf.base.rank_p = p;
    ttf.base.U = Matrix(m, p, 0.0);
    ttf.base.V = Matrix(n, p, 0.0);
    ttf.base.Sigma = Matrix(p, p, 0.0);

    auto read_columns = [&](const char* name, Matrix& target, std::size_t rows) {
        std::size_t count = 0, len = 0;
        in >> tag >> count >> len;
        if (tag != name || len != rows)
            throw IoError("archive: bad " + std::string(name) + " section in " + path);
        for (std::size_t r = 0; r < count; ++r) {
            std::size_t c = 0;
            in >> c;
            if (!in || c >= p)
                throw IoError("archive: bad " + std::string(name) + " record in " + path);
            for (std::size_t i = 0; i < rows; ++i) {
                long long q = 0;
                in >> q;
                target(i, c) = static_cast<double>(q) * step;
            }
        }
    };

    read_columns("U", ttf.base.U, m);
    std::size_t count = 0;
    in >> tag >> count;
    if (tag != "SIGMA" || count != p_tilde)
        throw IoError("archive: bad SIGMA section in " + path);
    for (std::size_t l = 0; l < count; ++l) {
        std::size_t i = 0, j = 0;
        long long q = 0;
        in >> i >> j >> q;
        if (!in || i >= p || j >= p) throw IoError("archive: bad sigma triple in " + path);
        const double val = static_cast<double>(q) * step;
        ttf.kept.push_back({i, j, val});
        ttf.base.Sigma(i, j) = val;
    }
    read_columns("V", ttf.base.V, n);
    if (!in) throw IoError("archive: truncated file " + path);
    return ttf;
}

/// Dense SVD factor archive, same counting conventions as the tri-factor one:
///
///   SVDFACT M N k quant_step
///   S q_1 ... q_k
///   U <k> <M>   followed by one line per column
///   V <k> <N>   followed by one line per column
inline void write_svd_archive(const std::string& path, const Matrix& u,
                              const std::vector<double>& s, const Matrix& v,
                              double quant_step) {
    std::ofstream out(path);
    if (!out) throw IoError("archive: cannot write " + path);
    out << "SVDFACT " << u.rows() << " " << v.rows() << " " << s.size() << " ";
    out.precision(17);
    out << quant_step << "\n";
    out << "S";
    for (double sv : s) out << " " << quantize_value(sv, quant_step);
    out << "\n";
    auto dump = [&](const char* name, const Matrix& f) {
        out << name << " " << f.cols() << " " << f.rows() << "\n";
        for (std::size_t c = 0; c < f.cols(); ++c) {
            out << c;
            for (std::size_t i = 0; i < f.rows(); ++i)
                out << " " << quantize_value(f(i, c), quant_step);
            out << "\n";
        }
    };
    dump("U", u);
    dump("V", v);
    if (!out) throw IoError("archive: write failed for " + path);
}

} // namespace trinmf
