#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trinmf/matrix.hpp"

namespace trinmf {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// PGM (P2 ascii / P5 binary, 8-bit). Pixels map to [0,1] on load.
// ---------------------------------------------------------------------------

namespace detail {

inline int pgm_next_token(std::istream& in) {
    // skip whitespace and '#' comment lines
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) throw IoError("pgm: malformed header");
    return value;
}

} // namespace detail

inline Matrix read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("pgm: cannot open " + path);
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P2" && magic != "P5") throw IoError("pgm: unsupported magic in " + path);
    const int w = detail::pgm_next_token(in);
    const int h = detail::pgm_next_token(in);
    const int maxval = detail::pgm_next_token(in);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw IoError("pgm: bad header in " + path);
    Matrix m(static_cast<std::size_t>(h), static_cast<std::size_t>(w), 0.0);
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!in) throw IoError("pgm: truncated data in " + path);
        for (std::size_t i = 0; i < buf.size(); ++i)
            m.data()[i] = static_cast<double>(buf[i]) / maxval;
    } else {
        for (std::size_t i = 0; i < m.size(); ++i) {
            int v = 0;
            if (!(in >> v)) throw IoError("pgm: truncated data in " + path);
            m.data()[i] = static_cast<double>(v) / maxval;
        }
    }
    return m;
}

/// Write as binary P5; values are clamped to [0,1] and scaled to 8 bits.
inline void write_pgm(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("pgm: cannot write " + path);
    out << "P5\n" << m.cols() << " " << m.rows() << "\n255\n";
    std::vector<unsigned char> buf(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        double v = std::min(1.0, std::max(0.0, m.data()[i]));
        buf[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("pgm: write failed for " + path);
}

// ---------------------------------------------------------------------------
// CSV: one row per line, comma-separated decimal literals, no header.
// ---------------------------------------------------------------------------

inline Matrix read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("csv: cannot open " + path);
    std::vector<double> entries;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                entries.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError("csv: bad number '" + cell + "' in " + path);
            }
            ++c;
        }
        if (rows == 0)
            cols = c;
        else if (c != cols)
            throw IoError("csv: ragged rows in " + path);
        ++rows;
    }
    if (rows == 0) throw IoError("csv: empty file " + path);
    return Matrix(rows, cols, std::move(entries));
}

inline void write_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw IoError("csv: cannot write " + path);
    out.precision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
    if (!out) throw IoError("csv: write failed for " + path);
}

/// Input dispatch by extension: .pgm via the image reader, anything else CSV.
inline Matrix read_matrix_auto(const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".pgm" || ext == ".PGM") return read_pgm(path);
    return read_csv(path);
}

} // namespace trinmf
