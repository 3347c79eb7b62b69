#pragma once

// Deterministic serialization: %.17g text formats, an FNV-1a checksum for
// spectra, CSV/JSON emitters, and a small binary matrix cache.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "npspec/errors.hpp"
#include "npspec/green.hpp"
#include "npspec/resonance.hpp"
#include "npspec/symmetrization.hpp"

namespace npspec {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        case '\n':
            out += "\\n";
            break;
        case '\t':
            out += "\\t";
            break;
        default:
            if (static_cast<unsigned char>(ch) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                out += buf;
            } else {
                out += ch;
            }
        }
    }
    return out;
}

inline std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Checksum of a matrix via the %.17g rendering of its entries, column-major.
inline std::string matrix_checksum(const Eigen::MatrixXd& m) {
    std::string acc;
    acc.reserve(static_cast<std::size_t>(m.size()) * 24);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            acc += format_g17(m(i, j));
            acc += '\n';
        }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(acc)));
    return buf;
}

inline std::string json_number_array(const Eigen::VectorXd& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i)
            out += ", ";
        out += format_g17(v[i]);
    }
    out += "]";
    return out;
}

inline std::string json_number_array(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ", ";
        out += format_g17(v[i]);
    }
    out += "]";
    return out;
}

inline std::string spectrum_json(const std::string& shape, const std::string& engine, int n_nodes,
                                 const Eigen::VectorXd& eigenvalues,
                                 const std::string& traces_checksum) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"shape\": \"" << json_escape(shape) << "\",\n";
    os << "  \"engine\": \"" << json_escape(engine) << "\",\n";
    os << "  \"n\": " << n_nodes << ",\n";
    os << "  \"keep\": " << eigenvalues.size() << ",\n";
    os << "  \"eigenvalues\": " << json_number_array(eigenvalues);
    if (!traces_checksum.empty())
        os << ",\n  \"traces_checksum\": \"" << traces_checksum << "\"";
    os << "\n}\n";
    return os.str();
}

inline std::string spectrum_csv(const Eigen::VectorXd& eigenvalues) {
    std::string out = "j,lambda\n";
    for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
        out += std::to_string(j + 1);
        out += ',';
        out += format_g17(eigenvalues[j]);
        out += '\n';
    }
    return out;
}

inline std::string sweep_csv(const SweepResult& sweep) {
    std::string out = "delta,lambda_re,lambda_im,grad_norm_sq,full_grad_norm_sq,energy";
    for (int k = 1; k <= sweep.n_ext; ++k) {
        out += ",ext_sample_";
        out += std::to_string(k);
    }
    out += '\n';
    for (const auto& row : sweep.rows) {
        out += format_g17(row.delta);
        out += ',';
        out += format_g17(row.lambda.real());
        out += ',';
        out += format_g17(row.lambda.imag());
        out += ',';
        out += format_g17(row.grad_norm_sq);
        out += ',';
        out += format_g17(row.full_grad_norm_sq);
        out += ',';
        out += format_g17(row.energy);
        for (double v : row.ext) {
            out += ',';
            out += format_g17(v);
        }
        out += '\n';
    }
    return out;
}

inline std::string fit_json(const ScalingFit& fit, const std::string& column,
                            bool with_log_correction) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"column\": \"" << json_escape(column) << "\",\n";
    os << "  \"with_log_correction\": " << (with_log_correction ? "true" : "false") << ",\n";
    os << "  \"p\": " << format_g17(fit.p) << ",\n";
    os << "  \"q\": " << format_g17(fit.q) << ",\n";
    os << "  \"intercept\": " << format_g17(fit.intercept) << ",\n";
    os << "  \"residual_rms\": " << format_g17(fit.residual_rms) << ",\n";
    os << "  \"rows_used\": " << fit.rows_used << "\n";
    os << "}\n";
    return os.str();
}

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

inline std::string validate_report_json(const std::vector<CheckResult>& checks) {
    bool all = true;
    for (const auto& c : checks)
        all = all && c.passed;
    std::ostringstream os;
    os << "{\n  \"passed\": " << (all ? "true" : "false") << ",\n  \"checks\": [\n";
    for (std::size_t i = 0; i < checks.size(); ++i) {
        os << "    {\"name\": \"" << json_escape(checks[i].name) << "\", \"passed\": "
           << (checks[i].passed ? "true" : "false");
        if (!checks[i].detail.empty())
            os << ", \"detail\": \"" << json_escape(checks[i].detail) << "\"";
        os << "}" << (i + 1 < checks.size() ? "," : "") << "\n";
    }
    os << "  ]\n}\n";
    return os.str();
}

inline std::string expansion_report_json(const ExpansionReport& rep) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"n_used\": " << rep.n_used << ",\n";
    os << "  \"constant_term\": " << format_g17(rep.constant_term) << ",\n";
    os << "  \"max_abs_error\": " << format_g17(rep.max_abs_error) << ",\n";
    os << "  \"mode_coeff\": " << json_number_array(rep.mode_coeff) << ",\n";
    os << "  \"probe_errors\": " << json_number_array(rep.probe_errors) << "\n";
    os << "}\n";
    return os.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open for writing: " + path);
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os)
        throw IoError("short write: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open for reading: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// Binary operator cache: "NPSY" | version u32 | n u32 | matrix id u32 |
// row-major doubles, all little-endian.
inline constexpr std::uint32_t kCacheVersion = 1;
inline constexpr std::uint32_t kCacheKstar = 1;
inline constexpr std::uint32_t kCacheSingleLayer = 2;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out += static_cast<char>((v >> (8 * i)) & 0xff);
}

inline std::uint32_t get_u32(const std::string& s, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
    return v;
}

} // namespace detail

inline void write_matrix_cache(const std::string& path, std::uint32_t matrix_id,
                               const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw IoError("operator cache expects a square matrix");
    std::string out = "NPSY";
    detail::put_u32(out, kCacheVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(out, matrix_id);
    out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 8);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            double v = m(i, j);
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            for (int b = 0; b < 8; ++b)
                out += static_cast<char>((bits >> (8 * b)) & 0xff);
        }
    write_text_file(path, out);
}

inline Eigen::MatrixXd read_matrix_cache(const std::string& path, std::uint32_t expected_id) {
    const std::string s = read_text_file(path);
    if (s.size() < 16 || s.compare(0, 4, "NPSY") != 0)
        throw IoError("not an operator cache file: " + path);
    if (detail::get_u32(s, 4) != kCacheVersion)
        throw IoError("unsupported cache version in " + path);
    const std::uint32_t n = detail::get_u32(s, 8);
    if (detail::get_u32(s, 12) != expected_id)
        throw IoError("cache holds a different operator: " + path);
    const std::size_t need = 16 + static_cast<std::size_t>(n) * n * 8;
    if (s.size() != need)
        throw IoError("truncated operator cache: " + path);
    Eigen::MatrixXd m(n, n);
    std::size_t off = 16;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b)
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[off + b]))
                        << (8 * b);
            double v;
            std::memcpy(&v, &bits, 8);
            m(i, j) = v;
            off += 8;
        }
    return m;
}

} // namespace npspec
