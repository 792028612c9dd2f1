#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mmred/closed_loop_reduction.hpp"

namespace mmred {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array())
        throw ParseError(what + ": expected an array of arrays");
    const Index rows = static_cast<Index>(j.size());
    if (rows == 0)
        return Matrix(0, 0);
    Index cols = -1;
    for (const auto& row : j) {
        if (!row.is_array())
            throw ParseError(what + ": expected an array of arrays");
        if (cols < 0)
            cols = static_cast<Index>(row.size());
        else if (cols != static_cast<Index>(row.size()))
            throw ParseError(what + ": rows have unequal lengths");
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index jx = 0; jx < cols; ++jx) {
            const auto& v = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(jx)];
            if (!v.is_number())
                throw ParseError(what + ": entries must be numbers");
            m(i, jx) = v.get<double>();
        }
    return m;
}

// ---------------------------------------------------------------------------
// System files: {"name", "A", "B", "C", "D"} with array-of-arrays matrices
// ---------------------------------------------------------------------------

inline json system_to_json(const Realization& sys, const std::string& name) {
    json j;
    j["name"] = name;
    j["A"] = matrix_to_json(sys.A);
    j["B"] = matrix_to_json(sys.B);
    j["C"] = matrix_to_json(sys.C);
    j["D"] = matrix_to_json(Matrix::Constant(1, 1, sys.D));
    return j;
}

inline Realization system_from_json(const json& j) {
    if (!j.is_object() || !j.contains("A") || !j.contains("B") || !j.contains("C"))
        throw ParseError("system file: missing A/B/C fields");
    Realization sys;
    sys.A = matrix_from_json(j.at("A"), "A");
    sys.B = matrix_from_json(j.at("B"), "B");
    if (sys.B.size() == 0)
        sys.B = Matrix(sys.A.rows() == 0 ? 0 : sys.A.rows(), 1).setZero();
    sys.C = matrix_from_json(j.at("C"), "C");
    if (sys.C.size() == 0)
        sys.C = Matrix::Zero(1, sys.A.rows());
    if (j.contains("D")) {
        const Matrix d = matrix_from_json(j.at("D"), "D");
        if (d.size() > 1)
            throw ParseError("system file: D must be scalar (1x1)");
        sys.D = d.size() == 1 ? d(0, 0) : 0.0;
    }
    try {
        sys.validate();
    } catch (const ShapeError& e) {
        throw ParseError(std::string("system file: ") + e.what());
    }
    return sys;
}

inline json parse_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

inline Realization load_system(const std::filesystem::path& path) {
    return system_from_json(parse_json_file(path));
}

inline void save_system(const std::filesystem::path& path, const Realization& sys,
                        const std::string& name) {
    write_json_file(path, system_to_json(sys, name));
}

// ---------------------------------------------------------------------------
// Generator specs
// ---------------------------------------------------------------------------

inline json generator_to_json(const SignalGenerator& g) {
    json j;
    j["S"] = matrix_to_json(g.S);
    j["L"] = matrix_to_json(g.L);
    j["omega0"] = matrix_to_json(g.omega0);
    return j;
}

inline SignalGenerator generator_from_json(const json& j) {
    SignalGenerator g;
    g.S = matrix_from_json(j.at("S"), "S");
    g.L = matrix_from_json(j.at("L"), "L");
    const Matrix w0 = matrix_from_json(j.at("omega0"), "omega0");
    g.omega0 = w0.col(0);
    try {
        g.validate();
    } catch (const ShapeError& e) {
        throw ParseError(std::string("generator spec: ") + e.what());
    }
    return g;
}

/// Parse a reference spec of the CLI forms: step | ramp | poly K | sin W.
inline SignalGenerator reference_from_spec(const std::string& kind, double param) {
    if (kind == "step")
        return make_step();
    if (kind == "ramp")
        return make_ramp();
    if (kind == "poly")
        return make_polynomial(static_cast<Index>(param));
    if (kind == "sin")
        return make_sinusoid(param);
    throw ParseError("unknown reference kind: " + kind);
}

// ---------------------------------------------------------------------------
// Trajectory CSV: header `t,theta,y,eps`, full double precision
// ---------------------------------------------------------------------------

inline std::string format_full(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write " + path.string());
    out << "t,theta,y,eps\n";
    out.precision(17);
    for (Index k = 0; k < traj.times.size(); ++k)
        out << traj.times(k) << ',' << traj.theta(k) << ',' << traj.y(k) << ','
            << traj.eps(k) << "\n";
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json report_to_json(const VerificationReport& rep) {
    json j;
    j["stability_abscissa"] = rep.stability_abscissa;
    j["moment_residual_pcl"] = rep.moment_residual_pcl;
    j["moment_residual_e"] = rep.moment_residual_e;
    j["tracking_sim_error"] = rep.tracking_sim_error;
    j["interpolation_residuals"] = rep.interpolation_residuals;
    j["tol_moments"] = rep.tol_moments;
    j["tracking_threshold"] = rep.tracking_threshold;
    j["verdict"] = rep.verdict;
    j["consistent"] = rep.consistent;
    return j;
}

inline json fraction_to_json(const TransferFraction& tf) {
    json j;
    json num = json::array(), den = json::array();
    for (Index i = 0; i < tf.num.size(); ++i)
        num.push_back(tf.num(i));
    for (Index i = 0; i < tf.den.size(); ++i)
        den.push_back(tf.den(i));
    j["num_ascending"] = num;
    j["den_ascending"] = den;
    j["proper"] = tf.proper();
    j["cancelled_factors"] = tf.cancelled;
    return j;
}

/// FNV-1a 64-bit hash of a string (used to pin benchmark data).
inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace mmred
