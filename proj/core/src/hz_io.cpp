#include "funcdec/error.hpp"
#include "funcdec/hz.hpp"
#include "json_detail.hpp"
#include "numfmt.hpp"

#include <cstdlib>
#include <sstream>

namespace funcdec {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from(const json& j, const char* what) {
    try {
        const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
        const auto& data = j.at("data");
        if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
            throw DimensionError(std::string("block '") + what + "' has " + std::to_string(data.size()) + " entries for a " +
                                 std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
        }
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)].get<double>();
        }
        return m;
    } catch (const json::exception& e) {
        throw InvariantError(std::string("block '") + what + "': " + e.what());
    }
}

Eigen::VectorXd vector_from(const json& j, const char* what) {
    const Eigen::MatrixXd m = matrix_from(j, what);
    if (m.cols() != 1 && !(m.rows() == 0)) throw DimensionError(std::string("block '") + what + "' must have one column");
    return m.rows() == 0 ? Eigen::VectorXd() : Eigen::VectorXd(m.col(0));
}

} // namespace

std::string hz_to_json(const HybridZonotope& Z, int indent) {
    Z.validate();
    json j;
    j["n"] = Z.dim();
    j["n_g"] = Z.n_g();
    j["n_b"] = Z.n_b();
    j["n_c"] = Z.n_c();
    j["Gc"] = matrix_json(Z.Gc);
    j["Gb"] = matrix_json(Z.Gb);
    j["c"] = matrix_json(Z.c);
    j["Ac"] = matrix_json(Z.Ac);
    j["Ab"] = matrix_json(Z.Ab);
    j["b"] = matrix_json(Z.b);
    return j.dump(indent);
}

HybridZonotope hz_from_json(std::string_view text) {
    const json j = detail::parse_json(text);
    if (!j.is_object()) throw InvariantError("hybrid zonotope JSON must be an object");
    HybridZonotope Z;
    try {
        Z.Gc = matrix_from(j.at("Gc"), "Gc");
        Z.Gb = matrix_from(j.at("Gb"), "Gb");
        Z.c = vector_from(j.at("c"), "c");
        Z.Ac = matrix_from(j.at("Ac"), "Ac");
        Z.Ab = matrix_from(j.at("Ab"), "Ab");
        Z.b = vector_from(j.at("b"), "b");
    } catch (const json::exception& e) {
        throw InvariantError(std::string("hybrid zonotope JSON: ") + e.what());
    }
    // Empty blocks lose one of their extents in row-major form; restore them.
    if (Z.Gc.size() == 0) Z.Gc.resize(Z.c.size(), Z.Gc.cols());
    if (Z.Gb.size() == 0) Z.Gb.resize(Z.c.size(), Z.Gb.cols());
    if (Z.Ac.size() == 0) Z.Ac.resize(Z.b.size(), Z.Gc.cols());
    if (Z.Ab.size() == 0) Z.Ab.resize(Z.b.size(), Z.Gb.cols());
    Z.validate();
    return Z;
}

std::string points_to_csv(const std::vector<Eigen::VectorXd>& points, std::span<const std::string> header) {
    std::ostringstream os;
    const Eigen::Index n = points.empty() ? static_cast<Eigen::Index>(header.size()) : points.front().size();
    for (Eigen::Index k = 0; k < n; ++k) {
        if (k) os << ',';
        os << (static_cast<std::size_t>(k) < header.size() ? header[k] : "x" + std::to_string(k + 1));
    }
    os << '\n';
    for (const auto& p : points) {
        if (p.size() != n) throw DimensionError("points_to_csv: points of different dimensions");
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k) os << ',';
            os << detail::exact(p(k));
        }
        os << '\n';
    }
    return os.str();
}

std::vector<Eigen::VectorXd> points_from_csv(std::string_view text) {
    std::vector<Eigen::VectorXd> out;
    std::istringstream is{std::string(text)};
    std::string line;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> vals;
        bool numeric = true;
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            while (end && (*end == ' ' || *end == '\t')) ++end;
            if (end == cell.c_str() || (end && *end != '\0')) {
                numeric = false;
                break;
            }
            vals.push_back(v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue; // header
            }
            throw InvariantError("points CSV line " + std::to_string(line_no) + " is not numeric");
        }
        first = false;
        if (!out.empty() && static_cast<std::size_t>(out.front().size()) != vals.size()) {
            throw DimensionError("points CSV line " + std::to_string(line_no) + " has " + std::to_string(vals.size()) + " columns");
        }
        out.emplace_back(Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
    }
    return out;
}

std::string hull_to_csv(std::span<const Interval> hull, std::span<const std::string> names) {
    std::ostringstream os;
    os << "coordinate,lo,hi\n";
    for (std::size_t k = 0; k < hull.size(); ++k) {
        os << (k < names.size() ? names[k] : "x" + std::to_string(k + 1)) << ',' << detail::exact(hull[k].lo) << ','
           << detail::exact(hull[k].hi) << '\n';
    }
    return os.str();
}

} // namespace funcdec
