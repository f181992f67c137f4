#include "depcomb/csv.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace depcomb::io {

namespace {

double parse_cell(const std::string& cell, const std::filesystem::path& path, int line, int col) {
    try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        std::ostringstream msg;
        msg << path.string() << ":" << line << ": column " << col << ": cannot parse '" << cell
            << "' as a number";
        throw std::runtime_error(msg.str());
    }
}

std::vector<std::vector<double>> read_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        int col = 0;
        while (std::getline(cells, cell, ',')) {
            ++col;
            row.push_back(parse_cell(cell, path, lineno, col));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            std::ostringstream msg;
            msg << path.string() << ":" << lineno << ": expected " << rows.front().size()
                << " columns, found " << row.size();
            throw std::runtime_error(msg.str());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path.string() + ": no numeric rows");
    return rows;
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
    auto rows = read_rows(path);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

Eigen::VectorXd read_vector_csv(const std::filesystem::path& path) {
    auto rows = read_rows(path);
    if (rows.front().size() == 1) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) v[static_cast<Eigen::Index>(i)] = rows[i][0];
        return v;
    }
    if (rows.size() == 1) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            v[static_cast<Eigen::Index>(j)] = rows.front()[j];
        return v;
    }
    throw std::runtime_error(path.string() + ": expected a single row or a single column");
}

std::vector<double> read_pvalues(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream cells(line);
        std::string cell;
        int col = 0;
        while (cells >> cell) {
            ++col;
            values.push_back(parse_cell(cell, path, lineno, col));
        }
    }
    if (values.empty()) throw std::runtime_error(path.string() + ": no p-values found");
    return values;
}

mb::OtuDesign load_otu_design(const std::filesystem::path& y_path,
                              const std::filesystem::path& x_path,
                              const std::filesystem::path& z_path, bool binary) {
    Eigen::VectorXd Y = read_vector_csv(y_path);
    Eigen::MatrixXd Z = read_matrix_csv(z_path);
    Eigen::MatrixXd X;
    if (x_path.empty()) {
        X = Eigen::MatrixXd::Ones(Y.size(), 1);
    } else {
        X = read_matrix_csv(x_path);
        // prepend an intercept unless the first column already is one
        bool has_intercept =
            X.cols() > 0 && (X.col(0).array() - 1.0).abs().maxCoeff() < 1e-12;
        if (!has_intercept) {
            Eigen::MatrixXd with(X.rows(), X.cols() + 1);
            with.col(0).setOnes();
            with.rightCols(X.cols()) = X;
            X = std::move(with);
        }
    }
    if (X.rows() != Y.size())
        throw std::runtime_error(x_path.string() + ": row count does not match " +
                                 y_path.string());
    if (Z.rows() != Y.size())
        throw std::runtime_error(z_path.string() + ": row count does not match " +
                                 y_path.string());
    return mb::OtuDesign::make(std::move(Y), std::move(X), std::move(Z), binary);
}

std::string format_double(double v, int precision) {
    std::ostringstream out;
    out.precision(precision);
    out << v;
    return out.str();
}

}  // namespace depcomb::io
