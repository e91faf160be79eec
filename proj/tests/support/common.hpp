#pragma once

#include <Eigen/Dense>

#include <vector>

namespace support {

inline Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>> &rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

inline Eigen::VectorXd to_vector(const std::vector<double> &v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace support
