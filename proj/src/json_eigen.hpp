// Internal helpers: Eigen <-> nlohmann::json, full double precision.
#pragma once

#include <Eigen/Core>
#include <json.hpp>

namespace ptg::detail {

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline nlohmann::json to_json(const Eigen::VectorXi& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline nlohmann::json to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
    Eigen::VectorXd v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<double>();
    return v;
}

inline Eigen::VectorXi ivector_from_json(const nlohmann::json& a) {
    Eigen::VectorXi v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<int>();
    return v;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& a) {
    if (a.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd m(a.size(), a[0].size());
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = a[i][j].get<double>();
    return m;
}

} // namespace ptg::detail
