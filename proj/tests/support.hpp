#pragma once

#include "frontal/catalog.hpp"
#include "frontal/scene_file.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>

namespace testing_support {

inline constexpr double kPi = std::numbers::pi;

// the sphere folded onto the disk in latitude/longitude coordinates
inline std::string latlong_disk_text() {
    return "id = latlong_disk\n"
           "dim = 2\n"
           "ambient = 3\n"
           "domain = other\n"
           "orientation_sign = 1\n"
           "[chart.ll]\n"
           "vars = th, ph\n"
           "box = (0, 2*pi), (-1.5, 1.5)\n"
           "periodic = true, false\n"
           "f = (cos(ph)*cos(th), cos(ph)*sin(th), 0)\n"
           "normal_frame = (0, 0, 1)\n";
}

// central difference of a vector-valued map along one coordinate
inline Eigen::VectorXd central_difference(const std::function<Eigen::VectorXd(const std::vector<double>&)>& g,
                                          std::vector<double> u, int axis, double h) {
    u[static_cast<std::size_t>(axis)] += h;
    const Eigen::VectorXd plus = g(u);
    u[static_cast<std::size_t>(axis)] -= 2.0 * h;
    const Eigen::VectorXd minus = g(u);
    return (plus - minus) / (2.0 * h);
}

inline Eigen::MatrixXd random_rotation(int m, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            a(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    if (q.determinant() < 0)
        q.col(0) *= -1.0;
    return q;
}

} // namespace testing_support
