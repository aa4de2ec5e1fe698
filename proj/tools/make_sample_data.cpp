// Writes the bundled sample files: one replication of the mean-zero baseline
// design under the null, and a year-by-month panel of temperature-like densities.
//
// usage: make_sample_data <output-dir>

#include "funflir/funflir.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <string>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_sample_data <output-dir>\n";
        return 2;
    }
    const std::string dir = argv[1];

    funflir::DgpSpec spec;
    spec.beta_u = 0.1;
    spec.T = 200;
    spec.kappa = 0.0;
    spec.seed = 20240117;
    const auto s = funflir::gen_baseline(spec);
    funflir::write_curves(dir + "/null_Z.csv", s.Z);
    funflir::write_curves(dir + "/null_X.csv", s.X);
    funflir::write_scalars(dir + "/null_y.csv", s.y, "y");

    // 48 monthly densities on [-15, 40]: a seasonal normal mixture.
    const std::size_t n = 111, months = 48;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = -15.0 + 55.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    funflir::RowMatrix p(static_cast<Eigen::Index>(months), static_cast<Eigen::Index>(n));
    funflir::Rng rng = funflir::make_rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 0.7);
    const auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
    for (std::size_t t = 0; t < months; ++t) {
        const double season = std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / 12.0);
        const double m1 = 12.0 - 12.0 * season + noise(rng), m2 = m1 + 6.0;
        const double s1 = 4.0 + 0.5 * season, s2 = 3.0;
        for (std::size_t i = 0; i < n; ++i)
            p(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) =
                0.7 * phi((x[i] - m1) / s1) / s1 + 0.3 * phi((x[i] - m2) / s2) / s2;
    }
    funflir::write_matrix_csv(dir + "/densities.csv", x, p);
    std::cout << "wrote sample files to " << dir << "\n";
    return 0;
}
