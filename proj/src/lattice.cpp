#include "pwhom/lattice.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pwhom/errors.hpp"

namespace pwh {

Lattice make_lattice(const Eigen::MatrixXd& basis) {
  if (basis.rows() != basis.cols() || basis.rows() < 1 || basis.rows() > 2)
    throw SingularBasis("basis must be 1x1 or 2x2, got " +
                        std::to_string(basis.rows()) + "x" +
                        std::to_string(basis.cols()));
  const int d = int(basis.rows());

  double max_col = 0.0;
  for (int j = 0; j < d; ++j) max_col = std::max(max_col, basis.col(j).norm());
  const double det = basis.determinant();
  if (std::abs(det) < 1e-12 * std::pow(max_col, d) ||
      std::abs(det) == 0.0)
    throw SingularBasis("determinant " + std::to_string(det) +
                        " too small relative to column norms");

  Lattice lat;
  lat.dim = d;
  lat.basis = Eigen::Matrix2d::Identity();
  lat.basis.topLeftCorner(d, d) = basis;
  lat.cell_volume = std::abs(det);

  // <b_i, a_j> = 2 pi delta_ij  =>  dual = 2 pi basis^{-T}
  Eigen::MatrixXd dual = 2.0 * std::numbers::pi *
                         basis.transpose().inverse();
  lat.dual = Eigen::Matrix2d::Identity();
  lat.dual.topLeftCorner(d, d) = dual;

  double shortest = std::numeric_limits<double>::infinity();
  for (const auto& b : dual_vectors(lat)) shortest = std::min(shortest, b.norm());
  lat.r0 = 0.5 * shortest;
  return lat;
}

std::vector<Eigen::Vector2d> dual_vectors(const Lattice& lat, int radius) {
  std::vector<Eigen::Vector2d> out;
  const int r1 = lat.dim == 2 ? radius : 0;
  for (int i = -radius; i <= radius; ++i)
    for (int j = -r1; j <= r1; ++j) {
      if (i == 0 && j == 0) continue;
      out.push_back(lat.dual.col(0) * double(i) + lat.dual.col(1) * double(j));
    }
  return out;
}

bool in_brillouin(const Lattice& lat, const Eigen::Vector2d& xi, double eps) {
  const Eigen::Vector2d p = eps * xi;
  const double pn = p.norm();
  for (const auto& b : dual_vectors(lat)) {
    if (pn >= (p - b).norm() - 1e-12) return false;
  }
  return true;
}

}  // namespace pwh
