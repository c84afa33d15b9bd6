#ifndef PWHOM_LATTICE_HPP
#define PWHOM_LATTICE_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace pwh {

// Integer Fourier index. For d = 1 the second entry is always 0, so the
// same key type works for both supported dimensions.
using Mode = std::array<int, 2>;

// Periodicity lattice, its dual, and the first Brillouin zone data.
// Both bases are stored embedded in 2x2 matrices; for d = 1 the second
// column is a placeholder unit vector that never enters any computation.
struct Lattice {
  int dim = 1;
  Eigen::Matrix2d basis = Eigen::Matrix2d::Identity();  // columns a_j
  Eigen::Matrix2d dual = Eigen::Matrix2d::Identity();   // columns b_j
  double cell_volume = 1.0;
  double r0 = 0.0;  // inradius of the Brillouin zone

  // Wave vector of the integer mode k: sum_j k_j b_j.
  Eigen::Vector2d frequency(const Mode& k) const {
    return dual.col(0) * double(k[0]) + dual.col(1) * double(k[1]);
  }
};

// Builds the lattice from a d x d basis (d in {1,2}).
// Throws SingularBasis when |det| < 1e-12 * (max column norm)^d.
Lattice make_lattice(const Eigen::MatrixXd& basis);

// Nonzero dual lattice vectors with integer coordinates in [-radius, radius]^d.
std::vector<Eigen::Vector2d> dual_vectors(const Lattice& lat, int radius = 3);

// True iff xi lies in the dilated Brillouin zone Omega~/eps, i.e.
// |eps xi| < |eps xi - b| for every nonzero dual vector b. Ties within
// 1e-12 count as outside.
bool in_brillouin(const Lattice& lat, const Eigen::Vector2d& xi, double eps);

}  // namespace pwh

#endif
