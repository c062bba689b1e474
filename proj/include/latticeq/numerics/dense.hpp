#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latticeq/error.hpp"
#include "latticeq/hamiltonian.hpp"

namespace latticeq {

inline constexpr std::size_t kDefaultDenseCap = 6000;

struct DenseSpectrum {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< one orthonormal column per eigenvalue; rows indexed by box site
};

namespace detail {

inline std::vector<std::size_t> active_indices(const SparseHamiltonian& h) {
  std::vector<std::size_t> idx;
  idx.reserve(h.size());
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h.is_active(i)) idx.push_back(i);
  return idx;
}

inline void check_dense_cap(std::size_t n, std::size_t cap) {
  if (n > cap)
    throw ResourceError("dense route needs " + std::to_string(n) + " sites, above the dense-size cap " +
                        std::to_string(cap) + "; use the iterative routes");
}

}  // namespace detail

/// Dense matrix of H over the active sites (removed sites excluded), in box index order.
inline Eigen::MatrixXd active_dense_matrix(const SparseHamiltonian& h, const std::vector<std::size_t>& active) {
  std::vector<std::ptrdiff_t> pos(h.size(), -1);
  for (std::size_t k = 0; k < active.size(); ++k) pos[active[k]] = static_cast<std::ptrdiff_t>(k);
  const auto n = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m(k, k) = h.diagonal()[active[k]];
  h.for_each_link([&](std::size_t i, std::size_t j) {
    m(pos[i], pos[j]) = 1.0;
    m(pos[j], pos[i]) = 1.0;
  });
  return m;
}

inline DenseSpectrum dense_eig(const SparseHamiltonian& h, std::size_t cap = kDefaultDenseCap) {
  const auto active = detail::active_indices(h);
  detail::check_dense_cap(active.size(), cap);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(active_dense_matrix(h, active));
  if (solver.info() != Eigen::Success) throw NumericError("dense eigensolver did not converge");
  DenseSpectrum out;
  out.values = solver.eigenvalues();
  out.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(h.size()), out.values.size());
  for (std::size_t k = 0; k < active.size(); ++k)
    out.vectors.row(static_cast<Eigen::Index>(active[k])) = solver.eigenvectors().row(static_cast<Eigen::Index>(k));
  return out;
}

inline double spectrum_distance(std::complex<double> z, const DenseSpectrum& spec) {
  double d = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < spec.values.size(); ++j) d = std::min(d, std::abs(z - spec.values(j)));
  return d;
}

}  // namespace latticeq
