#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <json.hpp>

#include "sqg/basis.hpp"
#include "sqg/error.hpp"

namespace sqg {

/// Coefficients (f_1..f_m) of f = sum f_j w_j against a particular basis.
struct SpectralField {
  Eigen::VectorXd coefficients;
  std::string basis_id;

  Index size() const { return coefficients.size(); }
};

/// Grid values (one column per component) of a field on a basis grid.
struct PhysicalField {
  Eigen::MatrixXd values;
  std::string basis_id;
};

/// Binds coefficients to a basis; throws Error(binding) if there are more
/// coefficients than modes and Error(config) on non-finite entries.
SpectralField make_field(const EigenBasis& basis, Eigen::VectorXd coefficients);

/// e_j with m coefficients (j 0-based).
SpectralField unit_field(const EigenBasis& basis, Index j, Index m);

void check_binding(const EigenBasis& basis, const SpectralField& f);

// Coefficient-space kernels. `c` may be any Eigen vector expression of length
// at most basis.size(); the leading eigenvalues are used.

/// sum_j lambda_j^alpha c_j^2
template <class Derived>
double weighted_square_norm(const EigenBasis& basis, const Eigen::MatrixBase<Derived>& c,
                            double alpha) {
  const auto& w = basis.eigenvalue_power(alpha);
  return (w.head(c.size()).array() * c.array().square()).sum();
}

/// c_j -> lambda_j^{s/2} c_j
template <class Derived>
Eigen::VectorXd apply_power(const EigenBasis& basis, const Eigen::MatrixBase<Derived>& c,
                            double s) {
  return basis.eigenvalue_power(0.5 * s).head(c.size()).cwiseProduct(c);
}

/// Lambda^s f: coefficient j multiplied by lambda_j^{s/2}. Any real s.
SpectralField fractional_laplacian(const EigenBasis& basis, const SpectralField& f, double s);

/// ||f||_{D(Lambda^alpha)} = (sum lambda_j^alpha f_j^2)^{1/2}
double sobolev_norm(const EigenBasis& basis, const SpectralField& f, double alpha);

/// ||theta||^2_{D(Lambda^{-1/2})} = sum lambda_j^{-1/2} theta_j^2
double hamiltonian(const EigenBasis& basis, const SpectralField& theta);

/// P_m f. m larger than the field leaves it unchanged.
SpectralField project(const SpectralField& f, Index m);

/// ||(I - P_m) f||_{D(Lambda^alpha)}
double tail_norm(const EigenBasis& basis, const SpectralField& f, Index m, double alpha);

/// L2 pairing sum_j f_j g_j over the common leading coefficients.
double pairing(const SpectralField& f, const SpectralField& g);

PhysicalField synthesize(const EigenBasis& basis, const SpectralField& f);

/// f_j = int g w_j dx by grid quadrature, j < m. Only the first column of g
/// is analysed.
SpectralField analyze(const EigenBasis& basis, const PhysicalField& g, Index m);

/// u = grad^perp Lambda^{-1} theta on the grid, grad^perp = (-d_y, d_x).
PhysicalField velocity(const EigenBasis& basis, const SpectralField& theta);

/// div u at the grid points from analytic second derivatives (square only).
Eigen::VectorXd velocity_divergence(const EigenBasis& basis, const SpectralField& theta);

/// (int |grad f|^2 dx)^{1/2} by grid quadrature of the synthesized gradient.
double grid_gradient_norm(const EigenBasis& basis, const SpectralField& f);

// Serialization -------------------------------------------------------------

/// {"basis_id": ..., "coefficients": [...]}
nlohmann::json to_json(const SpectralField& f);
SpectralField field_from_json(const nlohmann::json& j);

/// 4-byte little-endian length followed by 8-byte little-endian doubles.
std::vector<std::uint8_t> to_binary(const Eigen::VectorXd& c);
Eigen::VectorXd from_binary(const std::vector<std::uint8_t>& bytes);

void write_binary(const std::filesystem::path& path, const Eigen::VectorXd& c);
Eigen::VectorXd read_binary(const std::filesystem::path& path);

}  // namespace sqg
