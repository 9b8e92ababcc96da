#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include <json.hpp>

namespace sqg {

using Eigen::Index;
using Points = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using Gradients = Eigen::Matrix<double, Eigen::Dynamic, 2>;
/// Columns: d2/dx2, d2/dxdy, d2/dy2.
using Hessians = Eigen::Matrix<double, Eigen::Dynamic, 3>;

enum class DomainKind { square, disk };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& s);

/// Square (0, pi)^2 or unit disk centred at the origin.
struct DomainSpec {
  DomainKind kind = DomainKind::square;
  /// Square: midpoint nodes per axis. Disk: Gauss-Legendre radial nodes
  /// (angular nodes are twice that).
  int quadrature_order = 0;

  double area() const;
  double inradius() const;
  Eigen::Vector2d center() const;
  bool contains(const Eigen::Vector2d& x, double tol = 1e-12) const;
  double boundary_distance(const Eigen::Vector2d& x) const;
};

/// One Dirichlet eigenpair. multi_index is (a, b) on the square, or
/// (signed angular order, radial root number) on the disk; negative angular
/// order selects the sine partner.
struct EigenMode {
  int ordinal = 0;  // 1-based position in the sorted basis
  std::array<int, 2> multi_index{};
  double eigenvalue = 0.0;
};

struct QuadratureGrid {
  Points points;
  Eigen::VectorXd weights;
  Eigen::VectorXd boundary_distance;

  Index size() const { return weights.size(); }
};

/// Ordered Dirichlet eigenbasis of -Laplace with its quadrature grid.
///
/// Immutable after construction apart from an internal, mutex-guarded cache
/// of eigenvalue powers, so one basis may be shared across threads.
///
/// Grid transforms: the disk and small square bases keep dense npts x m
/// tables of w_j and grad w_j; large square bases use separable sine/cosine
/// transforms along each axis instead.
class EigenBasis {
 public:
  enum class SquarePath { automatic, dense, separable };

  const DomainSpec& domain() const { return domain_; }
  const std::vector<EigenMode>& modes() const { return modes_; }
  const QuadratureGrid& grid() const { return grid_; }
  Index size() const { return static_cast<Index>(modes_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  /// {domain, m_max, quadrature_order, eigenvalues[]}
  const nlohmann::json& descriptor() const { return descriptor_; }
  /// SHA-256 of the serialized descriptor.
  const std::array<std::uint8_t, 32>& descriptor_hash() const { return hash_; }
  /// First 16 hex digits of descriptor_hash().
  const std::string& id() const { return id_; }

  bool uses_dense_tables() const { return dense_; }

  /// w_j at arbitrary points in the closure of the domain (j is 0-based).
  Eigen::VectorXd evaluate_mode(Index j, const Points& x) const;
  Gradients evaluate_mode_gradient(Index j, const Points& x) const;
  /// Square only.
  Hessians evaluate_mode_hessian(Index j, const Points& x) const;

  /// sum_j c_j w_j on the grid; c may be shorter than the basis.
  Eigen::VectorXd synthesize(const Eigen::Ref<const Eigen::VectorXd>& c) const;
  Gradients synthesize_gradient(const Eigen::Ref<const Eigen::VectorXd>& c) const;
  /// First m quadrature coefficients  int g w_j dx  of grid values g.
  Eigen::VectorXd analyze(const Eigen::Ref<const Eigen::VectorXd>& g, Index m) const;

  /// Coefficients of P_m(d f/dx) and P_m(d f/dy) for f = sum c_j w_j.
  /// Closed form on the square (the derivatives are not sine series, so grid
  /// quadrature would alias); quadrature on the disk.
  std::array<Eigen::VectorXd, 2> project_gradient(const Eigen::Ref<const Eigen::VectorXd>& c,
                                                  Index m) const;

  /// Dense grid tables for the first m modes, built on demand.
  struct Tables {
    Eigen::MatrixXd values, dx, dy;  // npts x m
  };
  Tables tables(Index m) const;

  /// lambda_j^{p} for the whole basis, computed once per exponent as
  /// exp(p log lambda_j).
  const Eigen::VectorXd& eigenvalue_power(double p) const;

  /// Lower Weyl constant min_j lambda_j / j over the stored range (d = 2).
  double weyl_constant() const;

  friend EigenBasis build_square_basis(int m_max, int quadrature_order, SquarePath path);
  friend EigenBasis build_disk_basis(int m_max, int quadrature_order);

 private:
  EigenBasis() = default;
  void finalize();
  void check_index(Index j) const;
  void check_points(const Points& x) const;

  struct SquareData {
    int max_wavenumber = 0;
    Eigen::VectorXd axis_nodes, axis_weights;  // midpoint rule on (0, pi)
    Eigen::MatrixXd sin_table, cos_table;      // N x max_wavenumber, entry (i, a-1)
  };
  struct DiskData {
    std::vector<double> roots;  // alpha_j = sqrt(lambda_j)
    std::vector<double> norms;  // L2 normalisation constant
  };

  DomainSpec domain_;
  std::vector<EigenMode> modes_;
  Eigen::VectorXd eigenvalues_;
  QuadratureGrid grid_;
  std::variant<std::monostate, SquareData, DiskData> data_;
  bool dense_ = false;
  Tables dense_tables_;
  nlohmann::json descriptor_;
  std::array<std::uint8_t, 32> hash_{};
  std::string id_;
  Eigen::VectorXd log_eigenvalues_;

  struct PowerCache {
    std::mutex mutex;
    std::map<double, Eigen::VectorXd> powers;
  };
  std::shared_ptr<PowerCache> power_cache_ = std::make_shared<PowerCache>();
};

/// Modes (a, b) on (0, pi)^2 with w = (2/pi) sin(ax) sin(by), lambda = a^2 + b^2,
/// sorted by eigenvalue then multi-index. quadrature_order 0 picks the
/// minimum, 2 x the largest wavenumber; smaller non-zero orders are rejected.
EigenBasis build_square_basis(int m_max, int quadrature_order = 0,
                              EigenBasis::SquarePath path = EigenBasis::SquarePath::automatic);

/// Bessel modes J_n(alpha r){cos, sin}(n phi) on the unit disk with
/// lambda = alpha^2, alpha a zero of J_n.
EigenBasis build_disk_basis(int m_max, int quadrature_order = 0);

/// Minimum quadrature order accepted for a basis of m_max modes.
int minimum_quadrature_order(DomainKind kind, int m_max);

EigenBasis build_basis(const DomainSpec& domain, int m_max);

}  // namespace sqg
