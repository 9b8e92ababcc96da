#include "sqg/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

#include "sqg/bessel.hpp"
#include "sqg/error.hpp"
#include "sqg/hash.hpp"
#include "sqg/quadrature.hpp"

namespace sqg {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double square_norm = 2.0 / pi;
// Largest dense table (entries per table) built automatically.
constexpr Index dense_entry_limit = Index{1} << 21;
constexpr Index disk_dense_entry_limit = Index{1} << 22;
constexpr int dense_mode_limit = 256;

bool mode_less(const EigenMode& a, const EigenMode& b) {
  return std::tie(a.eigenvalue, a.multi_index) < std::tie(b.eigenvalue, b.multi_index);
}

void assign_ordinals(std::vector<EigenMode>& modes, int m_max) {
  std::sort(modes.begin(), modes.end(), mode_less);
  modes.resize(m_max);
  for (int j = 0; j < m_max; ++j) modes[j].ordinal = j + 1;
}

std::vector<EigenMode> square_modes(int m_max) {
  long bound = static_cast<long>(4.0 * m_max / pi * 1.5) + 16;
  for (;;) {
    std::vector<EigenMode> modes;
    for (int a = 1; static_cast<long>(a) * a < bound; ++a)
      for (int b = 1; static_cast<long>(a) * a + static_cast<long>(b) * b <= bound; ++b)
        modes.push_back({0, {a, b}, static_cast<double>(a * a + b * b)});
    if (static_cast<int>(modes.size()) >= m_max) {
      assign_ordinals(modes, m_max);
      return modes;
    }
    bound = bound * 3 / 2;
  }
}

struct DiskSpectrum {
  std::vector<EigenMode> modes;
  std::vector<double> roots;
};

DiskSpectrum disk_modes(int m_max) {
  double bound = 2.0 * std::sqrt(static_cast<double>(m_max)) + 6.0;
  for (;;) {
    std::vector<EigenMode> modes;
    for (int n = 0; n < bound; ++n) {
      const auto zeros = bessel_j_zeros_below(n, bound);
      if (zeros.empty()) break;
      for (std::size_t k = 0; k < zeros.size(); ++k) {
        const double lambda = zeros[k] * zeros[k];
        const int root = static_cast<int>(k) + 1;
        if (n == 0) {
          modes.push_back({0, {0, root}, lambda});
        } else {
          modes.push_back({0, {-n, root}, lambda});
          modes.push_back({0, {n, root}, lambda});
        }
      }
    }
    if (static_cast<int>(modes.size()) >= m_max) {
      assign_ordinals(modes, m_max);
      DiskSpectrum out;
      out.modes = std::move(modes);
      for (const auto& m : out.modes) out.roots.push_back(std::sqrt(m.eigenvalue));
      return out;
    }
    bound *= 1.3;
  }
}

int square_max_wavenumber(const std::vector<EigenMode>& modes) {
  int a = 0;
  for (const auto& m : modes) a = std::max({a, m.multi_index[0], m.multi_index[1]});
  return a;
}

int disk_minimum_order(const std::vector<double>& roots) {
  const double alpha_max = *std::max_element(roots.begin(), roots.end());
  return static_cast<int>(std::ceil(1.5 * alpha_max)) + 10;
}

// int_0^pi cos(a x) sin(k x) dx
double cos_sin_integral(int a, int k) {
  if (a == k) return 0.0;
  const bool odd = ((a + k) % 2) != 0;
  return odd ? 2.0 * k / (static_cast<double>(k) * k - static_cast<double>(a) * a) : 0.0;
}

}  // namespace

std::string to_string(DomainKind kind) { return kind == DomainKind::square ? "square" : "disk"; }

DomainKind domain_kind_from_string(const std::string& s) {
  if (s == "square") return DomainKind::square;
  if (s == "disk") return DomainKind::disk;
  throw Error(ErrorKind::config, "unknown domain kind '" + s + "' (expected square or disk)");
}

double DomainSpec::area() const { return kind == DomainKind::square ? pi * pi : pi; }

double DomainSpec::inradius() const { return kind == DomainKind::square ? 0.5 * pi : 1.0; }

Eigen::Vector2d DomainSpec::center() const {
  return kind == DomainKind::square ? Eigen::Vector2d(0.5 * pi, 0.5 * pi) : Eigen::Vector2d::Zero();
}

bool DomainSpec::contains(const Eigen::Vector2d& x, double tol) const {
  if (kind == DomainKind::square)
    return x.x() >= -tol && x.x() <= pi + tol && x.y() >= -tol && x.y() <= pi + tol;
  return x.norm() <= 1.0 + tol;
}

double DomainSpec::boundary_distance(const Eigen::Vector2d& x) const {
  if (kind == DomainKind::square)
    return std::max(0.0, std::min({x.x(), pi - x.x(), x.y(), pi - x.y()}));
  return std::max(0.0, 1.0 - x.norm());
}

int minimum_quadrature_order(DomainKind kind, int m_max) {
  if (m_max < 1) throw Error(ErrorKind::config, "m_max must be at least 1");
  if (kind == DomainKind::square) return 2 * square_max_wavenumber(square_modes(m_max));
  return disk_minimum_order(disk_modes(m_max).roots);
}

// ---------------------------------------------------------------------------

EigenBasis build_square_basis(int m_max, int quadrature_order, EigenBasis::SquarePath path) {
  if (m_max < 1) throw Error(ErrorKind::config, "m_max must be at least 1");
  EigenBasis basis;
  basis.modes_ = square_modes(m_max);
  EigenBasis::SquareData data;
  data.max_wavenumber = square_max_wavenumber(basis.modes_);
  const int min_order = 2 * data.max_wavenumber;
  if (quadrature_order == 0) quadrature_order = min_order;
  if (quadrature_order < min_order)
    throw Error(ErrorKind::config, "quadrature_order " + std::to_string(quadrature_order) +
                                       " too small for square basis with m_max " +
                                       std::to_string(m_max) + "; minimum order is " +
                                       std::to_string(min_order));
  basis.domain_ = {DomainKind::square, quadrature_order};

  const int n = quadrature_order;
  const auto axis = midpoint_rule(n, 0.0, pi);
  data.axis_nodes = axis.nodes;
  data.axis_weights = axis.weights;
  data.sin_table.resize(n, data.max_wavenumber);
  data.cos_table.resize(n, data.max_wavenumber);
  for (int a = 1; a <= data.max_wavenumber; ++a) {
    data.sin_table.col(a - 1) = (a * axis.nodes.array()).sin();
    data.cos_table.col(a - 1) = (a * axis.nodes.array()).cos();
  }

  auto& grid = basis.grid_;
  grid.points.resize(Index{n} * n, 2);
  grid.weights.resize(Index{n} * n);
  grid.boundary_distance.resize(Index{n} * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const Index p = Index{i} * n + k;
      grid.points.row(p) << axis.nodes(i), axis.nodes(k);
      grid.weights(p) = axis.weights(i) * axis.weights(k);
      grid.boundary_distance(p) = basis.domain_.boundary_distance(grid.points.row(p).transpose());
    }
  }

  const Index npts = grid.size();
  switch (path) {
    case EigenBasis::SquarePath::dense: basis.dense_ = true; break;
    case EigenBasis::SquarePath::separable: basis.dense_ = false; break;
    case EigenBasis::SquarePath::automatic:
      basis.dense_ = m_max <= dense_mode_limit && npts * m_max <= dense_entry_limit;
      break;
  }
  basis.data_ = std::move(data);
  if (basis.dense_) basis.dense_tables_ = basis.tables(m_max);
  basis.finalize();
  return basis;
}

EigenBasis build_disk_basis(int m_max, int quadrature_order) {
  if (m_max < 1) throw Error(ErrorKind::config, "m_max must be at least 1");
  EigenBasis basis;
  auto spectrum = disk_modes(m_max);
  basis.modes_ = std::move(spectrum.modes);
  EigenBasis::DiskData data;
  data.roots = std::move(spectrum.roots);
  for (std::size_t j = 0; j < basis.modes_.size(); ++j) {
    const int n = std::abs(basis.modes_[j].multi_index[0]);
    const double jn1 = bessel_j(n + 1, data.roots[j]);
    if (!std::isfinite(jn1) || jn1 == 0.0)
      throw Error(ErrorKind::numeric,
                  "disk mode " + std::to_string(j + 1) + ": degenerate normalisation");
    const double angular = n == 0 ? 2.0 * pi : pi;
    data.norms.push_back(1.0 / std::sqrt(angular * 0.5 * jn1 * jn1));
  }

  const int min_order = disk_minimum_order(data.roots);
  if (quadrature_order == 0) quadrature_order = min_order;
  if (quadrature_order < min_order)
    throw Error(ErrorKind::config, "quadrature_order " + std::to_string(quadrature_order) +
                                       " too small for disk basis with m_max " +
                                       std::to_string(m_max) + "; minimum order is " +
                                       std::to_string(min_order));
  basis.domain_ = {DomainKind::disk, quadrature_order};

  const int nr = quadrature_order, nphi = 2 * quadrature_order;
  const auto radial = gauss_legendre(nr, 0.0, 1.0);
  auto& grid = basis.grid_;
  grid.points.resize(Index{nr} * nphi, 2);
  grid.weights.resize(Index{nr} * nphi);
  grid.boundary_distance.resize(Index{nr} * nphi);
  for (int i = 0; i < nr; ++i) {
    for (int k = 0; k < nphi; ++k) {
      const Index p = Index{i} * nphi + k;
      const double phi = 2.0 * pi * k / nphi;
      grid.points.row(p) << radial.nodes(i) * std::cos(phi), radial.nodes(i) * std::sin(phi);
      grid.weights(p) = radial.weights(i) * radial.nodes(i) * 2.0 * pi / nphi;
      grid.boundary_distance(p) = 1.0 - radial.nodes(i);
    }
  }
  basis.data_ = std::move(data);
  basis.dense_ = grid.size() * m_max <= disk_dense_entry_limit;
  if (basis.dense_) basis.dense_tables_ = basis.tables(m_max);
  basis.finalize();
  return basis;
}

EigenBasis build_basis(const DomainSpec& domain, int m_max) {
  return domain.kind == DomainKind::square ? build_square_basis(m_max, domain.quadrature_order)
                                           : build_disk_basis(m_max, domain.quadrature_order);
}

void EigenBasis::finalize() {
  const Index m = size();
  eigenvalues_.resize(m);
  for (Index j = 0; j < m; ++j) eigenvalues_(j) = modes_[j].eigenvalue;
  log_eigenvalues_ = eigenvalues_.array().log();

  nlohmann::json ev = nlohmann::json::array();
  for (Index j = 0; j < m; ++j) ev.push_back(eigenvalues_(j));
  descriptor_ = {{"domain", to_string(domain_.kind)},
                 {"m_max", m},
                 {"quadrature_order", domain_.quadrature_order},
                 {"eigenvalues", std::move(ev)}};
  hash_ = sha256(descriptor_.dump());
  id_ = to_hex(hash_).substr(0, 16);
}

// ---------------------------------------------------------------------------

void EigenBasis::check_index(Index j) const {
  if (j < 0 || j >= size())
    throw Error(ErrorKind::config, "mode index " + std::to_string(j) + " outside basis of size " +
                                       std::to_string(size()));
}

void EigenBasis::check_points(const Points& x) const {
  for (Index p = 0; p < x.rows(); ++p) {
    if (!domain_.contains(x.row(p).transpose()))
      throw Error(ErrorKind::domain, "point (" + std::to_string(x(p, 0)) + ", " +
                                         std::to_string(x(p, 1)) + ") lies outside the " +
                                         to_string(domain_.kind));
  }
}

namespace {

struct DiskModeView {
  int n;          // signed angular order
  double alpha;   // sqrt(lambda)
  double norm;
};

// Angular factor and its phi-derivative.
std::pair<double, double> angular(int n, double phi) {
  if (n == 0) return {1.0, 0.0};
  if (n > 0) return {std::cos(n * phi), -n * std::sin(n * phi)};
  const int k = -n;
  return {std::sin(k * phi), k * std::cos(k * phi)};
}

double disk_value(const DiskModeView& m, double x, double y) {
  const double r = std::hypot(x, y), phi = std::atan2(y, x);
  return m.norm * bessel_j(std::abs(m.n), m.alpha * r) * angular(m.n, phi).first;
}

Eigen::Vector2d disk_gradient(const DiskModeView& m, double x, double y) {
  const double r = std::hypot(x, y), phi = std::atan2(y, x);
  const int n = std::abs(m.n);
  const auto [theta, dtheta] = angular(m.n, phi);
  const double dr = m.norm * m.alpha * bessel_j_derivative(n, m.alpha * r) * theta;
  // (1/r) d/dphi, finite at r = 0
  const double dphi_over_r =
      n == 0 ? 0.0 : m.norm * m.alpha * bessel_j_over_x(n, m.alpha * r) * dtheta;
  const double c = std::cos(phi), s = std::sin(phi);
  return {c * dr - s * dphi_over_r, s * dr + c * dphi_over_r};
}

}  // namespace

Eigen::VectorXd EigenBasis::evaluate_mode(Index j, const Points& x) const {
  check_index(j);
  check_points(x);
  Eigen::VectorXd out(x.rows());
  if (const auto* sq = std::get_if<SquareData>(&data_)) {
    (void)sq;
    const auto [a, b] = modes_[j].multi_index;
    out = square_norm * (a * x.col(0).array()).sin() * (b * x.col(1).array()).sin();
  } else {
    const auto& d = std::get<DiskData>(data_);
    const DiskModeView m{modes_[j].multi_index[0], d.roots[j], d.norms[j]};
    for (Index p = 0; p < x.rows(); ++p) out(p) = disk_value(m, x(p, 0), x(p, 1));
  }
  return out;
}

Gradients EigenBasis::evaluate_mode_gradient(Index j, const Points& x) const {
  check_index(j);
  check_points(x);
  Gradients out(x.rows(), 2);
  if (std::holds_alternative<SquareData>(data_)) {
    const auto [a, b] = modes_[j].multi_index;
    const Eigen::ArrayXd sx = (a * x.col(0).array()).sin(), cx = (a * x.col(0).array()).cos();
    const Eigen::ArrayXd sy = (b * x.col(1).array()).sin(), cy = (b * x.col(1).array()).cos();
    out.col(0) = square_norm * a * cx * sy;
    out.col(1) = square_norm * b * sx * cy;
  } else {
    const auto& d = std::get<DiskData>(data_);
    const DiskModeView m{modes_[j].multi_index[0], d.roots[j], d.norms[j]};
    for (Index p = 0; p < x.rows(); ++p) out.row(p) = disk_gradient(m, x(p, 0), x(p, 1));
  }
  return out;
}

Hessians EigenBasis::evaluate_mode_hessian(Index j, const Points& x) const {
  check_index(j);
  check_points(x);
  if (!std::holds_alternative<SquareData>(data_))
    throw Error(ErrorKind::config, "mode Hessians are only available on the square");
  const auto [a, b] = modes_[j].multi_index;
  const Eigen::ArrayXd sx = (a * x.col(0).array()).sin(), cx = (a * x.col(0).array()).cos();
  const Eigen::ArrayXd sy = (b * x.col(1).array()).sin(), cy = (b * x.col(1).array()).cos();
  Hessians out(x.rows(), 3);
  out.col(0) = -square_norm * a * a * sx * sy;
  out.col(1) = square_norm * a * b * cx * cy;
  out.col(2) = -square_norm * b * b * sx * sy;
  return out;
}

EigenBasis::Tables EigenBasis::tables(Index m) const {
  if (m > size()) throw Error(ErrorKind::config, "tables requested for more modes than the basis holds");
  if (dense_ && dense_tables_.values.cols() >= m)
    return {dense_tables_.values.leftCols(m), dense_tables_.dx.leftCols(m),
            dense_tables_.dy.leftCols(m)};
  const Index npts = grid_.size();
  Tables t{Eigen::MatrixXd(npts, m), Eigen::MatrixXd(npts, m), Eigen::MatrixXd(npts, m)};
  if (const auto* sq = std::get_if<SquareData>(&data_)) {
    const Index n = sq->axis_nodes.size();
    for (Index j = 0; j < m; ++j) {
      const auto [a, b] = modes_[j].multi_index;
      for (Index i = 0; i < n; ++i) {
        const double sx = sq->sin_table(i, a - 1), cx = sq->cos_table(i, a - 1);
        for (Index k = 0; k < n; ++k) {
          const double sy = sq->sin_table(k, b - 1), cy = sq->cos_table(k, b - 1);
          const Index p = i * n + k;
          t.values(p, j) = square_norm * sx * sy;
          t.dx(p, j) = square_norm * a * cx * sy;
          t.dy(p, j) = square_norm * b * sx * cy;
        }
      }
    }
  } else {
    const auto& d = std::get<DiskData>(data_);
    for (Index j = 0; j < m; ++j) {
      const DiskModeView mv{modes_[j].multi_index[0], d.roots[j], d.norms[j]};
      for (Index p = 0; p < npts; ++p) {
        t.values(p, j) = disk_value(mv, grid_.points(p, 0), grid_.points(p, 1));
        const Eigen::Vector2d g = disk_gradient(mv, grid_.points(p, 0), grid_.points(p, 1));
        t.dx(p, j) = g.x();
        t.dy(p, j) = g.y();
      }
    }
  }
  return t;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

Eigen::VectorXd EigenBasis::synthesize(const Eigen::Ref<const Eigen::VectorXd>& c) const {
  if (c.size() > size()) throw Error(ErrorKind::binding, "field has more coefficients than the basis");
  if (dense_) return dense_tables_.values.leftCols(c.size()) * c;
  const auto* sq = std::get_if<SquareData>(&data_);
  if (!sq) throw Error(ErrorKind::config, "grid transforms unavailable for a disk basis this large");
  const Index A = sq->max_wavenumber, n = sq->axis_nodes.size();
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(A, A);
  for (Index j = 0; j < c.size(); ++j)
    coeff(modes_[j].multi_index[0] - 1, modes_[j].multi_index[1] - 1) += c(j);
  Eigen::VectorXd out(n * n);
  Eigen::Map<RowMajor>(out.data(), n, n) =
      square_norm * sq->sin_table * coeff * sq->sin_table.transpose();
  return out;
}

Gradients EigenBasis::synthesize_gradient(const Eigen::Ref<const Eigen::VectorXd>& c) const {
  if (c.size() > size()) throw Error(ErrorKind::binding, "field has more coefficients than the basis");
  Gradients out(grid_.size(), 2);
  if (dense_) {
    out.col(0) = dense_tables_.dx.leftCols(c.size()) * c;
    out.col(1) = dense_tables_.dy.leftCols(c.size()) * c;
    return out;
  }
  const auto* sq = std::get_if<SquareData>(&data_);
  if (!sq) throw Error(ErrorKind::config, "grid transforms unavailable for a disk basis this large");
  const Index A = sq->max_wavenumber, n = sq->axis_nodes.size();
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(A, A);
  for (Index j = 0; j < c.size(); ++j)
    coeff(modes_[j].multi_index[0] - 1, modes_[j].multi_index[1] - 1) += c(j);
  const Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(A, 1.0, static_cast<double>(A));
  const Eigen::MatrixXd dcos = sq->cos_table * k.asDiagonal();
  Eigen::VectorXd gx(n * n), gy(n * n);
  Eigen::Map<RowMajor>(gx.data(), n, n) = square_norm * dcos * coeff * sq->sin_table.transpose();
  Eigen::Map<RowMajor>(gy.data(), n, n) = square_norm * sq->sin_table * coeff * dcos.transpose();
  out.col(0) = gx;
  out.col(1) = gy;
  return out;
}

Eigen::VectorXd EigenBasis::analyze(const Eigen::Ref<const Eigen::VectorXd>& g, Index m) const {
  if (g.size() != grid_.size())
    throw Error(ErrorKind::binding, "grid values do not match the basis grid");
  if (m > size()) throw Error(ErrorKind::binding, "analysis requested beyond the basis size");
  if (dense_) return dense_tables_.values.leftCols(m).transpose() * grid_.weights.cwiseProduct(g);
  const auto* sq = std::get_if<SquareData>(&data_);
  if (!sq) throw Error(ErrorKind::config, "grid transforms unavailable for a disk basis this large");
  const Index n = sq->axis_nodes.size();
  const Eigen::Map<const RowMajor> values(g.data(), n, n);
  const Eigen::MatrixXd weighted =
      sq->axis_weights.asDiagonal() * values * sq->axis_weights.asDiagonal();
  const Eigen::MatrixXd coeff =
      square_norm * sq->sin_table.transpose() * weighted * sq->sin_table;
  Eigen::VectorXd out(m);
  for (Index j = 0; j < m; ++j)
    out(j) = coeff(modes_[j].multi_index[0] - 1, modes_[j].multi_index[1] - 1);
  return out;
}

std::array<Eigen::VectorXd, 2> EigenBasis::project_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& c, Index m) const {
  if (c.size() > size() || m > size())
    throw Error(ErrorKind::binding, "gradient projection beyond the basis size");
  if (!std::holds_alternative<SquareData>(data_)) {
    const Gradients g = synthesize_gradient(c);
    return {analyze(g.col(0), m), analyze(g.col(1), m)};
  }
  // <d/dx w_(a,b), w_(k,b')> = (2/pi) a I(a,k) delta_{b b'}, I = int cos(ax) sin(kx)
  std::array<Eigen::VectorXd, 2> out{Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)};
  for (Index j = 0; j < c.size(); ++j) {
    if (c(j) == 0.0) continue;
    const auto [a, b] = modes_[j].multi_index;
    for (Index i = 0; i < m; ++i) {
      const auto [k, l] = modes_[i].multi_index;
      if (l == b) out[0](i) += c(j) * square_norm * a * cos_sin_integral(a, k);
      if (k == a) out[1](i) += c(j) * square_norm * b * cos_sin_integral(b, l);
    }
  }
  return out;
}

const Eigen::VectorXd& EigenBasis::eigenvalue_power(double p) const {
  std::lock_guard lock(power_cache_->mutex);
  auto it = power_cache_->powers.find(p);
  if (it == power_cache_->powers.end())
    it = power_cache_->powers.emplace(p, (p * log_eigenvalues_.array()).exp().matrix()).first;
  return it->second;
}

double EigenBasis::weyl_constant() const {
  double c = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < size(); ++j) c = std::min(c, eigenvalues_(j) / static_cast<double>(j + 1));
  return c;
}

}  // namespace sqg
