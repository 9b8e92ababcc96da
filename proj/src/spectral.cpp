#include "sqg/spectral.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

namespace sqg {

SpectralField make_field(const EigenBasis& basis, Eigen::VectorXd coefficients) {
  if (coefficients.size() > basis.size())
    throw Error(ErrorKind::binding, "field with " + std::to_string(coefficients.size()) +
                                        " coefficients exceeds basis size " +
                                        std::to_string(basis.size()));
  if (!coefficients.allFinite()) throw Error(ErrorKind::config, "field has non-finite coefficients");
  return {std::move(coefficients), basis.id()};
}

SpectralField unit_field(const EigenBasis& basis, Index j, Index m) {
  if (j < 0 || j >= m) throw Error(ErrorKind::config, "unit_field: index outside field length");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  c(j) = 1.0;
  return make_field(basis, std::move(c));
}

void check_binding(const EigenBasis& basis, const SpectralField& f) {
  if (f.basis_id != basis.id())
    throw Error(ErrorKind::binding,
                "field bound to basis " + f.basis_id + ", not " + basis.id());
  if (f.size() > basis.size())
    throw Error(ErrorKind::binding, "field longer than its basis");
}

SpectralField fractional_laplacian(const EigenBasis& basis, const SpectralField& f, double s) {
  check_binding(basis, f);
  return {apply_power(basis, f.coefficients, s), f.basis_id};
}

double sobolev_norm(const EigenBasis& basis, const SpectralField& f, double alpha) {
  check_binding(basis, f);
  return std::sqrt(weighted_square_norm(basis, f.coefficients, alpha));
}

double hamiltonian(const EigenBasis& basis, const SpectralField& theta) {
  check_binding(basis, theta);
  return weighted_square_norm(basis, theta.coefficients, -0.5);
}

SpectralField project(const SpectralField& f, Index m) {
  if (m < 0) throw Error(ErrorKind::config, "project: negative truncation");
  SpectralField out = f;
  if (m < f.size()) out.coefficients.tail(f.size() - m).setZero();
  return out;
}

double tail_norm(const EigenBasis& basis, const SpectralField& f, Index m, double alpha) {
  check_binding(basis, f);
  if (m < 0) throw Error(ErrorKind::config, "tail_norm: negative truncation");
  if (m >= f.size()) return 0.0;
  const Index n = f.size() - m;
  const auto& w = basis.eigenvalue_power(alpha);
  return std::sqrt((w.segment(m, n).array() * f.coefficients.tail(n).array().square()).sum());
}

double pairing(const SpectralField& f, const SpectralField& g) {
  if (f.basis_id != g.basis_id) throw Error(ErrorKind::binding, "pairing across different bases");
  const Index n = std::min(f.size(), g.size());
  return f.coefficients.head(n).dot(g.coefficients.head(n));
}

PhysicalField synthesize(const EigenBasis& basis, const SpectralField& f) {
  check_binding(basis, f);
  return {basis.synthesize(f.coefficients), basis.id()};
}

SpectralField analyze(const EigenBasis& basis, const PhysicalField& g, Index m) {
  if (g.basis_id != basis.id())
    throw Error(ErrorKind::binding, "grid field bound to basis " + g.basis_id + ", not " + basis.id());
  return {basis.analyze(g.values.col(0), m), basis.id()};
}

PhysicalField velocity(const EigenBasis& basis, const SpectralField& theta) {
  check_binding(basis, theta);
  const Gradients grad_psi = basis.synthesize_gradient(apply_power(basis, theta.coefficients, -1.0));
  Eigen::MatrixXd u(grad_psi.rows(), 2);
  u.col(0) = -grad_psi.col(1);
  u.col(1) = grad_psi.col(0);
  return {std::move(u), basis.id()};
}

Eigen::VectorXd velocity_divergence(const EigenBasis& basis, const SpectralField& theta) {
  check_binding(basis, theta);
  const Eigen::VectorXd psi = apply_power(basis, theta.coefficients, -1.0);
  const Index npts = basis.grid().size();
  Eigen::VectorXd du1_dx = Eigen::VectorXd::Zero(npts), du2_dy = Eigen::VectorXd::Zero(npts);
  for (Index j = 0; j < psi.size(); ++j) {
    if (psi(j) == 0.0) continue;
    const Hessians h = basis.evaluate_mode_hessian(j, basis.grid().points);
    du1_dx -= psi(j) * h.col(1);  // u1 = -d_y psi
    du2_dy += psi(j) * h.col(1);  // u2 = d_x psi
  }
  const Eigen::VectorXd div = du1_dx + du2_dy;
  return div;
}

double grid_gradient_norm(const EigenBasis& basis, const SpectralField& f) {
  check_binding(basis, f);
  const Gradients g = basis.synthesize_gradient(f.coefficients);
  return std::sqrt(basis.grid().weights.dot(g.rowwise().squaredNorm()));
}

nlohmann::json to_json(const SpectralField& f) {
  return {{"basis_id", f.basis_id},
          {"coefficients", std::vector<double>(f.coefficients.data(),
                                               f.coefficients.data() + f.coefficients.size())}};
}

SpectralField field_from_json(const nlohmann::json& j) {
  try {
    const auto c = j.at("coefficients").get<std::vector<double>>();
    return {Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Index>(c.size())),
            j.at("basis_id").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("malformed spectral field JSON: ") + e.what());
  }
}

std::vector<std::uint8_t> to_binary(const Eigen::VectorXd& c) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 8 * static_cast<std::size_t>(c.size()));
  const auto n = static_cast<std::uint32_t>(c.size());
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(n >> (8 * b)));
  for (Index i = 0; i < c.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(c(i));
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  return out;
}

Eigen::VectorXd from_binary(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw Error(ErrorKind::corruption, "binary field shorter than its length prefix");
  std::uint32_t n = 0;
  for (int b = 0; b < 4; ++b) n |= static_cast<std::uint32_t>(bytes[b]) << (8 * b);
  if (bytes.size() != 4 + 8 * static_cast<std::size_t>(n))
    throw Error(ErrorKind::corruption, "binary field length prefix " + std::to_string(n) +
                                           " does not match payload of " +
                                           std::to_string(bytes.size() - 4) + " bytes");
  Eigen::VectorXd c(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(bytes[4 + 8 * i + b]) << (8 * b);
    c(i) = std::bit_cast<double>(bits);
  }
  return c;
}

void write_binary(const std::filesystem::path& path, const Eigen::VectorXd& c) {
  const auto bytes = to_binary(c);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Eigen::VectorXd read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_binary(bytes);
}

}  // namespace sqg
