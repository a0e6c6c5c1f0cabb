#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emclt {

enum class Regularity { smooth, holder, sobolev };

std::string to_string(Regularity r);

/// Damped lacunary cosine series x -> sum_k a_k cos(2^k x + phi_k).
/// Applied coordinate-wise by the lacunary drift.
struct LacunarySeries {
  double alpha = 0.5;
  std::vector<double> coeffs;
  std::vector<double> phases;
  /// e^{i phi_k}; filled by standard() / prepare().
  std::vector<std::complex<double>> rotations;

  /// a_k = 2^{-alpha k} (1 + k)^{-2}, phi_k = k * golden angle, k = 0..K.
  static LacunarySeries standard(double alpha, std::size_t top_index = 14);
  void prepare();

  double value(double x) const;
  void value_and_derivative(double x, double& value, double& derivative) const;
  /// Term-by-term evaluation with std::cos/std::sin; reference for value().
  double value_direct(double x) const;
  double derivative_direct(double x) const;
  /// sup_k |a_k| 2^{alpha k} / rho_k with rho_k = (1 + k)^{-2}: finite iff the
  /// coefficients decay as required for membership in C^{alpha+}.
  double envelope_constant() const;
};

/// Drift coefficient b: R^d -> R^d with regularity metadata.
class Drift {
 public:
  using Field = std::function<void(std::span<const double> x, std::span<double> out)>;

  Drift() = default;

  /// C-infinity drift with its Jacobian; jacobian(x) is d x d row-major,
  /// entry (l, j) = d_j b^l.
  static Drift smooth(std::string name, std::size_t dim, Field value, Field jacobian);
  /// Coordinate-wise lacunary series. `tag` is smooth for mollified series.
  static Drift lacunary(std::size_t dim, LacunarySeries series, std::string name = {},
                        Regularity tag = Regularity::holder);
  /// Bounded drift of class W^alpha_m supported in the ball of radius
  /// `support_radius`. No gradient is available.
  static Drift sobolev(std::string name, std::size_t dim, double alpha, double m,
                       double support_radius, Field value);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  Regularity regularity() const { return regularity_; }
  double alpha() const { return alpha_; }
  double integrability() const { return m_; }
  double support_radius() const { return support_radius_; }
  bool has_gradient() const { return static_cast<bool>(jacobian_); }
  const LacunarySeries* series() const { return series_ ? &*series_ : nullptr; }

  void value(std::span<const double> x, std::span<double> out) const { value_(x, out); }
  void jacobian(std::span<const double> x, std::span<double> out) const;
  /// Direct access to the value callable, e.g. for mollification.
  const Field& value_field() const { return value_; }

 private:
  std::string name_;
  std::size_t dim_ = 0;
  Regularity regularity_ = Regularity::smooth;
  double alpha_ = 1.0;
  double m_ = 0.0;
  double support_radius_ = 0.0;
  Field value_;
  Field jacobian_;
  std::optional<LacunarySeries> series_;
};

/// sigma: R^d -> R^{d x d} with first and second derivatives.
/// Layouts: sigma (l, i) -> l*d + i; grad (l, i, j) = d_j sigma^{(l,i)} ->
/// (l*d + i)*d + j; hess (l, i, j, k) = d_j d_k sigma^{(l,i)}.
struct Diffusion {
  using Field = std::function<void(std::span<const double> x, std::span<double> out)>;

  std::string name;
  std::size_t dim = 0;
  Field value;
  Field grad;
  Field hess;
};

struct ModelSpec {
  std::size_t dim = 1;
  std::vector<double> x0;
  Drift drift;
  Diffusion diffusion;
  double lambda = 1.0;
};

/// Result of the lattice spot-checks of the model assumptions.
struct AssumptionReport {
  double min_ellipticity_ratio = 0.0;  // min y*(sigma sigma*)y / (lambda^2 |y|^2)
  double max_sigma = 0.0;
  double max_grad_sigma = 0.0;
  double max_hess_sigma = 0.0;
  double lacunary_envelope = 0.0;  // 0 when the drift is not lacunary
  bool ok() const { return min_ellipticity_ratio >= 1.0 - 1e-12; }
};

/// Spot-checks ellipticity (smallest eigenvalue of sigma sigma*, i.e. the
/// worst direction y) and the C^2 bounds of sigma on a uniform lattice in
/// [-4, 4]^d.
AssumptionReport check_assumptions(const ModelSpec& model);

/// Throws std::invalid_argument when dimensions disagree or the ellipticity
/// spot-check fails.
void validate(const ModelSpec& model);

}  // namespace emclt
