#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace gplab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Trapping potential with closed-form derivatives: V, grad V, D2V, and the
/// Laplacian Lap V as its own closed-form scalar with grad and Hessian.
/// Evaluators are exact differentiation of the kind's formula, not AD.
class Potential {
 public:
  virtual ~Potential() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec grad(const Vec& x) const = 0;
  virtual Mat hess(const Vec& x) const = 0;
  virtual double lapl(const Vec& x) const = 0;
  virtual Vec grad_lapl(const Vec& x) const = 0;
  virtual Mat hess_lapl(const Vec& x) const = 0;
  virtual std::string describe() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

/// V = sum_j c_j x_j^2 + offset
class HarmonicPotential : public Potential {
 public:
  HarmonicPotential(int dim, Vec coeffs, double offset = 0.0);
  int dim() const override { return dim_; }
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override;
  Mat hess(const Vec& x) const override;
  double lapl(const Vec& x) const override;
  Vec grad_lapl(const Vec& x) const override;
  Mat hess_lapl(const Vec& x) const override;
  std::string describe() const override;
  nlohmann::json to_json() const override;

 private:
  int dim_;
  Vec c_;
  double offset_;
};

/// V = amp (|x| - r0)^2 + offset; Gamma is the sphere |x| = r0.
class RingPotential : public Potential {
 public:
  RingPotential(int dim, double radius, double amplitude = 1.0, double offset = 0.0);
  int dim() const override { return dim_; }
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override;
  Mat hess(const Vec& x) const override;
  double lapl(const Vec& x) const override;
  Vec grad_lapl(const Vec& x) const override;
  Mat hess_lapl(const Vec& x) const override;
  std::string describe() const override;
  nlohmann::json to_json() const override;
  double radius() const { return r0_; }

 private:
  int dim_;
  double r0_, amp_, offset_;
};

/// V = amp (s - 1)^2 + offset with s = sqrt(sum x_j^2 / c_j^2).
class EllipseRingPotential : public Potential {
 public:
  EllipseRingPotential(int dim, Vec semi_axes, double amplitude = 1.0, double offset = 0.0);
  int dim() const override { return dim_; }
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override;
  Mat hess(const Vec& x) const override;
  double lapl(const Vec& x) const override;
  Vec grad_lapl(const Vec& x) const override;
  Mat hess_lapl(const Vec& x) const override;
  std::string describe() const override;
  nlohmann::json to_json() const override;

 private:
  int dim_;
  Vec c_;
  double amp_, offset_;
};

/// V = F^2 + 1 with F = sum x_j^2/a_j^2 - 1, globally confining; agrees with
/// the tube formula everywhere, and Gamma = {F = 0}.
class EllipsoidQuarticPotential : public Potential {
 public:
  EllipsoidQuarticPotential(int dim, Vec semi_axes);
  int dim() const override { return dim_; }
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override;
  Mat hess(const Vec& x) const override;
  double lapl(const Vec& x) const override;
  Vec grad_lapl(const Vec& x) const override;
  Mat hess_lapl(const Vec& x) const override;
  std::string describe() const override;
  nlohmann::json to_json() const override;
  const Vec& semi_axes() const { return a_; }

 private:
  int dim_;
  Vec a_;
};

/// V = prod_i |x - x_i|^{p_i}, evaluated through log-derivatives.
class PowerProductPotential : public Potential {
 public:
  PowerProductPotential(int dim, std::vector<Vec> centers, std::vector<double> powers);
  int dim() const override { return dim_; }
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override;
  Mat hess(const Vec& x) const override;
  double lapl(const Vec& x) const override;
  Vec grad_lapl(const Vec& x) const override;
  Mat hess_lapl(const Vec& x) const override;
  std::string describe() const override;
  nlohmann::json to_json() const override;

 private:
  int dim_;
  std::vector<Vec> centers_;
  std::vector<double> powers_;
};

/// V = sum of monomials c * x^alpha (exact monomial calculus).
class UserPolynomialPotential : public Potential {
 public:
  struct Term {
    double coeff;
    std::array<int, 3> exps;  // unused trailing exponents are 0
  };
  UserPolynomialPotential(int dim, std::vector<Term> terms);
  int dim() const override { return dim_; }
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override;
  Mat hess(const Vec& x) const override;
  double lapl(const Vec& x) const override;
  Vec grad_lapl(const Vec& x) const override;
  Mat hess_lapl(const Vec& x) const override;
  std::string describe() const override;
  nlohmann::json to_json() const override;

 private:
  double eval_terms(const std::vector<Term>& t, const Vec& x) const;
  std::vector<Term> diff(const std::vector<Term>& t, int axis) const;
  int dim_;
  std::vector<Term> terms_;      // V
  std::vector<Term> lap_terms_;  // Lap V
};

/// Catalog entry from a JSON config {"kind": "...", "params": {...}}.
std::unique_ptr<Potential> make_potential(int dim, const nlohmann::json& spec);

}  // namespace gplab
