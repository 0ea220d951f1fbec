#include "gplab/potential.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gplab {

namespace {
constexpr double kTinyRadius = 1e-14;
}

// ---------------------------------------------------------------- harmonic

HarmonicPotential::HarmonicPotential(int dim, Vec coeffs, double offset)
    : dim_(dim), c_(std::move(coeffs)), offset_(offset) {
  if (c_.size() != dim_) throw std::invalid_argument("harmonic: coeffs size != dim");
}

double HarmonicPotential::value(const Vec& x) const {
  return (c_.array() * x.array().square()).sum() + offset_;
}
Vec HarmonicPotential::grad(const Vec& x) const { return 2.0 * c_.cwiseProduct(x); }
Mat HarmonicPotential::hess(const Vec& x) const {
  (void)x;
  return (2.0 * c_).asDiagonal();
}
double HarmonicPotential::lapl(const Vec&) const { return 2.0 * c_.sum(); }
Vec HarmonicPotential::grad_lapl(const Vec&) const { return Vec::Zero(dim_); }
Mat HarmonicPotential::hess_lapl(const Vec&) const { return Mat::Zero(dim_, dim_); }
std::string HarmonicPotential::describe() const {
  std::ostringstream s;
  s << "V(x) = ";
  for (int j = 0; j < dim_; ++j) s << (j ? " + " : "") << c_[j] << "*x" << j + 1 << "^2";
  if (offset_ != 0.0) s << " + " << offset_;
  return s.str();
}
nlohmann::json HarmonicPotential::to_json() const {
  return {{"kind", "harmonic"},
          {"params", {{"coeffs", std::vector<double>(c_.data(), c_.data() + dim_)}, {"offset", offset_}}}};
}

// -------------------------------------------------------------------- ring

RingPotential::RingPotential(int dim, double radius, double amplitude, double offset)
    : dim_(dim), r0_(radius), amp_(amplitude), offset_(offset) {
  if (radius <= 0) throw std::invalid_argument("ring: radius must be positive");
}

double RingPotential::value(const Vec& x) const {
  const double r = x.norm();
  return amp_ * (r - r0_) * (r - r0_) + offset_;
}
Vec RingPotential::grad(const Vec& x) const {
  const double r = x.norm();
  if (r < kTinyRadius) return Vec::Zero(dim_);
  return 2.0 * amp_ * (r - r0_) / r * x;
}
Mat RingPotential::hess(const Vec& x) const {
  const double r = x.norm();
  if (r < kTinyRadius) return 2.0 * amp_ * Mat::Identity(dim_, dim_);
  const Vec u = x / r;
  const Mat proj = Mat::Identity(dim_, dim_) - u * u.transpose();
  return 2.0 * amp_ * (u * u.transpose() + (1.0 - r0_ / r) * proj);
}
// radial g(r) := Lap V = 2 amp [N - (N-1) r0 / r]
double RingPotential::lapl(const Vec& x) const {
  const double r = std::max(x.norm(), kTinyRadius);
  return 2.0 * amp_ * (dim_ - (dim_ - 1) * r0_ / r);
}
Vec RingPotential::grad_lapl(const Vec& x) const {
  const double r = x.norm();
  if (r < kTinyRadius) return Vec::Zero(dim_);
  const double gp = 2.0 * amp_ * (dim_ - 1) * r0_ / (r * r);
  return gp / r * x;
}
Mat RingPotential::hess_lapl(const Vec& x) const {
  const double r = x.norm();
  if (r < kTinyRadius) return Mat::Zero(dim_, dim_);
  const double gp = 2.0 * amp_ * (dim_ - 1) * r0_ / (r * r);
  const double gpp = -4.0 * amp_ * (dim_ - 1) * r0_ / (r * r * r);
  const Vec u = x / r;
  const Mat proj = Mat::Identity(dim_, dim_) - u * u.transpose();
  return gpp * u * u.transpose() + gp / r * proj;
}
std::string RingPotential::describe() const {
  std::ostringstream s;
  s << "V(x) = " << amp_ << "*(|x| - " << r0_ << ")^2";
  if (offset_ != 0.0) s << " + " << offset_;
  return s.str();
}
nlohmann::json RingPotential::to_json() const {
  return {{"kind", "ring"},
          {"params", {{"radius", r0_}, {"amplitude", amp_}, {"offset", offset_}}}};
}

// ------------------------------------------------------------ ellipse ring

EllipseRingPotential::EllipseRingPotential(int dim, Vec semi_axes, double amplitude, double offset)
    : dim_(dim), c_(std::move(semi_axes)), amp_(amplitude), offset_(offset) {
  if (c_.size() != dim_) throw std::invalid_argument("ellipse_ring: semi_axes size != dim");
  if ((c_.array() <= 0).any()) throw std::invalid_argument("ellipse_ring: semi_axes must be positive");
}

double EllipseRingPotential::value(const Vec& x) const {
  const double s = std::sqrt((x.array() / c_.array()).square().sum());
  return amp_ * (s - 1.0) * (s - 1.0) + offset_;
}
Vec EllipseRingPotential::grad(const Vec& x) const {
  const double s = std::max(std::sqrt((x.array() / c_.array()).square().sum()), kTinyRadius);
  const Vec gq = 2.0 * (x.array() / c_.array().square()).matrix();
  return amp_ * (1.0 - 1.0 / s) * gq;
}
Mat EllipseRingPotential::hess(const Vec& x) const {
  const double s = std::max(std::sqrt((x.array() / c_.array()).square().sum()), kTinyRadius);
  const double u = 1.0 / s;
  const Vec gq = 2.0 * (x.array() / c_.array().square()).matrix();
  const Mat d = (2.0 / c_.array().square()).matrix().asDiagonal();
  return amp_ * ((1.0 - u) * d + 0.5 * u * u * u * gq * gq.transpose());
}
double EllipseRingPotential::lapl(const Vec& x) const {
  const double s = std::max(std::sqrt((x.array() / c_.array()).square().sum()), kTinyRadius);
  const double u = 1.0 / s;
  const double T = (2.0 / c_.array().square()).sum();
  const double P = (4.0 * x.array().square() / c_.array().pow(4)).sum();
  return amp_ * ((1.0 - u) * T + 0.5 * u * u * u * P);
}
Vec EllipseRingPotential::grad_lapl(const Vec& x) const {
  const double s = std::max(std::sqrt((x.array() / c_.array()).square().sum()), kTinyRadius);
  const double u = 1.0 / s;
  const double u3 = u * u * u, u5 = u3 * u * u;
  const double T = (2.0 / c_.array().square()).sum();
  const double P = (4.0 * x.array().square() / c_.array().pow(4)).sum();
  const Vec gq = 2.0 * (x.array() / c_.array().square()).matrix();
  const Vec gP = 8.0 * (x.array() / c_.array().pow(4)).matrix();
  return amp_ * (0.5 * T * u3 * gq + 0.5 * u3 * gP - 0.75 * P * u5 * gq);
}
Mat EllipseRingPotential::hess_lapl(const Vec& x) const {
  const double s = std::max(std::sqrt((x.array() / c_.array()).square().sum()), kTinyRadius);
  const double u = 1.0 / s;
  const double u3 = u * u * u, u5 = u3 * u * u, u7 = u5 * u * u;
  const double T = (2.0 / c_.array().square()).sum();
  const double P = (4.0 * x.array().square() / c_.array().pow(4)).sum();
  const Vec gq = 2.0 * (x.array() / c_.array().square()).matrix();
  const Vec gP = 8.0 * (x.array() / c_.array().pow(4)).matrix();
  const Mat d = (2.0 / c_.array().square()).matrix().asDiagonal();
  const Mat d2P = (8.0 / c_.array().pow(4)).matrix().asDiagonal();
  Mat out = 0.5 * T * u3 * d - 0.75 * T * u5 * gq * gq.transpose();
  out += 0.5 * u3 * d2P - 0.75 * u5 * (gq * gP.transpose() + gP * gq.transpose());
  out += (15.0 / 8.0) * P * u7 * gq * gq.transpose() - 0.75 * P * u5 * d;
  return amp_ * out;
}
std::string EllipseRingPotential::describe() const {
  std::ostringstream s;
  s << "V(x) = " << amp_ << "*(sqrt(";
  for (int j = 0; j < dim_; ++j) s << (j ? " + " : "") << "x" << j + 1 << "^2/" << c_[j] * c_[j];
  s << ") - 1)^2";
  if (offset_ != 0.0) s << " + " << offset_;
  return s.str();
}
nlohmann::json EllipseRingPotential::to_json() const {
  return {{"kind", "ellipse_ring"},
          {"params", {{"semi_axes", std::vector<double>(c_.data(), c_.data() + dim_)},
                      {"amplitude", amp_},
                      {"offset", offset_}}}};
}

// ------------------------------------------------------- ellipsoid quartic

EllipsoidQuarticPotential::EllipsoidQuarticPotential(int dim, Vec semi_axes)
    : dim_(dim), a_(std::move(semi_axes)) {
  if (a_.size() != dim_) throw std::invalid_argument("ellipsoid_quartic: semi_axes size != dim");
  if ((a_.array() <= 0).any()) throw std::invalid_argument("ellipsoid_quartic: semi_axes must be positive");
}

double EllipsoidQuarticPotential::value(const Vec& x) const {
  const double F = (x.array() / a_.array()).square().sum() - 1.0;
  return F * F + 1.0;
}
Vec EllipsoidQuarticPotential::grad(const Vec& x) const {
  const double F = (x.array() / a_.array()).square().sum() - 1.0;
  const Vec gF = 2.0 * (x.array() / a_.array().square()).matrix();
  return 2.0 * F * gF;
}
Mat EllipsoidQuarticPotential::hess(const Vec& x) const {
  const double F = (x.array() / a_.array()).square().sum() - 1.0;
  const Vec gF = 2.0 * (x.array() / a_.array().square()).matrix();
  Mat out = 2.0 * gF * gF.transpose();
  out += (4.0 * F / a_.array().square()).matrix().asDiagonal();
  return out;
}
double EllipsoidQuarticPotential::lapl(const Vec& x) const {
  const double F = (x.array() / a_.array()).square().sum() - 1.0;
  const double S = (2.0 / a_.array().square()).sum();
  return 2.0 * F * S + (8.0 * x.array().square() / a_.array().pow(4)).sum();
}
Vec EllipsoidQuarticPotential::grad_lapl(const Vec& x) const {
  const double S = (2.0 / a_.array().square()).sum();
  const Vec gF = 2.0 * (x.array() / a_.array().square()).matrix();
  return 2.0 * S * gF + 16.0 * (x.array() / a_.array().pow(4)).matrix();
}
Mat EllipsoidQuarticPotential::hess_lapl(const Vec& x) const {
  (void)x;
  const double S = (2.0 / a_.array().square()).sum();
  return ((4.0 * S / a_.array().square()) + (16.0 / a_.array().pow(4))).matrix().asDiagonal();
}
std::string EllipsoidQuarticPotential::describe() const {
  std::ostringstream s;
  s << "V(x) = (";
  for (int j = 0; j < dim_; ++j) s << (j ? " + " : "") << "x" << j + 1 << "^2/" << a_[j] * a_[j];
  s << " - 1)^2 + 1";
  return s.str();
}
nlohmann::json EllipsoidQuarticPotential::to_json() const {
  return {{"kind", "ellipsoid_quartic"},
          {"params", {{"semi_axes", std::vector<double>(a_.data(), a_.data() + dim_)}}}};
}

// ------------------------------------------------------------ power product

PowerProductPotential::PowerProductPotential(int dim, std::vector<Vec> centers,
                                             std::vector<double> powers)
    : dim_(dim), centers_(std::move(centers)), powers_(std::move(powers)) {
  if (centers_.size() != powers_.size() || centers_.empty())
    throw std::invalid_argument("power_product: centers/powers mismatch");
  for (const auto& c : centers_)
    if (c.size() != dim_) throw std::invalid_argument("power_product: center dim mismatch");
  for (double p : powers_)
    if (p <= 0) throw std::invalid_argument("power_product: powers must be positive");
}

double PowerProductPotential::value(const Vec& x) const {
  double v = 1.0;
  for (std::size_t i = 0; i < centers_.size(); ++i)
    v *= std::pow((x - centers_[i]).norm(), powers_[i]);
  return v;
}

namespace {
struct LogDerivs {
  double V;
  Vec gl;       // grad of l = sum p_i ln r_i
  Mat d2l;
  double lapl_l;
  Vec grad_lapl_l;
  Mat hess_lapl_l;
  Mat d3l_gl;  // D3 l contracted with gl
};

LogDerivs log_derivs(int N, const std::vector<Vec>& centers, const std::vector<double>& powers,
                     const Vec& x) {
  LogDerivs L;
  L.V = 1.0;
  L.gl = Vec::Zero(N);
  L.d2l = Mat::Zero(N, N);
  L.lapl_l = 0.0;
  L.grad_lapl_l = Vec::Zero(N);
  L.hess_lapl_l = Mat::Zero(N, N);
  const Mat I = Mat::Identity(N, N);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const Vec y = x - centers[i];
    const double r2 = std::max(y.squaredNorm(), kTinyRadius);
    const double p = powers[i];
    L.V *= std::pow(std::sqrt(r2), p);
    L.gl += p / r2 * y;
    L.d2l += p * (I / r2 - 2.0 / (r2 * r2) * y * y.transpose());
    L.lapl_l += p * (N - 2) / r2;
    L.grad_lapl_l += p * (N - 2) * (-2.0 / (r2 * r2)) * y;
    L.hess_lapl_l += p * (N - 2) * (-2.0 * I / (r2 * r2) + 8.0 / (r2 * r2 * r2) * y * y.transpose());
  }
  // D3 l contracted with gl (needed by D2 of |gl|^2)
  L.d3l_gl = Mat::Zero(N, N);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const Vec y = x - centers[i];
    const double r2 = std::max(y.squaredNorm(), kTinyRadius);
    const double p = powers[i];
    const double yv = y.dot(L.gl);
    L.d3l_gl += p * (-2.0 / (r2 * r2) * (yv * I + y * L.gl.transpose() + L.gl * y.transpose()) +
                     8.0 * yv / (r2 * r2 * r2) * y * y.transpose());
  }
  return L;
}
}  // namespace

Vec PowerProductPotential::grad(const Vec& x) const {
  auto L = log_derivs(dim_, centers_, powers_, x);
  return L.V * L.gl;
}
Mat PowerProductPotential::hess(const Vec& x) const {
  auto L = log_derivs(dim_, centers_, powers_, x);
  return L.V * (L.gl * L.gl.transpose() + L.d2l);
}
double PowerProductPotential::lapl(const Vec& x) const {
  auto L = log_derivs(dim_, centers_, powers_, x);
  return L.V * (L.gl.squaredNorm() + L.lapl_l);
}
Vec PowerProductPotential::grad_lapl(const Vec& x) const {
  auto L = log_derivs(dim_, centers_, powers_, x);
  const double R = L.gl.squaredNorm() + L.lapl_l;
  const Vec gR = 2.0 * L.d2l * L.gl + L.grad_lapl_l;
  return L.V * (R * L.gl + gR);
}
Mat PowerProductPotential::hess_lapl(const Vec& x) const {
  auto L = log_derivs(dim_, centers_, powers_, x);
  const double R = L.gl.squaredNorm() + L.lapl_l;
  const Vec gR = 2.0 * L.d2l * L.gl + L.grad_lapl_l;
  const Mat d2R = 2.0 * L.d3l_gl + 2.0 * L.d2l * L.d2l + L.hess_lapl_l;
  return L.V * (R * (L.gl * L.gl.transpose() + L.d2l) + L.gl * gR.transpose() +
                gR * L.gl.transpose() + d2R);
}
std::string PowerProductPotential::describe() const {
  std::ostringstream s;
  s << "V(x) = ";
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    s << (i ? " * " : "") << "|x - (";
    for (int j = 0; j < dim_; ++j) s << (j ? "," : "") << centers_[i][j];
    s << ")|^" << powers_[i];
  }
  return s.str();
}
nlohmann::json PowerProductPotential::to_json() const {
  nlohmann::json cs = nlohmann::json::array(), ps = nlohmann::json::array();
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    cs.push_back(std::vector<double>(centers_[i].data(), centers_[i].data() + dim_));
    ps.push_back(powers_[i]);
  }
  return {{"kind", "power_product"}, {"params", {{"centers", cs}, {"powers", ps}}}};
}

// --------------------------------------------------------------- polynomial

UserPolynomialPotential::UserPolynomialPotential(int dim, std::vector<Term> terms)
    : dim_(dim), terms_(std::move(terms)) {
  for (const auto& t : terms_)
    for (int j = dim_; j < 3; ++j)
      if (t.exps[j] != 0) throw std::invalid_argument("user_polynomial: exponent beyond dim");
  for (int ax = 0; ax < dim_; ++ax) {
    auto d2 = diff(diff(terms_, ax), ax);
    lap_terms_.insert(lap_terms_.end(), d2.begin(), d2.end());
  }
}

double UserPolynomialPotential::eval_terms(const std::vector<Term>& t, const Vec& x) const {
  double v = 0;
  for (const auto& term : t) {
    double m = term.coeff;
    for (int j = 0; j < dim_; ++j) m *= std::pow(x[j], term.exps[j]);
    v += m;
  }
  return v;
}
std::vector<UserPolynomialPotential::Term> UserPolynomialPotential::diff(
    const std::vector<Term>& t, int axis) const {
  std::vector<Term> out;
  for (const auto& term : t) {
    if (term.exps[axis] == 0) continue;
    Term d = term;
    d.coeff *= term.exps[axis];
    d.exps[axis] -= 1;
    out.push_back(d);
  }
  return out;
}
double UserPolynomialPotential::value(const Vec& x) const { return eval_terms(terms_, x); }
Vec UserPolynomialPotential::grad(const Vec& x) const {
  Vec g(dim_);
  for (int j = 0; j < dim_; ++j) g[j] = eval_terms(diff(terms_, j), x);
  return g;
}
Mat UserPolynomialPotential::hess(const Vec& x) const {
  Mat h(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) h(i, j) = h(j, i) = eval_terms(diff(diff(terms_, i), j), x);
  return h;
}
double UserPolynomialPotential::lapl(const Vec& x) const { return eval_terms(lap_terms_, x); }
Vec UserPolynomialPotential::grad_lapl(const Vec& x) const {
  Vec g(dim_);
  for (int j = 0; j < dim_; ++j) g[j] = eval_terms(diff(lap_terms_, j), x);
  return g;
}
Mat UserPolynomialPotential::hess_lapl(const Vec& x) const {
  Mat h(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) h(i, j) = h(j, i) = eval_terms(diff(diff(lap_terms_, i), j), x);
  return h;
}
std::string UserPolynomialPotential::describe() const {
  std::ostringstream s;
  s << "V(x) = ";
  bool first = true;
  for (const auto& t : terms_) {
    s << (first ? "" : " + ") << t.coeff;
    for (int j = 0; j < dim_; ++j)
      if (t.exps[j] > 0) s << "*x" << j + 1 << "^" << t.exps[j];
    first = false;
  }
  return s.str();
}
nlohmann::json UserPolynomialPotential::to_json() const {
  nlohmann::json ts = nlohmann::json::array();
  for (const auto& t : terms_)
    ts.push_back({{"coeff", t.coeff}, {"exps", {t.exps[0], t.exps[1], t.exps[2]}}});
  return {{"kind", "user_polynomial"}, {"params", {{"terms", ts}}}};
}

// ------------------------------------------------------------------ factory

std::unique_ptr<Potential> make_potential(int dim, const nlohmann::json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  const nlohmann::json params = spec.value("params", nlohmann::json::object());
  auto vec_param = [&](const char* name, double fallback) {
    Vec v(dim);
    if (params.contains(name)) {
      auto arr = params.at(name).get<std::vector<double>>();
      if (static_cast<int>(arr.size()) != dim) throw std::invalid_argument("potential param dim mismatch");
      for (int j = 0; j < dim; ++j) v[j] = arr[j];
    } else {
      v.setConstant(fallback);
    }
    return v;
  };
  if (kind == "harmonic")
    return std::make_unique<HarmonicPotential>(dim, vec_param("coeffs", 1.0),
                                               params.value("offset", 0.0));
  if (kind == "ring")
    return std::make_unique<RingPotential>(dim, params.value("radius", 1.0),
                                           params.value("amplitude", 1.0), params.value("offset", 0.0));
  if (kind == "ellipse_ring")
    return std::make_unique<EllipseRingPotential>(dim, vec_param("semi_axes", 1.0),
                                                  params.value("amplitude", 1.0),
                                                  params.value("offset", 0.0));
  if (kind == "ellipsoid_quartic")
    return std::make_unique<EllipsoidQuarticPotential>(dim, vec_param("semi_axes", 1.0));
  if (kind == "power_product") {
    std::vector<Vec> centers;
    std::vector<double> powers = params.at("powers").get<std::vector<double>>();
    for (const auto& c : params.at("centers")) {
      auto arr = c.get<std::vector<double>>();
      Vec v(dim);
      for (int j = 0; j < dim; ++j) v[j] = arr.at(j);
      centers.push_back(v);
    }
    return std::make_unique<PowerProductPotential>(dim, std::move(centers), std::move(powers));
  }
  if (kind == "user_polynomial") {
    std::vector<UserPolynomialPotential::Term> terms;
    for (const auto& t : params.at("terms")) {
      UserPolynomialPotential::Term term{t.at("coeff").get<double>(), {0, 0, 0}};
      auto e = t.at("exps").get<std::vector<int>>();
      for (std::size_t j = 0; j < e.size() && j < 3; ++j) term.exps[j] = e[j];
      terms.push_back(term);
    }
    return std::make_unique<UserPolynomialPotential>(dim, std::move(terms));
  }
  throw std::invalid_argument("unknown potential kind: " + kind);
}

}  // namespace gplab
