#include "shapegam/family.hpp"

#include <cmath>
#include <string>

#include "shapegam/error.hpp"

namespace shapegam {

std::string_view Family::name() const noexcept {
  switch (kind_) {
    case FamilyKind::Gaussian: return "gaussian";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Binomial: return "binomial";
  }
  return "gaussian";
}

double Family::cumulant(double eta) const noexcept {
  switch (kind_) {
    case FamilyKind::Gaussian: return 0.5 * eta * eta;
    case FamilyKind::Poisson: return std::exp(eta);
    case FamilyKind::Binomial:
      return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
  }
  return 0.0;
}

double Family::mean(double eta) const noexcept {
  switch (kind_) {
    case FamilyKind::Gaussian: return eta;
    case FamilyKind::Poisson: return std::exp(eta);
    case FamilyKind::Binomial:
      if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
      return std::exp(eta) / (1.0 + std::exp(eta));
  }
  return eta;
}

double Family::variance(double mu) const noexcept {
  switch (kind_) {
    case FamilyKind::Gaussian: return 1.0;
    case FamilyKind::Poisson: return mu;
    case FamilyKind::Binomial: return mu * (1.0 - mu);
  }
  return 1.0;
}

double Family::link(double mu) const noexcept {
  switch (kind_) {
    case FamilyKind::Gaussian: return mu;
    case FamilyKind::Poisson: return std::log(mu);
    case FamilyKind::Binomial: return std::log(mu / (1.0 - mu));
  }
  return mu;
}

Eigen::VectorXd Family::mean(const Eigen::VectorXd& eta) const {
  return eta.unaryExpr([this](double e) { return mean(e); });
}

Eigen::VectorXd Family::link(const Eigen::VectorXd& mu) const {
  return mu.unaryExpr([this](double m) { return link(m); });
}

double Family::negloglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) total += cumulant(eta[i]) - y[i] * eta[i];
  return total;
}

double Family::deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    const double mi = mu[i];
    switch (kind_) {
      case FamilyKind::Gaussian: total += (yi - mi) * (yi - mi); break;
      case FamilyKind::Poisson:
        total += 2.0 * ((yi > 0.0 ? yi * std::log(yi / mi) : 0.0) - (yi - mi));
        break;
      case FamilyKind::Binomial:
        total += -2.0 * (yi > 0.5 ? std::log(mi) : std::log1p(-mi));
        break;
    }
  }
  return total;
}

void Family::validate(const Eigen::VectorXd& y) const {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = y[i];
    const std::string where = " (observation " + std::to_string(i + 1) + ")";
    if (!std::isfinite(v)) throw InvalidInput("response is not finite" + where);
    if (kind_ == FamilyKind::Poisson && v < 0.0) {
      throw InvalidInput("poisson response must be non-negative" + where);
    }
    if (kind_ == FamilyKind::Binomial && v != 0.0 && v != 1.0) {
      throw InvalidInput("binomial response must be 0 or 1" + where);
    }
  }
}

Eigen::VectorXd Family::starting_mean(const Eigen::VectorXd& y) const {
  switch (kind_) {
    case FamilyKind::Gaussian: return y;
    case FamilyKind::Poisson: return (y.array() + 0.5).matrix();
    case FamilyKind::Binomial: return ((y.array() + 0.5) / 2.0).matrix();
  }
  return y;
}

std::optional<Family> parse_family(std::string_view name) noexcept {
  if (name == "g" || name == "gaussian") return Family::gaussian();
  if (name == "p" || name == "poisson") return Family::poisson();
  if (name == "b" || name == "binomial") return Family::binomial();
  return std::nullopt;
}

}  // namespace shapegam
