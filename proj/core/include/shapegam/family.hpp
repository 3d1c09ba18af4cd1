#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace shapegam {

enum class FamilyKind { Gaussian, Poisson, Binomial };

/// Exponential-family distribution with its canonical link: identity for
/// Gaussian, log for Poisson, logit for binomial. All functions act on the
/// natural parameter eta (= theta under a canonical link).
class Family {
 public:
  constexpr explicit Family(FamilyKind kind = FamilyKind::Gaussian) noexcept : kind_(kind) {}

  static constexpr Family gaussian() noexcept { return Family(FamilyKind::Gaussian); }
  static constexpr Family poisson() noexcept { return Family(FamilyKind::Poisson); }
  static constexpr Family binomial() noexcept { return Family(FamilyKind::Binomial); }

  FamilyKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;
  /// Gaussian estimates the dispersion; the others fix it at 1.
  bool estimates_dispersion() const noexcept { return kind_ == FamilyKind::Gaussian; }

  /// Log-partition function b(eta).
  double cumulant(double eta) const noexcept;
  /// b'(eta), the mean.
  double mean(double eta) const noexcept;
  double variance(double mu) const noexcept;
  double link(double mu) const noexcept;

  Eigen::VectorXd mean(const Eigen::VectorXd& eta) const;
  Eigen::VectorXd link(const Eigen::VectorXd& mu) const;

  /// sum b(eta_i) - y_i eta_i.
  double negloglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) const;
  double deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) const;

  /// Throws InvalidInput unless y is finite and in the family's support
  /// (Poisson: non-negative; binomial: 0/1).
  void validate(const Eigen::VectorXd& y) const;
  /// Mean used to start the iteration: y, y + 1/2, or (y + 1/2) / 2.
  Eigen::VectorXd starting_mean(const Eigen::VectorXd& y) const;

  friend bool operator==(Family a, Family b) noexcept { return a.kind_ == b.kind_; }

 private:
  FamilyKind kind_;
};

/// Accepts "gaussian", "poisson", "binomial" and their first letters.
std::optional<Family> parse_family(std::string_view name) noexcept;

}  // namespace shapegam
