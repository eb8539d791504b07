#include "toruslab/perturbations.hpp"

#include "toruslab/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace toruslab {

namespace {

constexpr double kPi = std::numbers::pi;

double angle(const TrigTerm& t, const Vec& x) {
  double a = t.phase;
  for (int j = 0; j < x.size(); ++j) a += kPi * t.freq[j] * x[j];
  return a;
}

int l1(const TrigTerm& t, int n) {
  int s = 0;
  for (int j = 0; j < n; ++j) s += std::abs(t.freq[j]);
  return s;
}

template <class Weight>
double row_max(const std::vector<TrigTerm>& terms, int n, Weight w) {
  std::array<double, kMaxDim> rows{};
  for (const auto& t : terms) rows[t.row] += std::abs(t.coeff) * w(t);
  double m = 0;
  for (int i = 0; i < n; ++i) m = std::max(m, rows[i]);
  return m;
}

}  // namespace

PerturbationField::PerturbationField(int n, std::vector<TrigTerm> terms) : n_(n), terms_(std::move(terms)) {
  if (n < 1 || n > kMaxDim) throw DomainError("perturbation dimension out of range");
  for (const auto& t : terms_) {
    if (t.row < 0 || t.row >= n) throw DomainError("perturbation row out of range");
    for (int j = 0; j < kMaxDim; ++j) {
      if (std::abs(t.freq[j]) > kMaxFrequency) throw DomainError("perturbation frequency above 3");
      if (j >= n && t.freq[j] != 0) throw DomainError("frequency on a missing axis");
    }
    if (!std::isfinite(t.coeff) || !std::isfinite(t.phase)) throw DomainError("non-finite perturbation term");
  }
}

Vec PerturbationField::value(const Vec& x) const {
  Vec v = Vec::Zero(n_);
  for (const auto& t : terms_) v[t.row] += t.coeff * std::cos(angle(t, x));
  return v;
}

Mat PerturbationField::derivative(const Vec& x) const {
  Mat d = Mat::Zero(n_, n_);
  for (const auto& t : terms_) {
    double s = -t.coeff * kPi * std::sin(angle(t, x));
    for (int j = 0; j < n_; ++j) d(t.row, j) += s * t.freq[j];
  }
  return d;
}

double PerturbationField::c0_bound() const {
  return row_max(terms_, n_, [](const TrigTerm&) { return 1.0; });
}

double PerturbationField::derivative_bound() const {
  return row_max(terms_, n_, [&](const TrigTerm& t) { return kPi * l1(t, n_); });
}

double PerturbationField::c1_bound() const {
  return row_max(terms_, n_, [&](const TrigTerm& t) { return std::max(1.0, kPi * l1(t, n_)); });
}

PerturbationField PerturbationField::scaled(double s) const {
  auto terms = terms_;
  for (auto& t : terms) t.coeff *= s;
  return PerturbationField(n_, std::move(terms));
}

nlohmann::json PerturbationField::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : terms_) {
    std::vector<int> m(t.freq.begin(), t.freq.begin() + n_);
    terms.push_back({{"row", t.row}, {"freq", m}, {"coeff", t.coeff}, {"phase", t.phase}});
  }
  return {{"n", n_},
          {"form", "coeff * cos(pi <freq, x> + phase)"},
          {"norm", "max(sup|P|_inf, sup max-row-sum |DP|)"},
          {"terms", terms},
          {"certified", {{"c0", c0_bound()}, {"derivative", derivative_bound()}, {"c1", c1_bound()}}}};
}

PerturbationField PerturbationField::from_json(const nlohmann::json& j) {
  try {
    int n = j.at("n").get<int>();
    std::vector<TrigTerm> terms;
    for (const auto& e : j.at("terms")) {
      TrigTerm t;
      t.row = e.at("row").get<int>();
      auto m = e.at("freq").get<std::vector<int>>();
      if (static_cast<int>(m.size()) != n) throw DomainError("frequency vector has the wrong length");
      for (int k = 0; k < n; ++k) t.freq[k] = m[k];
      t.coeff = e.at("coeff").get<double>();
      t.phase = e.value("phase", 0.0);
      terms.push_back(t);
    }
    return PerturbationField(n, std::move(terms));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("bad perturbation JSON: ") + e.what());
  }
}

PerturbationField make_perturbation(int n, std::uint64_t seed, double budget, int terms_per_row) {
  if (!(budget >= 0) || !std::isfinite(budget)) throw DomainError("perturbation budget must be >= 0");
  if (terms_per_row < 1) throw DomainError("terms_per_row must be positive");
  if (budget == 0) return PerturbationField(n, {});
  auto rng = block_rng(seed, 0, static_cast<std::uint64_t>(n));
  std::uniform_int_distribution<int> F(-kMaxFrequency, kMaxFrequency);
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> Ph(0, 2 * kPi);
  std::vector<TrigTerm> terms;
  for (int row = 0; row < n; ++row) {
    for (int k = 0; k < terms_per_row; ++k) {
      TrigTerm t;
      t.row = row;
      for (int j = 0; j < n; ++j) t.freq[j] = F(rng);
      t.coeff = N(rng);
      t.phase = Ph(rng);
      terms.push_back(t);
    }
  }
  PerturbationField raw(n, std::move(terms));
  return raw.scaled(budget / raw.c1_bound());
}

PerturbationField adversarial_perturbation(const Vec& at, double size) {
  const int n = static_cast<int>(at.size());
  TrigTerm t;
  t.row = n - 1;
  t.freq[n - 1] = 1;
  t.coeff = size / kPi;
  // cos(pi (x - a) - pi/2) = sin(pi (x - a))
  t.phase = -kPi * at[n - 1] - kPi / 2;
  return PerturbationField(n, {t});
}

PerturbedMap::PerturbedMap(TorusMapPtr base, PerturbationField field) : base_(std::move(base)), field_(std::move(field)) {
  if (!base_) throw DomainError("null base map");
  if (!field_.zero() && field_.dim() != base_->dim()) throw DomainError("perturbation dimension mismatch");
}

Vec PerturbedMap::apply(const Vec& x) const {
  if (field_.zero()) return base_->apply(x);
  Vec w = wrap(x).coords();
  return wrap(Vec(base_->apply(w) + field_.value(w))).coords();
}

Mat PerturbedMap::jacobian(const Vec& x) const {
  if (field_.zero()) return base_->jacobian(x);
  Vec w = wrap(x).coords();
  return base_->jacobian(w) + field_.derivative(w);
}

TorusMapPtr apply_perturbation(TorusMapPtr base, PerturbationField field) {
  return std::make_shared<PerturbedMap>(std::move(base), std::move(field));
}

NormSweep sweep_norms(const PerturbationField& field, int samples, std::uint64_t seed) {
  NormSweep out;
  if (field.zero()) return out;
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> U(-1, 1);
  const int n = field.dim();
  for (int i = 0; i < samples; ++i) {
    Vec x(n);
    for (int j = 0; j < n; ++j) x[j] = U(rng);
    out.c0 = std::max(out.c0, field.value(x).cwiseAbs().maxCoeff());
    out.derivative = std::max(out.derivative, field.derivative(x).cwiseAbs().rowwise().sum().maxCoeff());
  }
  return out;
}

}  // namespace toruslab
