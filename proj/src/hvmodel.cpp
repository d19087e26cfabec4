#include "bellopt/hvmodel.hpp"

#include <random>
#include <sstream>

namespace bellopt {

bool HvStrategy::within(const BoxBounds& a_bounds,
                        const BoxBounds& b_bounds) const {
  if (Index(a_bounds.size()) != a.size() || Index(b_bounds.size()) != b.size())
    return false;
  for (Index j = 0; j < a.size(); ++j)
    if (a(j) < a_bounds[std::size_t(j)].lo || a(j) > a_bounds[std::size_t(j)].hi)
      return false;
  for (Index k = 0; k < b.size(); ++k)
    if (b(k) < b_bounds[std::size_t(k)].lo || b(k) > b_bounds[std::size_t(k)].hi)
      return false;
  return true;
}

HvModel::HvModel(std::vector<HvStrategy> strategies, Vector weights)
    : s_(std::move(strategies)), p_(std::move(weights)) {
  if (s_.empty()) throw Error(ErrorCode::invalid_input, "HV model has no strategies");
  if (p_.size() != Index(s_.size()))
    throw Error(ErrorCode::dimension_mismatch,
                "HV model needs one weight per strategy");
  for (const auto& s : s_)
    if (s.a.size() != s_.front().a.size() || s.b.size() != s_.front().b.size() ||
        !s.a.allFinite() || !s.b.allFinite())
      throw Error(ErrorCode::dimension_mismatch,
                  "HV strategies disagree in shape or are non-finite");
  if ((p_.array() < 0).any())
    throw Error(ErrorCode::invalid_input, "HV weights must be non-negative");
  if (std::abs(p_.sum() - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "HV weights sum to " << p_.sum() << ", expected 1";
    throw Error(ErrorCode::invalid_input, os.str());
  }
}

double hv_expectation(const WeightMatrix& w, const HvModel& model) {
  if (model.na() != w.rows() || model.nb() != w.cols())
    throw Error(ErrorCode::dimension_mismatch,
                "HV model shape does not match the weight matrix");
  double s = 0;
  for (std::size_t l = 0; l < model.strategies().size(); ++l) {
    const auto& st = model.strategies()[l];
    s += model.weights()(Index(l)) * st.a.dot(w.matrix() * st.b);
  }
  return s;
}

Matrix hv_correlation(const HvModel& model) {
  Matrix c = Matrix::Zero(model.na(), model.nb());
  for (std::size_t l = 0; l < model.strategies().size(); ++l) {
    const auto& st = model.strategies()[l];
    c += model.weights()(Index(l)) * st.a * st.b.transpose();
  }
  return c;
}

HvModelSampler::HvModelSampler(BoxBounds a_bounds, BoxBounds b_bounds,
                               std::uint64_t seed, Index max_strategies)
    : a_bounds_(std::move(a_bounds)),
      b_bounds_(std::move(b_bounds)),
      max_strategies_(max_strategies),
      rng_(derive_rng(seed, {0x4876})) {
  if (a_bounds_.size() < 2 || b_bounds_.size() < 2 || max_strategies_ < 1)
    throw Error(ErrorCode::invalid_input, "HV sampler needs N_a, N_b >= 2");
  for (const auto* side : {&a_bounds_, &b_bounds_})
    for (const auto& iv : *side)
      if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
        throw Error(ErrorCode::invalid_input, "malformed HV box interval");
}

HvModel HvModelSampler::next() {
  std::uniform_int_distribution<Index> count(1, max_strategies_);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  auto draw = [&](const BoxBounds& box, bool corner) {
    Vector v(Index(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i) {
      const double t = corner ? (u01(rng_) < 0.5 ? 0.0 : 1.0) : u01(rng_);
      v(Index(i)) = box[i].lo + t * (box[i].hi - box[i].lo);
    }
    return v;
  };
  const Index n = count(rng_);
  std::vector<HvStrategy> strategies;
  Vector p(n);
  for (Index l = 0; l < n; ++l) {
    const bool corner = u01(rng_) < 0.5;
    strategies.push_back({draw(a_bounds_, corner), draw(b_bounds_, corner)});
    p(l) = expo(rng_);
  }
  p /= p.sum();
  // Renormalize once more so the sum is within an ulp or two of one.
  p /= p.sum();
  return HvModel(std::move(strategies), std::move(p));
}

std::vector<HvModel> random_hv_models(const BoxBounds& a_bounds,
                                      const BoxBounds& b_bounds,
                                      std::size_t count, std::uint64_t seed) {
  std::vector<HvModel> out;
  if (count == 0) return out;
  HvModelSampler sampler(a_bounds, b_bounds, seed);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.next());
  return out;
}

HvModel threshold_model(const WeightMatrix& w) {
  CornerPair c = hv_norm_argmax(w);
  return HvModel({HvStrategy{std::move(c.a), std::move(c.b)}},
                 Vector::Ones(1));
}

const char* to_string(BellClass c) noexcept {
  switch (c) {
    case BellClass::local: return "local";
    case BellClass::bell_violating: return "bell_violating";
    case BellClass::at_quantum_bound: return "at_quantum_bound";
  }
  return "unknown";
}

BellClass classify(double value, const WeightMatrix& w,
                   const BoxBounds& a_bounds, const BoxBounds& b_bounds,
                   double tol) {
  const double v = std::abs(value);
  const double quantum_bound = w.dim_scale() * w.op_norm();
  if (std::abs(v - quantum_bound) <= tol) return BellClass::at_quantum_bound;
  if (v > hv_box_norm(w, a_bounds, b_bounds) + tol)
    return BellClass::bell_violating;
  return BellClass::local;
}

BellClass classify(double value, const WeightMatrix& w, double tol) {
  return classify(value, w, unit_box(w.rows()), unit_box(w.cols()), tol);
}

}  // namespace bellopt
