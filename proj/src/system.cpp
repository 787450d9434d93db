#include "rfv/system.hpp"

#include <algorithm>
#include <cmath>

namespace rfv {

void Dimensions::validate() const {
  if (inputs < 1 || outputs < 1) throw ModelError("dimensions need at least one input and one output");
  if (rule_inputs() > geometry::kMaxDimension) {
    throw ModelError("rule input arity " + std::to_string(rule_inputs()) + " exceeds 8");
  }
}

double FuzzyRule::consequent(std::size_t row, std::span<const double> input) const {
  const double* a = coefficients.data() + row * columns();
  double s = a[0];
  for (std::size_t j = 0; j < input.size(); ++j) s += a[j + 1] * input[j];
  return s;
}

FuzzyRule FuzzyRule::constant(geometry::Point site, std::span<const double> outputs, bool frozen) {
  FuzzyRule rule;
  const std::size_t cols = site.size() + 1;
  rule.site = std::move(site);
  rule.coefficients.assign(outputs.size() * cols, 0.0);
  for (std::size_t i = 0; i < outputs.size(); ++i) rule.coefficients[i * cols] = outputs[i];
  rule.frozen = frozen;
  return rule;
}

void FuzzyRule::validate(const Dimensions& dims) const {
  if (site.size() != dims.rule_inputs()) throw ModelError("rule site arity does not match l + r");
  if (coefficients.size() != dims.rule_outputs() * dims.coefficient_columns()) {
    throw ModelError("rule coefficient matrix must be (m + r) x (l + r + 1)");
  }
  for (double v : site) {
    if (!std::isfinite(v)) throw ModelError("rule site has a non-finite coordinate");
  }
  for (double v : coefficients) {
    if (!std::isfinite(v)) throw ModelError("rule has a non-finite coefficient");
  }
}

RfvSystem::RfvSystem(Dimensions dims, std::vector<FuzzyRule> rules, geometry::Box domain,
                     geometry::TriangulationOptions options)
    : dims_(dims), rules_(std::move(rules)), domain_(std::move(domain)), options_(options) {
  dims_.validate();
  if (domain_.dimension() != dims_.rule_inputs()) throw ModelError("domain dimension must equal l + r");
  for (const FuzzyRule& r : rules_) r.validate(dims_);
  order_rules();
  initial_state_.assign(dims_.internal, 0.0);
  state_ = initial_state_;
  rebuild();
}

RfvSystem::RfvSystem(Dimensions dims, std::vector<FuzzyRule> rules)
    : RfvSystem(dims, std::move(rules), geometry::Box::unit(dims.rule_inputs())) {}

void RfvSystem::order_rules() {
  std::stable_partition(rules_.begin(), rules_.end(), [](const FuzzyRule& r) { return r.frozen; });
}

const geometry::Triangulation& RfvSystem::triangulation() const {
  if (stale_ || !triangulation_) throw ModelError("rules changed; call rebuild() first");
  return *triangulation_;
}

std::size_t RfvSystem::frozen_count() const {
  return static_cast<std::size_t>(std::count_if(rules_.begin(), rules_.end(), [](const FuzzyRule& r) { return r.frozen; }));
}

void RfvSystem::rebuild() {
  if (rules_.empty()) throw ModelError("a system needs at least one rule");
  std::vector<geometry::Point> sites;
  sites.reserve(rules_.size());
  for (const FuzzyRule& r : rules_) sites.push_back(r.site);
  triangulation_ = std::make_shared<const geometry::Triangulation>(
      geometry::Triangulation::build(sites, domain_, options_));
  hint_ = 0;
  stale_ = false;
}

void RfvSystem::add_rule(FuzzyRule rule) {
  rule.validate(dims_);
  rules_.push_back(std::move(rule));
  order_rules();
  stale_ = true;
}

void RfvSystem::remove_rule(std::size_t index) {
  if (index >= rules_.size()) throw ModelError("rule index out of range");
  rules_.erase(rules_.begin() + static_cast<std::ptrdiff_t>(index));
  stale_ = true;
}

std::vector<double> RfvSystem::clamp_state(std::span<const double> values) const {
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t axis = dims_.inputs + i;
    out[i] = std::clamp(out[i], domain_.lower[axis], domain_.upper[axis]);
  }
  return out;
}

void RfvSystem::set_initial_state(std::vector<double> state) {
  if (state.size() != dims_.internal) throw ModelError("initial state must have r entries");
  initial_state_ = clamp_state(state);
  reset_state();
}

void RfvSystem::set_state(std::vector<double> state) {
  if (state.size() != dims_.internal) throw ModelError("state must have r entries");
  for (double v : state) {
    if (!std::isfinite(v)) throw ModelError("state must be finite");
  }
  state_ = clamp_state(state);
}

void RfvSystem::reset_state() {
  state_ = initial_state_;
  hint_ = 0;
}

std::vector<double> RfvSystem::rule_input(std::span<const double> x) const {
  std::vector<double> input(dims_.rule_inputs());
  std::copy(x.begin(), x.end(), input.begin());
  std::copy(state_.begin(), state_.end(), input.begin() + static_cast<std::ptrdiff_t>(dims_.inputs));
  return domain_.clamp(input);
}

StepResult RfvSystem::infer_step(std::span<const double> x) {
  if (x.size() != dims_.inputs) {
    throw ModelError("expected " + std::to_string(dims_.inputs) + " external inputs, got " + std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw ModelError("external input is not finite");
  }
  const geometry::Triangulation& tri = triangulation();
  const std::vector<double> input = rule_input(x);

  StepResult result;
  result.memberships = tri.membership_vector(input, &hint_);
  std::vector<double> out(dims_.rule_outputs(), 0.0);
  for (std::size_t k = 0; k < rules_.size(); ++k) {
    const double mu = result.memberships[k];
    if (mu == 0.0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += rules_[k].consequent(i, input) * mu;
  }
  result.external_outputs.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(dims_.outputs));
  result.internal_outputs.assign(out.begin() + static_cast<std::ptrdiff_t>(dims_.outputs), out.end());
  for (double v : result.internal_outputs) {
    if (!std::isfinite(v)) throw ModelError("internal output is not finite");
  }
  state_ = clamp_state(result.internal_outputs);
  return result;
}

std::vector<StepResult> RfvSystem::evaluate_sequence(std::span<const std::vector<double>> xs) {
  reset_state();
  std::vector<StepResult> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(infer_step(x));
  return out;
}

}  // namespace rfv
