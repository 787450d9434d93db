#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfv/geometry.hpp"

namespace rfv {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// l external inputs, r internal units, m external outputs.
struct Dimensions {
  std::size_t inputs = 1;
  std::size_t internal = 0;
  std::size_t outputs = 1;

  std::size_t rule_inputs() const noexcept { return inputs + internal; }
  std::size_t rule_outputs() const noexcept { return outputs + internal; }
  std::size_t coefficient_columns() const noexcept { return rule_inputs() + 1; }
  void validate() const;

  friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

/// One Voronoi site with its affine Takagi-Sugeno consequent.
///
/// `coefficients` is row-major with one row per rule output (external
/// outputs first, then internal units) and one column per rule input plus a
/// leading constant column.
struct FuzzyRule {
  geometry::Point site;
  std::vector<double> coefficients;
  bool frozen = false;

  std::size_t input_count() const noexcept { return site.size(); }
  std::size_t columns() const noexcept { return site.size() + 1; }
  std::size_t output_count() const noexcept { return coefficients.size() / columns(); }

  double& at(std::size_t row, std::size_t col) { return coefficients[row * columns() + col]; }
  double at(std::size_t row, std::size_t col) const { return coefficients[row * columns() + col]; }

  /// a_0 + sum_j a_j * input_j for one output row.
  double consequent(std::size_t row, std::span<const double> input) const;

  /// Rule whose every output is the given constant.
  static FuzzyRule constant(geometry::Point site, std::span<const double> outputs, bool frozen = false);

  void validate(const Dimensions& dims) const;

  friend bool operator==(const FuzzyRule&, const FuzzyRule&) = default;
};

struct StepResult {
  std::vector<double> external_outputs;
  /// Raw internal outputs; the fed-back state is these clamped to the domain.
  std::vector<double> internal_outputs;
  std::vector<double> memberships;
};

/// Recurrent fuzzy Voronoi system: rules, their triangulation and the
/// internal-unit state. Copies share the triangulation and own their state.
class RfvSystem {
 public:
  RfvSystem(Dimensions dims, std::vector<FuzzyRule> rules, geometry::Box domain,
            geometry::TriangulationOptions options = {});
  RfvSystem(Dimensions dims, std::vector<FuzzyRule> rules);

  const Dimensions& dims() const noexcept { return dims_; }
  const std::vector<FuzzyRule>& rules() const noexcept { return rules_; }
  const geometry::Box& domain() const noexcept { return domain_; }
  const geometry::Triangulation& triangulation() const;
  const geometry::TriangulationOptions& options() const noexcept { return options_; }
  const std::vector<double>& state() const noexcept { return state_; }
  std::size_t frozen_count() const;

  /// One time step: I = x:state, memberships, per-rule affine outputs summed,
  /// then the clamped internal outputs become the next state.
  StepResult infer_step(std::span<const double> x);

  /// Restores the initial state (zeros unless configured otherwise).
  void reset_state();
  void set_initial_state(std::vector<double> state);
  const std::vector<double>& initial_state() const noexcept { return initial_state_; }
  void set_state(std::vector<double> state);

  /// reset_state followed by infer_step over every input vector.
  std::vector<StepResult> evaluate_sequence(std::span<const std::vector<double>> xs);

  /// Rule edits invalidate the triangulation until rebuild() is called.
  void add_rule(FuzzyRule rule);
  void remove_rule(std::size_t index);
  void rebuild();

  /// Input vector I = clamp(x:state) for the current state.
  std::vector<double> rule_input(std::span<const double> x) const;

 private:
  void order_rules();
  std::vector<double> clamp_state(std::span<const double> values) const;

  Dimensions dims_;
  std::vector<FuzzyRule> rules_;
  geometry::Box domain_;
  geometry::TriangulationOptions options_;
  std::shared_ptr<const geometry::Triangulation> triangulation_;
  std::vector<double> initial_state_;
  std::vector<double> state_;
  std::size_t hint_ = 0;
  bool stale_ = false;
};

}  // namespace rfv
