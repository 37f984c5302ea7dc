#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adbn::model {

inline constexpr double kCptRowTolerance = 1e-10;

// Mixed-radix index over a list of cardinalities; the first entry is the most
// significant digit. An empty list has exactly one configuration (index 0).
std::size_t config_count(std::span<const std::size_t> cards);
std::size_t flatten(std::span<const std::size_t> cards, std::span<const std::size_t> values);
std::vector<std::size_t> unflatten(std::span<const std::size_t> cards, std::size_t index);

// Conditional probability table P(child | parents) with one row per parent
// configuration (mixed-radix order of parent_cards).
class Cpt {
 public:
  Cpt() = default;
  // Validates shape, entries in [0,1] and row sums; throws ValidationError.
  Cpt(std::size_t child_card, std::vector<std::size_t> parent_cards, std::vector<double> table);

  // Single-row table with no parents.
  static Cpt prior(std::vector<double> distribution);

  std::size_t child_card() const noexcept { return child_card_; }
  const std::vector<std::size_t>& parent_cards() const noexcept { return parent_cards_; }
  std::size_t num_parents() const noexcept { return parent_cards_.size(); }
  std::size_t num_rows() const noexcept { return num_rows_; }

  std::span<const double> row(std::size_t r) const {
    return {table_.data() + r * child_card_, child_card_};
  }
  std::size_t row_index(std::span<const std::size_t> parent_values) const {
    return flatten(parent_cards_, parent_values);
  }
  double operator()(std::size_t child, std::size_t row) const {
    return table_[row * child_card_ + child];
  }
  const std::vector<double>& table() const noexcept { return table_; }

  friend bool operator==(const Cpt&, const Cpt&) = default;

 private:
  std::size_t child_card_ = 0;
  std::vector<std::size_t> parent_cards_;
  std::size_t num_rows_ = 0;
  std::vector<double> table_;
};

}  // namespace adbn::model
