#include "adbn/model/cpt.hpp"

#include <cmath>
#include <string>

#include "adbn/error.hpp"

namespace adbn::model {

std::size_t config_count(std::span<const std::size_t> cards) {
  std::size_t n = 1;
  for (std::size_t c : cards) n *= c;
  return n;
}

std::size_t flatten(std::span<const std::size_t> cards, std::span<const std::size_t> values) {
  if (cards.size() != values.size()) {
    throw Error(Errc::DomainMismatch, "configuration arity mismatch");
  }
  std::size_t index = 0;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    if (values[i] >= cards[i]) throw Error(Errc::DomainMismatch, "value out of range");
    index = index * cards[i] + values[i];
  }
  return index;
}

std::vector<std::size_t> unflatten(std::span<const std::size_t> cards, std::size_t index) {
  std::vector<std::size_t> values(cards.size());
  for (std::size_t i = cards.size(); i-- > 0;) {
    values[i] = index % cards[i];
    index /= cards[i];
  }
  return values;
}

Cpt::Cpt(std::size_t child_card, std::vector<std::size_t> parent_cards, std::vector<double> table)
    : child_card_(child_card),
      parent_cards_(std::move(parent_cards)),
      num_rows_(config_count(parent_cards_)),
      table_(std::move(table)) {
  if (child_card_ == 0) throw Error(Errc::ValidationError, "CPT child cardinality is zero");
  if (table_.size() != num_rows_ * child_card_) {
    throw Error(Errc::ValidationError, "CPT table has " + std::to_string(table_.size()) +
                                           " entries, expected " +
                                           std::to_string(num_rows_ * child_card_));
  }
  for (std::size_t r = 0; r < num_rows_; ++r) {
    double sum = 0.0;
    for (double p : row(r)) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(Errc::ValidationError, "CPT entry outside [0,1] in row " + std::to_string(r));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kCptRowTolerance) {
      throw Error(Errc::ValidationError, "CPT row " + std::to_string(r) + " does not sum to 1");
    }
  }
}

Cpt Cpt::prior(std::vector<double> distribution) {
  const std::size_t n = distribution.size();
  return Cpt(n, {}, std::move(distribution));
}

}  // namespace adbn::model
