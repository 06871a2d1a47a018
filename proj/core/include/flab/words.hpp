#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "flab/types.hpp"

namespace flab {

/// A symmetric tensor word: a multiset of single-particle basis indices.
/// The empty word is the vacuum.
class SymmetricWord {
 public:
  SymmetricWord() = default;
  explicit SymmetricWord(std::vector<int> letters);

  int degree() const { return static_cast<int>(letters_.size()); }
  const std::vector<int>& letters() const { return letters_; }
  std::string to_string() const;

  auto operator<=>(const SymmetricWord&) const = default;

 private:
  std::vector<int> letters_;  // sorted ascending
};

/// A finite linear combination of words.
using WordCombination = std::vector<std::pair<cplx, SymmetricWord>>;

WordCombination single_word(const SymmetricWord& w);

/// All multisets of `degree` letters drawn from {0, ..., alphabet-1}, in
/// lexicographic order.
std::vector<SymmetricWord> words_of_degree(int alphabet, int degree);

/// Words of every degree 0..max_degree, grouped by degree.
std::vector<SymmetricWord> words_up_to_degree(int alphabet, int max_degree);

/// sum over permutations of prod_i kernel(a_i, b_{pi(i)}), by explicit
/// enumeration. Intended for sizes <= 6.
cplx permanent(const CMat& kernel, const std::vector<int>& rows,
               const std::vector<int>& cols);

}  // namespace flab
