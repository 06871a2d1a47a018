#include "flab/words.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace flab {

SymmetricWord::SymmetricWord(std::vector<int> letters) : letters_(std::move(letters)) {
  for (int l : letters_) {
    if (l < 0) throw DomainError("SymmetricWord: negative letter index");
  }
  std::sort(letters_.begin(), letters_.end());
}

std::string SymmetricWord::to_string() const {
  if (letters_.empty()) return "vac";
  std::ostringstream os;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (i) os << '.';
    os << 'f' << letters_[i];
  }
  return os.str();
}

WordCombination single_word(const SymmetricWord& w) { return {{cplx(1.0), w}}; }

namespace {

void multisets(int alphabet, int degree, int start, std::vector<int>& cur,
               std::vector<SymmetricWord>& out) {
  if (static_cast<int>(cur.size()) == degree) {
    out.emplace_back(cur);
    return;
  }
  for (int a = start; a < alphabet; ++a) {
    cur.push_back(a);
    multisets(alphabet, degree, a, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<SymmetricWord> words_of_degree(int alphabet, int degree) {
  if (alphabet < 1 || degree < 0) throw DomainError("words_of_degree: bad alphabet or degree");
  std::vector<SymmetricWord> out;
  std::vector<int> cur;
  multisets(alphabet, degree, 0, cur, out);
  return out;
}

std::vector<SymmetricWord> words_up_to_degree(int alphabet, int max_degree) {
  std::vector<SymmetricWord> out;
  for (int j = 0; j <= max_degree; ++j) {
    auto w = words_of_degree(alphabet, j);
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

cplx permanent(const CMat& kernel, const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.size() != cols.size()) return cplx(0.0);
  std::vector<int> idx(cols.size());
  std::iota(idx.begin(), idx.end(), 0);
  cplx total(0.0);
  do {
    cplx term(1.0);
    for (std::size_t i = 0; i < rows.size(); ++i) term *= kernel(rows[i], cols[idx[i]]);
    total += term;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return total;
}

}  // namespace flab
