#include "xsearch/porter_stemmer.h"

#include <functional>
#include <initializer_list>

namespace xsearch {

namespace {

bool is_consonant(std::string_view w, std::size_t i) {
  switch (w[i]) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return false;
    case 'y':
      return i == 0 ? true : !is_consonant(w, i - 1);
    default:
      return true;
  }
}

// m in [C](VC)^m[V].
int measure(std::string_view stem) {
  int m = 0;
  std::size_t i = 0;
  const std::size_t n = stem.size();
  while (i < n && is_consonant(stem, i)) ++i;
  while (i < n) {
    while (i < n && !is_consonant(stem, i)) ++i;
    if (i >= n) break;
    while (i < n && is_consonant(stem, i)) ++i;
    ++m;
  }
  return m;
}

bool contains_vowel(std::string_view stem) {
  for (std::size_t i = 0; i < stem.size(); ++i)
    if (!is_consonant(stem, i)) return true;
  return false;
}

bool ends_double_consonant(std::string_view w) {
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// *o: stem ends consonant-vowel-consonant, final consonant not w, x or y.
bool ends_cvc(std::string_view w) {
  const std::size_t n = w.size();
  if (n < 3) return false;
  if (!is_consonant(w, n - 3) || is_consonant(w, n - 2) ||
      !is_consonant(w, n - 1))
    return false;
  const char c = w[n - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() &&
         w.substr(w.size() - suffix.size()) == suffix;
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
  std::function<bool(std::string_view)> condition;
};

// The first rule whose suffix matches decides the step: if its condition
// fails the word is returned unchanged.
std::string apply_rules(const std::string& word,
                        std::initializer_list<Rule> rules) {
  for (const Rule& rule : rules) {
    if (!ends_with(word, rule.suffix)) continue;
    const std::string_view stem =
        std::string_view(word).substr(0, word.size() - rule.suffix.size());
    if (!rule.condition || rule.condition(stem))
      return std::string(stem) + std::string(rule.replacement);
    return word;
  }
  return word;
}

bool positive_measure(std::string_view stem) { return measure(stem) > 0; }
bool measure_gt1(std::string_view stem) { return measure(stem) > 1; }

std::string step1a(const std::string& w) {
  return apply_rules(w, {{"sses", "ss", nullptr},
                         {"ies", "i", nullptr},
                         {"ss", "ss", nullptr},
                         {"s", "", nullptr}});
}

std::string step1b(const std::string& w) {
  if (ends_with(w, "eed")) {
    const std::string stem = w.substr(0, w.size() - 3);
    return measure(stem) > 0 ? stem + "ee" : w;
  }
  std::string stem;
  bool stripped = false;
  for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
    if (ends_with(w, suffix)) {
      stem = w.substr(0, w.size() - suffix.size());
      if (contains_vowel(stem)) {
        stripped = true;
        break;
      }
    }
  }
  if (!stripped) return w;
  if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz"))
    return stem + "e";
  if (ends_double_consonant(stem)) {
    const char last = stem.back();
    if (last != 'l' && last != 's' && last != 'z') stem.pop_back();
    return stem;
  }
  if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
  return stem;
}

std::string step1c(const std::string& w) {
  return apply_rules(w, {{"y", "i", contains_vowel}});
}

std::string step2(const std::string& w) {
  return apply_rules(w, {{"ational", "ate", positive_measure},
                         {"tional", "tion", positive_measure},
                         {"enci", "ence", positive_measure},
                         {"anci", "ance", positive_measure},
                         {"izer", "ize", positive_measure},
                         {"abli", "able", positive_measure},
                         {"alli", "al", positive_measure},
                         {"entli", "ent", positive_measure},
                         {"eli", "e", positive_measure},
                         {"ousli", "ous", positive_measure},
                         {"ization", "ize", positive_measure},
                         {"ation", "ate", positive_measure},
                         {"ator", "ate", positive_measure},
                         {"alism", "al", positive_measure},
                         {"iveness", "ive", positive_measure},
                         {"fulness", "ful", positive_measure},
                         {"ousness", "ous", positive_measure},
                         {"aliti", "al", positive_measure},
                         {"iviti", "ive", positive_measure},
                         {"biliti", "ble", positive_measure}});
}

std::string step3(const std::string& w) {
  return apply_rules(w, {{"icate", "ic", positive_measure},
                         {"ative", "", positive_measure},
                         {"alize", "al", positive_measure},
                         {"iciti", "ic", positive_measure},
                         {"ical", "ic", positive_measure},
                         {"ful", "", positive_measure},
                         {"ness", "", positive_measure}});
}

std::string step4(const std::string& w) {
  const auto ion_condition = [](std::string_view stem) {
    return measure(stem) > 1 && !stem.empty() &&
           (stem.back() == 's' || stem.back() == 't');
  };
  return apply_rules(w, {{"al", "", measure_gt1},
                         {"ance", "", measure_gt1},
                         {"ence", "", measure_gt1},
                         {"er", "", measure_gt1},
                         {"ic", "", measure_gt1},
                         {"able", "", measure_gt1},
                         {"ible", "", measure_gt1},
                         {"ant", "", measure_gt1},
                         {"ement", "", measure_gt1},
                         {"ment", "", measure_gt1},
                         {"ent", "", measure_gt1},
                         {"ion", "", ion_condition},
                         {"ou", "", measure_gt1},
                         {"ism", "", measure_gt1},
                         {"ate", "", measure_gt1},
                         {"iti", "", measure_gt1},
                         {"ous", "", measure_gt1},
                         {"ive", "", measure_gt1},
                         {"ize", "", measure_gt1}});
}

std::string step5a(const std::string& w) {
  if (!ends_with(w, "e")) return w;
  const std::string stem = w.substr(0, w.size() - 1);
  const int m = measure(stem);
  if (m > 1 || (m == 1 && !ends_cvc(stem))) return stem;
  return w;
}

std::string step5b(const std::string& w) {
  if (ends_with(w, "ll") && measure(std::string_view(w).substr(0, w.size() - 1)) > 1)
    return w.substr(0, w.size() - 1);
  return w;
}

}  // namespace

std::string porter_stem(std::string_view word) {
  if (word.empty()) return {};
  std::string w(word);
  w = step1a(w);
  w = step1b(w);
  w = step1c(w);
  w = step2(w);
  w = step3(w);
  w = step4(w);
  w = step5a(w);
  w = step5b(w);
  return w;
}

}  // namespace xsearch
