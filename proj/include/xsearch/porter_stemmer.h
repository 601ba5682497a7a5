#pragma once

#include <string>
#include <string_view>

namespace xsearch {

// Suffix-stripping stemmer following the rule tables of Porter's 1980
// algorithm exactly (no later revisions such as -logi or -bli).
// Input is expected to be lowercase ASCII; other bytes are left alone.
std::string porter_stem(std::string_view word);

}  // namespace xsearch
