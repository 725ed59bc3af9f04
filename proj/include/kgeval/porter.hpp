#pragma once

#include <string>
#include <string_view>

namespace kgeval {

// Porter (1980) suffix stripper, following the behavior of Martin Porter's
// reference C implementation (including its "bli" and "logi" step-2 rules).
// Input is expected to be lowercase; words of length <= 2 are returned as-is.
std::string porter_stem(std::string_view word);

}  // namespace kgeval
