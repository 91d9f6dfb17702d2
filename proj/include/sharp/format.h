#pragma once

#include <string>

namespace sharp {

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace sharp
