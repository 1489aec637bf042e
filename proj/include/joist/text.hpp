#pragma once

#include <string>

namespace joist {

/// Shortest decimal that round-trips to the same double.
std::string format_number(double value);

}  // namespace joist
