#pragma once

#include <string>

namespace evology {

// Shortest decimal string that round-trips the exact double; "nan"/"inf"
// never appear in healthy output but are printable for diagnostics.
std::string csv_double(double value);

}  // namespace evology
