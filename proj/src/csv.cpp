#include "evology/csv.hpp"

#include <charconv>
#include <stdexcept>

namespace evology {

std::string csv_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    if (res.ec != std::errc()) {
        throw std::runtime_error("csv_double: formatting failed");
    }
    return std::string(buf, res.ptr);
}

}  // namespace evology
