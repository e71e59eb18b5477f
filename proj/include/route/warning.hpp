#pragma once

#include <string>

namespace route {

/// Non-fatal diagnostic surfaced by lenient operations (identifier resolution,
/// response parsing, corpus skips).
struct Warning {
    std::string pair_id;
    std::string identifier;
    std::string reason;
};

}  // namespace route
