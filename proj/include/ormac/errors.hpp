#pragma once

#include <stdexcept>
#include <string>

namespace ormac {

// Parameter/domain violations map to std::invalid_argument (CLI exit 1).
// These two distinguish the other documented failure classes.

struct resource_limit_error : std::runtime_error {
    explicit resource_limit_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

struct dimension_error : std::invalid_argument {
    explicit dimension_error(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace ormac
