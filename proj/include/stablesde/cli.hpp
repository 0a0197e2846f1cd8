#pragma once

#include <iosfwd>

namespace stablesde::cli {

/// Exit codes: 0 success, 1 numeric domain or scheme failure (or a failing
/// selftest), 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace stablesde::cli
