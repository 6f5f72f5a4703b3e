#pragma once

#include <ostream>

namespace docconf::cli {

/// Runs the docconf command line. Returns 0 on success, 2 on input errors
/// (bad flags, unreadable or invalid inputs) and 1 on anything else.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace docconf::cli
