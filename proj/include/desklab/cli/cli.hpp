#pragma once

#include <iosfwd>

namespace desklab::cli {

/// Exit codes: 0 success; 1 runtime failure (missing file, failed run, empty
/// results); 2 invalid configuration or usage.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace desklab::cli
