#pragma once

#include <ostream>

namespace drilldown {

// Entry point of the `drilldown` command. Results go to `out`; errors go to
// `err` as {"error": name, "detail": ...}. Returns 0 on success, 1 for domain
// errors and 2 for usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace drilldown
