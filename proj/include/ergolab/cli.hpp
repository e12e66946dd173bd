#pragma once

namespace ergolab::cli {

// Full command-line front end. Exit codes: 0 all requested checks pass,
// 1 a check failed, 2 usage or configuration error.
int run(int argc, const char* const* argv);

}  // namespace ergolab::cli
