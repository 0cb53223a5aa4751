#pragma once

// Batch front end. Commands: ladder, stationary, verify, simulate, report.
//
//   switchwalk_cli verify --spec data/specs/pm1.json --tol 1e-10 --out out/
//
// Each command writes <out>/<command>.json (or CSV tables with --format csv).

#include <ostream>

namespace switchwalk::cli {

enum ExitCode : int {
    kOk = 0,
    kVerificationFailed = 1,
    kInvalidInput = 2,
    kInternalError = 3,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace switchwalk::cli
