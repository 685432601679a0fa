// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spk {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Hand-derived reference examples for every module.
std::vector<CheckResult> run_selftest();

// One line per check; returns the number of failures.
std::size_t report_checks(std::ostream& out, const std::vector<CheckResult>& checks);

}  // namespace spk
