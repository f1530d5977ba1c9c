/*
 * Copyright 2026 The uvtex Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace uvtex::tools {

struct CheckResult
{
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Names accepted by run_checks as a fault to inject.
std::vector<std::string> fault_names();

/**
 * Gradient, adjoint and oracle checks over randomly generated inputs.
 * `fault` names one component whose output is perturbed before it is checked;
 * empty means no fault.
 */
std::vector<CheckResult> run_checks(std::uint64_t seed, const std::string& fault = {});

void print_check_table(const std::vector<CheckResult>& results, std::ostream& out);

} // namespace uvtex::tools
