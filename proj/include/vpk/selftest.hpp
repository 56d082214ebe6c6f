#pragma once

#include <string>
#include <vector>

namespace vpk
{
struct SelfTestResult
{
        std::string name;
        bool passed = false;
        std::string detail;
};

/// Embedded invariant checks: partition of unity, warp bijection, split/merge identity and the
/// n = 2 golden fusion. Seeded, so every run checks the same samples.
std::vector<SelfTestResult> run_selftest();

}
