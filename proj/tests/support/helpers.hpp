#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <sys/wait.h>

#include "mg1/fundamental.hpp"
#include "mg1/linalg.hpp"
#include "mg1/model.hpp"

namespace testsup {

inline std::string fixture(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

inline double l1(const mg1::RealMatrix& row) {
    double s = 0.0;
    for (int j = 0; j < row.cols(); ++j) s += std::abs(row(0, j));
    return s;
}

inline double max_abs_diff(const mg1::RealMatrix& a, const mg1::RealMatrix& b) {
    double d = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
    return d;
}

inline double row_sum(const mg1::RealMatrix& m, int i) {
    double s = 0.0;
    for (int j = 0; j < m.cols(); ++j) s += m(i, j);
    return s;
}

// Worst stationarity defect over all levels the prefix can check:
//   level 0:    x(0) = x(0) B(0) + x(1) C(0)
//   level k>=1: x(k) = x(0) B(k) + sum_{j=1}^{k+1} x(j) A(k+1-j)
inline double balance_residual(const mg1::MG1Model& model, const mg1::FundamentalSet& fund) {
    const int depth = static_cast<int>(fund.x.size()) - 1;
    double worst = 0.0;
    {
        const mg1::RealMatrix rhs = fund.x0 * model.B0 + fund.x[1] * model.C0;
        worst = std::max(worst, max_abs_diff(fund.x0, rhs));
    }
    for (int k = 1; k + 1 <= depth; ++k) {
        mg1::RealMatrix rhs = fund.x0 * mg1::implied_B(model, k);
        for (int j = 1; j <= k + 1; ++j) rhs += fund.x[j] * mg1::implied_A(model, k + 1 - j);
        worst = std::max(worst, max_abs_diff(fund.x[k], rhs));
    }
    return worst;
}

struct CliResult {
    int status = -1;
    std::string output;  // stdout and stderr interleaved
};

// Runs the command-line binary with the given arguments, capturing output.
inline CliResult run_cli(const std::string& args) {
    CliResult result;
    const std::string cmd = std::string(MG1TAIL_BIN) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return result;
    std::array<char, 4096> buf{};
    size_t n = 0;
    while ((n = ::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        result.output.append(buf.data(), n);
    }
    const int rc = ::pclose(pipe);
    result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return result;
}

}  // namespace testsup
