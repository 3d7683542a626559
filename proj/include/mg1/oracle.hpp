#pragma once

#include <vector>

#include "mg1/asymptotics.hpp"
#include "mg1/fundamental.hpp"
#include "mg1/linalg.hpp"
#include "mg1/model.hpp"

namespace mg1 {

// Ground-truth side of the cross-validation: tail vectors summed from the
// stationary prefix with a certified remainder, empirical decay measurement,
// and tables joining prediction to measurement.

// Exact tail vectors together with the stationary prefix they were summed from.
struct SolvedChain {
    FundamentalSet fund;
    // tails[k] = x-bar(k) = sum_{l>k} x(l), 1xM rows, k = 0..k_levels.
    std::vector<RealMatrix> tails;
};

// Result of measuring the decay of a tail sequence without using any
// spectral information.
struct DecayEstimate {
    double base = 0.0;      // empirical geometric decay base (>1 for light tails)
    int period = 1;         // smallest stride at which per-class ratios settle
    // class_prefactors[l] ~ base^k * x-bar(k) / k^order_hint along k = l (mod period).
    std::vector<RealMatrix> class_prefactors;
    int max_usable = 0;     // largest level with min entry >= noise floor
};

struct CompareRow {
    int level = 0;          // k
    int residue_class = 0;  // k mod period of the prediction
    RealMatrix exact;       // x-bar(k)
    RealMatrix predicted;   // regime formula evaluated at k
    double rel_err = 0.0;   // max over entries of |pred - exact| / |exact|
};

struct CompareSummary {
    int max_usable_level = 0;
    double terminal_rel_err = 0.0;
    double empirical_base = 0.0;
    int empirical_period = 1;
};

struct ComparisonTable {
    std::vector<CompareRow> rows;
    CompareSummary summary;
};

// Tail vectors x-bar(k) = sum_{l=k+1}^{infinity} x(l) for k = 0..k_levels,
// summed backwards over the stored prefix.  The neglected remainder beyond the
// prefix is certified against both an absolute bound (1e-14) and a relative
// bound (2^-50 of the smallest requested tail); throws RemainderTooLarge when
// the prefix is too short to certify.
std::vector<RealMatrix> exact_tails(const FundamentalSet& fund, int k_levels);

// Orchestrator: solves the chain deep enough for exact_tails(fund, k_levels)
// to certify, deepening adaptively based on the observed decay of the prefix.
SolvedChain solve_chain(const MG1Model& model, int k_levels, double g_tol = 1e-14);

// Empirical decay measurement.  u(k) = |x-bar(k)|_1 / k^order_hint is fitted
// to base^-k; the base comes from log-ratio means at stride period_hint over
// the last half of the usable window, the period is the smallest stride in
// 1..max_stride whose residue classes have settled (relative spread < 1e-3
// over the last three members), and per-class prefactors are read off at the
// largest usable level of each class.  Requires >= 4*period_hint usable
// levels (min entry >= 1e-12), else throws InsufficientLevels.
DecayEstimate estimate_decay(const std::vector<RealMatrix>& tails, int period_hint,
                             int order_hint = 0, int max_stride = 8);

// Joins the asymptotic prediction to the exact tails level by level.  Rows are
// restricted to usable levels (min entry of the exact tail >= 1e-12).  The
// summary records the terminal relative error and the empirical decay
// measurements.  The report's regime must carry a prediction.
ComparisonTable compare(const MG1Model& model, const FundamentalSet& fund,
                        const AsymptoticReport& report, int k_levels);

}  // namespace mg1
