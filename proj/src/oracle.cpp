#include "mg1/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mg1/errors.hpp"

namespace mg1 {

namespace {

constexpr double kNoiseFloor = 1e-12;
constexpr int kEtaSpan = 12;  // levels spanned when measuring the prefix decay

double l1(const RealMatrix& row) {
    double s = 0.0;
    for (int j = 0; j < row.cols(); ++j) s += std::abs(row(0, j));
    return s;
}

double min_entry(const RealMatrix& row) {
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < row.cols(); ++j) m = std::min(m, row(0, j));
    return m;
}

struct Certificate {
    bool measurable = false;   // prefix long/clean enough to estimate decay
    double eta = 1.0;          // per-level decay ratio of the prefix
    double remainder = 0.0;    // upper bound on the neglected mass
    double target = 0.0;       // bound the remainder must meet
};

// Bounds the neglected mass sum_{l>D} |x(l)|_1 by a geometric envelope fitted
// to the last kEtaSpan levels of the prefix, with a factor-2 safety margin.
Certificate certify(const FundamentalSet& fund, int k_levels, double tail_ref) {
    Certificate cert;
    const int depth = static_cast<int>(fund.x.size()) - 1;
    cert.target = std::min(1e-14, std::max(std::ldexp(tail_ref, -50), 1e-280));
    if (depth < std::max(k_levels + 1, kEtaSpan + 1)) return cert;
    const double head = l1(fund.x[depth - kEtaSpan]);
    const double last = l1(fund.x[depth]);
    if (last <= 0.0) {  // prefix has died out; nothing is being neglected
        cert.measurable = true;
        cert.eta = 0.0;
        cert.remainder = 0.0;
        return cert;
    }
    if (head <= 0.0) return cert;
    const double eta = std::pow(last / head, 1.0 / kEtaSpan);
    if (!(eta < 0.9999)) return cert;
    cert.measurable = true;
    cert.eta = eta;
    cert.remainder = 2.0 * last * eta / (1.0 - eta);
    return cert;
}

}  // namespace

std::vector<RealMatrix> exact_tails(const FundamentalSet& fund, int k_levels) {
    if (k_levels < 0) throw std::invalid_argument("exact_tails: k_levels must be >= 0");
    const int depth = static_cast<int>(fund.x.size()) - 1;
    const int M = fund.x.empty() ? 0 : fund.x.back().cols();
    if (depth < k_levels + 1) {
        throw RemainderTooLarge("exact_tails: prefix depth " + std::to_string(depth) +
                                " does not reach past level " + std::to_string(k_levels));
    }
    // Backward partial sums over the stored prefix.
    std::vector<RealMatrix> tails(static_cast<size_t>(k_levels) + 1, RealMatrix(1, M));
    RealMatrix acc(1, M);
    for (int l = depth; l >= 1; --l) {
        acc += fund.x[l];
        if (l - 1 <= k_levels) tails[l - 1] = acc;
    }
    const Certificate cert = certify(fund, k_levels, l1(tails[k_levels]));
    if (!cert.measurable || cert.remainder > cert.target) {
        std::ostringstream msg;
        msg << "exact_tails: remainder beyond level " << depth << " not certified ("
            << (cert.measurable ? "bound " + std::to_string(cert.remainder) : "prefix decay not measurable")
            << ", needed <= " << cert.target << ")";
        throw RemainderTooLarge(msg.str());
    }
    return tails;
}

SolvedChain solve_chain(const MG1Model& model, int k_levels, double g_tol) {
    const int cap = 20000;
    int depth = std::min(cap, std::max(k_levels + kEtaSpan + 4, 32));
    for (int attempt = 0; attempt < 24; ++attempt) {
        FundamentalSet fund = solve_fundamental(model, depth, g_tol);
        RealMatrix acc(1, model.M);
        for (size_t l = fund.x.size() - 1; l > static_cast<size_t>(k_levels); --l) acc += fund.x[l];
        const Certificate cert = certify(fund, k_levels, l1(acc));
        if (cert.measurable && cert.remainder <= cert.target) {
            return SolvedChain{fund, exact_tails(fund, k_levels)};
        }
        if (depth >= cap) break;
        int next = depth * 2;
        if (cert.measurable && cert.eta > 0.0 && cert.remainder > cert.target) {
            // Levels needed for the envelope to shrink below the target.
            const double extra = std::log(cert.target / cert.remainder) / std::log(cert.eta);
            next = depth + static_cast<int>(std::ceil(extra)) + kEtaSpan;
        }
        depth = std::min(cap, std::max(next, depth + kEtaSpan));
    }
    // Final attempt at the cap surfaces the certificate failure.
    FundamentalSet fund = solve_fundamental(model, depth, g_tol);
    return SolvedChain{fund, exact_tails(fund, k_levels)};
}

DecayEstimate estimate_decay(const std::vector<RealMatrix>& tails, int period_hint,
                             int order_hint, int max_stride) {
    if (period_hint < 1) throw std::invalid_argument("estimate_decay: period_hint must be >= 1");
    if (order_hint < 0) throw std::invalid_argument("estimate_decay: order_hint must be >= 0");
    // Usable window: levels 1..last with every entry above the noise floor.
    int last = 0;
    for (size_t k = 1; k < tails.size(); ++k) {
        if (min_entry(tails[k]) < kNoiseFloor) break;
        last = static_cast<int>(k);
    }
    if (last < 4 * period_hint) {
        throw InsufficientLevels("estimate_decay: only " + std::to_string(last) +
                                 " usable levels, need >= " + std::to_string(4 * period_hint));
    }
    // log u(k) = log |x-bar(k)|_1 - order_hint * log k.
    std::vector<double> logu(static_cast<size_t>(last) + 1, 0.0);
    for (int k = 1; k <= last; ++k) {
        logu[k] = std::log(l1(tails[k])) - order_hint * std::log(static_cast<double>(k));
    }
    const int h = period_hint;
    int lo = std::max(1, last / 2);
    if (lo + h > last) lo = std::max(1, last - h);
    double acc = 0.0;
    int cnt = 0;
    for (int k = lo; k + h <= last; ++k) {
        acc += (logu[k] - logu[k + h]) / h;
        ++cnt;
    }
    if (cnt == 0) throw InsufficientLevels("estimate_decay: window too short for the stride");
    DecayEstimate est;
    est.base = std::exp(acc / cnt);
    est.max_usable = last;
    const double logbase = std::log(est.base);
    // Normalized sequence n(k) = base^k * u(k); periodic limits settle per class.
    auto normalized = [&](int k) { return std::exp(static_cast<double>(k) * logbase + logu[k]); };
    int period = 0;
    for (int s = 1; s <= max_stride && period == 0; ++s) {
        bool all_ok = true;
        for (int l = 0; l < s && all_ok; ++l) {
            std::vector<double> vals;
            for (int k = (l == 0) ? s : l; k <= last; k += s) vals.push_back(normalized(k));
            if (vals.size() < 3) {
                all_ok = false;
                break;
            }
            const size_t n = vals.size();
            double vmin = vals[n - 3], vmax = vals[n - 3];
            for (size_t i = n - 3; i < n; ++i) {
                vmin = std::min(vmin, vals[i]);
                vmax = std::max(vmax, vals[i]);
            }
            const double mid = 0.5 * (vmin + vmax);
            if (!(mid > 0.0) || (vmax - vmin) / mid >= 1e-3) all_ok = false;
        }
        if (all_ok) period = s;
    }
    est.period = (period > 0) ? period : period_hint;
    // Per-class prefactors at the largest usable level of each class.
    const int M = tails[1].cols();
    est.class_prefactors.assign(static_cast<size_t>(est.period), RealMatrix(1, M));
    for (int l = 0; l < est.period; ++l) {
        int k = last;
        while (k >= 1 && k % est.period != l) --k;
        if (k < 1) continue;
        const double logscale = k * logbase - order_hint * std::log(static_cast<double>(k));
        RealMatrix row(1, M);
        for (int j = 0; j < M; ++j) {
            const double e = tails[static_cast<size_t>(k)](0, j);
            row(0, j) = (e > 0.0) ? std::exp(std::log(e) + logscale) : 0.0;
        }
        est.class_prefactors[static_cast<size_t>(l)] = row;
    }
    return est;
}

ComparisonTable compare(const MG1Model& model, const FundamentalSet& fund,
                        const AsymptoticReport& report, int k_levels) {
    if (report.regime == Regime::Unsupported) {
        throw std::invalid_argument("compare: the analysis produced no usable prediction");
    }
    const std::vector<RealMatrix> tails = exact_tails(fund, k_levels);
    const int period = std::max(1, report.period_used);
    ComparisonTable table;
    for (int k = 0; k <= k_levels; ++k) {
        const RealMatrix& exact = tails[static_cast<size_t>(k)];
        if (min_entry(exact) < kNoiseFloor) break;
        CompareRow row;
        row.level = k;
        row.residue_class = k % period;
        row.exact = exact;
        row.predicted = predict_tail(report, k);
        double err = 0.0;
        for (int j = 0; j < model.M; ++j) {
            err = std::max(err, std::abs(row.predicted(0, j) - exact(0, j)) / std::abs(exact(0, j)));
        }
        row.rel_err = err;
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) {
        throw InsufficientLevels("compare: no usable levels above the noise floor");
    }
    table.summary.max_usable_level = table.rows.back().level;
    table.summary.terminal_rel_err = table.rows.back().rel_err;
    const DecayEstimate est =
        estimate_decay(tails, period, report.order - 1, std::max(model.M, period));
    table.summary.empirical_base = est.base;
    table.summary.empirical_period = est.period;
    return table;
}

}  // namespace mg1
