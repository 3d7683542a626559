#include "mg1/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mg1 {

namespace {

using nlohmann::json;

// ----- strict JSON access -------------------------------------------------

void require_keys(const json& obj, const std::vector<std::string>& keys,
                  const std::string& where) {
    for (const auto& item : obj.items()) {
        if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
            throw ParseError("unknown field '" + item.key() + "' in " + where);
    }
    for (const auto& k : keys) {
        if (!obj.contains(k)) throw ParseError("missing field '" + k + "' in " + where);
    }
}

int get_int(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ParseError("field '" + key + "' in " + where + " must be an integer");
    return v.get<int>();
}

double get_double(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ParseError("field '" + key + "' in " + where + " must be a number");
    return v.get<double>();
}

RealMatrix parse_matrix(const json& v, int rows, int cols, const std::string& where) {
    if (!v.is_array() || static_cast<int>(v.size()) != rows)
        throw ParseError(where + " must be an array of " + std::to_string(rows) + " rows");
    RealMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = v[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ParseError(where + " row " + std::to_string(i) + " must have " +
                             std::to_string(cols) + " entries");
        for (int j = 0; j < cols; ++j) {
            if (!row[j].is_number())
                throw ParseError(where + " entry (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") must be a number");
            m(i, j) = row[j].get<double>();
        }
    }
    return m;
}

// ----- combinatorics -------------------------------------------------------

/// binom(k + m - 1, m - 1) as a double, for the pole closed forms.
double rising_binom(long long k, int m) {
    double b = 1.0;
    for (int i = 1; i < m; ++i) b *= double(k + i) / double(i);
    return b;
}

/// conj(zeta_n) / r_B: the geometric base of pole n in the coefficient space.
std::complex<double> pole_base(const BTailSpec& spec, const BTailPole& pole) {
    return std::conj(unit_root(pole.angle)) / spec.radius;
}

// ----- graph reachability ---------------------------------------------------

/// True when every node is reachable from node 0 along `adj` and node 0 is
/// reachable from every node (checked on the reversed adjacency).
bool strongly_connected(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    if (n == 0) return false;
    std::vector<std::vector<int>> radj(n);
    for (int u = 0; u < n; ++u)
        for (int v : adj[u]) radj[v].push_back(u);
    auto reaches_all = [n](const std::vector<std::vector<int>>& g) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : g[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
        }
        return count == n;
    };
    return reaches_all(adj) && reaches_all(radj);
}

void check_nonnegative(const RealMatrix& m, const std::string& name) {
    double worst = 0.0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) worst = std::min(worst, m(i, j));
    if (worst < 0.0) throw ValidationError("negative entry in " + name, -worst);
}

void check_shape(const RealMatrix& m, int rows, int cols, const std::string& name) {
    if (m.rows() != rows || m.cols() != cols)
        throw ValidationError(name + " has wrong shape");
}

} // namespace

// ----- loading --------------------------------------------------------------

MG1Model parse_model(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("model document must be a JSON object");
    require_keys(doc, {"M", "M0", "A", "B0", "B", "C0", "a_tail", "b_tail"}, "model");

    MG1Model model;
    model.M = get_int(doc, "M", "model");
    model.M0 = get_int(doc, "M0", "model");
    if (model.M < 1 || model.M0 < 1) throw ParseError("phase counts must be positive");

    const json& a_arr = doc.at("A");
    if (!a_arr.is_array() || a_arr.empty()) throw ParseError("A must be a nonempty array of matrices");
    for (std::size_t k = 0; k < a_arr.size(); ++k)
        model.A.push_back(parse_matrix(a_arr[k], model.M, model.M, "A[" + std::to_string(k) + "]"));

    model.B0 = parse_matrix(doc.at("B0"), model.M0, model.M0, "B0");

    const json& b_arr = doc.at("B");
    if (!b_arr.is_array()) throw ParseError("B must be an array of matrices");
    model.B.push_back(RealMatrix(model.M0, model.M)); // zero placeholder at k = 0
    for (std::size_t k = 0; k < b_arr.size(); ++k)
        model.B.push_back(parse_matrix(b_arr[k], model.M0, model.M, "B[" + std::to_string(k + 1) + "]"));

    model.C0 = parse_matrix(doc.at("C0"), model.M, model.M0, "C0");

    const json& at = doc.at("a_tail");
    if (!at.is_null()) {
        require_keys(at, {"start_index", "ratio", "coeff"}, "a_tail");
        GeometricTail tail;
        tail.start_index = get_int(at, "start_index", "a_tail");
        tail.ratio = get_double(at, "ratio", "a_tail");
        tail.coeff = parse_matrix(at.at("coeff"), model.M, model.M, "a_tail.coeff");
        model.a_tail = std::move(tail);
    }

    const json& bt = doc.at("b_tail");
    if (!bt.is_null()) {
        require_keys(bt, {"radius", "order", "start_index", "poles"}, "b_tail");
        BTailSpec spec;
        spec.radius = get_double(bt, "radius", "b_tail");
        spec.order = get_int(bt, "order", "b_tail");
        spec.start_index = get_int(bt, "start_index", "b_tail");
        const json& poles = bt.at("poles");
        if (!poles.is_array() || poles.empty())
            throw ParseError("b_tail.poles must be a nonempty array");
        for (std::size_t n = 0; n < poles.size(); ++n) {
            const std::string where = "b_tail.poles[" + std::to_string(n) + "]";
            require_keys(poles[n], {"angle_num", "angle_den", "weight_re", "weight_im"}, where);
            const int num = get_int(poles[n], "angle_num", where);
            const int den = get_int(poles[n], "angle_den", where);
            if (den <= 0) throw ParseError(where + ".angle_den must be positive");
            BTailPole pole;
            pole.angle = Frac(num, den);
            const RealMatrix re = parse_matrix(poles[n].at("weight_re"), model.M0, model.M,
                                               where + ".weight_re");
            const RealMatrix im = parse_matrix(poles[n].at("weight_im"), model.M0, model.M,
                                               where + ".weight_im");
            pole.weight = ComplexMatrix(model.M0, model.M);
            for (int i = 0; i < model.M0; ++i)
                for (int j = 0; j < model.M; ++j)
                    pole.weight(i, j) = {re(i, j), im(i, j)};
            spec.poles.push_back(std::move(pole));
        }
        model.b_tail = std::move(spec);
    }
    return model;
}

MG1Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    MG1Model model = parse_model(buf.str());
    validate_model(model);
    return model;
}

// ----- radii and block access ------------------------------------------------

double radius_A(const MG1Model& model) {
    return model.a_tail ? 1.0 / model.a_tail->ratio : std::numeric_limits<double>::infinity();
}

double radius_B(const MG1Model& model) {
    return model.b_tail ? model.b_tail->radius : std::numeric_limits<double>::infinity();
}

RealMatrix implied_A(const MG1Model& model, int k) {
    if (k < static_cast<int>(model.A.size())) return model.A[k];
    if (model.a_tail) return model.a_tail->coeff * std::pow(model.a_tail->ratio, k);
    return RealMatrix(model.M, model.M);
}

RealMatrix implied_B(const MG1Model& model, int k) {
    if (k < static_cast<int>(model.B.size())) return model.B[k];
    if (!model.b_tail) return RealMatrix(model.M0, model.M);
    const BTailSpec& spec = *model.b_tail;
    ComplexMatrix acc(model.M0, model.M);
    for (const BTailPole& pole : spec.poles) {
        const std::complex<double> factor =
            rising_binom(k, spec.order) * std::pow(pole_base(spec, pole), k);
        acc += pole.weight * factor;
    }
    return real_part(acc);
}

RealMatrix b_total(const MG1Model& model) { return eval_B_star_real(model, 1.0); }

// ----- transforms -------------------------------------------------------------

namespace {

void check_inside_radius_A(const MG1Model& model, double mag) {
    if (model.a_tail && mag * model.a_tail->ratio >= 1.0)
        throw OutsideRadius("argument at or beyond the radius of the level-increment transform");
}

void check_off_B_poles(const MG1Model& model, std::complex<double> z) {
    if (!model.b_tail) return;
    const BTailSpec& spec = *model.b_tail;
    for (const BTailPole& pole : spec.poles) {
        const std::complex<double> loc = spec.radius * unit_root(pole.angle);
        if (std::abs(z - loc) <= 1e-12 * spec.radius)
            throw AtPole("argument coincides with a declared boundary-kernel pole");
    }
}

/// Tail of B*(z) beyond the stored head, in closed form:
///   Sum_n W_n [ (1 - z t_n)^{-m} - Sum_{k=0}^{K_B} binom(k+m-1, m-1) (z t_n)^k ],
/// where t_n = conj(zeta_n)/r_B. Conjugate closure of the pole set makes the
/// result real for real z.
template <typename Scalar>
Matrix<std::complex<double>> b_tail_closed_form(const MG1Model& model, Scalar z, bool derivative) {
    const BTailSpec& spec = *model.b_tail;
    const int m = spec.order;
    ComplexMatrix acc(model.M0, model.M);
    for (const BTailPole& pole : spec.poles) {
        const std::complex<double> t = pole_base(spec, pole);
        const std::complex<double> zt = std::complex<double>(z) * t;
        std::complex<double> factor;
        if (!derivative) {
            factor = std::pow(1.0 - zt, -m);
            for (int k = 0; k <= spec.start_index; ++k)
                factor -= rising_binom(k, m) * std::pow(zt, k);
        } else {
            factor = double(m) * t * std::pow(1.0 - zt, -(m + 1));
            for (int k = 1; k <= spec.start_index; ++k)
                factor -= rising_binom(k, m) * double(k) * std::pow(zt, k - 1) * t;
        }
        acc += pole.weight * factor;
    }
    return acc;
}

} // namespace

ComplexMatrix eval_A_star(const MG1Model& model, std::complex<double> z) {
    check_inside_radius_A(model, std::abs(z));
    return matrix_power_series(model.A, z, model.a_tail);
}

RealMatrix eval_A_star_real(const MG1Model& model, double y) {
    check_inside_radius_A(model, std::abs(y));
    return real_power_series(model.A, y, model.a_tail);
}

ComplexMatrix eval_A_star_derivative(const MG1Model& model, std::complex<double> z) {
    check_inside_radius_A(model, std::abs(z));
    return matrix_power_series_derivative(model.A, z, model.a_tail);
}

RealMatrix eval_A_star_derivative_real(const MG1Model& model, double y) {
    check_inside_radius_A(model, std::abs(y));
    return real_power_series_derivative(model.A, y, model.a_tail);
}

ComplexMatrix eval_B_star(const MG1Model& model, std::complex<double> z) {
    ComplexMatrix head = matrix_power_series(model.B, z); // B[0] placeholder is zero
    if (!model.b_tail) return head;
    check_off_B_poles(model, z);
    return head + b_tail_closed_form(model, z, false);
}

RealMatrix eval_B_star_real(const MG1Model& model, double y) {
    RealMatrix head = real_power_series(model.B, y);
    if (!model.b_tail) return head;
    check_off_B_poles(model, {y, 0.0});
    return head + real_part(b_tail_closed_form(model, y, false));
}

RealMatrix eval_B_star_derivative_real(const MG1Model& model, double y) {
    RealMatrix head = real_power_series_derivative(model.B, y);
    if (!model.b_tail) return head;
    check_off_B_poles(model, {y, 0.0});
    return head + real_part(b_tail_closed_form(model, y, true));
}

ComplexMatrix eval_Gamma_A_star(const MG1Model& model, std::complex<double> z) {
    if (z == std::complex<double>(0.0, 0.0))
        throw std::invalid_argument("eval_Gamma_A_star: z must be nonzero");
    return eval_A_star(model, z) * (std::complex<double>(1.0) / z);
}

RealMatrix eval_Gamma_A_star_real(const MG1Model& model, double y) {
    if (y == 0.0) throw std::invalid_argument("eval_Gamma_A_star_real: y must be nonzero");
    return eval_A_star_real(model, y) * (1.0 / y);
}

// ----- drift -------------------------------------------------------------------

DriftProfile drift(const MG1Model& model) {
    DriftProfile prof;
    const RealMatrix a_sum = eval_A_star_real(model, 1.0);
    prof.pi = stationary_vector(a_sum);
    prof.beta_A = eval_A_star_derivative_real(model, 1.0) * ones(model.M);
    prof.beta_B = eval_B_star_derivative_real(model, 1.0) * ones(model.M);
    prof.rho = (prof.pi * prof.beta_A)(0, 0);
    return prof;
}

// ----- support -------------------------------------------------------------------

std::vector<SupportEdge> gamma_A_support(const MG1Model& model) {
    std::vector<SupportEdge> edges;
    for (int k = 0; k < static_cast<int>(model.A.size()); ++k)
        for (int i = 0; i < model.M; ++i)
            for (int j = 0; j < model.M; ++j)
                if (model.A[k](i, j) != 0.0)
                    edges.push_back({i, j, static_cast<long long>(k) - 1});
    if (model.a_tail) {
        // Two consecutive representative displacements carry the same gcd
        // information as the whole geometric tail.
        for (long long k : {static_cast<long long>(model.a_tail->start_index) + 1,
                            static_cast<long long>(model.a_tail->start_index) + 2})
            for (int i = 0; i < model.M; ++i)
                for (int j = 0; j < model.M; ++j)
                    if (model.a_tail->coeff(i, j) != 0.0) edges.push_back({i, j, k - 1});
    }
    return edges;
}

// ----- validation -----------------------------------------------------------------

namespace {

void validate_b_tail(const MG1Model& model) {
    const BTailSpec& spec = *model.b_tail;
    if (spec.radius <= 1.0) throw ValidationError("b_tail radius must exceed 1", 1.0 - spec.radius);
    if (spec.order < 1) throw ValidationError("b_tail order must be at least 1");
    if (spec.start_index != static_cast<int>(model.B.size()) - 1)
        throw ValidationError("b_tail start_index must equal the last stored B index");
    if (spec.poles.empty()) throw ValidationError("b_tail must declare at least one pole");
    // A power series with nonnegative coefficients is singular at the real
    // point of its circle of convergence, so a pole at angle 0 is mandatory.
    bool has_real_pole = false;
    for (const BTailPole& pole : spec.poles)
        if (pole.angle == Frac(0, 1)) has_real_pole = true;
    if (!has_real_pole)
        throw ValidationError("b_tail must declare a pole on the positive real axis");
    double weight_scale = 1.0;
    for (std::size_t n = 0; n < spec.poles.size(); ++n) {
        if (spec.poles[n].weight.rows() != model.M0 || spec.poles[n].weight.cols() != model.M)
            throw ValidationError("b_tail pole weight has wrong shape");
        weight_scale = std::max(weight_scale, spec.poles[n].weight.max_abs());
        if (n > 0 && !(spec.poles[n - 1].angle < spec.poles[n].angle))
            throw ValidationError("b_tail pole angles must be strictly increasing");
    }
    // Conjugate closure: real-axis poles carry real weights; every other pole
    // has its mirror at angle 1 - a with the conjugated weight.
    const double tol = 1e-12 * weight_scale;
    for (const BTailPole& pole : spec.poles) {
        if (pole.angle == Frac(0, 1) || pole.angle == Frac(1, 2)) {
            if (imag_part(pole.weight).max_abs() > tol)
                throw ValidationError("real-axis b_tail pole must carry a real weight",
                                      imag_part(pole.weight).max_abs());
            continue;
        }
        const Frac mirror = pole.angle.conj();
        bool found = false;
        for (const BTailPole& other : spec.poles) {
            if (other.angle == mirror) {
                found = true;
                const double diff = (other.weight - conj(pole.weight)).max_abs();
                if (diff > tol)
                    throw ValidationError("conjugate b_tail poles must carry conjugate weights",
                                          diff);
            }
        }
        if (!found) throw ValidationError("b_tail pole set is not closed under conjugation");
    }
    // The closed form must produce real nonnegative blocks on a sample window.
    for (int k = spec.start_index + 1; k <= spec.start_index + 64; ++k) {
        ComplexMatrix acc(model.M0, model.M);
        for (const BTailPole& pole : spec.poles) {
            const std::complex<double> factor =
                rising_binom(k, spec.order) * std::pow(pole_base(spec, pole), k);
            acc += pole.weight * factor;
        }
        if (imag_part(acc).max_abs() > tol)
            throw ValidationError("implied boundary blocks are not real", imag_part(acc).max_abs());
        double worst = 0.0;
        for (int i = 0; i < model.M0; ++i)
            for (int j = 0; j < model.M; ++j) worst = std::min(worst, acc(i, j).real());
        if (worst < -tol)
            throw ValidationError("implied boundary block has a negative entry", -worst);
    }
}

/// Strong connectivity of the level-truncated chain graph. Levels
/// 0..level_cap, with level 0 carrying M0 phases and the rest M phases.
void validate_T_irreducible(const MG1Model& model) {
    const int rep_A = model.a_tail ? model.a_tail->start_index + 2
                                   : static_cast<int>(model.A.size()) - 1;
    const int rep_B = model.b_tail ? model.b_tail->start_index + 2
                                   : static_cast<int>(model.B.size()) - 1;
    const int level_cap = std::max({rep_A - 1, rep_B, 1}) + 2;
    const int n_nodes = model.M0 + level_cap * model.M;
    auto node = [&](int level, int phase) {
        return level == 0 ? phase : model.M0 + (level - 1) * model.M + phase;
    };
    std::vector<std::vector<int>> adj(n_nodes);
    for (int i = 0; i < model.M0; ++i) {
        for (int j = 0; j < model.M0; ++j)
            if (model.B0(i, j) > 0.0) adj[node(0, i)].push_back(node(0, j));
        for (int k = 1; k <= level_cap; ++k) {
            const RealMatrix blk = implied_B(model, k);
            for (int j = 0; j < model.M; ++j)
                if (blk(i, j) > 0.0) adj[node(0, i)].push_back(node(k, j));
        }
    }
    for (int level = 1; level <= level_cap; ++level) {
        for (int i = 0; i < model.M; ++i) {
            if (level == 1) {
                for (int j = 0; j < model.M0; ++j)
                    if (model.C0(i, j) > 0.0) adj[node(1, i)].push_back(node(0, j));
            } else {
                const RealMatrix& down = model.A[0];
                for (int j = 0; j < model.M; ++j)
                    if (down(i, j) > 0.0) adj[node(level, i)].push_back(node(level - 1, j));
            }
            for (int k = 1; level - 1 + k <= level_cap; ++k) {
                const RealMatrix blk = implied_A(model, k);
                for (int j = 0; j < model.M; ++j)
                    if (blk(i, j) > 0.0) adj[node(level, i)].push_back(node(level - 1 + k, j));
            }
        }
    }
    if (!strongly_connected(adj))
        throw ValidationError("truncated level graph is not irreducible");
}

} // namespace

void validate_model(const MG1Model& model) {
    if (model.M < 1 || model.M0 < 1) throw ValidationError("phase counts must be positive");
    if (model.A.empty()) throw ValidationError("no A blocks");
    for (std::size_t k = 0; k < model.A.size(); ++k) {
        check_shape(model.A[k], model.M, model.M, "A[" + std::to_string(k) + "]");
        check_nonnegative(model.A[k], "A[" + std::to_string(k) + "]");
    }
    check_shape(model.B0, model.M0, model.M0, "B0");
    check_nonnegative(model.B0, "B0");
    if (model.B.empty()) throw ValidationError("B placeholder missing");
    for (std::size_t k = 0; k < model.B.size(); ++k) {
        check_shape(model.B[k], model.M0, model.M, "B[" + std::to_string(k) + "]");
        check_nonnegative(model.B[k], "B[" + std::to_string(k) + "]");
    }
    if (model.B[0].max_abs() != 0.0) throw ValidationError("B placeholder at k=0 must be zero");
    check_shape(model.C0, model.M, model.M0, "C0");
    check_nonnegative(model.C0, "C0");

    if (model.a_tail) {
        const GeometricTail& tail = *model.a_tail;
        if (!(tail.ratio > 0.0 && tail.ratio < 1.0))
            throw ValidationError("a_tail ratio must lie in (0,1)");
        check_shape(tail.coeff, model.M, model.M, "a_tail.coeff");
        check_nonnegative(tail.coeff, "a_tail.coeff");
        if (tail.start_index != static_cast<int>(model.A.size()) - 1)
            throw ValidationError("a_tail start_index must equal the last stored A index");
    }
    if (model.b_tail) validate_b_tail(model);

    // Row sums: A stochastic; boundary row B0 e + (Sum_k B(k)) e = e; the
    // descent column satisfies C0 e = A(0) e (both express one step down
    // from level 1).
    const RealMatrix a_sum = eval_A_star_real(model, 1.0);
    double slack = 0.0;
    for (int i = 0; i < model.M; ++i) {
        double s = 0.0;
        for (int j = 0; j < model.M; ++j) s += a_sum(i, j);
        slack = std::max(slack, std::abs(s - 1.0));
    }
    if (slack > 1e-10) throw ValidationError("A not stochastic", slack);

    const RealMatrix b_sum = b_total(model);
    slack = 0.0;
    for (int i = 0; i < model.M0; ++i) {
        double s = 0.0;
        for (int j = 0; j < model.M0; ++j) s += model.B0(i, j);
        for (int j = 0; j < model.M; ++j) s += b_sum(i, j);
        slack = std::max(slack, std::abs(s - 1.0));
    }
    if (slack > 1e-10) throw ValidationError("boundary rows not stochastic", slack);

    slack = 0.0;
    for (int i = 0; i < model.M; ++i) {
        double c = 0.0, a = 0.0;
        for (int j = 0; j < model.M0; ++j) c += model.C0(i, j);
        for (int j = 0; j < model.M; ++j) a += model.A[0](i, j);
        slack = std::max(slack, std::abs(c - a));
    }
    if (slack > 1e-10) throw ValidationError("C0 row sums differ from A(0) row sums", slack);

    // Irreducibility of A = Sum_k A(k) over the repeating phases.
    std::vector<std::vector<int>> adj(model.M);
    for (int i = 0; i < model.M; ++i) {
        std::set<int> targets;
        for (const RealMatrix& blk : model.A)
            for (int j = 0; j < model.M; ++j)
                if (blk(i, j) > 0.0) targets.insert(j);
        if (model.a_tail)
            for (int j = 0; j < model.M; ++j)
                if (model.a_tail->coeff(i, j) > 0.0) targets.insert(j);
        adj[i].assign(targets.begin(), targets.end());
    }
    if (!strongly_connected(adj)) throw ValidationError("A is reducible");

    validate_T_irreducible(model);
}

} // namespace mg1
