#include "mg1/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mg1/asymptotics.hpp"
#include "mg1/errors.hpp"
#include "mg1/fundamental.hpp"
#include "mg1/linalg.hpp"
#include "mg1/model.hpp"
#include "mg1/oracle.hpp"
#include "mg1/spectral.hpp"

namespace mg1 {

namespace {

const std::map<std::string, double> kDefaultTolerances = {
    {"g_tol", 1e-14},   {"perron_tol", 1e-13}, {"theta_tol", 1e-12},
    {"zero_tol", 1e-9}, {"atrb_tol", 1e-9},
};

double tol_of(const RunConfig& config, const std::string& name) {
    auto it = config.tolerances.find(name);
    if (it != config.tolerances.end()) return it->second;
    return kDefaultTolerances.at(name);
}

// Human-readable number: 12 significant digits, with a trailing ".0" so that
// integral values still read as floating point ("theta = 2.0").
std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    std::string s(buf);
    if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
    return s;
}

// CSV cell: 17 significant digits round-trip to bit-identical doubles.
std::string fmt_csv(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

std::string fmt_row(const RealMatrix& row) {
    if (row.cols() == 1) return fmt_num(row(0, 0));
    std::string s = "(";
    for (int j = 0; j < row.cols(); ++j) {
        s += fmt_num(row(0, j));
        if (j + 1 < row.cols()) s += ", ";
    }
    return s + ")";
}

std::string fmt_complex(const std::complex<double>& z) {
    std::string s = fmt_num(z.real());
    s += (z.imag() < 0) ? " - " : " + ";
    return s + fmt_num(std::abs(z.imag())) + "i";
}

std::string fmt_radius(double r) { return std::isinf(r) ? "inf" : fmt_num(r); }

// One report line: "key = value" in human mode, "key,value" in CSV mode.
void kv(std::ostream& os, OutputFormat fmt, const std::string& key, const std::string& value) {
    if (fmt == OutputFormat::Human) {
        os << key << " = " << value << "\n";
    } else {
        os << key << "," << value << "\n";
    }
}

void kv_num(std::ostream& os, OutputFormat fmt, const std::string& key, double v) {
    kv(os, fmt, key, fmt == OutputFormat::Human ? fmt_num(v) : fmt_csv(v));
}

void kv_row(std::ostream& os, OutputFormat fmt, const std::string& key, const RealMatrix& row) {
    if (fmt == OutputFormat::Human) {
        kv(os, fmt, key, fmt_row(row));
    } else {
        for (int j = 0; j < row.cols(); ++j) {
            kv(os, fmt, key + "_" + std::to_string(j + 1), fmt_csv(row(0, j)));
        }
    }
}

std::string fmt_classes(const std::vector<std::vector<int>>& classes, OutputFormat fmt) {
    std::string s;
    for (size_t c = 0; c < classes.size(); ++c) {
        if (fmt == OutputFormat::Human) {
            s += "{";
            for (size_t i = 0; i < classes[c].size(); ++i) {
                s += std::to_string(classes[c][i]);
                if (i + 1 < classes[c].size()) s += ", ";
            }
            s += "}";
            if (c + 1 < classes.size()) s += " ";
        } else {
            for (size_t i = 0; i < classes[c].size(); ++i) {
                s += std::to_string(classes[c][i]);
                if (i + 1 < classes[c].size()) s += " ";
            }
            if (c + 1 < classes.size()) s += ";";
        }
    }
    return s;
}

double cond_inf(const RealMatrix& m) {
    const RealMatrix inv = solve_real(m, RealMatrix::identity(m.rows()));
    return m.norm_inf() * inv.norm_inf();
}

void run_validate(const MG1Model& model, const RunConfig& config, std::ostream& os) {
    // load_model already validated; report the headline quantities.
    const OutputFormat f = config.format;
    if (f == OutputFormat::Csv) os << "key,value\n";
    kv(os, f, "valid", "true");
    kv(os, f, "M", std::to_string(model.M));
    kv(os, f, "M0", std::to_string(model.M0));
    kv(os, f, "r_A", fmt_radius(radius_A(model)));
    kv(os, f, "r_B", model.b_tail ? fmt_num(model.b_tail->radius) : "none");
    const PerronPair pp = perron_pair(eval_A_star_real(model, 1.0), tol_of(config, "perron_tol"));
    kv_num(os, f, "delta_at_one", pp.value);
    const DriftProfile d = drift(model);
    kv_num(os, f, "rho", d.rho);
}

void run_solve(const MG1Model& model, const RunConfig& config, std::ostream& os) {
    const SolvedChain chain = solve_chain(model, config.levels, tol_of(config, "g_tol"));
    if (config.format == OutputFormat::Csv) {
        os << "k";
        for (int j = 1; j <= model.M; ++j) os << ",x_" << j;
        for (int j = 1; j <= model.M; ++j) os << ",xbar_" << j;
        os << "\n";
        for (int k = 0; k <= config.levels; ++k) {
            os << k;
            for (int j = 0; j < model.M; ++j) {
                os << ",";
                if (k >= 1) os << fmt_csv(chain.fund.x[static_cast<size_t>(k)](0, j));
            }
            for (int j = 0; j < model.M; ++j) {
                os << "," << fmt_csv(chain.tails[static_cast<size_t>(k)](0, j));
            }
            os << "\n";
        }
    } else {
        kv(os, config.format, "x_0", fmt_row(chain.fund.x0));
        kv(os, config.format, "xbar_0", fmt_row(chain.tails[0]));
        for (int k = 1; k <= config.levels; ++k) {
            os << "k = " << k << ": x = " << fmt_row(chain.fund.x[static_cast<size_t>(k)])
               << ", xbar = " << fmt_row(chain.tails[static_cast<size_t>(k)]) << "\n";
        }
    }
}

struct Analysis {
    SpectralProfile spectral;
    FundamentalSet fund;
    AsymptoticReport report;
};

Analysis analyze_pipeline(const MG1Model& model, const RunConfig& config) {
    Analysis a;
    a.spectral = analyze_spectral(model, tol_of(config, "theta_tol"));
    a.fund = solve_fundamental(model, 4, tol_of(config, "g_tol"));
    a.report = analyze_asymptotics(model, a.spectral, a.fund, tol_of(config, "zero_tol"),
                                   tol_of(config, "atrb_tol"));
    return a;
}

void run_analyze(const MG1Model& model, const RunConfig& config, std::ostream& os) {
    const OutputFormat f = config.format;
    if (f == OutputFormat::Csv) os << "key,value\n";
    // Perron sanity of the transition kernel at z = 1 (should be 1 exactly).
    const PerronPair at_one = perron_pair(eval_A_star_real(model, 1.0), tol_of(config, "perron_tol"));
    const Analysis a = analyze_pipeline(model, config);
    kv_num(os, f, "rho", a.spectral.rho);
    kv(os, f, "r_A", fmt_radius(a.spectral.r_A));
    kv(os, f, "r_B", model.b_tail ? fmt_num(a.spectral.r_B) : "none");
    kv_num(os, f, "delta_at_one", at_one.value);
    if (a.spectral.theta) {
        kv(os, f, "theta", fmt_num(*a.spectral.theta));
        kv_num(os, f, "delta_prime", a.spectral.delta_prime);
    } else {
        kv(os, f, "theta", "none (Assumption 3 fails)");
    }
    kv(os, f, "tau", std::to_string(a.spectral.tau));
    {  // period offsets by phase
        std::string offs;
        for (size_t j = 0; j < a.spectral.offsets.size(); ++j) {
            offs += std::to_string(a.spectral.offsets[j]);
            if (j + 1 < a.spectral.offsets.size()) offs += (f == OutputFormat::Human ? ", " : " ");
        }
        kv(os, f, "offsets", f == OutputFormat::Human ? "(" + offs + ")" : offs);
    }
    if (a.spectral.theta) {
        // Spectral cross-check: |det(I - Gamma_A*(theta*omega_n))| per candidate stride.
        for (const auto& [n, residual] : period_spectral_check(model, *a.spectral.theta, a.spectral.tau)) {
            kv_num(os, f, "spectral_det_" + std::to_string(n), residual);
        }
    }
    kv(os, f, "regime", regime_name(a.report.regime));
    switch (a.report.regime) {
        case Regime::BelowRB: {
            kv_num(os, f, "base", a.report.theta_or_rb);
            kv(os, f, "tau_prime", std::to_string(a.report.period_used));
            kv(os, f, "order", std::to_string(a.report.order));
            {
                std::string hs;
                for (size_t i = 0; i < a.report.H.size(); ++i) {
                    hs += std::to_string(a.report.H[i]);
                    if (i + 1 < a.report.H.size()) hs += (f == OutputFormat::Human ? ", " : " ");
                }
                kv(os, f, "H", f == OutputFormat::Human ? "(" + hs + ")" : hs);
            }
            for (size_t nu = 0; nu < a.report.c_values.size(); ++nu) {
                const auto& c = a.report.c_values[nu];
                if (f == OutputFormat::Human) {
                    kv(os, f, "c_nu_" + std::to_string(nu), fmt_complex(c));
                } else {
                    kv(os, f, "c_nu_" + std::to_string(nu) + "_re", fmt_csv(c.real()));
                    kv(os, f, "c_nu_" + std::to_string(nu) + "_im", fmt_csv(c.imag()));
                }
            }
            for (size_t l = 0; l < a.report.prefactors.size(); ++l) {
                kv_row(os, f, "c_" + std::to_string(l), a.report.prefactors[l]);
            }
            break;
        }
        case Regime::AtRB: {
            kv_num(os, f, "base", a.report.theta_or_rb);
            kv(os, f, "tau_hat", std::to_string(a.report.period_used));
            kv(os, f, "m_B", std::to_string(a.report.order - 1));
            kv(os, f, "order", std::to_string(a.report.order));
            for (size_t l = 0; l < a.report.prefactors.size(); ++l) {
                kv_row(os, f, "c_" + std::to_string(l), a.report.prefactors[l]);
            }
            break;
        }
        case Regime::AboveRB:
        case Regime::NoThetaAboveRB: {
            kv_num(os, f, "base", a.report.theta_or_rb);
            kv(os, f, "m_B", std::to_string(model.b_tail->order));
            kv(os, f, "order", std::to_string(a.report.order));
            for (size_t n = 0; n < a.report.pole_angles.size(); ++n) {
                const Frac& ang = a.report.pole_angles[n];
                kv(os, f, "pole_" + std::to_string(n),
                   std::to_string(ang.num) + "/" + std::to_string(ang.den));
                const ComplexMatrix& w = a.report.pole_weights[n];
                if (f == OutputFormat::Human) {
                    std::string s = w.cols() == 1 ? fmt_complex(w(0, 0)) : "(";
                    if (w.cols() > 1) {
                        for (int j = 0; j < w.cols(); ++j) {
                            s += fmt_complex(w(0, j));
                            if (j + 1 < w.cols()) s += ", ";
                        }
                        s += ")";
                    }
                    kv(os, f, "w_" + std::to_string(n), s);
                } else {
                    for (int j = 0; j < w.cols(); ++j) {
                        kv(os, f, "w_" + std::to_string(n) + "_" + std::to_string(j + 1) + "_re",
                           fmt_csv(w(0, j).real()));
                        kv(os, f, "w_" + std::to_string(n) + "_" + std::to_string(j + 1) + "_im",
                           fmt_csv(w(0, j).imag()));
                    }
                }
            }
            break;
        }
        case Regime::Unsupported:
            break;
    }
    // Conditioning and factorization diagnostics.
    const RealMatrix eye = RealMatrix::identity(model.M);
    kv_num(os, f, "cond_I_minus_U0", cond_inf(eye - a.fund.U[0]));
    const double r_cap = std::min(std::isinf(a.spectral.r_A) ? 3.0 : a.spectral.r_A, 3.0);
    if (r_cap > 1.0) {
        const double z = 1.0 + 0.25 * (r_cap - 1.0);
        kv_num(os, f, "rg_residual_at_" + fmt_num(z), rg_factorization_residual(model, a.fund, z));
    }
    for (const std::string& w : a.report.warnings) kv(os, f, "warning", w);
}

void run_compare(const MG1Model& model, const RunConfig& config, std::ostream& os) {
    const SolvedChain chain = solve_chain(model, config.levels, tol_of(config, "g_tol"));
    const SpectralProfile spectral = analyze_spectral(model, tol_of(config, "theta_tol"));
    const AsymptoticReport report = analyze_asymptotics(
        model, spectral, chain.fund, tol_of(config, "zero_tol"), tol_of(config, "atrb_tol"));
    const ComparisonTable table = compare(model, chain.fund, report, config.levels);
    if (config.format == OutputFormat::Csv) {
        os << "k,l";
        for (int j = 1; j <= model.M; ++j) os << ",exact_" << j;
        for (int j = 1; j <= model.M; ++j) os << ",pred_" << j;
        os << ",rel_err\n";
        for (const CompareRow& row : table.rows) {
            os << row.level << "," << row.residue_class;
            for (int j = 0; j < model.M; ++j) os << "," << fmt_csv(row.exact(0, j));
            for (int j = 0; j < model.M; ++j) os << "," << fmt_csv(row.predicted(0, j));
            os << "," << fmt_csv(row.rel_err) << "\n";
        }
    } else {
        for (const CompareRow& row : table.rows) {
            os << "k = " << row.level << ", l = " << row.residue_class
               << ": exact = " << fmt_row(row.exact) << ", predicted = " << fmt_row(row.predicted)
               << ", rel_err = " << fmt_num(row.rel_err) << "\n";
        }
        kv(os, config.format, "max_usable_level", std::to_string(table.summary.max_usable_level));
        kv_num(os, config.format, "terminal_rel_err", table.summary.terminal_rel_err);
        kv_num(os, config.format, "empirical_base", table.summary.empirical_base);
        kv(os, config.format, "empirical_period", std::to_string(table.summary.empirical_period));
    }
}

void run_structure(const MG1Model& model, const RunConfig& config, std::ostream& os) {
    const OutputFormat f = config.format;
    if (f == OutputFormat::Csv) os << "key,value\n";
    const FundamentalSet fund = solve_fundamental(model, 4, tol_of(config, "g_tol"));
    const StructureReport g_report = structure_normal_form(fund.G, StructureSubject::GMatrix);
    const RealMatrix r_at_one = R_star_real(model, fund, 1.0);
    const StructureReport r_report = structure_normal_form(r_at_one, StructureSubject::RMatrix);
    auto form_name = [](StructureForm form) {
        return form == StructureForm::Irreducible ? "Irreducible" : "OneIrreduciblePlusTriangular";
    };
    kv(os, f, "G_form", form_name(g_report.form));
    kv(os, f, "G_classes", fmt_classes(g_report.classes, f));
    kv(os, f, "R_form", form_name(r_report.form));
    kv(os, f, "R_classes", fmt_classes(r_report.classes, f));
}

struct ArgBinding {
    std::string model_path;
    int levels = 200;
    std::string format = "human";
    std::string output;
    std::vector<std::string> tol_specs;
};

void bind_subcommand(CLI::App* sub, ArgBinding& bind) {
    sub->add_option("model", bind.model_path, "model description file (JSON)")->required();
    sub->add_option("--levels", bind.levels, "number of levels to solve/compare")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", bind.format, "output format")
        ->check(CLI::IsMember({"human", "csv"}));
    sub->add_option("--output", bind.output, "write the report to this file");
    sub->add_option("--tol", bind.tol_specs, "tolerance override, name=value");
}

RunConfig config_from(const CLI::App& app, const ArgBinding& bind) {
    RunConfig config;
    if (app.got_subcommand("validate")) config.command = Command::Validate;
    else if (app.got_subcommand("solve")) config.command = Command::Solve;
    else if (app.got_subcommand("analyze")) config.command = Command::Analyze;
    else if (app.got_subcommand("compare")) config.command = Command::Compare;
    else config.command = Command::Structure;
    config.model_path = bind.model_path;
    config.levels = bind.levels;
    config.format = (bind.format == "csv") ? OutputFormat::Csv : OutputFormat::Human;
    config.output = bind.output;
    for (const std::string& spec : bind.tol_specs) {
        const size_t eq = spec.find('=');
        if (eq == std::string::npos) {
            throw ParseError("tolerance override must look like name=value: " + spec);
        }
        const std::string name = spec.substr(0, eq);
        if (kDefaultTolerances.find(name) == kDefaultTolerances.end()) {
            throw ParseError("unknown tolerance name: " + name);
        }
        size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(spec.substr(eq + 1), &used);
        } catch (const std::exception&) {
            throw ParseError("tolerance value is not a number: " + spec);
        }
        if (used != spec.size() - eq - 1 || !(value > 0.0)) {
            throw ParseError("tolerance value is not a positive number: " + spec);
        }
        config.tolerances[name] = value;
    }
    if (config.levels < 1) throw ParseError("levels must be >= 1");
    return config;
}

void setup_app(CLI::App& app, ArgBinding& bind) {
    app.require_subcommand(1);
    bind_subcommand(app.add_subcommand("validate", "check model invariants"), bind);
    bind_subcommand(app.add_subcommand("solve", "stationary prefix and tail vectors"), bind);
    bind_subcommand(app.add_subcommand("analyze", "decay parameter, period, regime, prefactors"), bind);
    bind_subcommand(app.add_subcommand("compare", "prediction vs exact tails, level by level"), bind);
    bind_subcommand(app.add_subcommand("structure", "support structure of G and R*(1)"), bind);
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
    CLI::App app{"M/G/1-type Markov chain solver and tail analyzer"};
    ArgBinding bind;
    setup_app(app, bind);
    std::vector<std::string> argv_storage;
    argv_storage.push_back("mg1tail");
    for (const std::string& a : args) argv_storage.push_back(a);
    std::vector<const char*> argv;
    for (const std::string& a : argv_storage) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        throw ParseError(std::string("argument error: ") + e.what());
    }
    return config_from(app, bind);
}

void run(const RunConfig& config, std::ostream& out) {
    std::ofstream file;
    std::ostream* os = &out;
    if (!config.output.empty()) {
        file.open(config.output);
        if (!file) throw ParseError("cannot open output file: " + config.output);
        os = &file;
    }
    const MG1Model model = load_model(config.model_path);
    switch (config.command) {
        case Command::Validate: run_validate(model, config, *os); break;
        case Command::Solve: run_solve(model, config, *os); break;
        case Command::Analyze: run_analyze(model, config, *os); break;
        case Command::Compare: run_compare(model, config, *os); break;
        case Command::Structure: run_structure(model, config, *os); break;
    }
    os->flush();
}

int cli_main(int argc, char** argv) {
    CLI::App app{"M/G/1-type Markov chain solver and tail analyzer"};
    ArgBinding bind;
    setup_app(app, bind);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    try {
        const RunConfig config = config_from(app, bind);
        run(config, std::cout);
        return 0;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace mg1
