// Command-line front end: box validation, state-space scans, CHSH
// optimization/sampling, and the quantum consistency checks. All outputs
// are deterministic given the flags and seed.
//
// Exit codes: 0 = success/pass, 1 = semantic failure (membership or
// consistency violated), 2 = input error (flags, files, schema).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bellbox/bellbox.hpp"

using namespace bellbox;
namespace q = bellbox::quantum;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

MeasurementFamily family_from_flags(const std::optional<double>& lambda,
                                    const std::optional<double>& alpha) {
    if (lambda && alpha) throw CLI::ValidationError("--lambda and --alpha are mutually exclusive");
    if (lambda) return MeasurementFamily::noisy(*lambda);
    if (alpha) return MeasurementFamily::nonmax(*alpha);
    return MeasurementFamily::ideal();
}

void write_region(const FeasibilityRegion& region, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    region.write_csv(out);
    if (!out) throw std::runtime_error("error writing output file: " + path);
}

int cmd_validate(const std::string& box_path, int level, std::optional<double> lambda,
                 std::optional<double> alpha, double tol, bool as_json) {
    MeasurementFamily family = family_from_flags(lambda, alpha);
    if (level >= 3 && family.kind == MeasurementFamily::Kind::NonMax) {
        std::cerr << "error: level 3 is not defined for --alpha families\n";
        return kExitInput;
    }
    JointBox box = load_box_file(box_path);
    MembershipReport report = membership(box, level, family, tol);

    if (as_json) {
        nlohmann::json j;
        j["level"] = level;
        j["family"] = family.describe();
        j["pass"] = report.pass;
        j["tolerance"] = tol;
        if (report.bell) {
            j["bell_probs"] = {report.bell->p1, report.bell->p2, report.bell->p3,
                               report.bell->p4};
        }
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& c : report.checks)
            checks.push_back({{"constraint", c.name}, {"value", c.value}, {"ok", c.ok}});
        j["constraints"] = checks;
        nlohmann::json viols = nlohmann::json::array();
        for (const auto& v : report.violations)
            viols.push_back({{"constraint", v.constraint}, {"magnitude", v.magnitude}});
        j["violations"] = viols;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "box: " << box_path << "\n";
        std::cout << "family: " << family.describe() << ", level " << level << "\n";
        if (report.bell) {
            std::cout << "joint outcome probabilities: " << fmt(report.bell->p1) << " "
                      << fmt(report.bell->p2) << " " << fmt(report.bell->p3) << " "
                      << fmt(report.bell->p4) << "\n";
        }
        if (report.pass) {
            std::cout << "PASS (no constraint violated at tol " << fmt(tol) << ")\n";
        } else {
            std::cout << "FAIL: " << report.violations.size() << " violated constraint(s)\n";
            for (const auto& v : report.violations)
                std::cout << "  " << v.constraint << "  magnitude " << fmt(v.magnitude) << "\n";
        }
    }
    return report.pass ? kExitPass : kExitFail;
}

int cmd_scan_ball(double lambda, int grid, const std::string& out,
                  std::optional<double> slice, int threads, double tol) {
    FeasibilityRegion region = slice ? scan_local_slice(lambda, grid, *slice, threads, tol)
                                     : scan_local_region(lambda, grid, threads, tol);
    write_region(region, out);
    long long feasible = 0;
    for (std::uint8_t v : region.values) feasible += v;
    std::cout << "wrote " << region.size() << " rows to " << out << " (" << feasible
              << " feasible), ball radius " << fmt(MeasurementFamily::noisy(lambda).ball_radius())
              << "\n";
    return kExitPass;
}

int cmd_scan_lh(double alpha, int grid, const std::string& out, int threads, double tol) {
    FeasibilityRegion region = scan_lh_region(alpha, grid, threads, tol);
    write_region(region, out);
    long long feasible = 0;
    for (std::uint8_t v : region.values) feasible += v;
    std::cout << "wrote " << region.size() << " rows to " << out << " (" << feasible
              << " feasible)\n";
    return kExitPass;
}

int cmd_chsh(bool exact, int level, const ChshSpec& spec, std::size_t trials, std::uint64_t seed,
             int workers, const std::string& witness_path, bool as_json) {
    double value = 0.0;
    std::optional<CompactState> witness;
    std::string method;

    if (exact) {
        LpOptimum opt = lp_max_chsh(spec, level);
        value = opt.value;
        witness = opt.witness;
        method = "exact LP, level " + std::to_string(level);
    } else {
        SamplerResult run = sample_level3(MeasurementFamily::ideal(), trials, seed, workers);
        method = "sampled, level 3, " + std::to_string(run.boxes.size()) + " boxes";
        double best = -10.0;
        for (const CompactState& s : run.boxes) {
            double v = chsh_value(expand(s), spec);
            if (v > best) {
                best = v;
                witness = s;
            }
        }
        value = best;
        if (run.low_acceptance_warning)
            std::cerr << "warning: sampler acceptance rate " << fmt(run.acceptance_rate)
                      << " below 1e-3\n";
    }

    if (!witness_path.empty() && witness) save_box_file(witness_path, expand(*witness));

    if (as_json) {
        nlohmann::json j;
        j["spec"] = spec.describe();
        j["method"] = method;
        j["value"] = value;
        if (!witness_path.empty()) j["witness"] = witness_path;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "CHSH " << spec.describe() << " [" << method << "]: " << fmt(value) << "\n";
        if (!witness_path.empty() && witness)
            std::cout << "witness written to " << witness_path << "\n";
    }
    return kExitPass;
}

int cmd_oracle(int samples, std::uint64_t seed, double tol, bool as_json) {
    double identity_dev = q::projector_identity_check();
    double max_parity_residual = 0.0;
    double max_prob_residual = 0.0;
    int membership_failures = 0;

    q::BellBasis bell = q::BellBasis::standard();
    for (int i = 0; i < samples; ++i) {
        q::DensityMatrix rho = q::random_state(seed + static_cast<std::uint64_t>(i), 4);
        JointBox box = q::box_from_state(rho);

        BellProbabilities solved = bell_probs(box);
        BellProbabilities born = q::bell_probs_quantum(rho, bell);
        for (int k = 1; k <= 4; ++k)
            max_prob_residual = std::max(max_prob_residual, std::abs(solved[k] - born[k]));

        auto c = [&box](Setting w) {
            const Block& b = box.block(w, w);
            return b.pp + b.mm;
        };
        max_parity_residual = std::max(
            {max_parity_residual, std::abs(solved.p1 + solved.p3 - c(Setting::X)),
             std::abs(solved.p2 + solved.p3 - c(Setting::Y)),
             std::abs(solved.p1 + solved.p2 - c(Setting::Z)), std::abs(solved.sum() - 1.0)});

        if (!membership(box, 3).pass) ++membership_failures;
    }

    bool pass = identity_dev < tol && max_parity_residual < tol && max_prob_residual < tol &&
                membership_failures == 0;

    if (as_json) {
        nlohmann::json j;
        j["samples"] = samples;
        j["projector_identity_deviation"] = identity_dev;
        j["max_parity_residual"] = max_parity_residual;
        j["max_probability_residual"] = max_prob_residual;
        j["membership_failures"] = membership_failures;
        j["tolerance"] = tol;
        j["pass"] = pass;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "projector identity deviation: " << fmt(identity_dev) << "\n";
        std::cout << "max parity residual over " << samples
                  << " random states: " << fmt(max_parity_residual) << "\n";
        std::cout << "max outcome-probability residual (solver vs Born): "
                  << fmt(max_prob_residual) << "\n";
        std::cout << "level-3 membership failures: " << membership_failures << "\n";
        std::cout << (pass ? "PASS" : "FAIL") << " at tol " << fmt(tol) << "\n";
    }
    return pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"no-signaling boxes with Bell-type joint measurements"};
    app.require_subcommand(1);

    // validate
    std::string box_path;
    int level = 3;
    std::optional<double> lambda_flag;
    std::optional<double> alpha_flag;
    double tol = 1e-9;
    bool as_json = false;
    CLI::App* validate = app.add_subcommand("validate", "check box membership at a level");
    validate->add_option("box", box_path, "box JSON file")->required();
    validate->add_option("--level", level, "membership level 1..3")->check(CLI::Range(1, 3));
    validate->add_option("--lambda", lambda_flag, "noisy family weight in [0,1)");
    validate->add_option("--alpha", alpha_flag, "nonmax basis angle in [0, pi/4]");
    validate->add_option("--tol", tol, "constraint tolerance");
    validate->add_flag("--json", as_json, "machine-readable report");

    // scan-ball
    double lambda = 0.0;
    int grid = 41;
    std::string out_path;
    std::optional<double> slice;
    int threads = 1;
    CLI::App* scan_ball =
        app.add_subcommand("scan-ball", "feasibility grid over local outcome probabilities");
    scan_ball->add_option("--lambda", lambda, "noise weight in [0,1)")->required();
    scan_ball->add_option("--grid", grid, "lattice points per axis")->check(CLI::Range(2, 2001));
    scan_ball->add_option("--out", out_path, "output CSV path")->required();
    scan_ball->add_option("--slice", slice, "fix p_z and emit a 2-D slice");
    scan_ball->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 64));
    scan_ball->add_option("--tol", tol, "boundary tolerance");

    // scan-lh
    std::optional<double> alpha_rad;
    std::optional<int> alpha_sixteenths;
    CLI::App* scan_lh =
        app.add_subcommand("scan-lh", "feasibility grid over cube half-widths (h, l)");
    scan_lh->add_option("--alpha", alpha_rad, "basis angle in radians");
    scan_lh->add_option("--alpha-sixteenths", alpha_sixteenths,
                        "basis angle as k in alpha = k*pi/16");
    scan_lh->add_option("--grid", grid, "lattice points per axis")->check(CLI::Range(2, 2001));
    scan_lh->add_option("--out", out_path, "output CSV path")->required();
    scan_lh->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 64));
    scan_lh->add_option("--tol", tol, "boundary tolerance");

    // chsh
    bool exact = false;
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string witness_path;
    std::string a1 = "X", a2 = "Z", b1 = "X", b2 = "Z";
    CLI::App* chsh = app.add_subcommand("chsh", "maximize or sample the CHSH value");
    chsh->add_flag("--exact", exact, "exact LP optimum (levels 1, 2)");
    chsh->add_option("--level", level, "1 or 2 with --exact, 3 for sampling")
        ->check(CLI::Range(1, 3));
    chsh->add_option("--a1", a1, "first A setting (X, Y or Z)");
    chsh->add_option("--a2", a2, "second A setting");
    chsh->add_option("--b1", b1, "first B setting");
    chsh->add_option("--b2", b2, "second B setting");
    chsh->add_option("--trials", trials, "boxes to sample at level 3")
        ->check(CLI::Range(1, 100000000));
    chsh->add_option("--seed", seed, "sampler seed");
    chsh->add_option("--workers", workers, "sampler walkers")->check(CLI::Range(1, 64));
    chsh->add_option("--witness", witness_path, "write the maximizing box as JSON");
    chsh->add_flag("--json", as_json, "machine-readable output");

    // oracle
    int samples = 1000;
    double oracle_tol = 1e-12;
    CLI::App* oracle = app.add_subcommand("oracle", "quantum consistency checks");
    oracle->add_option("--samples", samples, "random states to test")->check(CLI::Range(1, 1000000));
    oracle->add_option("--seed", seed, "state generator seed");
    oracle->add_option("--tol", oracle_tol, "residual tolerance");
    oracle->add_flag("--json", as_json, "machine-readable report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints help or the error message
        return e.get_exit_code() == 0 ? 0 : kExitInput;
    }

    try {
        if (validate->parsed()) {
            // validate keeps its own default tolerance unless overridden
            return cmd_validate(box_path, level, lambda_flag, alpha_flag, tol, as_json);
        }
        if (scan_ball->parsed()) return cmd_scan_ball(lambda, grid, out_path, slice, threads, tol);
        if (scan_lh->parsed()) {
            if (alpha_rad && alpha_sixteenths) {
                std::cerr << "error: --alpha and --alpha-sixteenths are mutually exclusive\n";
                return kExitInput;
            }
            double alpha = 0.0;
            if (alpha_sixteenths)
                alpha = *alpha_sixteenths * 0.19634954084936207740;  // pi/16
            else if (alpha_rad)
                alpha = *alpha_rad;
            else {
                std::cerr << "error: scan-lh needs --alpha or --alpha-sixteenths\n";
                return kExitInput;
            }
            return cmd_scan_lh(alpha, grid, out_path, threads, tol);
        }
        if (chsh->parsed()) {
            ChshSpec spec{setting_from_char(a1.at(0)), setting_from_char(a2.at(0)),
                          setting_from_char(b1.at(0)), setting_from_char(b2.at(0))};
            spec.validate();
            if (exact && level == 3) {
                std::cerr << "error: --exact supports levels 1 and 2 only\n";
                return kExitInput;
            }
            if (!exact && level != 3) {
                std::cerr << "error: sampling runs at level 3; use --exact for levels 1, 2\n";
                return kExitInput;
            }
            return cmd_chsh(exact, level, spec, trials, seed, workers, witness_path, as_json);
        }
        if (oracle->parsed()) return cmd_oracle(samples, seed, oracle_tol, as_json);
    } catch (const BoxFormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitInput;
}
