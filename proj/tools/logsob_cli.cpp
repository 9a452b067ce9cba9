// logsob command-line front end. Talks to the shared library exclusively
// through the C API; all numerics live behind that boundary.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "logsob/logsob_c.h"

namespace {

using nlohmann::json;

struct Options {
    int dim = 1;
    double radius = 10.0;
    int n = 401;
    int order = 4;
    double sigma = 0.1;
    double sigma_prime = 0.1;
    std::uint64_t seed = 1;
    std::string out = ".";
    std::string format = "json";
    std::string input;
    std::string config;
    std::string L = "6";
    std::string eta;
    std::string eps = "1e-4,2e-4,5e-4,1e-3,2e-3,5e-3,1e-2";
    int nu = 0;
    int trials = 50;
    int count = 6;
    std::string kind = "oscillator";
    double a = 1.0;
    std::string center = "0";
    std::string gauge = "unit";
    bool check = false;
    bool normalize = false;
    bool grid_flags_set = false;
};

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(logsob_status st) {
    std::cerr << "error: " << logsob_last_error() << "\n";
    std::exit(st == LOGSOB_ENOCONV ? 2 : 1);
}

void require_ok(logsob_status st) {
    if (st != LOGSOB_OK) fail(st);
}

std::string take_string(char* s) {
    std::string out = s ? s : "";
    logsob_string_free(s);
    return out;
}

// "a:b:step" (both ends inclusive within 1e-12), "x,y,z" or a single number.
std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double a, b, step;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0.0)
            throw CLI::ValidationError("range", "expected a:b:step with step > 0");
        for (double v = a; v <= b + 1e-12 * std::max(1.0, std::abs(b)); v += step)
            out.push_back(v);
        return out;
    }
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw CLI::ValidationError("list", "no values parsed");
    return out;
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + name + " under " + dir);
    f << text;
    if (text.empty() || text.back() != '\n') f << "\n";
}

logsob_grid* make_grid_handle(const Options& opt) {
    logsob_grid* g = nullptr;
    double radius = opt.radius;
    int n = opt.n;
    if (opt.dim == 2 && !opt.grid_flags_set) {
        radius = 8.0;
        n = 161;
    }
    require_ok(logsob_grid_create(opt.dim, radius, n, opt.order, &g));
    return g;
}

logsob_field* load_or_make_field(const Options& opt) {
    logsob_field* f = nullptr;
    if (!opt.input.empty()) {
        require_ok(logsob_field_read(opt.input.c_str(), &f));
        return f;
    }
    logsob_grid* g = make_grid_handle(opt);
    std::vector<double> c = parse_list(opt.center);
    c.resize(static_cast<std::size_t>(opt.dim), 0.0);
    require_ok(logsob_gaussian_create(g, opt.a, c.data(), opt.gauge == "solution" ? 1 : 0, &f));
    logsob_grid_destroy(g);
    return f;
}

int cmd_spectrum(const Options& opt) {
    logsob_grid* g = make_grid_handle(opt);
    std::vector<double> centers;
    int kind = 0;
    if (opt.kind == "bubbles") {
        kind = 1;
        double L = parse_list(opt.L).front();
        centers.assign(static_cast<std::size_t>(2 * opt.dim), 0.0);
        centers[0] = +0.5 * L;
        centers[static_cast<std::size_t>(opt.dim)] = -0.5 * L;
    } else if (opt.kind != "oscillator") {
        throw CLI::ValidationError("--kind", "must be oscillator or bubbles");
    }
    char* js = nullptr;
    require_ok(logsob_spectrum_json(g, kind, centers.data(), centers.empty() ? 0 : 2, opt.count,
                                    &js));
    logsob_grid_destroy(g);
    std::string text = take_string(js);
    write_text(opt.out, "spectrum.json", text);
    json j = json::parse(text);
    std::printf("spectrum: %d eigenvalues, lowest %.6f\n", static_cast<int>(j["eigenvalues"].size()),
                j["eigenvalues"][0].get<double>());
    if (opt.check && kind == 0) {
        std::vector<double> want =
            opt.dim == 1 ? std::vector<double>{-2, 0, 2, 4, 6, 8} : std::vector<double>{-2, 0, 0, 2, 2, 2};
        double tol = opt.dim == 1 ? 1e-3 : 5e-3;
        for (std::size_t i = 0; i < want.size() && i < j["eigenvalues"].size(); ++i)
            if (std::abs(j["eigenvalues"][i].get<double>() - want[i]) > tol)
                throw CheckFailure("spectrum eigenvalue " + std::to_string(i) + " off by more than tolerance");
    }
    return 0;
}

int cmd_deficit(const Options& opt) {
    logsob_field* f = load_or_make_field(opt);
    char* js = nullptr;
    require_ok(logsob_deficit_json(f, opt.normalize ? 1 : 0, &js));
    logsob_field_destroy(f);
    std::string text = take_string(js);
    write_text(opt.out, "deficit.json", text);
    json j = json::parse(text);
    std::printf("deficit: %.12e (entropy %.9f)\n", j["deficit"].get<double>(),
                j["entropy"].get<double>());
    if (opt.check && j["deficit"].get<double>() < -1e-8)
        throw CheckFailure("deficit below -1e-8");
    return 0;
}

int cmd_residual(const Options& opt) {
    logsob_field* f = load_or_make_field(opt);
    logsob_field* r = nullptr;
    require_ok(logsob_residual(f, &r));
    double h = 0.0;
    require_ok(logsob_hminus1(r, &h));
    std::filesystem::create_directories(opt.out);
    require_ok(logsob_field_write(
        r, (std::filesystem::path(opt.out) / "residual_field.json").string().c_str()));
    json j;
    j["hminus1"] = h;
    write_text(opt.out, "residual.json", j.dump());
    std::printf("residual: ||f||_{H^-1} = %.12e\n", h);
    logsob_field_destroy(r);
    logsob_field_destroy(f);
    return 0;
}

int cmd_fit(const Options& opt) {
    logsob_field* f = load_or_make_field(opt);
    char* js = nullptr;
    require_ok(logsob_fit_json(f, opt.nu, &js));
    logsob_field_destroy(f);
    std::string text = take_string(js);
    write_text(opt.out, "fit.json", text);
    json j = json::parse(text);
    std::printf("fit: dist_h1 = %.9e, converged = %s\n", j["dist_h1"].get<double>(),
                j["converged"].get<bool>() ? "true" : "false");
    if (opt.check && !j["converged"].get<bool>()) throw CheckFailure("fit did not converge");
    return 0;
}

int cmd_bubble(const Options& opt) {
    double L = parse_list(opt.L).front();
    logsob_bubble* b = nullptr;
    require_ok(logsob_bubble_create(L, opt.dim, &b));
    char* js = nullptr;
    require_ok(logsob_bubble_summary_json(b, &js));
    std::string text = take_string(js);
    write_text(opt.out, "bubble.json", text);
    const char* names[3] = {"rho.json", "u.json", "f.json"};
    for (int which = 0; which < 3; ++which) {
        logsob_field* f = nullptr;
        require_ok(logsob_bubble_field(b, which, &f));
        require_ok(logsob_field_write(
            f, (std::filesystem::path(opt.out) / names[which]).string().c_str()));
        logsob_field_destroy(f);
    }
    logsob_bubble_destroy(b);
    json j = json::parse(text);
    std::printf("bubble: L = %g, %d iterations, min_u = %.6e, ||rho||_H1 = %.6e\n", L,
                j["iterations"].get<int>(), j["min_u"].get<double>(), j["rho_h1"].get<double>());
    if (opt.check) {
        if (!j["converged"].get<bool>() || j["iterations"].get<int>() > 30 ||
            !(j["min_u"].get<double>() > 0.0))
            throw CheckFailure("bubble construction check failed");
    }
    return 0;
}

int cmd_sweep(const Options& opt) {
    std::vector<double> ls = parse_list(opt.L);
    char* js = nullptr;
    char* csv = nullptr;
    require_ok(logsob_sweep_json(ls.data(), static_cast<int>(ls.size()), opt.dim, &js, &csv));
    std::string jtext = take_string(js), ctext = take_string(csv);
    if (opt.format != "csv") write_text(opt.out, "sweep.json", jtext);
    if (opt.format != "json") write_text(opt.out, "sweep.csv", ctext);
    json j = json::parse(jtext);
    double slope = j["fnorm_fit"]["slope"].get<double>();
    double spread = j["ratio_spread"].get<double>();
    std::printf("sweep: slope(ln||f||, L^2) = %.6f, dist slope = %.6f, ratio spread = %.3f\n",
                slope, j["dist_fit"]["slope"].get<double>(), spread);
    if (opt.check) {
        if (std::abs(slope + 0.125) > 0.025)
            throw CheckFailure("sweep slope outside -0.125 +/- 0.025 (measured " +
                               std::to_string(slope) + ")");
        if (!(spread <= 3.0))
            throw CheckFailure("sweep ratio spread above 3 (measured " + std::to_string(spread) +
                               ")");
    }
    return 0;
}

int cmd_scalarmax(const Options& opt) {
    std::vector<double> etas = opt.eta.empty() ? parse_list("4:10:1") : parse_list(opt.eta);
    char* js = nullptr;
    require_ok(logsob_scalarmax_json(etas.data(), static_cast<int>(etas.size()), &js));
    std::string text = take_string(js);
    write_text(opt.out, "scalarmax.json", text);
    json j = json::parse(text);
    double slope = j["slope"].get<double>();
    std::printf("scalarmax: slope(ln max, eta^2) = %.6f\n", slope);
    if (opt.check && std::abs(slope + 0.125) > 0.003)
        throw CheckFailure("scalarmax slope outside -0.125 +/- 0.003");
    return 0;
}

int cmd_interaction(const Options& opt) {
    std::vector<double> etas = opt.eta.empty() ? parse_list("4:10:1") : parse_list(opt.eta);
    char* js = nullptr;
    require_ok(logsob_interaction_json(etas.data(), static_cast<int>(etas.size()), opt.sigma,
                                       opt.sigma_prime, &js));
    std::string text = take_string(js);
    write_text(opt.out, "interaction.json", text);
    json j = json::parse(text);
    double slope = j["measured_slope"].get<double>();
    std::printf("interaction: measured %.6f, laplace %.6f, stated bound %.6f\n", slope,
                j["laplace_exponent"].get<double>(), j["stated_bound_exponent"].get<double>());
    if (opt.check) {
        double lap = j["laplace_exponent"].get<double>();
        if (opt.sigma == 0.0 && opt.sigma_prime == 0.0) {
            if (std::abs(slope + 0.25) > 0.01) throw CheckFailure("interaction slope outside -0.25 +/- 0.01");
        } else if (std::abs(slope - lap) > 0.05 * std::abs(lap)) {
            throw CheckFailure("interaction slope more than 5% from the saddle-point oracle");
        }
    }
    return 0;
}

int cmd_probe(const Options& opt) {
    std::vector<double> eps = parse_list(opt.eps);
    double L = parse_list(opt.L).front();
    int nu = opt.nu == 0 ? 1 : opt.nu;
    char* js = nullptr;
    require_ok(logsob_probe_json(nu, L, eps.data(), static_cast<int>(eps.size()), opt.trials,
                                 opt.seed, &js));
    std::string text = take_string(js);
    write_text(opt.out, "probe.json", text);
    json j = json::parse(text);
    std::printf("probe: nu=%d, %zu ratios, median %.4f, max %.4f, kendall %.4f\n", nu,
                j["ratios"].size(), j["median_ratio"].get<double>(), j["max_ratio"].get<double>(),
                j["kendall_tau"].get<double>());
    if (opt.check) {
        double med = j["median_ratio"].get<double>(), mx = j["max_ratio"].get<double>();
        for (const auto& r : j["ratios"])
            if (!std::isfinite(r.get<double>())) throw CheckFailure("non-finite probe ratio");
        if (!(mx <= 10.0 * med)) throw CheckFailure("max ratio above 10x median");
        if (std::abs(j["kendall_tau"].get<double>()) > 0.4)
            throw CheckFailure("kendall tau above 0.4 in magnitude");
    }
    return 0;
}

int cmd_witness(const Options& opt) {
    double L = parse_list(opt.L).front();
    logsob_bubble* b = nullptr;
    require_ok(logsob_bubble_create(L, opt.dim, &b));
    char* js = nullptr;
    require_ok(logsob_bubble_witness_json(b, &js));
    logsob_bubble_destroy(b);
    std::string text = take_string(js);
    write_text(opt.out, "witness.json", text);
    json j = json::parse(text);
    std::printf("witness: bound %.6e <= ||f||_{H^-1} %.6e, int E psi = %.6e\n",
                j["lower_bound"].get<double>(), j["fnorm_hminus1"].get<double>(),
                j["integral_E"].get<double>());
    if (opt.check && !(j["lower_bound"].get<double>() <=
                       j["fnorm_hminus1"].get<double>() * (1.0 + 1e-9)))
        throw CheckFailure("witness duality bound violated");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"logsob: numerical laboratory for log-Sobolev critical-point stability"};
    app.require_subcommand(1);

    std::vector<CLI::App*> subs;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--dim", opt.dim, "spatial dimension (1 or 2)");
        auto* r = sub->add_option("--radius", opt.radius, "box half-width");
        auto* n = sub->add_option("--n", opt.n, "points per axis");
        sub->add_option("--order", opt.order, "stencil order (2 or 4)");
        sub->add_option("--sigma", opt.sigma, "weighted-norm / interaction sigma");
        sub->add_option("--sigma-prime", opt.sigma_prime, "interaction sigma'");
        sub->add_option("--L", opt.L, "separation or range a:b:step");
        sub->add_option("--eta", opt.eta, "eta list or range a:b:step");
        sub->add_option("--nu", opt.nu, "bubble count (0 = detect)");
        sub->add_option("--eps", opt.eps, "perturbation sizes (list or range)");
        sub->add_option("--trials", opt.trials, "probe trials");
        sub->add_option("--seed", opt.seed, "random seed");
        sub->add_option("--config", opt.config, "JSON config file (flags override)");
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--format", opt.format, "json or csv")
            ->check(CLI::IsMember({"json", "csv", "both"}));
        sub->add_option("--input", opt.input, "input field file (logsob-field-v1)");
        sub->add_option("--count", opt.count, "eigenpair count");
        sub->add_option("--kind", opt.kind, "operator kind: oscillator | bubbles");
        sub->add_option("--a", opt.a, "gaussian inverse variance");
        sub->add_option("--center", opt.center, "gaussian center coordinates");
        sub->add_option("--gauge", opt.gauge, "gaussian gauge: unit | solution");
        sub->add_flag("--check", opt.check, "verify acceptance thresholds (exit 3 on failure)");
        sub->add_flag("--normalize", opt.normalize, "rescale input to unit L2 mass");
        sub->parse_complete_callback([&opt, r, n] {
            opt.grid_flags_set = r->count() > 0 || n->count() > 0;
        });
        subs.push_back(sub);
        return sub;
    };

    add_common(app.add_subcommand("spectrum", "eigenvalues of the linearized operator"));
    add_common(app.add_subcommand("deficit", "log-Sobolev deficit of a field"));
    add_common(app.add_subcommand("residual", "Euler-Lagrange residual and its H^-1 norm"));
    add_common(app.add_subcommand("fit", "H1 distance to the bubble manifold"));
    add_common(app.add_subcommand("bubble", "two-bubble construction at separation L"));
    add_common(app.add_subcommand("sweep", "rate sweep over a list of separations"));
    add_common(app.add_subcommand("scalarmax", "scalar maximization rate curve"));
    add_common(app.add_subcommand("interaction", "gaussian interaction integral curve"));
    add_common(app.add_subcommand("probe", "randomized stability ratio probe"));
    add_common(app.add_subcommand("witness", "cut-off lower-bound witness"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 1;
    }

    // config file provides defaults; explicit flags already won at parse time
    if (!opt.config.empty()) {
        std::ifstream cf(opt.config);
        if (!cf) {
            std::cerr << "error: cannot read config " << opt.config << "\n";
            return 1;
        }
        json j;
        try {
            cf >> j;
        } catch (const std::exception& e) {
            std::cerr << "error: bad config: " << e.what() << "\n";
            return 1;
        }
        CLI::App* active = app.get_subcommands().front();
        auto maybe = [&](const char* key, auto& slot) {
            using T = std::decay_t<decltype(slot)>;
            const CLI::Option* o = active->get_option_no_throw(std::string("--") + key);
            if (j.contains(key) && (!o || o->count() == 0)) slot = j.at(key).get<T>();
        };
        maybe("dim", opt.dim);
        maybe("radius", opt.radius);
        maybe("n", opt.n);
        maybe("order", opt.order);
        maybe("sigma", opt.sigma);
        maybe("seed", opt.seed);
        maybe("out", opt.out);
        maybe("format", opt.format);
        maybe("L", opt.L);
        maybe("eta", opt.eta);
        maybe("nu", opt.nu);
        maybe("eps", opt.eps);
        maybe("trials", opt.trials);
        if (j.contains("radius") || j.contains("n")) opt.grid_flags_set = true;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        const std::string name = active->get_name();
        if (name == "spectrum") return cmd_spectrum(opt);
        if (name == "deficit") return cmd_deficit(opt);
        if (name == "residual") return cmd_residual(opt);
        if (name == "fit") return cmd_fit(opt);
        if (name == "bubble") return cmd_bubble(opt);
        if (name == "sweep") return cmd_sweep(opt);
        if (name == "scalarmax") return cmd_scalarmax(opt);
        if (name == "interaction") return cmd_interaction(opt);
        if (name == "probe") return cmd_probe(opt);
        if (name == "witness") return cmd_witness(opt);
        std::cerr << "unknown subcommand\n";
        return 1;
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 3;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
