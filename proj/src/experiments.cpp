#include "logsob/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <thread>

#include "logsob/core.hpp"
#include "logsob/fit.hpp"
#include "logsob/norms.hpp"
#include "logsob/rng.hpp"

namespace logsob {

int thread_budget() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("LOGSOB_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) hw = std::min(hw, cap);
    }
    return hw;
}

namespace {

// deterministic parallel map: slot i is computed by exactly one worker
void parallel_for(int n, const std::function<void(int)>& fn) {
    int threads = std::min(thread_budget(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

RateFit fit_rate(const std::vector<double>& abscissa, const std::vector<double>& log_values) {
    if (abscissa.size() != log_values.size() || abscissa.size() < 2)
        throw std::invalid_argument("fit_rate: need >= 2 matching samples");
    RateFit r;
    r.abscissa = abscissa;
    r.log_values = log_values;
    const std::size_t n = abscissa.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += abscissa[i];
        sy += log_values[i];
        sxx += abscissa[i] * abscissa[i];
        sxy += abscissa[i] * log_values[i];
    }
    double denom = n * sxx - sx * sx;
    r.slope = (n * sxy - sx * sy) / denom;
    r.intercept = (sy - r.slope * sx) / n;
    for (std::size_t i = 0; i < n; ++i)
        r.max_abs_residual =
            std::max(r.max_abs_residual, std::abs(log_values[i] - r.slope * abscissa[i] - r.intercept));
    return r;
}

SweepResult sweep_rates(const std::vector<double>& L_list, int dim) {
    if (L_list.size() < 4) throw std::invalid_argument("sweep_rates: need >= 4 sweep points");
    for (std::size_t i = 1; i < L_list.size(); ++i)
        if (!(L_list[i] > L_list[i - 1]))
            throw std::invalid_argument("sweep_rates: L list must be ascending");

    SweepResult res;
    res.rows.assign(L_list.size(), SweepRow{});
    parallel_for(static_cast<int>(L_list.size()), [&](int i) {
        SweepRow& row = res.rows[static_cast<std::size_t>(i)];
        row.L = L_list[static_cast<std::size_t>(i)];
        try {
            BubblePair pair = build_pair(row.L, dim);
            row.res_hminus1 = norm_hminus1(pair.f);
            std::vector<Point> init = {{+0.5 * row.L, 0.0}, {-0.5 * row.L, 0.0}};
            FitResult fit = fit_distance(pair.u, 2, init);
            row.dist_h1 = fit.dist_h1;
            row.ratio = row.dist_h1 / row.res_hminus1;
            row.iters = pair.iterations;
            row.min_u = pair.min_u;
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    });

    std::vector<double> x, lf, ld;
    res.ratio_min = std::numeric_limits<double>::infinity();
    for (const SweepRow& row : res.rows) {
        if (!row.ok) {
            ++res.failures;
            continue;
        }
        x.push_back(row.L * row.L);
        lf.push_back(std::log(row.res_hminus1));
        ld.push_back(std::log(row.dist_h1));
        res.ratio_max = std::max(res.ratio_max, row.ratio);
        res.ratio_min = std::min(res.ratio_min, row.ratio);
    }
    if (x.size() < 4)
        throw nonconvergence_error("sweep_rates: fewer than 4 sweep points succeeded");
    res.fnorm_fit = fit_rate(x, lf);
    res.dist_fit = fit_rate(x, ld);
    res.ratio_spread = res.ratio_max / res.ratio_min;
    return res;
}

namespace {

// ln of m(alpha; eta) = exp(-(a^2/2 + a + 1/2) eta^2) log(1 + exp((a+1/2) eta^2))
double log_scalar_m(double alpha, double eta2) {
    double s = (alpha + 0.5) * eta2;
    double loglog;
    if (s > 30.0)
        loglog = std::log(s + std::log1p(std::exp(-s)));
    else
        loglog = std::log(std::log1p(std::exp(s)));
    return -(0.5 * alpha * alpha + alpha + 0.5) * eta2 + loglog;
}

// d/dalpha of ln m, up to the positive factor eta^2
double scalar_foc(double alpha, double eta2) {
    double s = (alpha + 0.5) * eta2;
    double es = std::exp(-std::abs(s));
    double sigmoid = s >= 0.0 ? 1.0 / (1.0 + es) : es / (1.0 + es);  // e^s/(1+e^s)
    double log1pes = s > 30.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    return -(alpha + 1.0) + sigmoid / log1pes;
}

}  // namespace

double scalar_max_alpha_bisect(double eta) {
    const double eta2 = eta * eta;
    double lo = -0.5 + 1e-6, hi = 3.0;
    double flo = scalar_foc(lo, eta2);
    if (flo <= 0.0) return lo;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (scalar_foc(mid, eta2) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

RateFit scalar_max_curve(const std::vector<double>& eta_list, std::vector<ScalarMaxPoint>* points) {
    for (double e : eta_list)
        if (!(e >= 4.0)) throw std::invalid_argument("scalar_max_curve: eta values must be >= 4");
    std::vector<double> x, lv;
    for (double eta : eta_list) {
        const double eta2 = eta * eta;
        // coarse bracket scan, then golden section
        const double lo = -0.5 + 1e-6, hi = 3.0;
        int best = 0;
        double bestv = -std::numeric_limits<double>::infinity();
        const int scan = 400;
        for (int i = 0; i <= scan; ++i) {
            double a = lo + (hi - lo) * i / scan;
            double v = log_scalar_m(a, eta2);
            if (v > bestv) {
                bestv = v;
                best = i;
            }
        }
        double a = lo + (hi - lo) * std::max(0, best - 1) / scan;
        double b = lo + (hi - lo) * std::min(scan, best + 1) / scan;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
        double f1 = log_scalar_m(c1, eta2), f2 = log_scalar_m(c2, eta2);
        while (b - a > 1e-10) {
            if (f1 < f2) {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + gr * (b - a);
                f2 = log_scalar_m(c2, eta2);
            } else {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - gr * (b - a);
                f1 = log_scalar_m(c1, eta2);
            }
        }
        double astar = 0.5 * (a + b);
        double lm = log_scalar_m(astar, eta2);
        if (points) points->push_back({eta, astar, std::exp(lm)});
        x.push_back(eta2);
        lv.push_back(lm);
    }
    return fit_rate(x, lv);
}

InteractionResult interaction_curve(const std::vector<double>& eta_list, double sigma,
                                    double sigma_prime) {
    if (!(sigma >= 0.0 && sigma <= 0.2 && sigma_prime >= 0.0 && sigma_prime <= 0.2))
        throw std::invalid_argument("interaction_curve: sigma, sigma' must be in [0, 0.2]");
    for (double e : eta_list)
        if (!(e > 0.0)) throw std::invalid_argument("interaction_curve: eta must be positive");
    InteractionResult res;
    res.sigma = sigma;
    res.sigma_prime = sigma_prime;
    std::vector<double> x, lv;
    for (double eta : eta_list) {
        double radius = 0.5 * eta + 7.0;
        int n = static_cast<int>(std::lround(2.0 * radius / 0.05)) + 1;
        Grid g = make_grid(1, radius, n, 4);
        const double a = 1.0 - sigma_prime, b = 1.0 - sigma;
        const double half_amp = 0.5 * (1.0 + g.dim);
        Field prod = sample(g, [&](const Point& p) {
            double r1 = (p[0] + 0.5 * eta) * (p[0] + 0.5 * eta);
            double r2 = (p[0] - 0.5 * eta) * (p[0] - 0.5 * eta);
            return std::exp(a * (half_amp - 0.5 * r1) + b * (half_amp - 0.5 * r2));
        });
        x.push_back(eta * eta);
        lv.push_back(std::log(integrate(prod)));
    }
    res.fit = fit_rate(x, lv);
    const double a = 1.0 - sigma_prime, b = 1.0 - sigma;
    res.laplace_exponent = -0.5 * (a * b / (a + b));
    res.stated_exponent = -0.5 * (1.0 - std::max(sigma, sigma_prime));
    return res;
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    if (n != b.size() || n < 2) return 0.0;
    long long conc = 0, disc = 0, ties_a = 0, ties_b = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double da = a[i] - a[j], db = b[i] - b[j];
            if (da == 0.0 && db == 0.0) continue;
            if (da == 0.0) {
                ++ties_a;
                continue;
            }
            if (db == 0.0) {
                ++ties_b;
                continue;
            }
            if ((da > 0) == (db > 0))
                ++conc;
            else
                ++disc;
        }
    double d1 = static_cast<double>(conc + disc + ties_a);
    double d2 = static_cast<double>(conc + disc + ties_b);
    if (d1 == 0.0 || d2 == 0.0) return 0.0;
    return (conc - disc) / std::sqrt(d1 * d2);
}

ProbeReport stability_probe(int nu, double L, const std::vector<double>& eps_list, int trials,
                            std::uint64_t seed) {
    if (nu != 1 && nu != 2) throw std::invalid_argument("stability_probe: nu must be 1 or 2");
    if (nu == 2 && !(L >= 3.0))
        throw std::invalid_argument("stability_probe: two-bubble probe needs L >= 3");
    if (trials < 10) throw std::invalid_argument("stability_probe: need >= 10 trials");
    if (eps_list.empty()) throw std::invalid_argument("stability_probe: empty eps list");

    double radius = nu == 2 ? 0.5 * L + 7.0 : 10.0;
    int n = static_cast<int>(std::lround(2.0 * radius / 0.05)) + 1;
    Grid grid = make_grid(1, radius, n, 4);
    std::vector<Point> centers;
    if (nu == 1)
        centers = {{0.0, 0.0}};
    else
        centers = {{+0.5 * L, 0.0}, {-0.5 * L, 0.0}};
    Field G = bubble_sum(grid, centers);
    GaussianParams gp;
    gp.gauge = Gauge::solution;
    Field g0 = gaussian_extremal(gp, grid);
    const double c0 = h1_inner(g0, g0);

    ProbeReport rep;
    rep.seed = seed;
    rep.trials = trials;
    struct Slot {
        double ratio = 0.0, eps = 0.0;
        int state = 0;  // 0 ok, 1 skipped, 2 exact
    };
    std::vector<Slot> slots(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int t) {
        Slot& slot = slots[static_cast<std::size_t>(t)];
        try {
            Rng rng(seed + 1000003ULL * static_cast<std::uint64_t>(t));
            Field w = random_unit_h1(grid, rng);
            double eps = eps_list[static_cast<std::size_t>(rng.uniform() * eps_list.size()) %
                                  eps_list.size()];
            Field u(grid);
            for (std::size_t p = 0; p < u.size(); ++p)
                u.values[p] = std::abs(G.values[p] + eps * w.values[p]);
            double energy = h1_inner(u, u);
            slot.eps = eps;
            if (!(energy > (nu - 0.5) * c0 && energy < (nu + 0.5) * c0)) {
                slot.state = 1;
                return;
            }
            FitResult fit = fit_distance(u, nu, centers);
            double res = norm_hminus1(residual(u));
            if (fit.dist_h1 <= 1e-10 && res <= 1e-8) {
                slot.state = 2;  // exact solution: 0/0 guarded
                return;
            }
            slot.ratio = fit.dist_h1 / res;
        } catch (const std::exception&) {
            slot.state = 1;  // failed trial counts as skipped
        }
    });
    for (const Slot& s : slots) {
        if (s.state == 1) {
            ++rep.skipped;
            continue;
        }
        if (s.state == 2) {
            ++rep.exact;
            continue;
        }
        rep.ratios.push_back(s.ratio);
        rep.eps_used.push_back(s.eps);
    }
    if (!rep.ratios.empty()) {
        std::vector<double> sorted = rep.ratios;
        std::sort(sorted.begin(), sorted.end());
        std::size_t m = sorted.size();
        rep.median_ratio = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
        rep.max_ratio = sorted.back();
        rep.kendall_tau = kendall_tau(rep.ratios, rep.eps_used);
    }
    return rep;
}

std::string ratefit_to_json(const RateFit& r) {
    nlohmann::json j;
    j["abscissa"] = r.abscissa;
    j["log_values"] = r.log_values;
    j["slope"] = r.slope;
    j["intercept"] = r.intercept;
    j["max_abs_residual"] = r.max_abs_residual;
    return j.dump();
}

std::string sweep_to_json(const SweepResult& r) {
    nlohmann::json j;
    nlohmann::json rows = nlohmann::json::array();
    for (const SweepRow& row : r.rows) {
        nlohmann::json jr;
        jr["L"] = row.L;
        jr["ok"] = row.ok;
        if (row.ok) {
            jr["res_hminus1"] = row.res_hminus1;
            jr["dist_h1"] = row.dist_h1;
            jr["ratio"] = row.ratio;
            jr["iters"] = row.iters;
            jr["min_u"] = row.min_u;
        } else {
            jr["error"] = row.error;
        }
        rows.push_back(jr);
    }
    j["rows"] = rows;
    j["fnorm_fit"] = nlohmann::json::parse(ratefit_to_json(r.fnorm_fit));
    j["dist_fit"] = nlohmann::json::parse(ratefit_to_json(r.dist_fit));
    j["ratio_max"] = r.ratio_max;
    j["ratio_min"] = r.ratio_min;
    j["ratio_spread"] = r.ratio_spread;
    j["failures"] = r.failures;
    return j.dump();
}

std::string sweep_to_csv(const SweepResult& r) {
    std::string out = "L,res_hminus1,dist_h1,ratio,iters,min_u\n";
    char buf[256];
    for (const SweepRow& row : r.rows) {
        if (!row.ok) continue;
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", row.L,
                      row.res_hminus1, row.dist_h1, row.ratio, row.iters, row.min_u);
        out += buf;
    }
    return out;
}

std::string interaction_to_json(const InteractionResult& r) {
    nlohmann::json j;
    j["fit"] = nlohmann::json::parse(ratefit_to_json(r.fit));
    j["measured_slope"] = r.fit.slope;
    j["laplace_exponent"] = r.laplace_exponent;
    j["stated_bound_exponent"] = r.stated_exponent;
    j["exponent_discrepancy"] = r.fit.slope - r.stated_exponent;
    j["sigma"] = r.sigma;
    j["sigma_prime"] = r.sigma_prime;
    return j.dump();
}

std::string probe_to_json(const ProbeReport& r) {
    nlohmann::json j;
    j["trials"] = r.trials;
    j["ratios"] = r.ratios;
    j["eps_used"] = r.eps_used;
    j["median_ratio"] = r.median_ratio;
    j["max_ratio"] = r.max_ratio;
    j["seed"] = r.seed;
    j["kendall_tau"] = r.kendall_tau;
    j["skipped"] = r.skipped;
    j["exact"] = r.exact;
    return j.dump();
}

}  // namespace logsob
