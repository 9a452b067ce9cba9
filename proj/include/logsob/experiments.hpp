// Rate sweeps and property probes: the asymptotic claims as measured slopes
// and bounded ratios.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logsob/bubble.hpp"
#include "logsob/grid.hpp"

namespace logsob {

struct RateFit {
    std::vector<double> abscissa;    // L^2 or eta^2
    std::vector<double> log_values;
    double slope = 0.0;
    double intercept = 0.0;
    double max_abs_residual = 0.0;
};

RateFit fit_rate(const std::vector<double>& abscissa, const std::vector<double>& log_values);

struct SweepRow {
    double L = 0.0;
    double res_hminus1 = 0.0;
    double dist_h1 = 0.0;
    double ratio = 0.0;
    int iters = 0;
    double min_u = 0.0;
    bool ok = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    RateFit fnorm_fit;  // ln ||f_L||_{H^-1} against L^2
    RateFit dist_fit;   // ln dist_H1 against L^2
    double ratio_max = 0.0;
    double ratio_min = 0.0;
    double ratio_spread = 0.0;  // max/min of dist/||f||
    int failures = 0;
};

SweepResult sweep_rates(const std::vector<double>& L_list, int dim = 1);

struct ScalarMaxPoint {
    double eta = 0.0;
    double alpha_star = 0.0;
    double max_value = 0.0;
};

// max over alpha > -1/2 of exp(-(a^2/2+a+1/2) eta^2) log(1+exp((a+1/2) eta^2)),
// by bracketed golden section refined to 1e-10; fit of ln max against eta^2.
RateFit scalar_max_curve(const std::vector<double>& eta_list,
                         std::vector<ScalarMaxPoint>* points = nullptr);

// Exact stationarity condition of the scalar maximization solved by bisection
// (independent route to alpha*).
double scalar_max_alpha_bisect(double eta);

struct InteractionResult {
    RateFit fit;                    // ln I(eta) against eta^2
    double laplace_exponent = 0.0;  // saddle-point oracle slope
    double stated_exponent = 0.0;    // the stated -(1-sigma'')/2 bound slope
    double sigma = 0.0, sigma_prime = 0.0;
};

InteractionResult interaction_curve(const std::vector<double>& eta_list, double sigma,
                                    double sigma_prime);

struct ProbeReport {
    int trials = 0;
    std::vector<double> ratios;    // dist_H1 / ||residual||_{H^-1}
    std::vector<double> eps_used;
    double median_ratio = 0.0;
    double max_ratio = 0.0;
    std::uint64_t seed = 0;
    double kendall_tau = 0.0;  // ratio against eps
    int skipped = 0;           // energy-window violations
    int exact = 0;             // 0/0-guarded exact trials
};

ProbeReport stability_probe(int nu, double L, const std::vector<double>& eps_list, int trials,
                            std::uint64_t seed);

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b);

// Thread cap honoring LOGSOB_THREADS (default: hardware concurrency).
int thread_budget();

std::string ratefit_to_json(const RateFit& r);
std::string sweep_to_json(const SweepResult& r);
std::string sweep_to_csv(const SweepResult& r);
std::string interaction_to_json(const InteractionResult& r);
std::string probe_to_json(const ProbeReport& r);

}  // namespace logsob
