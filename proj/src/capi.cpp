#include "logsob/logsob_c.h"

#include <json.hpp>

#include <cstring>
#include <string>

#include "logsob/bubble.hpp"
#include "logsob/core.hpp"
#include "logsob/experiments.hpp"
#include "logsob/field_io.hpp"
#include "logsob/fit.hpp"
#include "logsob/grid.hpp"
#include "logsob/linearized.hpp"
#include "logsob/norms.hpp"

struct logsob_grid {
    logsob::Grid rep;
};

struct logsob_field {
    logsob::Field rep;
};

struct logsob_bubble {
    logsob::BubblePair rep;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <class F>
logsob_status guarded(F&& fn) {
    try {
        fn();
        return LOGSOB_OK;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return LOGSOB_EINVAL;
    } catch (const logsob::nonconvergence_error& e) {
        g_last_error = e.what();
        return LOGSOB_ENOCONV;
    } catch (const logsob::solve_error& e) {
        g_last_error = e.what();
        return LOGSOB_ENOCONV;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LOGSOB_EINTERNAL;
    }
}

std::vector<logsob::Point> unpack_centers(const logsob::Grid& g, const double* centers,
                                          int ncenters) {
    std::vector<logsob::Point> out;
    for (int i = 0; i < ncenters; ++i) {
        logsob::Point p = {0.0, 0.0};
        for (int l = 0; l < g.dim; ++l) p[l] = centers[i * g.dim + l];
        out.push_back(p);
    }
    return out;
}

}  // namespace

extern "C" {

const char* logsob_version(void) { return "logsob 1.0.0"; }

const char* logsob_last_error(void) { return g_last_error.c_str(); }

void logsob_string_free(char* s) { std::free(s); }

logsob_status logsob_grid_create(int dim, double radius, int points_per_axis, int stencil_order,
                                 logsob_grid** out) {
    return guarded([&] {
        *out = new logsob_grid{logsob::make_grid(dim, radius, points_per_axis, stencil_order)};
    });
}

void logsob_grid_destroy(logsob_grid* g) { delete g; }

void logsob_field_destroy(logsob_field* f) { delete f; }

logsob_status logsob_field_read(const char* path, logsob_field** out) {
    try {
        *out = new logsob_field{logsob::read_field(path)};
        return LOGSOB_OK;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return LOGSOB_EINVAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LOGSOB_EIO;
    }
}

logsob_status logsob_field_write(const logsob_field* f, const char* path) {
    try {
        logsob::write_field(f->rep, path);
        return LOGSOB_OK;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LOGSOB_EIO;
    }
}

logsob_status logsob_field_size(const logsob_field* f, size_t* out) {
    return guarded([&] { *out = f->rep.size(); });
}

logsob_status logsob_field_values(const logsob_field* f, const double** out) {
    return guarded([&] { *out = f->rep.values.data(); });
}

logsob_status logsob_gaussian_create(const logsob_grid* g, double inverse_variance,
                                     const double* center, int gauge, logsob_field** out) {
    return guarded([&] {
        logsob::GaussianParams params;
        params.inverse_variance = inverse_variance;
        for (int l = 0; l < g->rep.dim; ++l) params.center[l] = center[l];
        params.gauge = gauge == 1 ? logsob::Gauge::solution : logsob::Gauge::unit_l2;
        *out = new logsob_field{logsob::gaussian_extremal(params, g->rep)};
    });
}

logsob_status logsob_residual(const logsob_field* u, logsob_field** out) {
    return guarded([&] { *out = new logsob_field{logsob::residual(u->rep)}; });
}

logsob_status logsob_norms_json(const logsob_field* u, char** json) {
    return guarded([&] {
        logsob::NormReport r = logsob::norms(u->rep);
        nlohmann::json j;
        j["l2"] = r.l2;
        j["h1"] = r.h1;
        j["grad_l2"] = r.grad_l2;
        *json = dup_string(j.dump());
    });
}

logsob_status logsob_hminus1(const logsob_field* f, double* out) {
    return guarded([&] { *out = logsob::norm_hminus1(f->rep); });
}

logsob_status logsob_deficit_json(const logsob_field* u, int normalize, char** json) {
    return guarded([&] {
        logsob::DeficitReport r = logsob::deficit(u->rep, normalize != 0);
        *json = dup_string(logsob::deficit_to_json(r));
    });
}

logsob_status logsob_spectrum_json(const logsob_grid* g, int kind, const double* centers,
                                   int ncenters, int count, char** json) {
    return guarded([&] {
        auto cs = unpack_centers(g->rep, centers, ncenters);
        logsob::SpectralReport r = logsob::spectrum(
            kind == 0 ? logsob::LinKind::oscillator : logsob::LinKind::around_bubbles, cs, g->rep,
            count);
        *json = dup_string(logsob::spectral_to_json(r));
    });
}

logsob_status logsob_coercivity(const logsob_grid* g, const double* centers, int ncenters,
                                int include_radial, double* out) {
    return guarded([&] {
        auto cs = unpack_centers(g->rep, centers, ncenters);
        *out = logsob::coercivity_gap(g->rep, cs,
                                      include_radial ? logsob::Span::translations_and_radial
                                                     : logsob::Span::translations);
    });
}

logsob_status logsob_fit_json(const logsob_field* u, int nu, char** json) {
    return guarded([&] {
        if (nu == 0) {
            logsob::StruweResult r = logsob::struwe_decompose(u->rep);
            *json = dup_string(logsob::struwe_to_json(r));
        } else {
            logsob::FitResult r =
                logsob::fit_distance(u->rep, nu, logsob::seed_centers(u->rep, nu));
            *json = dup_string(logsob::fit_to_json(r));
        }
    });
}

logsob_status logsob_bubble_create(double L, int dim, logsob_bubble** out) {
    return guarded([&] { *out = new logsob_bubble{logsob::build_pair(L, dim)}; });
}

void logsob_bubble_destroy(logsob_bubble* b) { delete b; }

logsob_status logsob_bubble_summary_json(const logsob_bubble* b, char** json) {
    return guarded([&] { *json = dup_string(logsob::bubble_to_json(b->rep)); });
}

logsob_status logsob_bubble_field(const logsob_bubble* b, int which, logsob_field** out) {
    return guarded([&] {
        switch (which) {
            case 0: *out = new logsob_field{b->rep.rho}; break;
            case 1: *out = new logsob_field{b->rep.u}; break;
            case 2: *out = new logsob_field{b->rep.f}; break;
            default: throw std::invalid_argument("bubble field selector must be 0, 1 or 2");
        }
    });
}

logsob_status logsob_bubble_witness_json(const logsob_bubble* b, char** json) {
    return guarded([&] {
        logsob::WitnessReport w = logsob::lower_bound_witness(b->rep);
        *json = dup_string(logsob::witness_to_json(w));
    });
}

logsob_status logsob_sweep_json(const double* L_list, int n, int dim, char** json, char** csv) {
    return guarded([&] {
        std::vector<double> ls(L_list, L_list + n);
        logsob::SweepResult r = logsob::sweep_rates(ls, dim);
        if (json) *json = dup_string(logsob::sweep_to_json(r));
        if (csv) *csv = dup_string(logsob::sweep_to_csv(r));
    });
}

logsob_status logsob_scalarmax_json(const double* eta_list, int n, char** json) {
    return guarded([&] {
        std::vector<double> es(eta_list, eta_list + n);
        std::vector<logsob::ScalarMaxPoint> pts;
        logsob::RateFit fit = logsob::scalar_max_curve(es, &pts);
        nlohmann::json j = nlohmann::json::parse(logsob::ratefit_to_json(fit));
        nlohmann::json jp = nlohmann::json::array();
        for (const auto& p : pts) jp.push_back({{"eta", p.eta},
                                                {"alpha_star", p.alpha_star},
                                                {"max_value", p.max_value}});
        j["points"] = jp;
        *json = dup_string(j.dump());
    });
}

logsob_status logsob_interaction_json(const double* eta_list, int n, double sigma,
                                      double sigma_prime, char** json) {
    return guarded([&] {
        std::vector<double> es(eta_list, eta_list + n);
        logsob::InteractionResult r = logsob::interaction_curve(es, sigma, sigma_prime);
        *json = dup_string(logsob::interaction_to_json(r));
    });
}

logsob_status logsob_probe_json(int nu, double L, const double* eps_list, int neps, int trials,
                                uint64_t seed, char** json) {
    return guarded([&] {
        std::vector<double> eps(eps_list, eps_list + neps);
        logsob::ProbeReport r = logsob::stability_probe(nu, L, eps, trials, seed);
        *json = dup_string(logsob::probe_to_json(r));
    });
}

}  // extern "C"
