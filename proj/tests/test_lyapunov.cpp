#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "grnn/dataset.hpp"
#include "grnn/errors.hpp"
#include "grnn/lyapunov.hpp"
#include "grnn/network.hpp"
#include "grnn/perturb.hpp"
#include "grnn/rng.hpp"
#include "grnn/tasks.hpp"

namespace {

grnn::TrajectoryParams default_params() { return grnn::TrajectoryParams{}; }

double eval_cubic(const std::array<double, 4>& a, double s) {
    return ((a[3] * s + a[2]) * s + a[1]) * s + a[0];
}

// Independent root finder: coarse sign scan from 0 upward, then plain
// bisection. Deliberately different from the library's derivative-guided
// bracketing so agreement means something.
double scan_bisect_root(const std::array<double, 4>& a, double hi_limit) {
    const int steps = 20000;
    double prev_s = 0.0;
    double prev_f = eval_cubic(a, prev_s);
    for (int i = 1; i <= steps; ++i) {
        const double s = hi_limit * static_cast<double>(i) / steps;
        const double f = eval_cubic(a, s);
        if (f == 0.0) return s;
        if ((f < 0.0) != (prev_f < 0.0)) {
            double lo = prev_s, hi = s;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = eval_cubic(a, mid);
                if (fm == 0.0) return mid;
                if ((fm < 0.0) == (eval_cubic(a, lo) < 0.0))
                    lo = mid;
                else
                    hi = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev_s = s;
        prev_f = f;
    }
    FAIL("scan found no sign change up to ", hi_limit);
    return 0.0;
}

}  // namespace

TEST_CASE("deviation primitives: scaled rows, weight factors, normalised terms") {
    SUBCASE("delta_x is a scalar multiple of the row") {
        const std::vector<double> row{1.0, 0.5};
        const auto dx = grnn::delta_x(1.0, 1.0, 0.0, 2.0, 0.5, row);
        REQUIRE(dx.size() == 2);
        CHECK(dx[0] == 1.0);
        CHECK(dx[1] == 0.5);

        // zero noise draw and zero range both kill the vector
        for (double v : grnn::delta_x(3.0, 2.0, 0.0, 5.0, 0.0, row)) CHECK(v == 0.0);
        for (double v : grnn::delta_x(3.0, 2.0, 4.0, 4.0, 1.7, row)) CHECK(v == 0.0);

        // componentwise against the formula
        const std::vector<double> row2{0.2, -0.7, 0.0, 1.0};
        const auto dx2 = grnn::delta_x(0.4, 2.5, 1.0, 7.0, -0.3, row2);
        REQUIRE(dx2.size() == row2.size());
        for (std::size_t j = 0; j < row2.size(); ++j)
            CHECK(dx2[j] == 0.4 * (7.0 - 1.0) * 2.5 * -0.3 * row2[j]);
    }

    SUBCASE("numeric weight factor keeps only positive relative growth") {
        CHECK(grnn::weight_factor_calc(1.0, 1.0, 1e-9) == 1.0);
        CHECK(grnn::weight_factor_calc(0.2, 1.0, 1e-9) == 1.0);  // shrink clamps to 1
        CHECK(grnn::weight_factor_calc(3.0, 1.0, 1e-12) == doctest::Approx(3.0));
        CHECK(grnn::weight_factor_calc(3.0, 1.0, 0.5) == doctest::Approx(1.0 + 2.0 / 1.5));
    }

    SUBCASE("membership weight factor only grows for misclassified neighbors") {
        CHECK(grnn::weight_factor_class(3.0, 1.0, false, 1e-12) == 1.0);
        CHECK(grnn::weight_factor_class(3.0, 1.0, true, 1e-12) == doctest::Approx(3.0));
        CHECK(grnn::weight_factor_class(0.5, 1.0, true, 1e-12) == 1.0);  // shrink clamps
    }

    SUBCASE("normalised deviation term is w*x/(1+x) per component") {
        const std::vector<double> row{1.0};
        CHECK(grnn::calc_deviation_term(1.0, 1.0, 1.0, row)[0] == 0.5);
        CHECK(grnn::calc_deviation_term(2.0, 1.0, 1.0, row)[0] == 1.0);
        CHECK(grnn::calc_deviation_term(2.0, 1.0, 0.0, row)[0] == 0.0);

        const std::vector<double> row2{0.3, -0.2, 0.9};
        const auto d = grnn::calc_deviation_term(1.5, 2.0, 0.4, row2);
        REQUIRE(d.size() == row2.size());
        for (std::size_t j = 0; j < row2.size(); ++j) {
            const double x = 2.0 * 0.4 * row2[j];
            CHECK(d[j] == 1.5 * x / (1.0 + x));
        }
    }

    SUBCASE("sum of squared norms") {
        const std::vector<std::vector<double>> vs{{1.0, 2.0}, {3.0}};
        CHECK(grnn::sum_norm_sq(vs) == 14.0);
        CHECK(grnn::sum_norm_sq(std::vector<std::vector<double>>{}) == 0.0);
        CHECK(grnn::sum_norm_sq(std::vector<std::vector<double>>{{0.0, 0.0}}) == 0.0);
    }
}

TEST_CASE("numeric certificate: worked value, zero point, positivity sweep") {
    SUBCASE("worked example") {
        // C=1 halves, sigma=alpha=1 leave it, times ||delta||^2 = 2
        CHECK(grnn::lyapunov_calc(1.0, 2.0, 1.0, 1.0, 0.0) == 1.0);
    }

    SUBCASE("zero deviations and zero tolerance give the zero point") {
        const std::vector<std::vector<double>> zeros{{0.0, 0.0}, {0.0}};
        CHECK(grnn::lyapunov_calc(1.0, zeros, 0.7, 2.0, 0.0) == 0.0);
        CHECK(grnn::lyapunov_calc(5.0, 0.0, 0.7, 2.0, 0.0) == 0.0);
    }

    SUBCASE("tolerance offset survives zero noise") {
        // sigma = 0 removes the noise part, leaving epsilon_tol * sum
        CHECK(grnn::lyapunov_calc(1.0, 3.0, 1.0, 0.0, 0.5) == 1.5);
    }

    SUBCASE("span overload matches the scalar overload") {
        const std::vector<std::vector<double>> deltas{{0.3, -1.2}, {0.7, 0.1, 2.0}};
        const double ssq = grnn::sum_norm_sq(deltas);
        CHECK(grnn::lyapunov_calc(1.4, deltas, 0.9, 1.7, 0.2) ==
              grnn::lyapunov_calc(1.4, ssq, 0.9, 1.7, 0.2));
    }

    SUBCASE("non-negative over a random sweep") {
        std::mt19937_64 gen(2026);
        std::uniform_real_distribution<double> crit(-5.0, 5.0);
        std::uniform_real_distribution<double> alpha(0.01, 10.0);
        std::uniform_real_distribution<double> sigma(-3.0, 3.0);
        std::uniform_real_distribution<double> tol(0.0, 2.0);
        std::uniform_real_distribution<double> comp(-4.0, 4.0);
        std::uniform_int_distribution<int> n_vec(0, 4);
        std::uniform_int_distribution<int> n_comp(1, 5);
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<std::vector<double>> deltas(n_vec(gen));
            for (auto& v : deltas) {
                v.resize(n_comp(gen));
                for (double& x : v) x = comp(gen);
            }
            const double v = grnn::lyapunov_calc(crit(gen), deltas, alpha(gen), sigma(gen), tol(gen));
            CHECK(v >= 0.0);
        }
    }

    SUBCASE("alpha must be positive") {
        CHECK_THROWS_AS(grnn::lyapunov_calc(1.0, 1.0, 0.0, 1.0, 0.0), grnn::NonPositiveAlpha);
        CHECK_THROWS_AS(grnn::lyapunov_calc(1.0, 1.0, -0.5, 1.0, 0.0), grnn::NonPositiveAlpha);
        const std::vector<std::vector<double>> deltas{{1.0}};
        CHECK_THROWS_AS(grnn::lyapunov_calc(1.0, deltas, 0.0, 1.0, 0.0), grnn::NonPositiveAlpha);
    }
}

TEST_CASE("threshold bookkeeping for a perturbed scalar output") {
    SUBCASE("downward crossing") {
        const auto t = grnn::classification_terms(10.0, 4.0, 6.0);
        CHECK(t.y == 1);
        CHECK(t.y_hat == 0);
        CHECK(t.r == 1);
        CHECK(t.dist == 2.0);
        CHECK(t.sign_err == -1);
        CHECK(t.beta == doctest::Approx(2.0 / 3.0));
    }

    SUBCASE("upward crossing") {
        const auto t = grnn::classification_terms(4.0, 10.0, 6.0);
        CHECK(t.y == 0);
        CHECK(t.y_hat == 1);
        CHECK(t.r == 1);
        CHECK(t.dist == 4.0);
        CHECK(t.sign_err == -1);
        CHECK(t.beta == doctest::Approx(2.0 / 5.0));
    }

    SUBCASE("no movement means no penalty") {
        const auto t = grnn::classification_terms(10.0, 10.0, 6.0);
        CHECK(t.y == 1);
        CHECK(t.y_hat == 1);
        CHECK(t.r == 0);
        CHECK(t.sign_err == 1);
        CHECK(t.beta == 0.0);
    }

    SUBCASE("same side below keeps zero penalty too") {
        const auto t = grnn::classification_terms(3.0, 2.0, 6.0);
        CHECK(t.y == 0);
        CHECK(t.y_hat == 0);
        CHECK(t.r == 0);
        CHECK(t.sign_err == 1);
        CHECK(t.beta == 0.0);
    }

    SUBCASE("landing exactly on the threshold") {
        const auto t = grnn::classification_terms(10.0, 6.0, 6.0);
        CHECK(t.y_hat == 0);  // strict comparison
        CHECK(t.dist == 0.0);
        CHECK(t.sign_err == 0);
        CHECK(t.beta == 1.0);
    }

    SUBCASE("starting exactly on the threshold") {
        const auto t = grnn::classification_terms(6.0, 8.0, 6.0);
        CHECK(t.y == 0);
        CHECK(t.y_hat == 1);
        CHECK(t.r == 1);
        CHECK(t.sign_err == 0);
        CHECK(t.beta == 1.0 / 3.0);
    }

    SUBCASE("beta stays within [0, 2] over a random sweep") {
        std::mt19937_64 gen(99);
        std::uniform_real_distribution<double> val(-10.0, 10.0);
        for (int i = 0; i < 2000; ++i) {
            const auto t = grnn::classification_terms(val(gen), val(gen), val(gen));
            CHECK(t.beta >= 0.0);
            CHECK(t.beta <= 2.0);
            CHECK(t.dist >= 0.0);
            CHECK((t.r == 0 || t.r == 1));
        }
    }
}

TEST_CASE("membership certificate: combined form and zero-noise short circuit") {
    const std::vector<grnn::ClassNeighborTerm> neighbors{
        {1.0, 2.0 / 3.0, 1},
        {2.0, 0.0, 0},
        {0.5, 1.0, 0},
    };

    SUBCASE("matches a hand-rolled evaluation") {
        double total = 0.0;
        for (const auto& n : neighbors) {
            const double term = n.weight * (n.beta + static_cast<double>(n.r));
            total += term * term;
        }
        const double c2 = 1.0;  // criticality 1
        const double expected = c2 / (1.0 + c2) / (2.0 * 2.0) * total;
        CHECK(grnn::lyapunov_class(1.0, neighbors, 2.0, 1.0) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(grnn::lyapunov_class(1.0, neighbors, 2.0, 1.0) > 0.0);
    }

    SUBCASE("quiet neighbors give zero") {
        const std::vector<grnn::ClassNeighborTerm> quiet{{1.0, 0.0, 0}, {3.0, 0.0, 0}};
        CHECK(grnn::lyapunov_class(1.0, quiet, 0.5, 1.0) == 0.0);
        CHECK(grnn::lyapunov_class(1.0, {}, 0.5, 1.0) == 0.0);
    }

    SUBCASE("zero noise means nothing was perturbed") {
        CHECK(grnn::lyapunov_class(1.0, neighbors, 2.0, 0.0) == 0.0);
    }

    SUBCASE("away from zero the noise level is inert") {
        // the noise factor cancels inside the combined form
        CHECK(grnn::lyapunov_class(1.0, neighbors, 2.0, 1.0) ==
              grnn::lyapunov_class(1.0, neighbors, 2.0, 37.0));
        CHECK(grnn::lyapunov_class(1.0, neighbors, 2.0, 1.0) ==
              grnn::lyapunov_class(1.0, neighbors, 2.0, -0.4));
    }

    SUBCASE("misclassifying configurations are strictly positive") {
        std::mt19937_64 gen(5);
        std::uniform_real_distribution<double> w(1.0, 3.0);
        std::uniform_real_distribution<double> beta(0.0, 2.0);
        std::uniform_real_distribution<double> alpha(0.1, 5.0);
        std::uniform_real_distribution<double> crit(0.1, 5.0);
        for (int i = 0; i < 500; ++i) {
            const std::vector<grnn::ClassNeighborTerm> one{{w(gen), beta(gen), 1}};
            CHECK(grnn::lyapunov_class(crit(gen), one, alpha(gen), 1.0) > 0.0);
        }
    }

    SUBCASE("alpha guard fires even at zero noise") {
        CHECK_THROWS_AS(grnn::lyapunov_class(1.0, neighbors, 0.0, 1.0), grnn::NonPositiveAlpha);
        CHECK_THROWS_AS(grnn::lyapunov_class(1.0, neighbors, -1.0, 0.0), grnn::NonPositiveAlpha);
    }
}

TEST_CASE("criterion derivative along the ramp") {
    SUBCASE("default starting point by direct substitution") {
        // prefactor 0.1 * (1/2) / 0.1 = 0.5; bracket 2 - 10*0.1/0.1^3 = -998
        const double dv = grnn::dv_ds_criterion(1.0, 1.0, 0.1, 0.1, 10.0, 1.0, 1.0);
        CHECK(dv == doctest::Approx(-499.0));
    }

    SUBCASE("zero noise level zeroes the derivative") {
        CHECK(grnn::dv_ds_criterion(1.0, 5.0, 0.7, 0.0, 10.0, 1.0, 1.0) == 0.0);
    }

    SUBCASE("bracket root zeroes the derivative") {
        // sigma = 2*l*alpha^3*delta_norm/k with exactly representable pieces
        CHECK(grnn::dv_ds_criterion(1.0, 5.0, 1.0, 0.2, 10.0, 1.0, 1.0) == 0.0);
    }

    SUBCASE("sign pattern around the two zero loci") {
        // around sigma = 0 (alpha fixed where the bracket stays positive)
        CHECK(grnn::dv_ds_criterion(1.0, 1.0, 1.0, -0.05, 10.0, 1.0, 1.0) < 0.0);
        CHECK(grnn::dv_ds_criterion(1.0, 1.0, 1.0, 0.05, 10.0, 1.0, 1.0) > 0.0);
        // around the bracket root sigma = 0.2 at alpha = 1
        CHECK(grnn::dv_ds_criterion(1.0, 1.0, 1.0, 0.19, 10.0, 1.0, 1.0) > 0.0);
        CHECK(grnn::dv_ds_criterion(1.0, 1.0, 1.0, 0.21, 10.0, 1.0, 1.0) < 0.0);
    }

    SUBCASE("noise zero of the ramp: sigma(s2) = 0 and the derivative vanishes") {
        grnn::TrajectoryParams p;
        p.alpha0 = 2.0;
        p.k = 1.0;
        p.sigma0 = 0.1;
        p.l = 1.0;
        const double s2 = -p.sigma0 / p.l;
        const double sigma_s2 = p.sigma0 + p.l * s2;
        const double alpha_s2 = p.alpha0 + p.k * s2;
        CHECK(sigma_s2 == 0.0);
        CHECK(alpha_s2 > 0.0);
        CHECK(grnn::dv_ds_criterion(1.0, 3.0, alpha_s2, sigma_s2, p.k, p.l, p.delta_norm) == 0.0);
    }

    SUBCASE("guards") {
        CHECK_THROWS_AS(grnn::dv_ds_criterion(1.0, 1.0, 0.0, 0.1, 10.0, 1.0, 1.0),
                        grnn::NonPositiveAlpha);
        CHECK_THROWS_AS(grnn::dv_ds_criterion(1.0, 1.0, 0.5, 0.1, 10.0, 1.0, 0.0),
                        grnn::ValueError);
        CHECK_THROWS_AS(grnn::dv_ds_criterion(1.0, 1.0, 0.5, 0.1, 10.0, 1.0, -2.0),
                        grnn::ValueError);
        CHECK_THROWS_AS(grnn::dv_ds_ramp(1.0, 1.0, 0.0, 0.1, 10.0, 1.0), grnn::NonPositiveAlpha);
    }

    SUBCASE("chain-rule derivative matches central finite differences") {
        const grnn::TrajectoryParams p;  // defaults
        const double crit = 1.3, ssq = 2.4, eps_tol = 0.05;
        const double h = 1e-6;
        for (double s : {0.005, 0.03, 0.2, 0.8}) {
            const auto value_at = [&](double sv) {
                return grnn::lyapunov_calc(crit, ssq, p.alpha0 + p.k * sv, p.sigma0 + p.l * sv,
                                           eps_tol);
            };
            const double fd = (value_at(s + h) - value_at(s - h)) / (2.0 * h);
            const double analytic = grnn::dv_ds_ramp(crit, ssq, p.alpha0 + p.k * s,
                                                     p.sigma0 + p.l * s, p.k, p.l);
            CHECK(analytic == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("criterion cubic and the numeric onset root") {
    SUBCASE("default coefficients") {
        const auto a = grnn::criterion_cubic(default_params());
        CHECK(a[0] == doctest::Approx(-0.998).epsilon(1e-12));
        CHECK(a[1] == doctest::Approx(-9.4).epsilon(1e-12));
        CHECK(a[2] == doctest::Approx(60.0).epsilon(1e-12));
        CHECK(a[3] == 2000.0);
    }

    SUBCASE("default onset root against an independent scan-and-bisect oracle") {
        // oracle cubic built from the raw parameter arithmetic, not the library
        const std::array<double, 4> a{
            2.0 * 0.1 * 0.1 * 0.1 - 10.0 * 0.1,
            6.0 * 10.0 * 0.1 * 0.1 - 10.0,
            6.0 * 10.0 * 10.0 * 0.1,
            2.0 * 10.0 * 10.0 * 10.0,
        };
        const double oracle = scan_bisect_root(a, 1.0);
        CHECK(std::abs(oracle - 0.0879) < 1e-3);

        const auto lvl = grnn::critical_s_numeric(default_params());
        CHECK(lvl.s1 == doctest::Approx(oracle).epsilon(1e-10));
        CHECK(std::abs(lvl.s1 - 0.0879) < 1e-3);
        CHECK(lvl.residual == std::abs(eval_cubic(grnn::criterion_cubic(default_params()), lvl.s1)));
        CHECK(lvl.residual < 1e-12 * 2000.0);
        CHECK(lvl.alpha_star == 0.1 + 10.0 * lvl.s1);
        CHECK(lvl.sigma_star == 0.1 + 1.0 * lvl.s1);
        CHECK(lvl.alpha_star == doctest::Approx(0.979).epsilon(1e-2));
        CHECK(lvl.sigma_star == doctest::Approx(0.188).epsilon(1e-2));
    }

    SUBCASE("vanishing constant term factors out s = 0") {
        // dyadic parameters make a0 exactly zero; the remaining quadratic
        // carries one positive root
        grnn::TrajectoryParams p;
        p.alpha0 = 0.25;
        p.sigma0 = 0.03125;
        p.k = 1.0;
        p.l = 1.0;
        const auto a = grnn::criterion_cubic(p);
        REQUIRE(a[0] == 0.0);
        const auto lvl = grnn::critical_s_numeric(p);
        // quadratic 2 s^2 + 1.5 s - 0.625 has positive root (-1.5 + sqrt(7.25))/4
        const double expected = (-1.5 + std::sqrt(7.25)) / 4.0;
        CHECK(lvl.s1 == doctest::Approx(expected).epsilon(1e-12));
        CHECK(lvl.s1 > 0.0);

        // and with a larger start level the quadratic roots turn negative
        grnn::TrajectoryParams q;
        q.alpha0 = 0.5;
        q.sigma0 = 0.25;
        q.k = 1.0;
        q.l = 1.0;
        REQUIRE(grnn::criterion_cubic(q)[0] == 0.0);
        CHECK_THROWS_AS(grnn::critical_s_numeric(q), grnn::NoPositiveRoot);
    }

    SUBCASE("all-positive coefficients have no onset") {
        grnn::TrajectoryParams p;
        p.alpha0 = 1.0;  // criterion already non-negative along the whole ramp
        CHECK_THROWS_AS(grnn::critical_s_numeric(p), grnn::NoPositiveRoot);
    }

    SUBCASE("parameter guards") {
        for (auto mutate : {+[](grnn::TrajectoryParams& p) { p.k = 0.0; },
                            +[](grnn::TrajectoryParams& p) { p.k = -3.0; },
                            +[](grnn::TrajectoryParams& p) { p.l = 0.0; },
                            +[](grnn::TrajectoryParams& p) { p.delta_norm = 0.0; },
                            +[](grnn::TrajectoryParams& p) { p.delta_norm = -1.0; },
                            +[](grnn::TrajectoryParams& p) {
                                p.k = std::numeric_limits<double>::infinity();
                            }}) {
            grnn::TrajectoryParams p;
            mutate(p);
            CHECK_THROWS_AS(grnn::critical_s_numeric(p), grnn::ValueError);
        }
    }

    SUBCASE("random parameters: root certificate and minimality") {
        std::mt19937_64 gen(31337);
        std::uniform_real_distribution<double> a0(0.01, 2.0);
        std::uniform_real_distribution<double> s0(0.0, 1.0);
        std::uniform_real_distribution<double> kd(0.1, 20.0);
        std::uniform_real_distribution<double> ld(0.05, 5.0);
        std::uniform_real_distribution<double> dn(0.1, 10.0);
        int found = 0;
        for (int trial = 0; trial < 200; ++trial) {
            grnn::TrajectoryParams p;
            p.alpha0 = a0(gen);
            p.sigma0 = s0(gen);
            p.k = kd(gen);
            p.l = ld(gen);
            p.delta_norm = dn(gen);
            const auto a = grnn::criterion_cubic(p);
            grnn::CriticalLevel lvl;
            try {
                lvl = grnn::critical_s_numeric(p);
            } catch (const grnn::NoPositiveRoot&) {
                // then the cubic must be positive on a coarse positive grid
                // (it starts non-negative and the leading term dominates)
                for (int i = 1; i <= 50; ++i) CHECK(eval_cubic(a, 0.2 * i) >= 0.0);
                continue;
            }
            ++found;
            CHECK(lvl.s1 > 0.0);
            const double max_coeff = std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2]),
                                               std::abs(a[3])});
            CHECK(std::abs(eval_cubic(a, lvl.s1)) <= 1e-12 * max_coeff);
            CHECK(lvl.alpha_star == p.alpha0 + p.k * lvl.s1);
            CHECK(lvl.sigma_star == p.sigma0 + p.l * lvl.s1);
            // no earlier crossing: samples strictly inside (0, s1) never have
            // the opposite sign of the start value
            const double f0 = eval_cubic(a, 0.0);
            if (f0 != 0.0) {
                for (int i = 1; i <= 50; ++i) {
                    const double s = lvl.s1 * (static_cast<double>(i) / 51.0);
                    const double f = eval_cubic(a, s);
                    if (std::abs(f) > 1e-9 * max_coeff) CHECK((f < 0.0) == (f0 < 0.0));
                }
            }
        }
        CHECK(found > 20);  // the sweep must actually exercise the root path
    }
}

TEST_CASE("advisory closed-form onset level") {
    SUBCASE("default value and consistency report") {
        const auto cf = grnn::critical_s_closed_form(default_params());

        // mirror of the published expression, evaluated independently
        const double k = 10.0, l = 1.0;
        const double arg = 0.03 / (k * k * k * k * l * l) - 0.02 / (k * k * k * k * k * l * l) +
                           1.0 / (k * k * k * k * k * k);
        const double a_value = std::sqrt(arg) - 0.12 / (k * k * l) + 0.12 / (k * k * k);
        CHECK(cf.a_value == doctest::Approx(a_value).epsilon(1e-10));
        CHECK(cf.a_value == doctest::Approx(0.00086936).epsilon(1e-4));

        const double cb = std::cbrt(a_value);
        const double s1 = 1.23 * (cb + 1.0 / (k * k * cb)) - 0.1 / (k * 1.0);
        CHECK(cf.s1 == doctest::Approx(s1).epsilon(1e-10));
        CHECK(cf.s1 == doctest::Approx(0.2363).epsilon(1e-3));

        // consistency reports the gap to the numeric root; the two are NOT
        // asserted equal -- they answer different questions
        const auto num = grnn::critical_s_numeric(default_params());
        REQUIRE(cf.consistency.has_value());
        CHECK(*cf.consistency == doctest::Approx(std::abs(cf.s1 - num.s1)).epsilon(1e-12));
        CHECK(*cf.consistency > 0.1);  // they genuinely disagree at the defaults
    }

    SUBCASE("consistency is absent when the numeric root does not exist") {
        grnn::TrajectoryParams p;
        p.alpha0 = 1.0;  // no positive root for the cubic
        const auto cf = grnn::critical_s_closed_form(p);
        CHECK_FALSE(cf.consistency.has_value());
        CHECK(std::isfinite(cf.s1));
    }

    SUBCASE("negative inner value uses the real cube root") {
        grnn::TrajectoryParams p;
        p.k = 1.0;
        p.l = 0.01;
        const auto cf = grnn::critical_s_closed_form(p);
        CHECK(cf.a_value < 0.0);
        const double cb = -std::cbrt(-cf.a_value);
        CHECK(cf.s1 ==
              doctest::Approx(1.23 * (cb + 1.0 / (p.k * p.k * cb)) - 0.1 / (p.k * p.delta_norm))
                  .epsilon(1e-10));
    }

    SUBCASE("degenerate inner expression") {
        grnn::TrajectoryParams p;
        p.k = 1.0 / 3.0;
        p.l = 0.05;
        CHECK_THROWS_AS(grnn::critical_s_closed_form(p), grnn::DegenerateA);
    }

    SUBCASE("large deviation norms shrink the correction term") {
        grnn::TrajectoryParams near = default_params();
        grnn::TrajectoryParams far = default_params();
        far.delta_norm = 1e12;
        const double gap = grnn::critical_s_closed_form(far).s1 -
                           grnn::critical_s_closed_form(near).s1;
        CHECK(gap == doctest::Approx(0.1 / 10.0).epsilon(1e-9));
    }

    SUBCASE("parameter guards") {
        grnn::TrajectoryParams p;
        p.l = -1.0;
        CHECK_THROWS_AS(grnn::critical_s_closed_form(p), grnn::ValueError);
    }
}

TEST_CASE("frozen-ramp trajectory evaluation") {
    const grnn::TrajectoryParams p;  // defaults
    const double crit = 1.0, ssq = 1.0;

    SUBCASE("samples evaluate the certificate and criterion at the affine images") {
        const std::vector<double> grid{0.0, 0.01, 0.0879, 0.2, 1.0};
        const auto traj = grnn::trajectory(p, crit, ssq, grid);
        REQUIRE(traj.samples.size() == grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto& smp = traj.samples[i];
            CHECK(smp.s == grid[i]);
            CHECK(smp.alpha == p.alpha0 + p.k * smp.s);
            CHECK(smp.sigma == p.sigma0 + p.l * smp.s);
            CHECK(smp.V == grnn::lyapunov_calc(crit, ssq, smp.alpha, smp.sigma, p.epsilon_tol));
            CHECK(smp.dV_ds == grnn::dv_ds_criterion(crit, ssq, smp.alpha, smp.sigma, p.k, p.l,
                                                     p.delta_norm));
            CHECK(smp.V >= 0.0);
        }
        CHECK(traj.samples[0].alpha == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(traj.samples[0].sigma == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(traj.samples[4].alpha == doctest::Approx(10.1).epsilon(1e-15));
        CHECK(traj.samples[4].sigma == doctest::Approx(1.1).epsilon(1e-15));

        CHECK(traj.s2 == -0.1);
        REQUIRE(traj.critical.has_value());
        const auto direct = grnn::critical_s_numeric(p);
        CHECK(traj.critical->s1 == direct.s1);
        CHECK(traj.critical->alpha_star == direct.alpha_star);
        CHECK(traj.critical->sigma_star == direct.sigma_star);
        CHECK(traj.critical->residual == direct.residual);
    }

    SUBCASE("derivative sign flips across the onset root on a refining grid") {
        const auto direct = grnn::critical_s_numeric(p);
        const std::vector<double> grid{direct.s1 - 1e-4, direct.s1 + 1e-4};
        const auto traj = grnn::trajectory(p, crit, ssq, grid);
        CHECK(traj.samples[0].dV_ds < 0.0);
        CHECK(traj.samples[1].dV_ds > 0.0);
    }

    SUBCASE("no onset leaves the critical level absent") {
        grnn::TrajectoryParams q;
        q.alpha0 = 1.0;
        const std::vector<double> grid{0.0, 0.5};
        const auto traj = grnn::trajectory(q, crit, ssq, grid);
        CHECK_FALSE(traj.critical.has_value());
        CHECK(traj.samples.size() == 2);
        CHECK(traj.s2 == -0.1);
    }

    SUBCASE("empty grid still reports the landmarks") {
        const auto traj = grnn::trajectory(p, crit, ssq, {});
        CHECK(traj.samples.empty());
        CHECK(traj.s2 == -0.1);
        CHECK(traj.critical.has_value());
    }

    SUBCASE("grid validation") {
        const std::vector<double> unsorted{0.5, 0.1};
        CHECK_THROWS_AS(grnn::trajectory(p, crit, ssq, unsorted), grnn::ValueError);
        const std::vector<double> dead{-0.02, 0.0};  // alpha(-0.02) < 0 at the defaults
        CHECK_THROWS_AS(grnn::trajectory(p, crit, ssq, dead), grnn::AlphaNonPositiveOnGrid);
        grnn::TrajectoryParams q;
        q.k = 0.0;
        CHECK_THROWS_AS(grnn::trajectory(q, crit, ssq, std::vector<double>{0.0}),
                        grnn::ValueError);
    }
}

namespace {

// Shared scaffolding for the stability-profile cases: a four-node regulatory
// loop around "p" and an expression matrix whose ranges differ per code.
struct StabilityFixture {
    grnn::DatasetAxes axes = make_axes();
    grnn::ExpressionDataset ds = build_dataset(axes);
    grnn::RegulatoryNetwork net = build_network();

    static grnn::DatasetAxes make_axes() {
        grnn::DatasetAxes a;
        a.codes = {0, 1, 2, 3};
        a.timepoints = {4.0, 8.0};
        a.replicates = {1};
        a.base_code = 0;
        return a;
    }

    static grnn::ExpressionDataset build_dataset(const grnn::DatasetAxes& axes) {
        grnn::ExpressionDataset::Builder b(axes);
        for (const char* g : {"o", "p"}) b.add_gene(g);
        // base code, never consulted by the profile but kept populated
        for (const char* g : {"o", "p"})
            for (double t : axes.timepoints) b.set(g, 0, t, 1, 1.0);
        // code 1: p spans a range, o is flat
        b.set("p", 1, 4.0, 1, 2.0).set("p", 1, 8.0, 1, 5.0);
        b.set("o", 1, 4.0, 1, 6.0).set("o", 1, 8.0, 1, 6.0);
        // code 2: p unmeasured, o spans a range
        b.set("o", 2, 4.0, 1, 1.0).set("o", 2, 8.0, 1, 2.0);
        // code 3: everything flat -> zero deviation
        b.set("p", 3, 4.0, 1, 7.0).set("p", 3, 8.0, 1, 7.0);
        b.set("o", 3, 4.0, 1, 4.0).set("o", 3, 8.0, 1, 4.0);
        return b.build();
    }

    static grnn::RegulatoryNetwork build_network() {
        grnn::RegulatoryNetwork::Builder b;
        b.add_edge("p", "o", 0.8);
        b.add_edge("o", "t", 0.5);
        b.add_edge("p", "p", 0.9);          // self-loop: carries nothing
        b.add_edge("o", "p", std::nullopt);  // filled from the seed
        return b.build();
    }

    grnn::SubGRNN make_sub() const {
        grnn::SubGRNN sub;
        sub.output_genes = {"o"};
        sub.input_genes = {"p"};
        sub.hidden_genes = {"t"};
        sub.network = net;
        sub.timepoint = 4.0;
        sub.task_name = "toy";
        return sub;
    }

    // Re-derives the per-code squared deviation sum for a numeric task from
    // the public primitives, mirroring the accumulation order: the critical
    // gene first, then its direct targets.
    double numeric_ssq(const grnn::SubGRNN& sub, int code, std::uint64_t seed,
                       unsigned d_max) const {
        const auto filled = grnn::assign_missing_correlations(sub.network, seed);
        double ssq = 0.0;
        for (const grnn::GeneId& q : {std::string("p"), std::string("o")}) {
            if (!ds.has_gene(q)) continue;
            double mn = 0.0, mx = 0.0;
            try {
                std::tie(mn, mx) = ds.min_max_expression(q, code);
            } catch (const grnn::MissingCell&) {
                continue;
            }
            grnn::KeyedRng rng(grnn::RngKey(seed).with("stability").with(q).with(code));
            const double eta = rng.normal();
            const auto row = grnn::propagation_row(filled, filled.node_index(q), d_max);
            const auto d = grnn::calc_deviation_term(1.0, mx - mn, eta, row);
            for (double v : d) ssq += v * v;
        }
        return ssq;
    }
};

}  // namespace

TEST_CASE("stability profile for a numeric task") {
    const StabilityFixture fx;
    const grnn::SubGRNN sub = fx.make_sub();
    const grnn::TaskSpec task = grnn::make_task("fibonacci");
    const grnn::TrajectoryParams params;  // defaults
    const std::uint64_t seed = 42;

    SUBCASE("per-code deviations match a reconstruction from public primitives") {
        for (unsigned d_max : {1u, 4u}) {
            CAPTURE(d_max);
            const auto prof =
                grnn::stability_profile(sub, fx.ds, "p", 1.0, task, params, seed, d_max);
            CHECK(prof.gene == "p");
            CHECK(prof.criticality == 1.0);
            REQUIRE(prof.codes.size() == 3);  // input codes 1, 2, 3

            for (std::size_t ci = 0; ci < prof.codes.size(); ++ci) {
                const auto& cs = prof.codes[ci];
                CHECK(cs.code == fx.axes.input_codes()[ci]);
                const double expected = fx.numeric_ssq(sub, cs.code, seed, d_max);
                CHECK(cs.sum_delta_sq == expected);
                CHECK(cs.delta_norm == std::sqrt(expected));
            }

            // codes 1 and 2 carry signal; code 3 is flat everywhere
            CHECK(prof.codes[0].sum_delta_sq > 0.0);
            CHECK(prof.codes[1].sum_delta_sq > 0.0);
            CHECK(prof.codes[2].sum_delta_sq == 0.0);
            CHECK_FALSE(prof.codes[2].level);

            // each onset level is the criterion root at that code's norm
            for (std::size_t ci = 0; ci < 2; ++ci) {
                REQUIRE(prof.codes[ci].level.has_value());
                grnn::TrajectoryParams pc = params;
                pc.delta_norm = prof.codes[ci].delta_norm;
                const auto direct = grnn::critical_s_numeric(pc);
                CHECK(prof.codes[ci].level->s1 == direct.s1);
                CHECK(prof.codes[ci].level->alpha_star == direct.alpha_star);
                CHECK(prof.codes[ci].level->residual == direct.residual);
            }

            // the overall bound is the earliest onset across codes
            REQUIRE(prof.overall.has_value());
            CHECK(prof.overall->s1 ==
                  std::min(prof.codes[0].level->s1, prof.codes[1].level->s1));
        }
    }

    SUBCASE("deterministic across calls, sensitive to the seed") {
        const auto a = grnn::stability_profile(sub, fx.ds, "p", 1.0, task, params, seed);
        const auto b = grnn::stability_profile(sub, fx.ds, "p", 1.0, task, params, seed);
        REQUIRE(a.codes.size() == b.codes.size());
        for (std::size_t i = 0; i < a.codes.size(); ++i)
            CHECK(a.codes[i].sum_delta_sq == b.codes[i].sum_delta_sq);

        const auto c = grnn::stability_profile(sub, fx.ds, "p", 1.0, task, params, seed + 1);
        CHECK(c.codes[0].sum_delta_sq != a.codes[0].sum_delta_sq);
    }

    SUBCASE("criterion already non-negative at the ramp start pins the onset to zero") {
        grnn::TrajectoryParams calm;
        calm.alpha0 = 2.0;
        calm.k = 1.0;
        calm.l = 1.0;
        calm.sigma0 = 0.001;
        const auto prof = grnn::stability_profile(sub, fx.ds, "p", 1.0, task, calm, seed);
        REQUIRE(prof.codes[0].level.has_value());
        const auto& lvl = *prof.codes[0].level;
        CHECK(lvl.s1 == 0.0);
        CHECK(lvl.alpha_star == calm.alpha0);
        CHECK(lvl.sigma_star == calm.sigma0);
        grnn::TrajectoryParams pc = calm;
        pc.delta_norm = prof.codes[0].delta_norm;
        CHECK(lvl.residual == std::abs(grnn::criterion_cubic(pc)[0]));
        REQUIRE(prof.overall.has_value());
        CHECK(prof.overall->s1 == 0.0);
    }

    SUBCASE("a neighborhood with no expression data reports nothing") {
        grnn::RegulatoryNetwork::Builder nb;
        nb.add_edge("u", "v", 0.7);
        grnn::SubGRNN ghost;
        ghost.output_genes = {"v"};
        ghost.network = nb.build();
        ghost.timepoint = 4.0;
        const auto prof = grnn::stability_profile(ghost, fx.ds, "u", 1.0, task, params, seed);
        for (const auto& cs : prof.codes) {
            CHECK(cs.sum_delta_sq == 0.0);
            CHECK_FALSE(cs.level);
        }
        CHECK_FALSE(prof.overall.has_value());
    }

    SUBCASE("guards") {
        CHECK_THROWS_AS(grnn::stability_profile(sub, fx.ds, "nope", 1.0, task, params, seed),
                        grnn::UnknownGene);
        grnn::TrajectoryParams bad;
        bad.k = 0.0;
        CHECK_THROWS_AS(grnn::stability_profile(sub, fx.ds, "p", 1.0, task, bad, seed),
                        grnn::ValueError);
    }
}

namespace {

// Membership counterpart: two replicates and stored decision thresholds on
// the output gene.
struct MembershipFixture {
    grnn::DatasetAxes axes = make_axes();
    grnn::ExpressionDataset ds = build_dataset(axes);
    grnn::RegulatoryNetwork net = build_network();

    static grnn::DatasetAxes make_axes() {
        grnn::DatasetAxes a;
        a.codes = {0, 1, 2};
        a.timepoints = {4.0, 8.0};
        a.replicates = {1, 2};
        a.base_code = 0;
        return a;
    }

    static grnn::ExpressionDataset build_dataset(const grnn::DatasetAxes& axes) {
        grnn::ExpressionDataset::Builder b(axes);
        b.add_gene("o").add_gene("p");
        for (const char* g : {"o", "p"})
            for (double t : axes.timepoints)
                for (int r : axes.replicates) b.set(g, 0, t, r, 1.0);
        // p drives the perturbation; give it a range under both codes
        b.set("p", 1, 4.0, 1, 2.0).set("p", 1, 8.0, 1, 5.0);
        b.set("p", 1, 4.0, 2, 2.5).set("p", 1, 8.0, 2, 4.0);
        b.set("p", 2, 4.0, 1, 1.0).set("p", 2, 8.0, 1, 3.0);
        b.set("p", 2, 4.0, 2, 1.5).set("p", 2, 8.0, 2, 2.0);
        // o carries the start levels read at the match timepoint (4.0);
        // code 2 replicate 2 is left unmeasured there
        b.set("o", 1, 4.0, 1, 10.0).set("o", 1, 8.0, 1, 9.0);
        b.set("o", 1, 4.0, 2, 12.0).set("o", 1, 8.0, 2, 11.0);
        b.set("o", 2, 4.0, 1, 7.0).set("o", 2, 8.0, 1, 8.0);
        b.set("o", 2, 8.0, 2, 8.0);
        return b.build();
    }

    static grnn::RegulatoryNetwork build_network() {
        grnn::RegulatoryNetwork::Builder b;
        b.add_edge("p", "o", 0.9);
        return b.build();
    }

    grnn::SubGRNN make_sub(std::map<int, double> output_thresholds) const {
        grnn::SubGRNN sub;
        sub.output_genes = {"o"};
        sub.input_genes = {"p"};
        sub.network = net;
        sub.timepoint = 4.0;
        sub.task_name = "member";
        if (!output_thresholds.empty()) sub.thresholds["o"] = std::move(output_thresholds);
        return sub;
    }

    // Mirror of the membership scoring: start-level deviations of the output
    // under each neighbor's draw, scored against the stored thresholds.
    double membership_ssq(const grnn::SubGRNN& sub, int code, std::uint64_t seed, unsigned d_max,
                          const grnn::TrajectoryParams& params, int* flips = nullptr) const {
        const auto filled = grnn::assign_missing_correlations(sub.network, seed);
        const std::size_t idx_o = filled.node_index("o");
        double ssq = 0.0;
        for (const grnn::GeneId& q : {std::string("p"), std::string("o")}) {
            if (!ds.has_gene(q)) continue;
            double mn = 0.0, mx = 0.0;
            try {
                std::tie(mn, mx) = ds.min_max_expression(q, code);
            } catch (const grnn::MissingCell&) {
                continue;
            }
            grnn::KeyedRng rng(grnn::RngKey(seed).with("stability").with(q).with(code));
            const double eta = rng.normal();
            const auto row = grnn::propagation_row(filled, filled.node_index(q), d_max);
            const auto dx = grnn::delta_x(params.alpha0, params.sigma0 * params.sigma0, mn, mx,
                                          eta, row);
            const auto th = sub.thresholds.find("o");
            if (th == sub.thresholds.end()) continue;
            for (int rep : ds.axes().replicates) {
                const auto ti = th->second.find(rep);
                if (ti == th->second.end()) continue;
                double x0 = 0.0;
                try {
                    x0 = ds.expression_at("o", code, sub.timepoint, rep);
                } catch (const grnn::MissingCell&) {
                    continue;
                }
                const auto t = grnn::classification_terms(x0, x0 + dx[idx_o], ti->second);
                if (flips) *flips += t.r;
                const double term = t.beta + static_cast<double>(t.r);
                ssq += term * term;
            }
        }
        return ssq;
    }
};

}  // namespace

TEST_CASE("stability profile for a membership task") {
    const MembershipFixture fx;
    const grnn::TaskSpec task = grnn::make_task("lucky");
    const std::uint64_t seed = 7;

    SUBCASE("threshold sitting on a start level guarantees a nonzero profile") {
        // code 1 replicate 1 starts exactly on its threshold, so any draw
        // produces a directional penalty there
        const grnn::SubGRNN sub = fx.make_sub({{1, 10.0}, {2, 11.0}});
        const grnn::TrajectoryParams params;  // defaults: tiny deviations
        const auto prof = grnn::stability_profile(sub, fx.ds, "p", 1.0, task, params, seed);
        REQUIRE(prof.codes.size() == 2);

        for (const auto& cs : prof.codes) {
            const double expected = fx.membership_ssq(sub, cs.code, seed, 4, params);
            CHECK(cs.sum_delta_sq == expected);
        }
        CHECK(prof.codes[0].sum_delta_sq > 0.0);
        // code 2: the only measured start level sits 3 below its threshold
        // and default draws cannot bridge that margin
        CHECK(prof.codes[1].sum_delta_sq == 0.0);
        CHECK_FALSE(prof.codes[1].level);

        REQUIRE(prof.codes[0].level.has_value());
        grnn::TrajectoryParams pc = params;
        pc.delta_norm = prof.codes[0].delta_norm;
        CHECK(prof.codes[0].level->s1 == grnn::critical_s_numeric(pc).s1);
        REQUIRE(prof.overall.has_value());
        CHECK(prof.overall->s1 == prof.codes[0].level->s1);
    }

    SUBCASE("wide margins with small draws report a quiet profile") {
        // draws are bounded (|eta| < 8.6), so a margin of 90 cannot flip
        const grnn::SubGRNN sub = fx.make_sub({{1, -90.0}, {2, 200.0}});
        const grnn::TrajectoryParams params;  // defaults
        const auto prof = grnn::stability_profile(sub, fx.ds, "p", 1.0, task, params, seed);
        for (const auto& cs : prof.codes) {
            CHECK(cs.sum_delta_sq == 0.0);
            CHECK_FALSE(cs.level);
        }
        CHECK_FALSE(prof.overall.has_value());
    }

    SUBCASE("loud noise levels produce real flips") {
        const grnn::SubGRNN sub = fx.make_sub({{1, 10.5}, {2, 6.5}});
        grnn::TrajectoryParams loud;
        loud.sigma0 = 10.0;  // deviations now dwarf the margins
        const auto prof = grnn::stability_profile(sub, fx.ds, "p", 1.0, task, loud, seed);
        int flips = 0;
        for (const auto& cs : prof.codes) {
            const double expected = fx.membership_ssq(sub, cs.code, seed, 4, loud, &flips);
            CHECK(cs.sum_delta_sq == expected);
        }
        CHECK(flips > 0);
        REQUIRE(prof.overall.has_value());
    }

    SUBCASE("threshold bookkeeping skips absent replicates and unmeasured cells") {
        // only replicate 1 carries a threshold; replicate 2 must not score
        const grnn::SubGRNN one_rep = fx.make_sub({{1, 10.0}});
        const grnn::TrajectoryParams params;
        const auto prof = grnn::stability_profile(one_rep, fx.ds, "p", 1.0, task, params, seed);
        for (const auto& cs : prof.codes) {
            const double expected = fx.membership_ssq(one_rep, cs.code, seed, 4, params);
            CHECK(cs.sum_delta_sq == expected);
        }

        // no stored thresholds at all: nothing to score against
        const grnn::SubGRNN bare = fx.make_sub({});
        const auto quiet = grnn::stability_profile(bare, fx.ds, "p", 1.0, task, params, seed);
        for (const auto& cs : quiet.codes) CHECK(cs.sum_delta_sq == 0.0);
        CHECK_FALSE(quiet.overall.has_value());
    }
}
