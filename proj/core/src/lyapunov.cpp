#include "grnn/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "grnn/errors.hpp"
#include "grnn/parallel.hpp"
#include "grnn/perturb.hpp"
#include "grnn/rng.hpp"

namespace grnn {

namespace {

double criticality_gain(double criticality) {
    const double c2 = criticality * criticality;
    return c2 / (1.0 + c2);
}

}  // namespace

std::vector<double> delta_x(double alpha, double sigma2, double x_min, double x_max, double eta,
                            std::span<const double> row) {
    const double scale = alpha * (x_max - x_min) * sigma2 * eta;
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = scale * row[j];
    return out;
}

double weight_factor_calc(double dx_current, double dx_base, double zeta) {
    return 1.0 + std::max(0.0, (dx_current - dx_base) / (dx_base + zeta));
}

double weight_factor_class(double dist_current, double dist_base, bool misclassified, double zeta) {
    const double growth = (dist_current - dist_base) / (dist_base + zeta);
    return 1.0 + std::max(0.0, growth * (misclassified ? 1.0 : 0.0));
}

std::vector<double> calc_deviation_term(double weight, double range, double eta,
                                        std::span<const double> row) {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        const double x = range * eta * row[j];
        out[j] = weight * x / (1.0 + x);
    }
    return out;
}

double sum_norm_sq(std::span<const std::vector<double>> vectors) {
    double total = 0.0;
    for (const auto& v : vectors)
        for (double x : v) total += x * x;
    return total;
}

double lyapunov_calc(double criticality, double sum_delta_sq, double alpha, double sigma,
                     double epsilon_tol) {
    if (!(alpha > 0.0)) throw NonPositiveAlpha("certificate needs alpha > 0");
    return (epsilon_tol + sigma * sigma * criticality_gain(criticality) / alpha) * sum_delta_sq;
}

double lyapunov_calc(double criticality, std::span<const std::vector<double>> deltas, double alpha,
                     double sigma, double epsilon_tol) {
    return lyapunov_calc(criticality, sum_norm_sq(deltas), alpha, sigma, epsilon_tol);
}

ClassificationTerms classification_terms(double x_start, double x_pert, double theta) {
    ClassificationTerms t;
    t.y = x_start > theta ? 1 : 0;
    t.y_hat = x_pert > theta ? 1 : 0;
    t.r = t.y != t.y_hat ? 1 : 0;
    t.dist = std::abs(x_pert - theta);
    const double prod = (x_pert - theta) * (x_start - theta);
    t.sign_err = prod > 0.0 ? 1 : (prod < 0.0 ? -1 : 0);
    t.beta = (1.0 - static_cast<double>(t.sign_err)) / (1.0 + t.dist);
    return t;
}

double lyapunov_class(double criticality, std::span<const ClassNeighborTerm> neighbors, double alpha,
                      double sigma) {
    if (!(alpha > 0.0)) throw NonPositiveAlpha("certificate needs alpha > 0");
    if (sigma == 0.0) return 0.0;  // nothing perturbed
    double total = 0.0;
    for (const auto& n : neighbors) {
        const double term = n.weight * (n.beta + static_cast<double>(n.r));
        total += term * term;
    }
    return criticality_gain(criticality) / (alpha * alpha) * total;
}

double dv_ds_criterion(double criticality, double sum_delta_sq, double alpha, double sigma, double k,
                       double l, double delta_norm) {
    if (!(alpha > 0.0)) throw NonPositiveAlpha("criterion needs alpha > 0");
    if (!(delta_norm > 0.0)) throw ValueError("delta_norm must be positive");
    const double bracket = 2.0 * l - k * sigma / (alpha * alpha * alpha * delta_norm);
    return sigma * criticality_gain(criticality) / alpha * bracket * sum_delta_sq;
}

double dv_ds_ramp(double criticality, double sum_delta_sq, double alpha, double sigma, double k,
                  double l) {
    if (!(alpha > 0.0)) throw NonPositiveAlpha("criterion needs alpha > 0");
    // d/ds of sigma(s)^2 / alpha(s) with the deviation sum frozen
    return criticality_gain(criticality) * sum_delta_sq *
           (2.0 * sigma * l * alpha - sigma * sigma * k) / (alpha * alpha);
}

std::array<double, 4> criterion_cubic(const TrajectoryParams& p) {
    return {
        2.0 * p.l * p.alpha0 * p.alpha0 * p.alpha0 - p.k * p.sigma0 / p.delta_norm,
        6.0 * p.l * p.k * p.alpha0 * p.alpha0 - p.k * p.l / p.delta_norm,
        6.0 * p.l * p.k * p.k * p.alpha0,
        2.0 * p.l * p.k * p.k * p.k,
    };
}

namespace {

double eval_cubic(const std::array<double, 4>& a, double s) {
    return ((a[3] * s + a[2]) * s + a[1]) * s + a[0];
}

void check_ramp_params(const TrajectoryParams& p) {
    if (!(p.k > 0.0) || !std::isfinite(p.k) || !(p.l > 0.0) || !std::isfinite(p.l))
        throw ValueError("ramp slopes k and l must be positive and finite");
    if (!(p.delta_norm > 0.0) || !std::isfinite(p.delta_norm))
        throw ValueError("delta_norm must be positive and finite");
}

// Bisect f over [lo, hi] where the endpoint signs differ; returns the root.
double bisect_root(const std::array<double, 4>& a, double lo, double hi) {
    double flo = eval_cubic(a, lo);
    if (flo == 0.0) return lo;
    for (int i = 0; i < 300; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval exhausted at this precision
        const double fm = eval_cubic(a, mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

CriticalLevel critical_s_numeric(const TrajectoryParams& p) {
    check_ramp_params(p);
    const std::array<double, 4> a = criterion_cubic(p);

    std::vector<double> roots;
    if (a[0] == 0.0) {
        // s = 0 factors out; the remaining quadratic carries any positive roots
        const double qa = a[3], qb = a[2], qc = a[1];
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
            for (double r : {q / qa, qc != 0.0 ? qc / q : 0.0})
                if (r > 0.0) roots.push_back(r);
        }
    } else {
        // All real roots lie below the Cauchy bound; the derivative's critical
        // points split the axis into monotone pieces, one sign change each.
        const double bound =
            1.0 + std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])}) / a[3];
        std::vector<double> knots{0.0};
        const double da = 3.0 * a[3], db = 2.0 * a[2], dc = a[1];
        const double disc = db * db - 4.0 * da * dc;
        if (disc > 0.0) {
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (db + (db >= 0.0 ? sq : -sq));
            for (double t : {q / da, dc / q}) {
                if (t > 0.0 && t < bound) knots.push_back(t);
            }
        }
        knots.push_back(bound);
        std::sort(knots.begin(), knots.end());
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            const double lo = knots[i], hi = knots[i + 1];
            const double flo = eval_cubic(a, lo), fhi = eval_cubic(a, hi);
            if (flo == 0.0) {
                if (lo > 0.0) roots.push_back(lo);
                continue;
            }
            if (fhi == 0.0) {
                roots.push_back(hi);
                continue;
            }
            if ((flo < 0.0) != (fhi < 0.0)) roots.push_back(bisect_root(a, lo, hi));
        }
    }

    std::sort(roots.begin(), roots.end());
    for (double r : roots) {
        if (r > 0.0) {
            CriticalLevel lvl;
            lvl.s1 = r;
            lvl.alpha_star = p.alpha0 + p.k * r;
            lvl.sigma_star = p.sigma0 + p.l * r;
            lvl.residual = std::abs(eval_cubic(a, r));
            return lvl;
        }
    }
    throw NoPositiveRoot("stability criterion never turns non-negative");
}

ClosedFormLevel critical_s_closed_form(const TrajectoryParams& p) {
    check_ramp_params(p);
    const double k = p.k, l = p.l;
    const double k2 = k * k, k3 = k2 * k;
    const double arg = 0.03 / (k2 * k2 * l * l) - 0.02 / (k2 * k3 * l * l) + 1.0 / (k3 * k3);
    if (arg < 0.0) throw DegenerateA("square-root argument is negative");
    const double a_value = std::sqrt(arg) - 0.12 / (k2 * l) + 0.12 / k3;
    if (a_value == 0.0) throw DegenerateA("inner expression vanished");
    const double cb = std::cbrt(a_value);  // real branch for negative values
    ClosedFormLevel out;
    out.a_value = a_value;
    out.s1 = 1.23 * (cb + 1.0 / (k2 * cb)) - 0.1 / (k * p.delta_norm);
    try {
        out.consistency = std::abs(out.s1 - critical_s_numeric(p).s1);
    } catch (const NoPositiveRoot&) {
        out.consistency = std::nullopt;
    }
    return out;
}

LyapunovTrajectory trajectory(const TrajectoryParams& p, double criticality, double sum_delta_sq,
                              std::span<const double> s_grid) {
    check_ramp_params(p);
    if (!std::is_sorted(s_grid.begin(), s_grid.end()))
        throw ValueError("trajectory grid must be sorted ascending");
    for (double s : s_grid) {
        if (!(p.alpha0 + p.k * s > 0.0))
            throw AlphaNonPositiveOnGrid("alpha(s) <= 0 at s = " + std::to_string(s));
    }

    LyapunovTrajectory out;
    out.s2 = -p.sigma0 / p.l;
    out.samples.reserve(s_grid.size());
    for (double s : s_grid) {
        TrajectorySample smp;
        smp.s = s;
        smp.alpha = p.alpha0 + p.k * s;
        smp.sigma = p.sigma0 + p.l * s;
        smp.V = lyapunov_calc(criticality, sum_delta_sq, smp.alpha, smp.sigma, p.epsilon_tol);
        smp.dV_ds = dv_ds_criterion(criticality, sum_delta_sq, smp.alpha, smp.sigma, p.k, p.l,
                                    p.delta_norm);
        out.samples.push_back(smp);
    }
    try {
        out.critical = critical_s_numeric(p);
    } catch (const NoPositiveRoot&) {
        out.critical = std::nullopt;
    }
    return out;
}

StabilityProfile stability_profile(const SubGRNN& sub, const ExpressionDataset& ds,
                                   const GeneId& critical_gene, double criticality,
                                   const TaskSpec& task, const TrajectoryParams& params,
                                   std::uint64_t seed, unsigned d_max) {
    check_ramp_params(params);
    StabilityProfile out;
    out.gene = critical_gene;
    out.criticality = criticality;

    const RegulatoryNetwork filled = assign_missing_correlations(sub.network, seed);
    const std::size_t p = filled.node_index(critical_gene);

    // the gene plus everything it regulates (self-loops ignored)
    std::vector<std::size_t> hood{p};
    for (std::size_t ei : filled.out_edges(p)) {
        const std::size_t t = filled.edges()[ei].target;
        if (t != p) hood.push_back(t);
    }
    std::sort(hood.begin() + 1, hood.end());
    hood.erase(std::unique(hood.begin(), hood.end()), hood.end());

    std::vector<std::vector<double>> rows;
    rows.reserve(hood.size());
    for (std::size_t q : hood) rows.push_back(propagation_row(filled, q, d_max));

    const bool numeric_task = task.is_calculation();
    std::vector<std::size_t> out_idx;
    if (!numeric_task) {
        out_idx.reserve(sub.output_genes.size());
        for (const auto& g : sub.output_genes) out_idx.push_back(filled.node_index(g));
    }

    const std::vector<int> codes = ds.axes().input_codes();
    out.codes.assign(codes.size(), CodeStability{});
    parallel_for(codes.size(), [&](std::size_t ci) {
        const int code = codes[ci];
        CodeStability& cs = out.codes[ci];
        cs.code = code;
        double ssq = 0.0;
        for (std::size_t qi = 0; qi < hood.size(); ++qi) {
            const GeneId& q = filled.nodes()[hood[qi]];
            if (!ds.has_gene(q)) continue;
            double mn = 0.0, mx = 0.0;
            try {
                std::tie(mn, mx) = ds.min_max_expression(q, code);
            } catch (const MissingCell&) {
                continue;  // nothing measured for this code
            }
            KeyedRng rng(RngKey(seed).with("stability").with(q).with(code));
            const double eta = rng.normal();
            if (numeric_task) {
                const std::vector<double> d = calc_deviation_term(1.0, mx - mn, eta, rows[qi]);
                for (double v : d) ssq += v * v;
            } else {
                // start-level deviation each output receives, scored against
                // its stored decision thresholds
                const std::vector<double> dx =
                    delta_x(params.alpha0, params.sigma0 * params.sigma0, mn, mx, eta, rows[qi]);
                for (std::size_t oi = 0; oi < out_idx.size(); ++oi) {
                    const auto th = sub.thresholds.find(sub.output_genes[oi]);
                    if (th == sub.thresholds.end()) continue;
                    for (int rep : ds.axes().replicates) {
                        const auto ti = th->second.find(rep);
                        if (ti == th->second.end()) continue;
                        double x0 = 0.0;
                        try {
                            x0 = ds.expression_at(sub.output_genes[oi], code, sub.timepoint, rep);
                        } catch (const MissingCell&) {
                            continue;
                        }
                        const ClassificationTerms t =
                            classification_terms(x0, x0 + dx[out_idx[oi]], ti->second);
                        const double term = t.beta + static_cast<double>(t.r);  // weight 1 at start
                        ssq += term * term;
                    }
                }
            }
        }
        cs.sum_delta_sq = ssq;
        cs.delta_norm = std::sqrt(ssq);
        if (ssq > 0.0) {
            TrajectoryParams pc = params;
            pc.delta_norm = cs.delta_norm;
            const std::array<double, 4> cubic = criterion_cubic(pc);
            if (cubic[0] >= 0.0) {
                // criterion already non-negative at the ramp start
                cs.level = CriticalLevel{0.0, params.alpha0, params.sigma0, std::abs(cubic[0])};
            } else {
                cs.level = critical_s_numeric(pc);
            }
        }
    });

    for (const CodeStability& cs : out.codes) {
        if (cs.level && (!out.overall || cs.level->s1 < out.overall->s1)) out.overall = cs.level;
    }
    return out;
}

}  // namespace grnn
