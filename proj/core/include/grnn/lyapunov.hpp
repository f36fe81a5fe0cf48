#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grnn/dataset.hpp"
#include "grnn/network.hpp"
#include "grnn/tasks.hpp"

namespace grnn {

// Affine ramp through perturbation space: alpha(s) = alpha0 + k*s,
// sigma(s) = sigma0 + l*s, with the deviation terms frozen at the start.
struct TrajectoryParams {
    double alpha0 = 0.1;
    double sigma0 = 0.1;
    double k = 10.0;          // strength slope, > 0
    double l = 1.0;           // noise slope, > 0
    double delta_norm = 1.0;  // deviation magnitude dividing the criterion's cubic term, > 0
    double epsilon_tol = 0.0; // tolerance offset added to the certificate
    double zeta = 1e-9;       // regulariser in the weight factors
};

// Expression deviation a gene's perturbation sends to each network node:
// alpha * (x_max - x_min) * sigma2 * eta * row[j].
std::vector<double> delta_x(double alpha, double sigma2, double x_min, double x_max, double eta,
                            std::span<const double> row);

// Neighbor weight: 1 plus the positive part of the relative deviation growth
// over the ramp-start deviation.
double weight_factor_calc(double dx_current, double dx_base, double zeta);
// Membership variant: the growth term only counts when the neighbor
// misclassifies at the current level.
double weight_factor_class(double dist_current, double dist_base, bool misclassified, double zeta);

// Normalised deviation term of one neighbor for the numeric certificate:
// weight * range * eta * row[j] / (1 + range * eta * row[j]) per component.
std::vector<double> calc_deviation_term(double weight, double range, double eta,
                                        std::span<const double> row);

double sum_norm_sq(std::span<const std::vector<double>> vectors);

// Certificate value for numeric tasks:
// V = (epsilon_tol + sigma^2 C^2 / (alpha (1 + C^2))) * sum ||delta||^2.
// NonPositiveAlpha when alpha <= 0; >= 0 whenever epsilon_tol >= 0.
double lyapunov_calc(double criticality, double sum_delta_sq, double alpha, double sigma,
                     double epsilon_tol);
double lyapunov_calc(double criticality, std::span<const std::vector<double>> deltas, double alpha,
                     double sigma, double epsilon_tol);

// Side-of-threshold bookkeeping for one scalar output.
// sign_err = sign((x_pert - theta) * (x_start - theta)) with sign(0) = 0;
// beta = (1 - sign_err) / (1 + dist). beta = 0 when nothing crossed,
// 1 when the value lands exactly on the threshold, up to 2 for a crossing.
struct ClassificationTerms {
    std::uint8_t y = 0;      // x_start > theta
    std::uint8_t y_hat = 0;  // x_pert > theta
    std::uint8_t r = 0;      // y != y_hat
    double dist = 0.0;       // |x_pert - theta|
    int sign_err = 0;
    double beta = 0.0;
};
ClassificationTerms classification_terms(double x_start, double x_pert, double theta);

// Certificate value for membership tasks. The noise factor of each deviation
// term cancels against the sigma^2 prefactor, so the combined form
// (C^2 / (alpha^2 (1 + C^2))) * sum w^2 (beta + r)^2 is evaluated for
// sigma != 0; sigma = 0 means nothing was perturbed and returns the
// certificate's zero point. NonPositiveAlpha when alpha <= 0.
struct ClassNeighborTerm {
    double weight = 1.0;
    double beta = 0.0;
    std::uint8_t r = 0;
};
double lyapunov_class(double criticality, std::span<const ClassNeighborTerm> neighbors, double alpha,
                      double sigma);

// Stability-criterion derivative along the ramp (deviation terms held
// constant): (sigma C^2 / (alpha (1 + C^2))) * (2l - k sigma / (alpha^3 *
// delta_norm)) * sum_delta_sq. Its first non-negative value past the zero of
// sigma marks the instability onset. NonPositiveAlpha when alpha <= 0;
// ValueError when delta_norm <= 0.
double dv_ds_criterion(double criticality, double sum_delta_sq, double alpha, double sigma, double k,
                       double l, double delta_norm);

// Exact chain-rule derivative of the frozen-deviation certificate; reference
// for finite-difference checks of the calculus.
double dv_ds_ramp(double criticality, double sum_delta_sq, double alpha, double sigma, double k,
                  double l);

struct TrajectorySample {
    double s = 0.0, alpha = 0.0, sigma = 0.0, V = 0.0, dV_ds = 0.0;
};

struct CriticalLevel {
    double s1 = 0.0;          // onset level
    double alpha_star = 0.0;  // alpha(s1)
    double sigma_star = 0.0;  // sigma(s1)
    double residual = 0.0;    // |cubic(s1)|
};

struct LyapunovTrajectory {
    std::vector<TrajectorySample> samples;
    std::optional<CriticalLevel> critical;  // absent when the criterion never turns
    double s2 = 0.0;                        // level where the noise slope crosses zero
};

// Certificate and criterion derivative along the ramp at the given levels,
// plus the criterion's onset root and the noise zero s2 = -sigma0/l.
// ValueError on an unsorted grid; AlphaNonPositiveOnGrid when any grid point
// maps to alpha <= 0.
LyapunovTrajectory trajectory(const TrajectoryParams& params, double criticality,
                              double sum_delta_sq, std::span<const double> s_grid);

// Cubic whose smallest positive root is the criterion's zero, coefficients
// ascending: [a0, a1, a2, a3] with
//   a3 = 2 l k^3, a2 = 6 l k^2 alpha0,
//   a1 = 6 l k alpha0^2 - k l / delta_norm,
//   a0 = 2 l alpha0^3 - k sigma0 / delta_norm.
std::array<double, 4> criterion_cubic(const TrajectoryParams& params);

// Smallest positive root of the criterion cubic by derivative-guided
// bracketing + bisection; residual tightened below 1e-12 times the largest
// coefficient magnitude. NoPositiveRoot when the cubic has none; ValueError
// on non-positive k, l, or delta_norm.
CriticalLevel critical_s_numeric(const TrajectoryParams& params);

// Closed-form estimate of the onset level. Advisory only: `consistency`
// reports |closed - numeric| when the numeric root exists; the two are NOT
// asserted equal anywhere. DegenerateA when the inner expression degenerates
// (negative square-root argument or A = 0); negative A uses the real cube
// root.
struct ClosedFormLevel {
    double s1 = 0.0;
    double a_value = 0.0;
    std::optional<double> consistency;
};
ClosedFormLevel critical_s_closed_form(const TrajectoryParams& params);

// Per-input-code stability of the subnetwork around one critical gene. The
// deviation terms are built once at the ramp start, where every neighbor
// weight is exactly 1: numeric tasks turn propagation rows and expression
// ranges into normalised deviation vectors; membership tasks score the
// start-level deviation of each output against its stored thresholds. The
// criterion then locates the onset level per code (s1 = 0 when it is already
// non-negative at the start; `residual` holds the cubic's value there).
// Codes with no deviation report no onset. `overall` is the earliest onset.
struct CodeStability {
    int code = 0;
    double sum_delta_sq = 0.0;
    double delta_norm = 0.0;
    std::optional<CriticalLevel> level;
};
struct StabilityProfile {
    GeneId gene;
    double criticality = 1.0;
    std::vector<CodeStability> codes;
    std::optional<CriticalLevel> overall;
};
StabilityProfile stability_profile(const SubGRNN& sub, const ExpressionDataset& ds,
                                   const GeneId& critical_gene, double criticality,
                                   const TaskSpec& task, const TrajectoryParams& params,
                                   std::uint64_t seed, unsigned d_max = 4);

}  // namespace grnn
