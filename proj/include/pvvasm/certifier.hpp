#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace pvvasm {

// Which tail of the bona-fide score Z is being bounded.
//   CertifyBonaFide: P[Z < 1/2], exponent t < 0 (prediction must stay bona fide)
//   CertifySpoof:    P[Z > 1/2], exponent t > 0 (prediction must stay spoof)
enum class Direction { CertifyBonaFide, CertifySpoof };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

// k x n matrix of bona-fide probabilities, row j holding batch j.
class ScoreMatrix {
public:
    ScoreMatrix() = default;
    // values in row-major order, size k * n; every entry finite and in [0, 1].
    ScoreMatrix(std::size_t k, std::size_t n, std::vector<double> values);

    // Splits a pooled sample of m = n * k scores into k consecutive batches.
    static ScoreMatrix from_pool(std::span<const double> pool, std::size_t n, std::size_t k);

    std::size_t k() const noexcept { return k_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> row(std::size_t j) const;
    std::span<const double> pooled() const noexcept { return values_; }

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

private:
    std::size_t k_ = 0;
    std::size_t n_ = 0;
    std::vector<double> values_;
};

struct CertBudget {
    std::size_t n = 1000;
    std::size_t k = 20;
    double delta = 0.9;
    double alpha = 1e-6;
    // Signed search interval for t; must not contain 0 and must lie on the
    // side matching `direction`.
    double t_lo = -50.0;
    double t_hi = -1e-4;
    Direction direction = Direction::CertifyBonaFide;

    std::size_t grid_points = 200;
    // Share of alpha spent on the CV interval; the rest goes to the p check.
    double cv_alpha_share = 0.5;
    double cv_method_threshold = 0.33;
    std::size_t bootstrap_resamples = 2000;
    std::uint64_t seed = 0;

    double cv_alpha() const noexcept { return alpha * cv_alpha_share; }
    double error_prob_limit() const noexcept { return alpha * (1.0 - cv_alpha_share); }

    // Copy with the t-range mirrored onto the side required by `d`.
    CertBudget oriented(Direction d) const;

    // Throws ConfigError on any invariant violation.
    void validate() const;
};

// Y_j = (1/n) sum_i exp(t (Z_ji - 1/2)), one value per batch.
std::vector<double> batch_statistic(const ScoreMatrix& scores, double t, Direction direction);

// Geometric grid of budget.grid_points exponents spanning the t-range,
// ordered by increasing |t|. Both endpoints are included exactly.
std::vector<double> t_grid(const CertBudget& budget);

struct ChernoffResult {
    double bound = 1.0;     // min(1, max_j Y_j(t*) / delta)
    double t_star = 0.0;
    double max_mean = 1.0;  // max_j Y_j(t*)
};

ChernoffResult chernoff_bound(const ScoreMatrix& scores, const CertBudget& budget);
ChernoffResult chernoff_bound(const ScoreMatrix& scores, const CertBudget& budget,
                              std::span<const double> grid);

// (1 + n (1 - delta)^2 / c^2)^(-k); 0 at c == 0, 1 at c == inf.
double error_probability(std::size_t n, std::size_t k, double delta, double c);

// Bessel-corrected standard deviation over the mean.
double sample_cv(std::span<const double> values);

enum class CvMethod { Degenerate, McKay, Bootstrap };
std::string to_string(CvMethod m);

struct CvOptions {
    double method_threshold = 0.33;
    std::size_t bootstrap_resamples = 2000;
    std::uint64_t seed = 0;
};

struct CvEstimate {
    double c_hat = 0.0;
    double c_tilde = 0.0;
    CvMethod method = CvMethod::Degenerate;
    bool degenerate() const noexcept { return method == CvMethod::Degenerate; }
};

// One-sided upper confidence limit for the coefficient of variation at
// miscoverage confidence_alpha / 2 (chi-square percentile convention).
CvEstimate cv_upper_bound(std::span<const double> values, double confidence_alpha,
                          const CvOptions& options = {});

struct Certificate {
    double bound = 1.0;
    double t_star = 0.0;
    double c_hat = 0.0;
    double c_tilde = std::numeric_limits<double>::infinity();
    double error_prob = 1.0;
    double epsilon = 0.0;
    double error_prob_limit = 0.0;
    bool certified = false;
    bool degenerate = false;
    CvMethod cv_method = CvMethod::Degenerate;
    Direction direction = Direction::CertifyBonaFide;

    // Same certificate evaluated against another threshold.
    Certificate at_epsilon(double eps) const;

    friend bool operator==(const Certificate&, const Certificate&) = default;
};

Certificate certify(const ScoreMatrix& scores, const CertBudget& budget, double epsilon);

}  // namespace pvvasm
