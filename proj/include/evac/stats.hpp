#pragma once

#include "evac/common.hpp"
#include "evac/sweep.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evac {

// ---- special functions ----------------------------------------------------

/// log B(a, b) for a, b > 0, accurate for large arguments.
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps precision when x is close to 1.
double incomplete_beta(double a, double b, double x, double y);
double incomplete_beta(double a, double b, double x);

/// Upper tail P(T > t) of Student's t with `df` degrees of freedom.
/// Throws InputError for non-finite t or df <= 0.
double t_sf(double t, double df);

/// Two-sided p-value 2 P(T > |t|), clamped to [0, 1].
double t_two_sided(double t, double df);

// ---- least squares --------------------------------------------------------

inline constexpr std::string_view kInterceptName = "(Intercept)";

struct DesignMatrix {
    std::vector<std::string> columns;
    Eigen::MatrixXd x; // rows = observations
    Eigen::VectorXd y;
    /// Column 0 is the constant term.
    bool intercept = false;
};

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double t_value = 0.0;
    double p_value = 1.0;
};

struct RankDiagnostic {
    /// Ratio of largest to smallest singular value of the column-scaled design.
    double condition = 1.0;
    std::size_t rank = 0;
    std::size_t columns = 0;
    /// Every column taking part in an exact linear dependence.
    std::vector<std::string> dependent;
    /// Columns that are combinations of earlier columns (left-to-right scan);
    /// dropping these restores full rank.
    std::vector<std::string> aliased;

    bool deficient() const { return rank < columns; }
    std::string describe() const;
};

class RankDeficientError : public InputError {
public:
    explicit RankDeficientError(RankDiagnostic d);
    const RankDiagnostic& diagnostic() const { return diagnostic_; }

private:
    RankDiagnostic diagnostic_;
};

enum class AliasPolicy {
    Reject, // throw RankDeficientError
    Drop,   // fit without the aliased columns and report them as dropped
};

struct RegressionReport {
    std::vector<Coefficient> coefficients;
    std::vector<std::string> dropped;
    std::int64_t observations = 0;
    std::int64_t residual_df = 0;
    double residual_std_error = 0.0;
    double r_squared = 0.0;
    bool intercept = false;
    RankDiagnostic rank;
    std::vector<double> residuals;
};

/// Rank check used by fit_ols; exposed for diagnostics.
RankDiagnostic diagnose_rank(const DesignMatrix& m);

/// Least squares via Householder QR. Requires rows > columns.
RegressionReport fit_ols(const DesignMatrix& m, AliasPolicy policy = AliasPolicy::Reject);

// ---- sweep sensitivity ----------------------------------------------------

enum class InterceptMode {
    NoIntercept,   // seven predictors, no constant
    DropOneWeight, // constant plus all predictors except w_crf
    InterceptFull, // constant plus all seven; singular on exact-one sweeps
};

std::string_view intercept_mode_name(InterceptMode m);
InterceptMode parse_intercept_mode(std::string_view name);

/// Predictor order: storm (signal number), rainfall, time_of_day, threshold,
/// w_cdm, w_hrf, w_crf, each as its numeric code.
DesignMatrix sensitivity_design(std::span<const SweepRow> rows, InterceptMode mode);
RegressionReport sensitivity(std::span<const SweepRow> rows, InterceptMode mode,
                             AliasPolicy policy = AliasPolicy::Reject);

/// p-value text: `<2e-16` below 2.2e-16, otherwise 4 significant digits.
std::string format_p_value(double p);

std::string report_to_text(const RegressionReport& r);
inline constexpr std::string_view kReportCsvHeader = "term,estimate,std_error,t_value,p_value";
std::string report_to_csv(const RegressionReport& r);

// ---- plot series ----------------------------------------------------------

struct SeriesSlice {
    std::int64_t storm = 2;
    double rainfall = 0.5;
    double time_of_day = 1.0;
    double threshold = 0.9;
};

struct SeriesPoint {
    double x = 0.0;
    std::string series; // w_crf, w_hrf or w_cdm
    double mean_evacuated = 0.0;
    std::int64_t n = 0;
    friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

/// For the rows in the slice: mean evacuated against each weight value, one
/// series per weight kind (w_crf, w_hrf, w_cdm), x ascending. Throws
/// InputError when no row matches.
std::vector<SeriesPoint> series(std::span<const SweepRow> rows, const SeriesSlice& slice);

inline constexpr std::string_view kSeriesCsvHeader = "x,series,mean_evacuated,n";
std::string series_to_csv(std::span<const SeriesPoint> points);

} // namespace evac
