#include "evac/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace evac {

namespace {

// Stirling remainder lgamma(x) - [(x - 1/2) log x - x + log sqrt(2 pi)], x >= 10.
// Truncation error after the x^-13 term is below 1e-17 on that range.
double lgamma_correction(double x)
{
    const double r = 1.0 / x;
    const double r2 = r * r;
    return r *
           (1.0 / 12 +
            r2 * (-1.0 / 360 +
                  r2 * (1.0 / 1260 + r2 * (-1.0 / 1680 + r2 * (1.0 / 1188 + r2 * (-691.0 / 360360 + r2 / 156))))));
}

// Continued fraction for I_x(a, b), modified Lentz.
double beta_fraction(double a, double b, double x)
{
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    constexpr int max_iter = 100000;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) {
            return h;
        }
    }
    throw InvariantViolation("incomplete beta continued fraction did not converge");
}

std::string pad_right(const std::string& s, std::size_t w)
{
    return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t w)
{
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string join_names(const std::vector<std::string>& names)
{
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += names[i];
    }
    return out;
}

} // namespace

double log_beta(double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0)) {
        throw InputError("log_beta: arguments must be positive");
    }
    const double p = std::min(a, b);
    const double q = std::max(a, b);
    const double log_sqrt_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    if (p >= 10.0) {
        const double corr = lgamma_correction(p) + lgamma_correction(q) - lgamma_correction(p + q);
        return -0.5 * std::log(q) + log_sqrt_2pi + corr + (p - 0.5) * std::log(p / (p + q)) +
               q * std::log1p(-p / (p + q));
    }
    if (q >= 10.0) {
        const double corr = lgamma_correction(q) - lgamma_correction(p + q);
        return std::lgamma(p) + corr + p - p * std::log(p + q) + (q - 0.5) * std::log1p(-p / (p + q));
    }
    return std::log(std::tgamma(p) * (std::tgamma(q) / std::tgamma(p + q)));
}

double incomplete_beta(double a, double b, double x, double y)
{
    if (!(a > 0.0) || !(b > 0.0)) {
        throw InputError("incomplete_beta: shape parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
        throw InputError("incomplete_beta: x must lie in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (y == 0.0) return 1.0;
    const double log_x = x < 0.5 ? std::log(x) : std::log1p(-y);
    const double log_y = y < 0.5 ? std::log(y) : std::log1p(-x);
    const double front = std::exp(a * log_x + b * log_y - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_fraction(b, a, y) / b;
}

double incomplete_beta(double a, double b, double x)
{
    return incomplete_beta(a, b, x, 1.0 - x);
}

double t_sf(double t, double df)
{
    if (!std::isfinite(t)) {
        throw InputError("t_sf: statistic must be finite");
    }
    if (!(df > 0.0) || !std::isfinite(df)) {
        throw InputError("t_sf: degrees of freedom must be positive");
    }
    // x = df / (df + t^2) written so that huge |t| cannot overflow.
    const double r = t / std::sqrt(df);
    const double x = 1.0 / (1.0 + r * r);
    const double y = 1.0 / (1.0 + 1.0 / (r * r));
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x, y);
    return t > 0.0 ? tail : 1.0 - tail;
}

double t_two_sided(double t, double df)
{
    return std::min(1.0, 2.0 * t_sf(std::abs(t), df));
}

std::string RankDiagnostic::describe() const
{
    std::string out = "rank-deficient design: rank " + std::to_string(rank) + " of " + std::to_string(columns) +
                      " columns (condition " + fmt("%.3g", condition) + ")";
    if (!dependent.empty()) out += "; linearly dependent columns: " + join_names(dependent);
    if (!aliased.empty()) out += "; aliased columns: " + join_names(aliased);
    return out;
}

RankDeficientError::RankDeficientError(RankDiagnostic d)
    : InputError(d.describe()), diagnostic_(std::move(d))
{
}

RankDiagnostic diagnose_rank(const DesignMatrix& m)
{
    const auto p = m.x.cols();
    RankDiagnostic diag;
    diag.columns = static_cast<std::size_t>(p);
    if (p == 0) {
        return diag;
    }

    Eigen::MatrixXd scaled = m.x;
    std::vector<bool> zero(static_cast<std::size_t>(p), false);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double norm = scaled.col(j).norm();
        if (norm == 0.0) {
            zero[static_cast<std::size_t>(j)] = true;
        } else {
            scaled.col(j) /= norm;
        }
    }

    // Left-to-right: a unit column whose residual against the kept ones
    // vanishes is a combination of them.
    constexpr double alias_tol = 1e-7;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < p; ++j) {
        bool aliased = zero[static_cast<std::size_t>(j)];
        if (!aliased && !kept.empty()) {
            Eigen::MatrixXd k(scaled.rows(), static_cast<Eigen::Index>(kept.size()));
            for (std::size_t i = 0; i < kept.size(); ++i) {
                k.col(static_cast<Eigen::Index>(i)) = scaled.col(kept[i]);
            }
            const Eigen::VectorXd coef = k.householderQr().solve(scaled.col(j));
            aliased = (scaled.col(j) - k * coef).norm() <= alias_tol;
        }
        if (aliased) {
            diag.aliased.push_back(m.columns[static_cast<std::size_t>(j)]);
        } else {
            kept.push_back(j);
        }
    }
    diag.rank = kept.size();

    // The singular values of R equal those of the scaled design.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(scaled);
    const auto rows = std::min<Eigen::Index>(scaled.rows(), p);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(p, p);
    r.topRows(rows) = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(p - 1);
    diag.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

    if (diag.deficient()) {
        const auto null_dims = static_cast<Eigen::Index>(diag.columns - diag.rank);
        std::vector<bool> member(static_cast<std::size_t>(p), false);
        for (Eigen::Index k = p - null_dims; k < p; ++k) {
            for (Eigen::Index j = 0; j < p; ++j) {
                if (std::abs(svd.matrixV()(j, k)) > 1e-6) member[static_cast<std::size_t>(j)] = true;
            }
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            if (member[static_cast<std::size_t>(j)] || zero[static_cast<std::size_t>(j)]) {
                diag.dependent.push_back(m.columns[static_cast<std::size_t>(j)]);
            }
        }
    }
    return diag;
}

RegressionReport fit_ols(const DesignMatrix& m, AliasPolicy policy)
{
    if (m.x.rows() != m.y.size() || static_cast<std::size_t>(m.x.cols()) != m.columns.size()) {
        throw InputError("design matrix: shape mismatch");
    }
    if (!m.x.allFinite() || !m.y.allFinite()) {
        throw InputError("design matrix: missing or non-finite values");
    }
    if (m.x.rows() <= m.x.cols()) {
        throw InputError("design matrix: need more rows (" + std::to_string(m.x.rows()) + ") than columns (" +
                         std::to_string(m.x.cols()) + ")");
    }

    RegressionReport rep;
    rep.rank = diagnose_rank(m);
    rep.intercept = m.intercept;
    rep.observations = m.x.rows();

    std::vector<Eigen::Index> use;
    for (Eigen::Index j = 0; j < m.x.cols(); ++j) {
        const auto& name = m.columns[static_cast<std::size_t>(j)];
        if (std::find(rep.rank.aliased.begin(), rep.rank.aliased.end(), name) == rep.rank.aliased.end()) {
            use.push_back(j);
        }
    }
    if (rep.rank.deficient()) {
        if (policy == AliasPolicy::Reject) {
            throw RankDeficientError(rep.rank);
        }
        rep.dropped = rep.rank.aliased;
    }

    const auto n = m.x.rows();
    const auto p = static_cast<Eigen::Index>(use.size());
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        x.col(j) = m.x.col(use[static_cast<std::size_t>(j)]);
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::VectorXd beta = qr.solve(m.y);
    const Eigen::VectorXd resid = m.y - x * beta;
    const double rss = resid.squaredNorm();
    rep.residual_df = n - p;
    const double sigma2 = rss / static_cast<double>(rep.residual_df);
    rep.residual_std_error = std::sqrt(sigma2);

    const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));

    const auto df = static_cast<double>(rep.residual_df);
    for (Eigen::Index j = 0; j < p; ++j) {
        Coefficient c;
        c.name = m.columns[static_cast<std::size_t>(use[static_cast<std::size_t>(j)])];
        c.estimate = beta(j);
        c.std_error = std::sqrt(sigma2 * r_inv.row(j).squaredNorm());
        if (c.std_error > 0.0) {
            c.t_value = c.estimate / c.std_error;
            c.p_value = t_two_sided(c.t_value, df);
        } else if (c.estimate == 0.0) {
            c.t_value = 0.0;
            c.p_value = 1.0;
        } else {
            c.t_value = std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
            c.p_value = 0.0;
        }
        rep.coefficients.push_back(std::move(c));
    }

    double tss = 0.0;
    if (m.intercept) {
        const double mean = m.y.mean();
        tss = (m.y.array() - mean).square().sum();
    } else {
        tss = m.y.squaredNorm();
    }
    rep.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : (rss == 0.0 ? 1.0 : 0.0);
    rep.residuals.assign(resid.data(), resid.data() + resid.size());
    return rep;
}

std::string_view intercept_mode_name(InterceptMode m)
{
    switch (m) {
    case InterceptMode::NoIntercept: return "no-intercept";
    case InterceptMode::DropOneWeight: return "drop-one-weight";
    case InterceptMode::InterceptFull: return "intercept-full";
    }
    return "?";
}

InterceptMode parse_intercept_mode(std::string_view name)
{
    for (auto m : {InterceptMode::NoIntercept, InterceptMode::DropOneWeight, InterceptMode::InterceptFull}) {
        if (intercept_mode_name(m) == name) return m;
    }
    throw InputError("unknown regression mode '" + std::string(name) +
                     "' (expected no-intercept, drop-one-weight or intercept-full)");
}

DesignMatrix sensitivity_design(std::span<const SweepRow> rows, InterceptMode mode)
{
    if (rows.empty()) {
        throw InputError("sensitivity analysis needs at least one sweep row");
    }
    DesignMatrix m;
    m.intercept = mode != InterceptMode::NoIntercept;
    if (m.intercept) m.columns.emplace_back(kInterceptName);
    for (const char* name : {"storm", "rainfall", "time_of_day", "threshold", "w_cdm", "w_hrf", "w_crf"}) {
        if (mode == InterceptMode::DropOneWeight && std::string_view(name) == "w_crf") continue;
        m.columns.emplace_back(name);
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    m.x.resize(n, static_cast<Eigen::Index>(m.columns.size()));
    m.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        Eigen::Index j = 0;
        if (m.intercept) m.x(i, j++) = 1.0;
        m.x(i, j++) = static_cast<double>(r.storm);
        m.x(i, j++) = r.rainfall;
        m.x(i, j++) = r.time_of_day;
        m.x(i, j++) = r.threshold;
        m.x(i, j++) = r.w_cdm;
        m.x(i, j++) = r.w_hrf;
        if (mode != InterceptMode::DropOneWeight) m.x(i, j++) = r.w_crf;
        m.y(i) = static_cast<double>(r.evacuated);
    }
    return m;
}

RegressionReport sensitivity(std::span<const SweepRow> rows, InterceptMode mode, AliasPolicy policy)
{
    return fit_ols(sensitivity_design(rows, mode), policy);
}

std::string format_p_value(double p)
{
    if (p < 2.2e-16) return "<2e-16";
    return fmt("%.4g", p);
}

std::string report_to_text(const RegressionReport& r)
{
    std::vector<std::array<std::string, 5>> cells;
    cells.push_back({"", "Estimate", "Std. Error", "t value", "Pr(>|t|)"});
    for (const auto& c : r.coefficients) {
        cells.push_back({c.name, fmt("%.6g", c.estimate), fmt("%.6g", c.std_error), fmt("%.3f", c.t_value),
                         format_p_value(c.p_value)});
    }
    std::array<std::size_t, 5> width{};
    for (const auto& row : cells) {
        for (std::size_t k = 0; k < 5; ++k) width[k] = std::max(width[k], row[k].size());
    }
    std::ostringstream out;
    out << "Coefficients:\n";
    for (const auto& row : cells) {
        out << pad_right(row[0], width[0]);
        for (std::size_t k = 1; k < 5; ++k) out << "  " << pad_left(row[k], width[k]);
        out << '\n';
    }
    out << "\nResidual standard error: " << fmt("%.6g", r.residual_std_error) << " on " << r.residual_df
        << " degrees of freedom\n";
    out << (r.intercept ? "Multiple R-squared: " : "R-squared (uncentered): ") << fmt("%.6g", r.r_squared) << '\n';
    out << "Observations: " << r.observations << '\n';
    out << "Condition number (scaled design): " << fmt("%.4g", r.rank.condition) << '\n';
    if (!r.dropped.empty()) out << "Dropped aliased columns: " << join_names(r.dropped) << '\n';
    return out.str();
}

std::string report_to_csv(const RegressionReport& r)
{
    std::string out(kReportCsvHeader);
    out += '\n';
    for (const auto& c : r.coefficients) {
        out += c.name + ',' + format_double(c.estimate) + ',' + format_double(c.std_error) + ',' +
               format_double(c.t_value) + ',' + format_double(c.p_value) + '\n';
    }
    return out;
}

std::vector<SeriesPoint> series(std::span<const SweepRow> rows, const SeriesSlice& slice)
{
    struct Acc {
        std::int64_t sum = 0;
        std::int64_t n = 0;
    };
    std::map<double, Acc> by_crf, by_hrf, by_cdm;
    std::int64_t matched = 0;
    for (const auto& r : rows) {
        if (r.storm != slice.storm || r.rainfall != slice.rainfall || r.time_of_day != slice.time_of_day ||
            r.threshold != slice.threshold) {
            continue;
        }
        ++matched;
        for (auto [map, x] : {std::pair{&by_crf, r.w_crf}, {&by_hrf, r.w_hrf}, {&by_cdm, r.w_cdm}}) {
            auto& acc = (*map)[x];
            acc.sum += r.evacuated;
            ++acc.n;
        }
    }
    if (matched == 0) {
        throw InputError("series: no rows match slice storm=" + std::to_string(slice.storm) +
                         " rainfall=" + format_double(slice.rainfall) + " time_of_day=" +
                         format_double(slice.time_of_day) + " threshold=" + format_double(slice.threshold));
    }
    std::vector<SeriesPoint> out;
    for (auto [map, name] : {std::pair{&by_crf, "w_crf"}, {&by_hrf, "w_hrf"}, {&by_cdm, "w_cdm"}}) {
        for (const auto& [x, acc] : *map) {
            out.push_back({x, name, static_cast<double>(acc.sum) / static_cast<double>(acc.n), acc.n});
        }
    }
    return out;
}

std::string series_to_csv(std::span<const SeriesPoint> points)
{
    std::string out(kSeriesCsvHeader);
    out += '\n';
    for (const auto& p : points) {
        out += format_double(p.x) + ',' + p.series + ',' + format_double(p.mean_evacuated) + ',' +
               std::to_string(p.n) + '\n';
    }
    return out;
}

} // namespace evac
