#include "ccmtool/baselines.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "ccmtool/errors.hpp"

namespace ccmtool {

namespace {

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for I_x(a, b) by the modified Lentz method; converges
// fast when x < (a+1)/(a+b+2), which reg_inc_beta guarantees.
double betacf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
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
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw InvalidSpec("incomplete beta needs positive shape parameters");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front =
        std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double f_distribution_sf(double x, double d1, double d2) {
    if (!(d1 >= 1.0) || !(d2 >= 1.0))
        throw InvalidSpec("F degrees of freedom must be >= 1");
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    // P(F > x) = I_u(d2/2, d1/2) with u = d2 / (d2 + d1 x).
    const double u = d2 / (d2 + d1 * x);
    return reg_inc_beta(d2 / 2.0, d1 / 2.0, u);
}

namespace {

struct Fit {
    double rss = 0.0;
    bool full_rank = true;
};

Fit least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::VectorXd beta = qr.solve(y);
    Fit f;
    f.rss = (y - x * beta).squaredNorm();
    f.full_rank = qr.rank() == x.cols();
    return f;
}

} // namespace

double granger_skill(const GrangerResult& r) {
    if (!(r.rss_restricted > 0.0)) return 0.0;
    return std::sqrt(
        std::max(0.0, (r.rss_restricted - r.rss_full) / r.rss_restricted));
}

GrangerResult granger(const TimeSeries& source, const TimeSeries& target,
                      int lag_order) {
    if (lag_order < 1) throw InvalidSpec("lag order must be >= 1");
    if (source.size() != target.size())
        throw LengthMismatch("source and target lengths differ");
    const int n = static_cast<int>(target.size());
    const int p = lag_order;
    if (n <= 3 * p + 2)
        throw SeriesTooShort("granger with lag order " + std::to_string(p) +
                             " needs more than " + std::to_string(3 * p + 2) +
                             " samples");

    const int rows = n - p;
    Eigen::VectorXd y(rows);
    Eigen::MatrixXd xr(rows, 1 + p);
    Eigen::MatrixXd xf(rows, 1 + 2 * p);
    for (int t = 0; t < rows; ++t) {
        const int abs_t = t + p;
        y(t) = target[static_cast<std::size_t>(abs_t)];
        xr(t, 0) = 1.0;
        xf(t, 0) = 1.0;
        for (int l = 1; l <= p; ++l) {
            const double ylag = target[static_cast<std::size_t>(abs_t - l)];
            const double xlag = source[static_cast<std::size_t>(abs_t - l)];
            xr(t, l) = ylag;
            xf(t, l) = ylag;
            xf(t, p + l) = xlag;
        }
    }

    const Fit restricted = least_squares(xr, y);
    const Fit full = least_squares(xf, y);

    GrangerResult out;
    out.direction = {source.label(), target.label()};
    out.lag_order = p;
    out.rss_restricted = restricted.rss;
    out.rss_full = full.rss;

    const double tss = (y.array() - y.mean()).square().sum();
    out.r2_restricted = tss > 0.0 ? 1.0 - restricted.rss / tss : 0.0;
    out.r2_full = tss > 0.0 ? 1.0 - full.rss / tss : 0.0;

    // Exact-fit guard first: a perfectly predicted target has no residual
    // scale for the F denominator.
    if (full.rss < 1e-12) {
        out.f_statistic = std::numeric_limits<double>::infinity();
        out.p_value = 0.0;
        return out;
    }
    if (!restricted.full_rank || !full.full_rank)
        throw SingularDesign("collinear lag design");

    const int df2 = rows - 2 * p - 1;
    const double num = std::max(0.0, restricted.rss - full.rss) /
                       static_cast<double>(p);
    const double den = full.rss / static_cast<double>(df2);
    out.f_statistic = num / den;
    out.p_value = f_distribution_sf(out.f_statistic, static_cast<double>(p),
                                    static_cast<double>(df2));
    return out;
}

} // namespace ccmtool
