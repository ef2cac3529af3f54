#include "stats.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"
#include "metrics.hpp"

namespace hycard {

namespace {

// Lentz's algorithm for the continued fraction of I_x(a, b).
double beta_cf(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-15;
    constexpr int kMaxIter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw NumericError("incomplete_beta: a and b must be positive");
    if (x < 0.0 || x > 1.0) throw NumericError("incomplete_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    // The continued fraction converges fast for x < (a+1)/(a+b+2); use the
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof) {
    if (!(dof > 0.0)) throw NumericError("student_t_two_sided: dof must be positive");
    const double x = dof / (dof + t * t);
    return incomplete_beta(0.5 * dof, 0.5, x);
}

double student_t_cdf(double t, double dof) {
    const double half_tail = 0.5 * student_t_two_sided(t, dof);
    return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw ConfigError("paired_t_test: samples have different lengths");
    const size_t k = a.size();
    if (k < 2) throw ConfigError("paired_t_test: need at least 2 pairs");

    std::vector<double> d(k);
    for (size_t i = 0; i < k; ++i) d[i] = a[i] - b[i];
    auto [md, sd] = mean_std(d);

    TTestResult res;
    res.dof = k - 1;
    if (sd == 0.0) {
        if (md != 0.0)
            throw NumericError("paired_t_test: zero variance with nonzero mean difference");
        res.t = 0.0;
        res.p = 1.0;
        return res;
    }
    res.t = md * std::sqrt(static_cast<double>(k)) / sd;
    res.p = student_t_two_sided(res.t, static_cast<double>(res.dof));
    return res;
}

}  // namespace hycard
