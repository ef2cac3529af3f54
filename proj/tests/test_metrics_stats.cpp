#include <doctest.h>

#include <cmath>
#include <functional>

#include "errors.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "stats.hpp"

using namespace hycard;

// ---------------------------------------------------------------------------
// Confusion matrix
// ---------------------------------------------------------------------------

TEST_CASE("confusion counts by definition") {
    const std::vector<int> ones(7, 1);
    const auto all = confusion(ones, ones);
    CHECK(all.tp == 7);
    CHECK(all.tn == 0);
    CHECK(all.fp == 0);
    CHECK(all.fn == 0);

    const auto cm = confusion({1, 0, 1, 0}, {1, 1, 0, 0});
    CHECK(cm.tp == 1);
    CHECK(cm.tn == 1);
    CHECK(cm.fp == 1);
    CHECK(cm.fn == 1);

    CHECK_THROWS_AS(confusion({1, 0}, {1}), ConfigError);
    CHECK_THROWS_AS(confusion({1, 2}, {1, 0}), DataError);
}

TEST_CASE("confusion matches an independent counting loop on random pairs") {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t n = 1 + rng.index(50);
        std::vector<int> t(n), p(n);
        for (size_t i = 0; i < n; ++i) {
            t[i] = static_cast<int>(rng.index(2));
            p[i] = static_cast<int>(rng.index(2));
        }
        size_t tp = 0, tn = 0, fp = 0, fn = 0;
        for (size_t i = 0; i < n; ++i) {
            if (t[i] == 1 && p[i] == 1) ++tp;
            if (t[i] == 0 && p[i] == 0) ++tn;
            if (t[i] == 0 && p[i] == 1) ++fp;
            if (t[i] == 1 && p[i] == 0) ++fn;
        }
        const auto cm = confusion(t, p);
        CHECK(cm.tp == tp);
        CHECK(cm.tn == tn);
        CHECK(cm.fp == fp);
        CHECK(cm.fn == fn);
        CHECK(cm.total() == n);
    }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

TEST_CASE("metrics evaluate the five definitions on a worked example") {
    const auto r = metrics({50, 40, 10, 0});
    CHECK(r.accuracy == doctest::Approx(0.900).epsilon(1e-12));
    CHECK(r.precision == doctest::Approx(50.0 / 60.0).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(1.000).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(10.0 / 11.0).epsilon(1e-12));
    CHECK(r.specificity == doctest::Approx(0.800).epsilon(1e-12));
    CHECK_FALSE(r.precision_degenerate);
}

TEST_CASE("a perfect classifier scores 1.0 on every metric") {
    const auto r = metrics({30, 70, 0, 0});
    CHECK(r.accuracy == 1.0);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.specificity == 1.0);
}

TEST_CASE("degenerate denominators flag and zero the metric") {
    // nothing predicted positive and nothing actually positive
    const auto r = metrics({0, 9, 0, 0});
    CHECK(r.precision == 0.0);
    CHECK(r.precision_degenerate);
    CHECK(r.recall == 0.0);
    CHECK(r.recall_degenerate);
    CHECK(r.f1 == 0.0);
    CHECK(r.f1_degenerate);
    CHECK_FALSE(r.specificity_degenerate);
    CHECK_THROWS_AS(metrics({0, 0, 0, 0}), ConfigError);
}

TEST_CASE("accuracy decomposes into recall and specificity weighted by class counts") {
    Rng rng(123);
    for (int trial = 0; trial < 500; ++trial) {
        ConfusionMatrix cm{rng.index(50) + 1, rng.index(50) + 1, rng.index(50), rng.index(50)};
        const auto r = metrics(cm);
        const double P = static_cast<double>(cm.tp + cm.fn);
        const double N = static_cast<double>(cm.tn + cm.fp);
        const double expected = (r.recall * P + r.specificity * N) / (P + N);
        CHECK(r.accuracy == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("mean_std computes sample statistics") {
    const auto constant = mean_std({5, 5, 5});
    CHECK(constant.first == 5.0);
    CHECK(constant.second == 0.0);

    const auto pair = mean_std({1, 3});
    CHECK(pair.first == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(pair.second == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    CHECK_THROWS_AS(mean_std({1.0}), ConfigError);
}

TEST_CASE("mean_std matches a two-pass oracle on random vectors") {
    Rng rng(321);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(2 + rng.index(40));
        for (auto& x : v) x = rng.uniform(-100.0, 100.0);
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));

        const auto [m, s] = mean_std(v);
        CHECK(m == doctest::Approx(mean).epsilon(1e-12));
        CHECK(s == doctest::Approx(sd).epsilon(1e-12));
    }
}

// ---------------------------------------------------------------------------
// Student-t machinery
// ---------------------------------------------------------------------------

TEST_CASE("incomplete beta endpoints and reflection symmetry") {
    CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const double a = rng.uniform(0.2, 40.0);
        const double b = rng.uniform(0.2, 40.0);
        const double x = rng.uniform(0.0, 1.0);
        const double lhs = incomplete_beta(a, b, x);
        const double rhs = 1.0 - incomplete_beta(b, a, 1.0 - x);
        CHECK(std::fabs(lhs - rhs) <= 1e-12);
        CHECK(lhs >= 0.0);
        CHECK(lhs <= 1.0);
    }
    CHECK_THROWS_AS(incomplete_beta(-1.0, 1.0, 0.5), NumericError);
    CHECK_THROWS_AS(incomplete_beta(1.0, 1.0, 1.5), NumericError);
}

TEST_CASE("t CDF matches elementary closed forms for dof 1 and 2") {
    constexpr double kPi = 3.14159265358979323846264338327950288;
    for (double t = -6.0; t <= 6.0; t += 0.25) {
        const double cdf1 = 0.5 + std::atan(t) / kPi;
        const double cdf2 = 0.5 + t / (2.0 * std::sqrt(2.0 + t * t));
        CHECK(std::fabs(student_t_cdf(t, 1.0) - cdf1) <= 1e-10 * cdf1 + 1e-15);
        CHECK(std::fabs(student_t_cdf(t, 2.0) - cdf2) <= 1e-10 * cdf2 + 1e-15);
    }
}

TEST_CASE("two-sided p matches high-precision reference values to 1e-10") {
    struct Ref {
        double t;
        double dof;
        double p;
    };
    // computed with 40-digit arithmetic from the regularized incomplete beta
    const Ref refs[] = {
        {0.5, 1, 0.704832764699133452},   {1.5, 1, 0.374334083621997632},
        {3.0, 1, 0.204832764699133452},   {5.0, 1, 0.125665916378002368},
        {0.5, 2, 0.666666666666666667},   {1.5, 2, 0.272393124891001079},
        {3.0, 2, 0.0954659662667091321},  {5.0, 2, 0.0377495513506237258},
        {0.5, 5, 0.638298871640929007},   {1.5, 5, 0.193903680242473432},
        {3.0, 5, 0.0300992478974625738},  {5.0, 5, 0.00410471598005332242},
        {0.5, 9, 0.62907129982602648},    {1.5, 9, 0.167850656057074821},
        {3.0, 9, 0.0149563639104142148},  {5.0, 9, 0.000738967909803242701},
        {0.5, 30, 0.620723004885127286},  {1.5, 30, 0.144065929128646001},
        {3.0, 30, 0.00538996406565194661},{5.0, 30, 0.0000232966854670077951},
        {0.5, 200, 0.617624752316460671}, {1.5, 200, 0.135191321227034964},
        {3.0, 200, 0.0030430471139059028},{5.0, 200, 1.25019812777153954e-6},
    };
    for (const auto& ref : refs) {
        const double p = student_t_two_sided(ref.t, ref.dof);
        CHECK(std::fabs(p - ref.p) / ref.p <= 1e-10);
    }
}

namespace {

// Adaptive Simpson quadrature of the t density; an independent route to the
// CDF for cross-checking the incomplete-beta path.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
               double fm, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) +
           simpson(f, m, b, fm, fb, frm, eps / 2.0, depth - 1);
}

double t_density(double x, double dof) {
    // log-space normalization via lgamma
    const double ln = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                      0.5 * std::log(dof * 3.14159265358979323846);
    return std::exp(ln - 0.5 * (dof + 1.0) * std::log1p(x * x / dof));
}

double quadrature_two_sided(double t, double dof) {
    // p = 1 - integral of the density over [-t, t]: a finite smooth interval,
    // so no tail truncation even for heavy (low-dof) distributions.
    const auto f = [dof](double x) { return t_density(x, dof); };
    const double a = -std::fabs(t), b = std::fabs(t);
    const double inner = simpson(f, a, b, f(a), f(b), f(0.0), 1e-15, 45);
    return 1.0 - inner;
}

}  // namespace

TEST_CASE("two-sided p agrees with adaptive quadrature of the density") {
    for (double dof : {1.0, 3.0, 9.0, 30.0, 120.0}) {
        for (double t : {0.3, 1.0, 2.262, 4.0}) {
            const double p = student_t_two_sided(t, dof);
            const double q = quadrature_two_sided(t, dof);
            CHECK(std::fabs(p - q) <= 1e-12 + 1e-9 * p);
        }
    }
}

TEST_CASE("p is monotone decreasing in |t|") {
    for (double dof : {1.0, 9.0, 50.0}) {
        double prev = 1.1;
        for (double t = 0.0; t <= 8.0; t += 0.05) {
            const double p = student_t_two_sided(t, dof);
            CHECK(p <= prev + 1e-15);
            prev = p;
        }
    }
}

TEST_CASE("paired t-test handles identical samples and the t-table anchors") {
    const std::vector<double> a = {0.8, 0.9, 0.85, 0.95};
    const auto same = paired_t_test(a, a);
    CHECK(same.t == 0.0);
    CHECK(same.p == 1.0);
    CHECK(same.dof == 3);

    // engineered data: d = c + z with z = alternating +-1 (mean 0, sd sqrt(10/9));
    // t = 3c exactly, so c = t/3 reproduces any table value at k = 10.
    auto engineered = [](double t_target) {
        std::vector<double> d(10), zero(10, 0.0);
        for (size_t i = 0; i < 10; ++i)
            d[i] = t_target / 3.0 + (i % 2 == 0 ? 1.0 : -1.0);
        return paired_t_test(d, zero);
    };
    const auto t1 = engineered(2.262);
    CHECK(t1.dof == 9);
    CHECK(t1.t == doctest::Approx(2.262).epsilon(1e-12));
    CHECK(std::fabs(t1.p - 0.050) <= 0.001);
    CHECK(t1.p == doctest::Approx(0.050012845502454630).epsilon(1e-10));

    const auto t2 = engineered(3.250);
    CHECK(std::fabs(t2.p - 0.010) <= 0.001);
    CHECK(t2.p == doctest::Approx(0.0099973690840215669).epsilon(1e-10));
}

TEST_CASE("paired t-test is antisymmetric and rejects degenerate inputs") {
    const std::vector<double> a = {0.82, 0.87, 0.91, 0.78, 0.85};
    const std::vector<double> b = {0.80, 0.84, 0.93, 0.74, 0.88};
    const auto ab = paired_t_test(a, b);
    const auto ba = paired_t_test(b, a);
    CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-15));
    CHECK(ab.p == doctest::Approx(ba.p).epsilon(1e-15));

    // exactly-constant nonzero difference: undefined t
    const std::vector<double> lo = {1, 2, 3, 4, 5};
    const std::vector<double> hi = {3, 4, 5, 6, 7};
    CHECK_THROWS_AS(paired_t_test(hi, lo), NumericError);
    CHECK_THROWS_AS(paired_t_test({1.0}, {2.0}), ConfigError);
    CHECK_THROWS_AS(paired_t_test(a, {1.0, 2.0}), ConfigError);
}
