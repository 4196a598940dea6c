#include "doctest.h"

#include <array>
#include <cmath>
#include <map>

#include "gandi/domains/gmm.hpp"
#include "gandi/resampler.hpp"

using namespace gandi;

namespace {

std::vector<LabeledSample> make_samples(std::size_t n) {
    std::vector<LabeledSample> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({{}, {static_cast<double>(i)}, SampleLabel::off_target});
    return out;
}

} // namespace

TEST_CASE("build_plan normalizes weights into probabilities") {
    auto plan = build_plan(make_samples(2), std::vector<double>{1.0, 3.0});
    CHECK(plan.probabilities[0] == doctest::Approx(0.25));
    CHECK(plan.probabilities[1] == doctest::Approx(0.75));
    CHECK(plan.effective_sample_size == doctest::Approx(4.0));
}

TEST_CASE("equal weights give uniform probabilities") {
    auto plan = build_plan(make_samples(5), std::vector<double>(5, 2.5));
    for (double p : plan.probabilities) CHECK(p == doctest::Approx(0.2));
}

TEST_CASE("zero-weight samples get zero probability and are never drawn") {
    auto plan = build_plan(make_samples(3), std::vector<double>{0.0, 2.0, 2.0});
    CHECK(plan.probabilities[0] == 0.0);
    CHECK(plan.probabilities[1] == doctest::Approx(0.5));
    Rng rng(1);
    for (int i = 0; i < 100000; ++i) CHECK(bootstrap_index(plan, rng) != 0);
}

TEST_CASE("all-zero weights cannot be bootstrapped") {
    CHECK_THROWS_AS((void)build_plan(make_samples(3), std::vector<double>{0.0, 0.0, 0.0}),
                    std::runtime_error);
}

TEST_CASE("bootstrap draw counts match the plan probabilities") {
    auto plan = build_plan(make_samples(2), std::vector<double>{1.0, 3.0});
    Rng rng(2);
    const std::size_t n = 100000;
    auto drawn = bootstrap(plan, n, rng);
    REQUIRE(drawn.size() == n);
    std::size_t second = 0;
    for (const auto& s : drawn)
        if (s.action[0] == 1.0) ++second;
    CHECK(static_cast<double>(second) / static_cast<double>(n) ==
          doctest::Approx(0.75).epsilon(0.015));
}

TEST_CASE("bootstrap with n = 0 returns an empty sequence") {
    auto plan = build_plan(make_samples(2), std::vector<double>{1.0, 1.0});
    Rng rng(3);
    CHECK(bootstrap(plan, 0, rng).empty());
}

TEST_CASE("bootstrap is deterministic for a fixed seed") {
    auto plan = build_plan(make_samples(4), std::vector<double>{1.0, 2.0, 3.0, 4.0});
    Rng a(42), b(42);
    auto da = bootstrap(plan, 500, a);
    auto db = bootstrap(plan, 500, b);
    for (std::size_t i = 0; i < da.size(); ++i) CHECK(da[i].action[0] == db[i].action[0]);
}

TEST_CASE("proportionality: exact ratio weights make p_w equal renormalized p") {
    // finite support: weights w_i = p_i/q_i, each sample drawn once from q's
    // support; p_w must equal p restricted to that support, exactly.
    const std::vector<double> p = {0.5, 0.3, 0.2};
    const std::vector<double> q = {0.25, 0.25, 0.5};
    std::vector<double> w(3);
    for (std::size_t i = 0; i < 3; ++i) w[i] = p[i] / q[i];
    auto plan = build_plan(make_samples(3), w);
    const double wsum = w[0] + w[1] + w[2];
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(plan.probabilities[i] == doctest::Approx(w[i] / wsum).epsilon(1e-15));
    // when samples appear with multiplicity proportional to q, p_w matches p
    std::vector<LabeledSample> samples;
    std::vector<double> weights;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto copies = static_cast<std::size_t>(q[i] * 20);
        for (std::size_t c = 0; c < copies; ++c) {
            samples.push_back({{}, {static_cast<double>(i)}, SampleLabel::off_target});
            weights.push_back(w[i]);
        }
    }
    auto plan2 = build_plan(samples, weights);
    std::map<double, double> mass;
    for (std::size_t i = 0; i < plan2.source.size(); ++i)
        mass[plan2.source[i].action[0]] += plan2.probabilities[i];
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(mass[static_cast<double>(i)] == doctest::Approx(p[i]).epsilon(1e-12));
}

TEST_CASE("chi-square goodness of fit over 1e5 draws") {
    auto plan = build_plan(make_samples(4), std::vector<double>{1.0, 2.0, 3.0, 4.0});
    Rng rng(7);
    const std::size_t n = 100000;
    std::array<std::size_t, 4> counts{};
    for (std::size_t i = 0; i < n; ++i) counts[bootstrap_index(plan, rng)] += 1;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double expected = plan.probabilities[i] * static_cast<double>(n);
        const double d = static_cast<double>(counts[i]) - expected;
        chi2 += d * d / expected;
    }
    // 3 degrees of freedom, significance 0.01 -> critical value 11.345
    CHECK(chi2 < 11.345);
}

TEST_CASE("bootstrapped mixture data approaches the target density") {
    // Prop. 1 on the toy mixtures: with the analytic ratio as weights, the
    // bootstrapped cloud's 20x20 histogram is within TV 0.1 of the analytic
    // p density renormalized over the same grid.
    Rng rng(11);
    const auto p = gmm_p();
    const auto q = gmm_q();
    std::vector<LabeledSample> samples;
    std::vector<double> weights;
    for (int i = 0; i < 4000; ++i) {
        const auto a = q.sample(rng);
        samples.push_back({{}, {a[0], a[1]}, SampleLabel::off_target});
        weights.push_back(p.density(a[0], a[1]) / q.density(a[0], a[1]));
    }
    auto plan = build_plan(samples, weights);
    auto drawn = bootstrap(plan, 20000, rng);

    const double x0 = 0.0, x1 = 4.0, y0 = 0.0, y1 = 3.0;
    const std::size_t bins = 20;
    std::vector<double> hist(bins * bins, 0.0), target(bins * bins, 0.0);
    std::size_t inside = 0;
    for (const auto& s : drawn) {
        if (s.action[0] < x0 || s.action[0] >= x1 || s.action[1] < y0 || s.action[1] >= y1)
            continue;
        const auto ix = static_cast<std::size_t>((s.action[0] - x0) / (x1 - x0) * bins);
        const auto iy = static_cast<std::size_t>((s.action[1] - y0) / (y1 - y0) * bins);
        hist[iy * bins + ix] += 1.0;
        ++inside;
    }
    double tmass = 0.0;
    for (std::size_t iy = 0; iy < bins; ++iy)
        for (std::size_t ix = 0; ix < bins; ++ix) {
            const double cx = x0 + (x1 - x0) * (ix + 0.5) / bins;
            const double cy = y0 + (y1 - y0) * (iy + 0.5) / bins;
            target[iy * bins + ix] = p.density(cx, cy);
            tmass += target[iy * bins + ix];
        }
    double tv = 0.0;
    for (std::size_t i = 0; i < hist.size(); ++i)
        tv += std::abs(hist[i] / static_cast<double>(inside) - target[i] / tmass);
    CHECK(tv / 2.0 <= 0.1);
}
