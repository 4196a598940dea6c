#include "doctest.h"

#include <map>
#include <sstream>

#include "gandi/importance.hpp"

using namespace gandi;

namespace {

LabeledSample sample1d(double a, SampleLabel label) {
    return {{}, {a}, label};
}

const BoxBounds kUnitBox{{0.0}, {1.0}};

// two-bin layout on [0,1] with 2 bins: bin a = [0,0.5), bin b = [0.5,1]
const double kBinA = 0.25;
const double kBinB = 0.75;

} // namespace

TEST_CASE("tabular fit matches the per-bin closed form") {
    std::vector<LabeledSample> off = {sample1d(kBinA, SampleLabel::off_target),
                                      sample1d(kBinA, SampleLabel::off_target),
                                      sample1d(kBinA, SampleLabel::off_target),
                                      sample1d(kBinB, SampleLabel::off_target)};
    std::vector<LabeledSample> on = {sample1d(kBinA, SampleLabel::on_target),
                                     sample1d(kBinB, SampleLabel::on_target),
                                     sample1d(kBinB, SampleLabel::on_target),
                                     sample1d(kBinB, SampleLabel::on_target)};
    auto model = ImportanceModel::fit_tabular(on, off, kUnitBox, 2);
    CHECK(model.weight({}, {kBinA}) == doctest::Approx(1.0 / 3.0));
    CHECK(model.weight({}, {kBinB}) == doctest::Approx(3.0));

    SUBCASE("empirical J at the closed-form optimum") {
        // 3*(1/9) + 9 - 2*(1/3 + 9)
        CHECK(model.empirical_J(on, off) == doctest::Approx(-9.0 - 1.0 / 3.0));
    }
}

TEST_CASE("identical multisets give unit weights on the support") {
    std::vector<LabeledSample> on = {sample1d(0.1, SampleLabel::on_target),
                                     sample1d(0.6, SampleLabel::on_target),
                                     sample1d(0.9, SampleLabel::on_target)};
    auto off = on;
    for (auto& s : off) s.label = SampleLabel::off_target;
    auto model = ImportanceModel::fit_tabular(on, off, kUnitBox, 20);
    for (const auto& s : on) CHECK(model.weight(s) == doctest::Approx(1.0));

    SUBCASE("unit weights: J = n_q - 2 n_p") {
        std::vector<LabeledSample> on4(4, sample1d(0.1, SampleLabel::on_target));
        std::vector<LabeledSample> off4(4, sample1d(0.1, SampleLabel::off_target));
        auto m = ImportanceModel::fit_tabular(on4, off4, kUnitBox, 20);
        CHECK(m.empirical_J(on4, off4) == doctest::Approx(-4.0));
    }
}

TEST_CASE("unseen tabular bin returns zero") {
    std::vector<LabeledSample> on = {sample1d(0.1, SampleLabel::on_target)};
    std::vector<LabeledSample> off = {sample1d(0.1, SampleLabel::off_target)};
    auto model = ImportanceModel::fit_tabular(on, off, kUnitBox, 20);
    CHECK(model.weight({}, {0.95}) == 0.0);

    SUBCASE("all-zero weights give J = 0") {
        std::vector<LabeledSample> elsewhere = {sample1d(0.95, SampleLabel::on_target)};
        CHECK(model.empirical_J(elsewhere, elsewhere) == 0.0);
    }
}

TEST_CASE("negative raw network output clamps to zero") {
    // hand-written model file: a 1-1 linear net with weight 0 and bias -0.3
    std::stringstream ss(
        "network\n"
        "0\n"
        "1 0 1\n"
        "GANDI-NET v1\n"
        "1 1\n"
        "linear\n"
        "0\n"
        "-0.3\n");
    auto model = ImportanceModel::load(ss);
    CHECK(model.weight({}, {0.5}) == 0.0);
}

TEST_CASE("fit rejects empty sets and mismatched dimensions") {
    std::vector<LabeledSample> some = {sample1d(0.5, SampleLabel::on_target)};
    CHECK_THROWS_AS((void)ImportanceModel::fit_tabular({}, some, kUnitBox),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)ImportanceModel::fit_tabular(some, {}, kUnitBox),
                    std::invalid_argument);
    std::vector<LabeledSample> bad = {{{1.0}, {0.5}, SampleLabel::off_target}};
    CHECK_THROWS_AS((void)ImportanceModel::fit_tabular(some, bad, kUnitBox),
                    std::invalid_argument);
}

TEST_CASE("tabular backend equals the independent per-bin oracle on random data") {
    Rng rng(900);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t bins = 4 + rng.uniform_index(8);
        std::vector<LabeledSample> on, off;
        std::map<int, std::pair<int, int>> oracle; // bin -> (n_p, n_q)
        const std::size_t n = 50 + rng.uniform_index(100);
        for (std::size_t i = 0; i < n; ++i) {
            const int bin = static_cast<int>(rng.uniform_index(bins));
            const double a = (static_cast<double>(bin) + 0.5) / static_cast<double>(bins);
            if (rng.uniform() < 0.3) {
                on.push_back(sample1d(a, SampleLabel::on_target));
                oracle[bin].first += 1;
            } else {
                off.push_back(sample1d(a, SampleLabel::off_target));
                oracle[bin].second += 1;
            }
        }
        if (on.empty() || off.empty()) continue;
        auto model = ImportanceModel::fit_tabular(on, off, kUnitBox, bins);
        for (const auto& [bin, counts] : oracle) {
            const double a = (static_cast<double>(bin) + 0.5) / static_cast<double>(bins);
            const double expected =
                counts.second > 0 ? static_cast<double>(counts.first) / counts.second : 0.0;
            CHECK(model.weight({}, {a}) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("network backend learns to separate on- from off-target regions") {
    // p concentrated near 0.2, q spread over [0,1]
    Rng rng(901);
    std::vector<LabeledSample> on, off;
    for (int i = 0; i < 150; ++i)
        on.push_back(sample1d(0.15 + 0.1 * rng.uniform(), SampleLabel::on_target));
    for (int i = 0; i < 400; ++i)
        off.push_back(sample1d(rng.uniform(), SampleLabel::off_target));
    ImportanceFitConfig cfg;
    cfg.action_box = kUnitBox;
    cfg.max_epochs = 80;
    cfg.hidden = {16, 16};
    auto model = ImportanceModel::fit_network(on, off, cfg, rng);
    CHECK(model.weight({}, {0.2}) > model.weight({}, {0.8}));
    CHECK(model.weight({}, {0.2}) > 0.5);
    // training objective does not increase overall
    const auto& curve = model.training_curve();
    REQUIRE(curve.size() > 1);
    CHECK(curve.back() <= curve.front());
    // weights are never negative
    for (double a = 0.0; a <= 1.0; a += 0.05) CHECK(model.weight({}, {a}) >= 0.0);
}

TEST_CASE("importance model serialization round-trips both backends") {
    Rng rng(902);
    std::vector<LabeledSample> on = {sample1d(0.3, SampleLabel::on_target),
                                     sample1d(0.4, SampleLabel::on_target)};
    std::vector<LabeledSample> off = {sample1d(0.3, SampleLabel::off_target),
                                      sample1d(0.8, SampleLabel::off_target)};
    SUBCASE("tabular") {
        auto model = ImportanceModel::fit_tabular(on, off, kUnitBox, 10);
        std::stringstream ss;
        model.save(ss);
        auto loaded = ImportanceModel::load(ss);
        for (double a = 0.0; a <= 1.0; a += 0.01)
            CHECK(loaded.weight({}, {a}) == model.weight({}, {a}));
    }
    SUBCASE("network") {
        ImportanceFitConfig cfg;
        cfg.action_box = kUnitBox;
        cfg.max_epochs = 3;
        cfg.hidden = {8};
        auto model = ImportanceModel::fit_network(on, off, cfg, rng);
        std::stringstream ss;
        model.save(ss);
        auto loaded = ImportanceModel::load(ss);
        for (double a = 0.0; a <= 1.0; a += 0.01)
            CHECK(loaded.weight({}, {a}) == model.weight({}, {a}));
    }
}
