#include "doctest.h"

#include <cmath>
#include <sstream>

#include "gandi/adversarial.hpp"

using namespace gandi;

namespace {

// 1-input discriminator producing a constant score regardless of input
Discriminator constant_discriminator(double score) {
    Discriminator d;
    d.action_dim = 1;
    d.net = DenseNet({1, 1}, {Activation::sigmoid});
    d.net.biases()[0][0] = std::log(score / (1.0 - score));
    return d;
}

// 1-input discriminator scoring 0.2 at action 0 and 0.9 at action 1
Discriminator ramp_discriminator() {
    Discriminator d;
    d.action_dim = 1;
    d.net = DenseNet({1, 1}, {Activation::sigmoid});
    d.net.weights()[0].data[0] = std::log(36.0); // logit(0.9) - logit(0.2)
    d.net.biases()[0][0] = -std::log(4.0);       // logit(0.2)
    return d;
}

std::string serialized(const DenseNet& net) {
    std::stringstream ss;
    save_model(net, ss);
    return ss.str();
}

} // namespace

TEST_CASE("discriminator loss") {
    SUBCASE("indifferent discriminator on one pair gives 2 ln 2") {
        auto d = constant_discriminator(0.5);
        CHECK(discriminator_loss(d, {}, {{0.3}}, {{0.8}}) ==
              doctest::Approx(2.0 * std::log(2.0)));
    }
    SUBCASE("confident correct discriminator drives the loss toward zero") {
        auto d = constant_discriminator(0.5);
        // push the score toward 1 on real input 1 and toward 0 on fake input 0
        d.net.weights()[0].data[0] = 60.0;
        d.net.biases()[0][0] = -30.0;
        CHECK(discriminator_loss(d, {}, {{1.0}}, {{0.0}}) < 1e-10);
    }
    SUBCASE("scores 0.9 and 0.2 on one pair") {
        auto d = ramp_discriminator();
        CHECK(d.net.forward(std::vector<double>{1.0})[0] == doctest::Approx(0.9));
        CHECK(d.net.forward(std::vector<double>{0.0})[0] == doctest::Approx(0.2));
        CHECK(discriminator_loss(d, {}, {{1.0}}, {{0.0}}) ==
              doctest::Approx(-(std::log(0.9) + std::log(0.8))));
    }
    SUBCASE("count mismatch and empty batches rejected") {
        auto d = constant_discriminator(0.5);
        CHECK_THROWS_AS((void)discriminator_loss(d, {}, {{1.0}}, {{0.0}, {0.1}}),
                        std::invalid_argument);
        CHECK_THROWS_AS((void)discriminator_loss(d, {}, {}, {}), std::invalid_argument);
    }
}

TEST_CASE("generator loss") {
    CHECK(generator_loss(constant_discriminator(0.5), {}, {{0.0}}) ==
          doctest::Approx(std::log(2.0)));
    CHECK(generator_loss(constant_discriminator(0.25), {}, {{0.0}, {1.0}}) ==
          doctest::Approx(std::log(4.0)));
    CHECK(generator_loss(constant_discriminator(1.0 - 1e-12), {}, {{0.0}}) ==
          doctest::Approx(0.0));
    CHECK_THROWS_AS((void)generator_loss(constant_discriminator(0.5), {}, {}),
                    std::invalid_argument);
}

TEST_CASE("weighted discriminator loss") {
    auto d = ramp_discriminator();
    const std::vector<std::vector<double>> off = {{0.0}, {1.0}};
    const std::vector<std::vector<double>> fakes = {{0.5}, {0.25}};

    SUBCASE("unit weights reduce to the plain loss") {
        CHECK(weighted_discriminator_loss(d, {}, off, {1.0, 1.0}, fakes) ==
              doctest::Approx(discriminator_loss(d, {}, off, fakes)));
    }
    SUBCASE("zero weights leave only the fake term") {
        const double fake_only = weighted_discriminator_loss(d, {}, off, {0.0, 0.0}, fakes);
        double expected = 0.0;
        for (const auto& f : fakes)
            expected -= std::log(1.0 - d.net.forward(f)[0]);
        CHECK(fake_only == doctest::Approx(expected / 2.0));
    }
    SUBCASE("weights act linearly: (2,0) equals duplicating the first sample") {
        const double a = weighted_discriminator_loss(d, {}, off, {2.0, 0.0}, fakes);
        const double b =
            weighted_discriminator_loss(d, {}, {{0.0}, {0.0}}, {1.0, 1.0}, fakes);
        CHECK(a == doctest::Approx(b));
    }
    SUBCASE("negative weights rejected") {
        CHECK_THROWS_AS(
            (void)weighted_discriminator_loss(d, {}, off, {-1.0, 1.0}, fakes),
            std::invalid_argument);
    }
}

TEST_CASE("bootstrap expectation of the plain loss matches the weighted loss") {
    // real term under bootstrapping: E[-log D(a_I)] with I ~ p_w equals the
    // weighted sum (1/sum w) * sum w_i * (-log D(a_i)); so n_q * E equals the
    // weighted loss's real term up to the constant sum(w)/n_q
    auto d = ramp_discriminator();
    const std::vector<LabeledSample> data = {{{}, {0.0}, SampleLabel::off_target},
                                             {{}, {1.0}, SampleLabel::off_target},
                                             {{}, {0.5}, SampleLabel::off_target}};
    const std::vector<double> w = {0.5, 1.5, 1.0};
    auto plan = build_plan(data, w);
    double expectation = 0.0; // exact, no sampling
    for (std::size_t i = 0; i < data.size(); ++i)
        expectation -= plan.probabilities[i] * std::log(d.net.forward(data[i].action)[0]);
    double weighted_real_term = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        weighted_real_term -= w[i] * std::log(d.net.forward(data[i].action)[0]);
    weighted_real_term /= static_cast<double>(data.size());
    const double c = plan.effective_sample_size / static_cast<double>(data.size());
    CHECK(c * expectation == doctest::Approx(weighted_real_term).epsilon(1e-12));
}

TEST_CASE("optimal discriminator value") {
    CHECK(optimal_discriminator_value(0.3, 0.3) == doctest::Approx(0.5));
    CHECK(optimal_discriminator_value(0.6, 0.2) == doctest::Approx(0.75));
    CHECK(optimal_discriminator_value(0.4, 0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)optimal_discriminator_value(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)optimal_discriminator_value(-0.1, 0.2), std::invalid_argument);
}

TEST_CASE("sample_action rescales, clamps, and reproduces under a fixed seed") {
    Generator g;
    g.noise_dim = 4;
    g.context_dim = 0;
    g.action_box = {{0.0}, {2.0}};
    g.net = DenseNet({4, 1}, {Activation::linear}); // zero weights: raw output 0

    SUBCASE("raw 0 lands at the box center") {
        Rng rng(1);
        bool clamped = true;
        const auto a = sample_action(g, {}, rng, &clamped);
        CHECK(a[0] == doctest::Approx(1.0));
        CHECK_FALSE(clamped);
    }
    SUBCASE("raw outputs beyond [-1,1] clamp to the box edge") {
        g.net.biases()[0][0] = 5.0;
        Rng rng(1);
        bool clamped = false;
        const auto a = sample_action(g, {}, rng, &clamped);
        CHECK(a[0] == doctest::Approx(2.0));
        CHECK(clamped);
    }
    SUBCASE("fixed seed gives identical draws") {
        Rng init(7);
        g.net = DenseNet::random({4, 8, 1}, {Activation::relu, Activation::linear}, init);
        Rng a(99), b(99);
        CHECK(sample_action(g, {}, a) == sample_action(g, {}, b));
    }
    SUBCASE("10000 samples all inside the box") {
        Rng init(8);
        g.net = DenseNet::random({4, 8, 1}, {Activation::relu, Activation::linear}, init);
        // inflate weights so raw outputs regularly leave [-1,1]
        for (auto& W : g.net.weights())
            for (auto& v : W.data) v *= 10.0;
        Rng rng(9);
        for (int i = 0; i < 10000; ++i) {
            const auto a = sample_action(g, {}, rng);
            CHECK(g.action_box.contains(a));
        }
    }
}

TEST_CASE("train_gan input validation") {
    const BoxBounds action_box{{0.0, 0.0}, {2.0, 2.0}};
    std::vector<LabeledSample> tiny(5, {{}, {1.0, 1.0}, SampleLabel::on_target});
    TrainConfig cfg;
    Rng rng(10);
    CHECK_THROWS_AS((void)train_gan(tiny, {}, action_box, cfg, rng), std::invalid_argument);
    cfg.batch_size = 1;
    CHECK_THROWS_AS((void)train_gan(tiny, {}, action_box, cfg, rng), std::invalid_argument);
}

TEST_CASE("zero epochs return the untouched initialization") {
    const BoxBounds action_box{{0.0, 0.0}, {2.0, 2.0}};
    Rng data_rng(11);
    std::vector<LabeledSample> data;
    for (int i = 0; i < 64; ++i)
        data.push_back({{}, {data_rng.uniform(0.0, 2.0), data_rng.uniform(0.0, 2.0)},
                        SampleLabel::on_target});
    TrainConfig cfg;
    cfg.max_epochs = 0;
    Rng rng(12);
    auto result = train_gan(data, {}, action_box, cfg, rng);
    Rng replay(12);
    auto init = detail::make_generator(0, {}, action_box, cfg, replay);
    CHECK(serialized(result.generator.net) == serialized(init.net));
    CHECK(result.curve.empty());
    REQUIRE(result.checkpoints.size() == 1);
    CHECK(result.checkpoints[0].first == 0);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const BoxBounds action_box{{0.0, 0.0}, {2.0, 2.0}};
    Rng data_rng(13);
    std::vector<LabeledSample> data;
    for (int i = 0; i < 96; ++i)
        data.push_back({{}, {data_rng.uniform(0.0, 2.0), data_rng.uniform(0.0, 2.0)},
                        SampleLabel::on_target});
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.g_hidden = {8};
    cfg.d_hidden = {8};
    Rng a(14), b(14);
    auto ra = train_gan(data, {}, action_box, cfg, a);
    auto rb = train_gan(data, {}, action_box, cfg, b);
    CHECK(serialized(ra.generator.net) == serialized(rb.generator.net));
    CHECK(serialized(ra.discriminator.net) == serialized(rb.discriminator.net));
    REQUIRE(ra.curve.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(ra.curve[i].d_loss == rb.curve[i].d_loss);
        CHECK(ra.curve[i].g_loss == rb.curve[i].g_loss);
    }
}

TEST_CASE("checkpoint cadence") {
    const BoxBounds action_box{{0.0}, {1.0}};
    Rng data_rng(15);
    std::vector<LabeledSample> data;
    for (int i = 0; i < 64; ++i)
        data.push_back({{}, {data_rng.uniform()}, SampleLabel::on_target});
    TrainConfig cfg;
    cfg.max_epochs = 7;
    cfg.checkpoint_every = 3;
    cfg.g_hidden = {4};
    cfg.d_hidden = {4};
    Rng rng(16);
    auto result = train_gan(data, {}, action_box, cfg, rng);
    REQUIRE(result.checkpoints.size() == 3);
    CHECK(result.checkpoints[0].first == 3);
    CHECK(result.checkpoints[1].first == 6);
    CHECK(result.checkpoints[2].first == 7); // final epoch always captured
}

TEST_CASE("training recovers a unimodal gaussian's mean") {
    const BoxBounds action_box{{0.0, 0.0}, {2.0, 2.0}};
    Rng data_rng(17);
    std::vector<LabeledSample> data;
    for (int i = 0; i < 500; ++i)
        data.push_back({{},
                        {1.0 + 0.1 * data_rng.normal(), 1.0 + 0.1 * data_rng.normal()},
                        SampleLabel::on_target});
    TrainConfig cfg; // defaults: 500 epochs, lr 0.001, batch 32
    Rng rng(18);
    auto result = train_gan(data, {}, action_box, cfg, rng);
    double mx = 0.0, my = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const auto a = sample_action(result.generator, {}, rng);
        mx += a[0];
        my += a[1];
    }
    CHECK(std::abs(mx / n - 1.0) < 0.15);
    CHECK(std::abs(my / n - 1.0) < 0.15);
    CHECK(result.clamp_rate < 0.2);
    CHECK(result.curve.size() == cfg.max_epochs);
}

TEST_CASE("full pipeline basics") {
    GandiConfig cfg;
    cfg.train.max_epochs = 5;
    cfg.train.g_hidden = {8};
    cfg.train.d_hidden = {8};
    cfg.importance.max_epochs = 10;
    cfg.importance.hidden = {8};
    cfg.importance.action_box = {{0.0}, {1.0}};
    Rng rng(19);

    SUBCASE("empty on-target set rejected") {
        std::vector<LabeledSample> off(40, {{}, {0.5}, SampleLabel::off_target});
        CHECK_THROWS_AS((void)gandi::gandi({}, off, cfg, rng), std::invalid_argument);
        CHECK_THROWS_AS((void)gandi::gandi(off, {}, cfg, rng), std::invalid_argument);
    }

    SUBCASE("matched distributions give near-uniform bootstrap probabilities") {
        std::vector<LabeledSample> on, off;
        for (int i = 0; i < 60; ++i)
            on.push_back({{}, {rng.uniform()}, SampleLabel::on_target});
        for (int i = 0; i < 120; ++i)
            off.push_back({{}, {rng.uniform()}, SampleLabel::off_target});
        auto result = gandi::gandi(on, off, cfg, rng);
        CHECK(result.plan.source.size() == on.size() + off.size());
        CHECK(result.bootstrapped.size() == result.plan.source.size());
        // with p = q the fitted weights should be roughly flat: no sample may
        // soak up a disproportionate share of the bootstrap mass
        const double uniform = 1.0 / static_cast<double>(result.plan.source.size());
        for (double p : result.plan.probabilities) CHECK(p < 8.0 * uniform);
        Rng sampler(20);
        for (int i = 0; i < 200; ++i) {
            const auto a = sample_action(result.gan.generator, {}, sampler);
            CHECK(cfg.importance.action_box.contains(a));
        }
    }
}
