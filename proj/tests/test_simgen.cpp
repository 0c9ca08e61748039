#include <doctest.h>

#include <cmath>

#include "medpath/core_model.hpp"
#include "medpath/rng.hpp"
#include "medpath/simgen.hpp"

using namespace medpath;

TEST_CASE("counter rng: reproducible, order-independent streams") {
    CounterRng a(42, 1), b(42, 1);
    for (int i = 0; i < 100; ++i) CHECK(a.next_word() == b.next_word());

    CounterRng c(42, 1);
    CHECK(c.word_at(57) == a.word_at(57));
    CHECK(CounterRng(42, 1).word_at(0) != CounterRng(42, 2).word_at(0));
    CHECK(CounterRng(42, 1).word_at(0) != CounterRng(43, 1).word_at(0));
}

TEST_CASE("normal quantile hits standard reference points") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.84134474606854293) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-9));
}

TEST_CASE("default scenario layout: counts and types") {
    Scenario sc;
    sc.seed = 3;
    const auto [data, truth] = generate(sc);
    CHECK(data.n() == 50);
    CHECK(data.p() == 200);

    int alpha_nonzero = 0, beta_nonzero = 0, type1 = 0, type2 = 0, type3 = 0, type4 = 0;
    for (Index i = 0; i < 200; ++i) {
        alpha_nonzero += truth.params.alpha[i] != 0.0 ? 1 : 0;
        beta_nonzero += truth.params.beta[i] != 0.0 ? 1 : 0;
        switch (truth.mediator_type[static_cast<std::size_t>(i)]) {
            case MediatorType::Type1: ++type1; break;
            case MediatorType::Type2: ++type2; break;
            case MediatorType::Type3: ++type3; break;
            default: ++type4; break;
        }
    }
    CHECK(alpha_nonzero == 40);
    CHECK(beta_nonzero == 40);
    CHECK(type1 == 20);
    CHECK(type2 == 20);
    CHECK(type3 == 20);
    CHECK(type4 == 140);

    // type definitions line up with the supports
    for (Index i = 0; i < 200; ++i) {
        const bool a = truth.params.alpha[i] != 0.0, b = truth.params.beta[i] != 0.0;
        const MediatorType t = truth.mediator_type[static_cast<std::size_t>(i)];
        if (a && b) CHECK(t == MediatorType::Type1);
        if (!a && b) CHECK(t == MediatorType::Type2);
        if (a && !b) CHECK(t == MediatorType::Type3);
        if (!a && !b) CHECK(t == MediatorType::Type4);
    }
}

TEST_CASE("expected tie of the default scenario is 520") {
    Scenario sc;
    CHECK(expected_tie(sc) == doctest::Approx(10 * 36.0 + 10 * 16.0));
    // realized draws are near the expectation (tier sd is 0.1)
    sc.seed = 8;
    const auto [data, truth] = generate(sc);
    CHECK(truth.effects.tie > 480.0);
    CHECK(truth.effects.tie < 560.0);
    CHECK(truth.effects.te == truth.effects.de + truth.effects.tie);
}

TEST_CASE("same seed gives bit-identical output, different seeds differ") {
    Scenario sc;
    sc.p = 40;
    sc.n = 30;
    sc.seed = 99;
    const auto [d1, t1] = generate(sc);
    const auto [d2, t2] = generate(sc);
    CHECK(d1.x == d2.x);
    CHECK(d1.m == d2.m);
    CHECK(d1.y == d2.y);
    CHECK(t1.params.alpha == t2.params.alpha);
    CHECK(t1.outcome_noise == t2.outcome_noise);

    sc.seed = 100;
    const auto [d3, t3] = generate(sc);
    CHECK(d1.y != d3.y);
}

TEST_CASE("y is exactly reproducible from params plus stored noise") {
    Scenario sc;
    sc.p = 60;
    sc.seed = 21;
    const auto [data, truth] = generate(sc);
    const Vec rebuilt =
        data.x * truth.params.gamma + data.m * truth.params.beta + truth.outcome_noise;
    CHECK((rebuilt - data.y).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("exposure is Bernoulli(0.5) in {0,1}") {
    Scenario sc;
    sc.n = 3000;
    sc.p = 2;
    sc.frac_alpha_nonzero = 1.0;
    sc.beta_pattern = {0.5, 0.5, 0.0, 0.0};
    sc.large_signal.fraction = 0.25;
    sc.small_signal.fraction = 0.25;
    sc.seed = 5;
    const auto [data, truth] = generate(sc);
    double ones = 0.0;
    for (Index j = 0; j < data.n(); ++j) {
        CHECK((data.x[j] == 0.0 || data.x[j] == 1.0));
        ones += data.x[j];
    }
    CHECK(ones / static_cast<double>(data.n()) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("mediator noise matches the compound-symmetry covariance") {
    // alpha = 0 everywhere so m is pure noise; estimate moments over many rows
    Scenario sc;
    sc.n = 10000;
    sc.p = 6;
    sc.gamma_true = 0.0;
    sc.frac_alpha_nonzero = 0.0;
    sc.beta_pattern = {0.0, 0.0, 0.0, 1.0};
    sc.large_signal.fraction = 0.0;
    sc.small_signal.fraction = 0.0;
    sc.seed = 31;
    const auto [data, truth] = generate(sc);

    for (Index i = 0; i < sc.p; ++i) {
        const auto col = data.m.col(i);
        const double var = (col.array() - col.mean()).square().sum() / (col.size() - 1);
        CHECK(var == doctest::Approx(1.0).epsilon(0.05));
    }
    for (Index i = 0; i < sc.p; ++i)
        for (Index j = i + 1; j < sc.p; ++j) {
            const auto a = data.m.col(i), b = data.m.col(j);
            const double cov =
                ((a.array() - a.mean()) * (b.array() - b.mean())).sum() / (a.size() - 1);
            CHECK(std::abs(cov - 0.1) < 0.03);
        }
}

TEST_CASE("de sweep fixes the expected tie at 320") {
    Scenario base;
    const std::vector<Scenario> sweep = de_sweep_scenarios(base);
    REQUIRE(sweep.size() == 10);
    CHECK(sweep.front().gamma_true == 36.0);
    CHECK(sweep.back().gamma_true == 6080.0);

    const double first_prop = 320.0 / (320.0 + sweep.front().gamma_true);
    const double last_prop = 320.0 / (320.0 + sweep.back().gamma_true);
    CHECK(first_prop == doctest::Approx(0.899).epsilon(1e-3));
    CHECK(last_prop == doctest::Approx(0.05));

    for (const Scenario& sc : sweep) {
        CHECK(expected_tie(sc) == doctest::Approx(320.0).epsilon(1e-12));
        Scenario seeded = sc;
        seeded.seed = 77;
        const auto [data, truth] = generate(seeded);
        CHECK(truth.effects.tie == doctest::Approx(320.0).epsilon(0.15));
        CHECK(truth.effects.de == sc.gamma_true);
    }

    Scenario wrong;
    wrong.p = 100;
    CHECK_THROWS_AS(de_sweep_scenarios(wrong), ContractError);
}

TEST_CASE("non-divisible p rounds half up and absorbs the remainder") {
    Scenario sc;
    sc.p = 30;
    sc.seed = 12;
    const auto [data, truth] = generate(sc);
    int type1 = 0, type2 = 0, type3 = 0;
    for (MediatorType t : truth.mediator_type) {
        type1 += t == MediatorType::Type1 ? 1 : 0;
        type2 += t == MediatorType::Type2 ? 1 : 0;
        type3 += t == MediatorType::Type3 ? 1 : 0;
    }
    CHECK(type1 == 3);
    CHECK(type2 == 3);
    CHECK(type3 == 3);
}

TEST_CASE("scenario validation") {
    Scenario bad;
    bad.beta_pattern = {0.1, 0.1, 0.1, 0.6};  // sums to 0.9
    CHECK_THROWS_AS(bad.validate(), ContractError);

    Scenario mismatch;
    mismatch.frac_alpha_nonzero = 0.3;  // != 0.1 + 0.1
    CHECK_THROWS_AS(mismatch.validate(), ContractError);

    Scenario badrho;
    badrho.mediator_rho = 1.5;
    CHECK_THROWS_AS(badrho.validate(), ContractError);
}
