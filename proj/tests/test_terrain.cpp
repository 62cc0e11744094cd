#include <catch_amalgamated.hpp>

#include <cmath>

#include "topnav/rng.hpp"
#include "topnav/terrain.hpp"

using namespace topnav;

namespace {

TerrainClassModel known_model(int n_classes, double noise_sigma, int K = 8,
                              uint64_t seed = 0xFACE) {
    TerrainClassModel m;
    m.class_prototypes = make_prototypes(n_classes + 2, 16, seed);
    m.class_prototypes.resize(static_cast<size_t>(n_classes));
    for (int i = 0; i < n_classes; ++i) m.class_names.push_back("c" + std::to_string(i));
    m.noise_sigma = noise_sigma;
    m.K = K;
    return m;
}

}  // namespace

TEST_CASE("prototypes are orthonormal and deterministic") {
    const auto protos = make_prototypes(8, 16, 1234);
    REQUIRE(protos.size() == 8);
    for (size_t i = 0; i < protos.size(); ++i) {
        CHECK(feature_norm(protos[i]) == Catch::Approx(1.0).margin(1e-9));
        for (size_t j = 0; j < i; ++j)
            CHECK(std::abs(dot(protos[i], protos[j])) < 1e-9);
    }
    CHECK(make_prototypes(8, 16, 1234) == protos);
    CHECK_THROWS_AS(make_prototypes(17, 16, 1), std::invalid_argument);
}

TEST_CASE("classify_patch on clean prototypes") {
    TerrainClassModel m = known_model(5, /*noise_sigma=*/0.0);
    Rng rng(1);

    SECTION("noiseless known class is near one-hot with tiny entropy") {
        const TerrainPrediction p = classify_patch(m.class_prototypes[2], m, rng);
        CHECK(p.label == 2);
        CHECK(p.probs[2] > 0.999);
        CHECK(p.entropy < 1e-2);
        CHECK(p.confidence > 0.99);
    }
    SECTION("equidistant observation splits two classes evenly") {
        TerrainClassModel two = known_model(2, 0.0);
        Feature mid(16, 0.0);
        for (int i = 0; i < 16; ++i)
            mid[static_cast<size_t>(i)] =
                two.class_prototypes[0][static_cast<size_t>(i)] +
                two.class_prototypes[1][static_cast<size_t>(i)];
        const TerrainPrediction p = classify_patch(unit_normalized(mid), two, rng);
        CHECK(p.probs[0] == Catch::Approx(0.5).margin(1e-12));
        CHECK(p.probs[1] == Catch::Approx(0.5).margin(1e-12));
        CHECK(p.entropy == Catch::Approx(std::log(2.0)).margin(1e-12));
        CHECK(p.confidence == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("dimension mismatch is rejected") {
        CHECK_THROWS_AS(classify_patch(Feature(4, 1.0), m, rng), std::invalid_argument);
        CHECK_THROWS_AS(classify_patch(Feature{}, m, rng), std::invalid_argument);
    }
}

TEST_CASE("classification is deterministic under a fixed seed") {
    const TerrainClassModel m = known_model(5, 0.05);
    Rng feature_rng(9);
    Feature obs = m.class_prototypes[1];
    for (double& v : obs) v += feature_rng.normal(0.0, 0.05);
    obs = unit_normalized(obs);

    Rng a(42), b(42);
    const TerrainPrediction pa = classify_patch(obs, m, a);
    const TerrainPrediction pb = classify_patch(obs, m, b);
    CHECK(pa.probs == pb.probs);
    CHECK(pa.label == pb.label);
    CHECK(pa.entropy == pb.entropy);
    CHECK(pa.latent == pb.latent);
}

TEST_CASE("probability and entropy invariants over random observations") {
    const TerrainClassModel m = known_model(5, 0.08);
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        Feature obs(16);
        for (double& v : obs) v = rng.normal();
        const TerrainPrediction p = classify_patch(unit_normalized(obs), m, rng);
        double sum = 0.0;
        for (double q : p.probs) {
            REQUIRE(q >= 0.0);
            sum += q;
        }
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
        REQUIRE(p.entropy >= 0.0);
        REQUIRE(p.entropy <= std::log(5.0) + 1e-12);
        REQUIRE(p.probs[static_cast<size_t>(p.label)] ==
                Catch::Approx(*std::max_element(p.probs.begin(), p.probs.end())));
        REQUIRE(feature_norm(p.latent) == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("argmax label is invariant to a uniform softmax temperature (K=1)") {
    Rng rng(55);
    for (int i = 0; i < 50; ++i) {
        TerrainClassModel cold = known_model(5, 0.0, /*K=*/1);
        TerrainClassModel hot = cold;
        cold.softmax_temperature = 0.05;
        hot.softmax_temperature = 0.9;
        Feature obs(16);
        for (double& v : obs) v = rng.normal();
        obs = unit_normalized(obs);
        Rng ra(i), rb(i);
        REQUIRE(classify_patch(obs, cold, ra).label == classify_patch(obs, hot, rb).label);
    }
}

TEST_CASE("confidence normalization") {
    CHECK(confidence(0.0, 5) == 1.0);
    CHECK(confidence(std::log(5.0), 5) == Catch::Approx(0.0).margin(1e-12));
    CHECK(confidence(std::log(2.0) / 2.0, 2) == Catch::Approx(0.5).margin(1e-12));
    CHECK_THROWS_AS(confidence(0.0, 1), std::invalid_argument);
}

TEST_CASE("experience retrieval by cosine similarity") {
    const auto protos = make_prototypes(6, 16, 7);
    std::deque<ExperienceRecord> buffer;

    SECTION("empty buffer yields no result") {
        CHECK_FALSE(retrieve(buffer, protos[0]).has_value());
    }
    SECTION("exact and orthogonal queries") {
        buffer.push_back({{1.0, 1.0}, 0.8, protos[0]});
        const auto hit = retrieve(buffer, protos[0]);
        REQUIRE(hit.has_value());
        CHECK(hit->similarity == Catch::Approx(1.0).margin(1e-12));
        CHECK(hit->record.t_p == 0.8);
        CHECK(retrieve(buffer, protos[1])->similarity == Catch::Approx(0.0).margin(1e-9));
    }
    SECTION("matches an exhaustive scan on random buffers") {
        Rng rng(13);
        for (int i = 0; i < 50; ++i) {
            Feature f(16);
            for (double& v : f) v = rng.normal();
            buffer.push_back({{rng.uniform(), rng.uniform()}, rng.uniform(),
                              unit_normalized(f)});
        }
        for (int q = 0; q < 20; ++q) {
            Feature query(16);
            for (double& v : query) v = rng.normal();
            query = unit_normalized(query);
            const auto hit = retrieve(buffer, query);
            double best = -2.0;
            size_t best_i = 0;
            for (size_t i = 0; i < buffer.size(); ++i) {
                const double s = dot(query, buffer[i].latent);
                if (s > best) {
                    best = s;
                    best_i = i;
                }
            }
            REQUIRE(hit->similarity == Catch::Approx(best).margin(1e-12));
            REQUIRE(hit->record.t_p == buffer[best_i].t_p);
        }
    }
}

TEST_CASE("corrected and blended costs") {
    const TerrainCorrectionConfig cfg;

    CHECK(corrected_cost(1.0, 0.85, cfg) == Catch::Approx(0.5).margin(1e-12));
    CHECK(corrected_cost(0.7, 0.85, cfg) == Catch::Approx(0.35).margin(1e-12));
    CHECK(corrected_cost(1.0, 1.0, cfg) ==
          Catch::Approx(1.0 / (1.0 + std::exp(-2.25))).epsilon(1e-9));
    CHECK(corrected_cost(1.0, 0.5, cfg) ==
          Catch::Approx(1.0 / (1.0 + std::exp(5.25))).epsilon(1e-6));

    CHECK(blended_cost(0.8, 0.2, 0.9, cfg) == Catch::Approx(0.5).margin(1e-12));
    const double s2 = 1.0 / (1.0 + std::exp(-2.0));
    CHECK(blended_cost(1.0, 0.0, 1.0, cfg) == Catch::Approx(s2).epsilon(1e-9));
    CHECK(blended_cost(0.3, 0.9, 0.0, cfg) == Catch::Approx(0.9).margin(1e-6));

    SECTION("monotonicity in similarity, history and confidence") {
        Rng rng(3);
        for (int i = 0; i < 200; ++i) {
            const double s = rng.uniform(-1.0, 1.0), ds = rng.uniform(1e-6, 0.5);
            const double tp = rng.uniform(0.0, 1.0);
            REQUIRE(corrected_cost(tp, s, cfg) <= corrected_cost(tp, std::min(1.0, s + ds), cfg));
            REQUIRE(corrected_cost(tp, s, cfg) >= 0.0);
            REQUIRE(corrected_cost(tp, s, cfg) <= tp);
            const double c = rng.uniform(0.0, 1.0), dc = rng.uniform(1e-6, 0.3);
            const double m_to = rng.uniform(0.0, 1.0), m_tp = rng.uniform(0.0, 1.0);
            const double lo = blended_cost(m_to, m_tp, c, cfg);
            const double hi = blended_cost(m_to, m_tp, std::min(1.0, c + dc), cfg);
            if (m_to >= m_tp) REQUIRE(lo <= hi + 1e-15);
            else REQUIRE(lo >= hi - 1e-15);
        }
    }
}

TEST_CASE("experience buffer dedupe and eviction") {
    TerrainCorrectionConfig cfg;
    cfg.buffer_capacity = 3;
    const auto protos = make_prototypes(5, 16, 77);
    std::deque<ExperienceRecord> buffer;

    update_experience(buffer, {1.0, 1.0}, 0.5, protos[0], cfg);
    CHECK(buffer.size() == 1);

    // Same patch (within patch_size_m) replaces in place with latest values.
    update_experience(buffer, {1.1, 1.0}, 0.9, protos[1], cfg);
    REQUIRE(buffer.size() == 1);
    CHECK(buffer[0].t_p == 0.9);
    CHECK(dot(buffer[0].latent, protos[1]) == Catch::Approx(1.0).margin(1e-12));

    update_experience(buffer, {2.0, 2.0}, 0.1, protos[2], cfg);
    update_experience(buffer, {3.0, 3.0}, 0.2, protos[3], cfg);
    update_experience(buffer, {4.0, 4.0}, 0.3, protos[4], cfg);  // evicts the oldest
    REQUIRE(buffer.size() == 3);
    CHECK(buffer[0].t_p == 0.1);

    CHECK_THROWS_AS(update_experience(buffer, {0, 0}, 1.5, protos[0], cfg),
                    std::invalid_argument);
}

TEST_CASE("terrain cost map composition") {
    const GridSpec spec = GridSpec::sim_profile();
    const Pose robot{{2.5, 2.5}, 0.0};
    TerrainCorrectionConfig cfg;
    cfg.prior_costs = {{"c0", 0.0}, {"c1", 0.75}};

    SECTION("known zero-cost class with no noise gives a zero grid") {
        TerrainEstimator est(known_model(2, 0.0), cfg);
        Rng rng(5);
        const CostGrid g = est.terrain_cost_map(
            robot, spec, [&](const Vec2&) { return est.model().class_prototypes[0]; }, rng);
        for (double v : g.values) CHECK(v == Catch::Approx(0.0).margin(1e-9));
    }
    SECTION("uncovered patches keep cost zero") {
        TerrainEstimator est(known_model(2, 0.0), cfg);
        Rng rng(5);
        const CostGrid g = est.terrain_cost_map(
            robot, spec,
            [&](const Vec2& pc) -> std::optional<Feature> {
                if (pc.x < robot.position.x) return std::nullopt;  // behind: not covered
                return est.model().class_prototypes[1];
            },
            rng);
        bool saw_cost = false, saw_zero = false;
        for (int x = 0; x < spec.width_cells; ++x)
            for (int y = 0; y < spec.height_cells; ++y) {
                if (g.at(x, y) > 0.0) saw_cost = true;
                if (g.at(x, y) == 0.0) saw_zero = true;
            }
        CHECK(saw_cost);
        CHECK(saw_zero);
    }
    SECTION("confident known class carries the sigmoid-weighted prior") {
        TerrainEstimator est(known_model(2, 0.0), cfg);
        Rng rng(5);
        const CostGrid g = est.terrain_cost_map(
            robot, spec, [&](const Vec2&) { return est.model().class_prototypes[1]; }, rng);
        const double expected = blended_cost(0.75, 0.0, 1.0, cfg);  // empty buffer
        for (double v : g.values) CHECK(v == Catch::Approx(expected).margin(1e-6));
        CHECK(expected > 0.6);
    }
    SECTION("novel class recalled from experience raises the cost above 0.8") {
        // Classifier knows two classes; the world shows a third one.
        TerrainClassModel model = known_model(2, 0.02);
        const auto all = make_prototypes(4, 16, 0xFACE);
        const Feature novel = all[3];
        TerrainEstimator est(model, cfg);
        Rng rng(5);
        Rng noise(6);
        const auto sense_novel = [&](const Vec2&) -> std::optional<Feature> {
            Feature f = novel;
            for (double& v : f) v += noise.normal(0.0, 0.02);
            return unit_normalized(f);
        };
        // First pass: observe the novel terrain, then record harsh proprioception.
        (void)est.terrain_cost_map(robot, spec, sense_novel, rng);
        REQUIRE(est.record_experience(robot.position, 0.9));
        REQUIRE(est.buffer().size() == 1);
        // Second pass over visually identical terrain.
        const CostGrid g = est.terrain_cost_map(robot, spec, sense_novel, rng);
        for (double v : g.values) REQUIRE(v >= 0.8);
    }
}

TEST_CASE("estimator calibration split between known and novel features") {
    // Known-class features should be confidently recognized, prototype-free
    // features should sit well below the confidence gate (0.87 vs 0.43 scale).
    TerrainClassModel model = known_model(5, 0.05);
    const auto all = make_prototypes(7, 16, 0xFACE);
    Rng rng(404);
    int known_high = 0, novel_low = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        Feature kf = model.class_prototypes[static_cast<size_t>(i % 5)];
        for (double& v : kf) v += rng.normal(0.0, 0.05);
        if (classify_patch(unit_normalized(kf), model, rng).confidence >= 0.9) ++known_high;

        Feature nf = all[5 + static_cast<size_t>(i % 2)];
        for (double& v : nf) v += rng.normal(0.0, 0.05);
        if (classify_patch(unit_normalized(nf), model, rng).confidence <= 0.6) ++novel_low;
    }
    CHECK(known_high >= static_cast<int>(0.95 * trials));
    CHECK(novel_low >= static_cast<int>(0.95 * trials));
}
