#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "common/reference_nets.hpp"
#include "gmedia/errors.hpp"
#include "gmedia/models.hpp"
#include "gmedia/nn/ops.hpp"
#include "gmedia/sim.hpp"
#include "gmedia/training.hpp"

using namespace gmedia;

namespace {

GridSpec small_spec() {
    GridSpec spec;
    spec.rows = 16;
    spec.cols = 16;
    spec.cell_size = 20.0;
    spec.divider_col = 8;
    return spec;
}

std::size_t conv_params(int in, int out, int k) { return static_cast<std::size_t>(in * out * k * k + out); }

// Tower of three 3x3 convs, ten-layer trunk, 1x1 head, counted layer by layer.
std::size_t delta_net_params(int state_ch) {
    std::size_t n = conv_params(state_ch, 32, 3) + 2 * conv_params(32, 32, 3);
    n += conv_params(6, 32, 3) + 2 * conv_params(32, 32, 3);
    n += conv_params(64, 32, 3) + 9 * conv_params(32, 32, 3);
    return n + conv_params(32, 1, 1);
}

std::size_t value_net_params(const GridSpec& spec) {
    std::size_t n = 2 * (conv_params(1, 32, 3) + 2 * conv_params(32, 32, 3));
    n += conv_params(6, 32, 3) + 2 * conv_params(32, 32, 3);
    n += conv_params(96, 32, 3) + 9 * conv_params(32, 32, 3);
    n += conv_params(16 * 2, 16, 3) + conv_params(16, 16, 3);
    return n + static_cast<std::size_t>(16 * (spec.rows / 16) * (spec.cols / 16) + 1);
}

HeightMap random_state(const GridSpec& spec, Pcg32& rng) {
    std::vector<double> v(static_cast<std::size_t>(spec.cell_count()));
    for (double& x : v) {
        x = rng.uniform(0.0, 60.0);
    }
    return repose_relax(HeightMap(spec, std::move(v)), 30.0, spec.divider_col);
}

std::vector<EpisodeRecord> sim_records(const GridSpec& spec, int count, std::uint64_t seed) {
    Pcg32 rng(seed);
    std::vector<EpisodeRecord> out;
    for (int i = 0; i < count; ++i) {
        const HeightMap h = random_state(spec, rng);
        const ScoopDumpParams p = sample_valid_params(spec, rng);
        const SimOutcome o = sim_step(h, p, SimConfig{});
        out.push_back({h, p, o.after_scoop, o.next, random_state(spec, rng)});
    }
    return out;
}

nn::TensorPtr state_of(const std::vector<EpisodeRecord>& records) {
    std::vector<const HeightMap*> maps;
    for (const auto& r : records) {
        maps.push_back(&r.before);
    }
    return height_batch(maps);
}

nn::TensorPtr actions_of(const std::vector<EpisodeRecord>& records) {
    std::vector<ScoopDumpParams> ps;
    for (const auto& r : records) {
        ps.push_back(r.params);
    }
    return action_batch(ps, records.front().before.spec());
}

std::vector<float> random_seed(std::size_t n, Pcg32& rng) {
    std::vector<float> r(n);
    for (float& v : r) {
        v = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
    return r;
}

}  // namespace

TEST_SUITE("models") {
    TEST_CASE("parameter counts follow the layer layout") {
        const GridSpec spec;
        CHECK(SingleNet(spec).parameter_count() == delta_net_params(1));
        CHECK(ScoopDumpNet(spec).parameter_count() == delta_net_params(1) + delta_net_params(2));
        CHECK(ValueNet(spec).parameter_count() == value_net_params(spec));
        CHECK(delta_net_params(1) == 140801u);
        CHECK(ValueNet(small_spec()).parameter_count() == value_net_params(small_spec()));
    }

    TEST_CASE("model kinds parse and print") {
        CHECK(parse_model_kind("single") == ModelKind::single);
        CHECK(parse_model_kind("scoop_dump") == ModelKind::scoop_dump);
        CHECK(parse_model_kind("scoop-dump") == ModelKind::scoop_dump);
        CHECK(parse_model_kind("value") == ModelKind::value);
        CHECK(to_string(ModelKind::scoop_dump) == "scoop_dump");
        CHECK_THROWS_AS(parse_model_kind("double"), ArgumentError);
    }

    TEST_CASE("zero weights predict no change and zero value") {
        const GridSpec spec = small_spec();
        const auto records = sim_records(spec, 3, 5);
        for (ModelKind kind : {ModelKind::single, ModelKind::scoop_dump}) {
            auto model = make_model(kind, spec, 1);
            zero_weights(*model);
            const auto& dyn = dynamic_cast<const DynamicsModel&>(*model);
            for (const auto& r : records) {
                CHECK(predict_next(dyn, r.before, r.params) == r.before);
            }
        }
        ValueNet value(spec, 2);
        zero_weights(value);
        CHECK(predict_value(value, records[0].before, records[0].goal, records[0].params) == 0.0);
    }

    TEST_CASE("scoop-dump total is the exact sum of its halves") {
        const GridSpec spec = small_spec();
        const auto records = sim_records(spec, 2, 6);
        const ScoopDumpNet net(spec, 3);
        const auto halves = net.forward(nullptr, state_of(records), actions_of(records));
        REQUIRE(halves.total->shape() == nn::Shape{2, 1, 16, 16});
        for (std::size_t i = 0; i < halves.total->size(); ++i) {
            REQUIRE(halves.total->values()[i] == halves.scoop->values()[i] + halves.dump->values()[i]);
        }
        const auto delta = net.predict_delta(nullptr, state_of(records), actions_of(records));
        CHECK(std::equal(delta->values().begin(), delta->values().end(), halves.total->values().begin()));
    }

    TEST_CASE("a loss on the total alone leaves the top half untouched") {
        const GridSpec spec = small_spec();
        const auto records = sim_records(spec, 2, 7);
        ScoopDumpNet net(spec, 4);
        net.zero_grad();
        nn::Tape tape;
        const auto halves = net.forward(&tape, state_of(records), actions_of(records));
        const auto target = nn::make_tensor(halves.total->shape(), 0.3f);
        tape.backward(nn::l2_loss(&tape, halves.total, target));
        bool bottom_moved = false;
        for (const auto& p : net.named_parameters()) {
            const auto g = std::as_const(*p.tensor).grad();
            const bool nonzero = std::any_of(g.begin(), g.end(), [](float v) { return v != 0.0f; });
            if (p.name.rfind("scoop_dump.top.", 0) == 0) {
                REQUIRE_FALSE(nonzero);
            } else {
                bottom_moved = bottom_moved || nonzero;
            }
        }
        CHECK(bottom_moved);
    }

    TEST_CASE("full-network gradients agree with double-precision finite differences") {
        using namespace gmedia::testing;
        const GridSpec spec = small_spec();
        const auto records = sim_records(spec, 1, 8);
        const auto state = state_of(records);
        const auto action = actions_of(records);
        const RefMap ref_state = ref_sample(*state, 0);
        const RefMap ref_action = ref_sample(*action, 0);
        Pcg32 rng(17);

        SUBCASE("single") {
            SingleNet net(spec, 9);
            randomize_biases(net, rng);
            nn::Tape tape;
            net.zero_grad();
            const auto out = net.predict_delta(&tape, state, action);
            const auto r = random_seed(out->size(), rng);
            tape.backward(out, r);
            const RefParams base = ref_params(net);
            CHECK(std::fabs(dot(r, ref_delta_net(base, "single", ref_state, ref_action)) - dot(r, ref_sample(*out, 0))) <
                  1e-4);
            const auto g = check_against_reference(
                net, [&](const RefParams& p) { return dot(r, ref_delta_net(p, "single", ref_state, ref_action)); },
                rng, 1);
            CHECK(g.relative() < 1e-3);
        }
        SUBCASE("scoop_dump") {
            ScoopDumpNet net(spec, 10);
            randomize_biases(net, rng);
            nn::Tape tape;
            net.zero_grad();
            const auto h = net.forward(&tape, state, action);
            const auto out = nn::concat_channels(&tape, nn::concat_channels(&tape, h.scoop, h.dump), h.total);
            const auto r = random_seed(out->size(), rng);
            tape.backward(out, r);
            const RefParams base = ref_params(net);
            const RefMap frozen = ref_scoop_dump(base, ref_state, ref_action, nullptr).scoop;
            const std::size_t plane = frozen.v.size();
            const auto objective = [&](const RefParams& p) {
                const auto o = ref_scoop_dump(p, ref_state, ref_action, &frozen);
                return dot(r, o.scoop) + dot(r, o.dump, plane) + dot(r, o.total, 2 * plane);
            };
            CHECK(std::fabs(objective(base) - dot(r, ref_sample(*out, 0))) < 1e-4);
            CHECK(check_against_reference(net, objective, rng, 1, 1e-6, "scoop_dump.top.").relative() < 1e-3);
            CHECK(check_against_reference(net, objective, rng, 1, 1e-6, "scoop_dump.bottom.").relative() < 1e-3);
        }
        SUBCASE("value") {
            ValueNet net(spec, 11);
            randomize_biases(net, rng);
            const auto goal = height_batch(std::vector<const HeightMap*>{&records[0].goal});
            const RefMap ref_goal = ref_sample(*goal, 0);
            nn::Tape tape;
            net.zero_grad();
            const auto out = net.forward(&tape, state, goal, action);
            tape.backward(out);
            const RefParams base = ref_params(net);
            const auto objective = [&](const RefParams& p) { return ref_value_net(p, ref_state, ref_goal, ref_action); };
            CHECK(std::fabs(objective(base) - out->item()) < 1e-4);
            CHECK(check_against_reference(net, objective, rng, 1).relative() < 1e-3);
        }
    }

    TEST_CASE("weights round trip and reject the wrong architecture") {
        const GridSpec spec = small_spec();
        const auto records = sim_records(spec, 1, 12);
        const SingleNet a(spec, 21);
        std::stringstream buf;
        a.save(buf);
        SingleNet b(spec, 22);
        CHECK_FALSE(predict_next(a, records[0].before, records[0].params) ==
                    predict_next(b, records[0].before, records[0].params));
        b.load(buf);
        CHECK(predict_next(a, records[0].before, records[0].params) ==
              predict_next(b, records[0].before, records[0].params));

        std::stringstream again;
        a.save(again);
        ScoopDumpNet c(spec, 1);
        CHECK_THROWS_AS(c.load(again), DimensionError);
    }

    TEST_CASE("same seed gives the same weights") {
        const GridSpec spec = small_spec();
        const SingleNet a(spec, 5);
        const SingleNet b(spec, 5);
        const SingleNet c(spec, 6);
        const auto pa = a.parameters();
        const auto pb = b.parameters();
        const auto pc = c.parameters();
        bool differs = false;
        for (std::size_t i = 0; i < pa.size(); ++i) {
            REQUIRE(std::equal(pa[i]->values().begin(), pa[i]->values().end(), pb[i]->values().begin()));
            differs = differs || !std::equal(pa[i]->values().begin(), pa[i]->values().end(), pc[i]->values().begin());
        }
        CHECK(differs);
    }

    TEST_CASE("predictions reject a foreign grid and stay in range") {
        const GridSpec spec = small_spec();
        const SingleNet net(spec, 3);
        const auto records = sim_records(GridSpec{}, 1, 13);
        CHECK_THROWS_AS(predict_next(net, records[0].before, records[0].params), DimensionError);
        const auto own = sim_records(spec, 4, 14);
        for (const auto& r : own) {
            const HeightMap next = predict_next(net, r.before, r.params);
            for (double v : next.data()) {
                REQUIRE(v >= 0.0);
                REQUIRE(v <= spec.max_height);
            }
        }
    }

    TEST_CASE("value labels") {
        const GridSpec spec = small_spec();
        for (const auto& r : sim_records(spec, 20, 15)) {
            CHECK(value_label(r) == doctest::Approx(l1_distance(r.goal, r.after) - l1_distance(r.goal, r.before)));
            EpisodeRecord at_goal = r;
            at_goal.goal = r.before;
            CHECK(value_label(at_goal) >= 0.0);
        }
    }

    TEST_CASE("batched and one-at-a-time predictions agree; rollouts chain") {
        const GridSpec spec = small_spec();
        const SingleNet net(spec, 4);
        const auto records = sim_records(spec, 5, 16);
        std::vector<StateAction> queries;
        for (const auto& r : records) {
            queries.push_back({&r.before, r.params});
        }
        const NetPredictor batched(net, 3);
        const auto many = batched.predict_many(queries);
        REQUIRE(many.size() == 5u);
        for (std::size_t i = 0; i < 5; ++i) {
            const HeightMap one = predict_next(net, records[i].before, records[i].params);
            for (int k = 0; k < spec.cell_count(); ++k) {
                REQUIRE(many[i][k] == doctest::Approx(one[k]).epsilon(1e-5));
            }
        }

        std::vector<ScoopDumpParams> actions;
        for (const auto& r : records) {
            actions.push_back(r.params);
        }
        const BaselinePredictor heuristic;
        const auto chain = rollout(heuristic, records[0].before, actions);
        REQUIRE(chain.size() == 6u);
        CHECK(chain[0] == records[0].before);
        for (std::size_t i = 0; i < actions.size(); ++i) {
            CHECK(chain[i + 1] == baseline_predict(chain[i], actions[i]).next);
        }
        CHECK(rollout(heuristic, records[0].before, {}).size() == 1u);
    }

    TEST_CASE("losses and missing intermediate states") {
        const GridSpec spec = small_spec();
        auto records = sim_records(spec, 3, 17);
        const ScoopDumpNet net(spec, 1);
        CHECK(dataset_loss(net, records) > 0.0);
        records[1].after_scoop.reset();
        CHECK_THROWS_AS(dataset_loss(net, records), DataError);
        const SingleNet single(spec, 1);
        CHECK(dataset_loss(single, records) > 0.0);

        TrainConfig bad;
        bad.batch_size = 0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = TrainConfig{};
        bad.learning_rate = -1;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    TEST_CASE("pretraining examples carry the heuristic's outcome") {
        const GridSpec spec = small_spec();
        const auto states = sim_records(spec, 4, 18);
        Pcg32 rng(3);
        const auto examples = baseline_examples(states, 12, rng);
        REQUIRE(examples.size() == 12u);
        for (const auto& e : examples) {
            const auto out = baseline_predict(e.before, e.params);
            CHECK(e.after == out.next);
            REQUIRE(e.after_scoop.has_value());
            CHECK(*e.after_scoop == out.after_scoop);
            CHECK(validate(e.params, spec).empty());
        }
        CHECK_THROWS_AS(baseline_examples({}, 1, rng), DataError);
    }

    TEST_CASE("training overfits a tiny dataset") {
        const GridSpec spec = small_spec();
        const auto records = sim_records(spec, 4, 19);
        SingleNet net(spec, 2);
        const double before = dataset_loss(net, records);
        TrainConfig cfg;
        cfg.iterations = 300;
        cfg.batch_size = 4;
        cfg.learning_rate = 1e-3;
        cfg.seed = 1;
        int logged = 0;
        cfg.log_every = 50;
        cfg.on_log = [&](const LossPoint&) { ++logged; };
        const TrainResult result = train(net, records, cfg);
        const double after = dataset_loss(net, records);
        CHECK(after < 0.1 * before);
        CHECK(result.curve.size() == 6u);
        CHECK(logged == 6);
        CHECK(result.final_loss < result.first_loss);

        SingleNet twin(spec, 2);
        train(twin, records, cfg);
        CHECK(dataset_loss(twin, records) == after);
    }
}
