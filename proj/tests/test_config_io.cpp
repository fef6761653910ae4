#include <doctest.h>

#include <bit>
#include <sstream>

#include "ghr/checkpoint.hpp"
#include "ghr/config.hpp"
#include "ghr/error.hpp"
#include "support.hpp"

using namespace ghr;

TEST_SUITE("checkpoint") {
  TEST_CASE("double round trip is bit-exact and keeps frozen flags") {
    ParamStore ps;
    ps.add("w", oracle::random_tensor(3, 4, 1));
    ps.add("z", oracle::random_tensor(1, 4, 2), false);
    ps.add("tiny", Tensor{{1e-300, -0.0, 3.0}});
    const nlohmann::json header{{"model", {{"type", "ghr"}}}, {"best_epoch", 7}};
    std::stringstream s;
    write_checkpoint(s, ps, header);
    const Checkpoint back = read_checkpoint(s);
    CHECK(back.params.same_values(ps));
    CHECK_FALSE(back.params.at("z").trainable);
    CHECK(back.header.at("config").at("best_epoch") == 7);
    CHECK(back.header.at("frozen") == nlohmann::json::array({"z"}));
  }

  TEST_CASE("float width stores each value rounded to single precision") {
    ParamStore ps;
    ps.add("w", oracle::random_tensor(2, 3, 5));
    std::stringstream s;
    write_checkpoint(s, ps, nlohmann::json::object(), 4);
    const Checkpoint back = read_checkpoint(s);
    for (std::size_t i = 0; i < 6; ++i)
      CHECK(back.params.at("w").value[i] == static_cast<double>(static_cast<float>(ps.at("w").value[i])));
    CHECK_THROWS(write_checkpoint(s, ps, nlohmann::json::object(), 2));
  }

  TEST_CASE("corrupt input is rejected") {
    std::stringstream bad("NOTACKPT");
    CHECK_THROWS_AS(read_checkpoint(bad), Error);
    ParamStore ps;
    ps.add("w", Tensor::ones(2, 2));
    std::stringstream s;
    write_checkpoint(s, ps, nlohmann::json::object());
    std::string bytes = s.str();
    bytes.resize(bytes.size() - 3);
    std::stringstream truncated(bytes);
    CHECK_THROWS_AS(read_checkpoint(truncated), Error);
  }
}

TEST_SUITE("config") {
  TEST_CASE("presets") {
    const RunConfig s = preset_config("small_oor");
    CHECK(s.train_cap() == 5);
    CHECK(s.data.test_ceiling == 8);
    CHECK(s.model.low_iters == 4);
    CHECK(s.ablation_variants == known_variants());
    const RunConfig l = preset_config("large_oor");
    CHECK(l.train_cap() == 20);
    CHECK(l.data.test_n_max == 500);
    CHECK_THROWS_AS(preset_config("medium"), Error);
  }

  TEST_CASE("JSON sections override the preset") {
    const auto j = nlohmann::json::parse(R"({
      "preset": "large_oor",
      "data": {"train_size": 10, "seed": 4},
      "train": {"learning_rate": 0.01, "gradient_clip_norm": null},
      "baselines": {"deep_depth": 3},
      "ablation": {"variants": ["deep_gine"], "seeds": [1, 2]},
      "workers": 2
    })");
    const RunConfig c = run_config_from_json(j);
    CHECK(c.data.train_size == 10);
    CHECK(c.data.n_min == 300);
    CHECK(c.train.learning_rate == 0.01);
    CHECK_FALSE(c.train.gradient_clip_norm.has_value());
    CHECK(c.baselines.deep_depth == 3);
    CHECK(c.ablation_seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(c.workers == 2);
    const RunConfig again = run_config_from_json(to_json(c));
    CHECK(to_json(again) == to_json(c));

    CHECK_THROWS_AS(run_config_from_json({{"ablation", {{"variants", {"nope"}}}}}), Error);
    CHECK_THROWS_AS(run_config_from_json({{"workers", 0}}), Error);
  }

  TEST_CASE("every known variant builds and unknown names fail") {
    RunConfig c = preset_config("small_oor");
    for (const auto& v : known_variants()) {
      const auto m = make_variant(c, v, 0);
      CHECK(m->variant() == v);
      const auto rebuilt = model_from_json(m->to_json(), m->params());
      CHECK(rebuilt->to_json() == m->to_json());
    }
    const auto gr = make_variant(c, "recurrent+gr", 0);
    CHECK(gr->iteration_counts(false).at("global_steps") == 4);
    CHECK(gr->iteration_counts(false).at("iterations") == 12);
    const auto rec = make_variant(c, "recurrent_gine", 0);
    CHECK(rec->iteration_counts(true).at("iterations") == 15);
    CHECK_THROWS_AS(make_variant(c, "transformer", 0), Error);
  }
}
