#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "crosspath/common/errors.h"
#include "crosspath/explain/attribution.h"
#include "crosspath/model/train.h"
#include "crosspath/synthgen/generator.h"
#include "crosspath/windowing/windowing.h"

using namespace crosspath;
using namespace crosspath::explain;

namespace {

// Average marginal contribution over all n! orderings.
std::vector<double> permutation_oracle(std::size_t n, const ValueFunction& v) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> phi(n, 0.0);
  double count = 0.0;
  do {
    Coalition s = 0;
    for (auto i : order) {
      const double before = v(s);
      s |= Coalition{1} << i;
      phi[i] += v(s) - before;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& p : phi) p /= count;
  return phi;
}

std::vector<double> random_game(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> t(std::size_t{1} << n);
  for (auto& x : t) x = u(rng);
  return t;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

struct Trained {
  std::vector<data::CrossingInstance> corpus;
  windowing::WindowingSpec spec;
  windowing::NormalizationParams norm;
  windowing::SampleSet set;
  std::unique_ptr<model::Network> net;
};

Trained& trained() {
  static Trained t = [] {
    Trained t;
    synthgen::GeneratorConfig g;
    g.n_participants = 6;
    g.scenarios_per_participant = 10;
    t.corpus = synthgen::generate(g);
    t.spec = windowing::parse_data_type("T_1_1", windowing::Variant::kXyod, 5);
    t.norm = windowing::fit_normalization(t.corpus);
    t.set = windowing::build_samples(t.corpus, t.spec, t.norm);
    model::ModelConfig cfg;
    cfg.nodes = 8;
    cfg.epochs = 3;
    cfg.input_features = t.set.features;
    cfg.output_steps = t.set.output_steps;
    t.net = std::make_unique<model::Network>(cfg, 3);
    model::train(*t.net, t.set, nullptr, 4);
    return t;
  }();
  return t;
}

windowing::SampleSet windows_of(const windowing::SampleSet& set, const std::string& id) {
  windowing::SampleSet out = set;
  out.samples.clear();
  for (const auto& s : set.samples) {
    if (s.instance_id == id) out.samples.push_back(s);
  }
  return out;
}

// Full forward pass of every window with a replaced context.
double instance_error(model::Network& net, windowing::SampleSet windows,
                      const data::ContextVector& ctx) {
  for (auto& s : windows.samples) s.context = ctx;
  std::vector<std::size_t> idx(windows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto batch = model::make_batch(windows, idx);
  const auto pred = model::predict_normalized(net, windows);
  return model::rmse_meters(pred, batch.target, batch.mask, windows.norm.range(0),
                            windows.norm.range(1));
}

}  // namespace

TEST_CASE("analytic games") {
  SUBCASE("dummy player gets zero") {
    const auto phi = shapley_exact(4, [](Coalition s) { return 3.0 * (s & 1) + 2.0 * ((s >> 2) & 1); });
    CHECK(phi[1] == 0.0);
    CHECK(phi[3] == 0.0);
  }
  SUBCASE("additive game returns its coefficients") {
    const double c[] = {0.5, -1.25, 2.0, 0.125, 3.5};
    const auto phi = shapley_exact(5, [&](Coalition s) {
      double v = 0.0;
      for (int j = 0; j < 5; ++j) v += (s >> j & 1) ? c[j] : 0.0;
      return v;
    });
    for (int j = 0; j < 5; ++j) CHECK(std::abs(phi[j] - c[j]) < 1e-12);
  }
  SUBCASE("unanimity of players 1 and 2 among three") {
    const ValueFunction v = [](Coalition s) { return (s & 0b011) == 0b011 ? 1.0 : 0.0; };
    const auto phi = shapley_exact(3, v);
    const auto oracle = permutation_oracle(3, v);
    for (int i = 0; i < 3; ++i) CHECK(phi[i] == doctest::Approx(oracle[i]).epsilon(1e-15));
    CHECK(phi[0] == doctest::Approx(0.5));
    CHECK(phi[1] == doctest::Approx(0.5));
    CHECK(phi[2] == 0.0);
  }
  SUBCASE("symmetric players get equal values") {
    // Players 0 and 3 contribute identically to every coalition.
    auto t = random_game(4, 9);
    for (Coalition s = 0; s < 16; ++s) {
      const Coalition swapped = (s & 0b0110) | ((s & 1) << 3) | ((s >> 3) & 1);
      t[swapped] = t[s] = std::min(s, swapped) == s ? t[s] : t[swapped];
    }
    const auto phi = shapley_exact(4, t);
    CHECK(std::abs(phi[0] - phi[3]) < 1e-12);
  }
}

TEST_CASE("exact enumeration matches the permutation oracle and is efficient") {
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto t = random_game(n, 100 * n + seed);
      const ValueFunction v = [&](Coalition s) { return t[s]; };
      const auto phi = shapley_exact(n, t);
      const auto oracle = permutation_oracle(n, v);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(phi[i] - oracle[i]) < 1e-12);
      CHECK(std::abs(sum(phi) - (t.back() - t.front())) < 1e-12);
    }
  }
}

TEST_CASE("enumeration guard") {
  CHECK_NOTHROW(shapley_exact(12, [](Coalition s) { return static_cast<double>(std::popcount(s)); }));
  CHECK_THROWS_AS(shapley_exact(13, [](Coalition) { return 0.0; }), SizeError);
  CHECK_THROWS_AS(shapley_exact(3, std::vector<double>(7)), SizeError);
  CHECK(shapley_exact(0, std::vector<double>{1.0}).empty());
}

TEST_CASE("tabulation is identical serial and parallel") {
  const auto t = random_game(6, 1);
  const ValueFunction v = [&](Coalition s) { return std::sin(t[s]); };
  CHECK(tabulate(6, v, 1) == tabulate(6, v, 4));
}

TEST_CASE("two-feature linear model, values by hand") {
  // error(c) = |2 c0 + c1|, own (1, 1), background {(0, 0), (0, 1)}.
  const std::vector<Player> players{{"a", {0}}, {"b", {1}}};
  data::ContextVector own{}, b0{}, b1{};
  own[0] = own[1] = 1.0;
  b1[1] = 1.0;
  const ErrorFunction err = [](const data::ContextVector& c) { return std::abs(2.0 * c[0] + c[1]); };
  const std::vector<data::ContextVector> bg{b0, b1};
  CHECK(marginal_value(err, own, bg, players, 0b00) == 0.5);
  CHECK(marginal_value(err, own, bg, players, 0b01) == 2.5);
  CHECK(marginal_value(err, own, bg, players, 0b10) == 1.0);
  CHECK(marginal_value(err, own, bg, players, 0b11) == 3.0);
  const auto phi = shapley_exact(2, [&](Coalition s) { return marginal_value(err, own, bg, players, s); });
  CHECK(phi[0] == doctest::Approx(2.0));
  CHECK(phi[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(marginal_value(err, own, {}, players, 0), ConfigError);
}

TEST_CASE("players") {
  const auto vars = context_players();
  REQUIRE(vars.size() == 6);
  CHECK(vars[0].name == "road_type");
  CHECK(vars[0].dims.size() == 3);
  CHECK(vars[3].name == "weather");
  const auto dims = context_players(true);
  CHECK(dims.size() == 8);
  std::vector<std::size_t> all;
  for (const auto& p : dims) all.insert(all.end(), p.dims.begin(), p.dims.end());
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
}

TEST_CASE("model error game") {
  auto& t = trained();
  const auto windows = windows_of(t.set, t.corpus[3].id);
  REQUIRE(windows.size() > 0);
  const auto players = context_players();
  const auto bg = sample_background(t.set, 20, 5);
  REQUIRE(bg.size() == 20);
  const ModelErrorGame game(*t.net, windows, bg, players);
  const auto own = windows.samples.front().context;

  SUBCASE("full coalition is the instance's own error") {
    CHECK(game.value(0b111111) == doctest::Approx(instance_error(*t.net, windows, own)).epsilon(1e-12));
  }
  SUBCASE("matches a full-forward oracle on every coalition") {
    for (Coalition s = 0; s < 64; s += 7) {
      double expected = 0.0;
      for (const auto& b : bg) expected += instance_error(*t.net, windows, compose(own, b, players, s));
      expected /= static_cast<double>(bg.size());
      CHECK(game.value(s) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
  SUBCASE("own context as background makes v constant") {
    const ModelErrorGame self(*t.net, windows, {own}, players);
    const double full = self.value(0b111111);
    for (Coalition s = 0; s < 64; ++s) CHECK(self.value(s) == full);
  }
  SUBCASE("efficiency and determinism") {
    const auto e = game.explain();
    CHECK(std::abs(sum(e.phi) - (e.v_full - e.v_empty)) < 1e-9);
    CHECK(e.instance_id == t.corpus[3].id);
    const auto again = game.explain(3);
    CHECK(again.phi == e.phi);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(ModelErrorGame(*t.net, windows, {}, players), ConfigError);
  }
}

TEST_CASE("corpus explanations") {
  auto& t = trained();
  const std::vector<data::CrossingInstance> test(t.corpus.begin(), t.corpus.begin() + 8);
  ExplainOptions opt;
  opt.background_size = 30;
  opt.seed = 11;
  const auto e = explain_corpus(*t.net, t.spec, t.norm, test, t.corpus, opt);
  REQUIRE(e.explanations.size() == e.contexts.size());
  CHECK(e.explanations.size() >= 6);
  for (const auto& x : e.explanations) {
    CHECK(std::abs(sum(x.phi) - (x.v_full - x.v_empty)) < 1e-9);
  }

  opt.jobs = 3;
  const auto parallel = explain_corpus(*t.net, t.spec, t.norm, test, t.corpus, opt);
  for (std::size_t i = 0; i < e.explanations.size(); ++i) {
    CHECK(parallel.explanations[i].phi == e.explanations[i].phi);
  }

  std::ostringstream summary;
  write_summary_csv(summary, e);
  std::string header, first;
  std::istringstream in(summary.str());
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "instance_id,feature,feature_value,phi");
  CHECK(first.rfind(e.explanations[0].instance_id + ",road_type," +
                        std::string(data::to_string(e.contexts[0].road_type)) + ",",
                    0) == 0);
  std::ostringstream wide;
  write_explanations_csv(wide, e);
  CHECK(wide.str().rfind("instance_id,v_empty,v_full,phi_road_type,phi_speed_limit", 0) == 0);
}

TEST_CASE("identical contexts give zero attributions") {
  auto& t = trained();
  auto corpus = t.corpus;
  for (auto& i : corpus) i.context = corpus.front().context;
  const std::vector<data::CrossingInstance> test(corpus.begin(), corpus.begin() + 5);
  const auto e = explain_corpus(*t.net, t.spec, t.norm, test, corpus, ExplainOptions{});
  for (const auto& x : e.explanations) {
    for (double p : x.phi) CHECK(std::abs(p) < 1e-12);
  }
}

TEST_CASE("vanilla models ignore context") {
  auto& t = trained();
  model::ModelConfig cfg = t.net->config();
  cfg.kind = model::ModelKind::kVanilla;
  cfg.dense_layers = 0;
  model::Network vanilla(cfg, 1);
  const std::vector<data::CrossingInstance> test(t.corpus.begin(), t.corpus.begin() + 3);
  const auto e = explain_corpus(vanilla, t.spec, t.norm, test, t.corpus, ExplainOptions{});
  for (const auto& x : e.explanations) {
    for (double p : x.phi) CHECK(p == 0.0);
  }
}

TEST_CASE("retraining variant on a tiny configuration") {
  auto& t = trained();
  model::ModelConfig cfg;
  cfg.nodes = 4;
  cfg.epochs = 1;
  cfg.batch_size = 128;
  auto eval = windows_of(t.set, t.corpus[0].id);
  for (const auto& s : windows_of(t.set, t.corpus[1].id).samples) eval.samples.push_back(s);
  const auto e = explain_by_retraining(cfg, t.set, eval, t.corpus, 2);
  REQUIRE(e.explanations.size() == 2);
  for (const auto& x : e.explanations) {
    CHECK(std::abs(sum(x.phi) - (x.v_full - x.v_empty)) < 1e-9);
  }
  CHECK(explain_by_retraining(cfg, t.set, eval, t.corpus, 2).explanations[1].phi ==
        e.explanations[1].phi);
}
