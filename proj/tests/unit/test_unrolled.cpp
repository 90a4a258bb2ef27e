#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/gradcheck.hpp"
#include "nfsar/errors.hpp"
#include "nfsar/unrolled.hpp"

using namespace nfsar;
using namespace nfsar::unrolled;

namespace {

ImageGrid tiny_grid() { return ImageGrid::centered(16, 16, 0.01, 0.02, 3.0); }

const BlockMaskBank& tiny_bank() {
  static const BlockMaskBank b =
      build_single_block_bank(SceneGeometry{}, tiny_grid(), tiny_grid().point_at(8, 8));
  return b;
}

const BlockMaskBank& identity_bank(const ImageGrid& g) {
  static const BlockMaskBank b = bank_from_mask(SceneGeometry{}, g, SpectralMask(g.size(), 1.0));
  return b;
}

ComplexImage random_image(const ImageGrid& g, std::uint64_t seed, double scale = 1.0) {
  ComplexImage img(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : img.vector()) {
    const double re = n(rng);
    v = {re, n(rng)};
  }
  return img;
}

NetworkArch tiny_arch() {
  NetworkArch a;
  a.n_blocks = 2;
  a.unet_levels = 1;
  a.base_channels = 2;
  return a;
}

void set_array(NetworkParams& p, const std::string& name, const std::function<void(ParamArray&)>& f) {
  auto arrays = p.named();
  bool found = false;
  for (auto& a : arrays)
    if (a.name == name) {
      f(a);
      found = true;
    }
  REQUIRE(found);
  p = NetworkParams::from_named(p.arch, arrays);
}

/// One-level linear network whose encoder and skip path copy the input.
NetworkParams identity_network(std::size_t n_blocks) {
  NetworkArch a;
  a.n_blocks = n_blocks;
  a.unet_levels = 1;
  a.base_channels = 2;
  a.activation = Activation::linear;
  NetworkParams p = init_network(a, tiny_bank(), 1);
  std::fill(p.mu.begin(), p.mu.end(), 0.0);
  for (auto& t : p.theta) std::fill(t.begin(), t.end(), 0.0);
  // weight index for [co][ci][ky][kx] with k = 3
  auto centre = [](std::size_t co, std::size_t ci, std::size_t cin) { return ((co * cin + ci) * 3 + 1) * 3 + 1; };
  for (const char* name : {"enc0.conv0.weight", "enc0.conv1.weight", "dec0.conv1.weight"})
    set_array(p, name, [&](ParamArray& w) {
      for (std::size_t c = 0; c < 2; ++c) w.values[centre(c, c, w.shape[1])] = 1.0;
    });
  set_array(p, "dec0.conv0.weight", [&](ParamArray& w) {
    for (std::size_t c = 0; c < 2; ++c) w.values[centre(c, 2 + c, w.shape[1])] = 1.0;
  });
  set_array(p, "final.weight", [](ParamArray& w) {
    w.values[0] = 1.0;
    w.values[3] = 1.0;
  });
  return p;
}

}  // namespace

TEST_CASE("parameters and initialisation", "[unrolled]") {
  SECTION("golden parameter count for the default architecture") {
    NetworkArch a;
    const nn::UNet net(a);
    // Per 3x3 conv: cin*cout*9 + cout; per upconv: cin*cout*4 + cout.
    std::size_t expected = 0;
    auto conv = [&](std::size_t i, std::size_t o, std::size_t k) { expected += i * o * k * k + o; };
    conv(2, 16, 3), conv(16, 16, 3), conv(16, 32, 3), conv(32, 32, 3), conv(32, 64, 3), conv(64, 64, 3);
    conv(64, 128, 3), conv(128, 128, 3);
    conv(128, 64, 2), conv(128, 64, 3), conv(64, 64, 3);
    conv(64, 32, 2), conv(64, 32, 3), conv(32, 32, 3);
    conv(32, 16, 2), conv(32, 16, 3), conv(16, 16, 3);
    conv(16, 2, 1);
    CHECK(expected == 481906);
    CHECK(net.parameter_count() == 481906);
    const auto p = init_network(a, tiny_bank(), 5);
    CHECK(p.count() == 481906 + 4);
    auto per_block = a;
    per_block.shared_theta = false;
    CHECK(init_network(per_block, tiny_bank(), 5).count() == 4 * 481906 + 4);
  }

  SECTION("deterministic and seed dependent") {
    const auto a = init_network(tiny_arch(), tiny_bank(), 11);
    const auto b = init_network(tiny_arch(), tiny_bank(), 11);
    const auto c = init_network(tiny_arch(), tiny_bank(), 12);
    CHECK(encode_checkpoint(a) == encode_checkpoint(b));
    CHECK(a.theta != c.theta);
  }

  SECTION("step sizes on a unit-norm operator") {
    const auto p = init_network(tiny_arch(), identity_bank(tiny_grid()), 1);
    for (double mu : p.mu) CHECK(mu == Catch::Approx(0.9).epsilon(1e-9));
  }

  SECTION("biases start at zero, kernels within the fan-in bound") {
    const auto p = init_network(tiny_arch(), tiny_bank(), 3);
    for (const auto& arr : p.named()) {
      if (arr.name == "mu") continue;
      const bool bias = arr.name.ends_with(".bias");
      const std::size_t fan_in = arr.name.ends_with("up.weight") ? arr.shape[3]
                                 : arr.shape.size() == 4      ? arr.shape[1] * arr.shape[2] * arr.shape[3]
                                                              : 0;
      for (double v : arr.values) {
        if (bias) {
          CHECK(v == 0.0);
        } else {
          CHECK(std::abs(v) <= std::sqrt(6.0 / static_cast<double>(fan_in)));
        }
      }
    }
  }
}

TEST_CASE("W module", "[unrolled]") {
  const auto& bank = tiny_bank();
  const auto g = tiny_grid();
  const auto x = random_image(g, 1);
  const auto y = random_image(g, 2);

  CHECK(w_module(x, y, 0.0, bank).vector() == x.vector());

  const auto consistent = forward(x, bank);
  const auto w = w_module(x, consistent, 0.7, bank);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(w[i] - x[i]) <= 1e-12);

  const auto& id = identity_bank(g);
  const auto wy = w_module(ComplexImage(g), y, 1.0, id);
  for (std::size_t i = 0; i < wy.size(); ++i) CHECK(std::abs(wy[i] - y[i]) <= 1e-12);

  SECTION("small steps never increase the data misfit") {
    const double norm = power_iteration_norm(bank, 200);
    for (std::uint64_t t = 0; t < 20; ++t) {
      const auto xt = random_image(g, 100 + t);
      const auto yt = random_image(g, 200 + t);
      const double mu = (0.05 + 0.9 * static_cast<double>(t) / 19.0) / norm;
      const double before = (yt - forward(xt, bank)).norm_squared();
      const double after = (yt - forward(w_module(xt, yt, mu, bank), bank)).norm_squared();
      CHECK(after <= before);
    }
  }

  CHECK_THROWS_AS(w_module(ComplexImage(ImageGrid::centered(32, 32, 0.01, 0.02, 3.0)), y, 0.5, bank),
                  GridMismatch);
}

TEST_CASE("X module", "[unrolled]") {
  SECTION("engineered identity") {
    const auto p = identity_network(1);
    const nn::UNet net(p.arch);
    const auto w = random_image(tiny_grid(), 4);
    const auto out = x_module(w, net, p.theta_for(0));
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(out[i] - w[i]) <= 1e-14);
  }

  SECTION("shape contract") {
    NetworkArch a;
    const nn::UNet net(a);
    const auto p = init_network(a, tiny_bank(), 2);
    for (std::size_t n : {64u, 128u}) {
      const auto grid = ImageGrid::centered(n, n, 0.01, 0.02, 3.0);
      const auto out = x_module(random_image(grid, n), net, p.theta_for(0));
      CHECK(out.grid() == grid);
    }
    CHECK_THROWS_AS(x_module(ComplexImage(ImageGrid::centered(60, 64, 0.01, 0.02, 3.0)), net,
                             p.theta_for(0)),
                    ShapeError);
  }

  SECTION("zero in, zero out with zero biases") {
    const auto p = init_network(tiny_arch(), tiny_bank(), 9);
    const nn::UNet net(p.arch);
    CHECK(x_module(ComplexImage(tiny_grid()), net, p.theta_for(0)).max_abs() == 0.0);
  }
}

TEST_CASE("network forward", "[unrolled]") {
  const auto& bank = tiny_bank();
  const auto y = random_image(tiny_grid(), 21);

  SECTION("zero steps and identity proximal map return Y") {
    const auto r = forward_network(y, identity_network(3), bank);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(r.x[i] - y[i]) <= 1e-13);
    CHECK(r.w.size() == 3);
    CHECK(r.x_blocks.size() == 3);
  }

  SECTION("one block equals W then X by hand") {
    auto a = tiny_arch();
    a.n_blocks = 1;
    const auto p = init_network(a, bank, 4);
    const nn::UNet net(a);
    const auto manual = x_module(w_module(y, y, p.mu[0], bank), net, p.theta_for(0));
    CHECK(forward_network(y, p, bank).x.vector() == manual.vector());
  }

  SECTION("per-block parameters are used block by block") {
    auto a = tiny_arch();
    a.shared_theta = false;
    const auto p = init_network(a, bank, 4);
    const nn::UNet net(a);
    const auto r = forward_network(y, p, bank);
    const auto x1 = x_module(w_module(y, y, p.mu[0], bank), net, p.theta_for(0));
    const auto x2 = x_module(w_module(x1, y, p.mu[1], bank), net, p.theta_for(1));
    CHECK(r.x.vector() == x2.vector());
  }
}

TEST_CASE("loss and gradients", "[unrolled]") {
  const auto& bank = tiny_bank();
  const auto g = tiny_grid();
  const auto y = random_image(g, 31);
  const auto target = random_image(g, 32);

  SECTION("analytic gradients match central differences") {
    for (bool shared : {true, false}) {
      auto a = tiny_arch();
      a.shared_theta = shared;
      auto p = init_network(a, bank, 8);
      std::mt19937_64 rng(5);
      std::uniform_real_distribution<double> u(-0.05, 0.05);
      for (auto& t : p.theta)
        for (auto& v : t) v += u(rng);
      const std::vector<Sample> batch{{&y, &target}};
      const auto r = testing::gradient_check(batch, p, bank);
      INFO("shared " << shared << " worst index " << r.worst_index);
      CHECK(r.checked == p.count());
      CHECK(r.worst_relative <= 1e-4);
    }
  }

  SECTION("zero residual gives zero loss and zero gradient") {
    const auto p = init_network(tiny_arch(), bank, 8);
    const auto exact = forward_network(y, p, bank).x;
    const std::vector<Sample> batch{{&y, &exact}};
    const auto lg = loss_and_gradients(batch, p, bank);
    CHECK(lg.loss == 0.0);
    for (double v : lg.grad.flatten()) CHECK(v == 0.0);
  }

  SECTION("doubling the targets quadruples the loss of a silent network") {
    auto p = init_network(tiny_arch(), bank, 8);
    for (auto& t : p.theta) std::fill(t.begin(), t.end(), 0.0);
    auto doubled = target;
    doubled *= 2.0;
    const std::vector<Sample> one{{&y, &target}}, two{{&y, &doubled}};
    CHECK(loss(two, p, bank) == Catch::Approx(4.0 * loss(one, p, bank)).epsilon(1e-14));
  }

  SECTION("batch loss is the mean of per-sample losses") {
    const auto p = init_network(tiny_arch(), bank, 8);
    const auto y2 = random_image(g, 33);
    const std::vector<Sample> a{{&y, &target}}, b{{&y2, &target}}, ab{{&y, &target}, {&y2, &target}};
    CHECK(loss(ab, p, bank) == Catch::Approx(0.5 * (loss(a, p, bank) + loss(b, p, bank))));
  }

  SECTION("non-finite values are reported") {
    auto p = init_network(tiny_arch(), bank, 8);
    p.mu[0] = std::numeric_limits<double>::infinity();
    const std::vector<Sample> batch{{&y, &target}};
    CHECK_THROWS_AS(loss_and_gradients(batch, p, bank), NonFinite);
  }
}

TEST_CASE("training loop", "[unrolled]") {
  const auto& bank = tiny_bank();
  const auto g = tiny_grid();
  std::vector<ImagePair> pairs;
  for (std::uint64_t i = 0; i < 5; ++i) {
    ComplexImage clean(g);
    clean(4 + i, 5) = 1.0;
    clean(10, 3 + 2 * i) = std::polar(0.5, static_cast<double>(i));
    pairs.push_back({clean, forward(clean, bank)});
  }
  const std::span<const ImagePair> train_set(pairs.data(), 4), test_set(pairs.data() + 4, 1);
  TrainConfig cfg;
  cfg.batch_size = 3;

  SECTION("one epoch takes one optimiser step per batch") {
    cfg.epochs = 1;
    const auto r = train(train_set, test_set, tiny_arch(), cfg, bank);
    REQUIRE(r.log.size() == 1);
    CHECK(r.log[0].steps == 2);
    CHECK(r.log[0].test_loss.has_value());
    CHECK(r.log[0].mu.size() == 2);
  }

  SECTION("deterministic reruns") {
    cfg.epochs = 3;
    const auto a = train(train_set, test_set, tiny_arch(), cfg, bank);
    const auto b = train(train_set, test_set, tiny_arch(), cfg, bank);
    CHECK(a.log.back().train_loss == b.log.back().train_loss);
    CHECK(encode_checkpoint(a.final_params) == encode_checkpoint(b.final_params));
  }

  SECTION("returns the best test-loss parameters") {
    cfg.epochs = 4;
    const auto r = train(train_set, test_set, tiny_arch(), cfg, bank);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : r.log) best = std::min(best, *e.test_loss);
    REQUIRE(r.best_epoch >= 1);
    CHECK(*r.log[r.best_epoch - 1].test_loss == best);
    const std::vector<Sample> test{{&pairs[4].degraded, &pairs[4].clean}};
    CHECK(loss(test, r.params, bank) == Catch::Approx(best).epsilon(1e-12));
  }

  SECTION("log lines are JSON") {
    cfg.epochs = 1;
    const auto r = train(train_set, {}, tiny_arch(), cfg, bank);
    const auto j = r.log[0].to_json();
    CHECK(j.at("epoch") == 1);
    CHECK(j.at("test_loss").is_null());
    CHECK(j.at("mu").size() == 2);
  }
}

TEST_CASE("checkpoint container", "[unrolled]") {
  auto a = tiny_arch();
  a.shared_theta = false;
  a.residual = true;
  const auto p = init_network(a, tiny_bank(), 77);
  const auto bytes = encode_checkpoint(p, {{"note", "x"}});
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "NFSC");

  json header;
  const auto back = decode_checkpoint(bytes, &header);
  CHECK(back.arch == p.arch);
  CHECK(back.mu == p.mu);
  CHECK(back.theta == p.theta);
  CHECK(header.at("note") == "x");
  CHECK(header.at("arrays").front().at("name") == "mu");

  bool has_block1 = false;
  for (const auto& arr : p.named()) has_block1 |= arr.name.starts_with("block1.enc0.conv0");
  CHECK(has_block1);

  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_checkpoint(truncated), IoError);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), IoError);
  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(decode_checkpoint(extra), IoError);
}
