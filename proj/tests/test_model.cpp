#include <doctest.h>

#include <cmath>
#include <cstring>
#include <memory>
#include <utility>
#include <vector>

#include "egostereo/model/config.hpp"
#include "egostereo/model/heatmap_net.hpp"
#include "egostereo/model/pose_net.hpp"
#include "egostereo/nn/gradcheck.hpp"
#include "egostereo/skeleton/skeleton.hpp"

using namespace egostereo;
namespace md = egostereo::model;

namespace {

md::ModelConfig tiny_config() {
  md::ModelConfig c;
  c.width = 16;
  c.image_size = 32;
  c.heatmap_joints = 3;
  c.joint_count = 4;
  c.t_window = 2;
  c.skip = 1;
  c.heads = 2;
  c.decoder_layers = 1;
  return c;
}

template <class S>
nn::Tensor<S> random_tensor(Rng& rng, std::vector<int> shape, double scale) {
  nn::Tensor<S> t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i)
    t.data[i] = static_cast<S>(rng.normal() * scale);
  return t;
}

template <class S>
bool same_bytes(const nn::Tensor<S>& a, const nn::Tensor<S>& b) {
  return a.same_shape(b) &&
         std::memcmp(a.ptr(), b.ptr(), sizeof(S) * a.size()) == 0;
}

auto tiny_edges() {
  return std::make_shared<const std::vector<std::pair<int, int>>>(
      std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
}

template <class S>
md::PoseNetInputs<S> random_inputs(const md::ModelConfig& cfg, int batch,
                                   Rng& rng,
                                   std::vector<std::uint8_t> missing) {
  md::PoseNetInputs<S> in;
  const int hm = cfg.heatmap_size();
  const int n = batch * cfg.t_window * 2;
  in.heatmaps = random_tensor<S>(rng, {n, cfg.heatmap_joints, hm, hm}, 0.5);
  in.depth = random_tensor<S>(rng, {n, 2, hm, hm}, 0.5);
  in.features = random_tensor<S>(
      rng, {batch * cfg.t_window, 2 * cfg.width, cfg.depth_grid(),
            cfg.depth_grid()},
      0.5);
  in.depth_missing = std::move(missing);
  return in;
}

}  // namespace

TEST_CASE("model config derives the published geometry") {
  const md::ModelConfig c;  // defaults describe the full-scale model
  CHECK_NOTHROW(c.validate());
  CHECK(c.hidden() == 256);
  CHECK(c.mlp_dim() == 1024);
  CHECK(c.heatmap_size() == 64);
  CHECK(c.hm_grid() == 16);
  CHECK(c.depth_grid() == 8);
  CHECK(c.queries() == 80);
  CHECK(c.tokens_per_view_frame() == 16 * 16 + 8 * 8);
  CHECK(c.memory_tokens() == 3200);

  const md::ModelConfig back = md::config_from_json(md::config_to_json(c));
  CHECK(back.width == c.width);
  CHECK(back.image_size == c.image_size);
  CHECK(back.heatmap_joints == c.heatmap_joints);
  CHECK(back.joint_count == c.joint_count);
  CHECK(back.t_window == c.t_window);
  CHECK(back.skip == c.skip);
  CHECK(back.heads == c.heads);
  CHECK(back.decoder_layers == c.decoder_layers);
  CHECK(back.lambda_pose == c.lambda_pose);
  CHECK(back.lambda_cos == c.lambda_cos);
  CHECK(back.use_depth == c.use_depth);
  CHECK(back.use_padding_mask == c.use_padding_mask);

  auto reject = [](auto mutate) {
    md::ModelConfig bad;
    mutate(bad);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  };
  reject([](md::ModelConfig& m) { m.width = 24; });
  reject([](md::ModelConfig& m) { m.image_size = 40; });
  reject([](md::ModelConfig& m) { m.t_window = 1; });
  reject([](md::ModelConfig& m) { m.skip = 0; });
  reject([](md::ModelConfig& m) {
    m.width = 16;
    m.heads = 3;
  });
  reject([](md::ModelConfig& m) { m.decoder_layers = 0; });
  reject([](md::ModelConfig& m) { m.lambda_pose = 0.0; });
  reject([](md::ModelConfig& m) { m.lambda_cos = -1.0; });

  nlohmann::json j = md::config_to_json(c);
  j.erase("width");
  CHECK_THROWS_AS(md::config_from_json(j), DataError);
}

TEST_CASE("sinusoidal position table encodes the grid exactly") {
  const auto pe = md::sinusoidal_2d<double>(3, 4, 8);
  REQUIRE(pe.dim(0) == 12);
  REQUIRE(pe.dim(1) == 8);
  const double* r = pe.ptr() + (2 * 4 + 3) * 8;  // row for y=2, x=3
  CHECK(r[0] == doctest::Approx(std::sin(3.0)).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(std::cos(3.0)).epsilon(1e-12));
  CHECK(r[2] == doctest::Approx(std::sin(2.0)).epsilon(1e-12));
  CHECK(r[3] == doctest::Approx(std::cos(2.0)).epsilon(1e-12));
  bool bounded = true;
  for (std::int64_t i = 0; i < pe.size(); ++i)
    bounded = bounded && pe.data[i] >= -1.0 && pe.data[i] <= 1.0;
  CHECK(bounded);
  CHECK_THROWS_AS(md::sinusoidal_2d<double>(2, 2, 6), ShapeError);
}

TEST_CASE("heatmap net shapes and determinism") {
  const auto cfg = tiny_config();
  nn::ParamStore<float> ps1, ps2;
  {
    Rng r1(5), r2(5);
    md::heatmap_net_init<float>(ps1, cfg, r1);
    md::heatmap_net_init<float>(ps2, cfg, r2);
  }
  bool params_equal = true;
  for (const auto& [name, e] : ps1.entries())
    params_equal = params_equal && same_bytes(e.value, ps2.at(name));
  CHECK(params_equal);

  Rng rng(11);
  const auto x =
      random_tensor<float>(rng, {2, 3, cfg.image_size, cfg.image_size}, 0.5);
  nn::Tensor<float> first;
  for (int rep = 0; rep < 2; ++rep) {
    nn::Tape<float> t;
    const auto p = nn::bind_params(t, ps1, false);
    const auto out = md::heatmap_net_forward(t, p, cfg, t.input(x));
    const auto& hm = t.val(out.heatmaps);
    REQUIRE(hm.shape == std::vector<int>({2, 3, 8, 8}));
    REQUIRE(t.val(out.feature).shape == std::vector<int>({2, 16, 1, 1}));
    if (rep == 0)
      first = hm;
    else
      CHECK(same_bytes(first, hm));
  }
}

TEST_CASE("heatmap net gradients match finite differences") {
  const auto cfg = tiny_config();
  nn::ParamStore<double> ps;
  Rng rng(3);
  md::heatmap_net_init<double>(ps, cfg, rng);
  const auto x = random_tensor<double>(rng, {1, 3, 32, 32}, 0.5);
  const auto target = random_tensor<double>(rng, {1, 3, 8, 8}, 0.5);

  auto eval = [&]() {
    nn::Tape<double> t;
    const auto p = nn::bind_params(t, ps, false);
    const auto out = md::heatmap_net_forward(t, p, cfg, t.input(x));
    return t.val(nn::mse_loss(t, out.heatmaps, target)).data[0];
  };

  nn::Tape<double> t;
  const auto p = nn::bind_params(t, ps, true);
  const auto out = md::heatmap_net_forward(t, p, cfg, t.input(x));
  t.backward(nn::mse_loss(t, out.heatmaps, target));

  Rng pick(77);
  for (const char* name : {"hm.e1.w", "hm.e5.b", "hm.d2.w", "hm.out.w"}) {
    INFO(name);
    const double err =
        nn::gradcheck_max_err(eval, ps.at(name), t.grad(p.at(name)), pick, 6);
    CHECK(err < 1e-6);
  }
}

TEST_CASE("pose net output shape and determinism") {
  const auto cfg = tiny_config();
  nn::ParamStore<float> ps;
  Rng rng(9);
  md::pose_net_init<float>(ps, cfg, rng);
  const auto in =
      random_inputs<float>(cfg, 2, rng, {0, 1, 0, 0, 1, 0, 0, 0});
  nn::Tensor<float> first;
  for (int rep = 0; rep < 2; ++rep) {
    nn::Tape<float> t;
    const auto p = nn::bind_params(t, ps, false);
    const auto out = md::pose_net_forward(t, p, cfg, in);
    CHECK(out.batch == 2);
    const auto& pr = t.val(out.pred);
    REQUIRE(pr.shape == std::vector<int>({2 * 2 * 4, 3}));
    REQUIRE(t.val(out.memory).dim(0) == 2 * cfg.memory_tokens());
    REQUIRE(t.val(out.memory).dim(1) == cfg.hidden());
    if (rep == 0)
      first = pr;
    else
      CHECK(same_bytes(first, pr));
  }
}

TEST_CASE("masked depth slots cannot influence the pose output") {
  const auto cfg = tiny_config();
  nn::ParamStore<float> ps;
  Rng rng(13);
  md::pose_net_init<float>(ps, cfg, rng);
  const std::vector<std::uint8_t> missing = {0, 1, 1, 0};
  auto in_zero = random_inputs<float>(cfg, 1, rng, missing);
  const int hm = cfg.heatmap_size();
  const std::int64_t plane = 2LL * hm * hm;
  for (int s = 0; s < 4; ++s)
    if (missing[s])
      std::fill(in_zero.depth.ptr() + s * plane,
                in_zero.depth.ptr() + (s + 1) * plane, 0.0f);
  auto in_junk = in_zero;
  for (int s = 0; s < 4; ++s)
    if (missing[s])
      std::fill(in_junk.depth.ptr() + s * plane,
                in_junk.depth.ptr() + (s + 1) * plane, 7.5f);

  auto run = [&](const md::PoseNetInputs<float>& in,
                 const md::ModelConfig& c) {
    nn::Tape<float> t;
    const auto p = nn::bind_params(t, ps, false);
    return t.val(md::pose_net_forward(t, p, c, in).pred);
  };

  // With the padding mask, the masked tokens are excluded exactly: the
  // output is byte-identical no matter what the missing slots contain.
  const auto a = run(in_zero, cfg);
  const auto b = run(in_junk, cfg);
  CHECK(same_bytes(a, b));

  // Without it the decoder attends to whatever sits in those slots.
  md::ModelConfig nomask = cfg;
  nomask.use_padding_mask = false;
  const auto c_zero = run(in_zero, nomask);
  const auto c_junk = run(in_junk, nomask);
  CHECK(!same_bytes(c_zero, c_junk));

  // Without depth tokens at all, even available slots are ignored.
  md::ModelConfig nodepth = cfg;
  nodepth.use_depth = false;
  auto in_all_junk = in_zero;
  in_all_junk.depth.data.setConstant(7.5f);
  CHECK(same_bytes(run(in_zero, nodepth), run(in_all_junk, nodepth)));
}

TEST_CASE("pose loss closed forms") {
  const auto& skel = SkeletonDefinition::canonical();
  auto edges = std::make_shared<const std::vector<std::pair<int, int>>>(
      skel.bone_edges);
  REQUIRE(edges->size() == 15);

  md::ModelConfig cfg;  // lambda_pose 0.1, lambda_cos 0.01, 16 joints
  cfg.t_window = 2;

  Rng rng(21);
  std::vector<Eigen::Vector3d> joints(16);
  for (auto& j : joints)
    j = Eigen::Vector3d(rng.normal() * 0.3, rng.normal() * 0.3,
                        rng.normal() * 0.3);
  auto window_gt = [&](int batch, int t_window) {
    nn::Tensor<double> g({batch * t_window * 16, 3});
    auto M = g.mat2d();
    for (int r = 0; r < g.dim(0); ++r) M.row(r) = joints[r % 16].transpose();
    return g;
  };

  SUBCASE("identical poses score the bone-cosine floor with zero gradient") {
    const auto gt = window_gt(1, 2);
    nn::Tape<double> t;
    const int pn = t.input(gt, true);
    const int loss = md::pose_sequence_loss(t, pn, gt, cfg, edges);
    // per frame: 0.1 * (0 - 0.01 * 15) = -0.015; frame weights 1 + 1
    CHECK(t.val(loss).data[0] == doctest::Approx(-0.030).epsilon(1e-12));
    t.backward(loss);
    // The position term vanishes exactly; the cosine term only up to the
    // rounding of sqrt(x)^2 vs x, so allow a few ulps.
    double worst = 0.0;
    for (std::int64_t i = 0; i < t.grad(pn).size(); ++i)
      worst = std::max(worst, std::abs(t.grad(pn).data[i]));
    CHECK(worst < 1e-12);
  }

  SUBCASE("a uniform 5 mm offset scores 5 mm of mean error per frame") {
    const auto gt = window_gt(1, 2);
    auto pred = gt;
    for (int r = 0; r < pred.dim(0); ++r) pred.mat2d()(r, 0) += 0.005;
    nn::Tape<double> t;
    const int loss =
        md::pose_sequence_loss(t, t.input(pred), gt, cfg, edges);
    // per frame: 0.1 * (5 - 0.01 * 15) = 0.485; two unit-weight frames
    CHECK(t.val(loss).data[0] == doctest::Approx(0.970).epsilon(1e-9));
  }

  SUBCASE("earlier frames share weight 1/(T-1)") {
    md::ModelConfig c3 = cfg;
    c3.t_window = 3;
    const auto gt = window_gt(1, 3);
    auto offset_frame = [&](int k) {
      auto pred = gt;
      for (int j = 0; j < 16; ++j) pred.mat2d()(k * 16 + j, 0) += 0.005;
      nn::Tape<double> t;
      return t
          .val(md::pose_sequence_loss(t, t.input(pred), gt, c3, edges))
          .data[0];
    };
    // weights 0.5, 0.5, 1.0 over per-frame losses -0.015 / 0.485
    CHECK(offset_frame(2) == doctest::Approx(0.470).epsilon(1e-9));
    CHECK(offset_frame(1) == doctest::Approx(0.220).epsilon(1e-9));
  }

  SUBCASE("zero-length bones are skipped") {
    auto gt = window_gt(1, 2);
    for (int k = 0; k < 2; ++k)
      gt.mat2d().row(k * 16 + 0) = gt.mat2d().row(k * 16 + 1);  // head==neck
    nn::Tape<double> t;
    const int loss = md::pose_sequence_loss(t, t.input(gt), gt, cfg, edges);
    // only 14 bones contribute: 2 * 0.1 * (0 - 0.01 * 14)
    CHECK(t.val(loss).data[0] == doctest::Approx(-0.028).epsilon(1e-12));
  }

  SUBCASE("windows are averaged over the batch") {
    const auto gt = window_gt(2, 2);
    auto pred = gt;
    for (int j = 0; j < 16; ++j)
      pred.mat2d()(1 * 2 * 16 + 1 * 16 + j, 0) += 0.005;  // b=1, last frame
    nn::Tape<double> t;
    const int loss =
        md::pose_sequence_loss(t, t.input(pred), gt, cfg, edges);
    CHECK(t.val(loss).data[0] == doctest::Approx(0.220).epsilon(1e-9));
  }

  SUBCASE("shape mismatches are rejected") {
    const auto gt = window_gt(1, 2);
    nn::Tape<double> t;
    nn::Tensor<double> short_gt({16, 3});
    CHECK_THROWS_AS(
        md::pose_sequence_loss(t, t.input(gt), short_gt, cfg, edges),
        ShapeError);
    nn::Tensor<double> odd({17, 3});
    CHECK_THROWS_AS(md::pose_sequence_loss(t, t.input(odd), odd, cfg, edges),
                    ShapeError);
  }
}

TEST_CASE("pose loss gradient matches finite differences") {
  md::ModelConfig cfg = tiny_config();  // 4 joints, T=2
  auto edges = tiny_edges();
  Rng rng(31);
  const auto gt = random_tensor<double>(rng, {2 * 2 * 4, 3}, 0.3);
  auto pred = random_tensor<double>(rng, {2 * 2 * 4, 3}, 0.3);

  auto eval = [&]() {
    nn::Tape<double> t;
    return t.val(md::pose_sequence_loss(t, t.input(pred), gt, cfg, edges))
        .data[0];
  };
  nn::Tape<double> t;
  const int pn = t.input(pred, true);
  t.backward(md::pose_sequence_loss(t, pn, gt, cfg, edges));
  Rng pick(1);
  CHECK(nn::gradcheck_max_err(eval, pred, t.grad(pn), pick, -1) < 1e-6);
}

TEST_CASE("pose net end-to-end gradients match finite differences") {
  const auto cfg = tiny_config();
  auto edges = tiny_edges();
  nn::ParamStore<double> ps;
  Rng rng(41);
  md::pose_net_init<double>(ps, cfg, rng);
  const auto in = random_inputs<double>(cfg, 1, rng, {0, 1, 0, 0});
  const auto gt = random_tensor<double>(rng, {1 * 2 * 4, 3}, 0.3);

  auto eval = [&]() {
    nn::Tape<double> t;
    const auto p = nn::bind_params(t, ps, false);
    const auto out = md::pose_net_forward(t, p, cfg, in);
    return t.val(md::pose_sequence_loss(t, out.pred, gt, cfg, edges))
        .data[0];
  };

  nn::Tape<double> t;
  const auto p = nn::bind_params(t, ps, true);
  const auto out = md::pose_net_forward(t, p, cfg, in);
  t.backward(md::pose_sequence_loss(t, out.pred, gt, cfg, edges));

  Rng pick(5);
  for (const char* name :
       {"p3.hm1.w", "p3.dp5.w", "p3.fuse.w", "p3.ctx.w", "p3.emb.joint",
        "p3.emb.frame", "p3.emb.stream", "p3.l0.sq.w", "p3.l0.ck.w",
        "p3.l0.cv.b", "p3.l0.f1.w", "p3.l0.ln2.g", "p3.head3.w"}) {
    INFO(name);
    const double err =
        nn::gradcheck_max_err(eval, ps.at(name), t.grad(p.at(name)), pick, 5);
    CHECK(err < 1e-5);
  }
}

TEST_CASE("pose net rejects malformed inputs") {
  const auto cfg = tiny_config();
  nn::ParamStore<float> ps;
  Rng rng(1);
  md::pose_net_init<float>(ps, cfg, rng);
  const auto good = random_inputs<float>(cfg, 1, rng, {0, 0, 0, 0});

  auto expect_throw = [&](md::PoseNetInputs<float> in) {
    nn::Tape<float> t;
    const auto p = nn::bind_params(t, ps, false);
    CHECK_THROWS_AS(md::pose_net_forward(t, p, cfg, in), ShapeError);
  };
  {
    auto bad = good;
    bad.features = nn::Tensor<float>({2, 5, 1, 1});
    expect_throw(bad);
  }
  {
    auto bad = good;
    bad.depth_missing.pop_back();
    expect_throw(bad);
  }
  {
    auto bad = good;
    bad.heatmaps = nn::Tensor<float>({6, 3, 8, 8});
    expect_throw(bad);
  }
}
