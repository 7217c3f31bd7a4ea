// Copyright 2026 The Tristream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line with
// its measured values and wall time; the process exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "me_oracle.hpp"
#include "tristream/extract.hpp"
#include "tristream/inject.hpp"
#include "tristream/stats.hpp"
#include "tristream/trainer.hpp"

using namespace tristream;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name, double budget_ms,
               const std::function<std::string()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  try {
    detail = body();
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (ok && detail.rfind("FAIL", 0) != 0 && ms > budget_ms) {
    ok = false;
    detail = "exceeded the " + std::to_string(budget_ms) + " ms runtime budget";
  }
  if (!ok || detail.rfind("FAIL", 0) == 0) {
    ++g_failures;
    std::printf("FAIL %2d %-34s %s  [%.1f ms]\n", number, name.c_str(), detail.c_str(), ms);
  } else {
    std::printf("PASS %2d %-34s %s  [%.1f ms]\n", number, name.c_str(), detail.c_str(), ms);
  }
}

std::string fail(const std::string& why) { return "FAIL: " + why; }

struct Scene {
  FrameSequence seq;
  int vx = 0;
  int vy = 0;
  ScenePlacement placement;
  int size = 0;
};

Scene random_translation_scene(SplitMix64& rng) {
  Scene s;
  s.vx = static_cast<int>(rng.range(-6, 6));
  s.vy = static_cast<int>(rng.range(-6, 6));
  s.size = static_cast<int>(rng.range(12, 30));
  SceneSpec spec;
  SceneObject obj;
  obj.shape = (rng.next() & 1) ? SceneObject::Shape::rect : SceneObject::Shape::ellipse;
  obj.size = s.size;
  obj.vx = s.vx;
  obj.vy = s.vy;
  obj.intensity = static_cast<std::uint8_t>(rng.range(140, 255));
  spec.objects.push_back(obj);
  spec.background = static_cast<std::uint8_t>(rng.range(0, 80));
  spec.seed = rng.next();
  s.seq = gen_synthetic(spec, 2, 64, 64, &s.placement);
  return s;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TRISTREAM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Stage1Config acceptance_train_config(Stage1Loss loss, std::uint64_t seed) {
  Stage1Config cfg;
  cfg.steps = 500;
  cfg.lr = 0.005;
  cfg.momentum = 0.0;  // strict smoothed-loss decrease needs the non-oscillatory regime
  cfg.batch = 0;
  cfg.d = 64;
  cfg.lambda_cos = 0.1;
  cfg.loss = loss;
  cfg.seed = seed;
  cfg.tau0 = 1.0;
  return cfg;
}

Stage1Dataset acceptance_dataset(std::uint64_t seed) {
  MotionDatasetOptions opt;
  opt.classes = 4;
  opt.per_class = 64;  // 256 intervals
  opt.seed = seed;
  return build_motion_dataset(opt);
}

}  // namespace

int main() {
  std::printf("acceptance: compressed-domain tri-stream pipeline\n");

  criterion(1, "token-budget arithmetic", 1.0, [] {
    const TokenBudget full = token_budget(8, 1396, 8, 64, 0);
    const TokenBudget dense = token_budget(32, 1396, 0, 0, 0);
    if (full.total != 11680) return fail("full.total = " + std::to_string(full.total));
    if (dense.total != 44672) return fail("dense.total = " + std::to_string(dense.total));
    const double ratio = static_cast<double>(dense.total) / static_cast<double>(full.total);
    if (ratio < 3.6) return fail("ratio = " + std::to_string(ratio));
    std::ostringstream s;
    s << "total=11680 dense=44672 ratio=" << ratio;
    return s.str();
  });

  criterion(2, "Wilson CI reproduction", 1.0, [] {
    const auto [lo1, hi1] = wilson_interval({1653, 2700, 0.95});
    const auto [lo2, hi2] = wilson_interval({1715, 2700, 0.95});
    const double tol = 0.0005;  // +-0.05 percentage points
    if (std::abs(lo1 - 0.5937) > tol || std::abs(hi1 - 0.6304) > tol)
      return fail("1653/2700 gave [" + std::to_string(lo1) + ", " + std::to_string(hi1) + "]");
    if (std::abs(lo2 - 0.6168) > tol || std::abs(hi2 - 0.6531) > tol)
      return fail("1715/2700 gave [" + std::to_string(lo2) + ", " + std::to_string(hi2) + "]");
    std::ostringstream s;
    s.precision(4);
    s << std::fixed << "[" << lo1 << "," << hi1 << "] [" << lo2 << "," << hi2 << "]";
    return s.str();
  });

  criterion(3, "ME oracle equivalence", 30'000.0, [] {
    SplitMix64 rng(2026);
    int blocks = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const Scene s = random_translation_scene(rng);
      const MotionField got = estimate_motion(s.seq.frames[0], s.seq.frames[1], 16, 8, 1);
      const MotionField want = oracle::full_field(s.seq.frames[0], s.seq.frames[1], 16, 8);
      if (got.mv != want.mv) return fail("scene " + std::to_string(trial) + " diverges from the oracle");
      blocks += static_cast<int>(got.mv.size());
    }
    return "50 scenes, " + std::to_string(blocks) + " blocks, 100% oracle match";
  });

  criterion(4, "residual conservation", 10'000.0, [] {
    SplitMix64 rng(4051);
    long strict = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const Scene s = random_translation_scene(rng);
      const MotionField field = estimate_motion(s.seq.frames[0], s.seq.frames[1], 16, 8, 1);
      const ResidualMap res = compute_residual(s.seq.frames[1], warp(s.seq.frames[0], field));
      long res_energy = 0, diff_energy = 0;
      for (const auto v : res.data) res_energy += std::abs(v);
      const ResidualMap diff = compute_residual(s.seq.frames[1], s.seq.frames[0]);
      for (const auto v : diff.data) diff_energy += std::abs(v);
      if (res_energy > diff_energy)
        return fail("scene " + std::to_string(trial) + ": residual " + std::to_string(res_energy) +
                    " > frame diff " + std::to_string(diff_energy));
      if (res_energy == diff_energy) {
        for (const auto& mv : field.mv)
          if (mv != std::pair<std::int16_t, std::int16_t>{0, 0})
            return fail("scene " + std::to_string(trial) + ": equality with nonzero motion");
      } else {
        ++strict;
      }
    }
    return "50 scenes, bound holds (" + std::to_string(strict) + " strict)";
  });

  criterion(5, "gradient fidelity", 60'000.0, [] {
    SplitMix64 rng(77);
    double worst = 0;
    int batches = 0;
    for (int round = 0; round < 17 && batches < 100; ++round) {
      for (const int b : {2, 4, 8}) {
        if (batches >= 100) break;
        for (const int d : {4, 16}) {
          if (batches >= 100) break;
          AlignmentBatch batch;
          batch.m.resize(b, d);
          batch.v.resize(b, d);
          for (Eigen::Index i = 0; i < batch.m.size(); ++i) {
            batch.m.data()[i] = rng.uniform(-2, 2);
            batch.v.data()[i] = rng.uniform(-2, 2);
          }
          batch.lambda_cos = 0.1;
          const double log_tau = rng.uniform(-1.5, 0.5);
          AlignmentHead head{Mat(), log_tau};

          struct Probe {
            const char* name;
            std::function<LossGrads()> at_base;
            std::function<double(const AlignmentBatch&, double)> eval;
          };
          const std::vector<Probe> probes = {
              {"infonce", [&] { return infonce_loss(batch, std::exp(log_tau)); },
               [](const AlignmentBatch& p, double lt) { return infonce_loss(p, std::exp(lt)).loss; }},
              {"align", [&] { return align_loss(batch, head); },
               [](const AlignmentBatch& p, double lt) { return align_loss(p, {Mat(), lt}).loss; }},
              {"mse", [&] { return mse_loss(batch); },
               [](const AlignmentBatch& p, double) { return mse_loss(p).loss; }},
              {"hybrid", [&] { return hybrid_loss(batch, head); },
               [](const AlignmentBatch& p, double lt) { return hybrid_loss(p, {Mat(), lt}).loss; }},
          };
          for (const auto& probe : probes) {
            const LossGrads lg = probe.at_base();
            Vec analytic(batch.m.size() + batch.v.size() + 1);
            analytic << Eigen::Map<const Vec>(lg.d_m.data(), lg.d_m.size()),
                Eigen::Map<const Vec>(lg.d_v.data(), lg.d_v.size()), lg.d_log_tau;
            Vec x(analytic.size());
            x << Eigen::Map<const Vec>(batch.m.data(), batch.m.size()),
                Eigen::Map<const Vec>(batch.v.data(), batch.v.size()), log_tau;
            auto eval = [&](const Vec& p) {
              AlignmentBatch pb;
              pb.m = Eigen::Map<const Mat>(p.data(), b, d);
              pb.v = Eigen::Map<const Mat>(p.data() + b * d, b, d);
              pb.lambda_cos = 0.1;
              return probe.eval(pb, p[p.size() - 1]);
            };
            worst = std::max(worst, grad_check(eval, x, analytic, 1e-5));
          }
          ++batches;
        }
      }
    }
    if (worst > 1e-4)
      return fail("max relative error " + std::to_string(worst) + " over " +
                  std::to_string(batches) + " batches");
    std::ostringstream s;
    s << batches << " batches x 4 losses, max rel err " << worst;
    return s.str();
  });

  criterion(6, "closed-form loss identities", 1'000.0, [] {
    // sigma(0) gate: exact mean fusion.
    const int d = 16;
    GateParams zero;
    zero.w = Mat::Zero(d, 2 * d);
    zero.b = Vec::Zero(d);
    SplitMix64 rng(66);
    Vec a(d), b(d);
    for (int i = 0; i < d; ++i) {
      a[i] = rng.uniform(-3, 3);
      b[i] = rng.uniform(-3, 3);
    }
    const GateResult g = fuse_mr(a, b, zero);
    const double gate_err = (g.fused - 0.5 * (a + b)).lpNorm<Eigen::Infinity>();
    if (gate_err > 1e-12) return fail("sigma(0) fusion error " + std::to_string(gate_err));

    // Uniform-softmax limit.
    for (const int bs : {2, 4, 8}) {
      AlignmentBatch batch;
      batch.m.resize(bs, 6);
      batch.v.resize(bs, 6);
      for (Eigen::Index i = 0; i < batch.m.size(); ++i) {
        batch.m.data()[i] = rng.uniform(-2, 2);
        batch.v.data()[i] = rng.uniform(-2, 2);
      }
      const double loss = infonce_loss(batch, 1e6).loss;
      if (std::abs(loss - std::log(bs)) > 1e-3)
        return fail("uniform limit off at B=" + std::to_string(bs));
    }

    // B=2 orthonormal identical pairs.
    AlignmentBatch pair;
    pair.m = Mat::Identity(2, 2);
    pair.v = pair.m;
    const double expect = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
    const double got = infonce_loss(pair, 1.0).loss;
    if (std::abs(got - expect) > 1e-9) return fail("B=2 value " + std::to_string(got));

    std::ostringstream s;
    s << "gate exact, uniform limit <=1e-3, B=2 pair -log(e/(e+1)) ok";
    return s.str();
  });

  criterion(7, "stage-1 convergence (500 steps)", 300'000.0, [] {
    const Stage1Dataset data = acceptance_dataset(2);
    const Stage1Result r = train_stage1(acceptance_train_config(Stage1Loss::infonce, 1), data);

    const double final_cos = r.history.steps.back().mean_cosine;
    if (final_cos < 0.9) return fail("final mean cosine " + std::to_string(final_cos));

    std::vector<double> losses;
    for (const auto& st : r.history.steps) losses.push_back(st.loss);
    const int w = 50;
    double prev = 0;
    for (std::size_t i = 0; i + w <= losses.size(); ++i) {
      const double sm = std::accumulate(losses.begin() + i, losses.begin() + i + w, 0.0) / w;
      if (i > 0 && sm >= prev)
        return fail("smoothed loss not strictly decreasing at window " + std::to_string(i));
      prev = sm;
    }
    std::ostringstream s;
    s.precision(4);
    s << std::fixed << "256 intervals, cosine " << final_cos << ", smoothed loss strictly down";
    return s.str();
  });

  criterion(8, "InfoNCE vs MSE separation (5 seeds)", 900'000.0, [] {
    double sum_nce = 0, sum_mse = 0;
    std::ostringstream detail;
    detail.precision(3);
    detail << std::fixed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Stage1Dataset data = acceptance_dataset(seed + 1);
      const Stage1Result nce = train_stage1(acceptance_train_config(Stage1Loss::infonce, seed), data);
      const Stage1Result mse = train_stage1(acceptance_train_config(Stage1Loss::mse, seed), data);
      const double s_nce = class_angular_separation(nce.model, data);
      const double s_mse = class_angular_separation(mse.model, data);
      sum_nce += s_nce;
      sum_mse += s_mse;
    }
    const double mean_nce = sum_nce / 5, mean_mse = sum_mse / 5;
    if (!(mean_nce > mean_mse))
      return fail("mean separation InfoNCE " + std::to_string(mean_nce) + " vs MSE " +
                  std::to_string(mean_mse));
    detail << "mean separation: InfoNCE " << mean_nce << " rad > MSE " << mean_mse << " rad";
    return detail.str();
  });

  criterion(9, "injection contract (exhaustive)", 10'000.0, [] {
    SplitMix64 rng(99);
    const int d = 3;
    long layouts = 0;
    for (int s = 1; s <= 8; ++s) {
      EmbeddingSeq seq;
      seq.e.resize(s, d);
      for (Eigen::Index i = 0; i < seq.e.size(); ++i) seq.e.data()[i] = rng.uniform(-1, 1);
      seq.frozen.assign(static_cast<std::size_t>(s), false);
      const Mat before = seq.e;

      // Every strictly increasing position list of length 0..min(4, s).
      std::vector<int> positions;
      std::function<std::string(int)> recurse = [&](int start) -> std::string {
        if (positions.size() <= 4) {
          PlaceholderLayout layout;
          layout.seq_len = s;
          layout.positions = positions;
          Mat tokens(static_cast<Eigen::Index>(positions.size()), d);
          for (Eigen::Index i = 0; i < tokens.size(); ++i) tokens.data()[i] = rng.uniform(2, 3);

          const InjectResult got = scatter_inject(seq, layout, tokens);
          // Naive copy oracle.
          Mat want = seq.e;
          for (std::size_t j = 0; j < positions.size(); ++j)
            want.row(positions[j]) = tokens.row(static_cast<Eigen::Index>(j));
          if (got.seq.e != want) return std::string("mismatch at S=") + std::to_string(s);
          if (seq.e != before) return std::string("input mutated at S=") + std::to_string(s);
          int provenance_motion = 0;
          for (const int p : got.provenance)
            if (p >= 0) ++provenance_motion;
          if (provenance_motion != static_cast<int>(positions.size()))
            return std::string("provenance wrong at S=") + std::to_string(s);
          ++layouts;
        }
        if (positions.size() == 4) return std::string();
        for (int next = start; next < s; ++next) {
          positions.push_back(next);
          const std::string err = recurse(next + 1);
          positions.pop_back();
          if (!err.empty()) return err;
        }
        return std::string();
      };
      const std::string err = recurse(0);
      if (!err.empty()) return fail(err);
    }
    return std::to_string(layouts) + " layouts vs naive oracle, purity bytewise";
  });

  criterion(10, "format round-trips + exit codes", 10'000.0, [] {
    SplitMix64 rng(1010);
    const auto dir = std::filesystem::temp_directory_path() / "tristream_acceptance";
    std::filesystem::create_directories(dir);

    for (int trial = 0; trial < 20; ++trial) {
      const int frames = 2 + static_cast<int>(rng.below(6));
      const int anchors = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(frames)));
      SceneSpec spec;
      SceneObject obj;
      obj.size = static_cast<int>(rng.range(12, 24));
      obj.vx = static_cast<double>(rng.range(-3, 3));
      obj.vy = static_cast<double>(rng.range(-3, 3));
      obj.intensity = 200;
      spec.objects.push_back(obj);
      spec.seed = rng.next();
      FrameSequence seq;
      try {
        seq = gen_synthetic(spec, frames, 64, 64);
      } catch (const input_error&) {
        spec.objects[0].vx = 0;
        spec.objects[0].vy = 0;
        seq = gen_synthetic(spec, frames, 64, 64);
      }
      const Decomposition decomp = decompose(frames, anchors);
      ExtractParams params;
      params.subpel_scale = (trial % 3 == 0) ? 2 : 1;
      const auto intervals =
          extract_tristream(seq, decomp, {BackendKind::rgb_proxy, "acceptance"}, params);

      const auto trs_a = (dir / "a.trs").string();
      const auto trs_b = (dir / "b.trs").string();
      write_trs(intervals, trs_a);
      write_trs(read_trs(trs_a), trs_b);
      std::ifstream fa(trs_a, std::ios::binary), fb(trs_b, std::ios::binary);
      const std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
      const std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
      if (sa != sb) return fail("trs bytes changed across a round trip");

      // Sidecar CSV round trip over the first interval's field.
      const auto records = field_to_sidecar(intervals[0].mv, 1);
      const MotionField back = sidecar_to_field(parse_sidecar(write_sidecar(records)), 1,
                                                64, 64, intervals[0].mv.block_size);
      if (back.mv != intervals[0].mv.mv) return fail("sidecar round trip changed the field");
      if (write_sidecar(records) != write_sidecar(parse_sidecar(write_sidecar(records))))
        return fail("sidecar text not stable under reparse");
    }

    // Documented exit codes through the CLI.
    const auto bad_trs = (dir / "bad.trs").string();
    {
      std::ofstream out(bad_trs, std::ios::binary);
      out << "TRS1 this is not a container";
    }
    if (run_cli("report --trs " + bad_trs) != 2) return fail("malformed .trs should exit 2");
    if (run_cli("report --trs " + (dir / "absent.trs").string()) != 1)
      return fail("missing artifact should exit 1");
    if (run_cli("budget") != 0) return fail("budget should exit 0");
    return std::string("20 pipelines bit-exact; exit codes 0/1/2 verified");
  });

  criterion(11, "backend routing table", 1.0, [] {
    if (route_backend("mpeg4", true, true).kind != BackendKind::native_fixed_gop)
      return fail("mpeg4+native");
    for (const char* tag : {"h264", "hevc", "vp9", "av1"})
      if (route_backend(tag, false, true).kind != BackendKind::sidecar_export)
        return fail(std::string(tag) + "+sidecar");
    for (const char* tag : {"vp6f", "unknown"}) {
      for (const bool native : {false, true})
        for (const bool sidecar : {false, true})
          if (route_backend(tag, native, sidecar).kind != BackendKind::rgb_proxy)
            return fail(std::string(tag) + " should proxy");
    }
    if (route_backend("h264", true, false).kind != BackendKind::rgb_proxy)
      return fail("h264 without sidecar should proxy");
    return std::string("mpeg4->native, h264/hevc/vp9/av1->sidecar, vp6f/unknown->proxy");
  });

  std::printf("%s: %d/11 criteria passed\n", g_failures == 0 ? "OK" : "FAILED", 11 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
