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

#include "tristream/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tristream/extract.hpp"

namespace tristream {

namespace {

void fill_uniform(Mat& m, SplitMix64& rng, double scale) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-scale, scale);
}

struct Gradients {
  Mat d_proj_mv, d_proj_res, d_proj_ifr;
  Vec d_bias_mv, d_bias_res, d_bias_ifr;
  Mat d_gate_mr_w, d_gate_tri_w;
  Vec d_gate_mr_b, d_gate_tri_b;
  Mat d_head;
  double d_log_tau = 0.0;
  std::vector<Mat> d_branch_proj;

  explicit Gradients(const Stage1Model& m)
      : d_proj_mv(Mat::Zero(m.mv.proj.rows(), m.mv.proj.cols())),
        d_proj_res(Mat::Zero(m.res.proj.rows(), m.res.proj.cols())),
        d_proj_ifr(Mat::Zero(m.ifr.proj.rows(), m.ifr.proj.cols())),
        d_bias_mv(Vec::Zero(m.mv.bias.size())),
        d_bias_res(Vec::Zero(m.res.bias.size())),
        d_bias_ifr(Vec::Zero(m.ifr.bias.size())),
        d_gate_mr_w(Mat::Zero(m.gate_mr.w.rows(), m.gate_mr.w.cols())),
        d_gate_tri_w(Mat::Zero(m.gate_tri.w.rows(), m.gate_tri.w.cols())),
        d_gate_mr_b(Vec::Zero(m.gate_mr.b.size())),
        d_gate_tri_b(Vec::Zero(m.gate_tri.b.size())),
        d_head(Mat::Zero(m.head.proj.rows(), m.head.proj.cols())) {
    for (const auto& p : m.branch_proj) d_branch_proj.push_back(Mat::Zero(p.rows(), p.cols()));
  }
};

// Backward through one sigmoid gate stage. `d_fused` is the upstream
// gradient; returns gradients for both operands and accumulates gate
// parameter gradients.
void gate_backward(const Vec& a, const Vec& b, const GateResult& gr, const GateParams& gate,
                   const Vec& d_fused, Mat& d_w, Vec& d_b, Vec& d_a, Vec& d_b_operand) {
  const Eigen::Index d = a.size();
  const Vec d_gate = (d_fused.array() * (a - b).array()).matrix();
  const Vec d_z = (d_gate.array() * gr.gate.array() * (1.0 - gr.gate.array())).matrix();
  Vec cat(2 * d);
  cat << a, b;
  d_w += d_z * cat.transpose();
  d_b += d_z;
  d_a = (d_fused.array() * gr.gate.array()).matrix() + gate.w.leftCols(d).transpose() * d_z;
  d_b_operand =
      (d_fused.array() * (1.0 - gr.gate.array())).matrix() + gate.w.rightCols(d).transpose() * d_z;
}

Vec flatten_gradients(const Stage1Model& model, const Gradients& g) {
  Stage1Model shadow = model;
  shadow.mv.proj = g.d_proj_mv;
  shadow.mv.bias = g.d_bias_mv;
  shadow.res.proj = g.d_proj_res;
  shadow.res.bias = g.d_bias_res;
  shadow.ifr.proj = g.d_proj_ifr;
  shadow.ifr.bias = g.d_bias_ifr;
  shadow.gate_mr.w = g.d_gate_mr_w;
  shadow.gate_mr.b = g.d_gate_mr_b;
  shadow.gate_tri.w = g.d_gate_tri_w;
  shadow.gate_tri.b = g.d_gate_tri_b;
  shadow.head.proj = g.d_head;
  shadow.head.log_tau = g.d_log_tau;
  shadow.branch_proj = g.d_branch_proj;
  return flatten_params(shadow);
}

}  // namespace

Stage1Dataset build_motion_dataset(const MotionDatasetOptions& options) {
  if (options.classes < 2 || options.classes > 4)
    throw input_error("motion dataset: classes must be 2..4");
  if (options.per_class < 1) throw input_error("motion dataset: per_class must be >= 1");

  static const std::pair<double, double> kDirections[4] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};
  static const char* kNames[4] = {"up", "down", "left", "right"};

  Stage1Dataset data;
  data.patch_mv = 2;
  data.patch_res = options.block_size;
  data.patch_ifr = 8;
  for (int c = 0; c < options.classes; ++c) data.label_names.emplace_back(kNames[c]);

  SplitMix64 rng(options.seed);
  ExtractParams params;
  params.block_size = options.block_size;
  params.search_range = options.search_range;
  params.subpel_scale = 1;
  params.ifr_downscale = options.ifr_downscale;
  const BackendChoice proxy{BackendKind::rgb_proxy, "synthetic training corpus"};
  const Decomposition decomp = decompose(2, 2, AnchorRule::center, IntervalConvention::between);

  for (int label = 0; label < options.classes; ++label) {
    for (int i = 0; i < options.per_class; ++i) {
      SceneSpec spec;
      SceneObject obj;
      obj.shape = (rng.next() & 1) ? SceneObject::Shape::rect : SceneObject::Shape::ellipse;
      obj.size = static_cast<int>(rng.range(12, 24));
      const double speed = static_cast<double>(rng.range(1, options.search_range / 2));
      obj.vx = kDirections[label].first * speed;
      obj.vy = kDirections[label].second * speed;
      obj.intensity = static_cast<std::uint8_t>(rng.range(120, 255));
      spec.objects.push_back(obj);
      spec.background = static_cast<std::uint8_t>(rng.range(0, 60));
      spec.noise_amplitude = 0;
      spec.seed = rng.next();

      const FrameSequence seq = gen_synthetic(spec, 2, options.frame_w, options.frame_h);
      const auto intervals = extract_tristream(seq, decomp, proxy, params);
      const TriStreamInterval& tsi = intervals.front();

      Stage1Sample sample;
      sample.label = label;
      sample.x_mv = patch_mean(to_plane(tsi.mv), data.patch_mv, 2);
      sample.x_res = patch_mean(to_plane(tsi.res), data.patch_res, 1) / 255.0;
      sample.x_ifr = patch_mean(to_plane(tsi.ifr), data.patch_ifr, 1) / 255.0;
      sample.target = visual_delta(host_feature_grid(seq.frames[1], options.host_patch),
                                   host_feature_grid(seq.frames[0], options.host_patch)) /
                      255.0;
      if (sample.target.norm() < 1e-12)
        throw input_error("motion dataset: degenerate zero visual delta (label " +
                          std::to_string(label) + ", sample " + std::to_string(i) + ")");
      data.samples.push_back(std::move(sample));
    }
  }

  data.flat_mv = static_cast<int>(data.samples.front().x_mv.size());
  data.flat_res = static_cast<int>(data.samples.front().x_res.size());
  data.flat_ifr = static_cast<int>(data.samples.front().x_ifr.size());
  data.d_v = static_cast<int>(data.samples.front().target.size());
  return data;
}

Stage1Model init_stage1_model(const Stage1Config& config, const Stage1Dataset& data) {
  SplitMix64 rng(config.seed ^ 0x5eed5eed5eed5eedULL);
  const int d = config.d;

  Stage1Model m;
  auto init_branch = [&](BranchParams& b, int patch, int in_channels, int flat) {
    b.patch = patch;
    b.in_channels = in_channels;
    b.proj.resize(d, flat);
    fill_uniform(b.proj, rng, 1.0 / std::sqrt(static_cast<double>(flat)));
    // Small nonzero biases: the residual branch's inputs are near zero on
    // well-compensated scenes, and an exactly-zero code has no cosine
    // direction for the per-branch heads to train against.
    b.bias.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) b.bias[i] = rng.uniform(-0.05, 0.05);
  };
  init_branch(m.mv, data.patch_mv, 2, data.flat_mv);
  init_branch(m.res, data.patch_res, 1, data.flat_res);
  init_branch(m.ifr, data.patch_ifr, 1, data.flat_ifr);

  // Zero gate parameters start both gates at the neutral 0.5 mix.
  m.gate_mr.w = Mat::Zero(d, 2 * d);
  m.gate_mr.b = Vec::Zero(d);
  m.gate_tri.w = Mat::Zero(d, 2 * d);
  m.gate_tri.b = Vec::Zero(d);

  m.head.proj.resize(data.d_v, d);
  fill_uniform(m.head.proj, rng, 1.0 / std::sqrt(static_cast<double>(d)));
  m.head.log_tau = std::log(config.tau0);

  if (config.branch_heads) {
    for (int i = 0; i < 3; ++i) {
      Mat p(data.d_v, d);
      fill_uniform(p, rng, 1.0 / std::sqrt(static_cast<double>(d)));
      m.branch_proj.push_back(std::move(p));
    }
  }
  return m;
}

Stage1Forward stage1_forward(const Stage1Model& model, const Stage1Sample& sample) {
  Stage1Forward f;
  f.h_mv = model.mv.proj * sample.x_mv + model.mv.bias;
  f.h_res = model.res.proj * sample.x_res + model.res.bias;
  f.h_ifr = model.ifr.proj * sample.x_ifr + model.ifr.bias;
  f.mr = fuse_mr(f.h_mv, f.h_res, model.gate_mr);
  f.tri = fuse_pair(f.mr.fused, f.h_ifr, model.gate_tri);
  f.m = model.head.proj * f.tri.fused;
  return f;
}

double stage1_loss_and_grads(const Stage1Model& model, const Stage1Dataset& data,
                             const std::vector<int>& indices, const Stage1Config& config,
                             Vec* flat_grads) {
  const int b = static_cast<int>(indices.size());
  if (b < 1) throw input_error("stage1: empty batch");

  std::vector<Stage1Forward> fwd(b);
  AlignmentBatch batch;
  batch.lambda_cos = config.lambda_cos;
  batch.m.resize(b, data.d_v);
  batch.v.resize(b, data.d_v);
  for (int i = 0; i < b; ++i) {
    fwd[i] = stage1_forward(model, data.samples[indices[i]]);
    batch.m.row(i) = fwd[i].m.transpose();
    batch.v.row(i) = data.samples[indices[i]].target.transpose();
  }

  LossGrads lg;
  switch (config.loss) {
    case Stage1Loss::infonce: lg = align_loss(batch, model.head); break;
    case Stage1Loss::mse: lg = mse_loss(batch); break;
    case Stage1Loss::hybrid: lg = hybrid_loss(batch, model.head, config.hybrid_weight); break;
  }
  double total_loss = lg.loss;

  // Optional per-branch alignment heads: each branch's projected code is
  // contrastively tied to the same targets, summed with weight 1.
  std::vector<Mat> branch_dm;
  if (!model.branch_proj.empty()) {
    for (int which = 0; which < 3; ++which) {
      AlignmentBatch bb;
      bb.lambda_cos = 0.0;
      bb.m.resize(b, data.d_v);
      bb.v = batch.v;
      for (int i = 0; i < b; ++i) {
        const Vec& h = which == 0 ? fwd[i].h_mv : (which == 1 ? fwd[i].h_res : fwd[i].h_ifr);
        bb.m.row(i) = (model.branch_proj[which] * h).transpose();
      }
      LossGrads blg = infonce_loss(bb, model.head.tau());
      total_loss += blg.loss;
      lg.d_log_tau += blg.d_log_tau;
      branch_dm.push_back(std::move(blg.d_m));
    }
  }

  if (flat_grads == nullptr) return total_loss;

  Gradients g(model);
  g.d_log_tau = lg.d_log_tau;
  const Eigen::Index d = model.head.proj.cols();
  for (int i = 0; i < b; ++i) {
    const Stage1Sample& s = data.samples[indices[i]];
    const Stage1Forward& f = fwd[i];

    const Vec d_m = lg.d_m.row(i).transpose();
    g.d_head += d_m * f.tri.fused.transpose();
    Vec d_fused = model.head.proj.transpose() * d_m;

    Vec d_mr(d), d_ifr(d);
    gate_backward(f.mr.fused, f.h_ifr, f.tri, model.gate_tri, d_fused, g.d_gate_tri_w,
                  g.d_gate_tri_b, d_mr, d_ifr);
    Vec d_mv(d), d_res(d);
    gate_backward(f.h_mv, f.h_res, f.mr, model.gate_mr, d_mr, g.d_gate_mr_w, g.d_gate_mr_b, d_mv,
                  d_res);

    if (!model.branch_proj.empty()) {
      const Vec* hs[3] = {&f.h_mv, &f.h_res, &f.h_ifr};
      Vec* ds[3] = {&d_mv, &d_res, &d_ifr};
      for (int which = 0; which < 3; ++which) {
        const Vec d_bm = branch_dm[which].row(i).transpose();
        g.d_branch_proj[which] += d_bm * hs[which]->transpose();
        *ds[which] += model.branch_proj[which].transpose() * d_bm;
      }
    }

    g.d_proj_mv += d_mv * s.x_mv.transpose();
    g.d_bias_mv += d_mv;
    g.d_proj_res += d_res * s.x_res.transpose();
    g.d_bias_res += d_res;
    g.d_proj_ifr += d_ifr * s.x_ifr.transpose();
    g.d_bias_ifr += d_ifr;
  }

  *flat_grads = flatten_gradients(model, g);
  return total_loss;
}

Vec flatten_params(const Stage1Model& model) {
  std::vector<const Mat*> mats = {&model.mv.proj, &model.res.proj, &model.ifr.proj,
                                  &model.gate_mr.w, &model.gate_tri.w, &model.head.proj};
  std::vector<const Vec*> vecs = {&model.mv.bias, &model.res.bias, &model.ifr.bias,
                                  &model.gate_mr.b, &model.gate_tri.b};
  Eigen::Index total = 1;  // log_tau
  for (const Mat* m : mats) total += m->size();
  for (const Vec* v : vecs) total += v->size();
  for (const Mat& p : model.branch_proj) total += p.size();

  Vec flat(total);
  Eigen::Index o = 0;
  for (const Mat* m : mats) {
    flat.segment(o, m->size()) = Eigen::Map<const Vec>(m->data(), m->size());
    o += m->size();
  }
  for (const Vec* v : vecs) {
    flat.segment(o, v->size()) = *v;
    o += v->size();
  }
  for (const Mat& p : model.branch_proj) {
    flat.segment(o, p.size()) = Eigen::Map<const Vec>(p.data(), p.size());
    o += p.size();
  }
  flat[o++] = model.head.log_tau;
  return flat;
}

void assign_params(Stage1Model& model, const Vec& flat) {
  std::vector<Mat*> mats = {&model.mv.proj, &model.res.proj, &model.ifr.proj,
                            &model.gate_mr.w, &model.gate_tri.w, &model.head.proj};
  std::vector<Vec*> vecs = {&model.mv.bias, &model.res.bias, &model.ifr.bias,
                            &model.gate_mr.b, &model.gate_tri.b};
  Eigen::Index o = 0;
  for (Mat* m : mats) {
    Eigen::Map<Vec>(m->data(), m->size()) = flat.segment(o, m->size());
    o += m->size();
  }
  for (Vec* v : vecs) {
    *v = flat.segment(o, v->size());
    o += v->size();
  }
  for (Mat& p : model.branch_proj) {
    Eigen::Map<Vec>(p.data(), p.size()) = flat.segment(o, p.size());
    o += p.size();
  }
  model.head.log_tau = flat[o++];
  if (o != flat.size()) throw input_error("assign_params: size mismatch");
}

Stage1Result train_stage1(const Stage1Config& config, const Stage1Dataset& data) {
  if (config.steps < 1) throw input_error("train_stage1: steps must be >= 1");
  if (data.size() < 2) throw input_error("train_stage1: need at least 2 samples");

  Stage1Model model = init_stage1_model(config, data);
  Vec params = flatten_params(model);
  Vec velocity = Vec::Zero(params.size());

  SplitMix64 shuffle_rng(config.seed ^ 0xba7c4e11ULL);
  const int n = data.size();
  const int batch = (config.batch <= 0 || config.batch >= n) ? n : config.batch;
  if (batch < 2 && config.loss != Stage1Loss::mse)
    throw input_error("train_stage1: contrastive losses need batch >= 2");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;  // force an initial shuffle for minibatch mode

  TrainHistory history;
  history.steps.reserve(config.steps);

  for (int step = 0; step < config.steps; ++step) {
    std::vector<int> indices;
    if (batch == n) {
      indices = order;
    } else {
      if (cursor + batch > static_cast<std::size_t>(n)) {
        for (int i = n - 1; i > 0; --i)
          std::swap(order[i], order[shuffle_rng.below(static_cast<std::uint64_t>(i) + 1)]);
        cursor = 0;
      }
      indices.assign(order.begin() + cursor, order.begin() + cursor + batch);
      cursor += batch;
    }

    Vec grads;
    const double loss = stage1_loss_and_grads(model, data, indices, config, &grads);
    if (!std::isfinite(loss))
      throw input_error("train_stage1: aborted at step " + std::to_string(step) +
                        ": non-finite loss");

    velocity = config.momentum * velocity - config.lr * grads;
    params += velocity;
    assign_params(model, params);

    TrainStep stat;
    stat.loss = loss;
    stat.mean_cosine = mean_cosine(model, data);
    stat.tau = model.head.tau();
    history.steps.push_back(stat);
  }
  return {std::move(model), std::move(history)};
}

double mean_cosine(const Stage1Model& model, const Stage1Dataset& data) {
  double sum = 0.0;
  for (const auto& sample : data.samples) {
    const Vec m = stage1_forward(model, sample).m;
    const double mn = m.norm();
    const double vn = sample.target.norm();
    if (mn < 1e-12 || vn < 1e-12) continue;
    sum += m.dot(sample.target) / (mn * vn);
  }
  return sum / data.size();
}

double class_angular_separation(const Stage1Model& model, const Stage1Dataset& data) {
  const int classes = static_cast<int>(data.label_names.size());
  std::vector<Vec> dirs(classes, Vec::Zero(data.d_v));
  for (const auto& sample : data.samples) {
    const Vec m = stage1_forward(model, sample).m;
    const double n = m.norm();
    if (n > 1e-12) dirs[sample.label] += m / n;
  }
  double sum = 0.0;
  int pairs = 0;
  for (int a = 0; a < classes; ++a) {
    for (int c = a + 1; c < classes; ++c) {
      const double na = dirs[a].norm();
      const double nc = dirs[c].norm();
      if (na < 1e-12 || nc < 1e-12) continue;
      const double cosab = std::clamp(dirs[a].dot(dirs[c]) / (na * nc), -1.0, 1.0);
      sum += std::acos(cosab);
      ++pairs;
    }
  }
  return pairs > 0 ? sum / pairs : 0.0;
}

std::vector<GateReportRow> model_gate_report(const Stage1Model& model, const Stage1Dataset& data) {
  std::vector<std::pair<FusedEmbedding, std::string>> samples;
  samples.reserve(data.samples.size());
  for (const auto& sample : data.samples) {
    const Stage1Forward f = stage1_forward(model, sample);
    FusedEmbedding emb;
    emb.h_fused = f.tri.fused;
    emb.g_mr = f.mr.gate;
    emb.g_tri = f.tri.gate;
    samples.emplace_back(std::move(emb), data.label_names[sample.label]);
  }
  return gate_report(samples);
}

Stage1FileConfig parse_stage1_config(const std::string& text) {
  Stage1FileConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw format_error("config line " + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto z = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, z - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "steps") cfg.train.steps = std::stoi(value);
      else if (key == "lr") cfg.train.lr = std::stod(value);
      else if (key == "momentum") cfg.train.momentum = std::stod(value);
      else if (key == "batch") cfg.train.batch = std::stoi(value);
      else if (key == "d") cfg.train.d = std::stoi(value);
      else if (key == "lambda_cos") cfg.train.lambda_cos = std::stod(value);
      else if (key == "hybrid_weight") cfg.train.hybrid_weight = std::stod(value);
      else if (key == "seed") { cfg.train.seed = std::stoull(value); cfg.data.seed = cfg.train.seed + 1; }
      else if (key == "branch_heads") cfg.train.branch_heads = (value == "1" || value == "true");
      else if (key == "tau0") cfg.train.tau0 = std::stod(value);
      else if (key == "classes") cfg.data.classes = std::stoi(value);
      else if (key == "per_class") cfg.data.per_class = std::stoi(value);
      else if (key == "loss") {
        if (value == "infonce") cfg.train.loss = Stage1Loss::infonce;
        else if (value == "mse") cfg.train.loss = Stage1Loss::mse;
        else if (value == "hybrid") cfg.train.loss = Stage1Loss::hybrid;
        else throw format_error("config line " + std::to_string(line_no) + ": unknown loss '" + value + "'");
      } else {
        throw format_error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw format_error("config line " + std::to_string(line_no) + ": bad value '" + value + "'");
    } catch (const std::out_of_range&) {
      throw format_error("config line " + std::to_string(line_no) + ": value out of range");
    }
  }
  return cfg;
}

}  // namespace tristream
