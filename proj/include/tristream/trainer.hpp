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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tristream/alignment.hpp"

namespace tristream {

enum class Stage1Loss { infonce, mse, hybrid };

struct Stage1Config {
  int steps = 500;
  double lr = 0.005;
  double momentum = 0.9;
  int batch = 0;  // <= 0 means full batch
  int d = 64;
  double lambda_cos = 0.1;
  Stage1Loss loss = Stage1Loss::infonce;
  double hybrid_weight = 0.5;
  std::uint64_t seed = 0;
  bool branch_heads = false;  // per-branch alignment projections, summed with weight 1
  // Starting at tau ~ 1 keeps the early softmax mild; colder starts let the
  // temperature inflate toward the uniform plateau before alignment forms.
  double tau0 = 1.0;
};

/// One interval's precomputed branch inputs (patch means are fixed during
/// training, so they are assembled once) and its visual-delta target.
struct Stage1Sample {
  Vec x_mv;
  Vec x_res;
  Vec x_ifr;
  Vec target;
  int label = 0;
};

struct Stage1Dataset {
  std::vector<Stage1Sample> samples;
  int flat_mv = 0;
  int flat_res = 0;
  int flat_ifr = 0;
  int d_v = 0;
  int patch_mv = 2;
  int patch_res = 16;
  int patch_ifr = 8;
  std::vector<std::string> label_names;

  int size() const { return static_cast<int>(samples.size()); }
};

struct Stage1Model {
  BranchParams mv;
  BranchParams res;
  BranchParams ifr;
  GateParams gate_mr;
  GateParams gate_tri;
  AlignmentHead head;
  std::vector<Mat> branch_proj;  // 3 entries when branch heads are on, else empty
};

struct TrainStep {
  double loss = 0.0;
  double mean_cosine = 0.0;
  double tau = 0.0;
};

struct TrainHistory {
  std::vector<TrainStep> steps;
};

struct Stage1Result {
  Stage1Model model;
  TrainHistory history;
};

/// The synthetic motion corpus for desk-scale training: single-object scenes
/// translating up, down, left, or right, run through the RGB-proxy tri-stream
/// extraction. Branch inputs and host-feature targets are scaled into unit
/// range at assembly.
struct MotionDatasetOptions {
  int classes = 4;
  int per_class = 64;
  int frame_w = 64;
  int frame_h = 64;
  std::uint64_t seed = 7;
  int block_size = 16;
  int search_range = 8;
  // Smaller than the smallest object: an object whose edges sit in one host
  // patch can translate without changing any patch mean, which would zero
  // the target.
  int host_patch = 8;
  int ifr_downscale = 2;
};

Stage1Dataset build_motion_dataset(const MotionDatasetOptions& options);

Stage1Model init_stage1_model(const Stage1Config& config, const Stage1Dataset& data);

/// Forward pass of one sample through branches, both gates, and the
/// alignment head.
struct Stage1Forward {
  Vec h_mv, h_res, h_ifr;
  GateResult mr;
  GateResult tri;
  Vec m;  // projected motion code, d_v
};

Stage1Forward stage1_forward(const Stage1Model& model, const Stage1Sample& sample);

/// Batch loss and analytic gradients with respect to every trainable tensor,
/// flattened in the same order as flatten_params. Used by the training loop
/// and by the finite-difference tests.
double stage1_loss_and_grads(const Stage1Model& model, const Stage1Dataset& data,
                             const std::vector<int>& indices, const Stage1Config& config,
                             Vec* flat_grads);

Vec flatten_params(const Stage1Model& model);
void assign_params(Stage1Model& model, const Vec& flat);

/// Plain SGD with momentum. Deterministic for a fixed seed; aborts with the
/// step index if the loss goes non-finite.
Stage1Result train_stage1(const Stage1Config& config, const Stage1Dataset& data);

double mean_cosine(const Stage1Model& model, const Stage1Dataset& data);

/// Mean pairwise angle (radians) between per-label mean directions of the
/// projected motion codes.
double class_angular_separation(const Stage1Model& model, const Stage1Dataset& data);

/// Effective tri-stream gate weights per label for the trained model.
std::vector<GateReportRow> model_gate_report(const Stage1Model& model, const Stage1Dataset& data);

/// Flat key=value trainer configuration (one pair per line, '#' comments).
/// Recognized keys: steps, lr, momentum, batch, d, lambda_cos, loss,
/// hybrid_weight, seed, branch_heads, tau0, classes, per_class.
struct Stage1FileConfig {
  Stage1Config train;
  MotionDatasetOptions data;
};

Stage1FileConfig parse_stage1_config(const std::string& text);

}  // namespace tristream
