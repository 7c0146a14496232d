// Copyright 2025 The longctx Authors
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

#include "longctx/extend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace longctx {

namespace {

ExtensionPlan start_plan(ExtensionMethod method,
                         const FrequencyBasis& basis,
                         std::int64_t original_length,
                         std::int64_t target_length) {
  ExtensionPlan plan;
  plan.method = method;
  plan.original_length = original_length;
  plan.target_length = target_length;
  plan.scale = scale_factor(target_length, original_length);
  plan.effective_base = basis.base;
  plan.scaled_angles = basis.angles;
  return plan;
}

}  // namespace

std::string method_name(ExtensionMethod method) {
  switch (method) {
    case ExtensionMethod::Extrapolation: return "extrapolation";
    case ExtensionMethod::PI: return "pi";
    case ExtensionMethod::NTK: return "ntk";
    case ExtensionMethod::MRoPEpp: return "mropepp";
  }
  throw std::logic_error("method_name: unknown method");
}

ExtensionMethod method_from_name(const std::string& name) {
  if (name == "extrapolation") return ExtensionMethod::Extrapolation;
  if (name == "pi") return ExtensionMethod::PI;
  if (name == "ntk") return ExtensionMethod::NTK;
  if (name == "mropepp") return ExtensionMethod::MRoPEpp;
  throw std::invalid_argument("method_from_name: unknown extension method '" + name + "'");
}

double scale_factor(std::int64_t target_length, std::int64_t original_length) {
  if (original_length <= 0 || target_length <= 0)
    throw std::invalid_argument("scale_factor: lengths must be positive");
  if (target_length < original_length)
    throw std::invalid_argument("scale_factor: target length " + std::to_string(target_length) +
                                " is shorter than original " + std::to_string(original_length));
  return static_cast<double>(target_length) / static_cast<double>(original_length);
}

RatioProfile ratio_profile(const FrequencyBasis& basis, std::int64_t target_length) {
  if (target_length <= 0) throw std::invalid_argument("ratio_profile: target length must be positive");
  RatioProfile profile;
  profile.target_length = target_length;
  profile.ratios.resize(basis.angles.size());
  for (std::size_t d = 0; d < basis.angles.size(); ++d)
    profile.ratios[d] = static_cast<double>(target_length) / (2.0 * std::numbers::pi / basis.angles[d]);
  return profile;
}

ExtensionPlan extend_extrapolation(const FrequencyBasis& basis,
                                   std::int64_t original_length,
                                   std::int64_t target_length) {
  return start_plan(ExtensionMethod::Extrapolation, basis, original_length, target_length);
}

ExtensionPlan extend_pi(const FrequencyBasis& basis,
                        std::int64_t original_length,
                        std::int64_t target_length) {
  ExtensionPlan plan = start_plan(ExtensionMethod::PI, basis, original_length, target_length);
  for (double& angle : plan.scaled_angles) angle /= plan.scale;
  return plan;
}

ExtensionPlan extend_ntk(const FrequencyBasis& basis,
                         std::int64_t original_length,
                         std::int64_t target_length) {
  if (basis.head_dim <= 2)
    throw std::invalid_argument("extend_ntk: head_dim must exceed 2");
  ExtensionPlan plan = start_plan(ExtensionMethod::NTK, basis, original_length, target_length);
  const double dim = static_cast<double>(basis.head_dim);
  plan.effective_base = basis.base * std::pow(plan.scale, dim / (dim - 2.0));
  const double log_base = std::log(plan.effective_base);
  for (std::size_t d = 0; d < plan.scaled_angles.size(); ++d)
    plan.scaled_angles[d] = std::exp(-(2.0 * static_cast<double>(d) / dim) * log_base);
  return plan;
}

namespace {

double ramp_from_profile(const RatioProfile& profile, const DimensionLayout& layout, int block) {
  const double r_block = profile.ratios[static_cast<std::size_t>(block)];
  const double r_lo = profile.ratios[static_cast<std::size_t>(layout.height_begin())];
  const double r_hi = profile.ratios[static_cast<std::size_t>(layout.width_begin())];
  return std::clamp((r_block - r_hi) / (r_lo - r_hi), 0.0, 1.0);
}

}  // namespace

double mropepp_ramp(const FrequencyBasis& basis,
                    const DimensionLayout& layout,
                    std::int64_t target_length,
                    int block) {
  if (static_cast<std::size_t>(layout.total_blocks()) != basis.angles.size())
    throw std::invalid_argument("mropepp_ramp: layout does not match basis");
  if (block < 0 || block >= layout.total_blocks())
    throw std::out_of_range("mropepp_ramp: block index out of range");
  return ramp_from_profile(ratio_profile(basis, target_length), layout, block);
}

ExtensionPlan extend_mropepp(const FrequencyBasis& basis,
                             const DimensionLayout& layout,
                             std::int64_t original_length,
                             std::int64_t target_length) {
  if (static_cast<std::size_t>(layout.total_blocks()) != basis.angles.size())
    throw std::invalid_argument("extend_mropepp: layout expects " +
                                std::to_string(layout.total_blocks()) + " blocks but basis has " +
                                std::to_string(basis.angles.size()));
  ExtensionPlan plan = start_plan(ExtensionMethod::MRoPEpp, basis, original_length, target_length);
  const RatioProfile profile = ratio_profile(basis, target_length);
  const double inv_s = 1.0 / plan.scale;
  for (int d = layout.height_begin(); d < layout.height_end(); ++d) {
    const double gamma = ramp_from_profile(profile, layout, d);
    plan.scaled_angles[static_cast<std::size_t>(d)] =
        (inv_s + (1.0 - inv_s) * gamma) * basis.angles[static_cast<std::size_t>(d)];
  }
  for (int d = layout.width_begin(); d < layout.width_end(); ++d)
    plan.scaled_angles[static_cast<std::size_t>(d)] =
        basis.angles[static_cast<std::size_t>(d)] / plan.scale;
  return plan;
}

const BaseTable& bundled_base_table() {
  static const BaseTable table = [] {
    BaseTable t;
    t.entries = {
        {2048, 10000.0, "native 2K-context profile, default pre-training base"},
        {16384, 10000.0, "native 16K-context profile, default pre-training base"},
        {131072, 500000.0, "selected for 128K extension; optimal among the measured bases"},
    };
    t.references = {
        {131072, 4900000.0, "external blog recommendation for 128K; close to the selected base"},
    };
    t.measured = {
        {10000.0, 39.5, 41.1, 1848.29, 60.9, "default"},
        {500000.0, 43.2, 51.2, 1862.62, 61.5, "optimal"},
        {1000000.0, 43.1, 51.1, 1862.20, 61.4, ""},
    };
    return t;
  }();
  return table;
}

BaseRecommendation recommend_base(std::int64_t context_length,
                                  const std::vector<BaseRecommendation>& table) {
  if (table.empty()) throw std::invalid_argument("recommend_base: table is empty");
  if (!std::is_sorted(table.begin(), table.end(),
                      [](const BaseRecommendation& a, const BaseRecommendation& b) {
                        return a.context_length < b.context_length;
                      }))
    throw std::invalid_argument("recommend_base: table must be sorted by context_length");
  for (const BaseRecommendation& entry : table)
    if (entry.context_length >= context_length) return entry;
  return table.back();
}

std::string serialize_base_table(const BaseTable& table) {
  nlohmann::ordered_json doc;
  auto entry_json = [](const BaseRecommendation& e) {
    return nlohmann::ordered_json{{"context_length", e.context_length},
                                  {"recommended_base", e.recommended_base},
                                  {"provenance", e.provenance}};
  };
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : table.entries) doc["entries"].push_back(entry_json(e));
  doc["references"] = nlohmann::ordered_json::array();
  for (const auto& e : table.references) doc["references"].push_back(entry_json(e));
  doc["measured"] = nlohmann::ordered_json::array();
  for (const auto& m : table.measured)
    doc["measured"].push_back(nlohmann::ordered_json{{"base", m.base},
                                                     {"videomme_long", m.videomme_long},
                                                     {"videomme_avg", m.videomme_avg},
                                                     {"mme_sum", m.mme_sum},
                                                     {"mmbench", m.mmbench},
                                                     {"note", m.note}});
  return doc.dump(2);
}

std::vector<ScheduleStage> progressive_schedule(const std::vector<std::int64_t>& stage_lengths) {
  if (stage_lengths.empty())
    throw std::invalid_argument("progressive_schedule: stage list is empty");
  std::vector<ScheduleStage> stages;
  stages.reserve(stage_lengths.size());
  for (std::size_t i = 0; i < stage_lengths.size(); ++i) {
    if (stage_lengths[i] <= 0)
      throw std::invalid_argument("progressive_schedule: stage lengths must be positive");
    if (i > 0 && stage_lengths[i] <= stage_lengths[i - 1])
      throw std::invalid_argument("progressive_schedule: stage lengths must be strictly increasing");
    ScheduleStage stage;
    stage.index = static_cast<int>(i);
    stage.target_length = stage_lengths[i];
    stage.scale = i == 0 ? 1.0 : scale_factor(stage_lengths[i], stage_lengths[i - 1]);
    stages.push_back(stage);
  }
  return stages;
}

}  // namespace longctx
