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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "longctx/attention.hpp"
#include "longctx/chatml.hpp"
#include "longctx/extend.hpp"
#include "longctx/haystack.hpp"
#include "longctx/hybrid.hpp"
#include "longctx/packer.hpp"

namespace py = pybind11;
using namespace longctx;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size())
      throw std::invalid_argument("matrix rows must share one width");
    m.set_row(r, rows[r]);
  }
  return m;
}

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows;
  rows.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row(r));
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "rotary position embedding math, context extension transforms, "
            "and long-context data planning";

  // ---- rotary core ----------------------------------------------------------
  py::class_<FrequencyBasis>(m, "FrequencyBasis")
      .def_readonly("head_dim", &FrequencyBasis::head_dim)
      .def_readonly("base", &FrequencyBasis::base)
      .def_readonly("angles", &FrequencyBasis::angles);

  m.def("make_basis", &make_basis, py::arg("head_dim"), py::arg("base"));
  m.def("wavelength", &wavelength, py::arg("basis"), py::arg("d"));
  m.def(
      "rotation_matrix",
      [](const FrequencyBasis& basis, std::int64_t position) {
        return matrix_to_rows(rotation_matrix(basis, position));
      },
      py::arg("basis"), py::arg("position"));
  m.def("apply_rotary",
        py::overload_cast<const FrequencyBasis&, std::int64_t, const std::vector<double>&>(
            &apply_rotary),
        py::arg("basis"), py::arg("position"), py::arg("v"));

  // ---- multimodal positions --------------------------------------------------
  py::class_<DimensionLayout>(m, "DimensionLayout")
      .def_readonly("granularity", &DimensionLayout::granularity)
      .def("temporal_end", &DimensionLayout::temporal_end)
      .def("height_begin", &DimensionLayout::height_begin)
      .def("height_end", &DimensionLayout::height_end)
      .def("width_begin", &DimensionLayout::width_begin)
      .def("width_end", &DimensionLayout::width_end)
      .def("total_blocks", &DimensionLayout::total_blocks);

  m.def("layout_for_head_dim", &layout_for_head_dim, py::arg("head_dim"));
  m.def("segment_name", &segment_name, py::arg("layout"), py::arg("block"));

  py::class_<Position3D>(m, "Position3D")
      .def(py::init([](std::int64_t t, std::int64_t h, std::int64_t w) {
             return Position3D{t, h, w};
           }),
           py::arg("t"), py::arg("h"), py::arg("w"))
      .def_readonly("t", &Position3D::t)
      .def_readonly("h", &Position3D::h)
      .def_readonly("w", &Position3D::w)
      .def("__eq__", [](const Position3D& a, const Position3D& b) { return a == b; })
      .def("__repr__", [](const Position3D& p) {
        return "Position3D(t=" + std::to_string(p.t) + ", h=" + std::to_string(p.h) +
               ", w=" + std::to_string(p.w) + ")";
      });

  py::class_<ModalitySpan>(m, "ModalitySpan")
      .def_static("text", &ModalitySpan::text, py::arg("tokens"))
      .def_static("image", &ModalitySpan::image, py::arg("grid_h"), py::arg("grid_w"))
      .def_static("video", &ModalitySpan::video, py::arg("frames"), py::arg("grid_h"),
                  py::arg("grid_w"))
      .def("token_count", &ModalitySpan::token_count);

  m.def("assign_positions", &assign_positions, py::arg("spans"));
  m.def("apply_mrope",
        py::overload_cast<const FrequencyBasis&, const DimensionLayout&, const Position3D&,
                          const std::vector<double>&>(&apply_mrope),
        py::arg("basis"), py::arg("layout"), py::arg("pos"), py::arg("v"));
  m.def("mrope_score",
        py::overload_cast<const FrequencyBasis&, const DimensionLayout&, const Position3D&,
                          const Position3D&, const std::vector<double>&,
                          const std::vector<double>&>(&mrope_score),
        py::arg("basis"), py::arg("layout"), py::arg("pos_m"), py::arg("pos_n"), py::arg("q"),
        py::arg("k"));

  // ---- extension methods -----------------------------------------------------
  py::enum_<ExtensionMethod>(m, "ExtensionMethod")
      .value("EXTRAPOLATION", ExtensionMethod::Extrapolation)
      .value("PI", ExtensionMethod::PI)
      .value("NTK", ExtensionMethod::NTK)
      .value("MROPEPP", ExtensionMethod::MRoPEpp);

  py::class_<ExtensionPlan>(m, "ExtensionPlan")
      .def_readonly("method", &ExtensionPlan::method)
      .def_readonly("original_length", &ExtensionPlan::original_length)
      .def_readonly("target_length", &ExtensionPlan::target_length)
      .def_readonly("scale", &ExtensionPlan::scale)
      .def_readonly("effective_base", &ExtensionPlan::effective_base)
      .def_readonly("scaled_angles", &ExtensionPlan::scaled_angles);

  m.def("scale_factor", &scale_factor, py::arg("target_length"), py::arg("original_length"));
  m.def("extend_extrapolation", &extend_extrapolation, py::arg("basis"),
        py::arg("original_length"), py::arg("target_length"));
  m.def("extend_pi", &extend_pi, py::arg("basis"), py::arg("original_length"),
        py::arg("target_length"));
  m.def("extend_ntk", &extend_ntk, py::arg("basis"), py::arg("original_length"),
        py::arg("target_length"));
  m.def("extend_mropepp", &extend_mropepp, py::arg("basis"), py::arg("layout"),
        py::arg("original_length"), py::arg("target_length"));
  m.def("mropepp_ramp", &mropepp_ramp, py::arg("basis"), py::arg("layout"),
        py::arg("target_length"), py::arg("block"));

  py::class_<BaseRecommendation>(m, "BaseRecommendation")
      .def_readonly("context_length", &BaseRecommendation::context_length)
      .def_readonly("recommended_base", &BaseRecommendation::recommended_base)
      .def_readonly("provenance", &BaseRecommendation::provenance);

  m.def("bundled_base_table_entries",
        [] { return bundled_base_table().entries; });
  m.def("serialize_bundled_base_table", [] { return serialize_base_table(bundled_base_table()); });
  m.def("recommend_base", &recommend_base, py::arg("context_length"), py::arg("table"));

  py::class_<ScheduleStage>(m, "ScheduleStage")
      .def_readonly("index", &ScheduleStage::index)
      .def_readonly("target_length", &ScheduleStage::target_length)
      .def_readonly("scale", &ScheduleStage::scale);

  m.def("progressive_schedule", &progressive_schedule, py::arg("stage_lengths"));

  // ---- toy attention and haystack ---------------------------------------------
  m.def(
      "attention",
      [](const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& wq,
         const std::vector<std::vector<double>>& wk, const std::vector<std::vector<double>>& wv,
         const std::vector<Position3D>& positions, const std::optional<ExtensionPlan>& rope_plan,
         const std::optional<DimensionLayout>& mrope_layout) {
        AttentionInput input;
        input.X = matrix_from_rows(x);
        input.Wq = matrix_from_rows(wq);
        input.Wk = matrix_from_rows(wk);
        input.Wv = matrix_from_rows(wv);
        input.positions = positions;
        if (rope_plan && mrope_layout)
          input.mode = MRopeEmbedding{*rope_plan, *mrope_layout};
        else if (rope_plan)
          input.mode = RopeEmbedding{*rope_plan};
        const AttentionResult result = attention(input);
        return py::make_tuple(matrix_to_rows(result.output), matrix_to_rows(result.weights));
      },
      py::arg("x"), py::arg("wq"), py::arg("wk"), py::arg("wv"), py::arg("positions"),
      py::arg("plan") = std::nullopt, py::arg("layout") = std::nullopt,
      "single-head attention; returns (output, weights). Pass plan for 1D rotary, "
      "plan+layout for the three-segment form.");

  m.def("text_positions", &text_positions, py::arg("count"), py::arg("start") = 0);

  m.def(
      "run_haystack",
      [](std::int64_t num_items, std::int64_t tokens_per_item, int head_dim,
         std::optional<std::int64_t> needle_index, int trials, std::uint64_t seed,
         const std::optional<ExtensionPlan>& plan, const std::optional<DimensionLayout>& layout) {
        HaystackConfig config;
        config.num_items = num_items;
        config.tokens_per_item = tokens_per_item;
        config.head_dim = head_dim;
        config.needle_index = needle_index;
        config.trials = trials;
        config.seed = seed;
        if (plan && layout)
          config.mode = MRopeEmbedding{*plan, *layout};
        else if (plan)
          config.mode = RopeEmbedding{*plan};
        return run_haystack(config);
      },
      py::arg("num_items"), py::arg("tokens_per_item") = 64, py::arg("head_dim") = 64,
      py::arg("needle_index") = std::nullopt, py::arg("trials") = 200, py::arg("seed") = 0,
      py::arg("plan") = std::nullopt, py::arg("layout") = std::nullopt);

  m.def(
      "effective_length",
      [](const std::vector<std::pair<std::int64_t, double>>& points, double threshold) {
        HaystackCurve curve;
        for (const auto& [items, rate] : points) curve.points.push_back({items, rate});
        return effective_length(curve, threshold);
      },
      py::arg("curve"), py::arg("threshold"),
      "curve is a list of (context_items, success_rate) pairs");

  // ---- data packing ------------------------------------------------------------
  py::enum_<SampleCategory>(m, "SampleCategory")
      .value("TEXT_LONG", SampleCategory::TextLong)
      .value("IMAGE_SHORT_INSTRUCTION", SampleCategory::ImageShortInstruction)
      .value("IMAGE_INTERLEAVE", SampleCategory::ImageInterleave)
      .value("VIDEO", SampleCategory::Video);

  py::class_<Turn>(m, "Turn")
      .def(py::init([](std::string role, std::string content, int attachments) {
             return Turn{std::move(role), std::move(content), attachments};
           }),
           py::arg("role"), py::arg("content"), py::arg("attachments") = 0)
      .def_readonly("role", &Turn::role)
      .def_readonly("content", &Turn::content)
      .def_readonly("attachments", &Turn::attachments)
      .def("__eq__", [](const Turn& a, const Turn& b) { return a == b; });

  py::class_<Sample>(m, "Sample")
      .def(py::init([](std::string id, SampleCategory category, std::int64_t token_len,
                       std::vector<Turn> turns) {
             Sample s{std::move(id), category, token_len, std::move(turns)};
             validate_sample(s);
             return s;
           }),
           py::arg("id"), py::arg("category"), py::arg("token_len"), py::arg("turns"))
      .def_readonly("id", &Sample::id)
      .def_readonly("category", &Sample::category)
      .def_readonly("token_len", &Sample::token_len)
      .def_readonly("turns", &Sample::turns);

  py::class_<PackEntry>(m, "PackEntry")
      .def_readonly("sample_ids", &PackEntry::sample_ids)
      .def_readonly("total_len", &PackEntry::total_len);

  py::class_<PackManifest>(m, "PackManifest")
      .def_readonly("target_length", &PackManifest::target_length)
      .def_readonly("packs", &PackManifest::packs)
      .def_readonly("leftovers", &PackManifest::leftovers)
      .def_readonly("warnings", &PackManifest::warnings)
      .def("to_json", [](const PackManifest& manifest) { return manifest_to_json(manifest); });

  m.def(
      "classify_length",
      [](const Sample& sample, std::int64_t threshold) {
        return classify_length(sample, threshold) == LengthClass::Long ? "long" : "short";
      },
      py::arg("sample"), py::arg("threshold") = 8192);
  m.def("pack_samples", &pack_samples, py::arg("samples"), py::arg("target_length"));
  m.def("serialize_chatml", &serialize_chatml, py::arg("pack"), py::arg("samples"));
  m.def(
      "parse_chatml",
      [](const std::string& text) {
        const std::vector<Turn> turns = parse_chatml(text);
        std::vector<py::tuple> out;
        out.reserve(turns.size());
        for (const Turn& turn : turns)
          out.push_back(py::make_tuple(turn.role, turn.content, turn.attachments));
        return out;
      },
      py::arg("text"), "returns a list of (role, content, attachments) tuples");
  m.def("video_frame_budget", &video_frame_budget, py::arg("duration_seconds"), py::arg("fps"));

  // ---- hybrid-resolution planning -----------------------------------------------
  py::class_<HybridConfig>(m, "HybridConfig")
      .def(py::init([](std::int64_t group_size, std::int64_t hi_res_tokens,
                       std::int64_t compression_ratio) {
             return HybridConfig{group_size, hi_res_tokens, compression_ratio};
           }),
           py::arg("group_size"), py::arg("hi_res_tokens"), py::arg("compression_ratio"))
      .def_readonly("group_size", &HybridConfig::group_size)
      .def_readonly("hi_res_tokens", &HybridConfig::hi_res_tokens)
      .def_readonly("compression_ratio", &HybridConfig::compression_ratio);

  py::class_<FramePlan>(m, "FramePlan")
      .def_readonly("frames", &FramePlan::frames)
      .def_readonly("groups", &FramePlan::groups)
      .def_readonly("per_frame_tokens", &FramePlan::per_frame_tokens)
      .def_readonly("total_tokens", &FramePlan::total_tokens)
      .def_readonly("avg_tokens_per_frame", &FramePlan::avg_tokens_per_frame);

  m.def("plan_hybrid", &plan_hybrid, py::arg("frames"), py::arg("config"));
  m.def(
      "tradeoff_table",
      [](std::int64_t budget, const std::vector<std::int64_t>& frames) {
        std::vector<std::pair<std::int64_t, std::int64_t>> rows;
        for (const TradeoffRow& row : tradeoff_table(budget, frames))
          rows.emplace_back(row.frames, row.tokens_per_frame);
        return rows;
      },
      py::arg("token_budget"), py::arg("frame_counts"),
      "returns (frames, tokens_per_frame) pairs");

  py::class_<BudgetComparison>(m, "BudgetComparison")
      .def_readonly("uniform_total", &BudgetComparison::uniform_total)
      .def_readonly("hybrid_total", &BudgetComparison::hybrid_total)
      .def_readonly("hybrid_avg_tokens_per_frame", &BudgetComparison::hybrid_avg_tokens_per_frame)
      .def_readonly("hi_res_tokens", &BudgetComparison::hi_res_tokens)
      .def_readonly("uniform_tokens_per_frame", &BudgetComparison::uniform_tokens_per_frame)
      .def_readonly("total_ratio", &BudgetComparison::total_ratio);

  m.def("compare_budgets", &compare_budgets, py::arg("uniform_frames"),
        py::arg("uniform_tokens_per_frame"), py::arg("hybrid_frames"), py::arg("config"));
}
