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

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "longctx/chatml.hpp"
#include "longctx/extend.hpp"
#include "longctx/haystack.hpp"
#include "longctx/hybrid.hpp"
#include "longctx/packer.hpp"

namespace {

using namespace longctx;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 12 significant digits, '.' decimal separator, locale-independent.
std::string fmt12(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file '" + path + "'");
  out << content;
  if (!out) throw IoError("failed writing output file '" + path + "'");
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::string line;
  if (path == "-") {
    while (std::getline(std::cin, line)) lines.push_back(line);
    return lines;
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file '" + path + "'");
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file '" + path + "'");
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

std::vector<Sample> read_samples(const std::string& path) {
  std::vector<Sample> samples;
  std::size_t line_no = 0;
  for (const std::string& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      Sample sample = sample_from_json_line(line);
      for (Turn& turn : sample.turns) turn.content = sanitize_content(turn.content);
      samples.push_back(std::move(sample));
    } catch (const std::exception& e) {
      throw std::invalid_argument("bad sample on line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

ModalitySpan parse_span(const std::string& spec) {
  const auto fail = [&]() -> ModalitySpan {
    throw std::invalid_argument("bad span '" + spec +
                                "'; expected text:N, image:HxW, or video:FxHxW");
  };
  const std::size_t colon = spec.find(':');
  if (colon == std::string::npos) return fail();
  const std::string kind = spec.substr(0, colon);
  std::vector<std::int64_t> dims;
  std::stringstream rest(spec.substr(colon + 1));
  std::string part;
  while (std::getline(rest, part, 'x')) {
    try {
      std::size_t used = 0;
      dims.push_back(std::stoll(part, &used));
      if (used != part.size()) return fail();
    } catch (const std::exception&) {
      return fail();
    }
  }
  if (kind == "text" && dims.size() == 1) return ModalitySpan::text(dims[0]);
  if (kind == "image" && dims.size() == 2) return ModalitySpan::image(dims[0], dims[1]);
  if (kind == "video" && dims.size() == 3) return ModalitySpan::video(dims[0], dims[1], dims[2]);
  return fail();
}

ExtensionPlan build_plan(ExtensionMethod method, const FrequencyBasis& basis,
                         std::int64_t orig_len, std::int64_t target_len) {
  switch (method) {
    case ExtensionMethod::Extrapolation: return extend_extrapolation(basis, orig_len, target_len);
    case ExtensionMethod::PI: return extend_pi(basis, orig_len, target_len);
    case ExtensionMethod::NTK: return extend_ntk(basis, orig_len, target_len);
    case ExtensionMethod::MRoPEpp:
      return extend_mropepp(basis, layout_for_head_dim(basis.head_dim), orig_len, target_len);
  }
  throw std::logic_error("unknown method");
}

// ---- subcommand option bags -------------------------------------------------

struct BasisOpts {
  int head_dim = 64;
  double base = 10000.0;
  std::int64_t target_len = 0;
  std::string format = "csv";
  std::string output;
};

struct ExtendOpts {
  std::string method;
  int head_dim = 128;
  double base = 10000.0;
  std::int64_t orig_len = 16384;
  std::int64_t target_len = 131072;
  std::string format = "csv";
  std::string output;
};

struct PositionsOpts {
  std::vector<std::string> spans;
  std::string output;
};

struct HaystackOpts {
  std::vector<std::int64_t> items = {16, 32, 64, 128};
  std::int64_t tokens_per_item = 64;
  int head_dim = 64;
  std::int64_t needle = -1;  // -1 = random depth per trial
  int trials = 200;
  std::uint64_t seed = 0;
  std::string method = "none";
  double base = 10000.0;
  std::int64_t orig_len = 16384;
  std::int64_t target_len = 131072;
  double threshold = 0.6;
  std::string format = "csv";
  std::string output;
};

struct PackOpts {
  std::string input;
  std::int64_t target_len = 0;
  std::uint64_t seed = 0;
  std::string recipe_path;
  std::int64_t budget = 0;
  std::string text_dir;
  std::string output;
};

struct ScheduleOpts {
  std::string input;
  std::vector<std::int64_t> stages = {8192, 32768, 65536, 131072};
  std::string output;
};

struct HybridOpts {
  std::int64_t frames = 1024;
  std::int64_t group_size = 4;
  std::int64_t hi_res_tokens = 240;
  std::int64_t compression = 3;
  std::string output;
};

struct TradeoffOpts {
  std::int64_t budget = 122880;
  std::vector<std::int64_t> frames = {128, 256, 512, 768, 1024};
  std::string format = "csv";
  std::string output;
};

// ---- subcommand runners -----------------------------------------------------

void run_analyze_basis(const BasisOpts& opts) {
  const FrequencyBasis basis = make_basis(opts.head_dim, opts.base);
  const bool with_ratio = opts.target_len > 0;
  std::optional<RatioProfile> profile;
  if (with_ratio) profile = ratio_profile(basis, opts.target_len);

  if (opts.format == "json") {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t d = 0; d < basis.angles.size(); ++d) {
      nlohmann::ordered_json row{{"d", d},
                                 {"theta", basis.angles[d]},
                                 {"lambda", wavelength(basis, static_cast<int>(d))}};
      if (with_ratio) row["r"] = profile->ratios[d];
      rows.push_back(row);
    }
    write_output(opts.output, rows.dump(2) + "\n");
    return;
  }
  std::string csv = with_ratio ? "d,theta,lambda,r\n" : "d,theta,lambda\n";
  for (std::size_t d = 0; d < basis.angles.size(); ++d) {
    csv += std::to_string(d) + "," + fmt12(basis.angles[d]) + "," +
           fmt12(wavelength(basis, static_cast<int>(d)));
    if (with_ratio) csv += "," + fmt12(profile->ratios[d]);
    csv += "\n";
  }
  write_output(opts.output, csv);
}

void run_extend(const ExtendOpts& opts) {
  const FrequencyBasis basis = make_basis(opts.head_dim, opts.base);
  const ExtensionMethod method = method_from_name(opts.method);
  const ExtensionPlan plan = build_plan(method, basis, opts.orig_len, opts.target_len);
  const RatioProfile profile = ratio_profile(basis, opts.target_len);

  std::optional<DimensionLayout> layout;
  if (opts.head_dim % 16 == 0) layout = layout_for_head_dim(opts.head_dim);

  auto segment = [&](std::size_t d) {
    return layout ? segment_name(*layout, static_cast<int>(d)) : std::string("-");
  };

  if (opts.format == "json") {
    nlohmann::ordered_json doc;
    doc["method"] = method_name(plan.method);
    doc["original_length"] = plan.original_length;
    doc["target_length"] = plan.target_length;
    doc["scale"] = plan.scale;
    doc["effective_base"] = plan.effective_base;
    doc["rows"] = nlohmann::ordered_json::array();
    for (std::size_t d = 0; d < basis.angles.size(); ++d)
      doc["rows"].push_back(nlohmann::ordered_json{{"d", d},
                                                   {"theta", basis.angles[d]},
                                                   {"theta_prime", plan.scaled_angles[d]},
                                                   {"lambda", wavelength(basis, static_cast<int>(d))},
                                                   {"r", profile.ratios[d]},
                                                   {"segment", segment(d)}});
    write_output(opts.output, doc.dump(2) + "\n");
    return;
  }
  std::string csv = "d,theta,theta_prime,lambda,r,segment\n";
  for (std::size_t d = 0; d < basis.angles.size(); ++d)
    csv += std::to_string(d) + "," + fmt12(basis.angles[d]) + "," + fmt12(plan.scaled_angles[d]) +
           "," + fmt12(wavelength(basis, static_cast<int>(d))) + "," + fmt12(profile.ratios[d]) +
           "," + segment(d) + "\n";
  write_output(opts.output, csv);
}

void run_positions(const PositionsOpts& opts) {
  std::vector<ModalitySpan> spans;
  spans.reserve(opts.spans.size());
  for (const std::string& spec : opts.spans) spans.push_back(parse_span(spec));
  const std::vector<Position3D> positions = assign_positions(spans);

  std::string out;
  for (std::size_t i = 0; i < positions.size(); ++i)
    out += nlohmann::ordered_json{{"index", i},
                                  {"t", positions[i].t},
                                  {"h", positions[i].h},
                                  {"w", positions[i].w}}
               .dump() +
           "\n";
  write_output(opts.output, out);
}

void run_haystack_cli(const HaystackOpts& opts) {
  HaystackConfig config;
  config.tokens_per_item = opts.tokens_per_item;
  config.head_dim = opts.head_dim;
  if (opts.needle >= 0) config.needle_index = opts.needle;
  config.trials = opts.trials;
  config.seed = opts.seed;
  if (opts.method != "none") {
    const FrequencyBasis basis = make_basis(opts.head_dim, opts.base);
    const DimensionLayout layout = layout_for_head_dim(opts.head_dim);
    config.mode = MRopeEmbedding{
        build_plan(method_from_name(opts.method), basis, opts.orig_len, opts.target_len), layout};
  }

  const HaystackCurve curve = run_haystack_curve(config, opts.items);
  const std::optional<std::int64_t> effective = effective_length(curve, opts.threshold);

  if (opts.format == "json") {
    nlohmann::ordered_json doc;
    doc["curve"] = nlohmann::ordered_json::array();
    for (const auto& point : curve.points)
      doc["curve"].push_back(nlohmann::ordered_json{{"context_items", point.context_items},
                                                    {"success_rate", point.success_rate}});
    doc["threshold"] = opts.threshold;
    doc["effective_length"] = effective ? nlohmann::ordered_json(*effective)
                                        : nlohmann::ordered_json(nullptr);
    write_output(opts.output, doc.dump(2) + "\n");
    return;
  }
  std::string csv = "context_items,success_rate\n";
  for (const auto& point : curve.points)
    csv += std::to_string(point.context_items) + "," + fmt12(point.success_rate) + "\n";
  csv += "effective_length," + (effective ? std::to_string(*effective) : std::string("none")) + "\n";
  write_output(opts.output, csv);
}

void run_pack(const PackOpts& opts) {
  std::vector<Sample> samples = read_samples(opts.input);

  std::int64_t target_len = opts.target_len;
  if (!opts.recipe_path.empty()) {
    const RecipeConfig recipe = recipe_from_json(read_file(opts.recipe_path));
    if (target_len == 0) target_len = recipe.target_length;
    if (opts.budget <= 0)
      throw std::invalid_argument("--budget is required when sampling with --recipe");
    Selection selection = sample_corpus(recipe, samples, opts.budget, opts.seed);
    for (const std::string& warning : selection.report.warnings)
      std::cerr << "warning: " << warning << "\n";
    samples = std::move(selection.samples);
  }
  if (target_len <= 0)
    throw std::invalid_argument("--target-len is required (or set target_length in the recipe)");

  const PackManifest manifest = pack_samples(samples, target_len);
  write_output(opts.output, manifest_to_json(manifest) + "\n");

  if (!opts.text_dir.empty()) {
    for (std::size_t i = 0; i < manifest.packs.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "pack_%04zu.txt", i);
      write_output(opts.text_dir + "/" + name, serialize_chatml(manifest.packs[i], samples));
    }
  }
}

void run_schedule(const ScheduleOpts& opts) {
  const std::vector<Sample> samples = read_samples(opts.input);
  const std::vector<ScheduleStage> stages = progressive_schedule(opts.stages);

  nlohmann::ordered_json doc;
  doc["stages"] = nlohmann::ordered_json::array();
  for (const ScheduleStage& stage : stages) {
    const PackManifest manifest = pack_samples(samples, stage.target_length);
    doc["stages"].push_back(
        nlohmann::ordered_json{{"index", stage.index},
                               {"target_length", stage.target_length},
                               {"scale", stage.scale},
                               {"manifest", nlohmann::ordered_json::parse(manifest_to_json(manifest))}});
  }
  write_output(opts.output, doc.dump(2) + "\n");
}

void run_plan_hybrid(const HybridOpts& opts) {
  const FramePlan plan =
      plan_hybrid(opts.frames, HybridConfig{opts.group_size, opts.hi_res_tokens, opts.compression});
  write_output(opts.output, frame_plan_to_json(plan) + "\n");
}

void run_tradeoff(const TradeoffOpts& opts) {
  const std::vector<TradeoffRow> rows = tradeoff_table(opts.budget, opts.frames);
  if (opts.format == "json") {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const TradeoffRow& row : rows)
      doc.push_back(nlohmann::ordered_json{{"frames", row.frames},
                                           {"tokens_per_frame", row.tokens_per_frame}});
    write_output(opts.output, doc.dump(2) + "\n");
    return;
  }
  std::string csv = "frames,tokens_per_frame\n";
  for (const TradeoffRow& row : rows)
    csv += std::to_string(row.frames) + "," + std::to_string(row.tokens_per_frame) + "\n";
  write_output(opts.output, csv);
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t default_seed = 0;
  if (const char* env = std::getenv("LONGCTX_SEED")) {
    char* end = nullptr;
    default_seed = std::strtoull(env, &end, 10);
    if (end == env) default_seed = 0;
  }

  CLI::App app{"long-context position-embedding toolkit"};
  app.require_subcommand(1);

  BasisOpts basis_opts;
  auto* basis_cmd = app.add_subcommand("analyze-basis", "print the rotary angle table");
  basis_cmd->add_option("--head-dim", basis_opts.head_dim, "head dimension (even)")
      ->capture_default_str();
  basis_cmd->add_option("--base", basis_opts.base, "rotary base")->capture_default_str();
  basis_cmd->add_option("--target-len", basis_opts.target_len,
                        "context length for the coverage-ratio column (0 = omit)")
      ->capture_default_str();
  basis_cmd->add_option("--format", basis_opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  basis_cmd->add_option("--output", basis_opts.output, "output path (default stdout)");

  ExtendOpts extend_opts;
  auto* extend_cmd = app.add_subcommand("extend", "emit a scaled angle table for one method");
  extend_cmd->add_option("--method", extend_opts.method, "extrapolation, pi, ntk, or mropepp")
      ->required()
      ->check(CLI::IsMember({"extrapolation", "pi", "ntk", "mropepp"}));
  extend_cmd->add_option("--head-dim", extend_opts.head_dim, "head dimension (even)")
      ->capture_default_str();
  extend_cmd->add_option("--base", extend_opts.base, "rotary base")->capture_default_str();
  extend_cmd->add_option("--orig-len", extend_opts.orig_len, "original context length L_V")
      ->capture_default_str();
  extend_cmd->add_option("--target-len", extend_opts.target_len, "target context length L'")
      ->capture_default_str();
  extend_cmd->add_option("--format", extend_opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  extend_cmd->add_option("--output", extend_opts.output, "output path (default stdout)");

  PositionsOpts positions_opts;
  auto* positions_cmd =
      app.add_subcommand("positions", "assign multimodal position ids to a span list");
  positions_cmd
      ->add_option("--span", positions_opts.spans,
                   "span spec: text:N, image:HxW, or video:FxHxW (repeatable, in order)")
      ->required();
  positions_cmd->add_option("--output", positions_opts.output, "output path (default stdout)");

  HaystackOpts haystack_opts;
  haystack_opts.seed = default_seed;
  auto* haystack_cmd =
      app.add_subcommand("haystack", "run the synthetic needle-retrieval harness");
  haystack_cmd->add_option("--items", haystack_opts.items, "item counts, strictly increasing")
      ->delimiter(',')
      ->capture_default_str();
  haystack_cmd
      ->add_option("--tokens-per-item", haystack_opts.tokens_per_item, "tokens per haystack item")
      ->capture_default_str();
  haystack_cmd->add_option("--dk", haystack_opts.head_dim, "head dimension")->capture_default_str();
  haystack_cmd
      ->add_option("--needle", haystack_opts.needle,
                   "needle item index; -1 draws a random depth per trial")
      ->capture_default_str();
  haystack_cmd->add_option("--trials", haystack_opts.trials, "Monte Carlo trials per point")
      ->capture_default_str();
  haystack_cmd->add_option("--seed", haystack_opts.seed, "RNG seed (LONGCTX_SEED overrides default)")
      ->capture_default_str();
  haystack_cmd
      ->add_option("--method", haystack_opts.method,
                   "none, extrapolation, pi, ntk, or mropepp")
      ->check(CLI::IsMember({"none", "extrapolation", "pi", "ntk", "mropepp"}))
      ->capture_default_str();
  haystack_cmd->add_option("--base", haystack_opts.base, "rotary base")->capture_default_str();
  haystack_cmd->add_option("--orig-len", haystack_opts.orig_len, "original context length L_V")
      ->capture_default_str();
  haystack_cmd->add_option("--target-len", haystack_opts.target_len, "target context length L'")
      ->capture_default_str();
  haystack_cmd->add_option("--threshold", haystack_opts.threshold, "effective-length threshold")
      ->capture_default_str();
  haystack_cmd->add_option("--format", haystack_opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  haystack_cmd->add_option("--output", haystack_opts.output, "output path (default stdout)");

  PackOpts pack_opts;
  pack_opts.seed = default_seed;
  auto* pack_cmd = app.add_subcommand("pack", "pack samples toward a target context length");
  pack_cmd->add_option("--input", pack_opts.input, "samples as JSON lines ('-' for stdin)")
      ->required();
  pack_cmd->add_option("--target-len", pack_opts.target_len, "target context length");
  pack_cmd->add_option("--seed", pack_opts.seed, "RNG seed (LONGCTX_SEED overrides default)")
      ->capture_default_str();
  pack_cmd->add_option("--recipe", pack_opts.recipe_path, "RecipeConfig JSON file for sampling");
  pack_cmd->add_option("--budget", pack_opts.budget, "token budget for recipe sampling");
  pack_cmd->add_option("--text-dir", pack_opts.text_dir, "directory for serialized pack text");
  pack_cmd->add_option("--output", pack_opts.output, "manifest path (default stdout)");

  ScheduleOpts schedule_opts;
  auto* schedule_cmd =
      app.add_subcommand("schedule", "emit one pack manifest per progressive stage");
  schedule_cmd->add_option("--input", schedule_opts.input, "samples as JSON lines ('-' for stdin)")
      ->required();
  schedule_cmd->add_option("--stages", schedule_opts.stages, "strictly increasing stage lengths")
      ->delimiter(',')
      ->capture_default_str();
  schedule_cmd->add_option("--output", schedule_opts.output, "output path (default stdout)");

  HybridOpts hybrid_opts;
  auto* hybrid_cmd = app.add_subcommand("plan-hybrid", "plan a hybrid-resolution frame layout");
  hybrid_cmd->add_option("--frames", hybrid_opts.frames, "frame count")->capture_default_str();
  hybrid_cmd->add_option("--group-size", hybrid_opts.group_size, "frames per group (L)")
      ->capture_default_str();
  hybrid_cmd->add_option("--hi-res-tokens", hybrid_opts.hi_res_tokens, "tokens per hi-res frame (m)")
      ->capture_default_str();
  hybrid_cmd->add_option("--compression", hybrid_opts.compression, "low-res compression ratio (c)")
      ->capture_default_str();
  hybrid_cmd->add_option("--output", hybrid_opts.output, "output path (default stdout)");

  TradeoffOpts tradeoff_opts;
  auto* tradeoff_cmd =
      app.add_subcommand("tradeoff", "frame count vs tokens-per-frame under a fixed budget");
  tradeoff_cmd->add_option("--budget", tradeoff_opts.budget, "total visual token budget")
      ->capture_default_str();
  tradeoff_cmd->add_option("--frames", tradeoff_opts.frames, "frame counts")
      ->delimiter(',')
      ->capture_default_str();
  tradeoff_cmd->add_option("--format", tradeoff_opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  tradeoff_cmd->add_option("--output", tradeoff_opts.output, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (basis_cmd->parsed()) run_analyze_basis(basis_opts);
    if (extend_cmd->parsed()) run_extend(extend_opts);
    if (positions_cmd->parsed()) run_positions(positions_opts);
    if (haystack_cmd->parsed()) run_haystack_cli(haystack_opts);
    if (pack_cmd->parsed()) run_pack(pack_opts);
    if (schedule_cmd->parsed()) run_schedule(schedule_opts);
    if (hybrid_cmd->parsed()) run_plan_hybrid(hybrid_opts);
    if (tradeoff_cmd->parsed()) run_tradeoff(tradeoff_opts);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
