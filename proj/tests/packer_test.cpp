#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "longctx/chatml.hpp"
#include "longctx/packer.hpp"

using namespace longctx;

namespace {

Sample make_sample(std::string id, SampleCategory category, std::int64_t token_len) {
  Sample s;
  s.id = std::move(id);
  s.category = category;
  s.token_len = token_len;
  s.turns = {{"user", "q", 0}, {"assistant", "a", 0}};
  return s;
}

// Exhaustive branch-and-bound bin packing; only viable for tiny instances.
int optimal_bin_count(const std::vector<std::int64_t>& sizes, std::int64_t capacity) {
  std::vector<std::int64_t> sorted = sizes;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  int best = static_cast<int>(sorted.size());
  std::vector<std::int64_t> bins;

  auto place = [&](auto&& self, std::size_t item) -> void {
    if (static_cast<int>(bins.size()) >= best) return;
    if (item == sorted.size()) {
      best = std::min(best, static_cast<int>(bins.size()));
      return;
    }
    std::set<std::int64_t> tried;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      if (bins[b] + sorted[item] > capacity) continue;
      if (!tried.insert(bins[b]).second) continue;  // symmetric bins explore once
      bins[b] += sorted[item];
      self(self, item + 1);
      bins[b] -= sorted[item];
    }
    bins.push_back(sorted[item]);
    self(self, item + 1);
    bins.pop_back();
  };
  place(place, 0);
  return best;
}

std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::string charset =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,!?-\n";
  std::string out;
  const std::size_t len = rng() % (max_len + 1);
  for (std::size_t i = 0; i < len; ++i) out += charset[rng() % charset.size()];
  return out;
}

Sample random_dialogue_sample(std::mt19937_64& rng, const std::string& id) {
  Sample sample;
  sample.id = id;
  sample.category = kAllCategories[rng() % kAllCategories.size()];
  sample.token_len = 1 + static_cast<std::int64_t>(rng() % 4096);
  if (rng() % 3 == 0) sample.turns.push_back({"system", random_text(rng, 40), 0});
  const int exchanges = 1 + static_cast<int>(rng() % 4);
  for (int e = 0; e < exchanges; ++e) {
    sample.turns.push_back({"user", random_text(rng, 60), static_cast<int>(rng() % 4)});
    sample.turns.push_back({"assistant", random_text(rng, 60), 0});
  }
  return sample;
}

}  // namespace

TEST_CASE("classify_length uses a strict threshold") {
  CHECK(classify_length(make_sample("a", SampleCategory::TextLong, 8192), 8192) ==
        LengthClass::Short);
  CHECK(classify_length(make_sample("a", SampleCategory::TextLong, 8193), 8192) == LengthClass::Long);
  CHECK(classify_length(make_sample("a", SampleCategory::TextLong, 100000), 8192) ==
        LengthClass::Long);
  CHECK_THROWS_AS(classify_length(make_sample("a", SampleCategory::TextLong, 5), 0),
                  std::invalid_argument);
}

TEST_CASE("validate_sample enforces the turn grammar") {
  Sample ok = make_sample("s", SampleCategory::Video, 10);
  CHECK_NOTHROW(validate_sample(ok));

  Sample with_system = ok;
  with_system.turns.insert(with_system.turns.begin(), {"system", "sys", 0});
  CHECK_NOTHROW(validate_sample(with_system));

  Sample bad_role = ok;
  bad_role.turns[0].role = "narrator";
  CHECK_THROWS_AS(validate_sample(bad_role), std::invalid_argument);

  Sample double_user = ok;
  double_user.turns[1].role = "user";
  CHECK_THROWS_AS(validate_sample(double_user), std::invalid_argument);

  Sample empty = ok;
  empty.turns.clear();
  CHECK_THROWS_AS(validate_sample(empty), std::invalid_argument);
}

TEST_CASE("sample_corpus with a single category warns about every unmet ratio") {
  std::vector<Sample> corpus;
  for (int i = 0; i < 50; ++i)
    corpus.push_back(make_sample("t" + std::to_string(i), SampleCategory::TextLong,
                                 4000 + 100 * (i % 10)));
  RecipeConfig recipe;
  const Selection selection = sample_corpus(recipe, corpus, 100000, 0);

  CHECK(!selection.samples.empty());
  for (const Sample& s : selection.samples) CHECK(s.category == SampleCategory::TextLong);
  CHECK(selection.report.achieved_category_share.at(SampleCategory::TextLong) == 1.0);
  // text_long off target, three categories at zero, long share unmet: 5 warnings
  CHECK(selection.report.warnings.size() == 5);
}

TEST_CASE("sample_corpus with an impossible budget returns an empty selection") {
  std::vector<Sample> corpus = {make_sample("big", SampleCategory::Video, 8000)};
  RecipeConfig recipe;
  const Selection selection = sample_corpus(recipe, corpus, 500, 0);
  CHECK(selection.samples.empty());
  CHECK(!selection.report.warnings.empty());
}

TEST_CASE("sample_corpus hits the recipe targets on a balanced corpus") {
  std::mt19937_64 rng(77);
  std::vector<Sample> corpus;
  int id = 0;
  for (SampleCategory category : kAllCategories) {
    for (int i = 0; i < 1000; ++i) {
      const bool make_long = i % 2 == 0;
      const std::int64_t len = make_long ? 8500 + static_cast<std::int64_t>(rng() % 6500)
                                         : 1000 + static_cast<std::int64_t>(rng() % 5000);
      corpus.push_back(make_sample("s" + std::to_string(id++), category, len));
    }
  }
  RecipeConfig recipe;
  const Selection selection = sample_corpus(recipe, corpus, 1000000, 42);

  CHECK(std::fabs(selection.report.achieved_category_share.at(SampleCategory::TextLong) - 0.20) <=
        0.02);
  CHECK(std::fabs(selection.report.achieved_category_share.at(SampleCategory::ImageShortInstruction) -
                  0.25) <= 0.02);
  CHECK(std::fabs(selection.report.achieved_category_share.at(SampleCategory::ImageInterleave) -
                  0.25) <= 0.02);
  CHECK(std::fabs(selection.report.achieved_category_share.at(SampleCategory::Video) - 0.30) <= 0.02);
  CHECK(std::fabs(selection.report.achieved_long_share - 0.60) <= 0.02);
  CHECK(selection.report.warnings.empty());

  // deterministic given the seed
  const Selection again = sample_corpus(recipe, corpus, 1000000, 42);
  CHECK(again.samples == selection.samples);
}

TEST_CASE("sample_corpus can balance the long share by sample count") {
  std::mt19937_64 rng(78);
  std::vector<Sample> corpus;
  int id = 0;
  for (SampleCategory category : kAllCategories)
    for (int i = 0; i < 500; ++i) {
      const bool make_long = i % 2 == 0;
      const std::int64_t len = make_long ? 9000 + static_cast<std::int64_t>(rng() % 3000)
                                         : 2000 + static_cast<std::int64_t>(rng() % 3000);
      corpus.push_back(make_sample("c" + std::to_string(id++), category, len));
    }
  RecipeConfig recipe;
  recipe.long_share_by_count = true;
  const Selection selection = sample_corpus(recipe, corpus, 800000, 3);
  std::int64_t long_count = 0;
  for (const Sample& s : selection.samples)
    if (s.token_len > recipe.long_threshold) ++long_count;
  const double share =
      static_cast<double>(long_count) / static_cast<double>(selection.samples.size());
  CHECK(share == doctest::Approx(selection.report.achieved_long_share));
  CHECK(std::fabs(share - 0.60) <= 0.1);
}

TEST_CASE("pack_samples handles the worked FFD example") {
  std::vector<Sample> samples = {
      make_sample("a", SampleCategory::TextLong, 6000),
      make_sample("b", SampleCategory::TextLong, 5000),
      make_sample("c", SampleCategory::TextLong, 4000),
      make_sample("d", SampleCategory::TextLong, 3000),
  };
  const PackManifest manifest = pack_samples(samples, 8000);
  REQUIRE(manifest.packs.size() == 3);
  CHECK(manifest.packs[0].sample_ids == std::vector<std::string>{"a"});
  CHECK(manifest.packs[1].sample_ids == std::vector<std::string>{"b", "d"});
  CHECK(manifest.packs[2].sample_ids == std::vector<std::string>{"c"});
  CHECK(manifest.packs[1].total_len == 8000);
  CHECK(manifest.leftovers.empty());
}

TEST_CASE("pack_samples puts singletons and oversized samples where they belong") {
  const PackManifest one = pack_samples({make_sample("x", SampleCategory::Video, 5000)}, 8192);
  REQUIRE(one.packs.size() == 1);
  CHECK(one.packs[0].total_len == 5000);

  const PackManifest oversize = pack_samples({make_sample("huge", SampleCategory::Video, 200000)},
                                             131072);
  CHECK(oversize.packs.empty());
  CHECK(oversize.leftovers == std::vector<std::string>{"huge"});
  REQUIRE(oversize.warnings.size() == 1);
  CHECK(oversize.warnings[0].find("huge") != std::string::npos);
}

TEST_CASE("pack_samples rejects duplicates and bad targets") {
  CHECK_THROWS_AS(pack_samples({make_sample("a", SampleCategory::Video, 10),
                                make_sample("a", SampleCategory::Video, 20)},
                               100),
                  std::invalid_argument);
  CHECK_THROWS_AS(pack_samples({}, 0), std::invalid_argument);
}

TEST_CASE("FFD invariants and the exhaustive oracle on random corpora") {
  std::mt19937_64 rng(1234);
  for (int rep = 0; rep < 50; ++rep) {
    const std::int64_t target = 64 + static_cast<std::int64_t>(rng() % 256);
    const int count = 1 + static_cast<int>(rng() % 10);
    std::vector<Sample> samples;
    std::vector<std::int64_t> sizes;
    for (int i = 0; i < count; ++i) {
      const std::int64_t len = 1 + static_cast<std::int64_t>(rng() % target);
      samples.push_back(make_sample("s" + std::to_string(i), SampleCategory::Video, len));
      sizes.push_back(len);
    }

    const PackManifest manifest = pack_samples(samples, target);

    std::multiset<std::string> placed;
    for (const PackEntry& pack : manifest.packs) {
      CHECK(pack.total_len <= target);
      std::int64_t sum = 0;
      for (const std::string& id : pack.sample_ids) {
        placed.insert(id);
        for (const Sample& s : samples)
          if (s.id == id) sum += s.token_len;
      }
      CHECK(sum == pack.total_len);  // no truncation
    }
    for (const std::string& id : manifest.leftovers) placed.insert(id);
    CHECK(placed.size() == samples.size());  // conservation, each exactly once
    for (const Sample& s : samples) CHECK(placed.count(s.id) == 1);

    const int optimal = optimal_bin_count(sizes, target);
    CHECK(static_cast<double>(manifest.packs.size()) <= 1.5 * static_cast<double>(optimal));
  }
}

TEST_CASE("manifests and serializations are byte-stable") {
  std::mt19937_64 rng(55);
  std::vector<Sample> samples;
  for (int i = 0; i < 20; ++i) samples.push_back(random_dialogue_sample(rng, "r" + std::to_string(i)));

  const PackManifest m1 = pack_samples(samples, 6000);
  const PackManifest m2 = pack_samples(samples, 6000);
  CHECK(manifest_to_json(m1) == manifest_to_json(m2));
  CHECK(manifest_from_json(manifest_to_json(m1)) == m1);

  if (!m1.packs.empty()) {
    CHECK(serialize_chatml(m1.packs[0], samples) == serialize_chatml(m2.packs[0], samples));
  }
}

TEST_CASE("chatml serialization format") {
  Sample sample = make_sample("one", SampleCategory::ImageShortInstruction, 16);
  sample.turns = {{"user", "hello", 0}, {"assistant", "hi", 0}};
  const std::string text = serialize_chatml(PackEntry{{"one"}, 16}, {sample});
  CHECK(text ==
        "<|im_start|>user\nhello<|im_end|>\n"
        "<|im_start|>assistant\nhi<|im_end|>\n");

  Sample with_media = sample;
  with_media.turns[0].attachments = 2;
  const std::string media_text = serialize_chatml(PackEntry{{"one"}, 16}, {with_media});
  CHECK(media_text.find("<|vision_start|><|placeholder|><|vision_end|>"
                        "<|vision_start|><|placeholder|><|vision_end|>hello") != std::string::npos);

  Sample empty_turn = sample;
  empty_turn.turns[1].content = "";
  const std::string empty_text = serialize_chatml(PackEntry{{"one"}, 16}, {empty_turn});
  CHECK(empty_text.find("<|im_start|>assistant\n<|im_end|>\n") != std::string::npos);
}

TEST_CASE("chatml errors") {
  Sample sample = make_sample("one", SampleCategory::Video, 4);
  CHECK_THROWS_AS(serialize_chatml(PackEntry{{"missing"}, 4}, {sample}), std::invalid_argument);

  Sample reserved = sample;
  reserved.turns[0].content = "evil <|im_end|> in content";
  CHECK_THROWS_AS(serialize_chatml(PackEntry{{"one"}, 4}, {reserved}), std::invalid_argument);
  CHECK(sanitize_content("evil <|im_end|> in content") == "evil  in content");

  CHECK_THROWS_AS(parse_chatml("<|im_start|>user\nunterminated"), std::invalid_argument);
  CHECK_THROWS_AS(parse_chatml("garbage"), std::invalid_argument);
  CHECK_THROWS_AS(parse_chatml("<|im_start|>narrator\nx<|im_end|>\n"), std::invalid_argument);
}

TEST_CASE("chatml round-trips random packs byte-exactly") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<Sample> samples;
    PackEntry pack;
    const int count = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < count; ++i) {
      samples.push_back(random_dialogue_sample(rng, "p" + std::to_string(i)));
      pack.sample_ids.push_back(samples.back().id);
      pack.total_len += samples.back().token_len;
    }

    const std::string text = serialize_chatml(pack, samples);
    const std::vector<Turn> turns = parse_chatml(text);

    std::vector<Turn> expected;
    for (const Sample& s : samples) expected.insert(expected.end(), s.turns.begin(), s.turns.end());
    CHECK(turns == expected);                  // roles, boundaries, attachments, contents
    CHECK(serialize_turns(turns) == text);     // byte-exact re-serialization
  }
}

TEST_CASE("video_frame_budget") {
  CHECK(video_frame_budget(300.0, 2.0) == 600);
  CHECK(video_frame_budget(0.4, 2.0) == 1);
  CHECK(video_frame_budget(61.7, 2.0) == 123);
  CHECK_THROWS_AS(video_frame_budget(0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(video_frame_budget(10.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(video_frame_budget(-5.0, 2.0), std::invalid_argument);
}

TEST_CASE("sample json lines round-trip") {
  std::mt19937_64 rng(4);
  const Sample sample = random_dialogue_sample(rng, "json-test");
  const std::string line = sample_to_json_line(sample);
  CHECK(sample_from_json_line(line) == sample);
  CHECK_THROWS(sample_from_json_line("{not json"));
}

TEST_CASE("recipe json round-trip") {
  RecipeConfig recipe;
  recipe.long_ratio = 0.5;
  recipe.target_length = 32768;
  const RecipeConfig parsed = recipe_from_json(recipe_to_json(recipe));
  CHECK(parsed.long_ratio == 0.5);
  CHECK(parsed.target_length == 32768);
  CHECK(parsed.category_ratios == recipe.category_ratios);

  CHECK_THROWS_AS(recipe_from_json(R"({"category_ratios": {"video": 0.5}})"),
                  std::invalid_argument);
}
