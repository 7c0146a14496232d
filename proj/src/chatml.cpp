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

#include "longctx/chatml.hpp"

#include <array>
#include <stdexcept>
#include <unordered_map>

namespace longctx {

namespace {

constexpr std::array<const char*, 5> kReservedMarkers = {
    "<|im_start|>", "<|im_end|>", "<|vision_start|>", "<|placeholder|>", "<|vision_end|>"};

bool is_known_role(const std::string& role) {
  return role == "system" || role == "user" || role == "assistant";
}

void check_serializable(const Turn& turn) {
  if (!is_known_role(turn.role))
    throw std::invalid_argument("serialize_turns: unknown role '" + turn.role + "'");
  if (turn.attachments < 0)
    throw std::invalid_argument("serialize_turns: negative attachment count");
  for (const char* marker : kReservedMarkers)
    if (turn.content.find(marker) != std::string::npos)
      throw std::invalid_argument("serialize_turns: content contains reserved marker " +
                                  std::string(marker) + "; sanitize it first");
}

}  // namespace

std::string serialize_turns(const std::vector<Turn>& turns) {
  std::string out;
  for (const Turn& turn : turns) {
    check_serializable(turn);
    out += kImStart;
    out += turn.role;
    out += '\n';
    for (int a = 0; a < turn.attachments; ++a) {
      out += kVisionStart;
      out += kPlaceholder;
      out += kVisionEnd;
    }
    out += turn.content;
    out += kImEnd;
    out += '\n';
  }
  return out;
}

std::string serialize_chatml(const PackEntry& pack, const std::vector<Sample>& samples) {
  std::unordered_map<std::string, const Sample*> by_id;
  by_id.reserve(samples.size());
  for (const Sample& sample : samples) by_id.emplace(sample.id, &sample);

  std::vector<Turn> turns;
  for (const std::string& id : pack.sample_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw std::invalid_argument("serialize_chatml: missing sample '" + id + "'");
    turns.insert(turns.end(), it->second->turns.begin(), it->second->turns.end());
  }
  return serialize_turns(turns);
}

std::vector<Turn> parse_chatml(const std::string& text) {
  const std::string im_start = kImStart;
  const std::string im_end = kImEnd;
  const std::string marker =
      std::string(kVisionStart) + std::string(kPlaceholder) + std::string(kVisionEnd);

  std::vector<Turn> turns;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text.compare(pos, im_start.size(), im_start) != 0)
      throw std::invalid_argument("parse_chatml: expected " + im_start + " at byte " +
                                  std::to_string(pos));
    pos += im_start.size();

    const std::size_t role_end = text.find('\n', pos);
    if (role_end == std::string::npos)
      throw std::invalid_argument("parse_chatml: missing newline after role");
    Turn turn;
    turn.role = text.substr(pos, role_end - pos);
    if (!is_known_role(turn.role))
      throw std::invalid_argument("parse_chatml: unknown role '" + turn.role + "'");
    pos = role_end + 1;

    const std::size_t body_end = text.find(im_end, pos);
    if (body_end == std::string::npos)
      throw std::invalid_argument("parse_chatml: missing " + im_end + " for role " + turn.role);
    std::string body = text.substr(pos, body_end - pos);
    pos = body_end + im_end.size();
    if (pos >= text.size() || text[pos] != '\n')
      throw std::invalid_argument("parse_chatml: missing newline after " + im_end);
    ++pos;

    std::size_t content_start = 0;
    while (body.compare(content_start, marker.size(), marker) == 0) {
      ++turn.attachments;
      content_start += marker.size();
    }
    turn.content = body.substr(content_start);
    turns.push_back(std::move(turn));
  }
  return turns;
}

std::string sanitize_content(const std::string& text) {
  std::string out = text;
  for (const char* marker : kReservedMarkers) {
    const std::string needle = marker;
    std::size_t at = 0;
    while ((at = out.find(needle, at)) != std::string::npos) out.erase(at, needle.size());
  }
  return out;
}

}  // namespace longctx
