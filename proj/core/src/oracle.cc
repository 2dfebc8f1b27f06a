/* Copyright 2026 The Halloc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "halloc/oracle.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <deque>
#include <numeric>
#include <sstream>
#include <tuple>

#include "halloc/codec.h"
#include "halloc/error.h"

namespace halloc {
namespace {

constexpr const char* kSceneKey = "halloc-scene";
constexpr const char* kSeedKey = "halloc-seed";

struct Cell {
  int x = 0;
  int y = 0;
  bool operator<(const Cell& o) const {
    return std::tie(x, y) < std::tie(o.x, o.y);
  }
};

struct Edge {
  int from;
  int to;
  int dx;
  int dy;
};

std::string Hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

std::uint64_t HashBox(const BBox& b) {
  double coords[4] = {b.x0, b.y0, b.x1, b.y1};
  return Fnv1a64(std::string_view(reinterpret_cast<const char*>(coords),
                                  sizeof(coords)));
}

std::vector<double> Normalize(std::vector<double> v) {
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

// Relation edges between mention indices, resolved by head token.
std::vector<Edge> RelationEdges(const std::vector<RelationCandidate>& cands,
                                const std::vector<ObjectMention>& mentions,
                                const TokenSequence& seq, bool strict) {
  auto index_of = [&](const PhraseSpan& p) {
    for (std::size_t i = 0; i < mentions.size(); ++i) {
      if (mentions[i].phrase.head_token == p.head_token) return static_cast<int>(i);
    }
    return -1;
  };
  std::vector<Edge> edges;
  for (const auto& c : cands) {
    auto dir = RelationDirection(ToLower(seq[c.positional_token].text));
    if (!dir) {
      if (strict) {
        throw Error(ErrorCode::kUnparseable,
                    "positional term '" + seq[c.positional_token].text +
                        "' has no direction");
      }
      continue;
    }
    edges.push_back({index_of(c.first), index_of(c.second),
                     static_cast<int>(dir->x), static_cast<int>(dir->y)});
  }
  return edges;
}

SceneGraph LayoutMentions(const std::vector<ObjectMention>& mentions,
                          const std::vector<Edge>& edges) {
  const int n = static_cast<int>(mentions.size());
  std::vector<std::optional<Cell>> cells(n);
  std::set<Cell> occupied;
  auto place = [&](int i, Cell c, int dx, int dy) {
    while (occupied.contains(c)) {
      c.x += dx;
      c.y += dy;
    }
    cells[i] = c;
    occupied.insert(c);
  };
  int anchor_x = 0;
  for (int root = 0; root < n; ++root) {
    if (cells[root]) continue;
    place(root, Cell{anchor_x, 0}, 1, 0);
    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const Edge& e : edges) {
        int v = -1, dx = 0, dy = 0;
        if (e.from == u) {
          v = e.to;
          dx = e.dx;
          dy = e.dy;
        } else if (e.to == u) {
          v = e.from;
          dx = -e.dx;
          dy = -e.dy;
        }
        if (v < 0 || cells[v]) continue;
        place(v, Cell{cells[u]->x + dx, cells[u]->y + dy}, dx, dy);
        queue.push_back(v);
      }
    }
    for (const auto& c : occupied) anchor_x = std::max(anchor_x, c.x + 2);
  }

  SceneGraph scene;
  scene.id = "rec";
  if (n == 0) return scene;
  int min_x = cells[0]->x, max_x = min_x, min_y = cells[0]->y, max_y = min_y;
  for (const auto& c : cells) {
    min_x = std::min(min_x, c->x);
    max_x = std::max(max_x, c->x);
    min_y = std::min(min_y, c->y);
    max_y = std::max(max_y, c->y);
  }
  const int span = std::max({max_x - min_x, max_y - min_y, 1});
  const double step = std::min(0.15, 0.8 / span);
  const double mid_x = (min_x + max_x) / 2.0, mid_y = (min_y + max_y) / 2.0;
  for (int i = 0; i < n; ++i) {
    SceneObject o;
    o.id = i;
    o.label = mentions[i].label;
    o.attributes = mentions[i].attributes;
    o.center = {0.5 + (cells[i]->x - mid_x) * step,
                0.5 + (cells[i]->y - mid_y) * step};
    o.width = o.height = 0.6 * step;
    scene.objects.push_back(std::move(o));
  }
  return scene;
}

std::string Mention(const SceneObject& o) {
  std::string s;
  for (const auto& a : o.attributes) s += a + " ";
  return s + o.label;
}

std::string RelationClause(const std::string& term) {
  if (term == "left") return "is to the left of";
  if (term == "right") return "is to the right of";
  return "is " + term;
}

// Rebuilds the caption after substituting token texts.
std::string Rebuild(const TokenSequence& seq,
                    const std::map<int, std::string>& replace) {
  std::string out;
  for (const Token& t : seq.tokens) {
    out += t.separator;
    auto it = replace.find(t.index);
    out += it == replace.end() ? t.text : it->second;
  }
  return out + seq.trailing;
}

bool StartsUpper(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

}  // namespace

std::vector<ObjectMention> ParseMentions(const TokenSequence& seq,
                                         const std::vector<PhraseSpan>& phrases) {
  std::vector<ObjectMention> out;
  for (const auto& p : phrases) {
    ObjectMention m;
    m.phrase = p;
    m.label = ToLower(seq[p.head_token].text);
    for (int i = p.first_token; i <= p.last_token; ++i) {
      if (i != p.head_token) m.attributes.insert(ToLower(seq[i].text));
    }
    out.push_back(std::move(m));
  }
  return out;
}

SceneGraph LayoutCaption(const std::string& caption,
                         const PhraseExtractor& extractor) {
  const auto seq = Tokenize(caption);
  const auto ex = ExtractObjectPhrases(seq, extractor);
  const auto mentions = ParseMentions(ex.tokens, ex.phrases);
  const auto cands = PairRelations(ex.tokens, ex.phrases);
  return LayoutMentions(mentions, RelationEdges(cands, mentions, ex.tokens, false));
}

OracleBackend::OracleBackend(OracleOptions options, const FeatureSpace& features)
    : options_(options), features_(features) {
  if (!(options_.sigma >= 0) || !(options_.drop_gain >= 0) ||
      !(options_.jitter_gain >= 0) ||
      !(options_.embed_gain >= 0) || options_.image_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid oracle options");
  }
}

namespace {

PngImage RasterScene(const SceneGraph& scene, int size) {
  PngImage img;
  img.width = img.height = size;
  img.rgb.assign(static_cast<std::size_t>(size) * size * 3, 255);
  for (const auto& o : scene.objects) {
    const BBox b = o.Box();
    const std::uint64_t color = Fnv1a64(o.label);
    const int x0 = static_cast<int>(b.x0 * size), x1 = static_cast<int>(b.x1 * size);
    const int y0 = static_cast<int>(b.y0 * size), y1 = static_cast<int>(b.y1 * size);
    for (int y = std::max(0, y0); y < std::min(size, y1); ++y) {
      for (int x = std::max(0, x0); x < std::min(size, x1); ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          img.rgb[(static_cast<std::size_t>(y) * size + x) * 3 + ch] =
              static_cast<std::uint8_t>((color >> (8 * ch)) & 0xff);
        }
      }
    }
  }
  img.text[kSceneKey] = SceneToJson(scene);
  return img;
}

}  // namespace

ImageRef OracleBackend::RenderScene(const SceneGraph& scene, int size) {
  return ImageRef::FromPng(EncodePng(RasterScene(scene, size)));
}

void OracleBackend::RegisterScene(const SceneGraph& scene) {
  scene.Validate();
  std::lock_guard lock(mu_);
  registry_[scene.id] = scene;
}

std::uint64_t OracleBackend::ImageKey(const ImageRef& image) const {
  if (image.source() == ImageRef::Source::kSyntheticScene) {
    return Fnv1a64(image.value(), 7);
  }
  if (image.source() == ImageRef::Source::kInlineBytes) {
    return Fnv1a64(image.value());
  }
  return Fnv1a64(image.PngBytes());
}

SceneGraph OracleBackend::SceneOf(const ImageRef& image) const {
  if (image.source() == ImageRef::Source::kSyntheticScene) {
    std::lock_guard lock(mu_);
    auto it = registry_.find(image.value());
    if (it == registry_.end()) {
      throw Error(ErrorCode::kNotFound, "unknown scene id " + image.value());
    }
    return it->second;
  }
  const std::string bytes = image.PngBytes();
  const std::uint64_t key = Fnv1a64(bytes);
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  const PngImage png = DecodePng(bytes);
  auto it = png.text.find(kSceneKey);
  if (it == png.text.end()) {
    throw Error(ErrorCode::kProtocol, "image carries no scene metadata");
  }
  auto scene = std::make_shared<const SceneGraph>(SceneFromJson(it->second));
  std::lock_guard lock(mu_);
  if (cache_.size() > 4096) cache_.clear();
  cache_[key] = scene;
  return *scene;
}

std::vector<ImageRef> OracleBackend::Generate(
    const std::string& prompt, std::span<const std::int64_t> seeds,
    int /*steps*/) {
  const SceneGraph base = LayoutCaption(prompt, chunker_);
  std::vector<ImageRef> out;
  for (const auto seed : seeds) {
    SceneGraph scene = base;
    scene.id = "rec:" + Hex(Fnv1a64(prompt)) + "/" + std::to_string(seed);
    if (options_.sigma > 0) {
      std::mt19937_64 rng(Fnv1a64(prompt) ^ static_cast<std::uint64_t>(seed));
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double drop = std::min(1.0, options_.sigma * options_.drop_gain);
      std::vector<SceneObject> kept;
      for (auto& o : scene.objects) {
        if (unit(rng) >= drop) kept.push_back(std::move(o));
      }
      scene.objects = std::move(kept);
      for (auto& o : scene.objects) {
        const double step = o.width / 0.6;
        const double sd = options_.sigma * options_.jitter_gain * step;
        o.center.x = std::clamp(o.center.x + sd * gauss(rng), o.width / 2,
                                1 - o.width / 2);
        o.center.y = std::clamp(o.center.y + sd * gauss(rng), o.height / 2,
                                1 - o.height / 2);
      }
    }
    PngImage png = RasterScene(scene, options_.image_size);
    png.text[kSeedKey] = std::to_string(seed);
    out.push_back(ImageRef::FromPng(EncodePng(png)));
  }
  return out;
}

std::vector<Detection> OracleBackend::Ground(
    const ImageRef& image, const std::vector<std::string>& phrases,
    const GroundingThresholds& /*thresholds*/) {
  const SceneGraph scene = SceneOf(image);
  std::vector<Detection> out;
  for (const auto& phrase : phrases) {
    const auto seq = Tokenize(phrase);
    if (seq.empty()) continue;
    const std::string label = ToLower(seq.tokens.back().text);
    for (const auto& o : scene.objects) {
      if (o.label == label) out.push_back(Detection{phrase, o.Box(), 1.0});
    }
  }
  return out;
}

std::vector<Embedding> OracleBackend::Embed(const ImageRef& image,
                                            std::span<const BBox> boxes) {
  const SceneGraph scene = SceneOf(image);
  const std::uint64_t image_key = ImageKey(image);
  std::vector<Embedding> out;
  for (const BBox& box : boxes) {
    std::vector<double> v;
    if (IoU(box, BBox::Full()) > 0.999) {
      v = features_.SceneFeatures(scene);
    } else {
      const SceneObject* best = nullptr;
      double best_iou = 0;
      for (const auto& o : scene.objects) {
        const double iou = IoU(box, o.Box());
        if (iou > best_iou) {
          best_iou = iou;
          best = &o;
        }
      }
      if (best) {
        v = features_.ObjectFeatures(best->label, best->attributes);
      } else {
        v.assign(features_.dim(), 0.0);
        v[features_.BackgroundSlot()] = 1;
      }
    }
    v = Normalize(std::move(v));
    if (options_.sigma > 0) {
      std::mt19937_64 rng(image_key ^ HashBox(box));
      std::normal_distribution<double> gauss(0.0, 1.0);
      const double sd = options_.sigma * options_.embed_gain /
                        std::sqrt(static_cast<double>(v.size()));
      for (double& x : v) x += sd * gauss(rng);
      v = Normalize(std::move(v));
    }
    out.push_back(Embedding{std::move(v)});
  }
  return out;
}

std::string RenderCaption(const SceneGraph& scene, std::uint64_t seed) {
  if (scene.objects.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot caption an empty scene");
  }
  std::vector<std::size_t> order(scene.objects.size());
  std::iota(order.begin(), order.end(), 0);
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  if (order.size() == 1) {
    return "There is a " + Mention(scene.objects[order[0]]) + ".";
  }
  std::string caption = "A " + Mention(scene.objects[order[0]]);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& a = scene.objects[order[i - 1]];
    const auto& b = scene.objects[order[i]];
    if (i > 1) caption += ", which";
    caption += " " + RelationClause(RelationBetween(a, b)) + " a " + Mention(b);
  }
  return caption + ".";
}

std::string_view CorruptionKindName(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::kAddObject: return "add_object";
    case CorruptionKind::kAlterAttribute: return "alter_attribute";
    case CorruptionKind::kFlipRelation: return "flip_relation";
  }
  return "add_object";
}

CorruptionKind CorruptionKindFromName(std::string_view name) {
  if (name == "add_object" || name == "obj") return CorruptionKind::kAddObject;
  if (name == "alter_attribute" || name == "att") {
    return CorruptionKind::kAlterAttribute;
  }
  if (name == "flip_relation" || name == "rel") return CorruptionKind::kFlipRelation;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown corruption kind '" + std::string(name) + "'");
}

std::string Corrupt(const SceneGraph& scene, const std::string& caption,
                    const CorruptionSpec& spec, std::uint64_t seed,
                    const FeatureSpace& features) {
  std::mt19937_64 rng(seed);
  const auto seq = Tokenize(caption);
  const auto ex = ExtractObjectPhrases(seq, RuleBasedChunker{});
  const auto mentions = ParseMentions(ex.tokens, ex.phrases);
  auto pick = [&](std::size_t n) {
    return static_cast<std::size_t>(
        std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  };

  switch (spec.kind) {
    case CorruptionKind::kAddObject: {
      std::string label = spec.payload;
      if (label.empty()) {
        std::vector<std::string> absent;
        for (const auto& l : features.labels()) {
          if (!scene.FindLabel(l)) absent.push_back(l);
        }
        if (absent.empty()) {
          throw Error(ErrorCode::kInapplicable, "no absent label to add");
        }
        label = absent[pick(absent.size())];
      }
      if (scene.FindLabel(label)) {
        throw Error(ErrorCode::kInapplicable,
                    "label '" + label + "' already exists in the scene");
      }
      std::string out = caption;
      while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) {
        out.pop_back();
      }
      return out + " There is also a " + label + ".";
    }
    case CorruptionKind::kAlterAttribute: {
      const SceneObject* target = nullptr;
      if (spec.target >= 0) {
        target = scene.FindById(spec.target);
      } else if (!scene.objects.empty()) {
        target = &scene.objects[pick(scene.objects.size())];
      }
      if (!target) {
        throw Error(ErrorCode::kInapplicable, "alter_attribute: unknown target");
      }
      const ObjectMention* mention = nullptr;
      for (const auto& m : mentions) {
        if (m.label == target->label) mention = &m;
      }
      if (!mention) {
        throw Error(ErrorCode::kInapplicable,
                    "alter_attribute: '" + target->label + "' is not mentioned");
      }
      std::string attr = spec.payload;
      if (attr.empty()) {
        std::vector<std::string> fresh;
        for (const auto& a : features.attributes()) {
          if (!mention->attributes.contains(a)) fresh.push_back(a);
        }
        if (fresh.empty()) {
          throw Error(ErrorCode::kInapplicable, "no fresh attribute available");
        }
        attr = fresh[pick(fresh.size())];
      }
      if (mention->attributes.contains(attr)) {
        throw Error(ErrorCode::kInapplicable,
                    "attribute '" + attr + "' already stated");
      }
      const PhraseSpan& p = mention->phrase;
      std::map<int, std::string> replace;
      if (p.first_token < p.head_token) {
        replace[p.first_token] = attr;
      } else {
        replace[p.head_token] = attr + " " + seq[p.head_token].text;
      }
      return Rebuild(seq, replace);
    }
    case CorruptionKind::kFlipRelation: {
      const auto cands = PairRelations(ex.tokens, ex.phrases);
      std::vector<const RelationCandidate*> flippable;
      for (const auto& c : cands) {
        if (OppositeTerm(ToLower(seq[c.positional_token].text))) {
          flippable.push_back(&c);
        }
      }
      if (flippable.empty()) {
        throw Error(ErrorCode::kInapplicable, "flip_relation: caption has no relation");
      }
      std::size_t index = spec.target >= 0 ? static_cast<std::size_t>(spec.target)
                                           : pick(flippable.size());
      if (index >= flippable.size()) {
        throw Error(ErrorCode::kInapplicable,
                    "flip_relation: relation index out of range");
      }
      const Token& t = seq[flippable[index]->positional_token];
      std::string flipped = *OppositeTerm(ToLower(t.text));
      if (StartsUpper(t.text)) {
        flipped[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(flipped[0])));
      }
      return Rebuild(seq, {{t.index, flipped}});
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown corruption kind");
}

DetectionReport OracleDetect(const SceneGraph& scene, const std::string& caption,
                             int k, const FeatureSpace& features) {
  const auto seq = Tokenize(caption);
  const auto ex = ExtractObjectPhrases(seq, RuleBasedChunker{});
  const auto mentions = ParseMentions(ex.tokens, ex.phrases);
  const auto cands = PairRelations(ex.tokens, ex.phrases);

  std::set<std::string> seen;
  for (const auto& m : mentions) {
    if (!seen.insert(m.label).second) {
      throw Error(ErrorCode::kUnparseable, "label '" + m.label + "' mentioned twice");
    }
  }
  std::set<std::string> scene_labels;
  for (const auto& o : scene.objects) {
    if (!scene_labels.insert(o.label).second) {
      throw Error(ErrorCode::kUnparseable,
                  "scene repeats label '" + o.label + "'");
    }
  }
  const auto edges = RelationEdges(cands, mentions, ex.tokens, true);
  std::vector<int> parent(mentions.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) {
    const int a = root(e.from), b = root(e.to);
    if (a == b) throw Error(ErrorCode::kUnparseable, "relations form a cycle");
    parent[a] = b;
  }

  DetectionReport report;
  report.tokens = ex.tokens;
  report.k = k;
  auto add = [&](int token, PenaltyKind kind, double value) {
    PenaltyRecord r;
    r.token = token;
    r.kind = kind;
    r.value = value;
    r.per_reconstruction.assign(k, value);
    report.penalties.push_back(std::move(r));
  };

  std::vector<double> caption_features(features.dim(), 0.0);
  caption_features[features.BackgroundSlot()] = 1;
  for (const auto& m : mentions) {
    const auto f = features.ObjectFeatures(m.label, m.attributes);
    for (int i = 0; i < features.dim(); ++i) caption_features[i] += f[i];
    const SceneObject* o = scene.FindLabel(m.label);
    if (!o) {
      add(m.phrase.head_token, PenaltyKind::kObject, -1.0);
      continue;
    }
    const double p = AttributePenalty(
        Cosine(features.ObjectFeatures(o->label, o->attributes), f));
    if (std::abs(p) > kPenaltyEpsilon) {
      add(m.phrase.head_token, PenaltyKind::kAttribute, p);
    }
  }
  for (const auto& c : cands) {
    const SceneObject* a = scene.FindLabel(ToLower(ex.tokens[c.first.head_token].text));
    const SceneObject* b = scene.FindLabel(ToLower(ex.tokens[c.second.head_token].text));
    if (!a || !b) continue;
    const double v[2] = {b->center.x - a->center.x, b->center.y - a->center.y};
    if (v[0] == 0 && v[1] == 0) continue;
    const Point d = *RelationDirection(ToLower(ex.tokens[c.positional_token].text));
    const double dir[2] = {d.x, d.y};
    const double p = RelationPenalty(Cosine(v, dir));
    if (std::abs(p) > kPenaltyEpsilon) {
      add(c.positional_token, PenaltyKind::kRelation, p);
    }
  }
  std::sort(report.penalties.begin(), report.penalties.end(),
            [](const PenaltyRecord& x, const PenaltyRecord& y) {
              return std::tie(x.token, x.kind) < std::tie(y.token, y.kind);
            });
  report.r_rec =
      HolisticReward(Cosine(features.SceneFeatures(scene), caption_features));
  return report;
}

double TotalPenalty(const DetectionReport& report) {
  double total = 0;
  for (const auto& p : report.penalties) total += p.value;
  return total;
}

std::vector<SceneGraph> EnumerateSceneFamily(int max_objects, int variants,
                                             const FeatureSpace& features) {
  static const Cell kSteps[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const std::vector<std::set<std::string>> patterns = {
      {}, {"red"}, {"blue", "small"}, {"green"}, {"large", "shiny"},
      {"yellow"}, {"wooden"}, {"red", "large"}};
  // Labels reserved for add_object corruptions are skipped.
  std::vector<std::string> labels;
  for (const auto& l : features.labels()) {
    if (l != "clock") labels.push_back(l);
  }

  std::vector<std::vector<Cell>> walks;
  std::vector<Cell> walk{{0, 0}};
  auto extend = [&](auto&& self) -> void {
    walks.push_back(walk);
    if (static_cast<int>(walk.size()) == max_objects) return;
    for (const Cell& s : kSteps) {
      Cell next{walk.back().x + s.x, walk.back().y + s.y};
      if (std::find_if(walk.begin(), walk.end(), [&](const Cell& c) {
            return c.x == next.x && c.y == next.y;
          }) != walk.end()) {
        continue;
      }
      walk.push_back(next);
      self(self);
      walk.pop_back();
    }
  };
  extend(extend);

  std::vector<SceneGraph> scenes;
  for (std::size_t w = 0; w < walks.size(); ++w) {
    const auto& cells = walks[w];
    int min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    for (const auto& c : cells) {
      min_x = std::min(min_x, c.x);
      max_x = std::max(max_x, c.x);
      min_y = std::min(min_y, c.y);
      max_y = std::max(max_y, c.y);
    }
    for (int v = 0; v < variants; ++v) {
      SceneGraph scene;
      scene.id = "fam-" + std::to_string(w) + "-" + std::to_string(v);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        SceneObject o;
        o.id = static_cast<int>(i);
        o.label = labels[(v * 3 + i) % labels.size()];
        o.attributes = patterns[(v + 2 * i) % patterns.size()];
        o.center = {0.5 + (cells[i].x - (min_x + max_x) / 2.0) * 0.15,
                    0.5 + (cells[i].y - (min_y + max_y) / 2.0) * 0.15};
        o.width = o.height = 0.1;
        scene.objects.push_back(std::move(o));
      }
      scenes.push_back(std::move(scene));
    }
  }
  return scenes;
}

std::vector<FamilyCase> EnumerateFamilyCases(const std::vector<SceneGraph>& scenes,
                                             const FeatureSpace& features) {
  std::vector<FamilyCase> cases;
  for (const auto& scene : scenes) {
    const std::string faithful = RenderCaption(scene, 0);
    cases.push_back({scene, faithful, std::nullopt});
    auto push = [&](CorruptionSpec spec) {
      cases.push_back({scene, Corrupt(scene, faithful, spec, 0, features), spec});
    };
    for (const auto& l : features.labels()) {
      if (!scene.FindLabel(l)) {
        push({CorruptionKind::kAddObject, -1, l});
        break;
      }
    }
    for (const auto& o : scene.objects) {
      for (const auto& a : features.attributes()) {
        if (!o.attributes.contains(a)) {
          push({CorruptionKind::kAlterAttribute, o.id, a});
          break;
        }
      }
    }
    for (std::size_t r = 0; r + 1 < scene.objects.size(); ++r) {
      push({CorruptionKind::kFlipRelation, static_cast<int>(r), ""});
    }
  }
  return cases;
}

}  // namespace halloc
