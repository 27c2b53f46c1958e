#include "steerlab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "json.hpp"

namespace steerlab {

using nlohmann::json;

namespace {

// Seed namespaces keep corpus clips, contrastive prompts and eval prompts
// on disjoint streams even when the user passes the same base seed.
constexpr uint64_t kCorpusNs = 0x436f7270ull;
constexpr uint64_t kContrastNs = 0x436f6e74ull;
constexpr uint64_t kEvalNs = 0x4576616cull;

struct TempoRange {
  double lo, hi;
  int k_min, k_max;  // duration steps whose grid BPM lies inside [lo, hi]
};

TempoRange tempo_range(TempoClass c) {
  switch (c) {
    case TempoClass::Slow:
      return {60.0, 96.0, 25, 32};
    case TempoClass::Neutral:
      return {97.0, 143.0, 17, 24};
    case TempoClass::Fast:
      return {144.0, 180.0, 14, 16};
  }
  throw std::logic_error("tempo_range");
}

std::vector<int> bright_levels(TimbreClass c) {
  switch (c) {
    case TimbreClass::Dark:
      return {0, 1, 2};
    case TimbreClass::Neutral:
      return {3, 4};
    case TimbreClass::Bright:
      return {5, 6, 7};
  }
  throw std::logic_error("bright_levels");
}

// Zero-sum +/-1 jitter: n/3 up, n/3 down, rest zero, then shuffled. The
// balanced sum keeps a clip's mean IOI (and mean brightness) on its base
// grid value, which pins truth_bpm inside the class range by construction.
std::vector<int> zero_sum_jitter(int n, RngState& rng) {
  std::vector<int> j(static_cast<size_t>(n), 0);
  const int third = n / 3;
  for (int i = 0; i < third; ++i) j[static_cast<size_t>(i)] = 1;
  for (int i = third; i < 2 * third; ++i) j[static_cast<size_t>(i)] = -1;
  for (int i = n - 1; i > 0; --i) {
    const int k = static_cast<int>(rng.next_below(static_cast<uint64_t>(i + 1)));
    std::swap(j[static_cast<size_t>(i)], j[static_cast<size_t>(k)]);
  }
  return j;
}

const std::vector<std::string>& pool_for_tempo(TempoClass c) {
  const GrammarPools& g = grammar_pools_v1();
  switch (c) {
    case TempoClass::Slow:
      return g.slow;
    case TempoClass::Neutral:
      return g.tempo_neutral;
    case TempoClass::Fast:
      return g.fast;
  }
  throw std::logic_error("pool_for_tempo");
}

const std::vector<std::string>& pool_for_timbre(TimbreClass c) {
  const GrammarPools& g = grammar_pools_v1();
  switch (c) {
    case TimbreClass::Dark:
      return g.dark;
    case TimbreClass::Neutral:
      return g.timbre_neutral;
    case TimbreClass::Bright:
      return g.bright;
  }
  throw std::logic_error("pool_for_timbre");
}

const std::string& draw_word(const std::vector<std::string>& pool, RngState& rng) {
  return pool[static_cast<size_t>(rng.next_below(pool.size()))];
}

json clip_to_json(const TokenVocab& vocab, const Clip& clip) {
  json j;
  j["prompt_tokens"] = clip.prompt_tokens;
  j["event_tokens"] = clip.event_tokens;
  j["truth_bpm"] = clip.truth_bpm;
  j["truth_brightness"] = clip.truth_brightness;
  j["tempo_class"] = to_string(clip.tempo_class);
  j["timbre_class"] = to_string(clip.timbre_class);
  j["prompt_text"] = prompt_text(vocab, clip.prompt_tokens);
  return j;
}

}  // namespace

const char* to_string(TempoClass c) {
  switch (c) {
    case TempoClass::Slow:
      return "slow";
    case TempoClass::Neutral:
      return "neutral";
    case TempoClass::Fast:
      return "fast";
  }
  return "?";
}

const char* to_string(TimbreClass c) {
  switch (c) {
    case TimbreClass::Dark:
      return "dark";
    case TimbreClass::Neutral:
      return "neutral";
    case TimbreClass::Bright:
      return "bright";
  }
  return "?";
}

const char* to_string(Attribute a) { return a == Attribute::Tempo ? "tempo" : "timbre"; }

TempoClass tempo_class_from_string(const std::string& s) {
  if (s == "slow") return TempoClass::Slow;
  if (s == "neutral") return TempoClass::Neutral;
  if (s == "fast") return TempoClass::Fast;
  throw std::invalid_argument("unknown tempo class: " + s);
}

TimbreClass timbre_class_from_string(const std::string& s) {
  if (s == "dark") return TimbreClass::Dark;
  if (s == "neutral") return TimbreClass::Neutral;
  if (s == "bright") return TimbreClass::Bright;
  throw std::invalid_argument("unknown timbre class: " + s);
}

Attribute attribute_from_string(const std::string& s) {
  if (s == "tempo") return Attribute::Tempo;
  if (s == "timbre") return Attribute::Timbre;
  throw std::invalid_argument("unknown attribute: " + s);
}

const GrammarPools& grammar_pools_v1() {
  static const GrammarPools pools = {
      // fast
      {"fast", "quick", "rapid", "energetic", "lively", "brisk", "racing", "uptempo",
       "frantic", "speedy"},
      // slow
      {"slow", "calm", "gentle", "relaxed", "leisurely", "soothing", "unhurried",
       "drowsy", "lazy", "restful"},
      // tempo_neutral
      {"steady", "flowing", "walking", "easygoing", "measured", "rolling", "ambling",
       "cruising", "strolling", "gliding"},
      // bright
      {"bright", "shiny", "crisp", "sparkling", "brilliant", "glittering", "radiant",
       "vivid", "shimmering", "gleaming"},
      // dark
      {"dark", "deep", "somber", "muted", "subdued", "mellow", "shadowy", "dusky",
       "gloomy", "murky"},
      // timbre_neutral
      {"balanced", "natural", "rounded", "plain", "modest", "simple", "ordinary",
       "typical", "standard", "common"},
      // genre
      {"folk", "jazz", "rock", "electronic", "orchestral", "ambient", "blues", "pop",
       "country", "cinematic"},
      // instrument
      {"guitar", "piano", "violin", "synth", "flute", "drums", "cello", "trumpet",
       "harp", "organ"},
  };
  return pools;
}

TokenVocab build_vocab(const std::string& grammar_version) {
  if (grammar_version != "v1") {
    throw std::invalid_argument("unknown grammar version: " + grammar_version);
  }
  TokenVocab v;
  v.grammar_version = grammar_version;
  auto push = [&v](const std::string& tok) {
    v.ids.emplace(tok, static_cast<int32_t>(v.tokens.size()));
    v.tokens.push_back(tok);
  };
  push("<NULL>");
  push("<SEP>");
  push("<END>");
  v.null_id = 0;
  v.sep_id = 1;
  v.end_id = 2;

  const GrammarPools& g = grammar_pools_v1();
  for (const auto* pool : {&g.fast, &g.slow, &g.tempo_neutral, &g.bright, &g.dark,
                           &g.timbre_neutral, &g.genre, &g.instrument}) {
    for (const std::string& w : *pool) push(w);
  }
  push("piece");

  v.pitch_base = v.size();
  for (int p = 36; p <= 84; ++p) push("PITCH_" + std::to_string(p));
  v.dur_base = v.size();
  for (int d = 1; d <= kNumDur; ++d) push("DUR_" + std::to_string(d));
  v.bright_base = v.size();
  for (int b = 0; b < kNumBright; ++b) push("BRIGHT_" + std::to_string(b));
  return v;
}

int32_t TokenVocab::id_of(const std::string& token) const {
  auto it = ids.find(token);
  if (it == ids.end()) throw std::invalid_argument("unknown token: " + token);
  return it->second;
}

const std::string& TokenVocab::text_of(int32_t id) const {
  if (id < 0 || id >= size()) throw std::invalid_argument("token id out of range");
  return tokens[static_cast<size_t>(id)];
}

std::vector<NoteEvent> decode_events(const TokenVocab& vocab,
                                     const std::vector<int32_t>& event_tokens) {
  std::vector<NoteEvent> events;
  size_t i = 0;
  while (i < event_tokens.size() && event_tokens[i] != vocab.end_id) {
    if (i + 2 >= event_tokens.size() || !vocab.is_pitch(event_tokens[i]) ||
        !vocab.is_dur(event_tokens[i + 1]) || !vocab.is_bright(event_tokens[i + 2])) {
      throw std::invalid_argument("malformed event triple at token " + std::to_string(i));
    }
    events.push_back({vocab.pitch_value(event_tokens[i]),
                      vocab.dur_value(event_tokens[i + 1]),
                      vocab.bright_value(event_tokens[i + 2])});
    i += 3;
  }
  if (i >= event_tokens.size() || event_tokens[i] != vocab.end_id) {
    throw std::invalid_argument("event list does not end with END");
  }
  return events;
}

std::vector<NoteEvent> decode_events_lenient(const TokenVocab& vocab,
                                             const std::vector<int32_t>& tokens) {
  std::vector<NoteEvent> events;
  NoteEvent current;
  int state = 0;  // 0: want pitch, 1: want dur, 2: want bright
  for (int32_t t : tokens) {
    if (t == vocab.end_id) break;
    switch (state) {
      case 0:
        if (vocab.is_pitch(t)) {
          current.pitch = vocab.pitch_value(t);
          state = 1;
        }
        break;
      case 1:
        if (vocab.is_dur(t)) {
          current.dur_steps = vocab.dur_value(t);
          state = 2;
        } else if (vocab.is_pitch(t)) {
          current.pitch = vocab.pitch_value(t);  // restart the triple
        } else {
          state = 0;
        }
        break;
      case 2:
        if (vocab.is_bright(t)) {
          current.bright = vocab.bright_value(t);
          events.push_back(current);
          state = 0;
        } else if (vocab.is_pitch(t)) {
          current.pitch = vocab.pitch_value(t);
          state = 1;
        } else {
          state = 0;
        }
        break;
    }
  }
  return events;
}

std::vector<int32_t> encode_events(const TokenVocab& vocab,
                                   const std::vector<NoteEvent>& events) {
  std::vector<int32_t> out;
  out.reserve(events.size() * 3 + 1);
  for (const NoteEvent& e : events) {
    out.push_back(vocab.pitch_token(e.pitch));
    out.push_back(vocab.dur_token(e.dur_steps));
    out.push_back(vocab.bright_token(e.bright));
  }
  out.push_back(vocab.end_id);
  return out;
}

std::vector<int32_t> render_prompt(const TokenVocab& vocab, AttributeClass cls,
                                   RngState& rng) {
  std::vector<int32_t> prompt;
  prompt.reserve(6);
  prompt.push_back(vocab.id_of(draw_word(pool_for_tempo(cls.tempo), rng)));
  prompt.push_back(vocab.id_of(draw_word(pool_for_timbre(cls.timbre), rng)));
  prompt.push_back(vocab.id_of(draw_word(grammar_pools_v1().genre, rng)));
  prompt.push_back(vocab.id_of(draw_word(grammar_pools_v1().instrument, rng)));
  prompt.push_back(vocab.id_of("piece"));
  prompt.push_back(vocab.sep_id);
  return prompt;
}

std::string prompt_text(const TokenVocab& vocab, const std::vector<int32_t>& prompt) {
  std::string out;
  for (int32_t id : prompt) {
    if (id == vocab.sep_id) continue;
    if (!out.empty()) out += ' ';
    out += vocab.text_of(id);
  }
  return out;
}

Clip sample_clip(const TokenVocab& vocab, AttributeClass cls, RngState& rng) {
  Clip clip;
  clip.tempo_class = cls.tempo;
  clip.timbre_class = cls.timbre;
  clip.prompt_tokens = render_prompt(vocab, cls, rng);

  const int n_events = 24 + static_cast<int>(rng.next_below(9));
  const TempoRange tr = tempo_range(cls.tempo);
  const double bpm_draw = rng.uniform(tr.lo, tr.hi);
  int base_steps = static_cast<int>(std::lround(60.0 / bpm_draw / kDurStepSeconds));
  base_steps = std::clamp(base_steps, tr.k_min, tr.k_max);

  const std::vector<int> levels = bright_levels(cls.timbre);
  const int base_bright = levels[static_cast<size_t>(rng.next_below(levels.size()))];

  int pitch = 48 + static_cast<int>(rng.next_below(25));

  const std::vector<int> dur_jitter = zero_sum_jitter(n_events, rng);
  const std::vector<int> bright_jitter = zero_sum_jitter(n_events, rng);

  std::vector<NoteEvent> events;
  events.reserve(static_cast<size_t>(n_events));
  for (int i = 0; i < n_events; ++i) {
    NoteEvent e;
    e.pitch = pitch;
    e.dur_steps = std::clamp(base_steps + dur_jitter[static_cast<size_t>(i)], 1, kNumDur);
    e.bright = std::clamp(base_bright + bright_jitter[static_cast<size_t>(i)], 0,
                          kNumBright - 1);
    events.push_back(e);
    const int step = static_cast<int>(rng.next_below(7)) - 3;
    pitch += step;
    if (pitch > 84) pitch = 168 - pitch;
    if (pitch < 36) pitch = 72 - pitch;
  }
  clip.event_tokens = encode_events(vocab, events);

  double ioi_sum = 0.0;
  double bright_sum = 0.0;
  for (const NoteEvent& e : events) {
    ioi_sum += e.dur_steps * kDurStepSeconds;
    bright_sum += e.bright;
  }
  clip.truth_bpm = 60.0 / (ioi_sum / n_events);
  clip.truth_brightness = bright_sum / n_events;
  return clip;
}

double clip_mean_ioi_seconds(const TokenVocab& vocab, const Clip& clip) {
  const std::vector<NoteEvent> events = decode_events(vocab, clip.event_tokens);
  if (events.empty()) throw std::invalid_argument("clip has no events");
  double s = 0.0;
  for (const NoteEvent& e : events) s += e.dur_steps * kDurStepSeconds;
  return s / static_cast<double>(events.size());
}

std::array<double, 9> uniform_class_mix() {
  std::array<double, 9> mix{};
  mix.fill(1.0 / 9.0);
  return mix;
}

AttributeClass class_from_index(int index) {
  if (index < 0 || index >= 9) throw std::invalid_argument("class index out of range");
  return {static_cast<TempoClass>(index / 3), static_cast<TimbreClass>(index % 3)};
}

void generate_corpus(const std::string& path, const TokenVocab& vocab, int64_t n_clips,
                     const std::array<double, 9>& class_mix, uint64_t seed) {
  double mix_sum = 0.0;
  for (double m : class_mix) {
    if (m < 0.0) throw std::invalid_argument("class mix entries must be >= 0");
    mix_sum += m;
  }
  if (std::fabs(mix_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("class mix must sum to 1");
  }

  std::vector<std::string> lines(static_cast<size_t>(n_clips));
#pragma omp parallel for schedule(dynamic, 64)
  for (int64_t i = 0; i < n_clips; ++i) {
    RngState rng(derive_seed(seed, {kCorpusNs, static_cast<uint64_t>(i)}));
    const double u = rng.next_double();
    double cum = 0.0;
    int cls_idx = 8;
    for (int c = 0; c < 9; ++c) {
      cum += class_mix[static_cast<size_t>(c)];
      if (u < cum) {
        cls_idx = c;
        break;
      }
    }
    const Clip clip = sample_clip(vocab, class_from_index(cls_idx), rng);
    lines[static_cast<size_t>(i)] = clip_to_json(vocab, clip).dump();
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open corpus file for writing: " + path);
  json header;
  header["type"] = "header";
  header["format_version"] = 1;
  header["grammar_version"] = vocab.grammar_version;
  header["seed"] = seed;
  header["n_clips"] = n_clips;
  header["class_mix"] = class_mix;
  out << header.dump() << '\n';
  for (const std::string& line : lines) out << line << '\n';
  if (!out) throw std::runtime_error("failed writing corpus file: " + path);
}

Corpus load_corpus(const std::string& path, const TokenVocab& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty corpus file: " + path);
  json header = json::parse(line);
  if (header.value("type", "") != "header") {
    throw std::runtime_error("corpus file missing header record");
  }
  Corpus corpus;
  corpus.header.format_version = header.at("format_version").get<int>();
  corpus.header.grammar_version = header.at("grammar_version").get<std::string>();
  corpus.header.seed = header.at("seed").get<uint64_t>();
  corpus.header.n_clips = header.at("n_clips").get<int64_t>();
  const auto mix = header.at("class_mix").get<std::vector<double>>();
  if (mix.size() != 9) throw std::runtime_error("corpus header: bad class_mix");
  std::copy(mix.begin(), mix.end(), corpus.header.class_mix.begin());
  if (corpus.header.grammar_version != vocab.grammar_version) {
    throw std::runtime_error("corpus grammar version does not match vocabulary");
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    Clip clip;
    clip.prompt_tokens = j.at("prompt_tokens").get<std::vector<int32_t>>();
    clip.event_tokens = j.at("event_tokens").get<std::vector<int32_t>>();
    clip.truth_bpm = j.at("truth_bpm").get<double>();
    clip.truth_brightness = j.at("truth_brightness").get<double>();
    clip.tempo_class = tempo_class_from_string(j.at("tempo_class").get<std::string>());
    clip.timbre_class = timbre_class_from_string(j.at("timbre_class").get<std::string>());
    for (int32_t id : clip.prompt_tokens) vocab.text_of(id);
    if (clip.prompt_tokens.empty() || clip.prompt_tokens.back() != vocab.sep_id) {
      throw std::runtime_error("corpus clip prompt does not end with SEP");
    }
    decode_events(vocab, clip.event_tokens);  // validates triple structure
    corpus.clips.push_back(std::move(clip));
  }
  if (static_cast<int64_t>(corpus.clips.size()) != corpus.header.n_clips) {
    throw std::runtime_error("corpus clip count does not match header");
  }
  return corpus;
}

std::pair<PromptSet, PromptSet> make_contrastive_sets(const TokenVocab& vocab,
                                                      Attribute attribute, int n,
                                                      uint64_t seed) {
  if (n < 1) throw std::invalid_argument("contrastive set size must be >= 1");
  PromptSet a, b;
  if (attribute == Attribute::Tempo) {
    a.name = "S_Fast";
    b.name = "S_Slow";
    a.cls = {TempoClass::Fast, TimbreClass::Neutral};
    b.cls = {TempoClass::Slow, TimbreClass::Neutral};
  } else {
    a.name = "S_Bright";
    b.name = "S_Dark";
    a.cls = {TempoClass::Neutral, TimbreClass::Bright};
    b.cls = {TempoClass::Neutral, TimbreClass::Dark};
  }
  const GrammarPools& g = grammar_pools_v1();
  for (int i = 0; i < n; ++i) {
    RngState rng(derive_seed(
        seed, {kContrastNs, static_cast<uint64_t>(attribute), static_cast<uint64_t>(i)}));
    const std::string neutral_word = draw_word(
        attribute == Attribute::Tempo ? g.timbre_neutral : g.tempo_neutral, rng);
    const std::string genre = draw_word(g.genre, rng);
    const std::string instrument = draw_word(g.instrument, rng);
    const std::string word_a =
        draw_word(attribute == Attribute::Tempo ? g.fast : g.bright, rng);
    const std::string word_b =
        draw_word(attribute == Attribute::Tempo ? g.slow : g.dark, rng);

    auto build = [&](const std::string& marked) {
      std::vector<int32_t> p;
      if (attribute == Attribute::Tempo) {
        p = {vocab.id_of(marked), vocab.id_of(neutral_word)};
      } else {
        p = {vocab.id_of(neutral_word), vocab.id_of(marked)};
      }
      p.push_back(vocab.id_of(genre));
      p.push_back(vocab.id_of(instrument));
      p.push_back(vocab.id_of("piece"));
      p.push_back(vocab.sep_id);
      return p;
    };
    a.prompts.push_back(build(word_a));
    b.prompts.push_back(build(word_b));
  }
  return {a, b};
}

PromptSet make_eval_prompts(const TokenVocab& vocab, int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("eval set size must be >= 1");
  PromptSet set;
  set.name = "S_Eval";
  set.cls = {TempoClass::Neutral, TimbreClass::Neutral};
  for (int i = 0; i < n; ++i) {
    RngState rng(derive_seed(seed, {kEvalNs, static_cast<uint64_t>(i)}));
    set.prompts.push_back(render_prompt(vocab, set.cls, rng));
  }
  return set;
}

void write_grammar_file(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open grammar file for writing: " + path);
  out << "# grammar v1 word pools\n";
  const GrammarPools& g = grammar_pools_v1();
  const std::pair<const char*, const std::vector<std::string>*> pools[] = {
      {"fast", &g.fast},           {"slow", &g.slow},
      {"tempo_neutral", &g.tempo_neutral}, {"bright", &g.bright},
      {"dark", &g.dark},           {"timbre_neutral", &g.timbre_neutral},
      {"genre", &g.genre},         {"instrument", &g.instrument},
  };
  for (const auto& [name, pool] : pools) {
    for (const std::string& w : *pool) out << name << '\t' << w << '\n';
  }
}

}  // namespace steerlab
