#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "steerlab/rng.hpp"

namespace steerlab {

enum class TempoClass { Slow, Neutral, Fast };
enum class TimbreClass { Dark, Neutral, Bright };
enum class Attribute { Tempo, Timbre };

struct AttributeClass {
  TempoClass tempo = TempoClass::Neutral;
  TimbreClass timbre = TimbreClass::Neutral;
};

const char* to_string(TempoClass c);
const char* to_string(TimbreClass c);
const char* to_string(Attribute a);
TempoClass tempo_class_from_string(const std::string& s);
TimbreClass timbre_class_from_string(const std::string& s);
Attribute attribute_from_string(const std::string& s);

// Duration grid: DUR_k is k * 25 ms of inter-onset interval.
inline constexpr double kDurStepSeconds = 0.025;
inline constexpr int kNumPitch = 49;   // PITCH_36 .. PITCH_84
inline constexpr int kNumDur = 32;     // DUR_1 .. DUR_32
inline constexpr int kNumBright = 8;   // BRIGHT_0 .. BRIGHT_7

struct TokenVocab {
  std::string grammar_version;
  std::vector<std::string> tokens;  // id -> text
  std::unordered_map<std::string, int32_t> ids;

  int32_t null_id = -1;
  int32_t sep_id = -1;
  int32_t end_id = -1;
  int32_t pitch_base = -1;
  int32_t dur_base = -1;
  int32_t bright_base = -1;

  int32_t size() const { return static_cast<int32_t>(tokens.size()); }
  int32_t id_of(const std::string& token) const;
  const std::string& text_of(int32_t id) const;

  bool is_pitch(int32_t id) const { return id >= pitch_base && id < pitch_base + kNumPitch; }
  bool is_dur(int32_t id) const { return id >= dur_base && id < dur_base + kNumDur; }
  bool is_bright(int32_t id) const { return id >= bright_base && id < bright_base + kNumBright; }

  int pitch_value(int32_t id) const { return 36 + (id - pitch_base); }
  int dur_value(int32_t id) const { return 1 + (id - dur_base); }
  int bright_value(int32_t id) const { return id - bright_base; }

  int32_t pitch_token(int midi) const { return pitch_base + (midi - 36); }
  int32_t dur_token(int steps) const { return dur_base + (steps - 1); }
  int32_t bright_token(int level) const { return bright_base + level; }
};

// Deterministic vocabulary for a grammar version (only "v1" exists).
TokenVocab build_vocab(const std::string& grammar_version);

// Word pools of grammar v1, exposed for tests and for the shipped data file.
struct GrammarPools {
  std::vector<std::string> fast, slow, tempo_neutral;
  std::vector<std::string> bright, dark, timbre_neutral;
  std::vector<std::string> genre, instrument;
};
const GrammarPools& grammar_pools_v1();

struct NoteEvent {
  int pitch = 60;      // MIDI note number
  int dur_steps = 20;  // inter-onset interval in 25 ms steps
  int bright = 3;      // harmonic rolloff level 0..7
};

struct Clip {
  std::vector<int32_t> prompt_tokens;  // ends with SEP
  std::vector<int32_t> event_tokens;   // (PITCH, DUR, BRIGHT)* END
  double truth_bpm = 0.0;
  double truth_brightness = 0.0;
  TempoClass tempo_class = TempoClass::Neutral;
  TimbreClass timbre_class = TimbreClass::Neutral;
};

// Strict triple decoding; throws on malformed event lists.
std::vector<NoteEvent> decode_events(const TokenVocab& vocab,
                                     const std::vector<int32_t>& event_tokens);
// Tolerant decoding for model-generated sequences: scans for in-order
// (PITCH, DUR, BRIGHT) triples and drops anything else.
std::vector<NoteEvent> decode_events_lenient(const TokenVocab& vocab,
                                             const std::vector<int32_t>& tokens);
std::vector<int32_t> encode_events(const TokenVocab& vocab,
                                   const std::vector<NoteEvent>& events);

// "<tempo-adj> <timbre-adj> <genre> <instrument> piece SEP"
std::vector<int32_t> render_prompt(const TokenVocab& vocab, AttributeClass cls,
                                   RngState& rng);
std::string prompt_text(const TokenVocab& vocab, const std::vector<int32_t>& prompt);

Clip sample_clip(const TokenVocab& vocab, AttributeClass cls, RngState& rng);

double clip_mean_ioi_seconds(const TokenVocab& vocab, const Clip& clip);

struct CorpusHeader {
  int format_version = 1;
  std::string grammar_version = "v1";
  uint64_t seed = 0;
  int64_t n_clips = 0;
  std::array<double, 9> class_mix{};  // index = tempo*3 + timbre
};

struct Corpus {
  CorpusHeader header;
  std::vector<Clip> clips;
};

std::array<double, 9> uniform_class_mix();
AttributeClass class_from_index(int index);

// JSONL corpus: header record first, one clip per line. Clip sampling is
// partitioned by clip index with per-index derived seeds, so generation is
// order-independent and the file bytes depend only on (seed, n, mix).
void generate_corpus(const std::string& path, const TokenVocab& vocab, int64_t n_clips,
                     const std::array<double, 9>& class_mix, uint64_t seed);
Corpus load_corpus(const std::string& path, const TokenVocab& vocab);

struct PromptSet {
  std::string name;
  AttributeClass cls;
  std::vector<std::vector<int32_t>> prompts;
};

// Contrastive pair (A = fast or bright, B = slow or dark). Prompts are
// paired: all slots other than the marked axis carry identical draws, so
// the sets differ only in the marked-axis adjective.
std::pair<PromptSet, PromptSet> make_contrastive_sets(const TokenVocab& vocab,
                                                      Attribute attribute, int n,
                                                      uint64_t seed);
// Fully neutral prompts; seed namespace disjoint from the contrastive one.
PromptSet make_eval_prompts(const TokenVocab& vocab, int n, uint64_t seed);

// Writes the v1 word pools as a TSV data file (pool name, word).
void write_grammar_file(const std::string& path);

}  // namespace steerlab
