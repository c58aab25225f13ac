#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/lexicon_pipeline.hpp"

namespace harvest::presets {

// Seed terms and topic for one lexicon.
struct LexiconPreset {
  std::string name;
  std::string topic;
  std::vector<std::string> seed_terms;
};

// "main", "Z" and "P".
std::vector<LexiconPreset> lexicon_presets();
std::optional<LexiconPreset> lexicon_preset(std::string_view name);

// Shipped pipeline defaults with the preset's seeds and topic filled in.
lexicon::PipelineConfig pipeline_config(const LexiconPreset& preset);

}  // namespace harvest::presets
