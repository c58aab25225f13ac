#include "harvest/presets.hpp"

namespace harvest::presets {

std::vector<LexiconPreset> lexicon_presets() {
  return {
      {"main", "Israel-Hamas war", {"Israel–Hamas war", "Israel", "Hamas", "Palestinian", "Gaza"}},
      {"Z", "Zionism and antisemitism", {"Zionism", "antisemitism"}},
      {"P", "Free Palestine and Islamophobia", {"Free Palestine", "Islamophobia"}},
  };
}

std::optional<LexiconPreset> lexicon_preset(std::string_view name) {
  for (auto& p : lexicon_presets()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

lexicon::PipelineConfig pipeline_config(const LexiconPreset& preset) {
  lexicon::PipelineConfig config;
  config.topic = preset.topic;
  config.seed_terms = preset.seed_terms;
  return config;
}

}  // namespace harvest::presets
