#pragma once

#include "json.hpp"
#include "tabloop/loop_extract.h"

namespace tabloop {

nlohmann::json paramsToJson(const ExtractionParams& params);
ExtractionParams paramsFromJson(const nlohmann::json& value);

/// One JSONL row of loop metadata as written by extraction outputs.
nlohmann::json loopMetadataJson(const std::string& song, int loop_index,
                                const std::string& file, const LoopCandidate& candidate,
                                const ExtractionParams& params);

}  // namespace tabloop
