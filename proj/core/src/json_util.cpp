#include "json_util.h"

namespace tabloop {

nlohmann::json paramsToJson(const ExtractionParams& params) {
  return nlohmann::json{
      {"l_min", params.l_min},
      {"rd_min", params.rd_min},
      {"lb_min", params.lb_min},
      {"lb_max", params.lb_max},
      {"rho_min", params.rho_min},
      {"density_mode", params.density_mode == DensityMode::kPerTrack ? "per_track" : "literal"},
  };
}

ExtractionParams paramsFromJson(const nlohmann::json& value) {
  ExtractionParams params;
  params.l_min = value.at("l_min").get<int>();
  params.rd_min = value.at("rd_min").get<double>();
  params.lb_min = value.at("lb_min").get<int>();
  params.lb_max = value.at("lb_max").get<int>();
  params.rho_min = value.at("rho_min").get<double>();
  if (value.contains("density_mode")) {
    params.density_mode = value.at("density_mode").get<std::string>() == "per_track"
                              ? DensityMode::kPerTrack
                              : DensityMode::kLiteral;
  }
  return params;
}

nlohmann::json loopMetadataJson(const std::string& song, int loop_index,
                                const std::string& file, const LoopCandidate& candidate,
                                const ExtractionParams& params) {
  return nlohmann::json{
      {"song", song},
      {"loop_index", loop_index},
      {"file", file},
      {"s_i", candidate.s_i},
      {"s_j", candidate.s_j},
      {"bookend_events", candidate.n_end},
      {"bookend_ticks", candidate.d_ticks},
      {"start_tick", candidate.start_tick},
      {"end_tick", candidate.end_tick},
      {"body_bars", candidate.body_bars},
      {"body_events", candidate.body_events},
      {"density", candidate.density},
      {"source", loopSourceName(candidate.source)},
      {"params", paramsToJson(params)},
  };
}

}  // namespace tabloop
