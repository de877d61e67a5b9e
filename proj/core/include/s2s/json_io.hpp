#pragma once

#include <nlohmann/json.hpp>

#include "s2s/analysis.hpp"
#include "s2s/core_model.hpp"
#include "s2s/limit_process.hpp"
#include "s2s/stochastic.hpp"

namespace s2s {

using Json = nlohmann::json;

// {n, d, basis: "identity" | [[row], ...], labels: [...]}
Json dataset_to_json(const OrthonormalDataset& data);
OrthonormalDataset dataset_from_json(const Json& j);

// Infinite jump times are written as null.
Json limit_process_to_json(const LimitProcess& lp);
LimitProcess limit_process_from_json(const Json& j);

Json report_to_json(const McReport& r);
Json split_to_json(const HalfSplitTrace& trace);  // per-step summary, no per-trial counts
Json comparison_to_json(const JumpComparison& c);
Json slopes_to_json(const SlopeReport& r);

}  // namespace s2s
