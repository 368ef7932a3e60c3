#pragma once

#include <string>

#include "triad/data.hpp"
#include "triad/eval.hpp"
#include "triad/trainer.hpp"

namespace triad {

/// Everything one experiment needs, declared in a single JSON document.
/// Unknown keys are rejected with the offending path so typos cannot
/// silently fall back to defaults.
struct RunConfig {
    SyntheticConfig data;
    TrainConfig train; // embeds model/loss/balance/optim/spr settings
    EvalOptions eval;
    std::string dataset_dir;
    std::string output_dir;

    void validate() const;
};

RunConfig load_run_config(const std::string& path);

/// Parse from an in-memory JSON string (tests use this).
RunConfig parse_run_config(const std::string& text);

} // namespace triad
