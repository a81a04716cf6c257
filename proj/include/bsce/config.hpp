#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bsce/data.hpp"
#include "bsce/model.hpp"
#include "bsce/trainer.hpp"
#include "bsce/tta.hpp"

namespace bsce {

struct TrainSection {
    ModelSpec model;
    TrainConfig config;
};

struct SweepSection {
    std::vector<LossKind> kinds;
    std::vector<std::uint64_t> seeds;
};

struct IoSection {
    std::filesystem::path dataset;
    std::filesystem::path checkpoint;
    std::vector<std::filesystem::path> checkpoints;
    std::filesystem::path history;
    std::filesystem::path report;
    std::string split = "test";
};

// One JSON document per run. Unknown keys are rejected everywhere and every
// section is validated against its module's invariants up front.
struct RunConfig {
    std::optional<DatasetSpec> dataset;
    std::optional<TrainSection> train;
    std::optional<TtaConfig> tta;
    std::optional<SweepSection> sweep;
    IoSection io;
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace bsce
