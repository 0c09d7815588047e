#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace sschema {

// Pipeline defaults; flags override file values, file values override
// these.
struct PipelineConfig {
    int delta = 30;
    int k = 5;
    int min_area = 25;
    int merge_gap = 4;
    int q_tokens = 4;
    int dim = 8;
    double alpha = 0.5;
    std::uint64_t seed = 42;
    double fps = 10.0;
    std::string ocr_cmd;
    std::string mllm_endpoint;
    double temperature = 0.0;
    double top_p = 0.7;
    int max_tokens = 256;
};

// Flat JSON object with the keys above; unknown keys are errors.
PipelineConfig load_config_file(const std::filesystem::path& path,
                                PipelineConfig base = {});

}  // namespace sschema
