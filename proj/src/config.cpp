#include "sschema/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "sschema/errors.hpp"

namespace sschema {

PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ValidationError("config file must be a JSON object: " + path.string());
    }

    PipelineConfig cfg = base;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "delta") cfg.delta = value.get<int>();
            else if (key == "k") cfg.k = value.get<int>();
            else if (key == "min_area") cfg.min_area = value.get<int>();
            else if (key == "merge_gap") cfg.merge_gap = value.get<int>();
            else if (key == "q_tokens") cfg.q_tokens = value.get<int>();
            else if (key == "dim") cfg.dim = value.get<int>();
            else if (key == "alpha") cfg.alpha = value.get<double>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "fps") cfg.fps = value.get<double>();
            else if (key == "ocr_cmd") cfg.ocr_cmd = value.get<std::string>();
            else if (key == "mllm_endpoint") cfg.mllm_endpoint = value.get<std::string>();
            else if (key == "temperature") cfg.temperature = value.get<double>();
            else if (key == "top_p") cfg.top_p = value.get<double>();
            else if (key == "max_tokens") cfg.max_tokens = value.get<int>();
            else throw ValidationError("unknown config key: " + key);
        } catch (const nlohmann::json::exception&) {
            throw ValidationError("config key has wrong type: " + key);
        }
    }
    return cfg;
}

}  // namespace sschema
