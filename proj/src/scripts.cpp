#include "sschema/scripts.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "sschema/errors.hpp"

namespace sschema {

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

MockOcrBackend load_ocr_script(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(slurp(path), nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
        throw ValidationError("OCR script must be a JSON array: " + path.string());
    }
    MockOcrBackend mock;
    for (const auto& entry : j) {
        if (!entry.is_object() || !entry.contains("frame") || !entry.contains("rect") ||
            !entry.contains("results") || !entry["rect"].is_array() ||
            entry["rect"].size() != 4 || !entry["results"].is_array()) {
            throw ValidationError("OCR script entry needs frame, rect[4], results[]");
        }
        Rect rect{entry["rect"][0].get<int>(), entry["rect"][1].get<int>(),
                  entry["rect"][2].get<int>(), entry["rect"][3].get<int>()};
        std::vector<OcrResult> results;
        for (const auto& rj : entry["results"]) {
            if (!rj.is_object() || !rj.contains("text") || !rj.contains("bbox") ||
                !rj.contains("conf") || !rj["bbox"].is_array() || rj["bbox"].size() != 4) {
                throw ValidationError("OCR script result needs text, bbox[4], conf");
            }
            OcrResult r;
            r.text = rj["text"].get<std::string>();
            r.bbox = Rect{rj["bbox"][0].get<int>(), rj["bbox"][1].get<int>(),
                          rj["bbox"][2].get<int>(), rj["bbox"][3].get<int>()};
            r.confidence = rj["conf"].get<double>();
            results.push_back(std::move(r));
        }
        mock.script(entry["frame"].get<int>(), rect, std::move(results));
    }
    return mock;
}

std::vector<std::string> load_answer_script(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(slurp(path), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("answers") ||
        !j["answers"].is_array()) {
        throw ValidationError("answer script must be {\"answers\":[...]}: " + path.string());
    }
    std::vector<std::string> answers;
    for (const auto& a : j["answers"]) {
        if (!a.is_string()) throw ValidationError("answers must be strings: " + path.string());
        answers.push_back(a.get<std::string>());
    }
    return answers;
}

}  // namespace sschema
