#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sschema/ocr.hpp"

namespace sschema {

// OCR script file: JSON array of entries
//   {"frame":N,"rect":[x,y,w,h],"results":[{"text":...,"bbox":[x,y,w,h],"conf":...}]}
// with result bboxes in frame coordinates. Unscripted (frame, rect) pairs
// recognize to [].
MockOcrBackend load_ocr_script(const std::filesystem::path& path);

// MLLM replay script file: {"answers":["...", ...]}, consumed in request
// order.
std::vector<std::string> load_answer_script(const std::filesystem::path& path);

}  // namespace sschema
