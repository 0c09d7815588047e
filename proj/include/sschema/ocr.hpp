#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "sschema/frame.hpp"
#include "sschema/regions.hpp"

namespace sschema {

struct OcrResult {
    std::string text;  // non-empty
    Rect bbox;         // frame coordinates
    double confidence = 0.0;
    friend bool operator==(const OcrResult&, const OcrResult&) = default;
};

// Text recognition over one frame region.
class OcrBackendPort {
public:
    virtual ~OcrBackendPort() = default;
    virtual std::vector<OcrResult> recognize(const Frame& frame, const Rect& rect) = 0;
};

// Runs a configured command per call. The cropped region is written to the
// child's stdin as binary PGM; the child prints one JSON object per result:
//   {"text":...,"x":...,"y":...,"w":...,"h":...,"conf":...}
// with coordinates relative to the crop. Nonzero exit, malformed output, or
// timeout raise BackendError carrying a stderr excerpt.
class ExternalProcessOcrBackend : public OcrBackendPort {
public:
    explicit ExternalProcessOcrBackend(std::string command, double timeout_seconds = 10.0);
    std::vector<OcrResult> recognize(const Frame& frame, const Rect& rect) override;

private:
    std::string command_;
    double timeout_seconds_;
};

// Scripted test double keyed by (frame index, rect). Scripted bboxes use
// frame coordinates and are validated against the rect when registered.
class MockOcrBackend : public OcrBackendPort {
public:
    void script(int frame_index, const Rect& rect, std::vector<OcrResult> results);
    std::vector<OcrResult> recognize(const Frame& frame, const Rect& rect) override;

private:
    using Key = std::tuple<int, int, int, int, int>;  // frame index, x, y, w, h
    std::map<Key, std::vector<OcrResult>> script_;
};

int levenshtein(std::string_view a, std::string_view b);

// Lowercases, trims, and collapses internal whitespace runs to one space.
std::string normalize_menu_text(std::string_view text);

// Best vocabulary item by normalized edit similarity
// 1 - lev(a,b)/max(|a|,|b|); returns items scoring >= 0.8, ties broken by
// vocabulary order.
std::optional<std::pair<std::string, double>> match_menu_item(
    const std::string& text, const std::vector<std::string>& vocabulary);

}  // namespace sschema
