#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sschema/cursor.hpp"
#include "sschema/frame.hpp"
#include "sschema/ocr.hpp"
#include "sschema/regions.hpp"

namespace sschema {

enum class ElementSource { initial_frame, changed_region };

struct ElementEntry {
    Rect bbox;
    std::string text;
    std::optional<std::string> matched_item;  // present iff match_score present
    std::optional<double> match_score;        // >= 0.8 when present
    double confidence = 0.0;
    ElementSource source = ElementSource::initial_frame;
    friend bool operator==(const ElementEntry&, const ElementEntry&) = default;
};

struct CursorEntry {
    int x = 0;
    int y = 0;
    double confidence = 0.0;
    friend bool operator==(const CursorEntry&, const CursorEntry&) = default;
};

struct FrameEntry {
    int index = 0;
    std::int64_t timestamp_ms = 0;
    bool is_initial = false;
    std::optional<CursorEntry> cursor;
    std::vector<ElementEntry> elements;  // sorted by (bbox.y, bbox.x, text)
    friend bool operator==(const FrameEntry&, const FrameEntry&) = default;
};

// Canonical structured description of a clip's UI state changes: the
// initial frame's full text content plus OCR'd changed regions and cursor
// positions for each key frame.
struct ScreenSchema {
    std::string version = "1";
    std::string clip_id;
    int width = 0;
    int height = 0;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::vector<FrameEntry> frames;  // initial entry first, key frames ascending
    friend bool operator==(const ScreenSchema&, const ScreenSchema&) = default;
};

struct SchemaOptions {
    int delta = 30;
    int k = 5;
    int min_area = 25;
    int merge_gap = 4;
};

// Full pipeline for one clip: frame-0 OCR, key-frame selection, changed
// region detection + OCR, vocabulary matching, optional cursor detection.
// cursor_params may be null (no cursor entries). vocab may be empty (no
// matching).
ScreenSchema compose_schema(const Clip& clip, const SchemaOptions& options,
                            OcrBackendPort& ocr, const CnnParams* cursor_params,
                            const std::vector<std::string>& vocab);

// Canonical UTF-8 bytes: lexicographic keys, no insignificant whitespace,
// bare integers, scores with exactly 4 decimals (round-half-even), one
// trailing newline.
std::string serialize_canonical(const ScreenSchema& schema);

// Accepts any field order/whitespace; validates all invariants.
ScreenSchema parse_schema(std::string_view bytes);

// Compact human-readable rendering used as MLLM prompt payload.
std::string render_prompt_schema(const ScreenSchema& schema);

}  // namespace sschema
